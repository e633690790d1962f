//! Linear extension operators built on the random projections: the
//! Lipschitz extension `Tf(y) = sum w_i f(x_i)` and the C1 Whitney
//! extension of a first-order jet, with its analytic differential and
//! remainder diagnostics.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math;
use crate::metric::PointSet;
use crate::partition::{C1Partition, LipPartition};
use crate::projection::{self, DiscreteMeasure, KernelProfile};

/// R^k-valued function values on the points of X, stored flat per point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalarField {
    pub k: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(k: usize, values: Vec<f64>, points: usize) -> Result<Self, CoreError> {
        if k == 0 || values.len() != k * points {
            return Err(CoreError::FieldSizeMismatch { expected: k * points, got: values.len() });
        }
        Ok(ScalarField { k, values })
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    /// Exact Lipschitz constant over pairs, codomain in the max norm.
    pub fn lip(&self, x: &PointSet) -> f64 {
        let mut lip = 0.0f64;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let num = math::fmax_iter(
                    self.value(i)
                        .iter()
                        .zip(self.value(j))
                        .map(|(a, b)| math::abs(a - b)),
                )
                .unwrap_or(0.0);
                let r = num / x.dist_pp(i, j);
                if r > lip {
                    lip = r;
                }
            }
        }
        lip
    }
}

/// First-order jet: values and differentials `L_x` (k x d, row major) per
/// point of X.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Jet {
    pub k: usize,
    pub d: usize,
    values: Vec<f64>,
    differentials: Vec<f64>,
}

impl Jet {
    pub fn new(
        k: usize,
        d: usize,
        values: Vec<f64>,
        differentials: Vec<f64>,
        points: usize,
    ) -> Result<Self, CoreError> {
        if k == 0 || values.len() != k * points {
            return Err(CoreError::FieldSizeMismatch { expected: k * points, got: values.len() });
        }
        if differentials.len() != k * d * points {
            return Err(CoreError::FieldSizeMismatch {
                expected: k * d * points,
                got: differentials.len(),
            });
        }
        Ok(Jet { k, d, values, differentials })
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    /// The k x d matrix `L_{x_i}`, row major.
    pub fn differential(&self, i: usize) -> &[f64] {
        let s = self.k * self.d;
        &self.differentials[i * s..(i + 1) * s]
    }

    /// `L_{x_i} v` for a d-vector `v`.
    pub fn apply_differential(&self, i: usize, v: &[f64], out: &mut [f64]) {
        let l = self.differential(i);
        for c in 0..self.k {
            let mut acc = 0.0;
            for a in 0..self.d {
                acc += l[c * self.d + a] * v[a];
            }
            out[c] = acc;
        }
    }
}

/// Which random projection backs the Lipschitz extension.
pub enum Projector<'a> {
    Kernel(&'a KernelProfile),
    Cells(&'a LipPartition),
}

impl Projector<'_> {
    pub fn project(&self, y: &[f64], x: &PointSet) -> Result<DiscreteMeasure, CoreError> {
        match self {
            Projector::Kernel(k) => projection::project_kernel(y, x, k),
            Projector::Cells(p) => projection::project_cells(y, x, p),
        }
    }
}

/// `Tf(y) = sum w_i f(x_i)` for the chosen projection. On X this is exact
/// restriction (the Dirac weight is the literal constant 1).
pub fn extend_lip(
    f: &ScalarField,
    x: &PointSet,
    proj: &Projector<'_>,
    y: &[f64],
) -> Result<Vec<f64>, CoreError> {
    if f.len() != x.len() {
        return Err(CoreError::FieldSizeMismatch { expected: x.len() * f.k, got: f.len() * f.k });
    }
    let mu = proj.project(y, x)?;
    Ok(pair_measure(f, &mu))
}

/// `int f dmu` for a precomputed measure.
pub fn pair_measure(f: &ScalarField, mu: &DiscreteMeasure) -> Vec<f64> {
    let mut out = vec![0.0; f.k];
    for (&i, &w) in mu.support.iter().zip(&mu.weights) {
        if w == 1.0 && mu.support.len() == 1 {
            // Dirac: restriction must be bitwise exact
            out.copy_from_slice(f.value(i));
            return out;
        }
        for (c, v) in f.value(i).iter().enumerate() {
            out[c] += w * v;
        }
    }
    out
}

/// Whitney extension `sum w_i [f(x_i) + L_{x_i}(y - x_i)]`. On X, exact
/// restriction.
pub fn extend_c1(
    j: &Jet,
    x: &PointSet,
    p: &C1Partition,
    y: &[f64],
) -> Result<Vec<f64>, CoreError> {
    check_jet(j, x)?;
    let (t, nearest) = x.dist_to_set(y)?;
    if t == 0.0 {
        return Ok(j.value(nearest).to_vec());
    }
    let weights = p.eval_weights(x, y)?;
    let d = x.dim();
    let mut out = vec![0.0; j.k];
    let mut diff = vec![0.0; d];
    let mut lv = vec![0.0; j.k];
    for (id, w) in weights {
        let i = id.center;
        for a in 0..d {
            diff[a] = y[a] - x.point(i)[a];
        }
        j.apply_differential(i, &diff, &mut lv);
        for c in 0..j.k {
            out[c] += w * (j.value(i)[c] + lv[c]);
        }
    }
    Ok(out)
}

/// Analytic differential of the Whitney extension:
/// `sum w_i L_{x_i} + sum [f(x_i) + L_{x_i}(y - x_i)] (x) c_i`
/// with `c_i` the covectors of `nu_y`. Returns a k x d matrix, row major.
pub fn differential_c1(
    j: &Jet,
    x: &PointSet,
    p: &C1Partition,
    y: &[f64],
) -> Result<Vec<f64>, CoreError> {
    check_jet(j, x)?;
    let (t, nearest) = x.dist_to_set(y)?;
    if t == 0.0 {
        return Ok(j.differential(nearest).to_vec());
    }
    let entries = p.eval(x, y)?;
    let d = x.dim();
    let mut out = vec![0.0; j.k * d];
    let mut diff = vec![0.0; d];
    let mut lv = vec![0.0; j.k];
    for e in &entries {
        let i = e.id.center;
        let l = j.differential(i);
        for a in 0..d {
            diff[a] = y[a] - x.point(i)[a];
        }
        j.apply_differential(i, &diff, &mut lv);
        for c in 0..j.k {
            for a in 0..d {
                out[c * d + a] +=
                    e.weight * l[c * d + a] + (j.value(i)[c] + lv[c]) * e.grad[a];
            }
        }
    }
    Ok(out)
}

/// Jet remainder `R(x, y) = f(y) - f(x) - L_x(y - x)` for set points
/// `x = x_src`, `y = x_dst`.
pub fn remainder(j: &Jet, x: &PointSet, src: usize, dst: usize) -> Result<Vec<f64>, CoreError> {
    check_jet(j, x)?;
    if src == dst {
        return Err(CoreError::DiagonalRemainder { index: src });
    }
    let d = x.dim();
    let mut diff = vec![0.0; d];
    for a in 0..d {
        diff[a] = x.point(dst)[a] - x.point(src)[a];
    }
    let mut lv = vec![0.0; j.k];
    j.apply_differential(src, &diff, &mut lv);
    let mut out = vec![0.0; j.k];
    for c in 0..j.k {
        out[c] = j.value(dst)[c] - j.value(src)[c] - lv[c];
    }
    Ok(out)
}

/// Remainder modulus curve `omega(t) = max over pairs |x-y| <= t of
/// |R(x,y)| / |x-y|` (codomain max norm), one entry per requested radius.
pub fn remainder_modulus(j: &Jet, x: &PointSet, radii: &[f64]) -> Result<Vec<f64>, CoreError> {
    check_jet(j, x)?;
    let n = x.len();
    // collect the per-pair rates once, then take prefix maxima per radius
    let mut rates: Vec<(f64, f64)> = Vec::with_capacity(n * (n - 1));
    for src in 0..n {
        for dst in 0..n {
            if src == dst {
                continue;
            }
            let gap = x.dist_pp(src, dst);
            let r = remainder(j, x, src, dst)?;
            let norm = math::fmax_iter(r.iter().map(|v| math::abs(*v))).unwrap_or(0.0);
            rates.push((gap, norm / gap));
        }
    }
    Ok(radii
        .iter()
        .map(|&t| {
            math::fmax_iter(rates.iter().filter(|&&(g, _)| g <= t).map(|&(_, r)| r))
                .unwrap_or(0.0)
        })
        .collect())
}

/// Decay curve of the remainder integral along one approach sequence.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayCurve {
    /// `(int |R(z, x)| dmu_y) / |x - y|` per step, for `mu_y` itself.
    pub mu_ratios: Vec<f64>,
    /// Same ratio for the normalized variation measure `dist(y, X) |nu_y| / C`.
    pub nu_ratios: Vec<f64>,
}

/// Audits the remainder-integral decay along sequences `y_s = x + 2^{-s} v0`
/// approaching `x` in X, for both `mu_y` and the normalized `|nu_y|`.
pub fn remainder_integral_audit(
    j: &Jet,
    x: &PointSet,
    p: &C1Partition,
    sequences: &[(usize, Vec<f64>)],
    steps: usize,
) -> Result<Vec<DecayCurve>, CoreError> {
    check_jet(j, x)?;
    let d = x.dim();
    let mut curves = Vec::with_capacity(sequences.len());
    for (target, v0) in sequences {
        let base = x.point(*target).to_vec();
        let mut mu_ratios = Vec::with_capacity(steps);
        let mut nu_ratios = Vec::with_capacity(steps);
        let mut scale = 1.0;
        for _ in 0..steps {
            let y: Vec<f64> = (0..d).map(|a| base[a] + scale * v0[a]).collect();
            scale *= 0.5;
            let gap = x.dist_to_point(&y, *target);
            if gap == 0.0 {
                mu_ratios.push(0.0);
                nu_ratios.push(0.0);
                continue;
            }
            let (mu, nu) = projection::project_regular(&y, x, p)?;
            let integrand = |i: usize| -> Result<f64, CoreError> {
                if i == *target {
                    return Ok(0.0);
                }
                let r = remainder(j, x, i, *target)?;
                Ok(math::fmax_iter(r.iter().map(|v| math::abs(*v))).unwrap_or(0.0))
            };
            let mut mu_int = 0.0;
            for (&i, &w) in mu.support.iter().zip(&mu.weights) {
                mu_int += w * integrand(i)?;
            }
            let tv = nu.tv_norm(x.space());
            let mut nu_int = 0.0;
            if tv > 0.0 {
                for (&i, c) in nu.support.iter().zip(&nu.covectors) {
                    // normalized variation measure: mass |c_i| t / (t tv) = |c_i| / tv
                    nu_int += x.space().dual_norm(c) / tv * integrand(i)?;
                }
            }
            mu_ratios.push(mu_int / gap);
            nu_ratios.push(nu_int / gap);
        }
        curves.push(DecayCurve { mu_ratios, nu_ratios });
    }
    Ok(curves)
}

/// Summary artifact populated by verification runs.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExtensionReport {
    pub lip_ratio: f64,
    pub c1_gradient_error: f64,
    pub remainder_decay: Vec<f64>,
    pub affine_reproduction_error: f64,
}

fn check_jet(j: &Jet, x: &PointSet) -> Result<(), CoreError> {
    if j.len() != x.len() {
        return Err(CoreError::FieldSizeMismatch { expected: x.len(), got: j.len() });
    }
    if j.d != x.dim() {
        return Err(CoreError::DimensionMismatch { expected: x.dim(), got: j.d });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::CellComplex;
    use crate::metric::AmbientSpace;
    use rand::{Rng, SeedableRng};

    fn set_1d(pts: &[f64]) -> PointSet {
        let v: Vec<Vec<f64>> = pts.iter().map(|&p| vec![p]).collect();
        PointSet::new(AmbientSpace::euclidean(1), &v).unwrap()
    }

    fn grid_1d(n: usize) -> PointSet {
        set_1d(&(0..n).map(|i| i as f64 / (n - 1) as f64).collect::<Vec<_>>())
    }

    fn square_jet(x: &PointSet) -> Jet {
        // f(t) = t^2, L_t = 2t on the line
        let values: Vec<f64> = (0..x.len()).map(|i| x.point(i)[0] * x.point(i)[0]).collect();
        let diffs: Vec<f64> = (0..x.len()).map(|i| 2.0 * x.point(i)[0]).collect();
        Jet::new(1, 1, values, diffs, x.len()).unwrap()
    }

    fn affine_jet_2d(x: &PointSet, a: &[[f64; 2]; 2], b: &[f64; 2]) -> Jet {
        let mut values = Vec::new();
        let mut diffs = Vec::new();
        for i in 0..x.len() {
            let p = x.point(i);
            for c in 0..2 {
                values.push(a[c][0] * p[0] + a[c][1] * p[1] + b[c]);
            }
            for c in 0..2 {
                diffs.extend_from_slice(&a[c]);
            }
        }
        Jet::new(2, 2, values, diffs, x.len()).unwrap()
    }

    #[test]
    fn restriction_is_bitwise_exact() {
        let x = set_1d(&[0.0, 0.3, 1.0]);
        let f = ScalarField::new(1, vec![0.1 + 0.2, -1.7, 3.33], 3).unwrap();
        let p = LipPartition::new(CellComplex::build(&x, -8, 2), 2);
        let k = KernelProfile::for_doubling(2);
        let c1 = C1Partition::build(&x, -8, 2, 2).unwrap();
        let j = square_jet(&x);
        for i in 0..3 {
            let y = x.point(i).to_vec();
            for proj in [Projector::Cells(&p), Projector::Kernel(&k)] {
                let v = extend_lip(&f, &x, &proj, &y).unwrap();
                assert_eq!(v[0].to_bits(), f.value(i)[0].to_bits());
            }
            let v = extend_c1(&j, &x, &c1, &y).unwrap();
            assert_eq!(v[0].to_bits(), j.value(i)[0].to_bits());
        }
    }

    #[test]
    fn constant_and_kernel_hand_examples() {
        let x = set_1d(&[0.0, 1.0]);
        let c = ScalarField::new(1, vec![2.75, 2.75], 2).unwrap();
        let f = ScalarField::new(1, vec![0.0, 1.0], 2).unwrap();
        let k = KernelProfile::for_doubling(2);
        let proj = Projector::Kernel(&k);
        for &y in &[0.5, 0.25, 0.9, -0.4] {
            let v = extend_lip(&c, &x, &proj, &[y]).unwrap();
            assert!((v[0] - 2.75).abs() < 1e-15);
        }
        assert!((extend_lip(&f, &x, &proj, &[0.5]).unwrap()[0] - 0.5).abs() < 1e-15);
        assert_eq!(extend_lip(&f, &x, &proj, &[0.25]).unwrap()[0], 0.0);
    }

    #[test]
    fn extension_is_linear_in_the_data() {
        let x = grid_1d(6);
        let p = LipPartition::new(CellComplex::build(&x, -10, 2), 2);
        let proj = Projector::Cells(&p);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(30);
        let fv: Vec<f64> = (0..6).map(|_| rng.gen::<f64>()).collect();
        let gv: Vec<f64> = (0..6).map(|_| rng.gen::<f64>()).collect();
        let f = ScalarField::new(1, fv.clone(), 6).unwrap();
        let g = ScalarField::new(1, gv.clone(), 6).unwrap();
        for _ in 0..50 {
            let alpha = rng.gen::<f64>() * 4.0 - 2.0;
            let beta = rng.gen::<f64>() * 4.0 - 2.0;
            let comb: Vec<f64> = fv.iter().zip(&gv).map(|(a, b)| alpha * a + beta * b).collect();
            let h = ScalarField::new(1, comb, 6).unwrap();
            let y = [rng.gen::<f64>() * 1.4 - 0.2];
            if x.dist_to_set(&y).unwrap().0 < 0.01 {
                continue;
            }
            let lhs = extend_lip(&h, &x, &proj, &y).unwrap()[0];
            let rhs = alpha * extend_lip(&f, &x, &proj, &y).unwrap()[0]
                + beta * extend_lip(&g, &x, &proj, &y).unwrap()[0];
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_jets_are_reproduced_exactly() {
        let mut pts = Vec::new();
        for i in 0..4 {
            for jj in 0..4 {
                pts.push(vec![i as f64 / 3.0, jj as f64 / 3.0]);
            }
        }
        let x = PointSet::new(AmbientSpace::euclidean(2), &pts).unwrap();
        let a = [[1.5, -0.25], [0.75, 2.0]];
        let b = [0.5, -1.0];
        let j = affine_jet_2d(&x, &a, &b);
        let c1 = C1Partition::build(&x, -16, 3, 4).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let y = [rng.gen::<f64>() * 1.4 - 0.2, rng.gen::<f64>() * 1.4 - 0.2];
            if x.dist_to_set(&y).unwrap().0 < 1e-4 {
                continue;
            }
            let v = extend_c1(&j, &x, &c1, &y).unwrap();
            for c in 0..2 {
                let want = a[c][0] * y[0] + a[c][1] * y[1] + b[c];
                assert!((v[c] - want).abs() < 1e-10, "affine value {} vs {want}", v[c]);
            }
            // covectors sum to zero, so the differential is exactly A
            let m = differential_c1(&j, &x, &c1, &y).unwrap();
            for c in 0..2 {
                for d in 0..2 {
                    assert!((m[c * 2 + d] - a[c][d]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn differential_matches_finite_differences() {
        let x = grid_1d(8);
        let j = square_jet(&x);
        let c1 = C1Partition::build(&x, -20, 2, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(32);
        let h = 1e-5;
        let mut tested = 0;
        while tested < 100 {
            let y = [rng.gen::<f64>() * 1.4 - 0.2];
            let (t, _) = x.dist_to_set(&y).unwrap();
            if t < 100.0 * h {
                continue;
            }
            let anal = differential_c1(&j, &x, &c1, &y).unwrap()[0];
            let fd_at = |h: f64| {
                let vp = extend_c1(&j, &x, &c1, &[y[0] + h]).unwrap()[0];
                let vm = extend_c1(&j, &x, &c1, &[y[0] - h]).unwrap()[0];
                (vp - vm) / (2.0 * h)
            };
            // relative to the natural gradient scale of the data (Lip ~ 2)
            let scale = anal.abs().max(1.0);
            let fd = fd_at(h);
            if (fd - fd_at(h / 10.0)).abs() / scale > 1e-5 {
                // stencil straddles a curvature seam: the extension is C1
                // but not C2 there, so central differences degrade to O(h)
                continue;
            }
            assert!((anal - fd).abs() / scale < 1e-4, "analytic {anal} vs fd {fd}");
            tested += 1;
        }
    }

    #[test]
    fn differential_converges_to_jet_on_x() {
        let x = grid_1d(8);
        let j = square_jet(&x);
        let c1 = C1Partition::build(&x, -40, 2, 2).unwrap();
        let target = 3; // interior point
        let l = j.differential(target)[0];
        let mut err = f64::INFINITY;
        let mut off = 0.04;
        for _ in 0..20 {
            let y = [x.point(target)[0] + off];
            err = (differential_c1(&j, &x, &c1, &y).unwrap()[0] - l).abs();
            off *= 0.5;
        }
        assert!(err < 1e-3, "df did not approach L_x: final error {err}");
    }

    #[test]
    fn remainder_algebra() {
        let x = grid_1d(5);
        let j = square_jet(&x);
        // R(x, y) = (y - x)^2 for the square jet
        for s in 0..5 {
            for t in 0..5 {
                if s == t {
                    assert!(matches!(
                        remainder(&j, &x, s, t),
                        Err(CoreError::DiagonalRemainder { .. })
                    ));
                    continue;
                }
                let gap = x.point(t)[0] - x.point(s)[0];
                let r = remainder(&j, &x, s, t).unwrap()[0];
                assert!((r - gap * gap).abs() < 1e-14);
                // R(x,y) + R(y,x) = (L_y - L_x)(y - x)
                let rr = remainder(&j, &x, t, s).unwrap()[0];
                let ident = (j.differential(t)[0] - j.differential(s)[0]) * gap;
                assert!((r + rr - ident).abs() < 1e-13);
            }
        }
        // affine jets have zero remainder
        let values: Vec<f64> = (0..5).map(|i| 3.0 * x.point(i)[0] + 1.0).collect();
        let aff = Jet::new(1, 1, values, vec![3.0; 5], 5).unwrap();
        assert!((remainder(&aff, &x, 0, 4).unwrap()[0]).abs() < 1e-14);
    }

    #[test]
    fn remainder_modulus_curves() {
        let x = grid_1d(11);
        let j = square_jet(&x);
        let radii = [1.0, 0.5, 0.2, 0.1];
        let omega = remainder_modulus(&j, &x, &radii).unwrap();
        // omega(t) = largest pair gap <= t, since |R|/gap = gap
        for (&t, &w) in radii.iter().zip(&omega) {
            assert!(w <= t + 1e-12);
            assert!(w >= t - 0.1 - 1e-12, "omega({t}) = {w} too small for spacing 0.1");
        }
        // nonincreasing in decreasing radius order
        for k in 1..omega.len() {
            assert!(omega[k] <= omega[k - 1] + 1e-15);
        }
        let values: Vec<f64> = (0..11).map(|i| -2.0 * x.point(i)[0] + 0.5).collect();
        let aff = Jet::new(1, 1, values, vec![-2.0; 11], 11).unwrap();
        let omega = remainder_modulus(&aff, &x, &radii).unwrap();
        assert!(omega.iter().all(|&w| w < 1e-13));
    }

    #[test]
    fn remainder_integral_decays_along_sequences() {
        let x = grid_1d(9);
        let c1 = C1Partition::build(&x, -40, 2, 2).unwrap();
        let j = square_jet(&x);
        let seqs = [(2usize, vec![0.05]), (5usize, vec![-0.05])];
        let curves = remainder_integral_audit(&j, &x, &c1, &seqs, 10).unwrap();
        for c in &curves {
            let first = c.mu_ratios[0].max(c.nu_ratios[0]);
            let last = *c.mu_ratios.last().unwrap();
            let last_nu = *c.nu_ratios.last().unwrap();
            assert!(last < first && last_nu <= first.max(1e-30), "no decay: {c:?}");
            // quadratic remainder: roughly geometric decay overall
            assert!(last < 0.25 * c.mu_ratios[0].max(1e-30));
        }
        // affine jet: identically zero curves
        let values: Vec<f64> = (0..9).map(|i| 3.0 * x.point(i)[0]).collect();
        let aff = Jet::new(1, 1, values, vec![3.0; 9], 9).unwrap();
        let curves = remainder_integral_audit(&aff, &x, &c1, &seqs, 6).unwrap();
        for c in &curves {
            assert!(c.mu_ratios.iter().all(|&r| r < 1e-12));
            assert!(c.nu_ratios.iter().all(|&r| r < 1e-12));
        }
    }

    #[test]
    fn whitney_value_respects_remainder_bound_between_close_points() {
        let x = grid_1d(21); // spacing 0.05
        let c1 = C1Partition::build(&x, -40, 2, 2).unwrap();
        let j = square_jet(&x);
        let gap = 0.05;
        let omega = remainder_modulus(&j, &x, &[gap]).unwrap()[0];
        for mid in [0.225, 0.525, 0.875] {
            let v = extend_c1(&j, &x, &c1, &[mid]).unwrap()[0];
            // weights draw on nearby points, so the error stays within a
            // small multiple of omega(gap) * gap
            assert!(
                (v - mid * mid).abs() <= 4.0 * omega * gap,
                "value {v} vs {} beyond remainder bound",
                mid * mid
            );
        }
    }
}
