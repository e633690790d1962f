//! Evaluable Lipschitz and C1 partitions of unity subordinate to the dyadic
//! cell/net structure, with analytic gradients in the C1 case.
//!
//! The Lipschitz partition normalizes the m-th powers of the cell gauges.
//! The C1 partition normalizes three-factor products of a C1 cutoff applied
//! to rescaled center distances, following the displayed product
//! `xi(8l - |x_i - y| / 2^n) * xi(|x_i - y| / 2^n - l) * prod_j xi(u_j - u_i + delta)`
//! with `l = 3`, `delta = 1/2` and neighbor centers `j` at distance at most
//! `2^n (9l - delta)` from `x_i`.

use alloc::vec;
use alloc::vec::Vec;

use crate::covering::{CellComplex, CellId};
use crate::error::CoreError;
use crate::math;
use crate::metric::PointSet;

/// Floor applied to partition exponents so degenerate `lambda_hat = 1`
/// instances still produce valid weights.
pub const MIN_EXPONENT: f64 = 1.01;

/// Floor for the cutoff exponent; the cap construction needs `m > 1.5`.
pub const MIN_XI_EXPONENT: f64 = 1.51;

/// Window parameter of the C1 partition.
pub const ELL: f64 = 3.0;

/// Cutoff width of the C1 partition.
pub const DELTA: f64 = 0.5;

// ---------------------------------------------------------------------------
// Lipschitz partition
// ---------------------------------------------------------------------------

/// Partition of unity obtained by normalizing `gauge^m` over the cells of a
/// complex; weights are Lipschitz but not differentiable.
pub struct LipPartition {
    complex: CellComplex,
    exponent: f64,
}

impl LipPartition {
    /// Default exponent `log2(lambda_hat)`, floored at [`MIN_EXPONENT`].
    pub fn new(complex: CellComplex, lambda_hat: usize) -> Self {
        let m = math::log2(lambda_hat as f64).max(MIN_EXPONENT);
        LipPartition { complex, exponent: m }
    }

    pub fn with_exponent(complex: CellComplex, exponent: f64) -> Self {
        LipPartition { complex, exponent: exponent.max(MIN_EXPONENT) }
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn complex(&self) -> &CellComplex {
        &self.complex
    }

    /// Sparse weights `gauge^m / sum gauge^m` at `y`; they are nonnegative
    /// and sum to 1.
    pub fn eval(&self, x: &PointSet, y: &[f64]) -> Result<Vec<(CellId, f64)>, CoreError> {
        let cells = self.complex.locate_cells(x, y)?;
        debug_assert!(!cells.is_empty());
        let mut weights: Vec<(CellId, f64)> = Vec::with_capacity(cells.len());
        let mut total = 0.0;
        for (id, g) in cells {
            let w = math::powf(g, self.exponent);
            total += w;
            weights.push((id, w));
        }
        for (_, w) in weights.iter_mut() {
            *w /= total;
        }
        Ok(weights)
    }
}

/// Free-function alias matching the operation name.
pub fn eval_lip_partition(
    p: &LipPartition,
    x: &PointSet,
    y: &[f64],
) -> Result<Vec<(CellId, f64)>, CoreError> {
    p.eval(x, y)
}

// ---------------------------------------------------------------------------
// C1 cutoff
// ---------------------------------------------------------------------------

/// Increasing C1 cutoff with `xi(t) = 0` for `t <= 0`, `xi(t) = 1` for
/// `t >= delta`, satisfying the differential inequality `xi' <= f(xi)` for
/// the concave envelope `f(v) = (2m / delta) v^(1 - 1/m)`.
///
/// Branch structure: the equality-ODE branch `(2t/delta)^m` up to value 1/2
/// at `t1 = (delta/2) (1/2)^(1/m)`, then a short quadratic that brings the
/// slope down from `f(1/2)` to a mild value, then a monotone cubic Hermite
/// piece landing at `(delta, 1)` with zero slope. The grid check runs at
/// construction and failure aborts the build.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CutoffXi {
    m: f64,
    delta: f64,
    /// End of the equality-ODE branch (value 1/2).
    t1: f64,
    /// End of the quadratic slope-reduction piece (value 3/4).
    t2: f64,
    /// Slope at `t1`, equal to `f(1/2)`.
    slope_t1: f64,
    /// Slope at `t2`.
    slope_t2: f64,
}

/// Builds the cutoff and verifies `xi' <= f(xi)` on a 10^4-point grid;
/// a violation signals an invalid `(m, delta)` pair and aborts.
pub fn build_xi(m: f64, delta: f64) -> Result<CutoffXi, CoreError> {
    if !(m > 1.5) || !(delta > 0.0) {
        return Err(CoreError::InvalidCutoff { max_violation: f64::NAN });
    }
    let t1 = (delta / 2.0) * math::powf(0.5, 1.0 / m);
    let slope_t1 = envelope(m, delta, 0.5);
    // target slope for the Hermite piece, well inside the monotone region
    let slope_t2 = 0.25 / (delta - t1);
    let w = 0.5 / (slope_t1 + slope_t2);
    let t2 = t1 + w;
    let xi = CutoffXi { m, delta, t1, t2, slope_t1, slope_t2 };
    if !(t2 < delta) {
        return Err(CoreError::InvalidCutoff { max_violation: f64::NAN });
    }
    let mut max_violation: f64 = f64::NEG_INFINITY;
    let grid = 10_000;
    for k in 0..=grid {
        let t = delta * k as f64 / grid as f64;
        let (v, d) = xi.eval_with_deriv(t);
        max_violation = max_violation.max(d - xi.envelope_at(v));
    }
    if max_violation > 1e-12 {
        return Err(CoreError::InvalidCutoff { max_violation });
    }
    Ok(xi)
}

fn envelope(m: f64, delta: f64, v: f64) -> f64 {
    (2.0 * m / delta) * math::powf(v, 1.0 - 1.0 / m)
}

impl CutoffXi {
    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn branch_point(&self) -> f64 {
        self.t1
    }

    /// The concave envelope `f(v) = (2m/delta) v^(1 - 1/m)`.
    pub fn envelope_at(&self, v: f64) -> f64 {
        if v <= 0.0 {
            0.0
        } else {
            envelope(self.m, self.delta, v)
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_deriv(t).0
    }

    pub fn eval_with_deriv(&self, t: f64) -> (f64, f64) {
        if t <= 0.0 {
            (0.0, 0.0)
        } else if t <= self.t1 {
            let v = math::powf(2.0 * t / self.delta, self.m);
            // on the equality branch xi' = f(xi) exactly
            (v, self.envelope_at(v))
        } else if t <= self.t2 {
            let tau = t - self.t1;
            let w = self.t2 - self.t1;
            let drop = (self.slope_t1 - self.slope_t2) / w;
            let v = 0.5 + self.slope_t1 * tau - 0.5 * drop * tau * tau;
            (v, self.slope_t1 - drop * tau)
        } else if t < self.delta {
            let h = self.delta - self.t2;
            let u = (t - self.t2) / h;
            let (p0, p1, m0) = (0.75, 1.0, self.slope_t2);
            let h00 = (2.0 * u - 3.0) * u * u + 1.0;
            let h10 = ((u - 2.0) * u + 1.0) * u;
            let h01 = (3.0 - 2.0 * u) * u * u;
            let v = p0 * h00 + h * m0 * h10 + p1 * h01;
            let d00 = (6.0 * u - 6.0) * u;
            let d10 = (3.0 * u - 4.0) * u + 1.0;
            let d01 = (6.0 - 6.0 * u) * u;
            let d = (p0 * d00 + h * m0 * d10 + p1 * d01) / h;
            (v, d)
        } else {
            (1.0, 0.0)
        }
    }
}

// ---------------------------------------------------------------------------
// C1 partition
// ---------------------------------------------------------------------------

struct C1Level {
    centers: Vec<usize>,
    /// X-indices of the centers `j` with `|x_j - x_i| <= 2^n (9l - delta)`.
    neighbors: Vec<Vec<usize>>,
}

/// C1 partition of unity off X with analytic gradients.
pub struct C1Partition {
    n_min: i32,
    n_max: i32,
    levels: Vec<C1Level>,
    exponent: f64,
    xi: CutoffXi,
}

/// One sparse entry of a C1 partition evaluation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct C1Weight {
    pub id: CellId,
    pub weight: f64,
    pub grad: Vec<f64>,
}

impl C1Partition {
    /// Builds nets and neighbor lists over `[n_min, n_max]` with exponent
    /// `m = ln(4 lambda_hat^6)`, floored at [`MIN_XI_EXPONENT`].
    pub fn build(
        x: &PointSet,
        n_min: i32,
        n_max: i32,
        lambda_hat: usize,
    ) -> Result<Self, CoreError> {
        let lam = lambda_hat as f64;
        let m = math::ln(4.0 * math::powf(lam, 6.0)).max(MIN_XI_EXPONENT);
        Self::build_with_exponent(x, n_min, n_max, m)
    }

    pub fn build_with_exponent(
        x: &PointSet,
        n_min: i32,
        n_max: i32,
        exponent: f64,
    ) -> Result<Self, CoreError> {
        assert!(n_min <= n_max, "empty scale range");
        let xi = build_xi(exponent, DELTA)?;
        let min_gap = x.min_gap();
        let mut levels = Vec::with_capacity((n_max - n_min + 1) as usize);
        for n in n_min..=n_max {
            let r = math::pow2(n);
            let centers: Vec<usize> = if 2.0 * r <= min_gap {
                (0..x.len()).collect()
            } else {
                crate::covering::greedy_net(x, r)
            };
            let thresh = r * (9.0 * ELL - DELTA);
            let k = centers.len();
            let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); k];
            // below min_gap no two distinct points can be neighbors
            if thresh >= min_gap {
                for a in 0..k {
                    for b in (a + 1)..k {
                        if x.dist_pp(centers[a], centers[b]) <= thresh {
                            neighbors[a].push(centers[b]);
                            neighbors[b].push(centers[a]);
                        }
                    }
                }
            }
            levels.push(C1Level { centers, neighbors });
        }
        Ok(C1Partition { n_min, n_max, levels, exponent, xi })
    }

    pub fn scale_bounds(&self) -> (i32, i32) {
        (self.n_min, self.n_max)
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn xi(&self) -> &CutoffXi {
        &self.xi
    }

    /// Sparse C1 weights and their gradients at `y`. Weights sum to 1 and
    /// the gradients sum to the zero vector.
    pub fn eval(&self, x: &PointSet, y: &[f64]) -> Result<Vec<C1Weight>, CoreError> {
        self.eval_impl(x, y, true)
    }

    /// Weight-only evaluation, skipping all gradient work.
    pub fn eval_weights(&self, x: &PointSet, y: &[f64]) -> Result<Vec<(CellId, f64)>, CoreError> {
        let entries = self.eval_impl(x, y, false)?;
        Ok(entries.into_iter().map(|e| (e.id, e.weight)).collect())
    }

    fn eval_impl(&self, x: &PointSet, y: &[f64], grads: bool) -> Result<Vec<C1Weight>, CoreError> {
        let (t, nearest) = x.dist_to_set(y)?;
        if t == 0.0 {
            return Err(CoreError::QueryOnSet { nearest });
        }
        let d = x.dim();
        // raw support: (l - 2 - delta) 2^n <= t <= 8 l 2^n
        let lo_scale = math::ceil(math::log2(t / (8.0 * ELL))) as i32;
        let hi_scale = math::floor(math::log2(t / (ELL - 2.0 - DELTA))) as i32;
        // the window scale with a guaranteed unit raw weight must be built
        let window_scale = math::floor(math::log2(t / (2.0 * ELL))) as i32;
        if window_scale < self.n_min || window_scale > self.n_max {
            return Err(CoreError::ScaleOutOfRange {
                scale: window_scale,
                n_min: self.n_min,
                n_max: self.n_max,
            });
        }

        struct Factor {
            value: f64,
            deriv: f64,
            /// X-index whose rescaled distance this factor depends on
            /// (positively); `sign < 0` flips it.
            point: usize,
            sign: f64,
            /// The i-center enters every factor with opposite sign except
            /// the first, where it enters negatively alone.
            with_center: bool,
        }

        let mut entries: Vec<C1Weight> = Vec::new();
        let mut total = 0.0;
        let mut total_grad = vec![0.0f64; d];
        let mut diff = vec![0.0f64; d];
        let mut ngrad = vec![0.0f64; d];

        for n in lo_scale.max(self.n_min)..=hi_scale.min(self.n_max) {
            let level = &self.levels[(n - self.n_min) as usize];
            let inv_r = 1.0 / math::pow2(n);
            let dists: Vec<f64> = level.centers.iter().map(|&c| x.dist_to_point(y, c)).collect();
            'center: for (k, &c) in level.centers.iter().enumerate() {
                let u_i = dists[k] * inv_r;
                if u_i <= ELL || u_i >= 8.0 * ELL {
                    continue;
                }
                let mut factors: Vec<Factor> = Vec::with_capacity(2 + level.neighbors[k].len());
                let (v, dv) = self.xi.eval_with_deriv(8.0 * ELL - u_i);
                if v <= 0.0 {
                    continue;
                }
                factors.push(Factor { value: v, deriv: dv, point: c, sign: -1.0, with_center: false });
                let (v, dv) = self.xi.eval_with_deriv(u_i - ELL);
                if v <= 0.0 {
                    continue;
                }
                factors.push(Factor { value: v, deriv: dv, point: c, sign: 1.0, with_center: false });
                for &j in &level.neighbors[k] {
                    let u_j = x.dist_to_point(y, j) * inv_r;
                    let (v, dv) = self.xi.eval_with_deriv(u_j - u_i + DELTA);
                    if v <= 0.0 {
                        continue 'center;
                    }
                    factors.push(Factor { value: v, deriv: dv, point: j, sign: 1.0, with_center: true });
                }

                let raw: f64 = factors.iter().map(|f| f.value).product();
                debug_assert!(raw > 0.0);
                total += raw;

                let mut grad = vec![0.0f64; d];
                if grads {
                    // raw weights vanish for |x_i - y| <= l 2^n, so the norm
                    // gradient is never taken at the origin
                    debug_assert!(dists[k] > 0.0);
                    // gradient of u_i, shared by several factors
                    let mut gu_i = vec![0.0f64; d];
                    for a in 0..d {
                        diff[a] = y[a] - x.point(c)[a];
                    }
                    x.space().norm_gradient(&diff, &mut ngrad);
                    for a in 0..d {
                        gu_i[a] = ngrad[a] * inv_r;
                    }
                    // prefix/suffix products for leave-one-out factors
                    let kf = factors.len();
                    let mut prefix = vec![1.0f64; kf + 1];
                    for (fi, f) in factors.iter().enumerate() {
                        prefix[fi + 1] = prefix[fi] * f.value;
                    }
                    let mut suffix = 1.0f64;
                    for fi in (0..kf).rev() {
                        let f = &factors[fi];
                        let others = prefix[fi] * suffix;
                        suffix *= f.value;
                        if f.deriv == 0.0 {
                            continue;
                        }
                        let scale = others * f.deriv;
                        if f.with_center {
                            // arg = u_j - u_i + delta
                            for a in 0..d {
                                diff[a] = y[a] - x.point(f.point)[a];
                            }
                            x.space().norm_gradient(&diff, &mut ngrad);
                            for a in 0..d {
                                grad[a] += scale * (ngrad[a] * inv_r - gu_i[a]);
                            }
                        } else {
                            for a in 0..d {
                                grad[a] += scale * f.sign * gu_i[a];
                            }
                        }
                    }
                    for a in 0..d {
                        total_grad[a] += grad[a];
                    }
                }
                entries.push(C1Weight { id: CellId { scale: n, center: c }, weight: raw, grad });
            }
        }

        if entries.is_empty() || total <= 0.0 {
            return Err(CoreError::ScaleOutOfRange {
                scale: window_scale,
                n_min: self.n_min,
                n_max: self.n_max,
            });
        }
        // normalize: w = raw / S, grad w = grad raw / S - raw grad S / S^2
        for e in entries.iter_mut() {
            let raw = e.weight;
            e.weight = raw / total;
            if grads {
                for a in 0..d {
                    e.grad[a] = e.grad[a] / total - raw * total_grad[a] / (total * total);
                }
            }
        }
        Ok(entries)
    }
}

/// Free-function alias matching the operation name.
pub fn eval_c1_partition(
    p: &C1Partition,
    x: &PointSet,
    y: &[f64],
) -> Result<Vec<C1Weight>, CoreError> {
    p.eval(x, y)
}

// ---------------------------------------------------------------------------
// Slope-sum audits
// ---------------------------------------------------------------------------

/// Result of a slope-sum audit: the worst value of
/// `dist(y, X) * sum_i |grad phi_i|(y)` over the queries.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SlopeSumReport {
    pub max_scaled_sum: f64,
    pub per_query: Vec<f64>,
}

/// Finite-difference slope-sum audit for the Lipschitz partition (its
/// weights are not differentiable, so slopes are probed numerically).
pub fn slope_sum_audit_lip(
    p: &LipPartition,
    x: &PointSet,
    queries: &[Vec<f64>],
    h_rel: f64,
) -> Result<SlopeSumReport, CoreError> {
    let d = x.dim();
    let mut per_query = Vec::with_capacity(queries.len());
    for y in queries {
        let (t, _) = x.dist_to_set(y)?;
        if t == 0.0 {
            per_query.push(0.0);
            continue;
        }
        let h = h_rel * t;
        let base = p.eval(x, y)?;
        let mut probe = y.clone();
        let mut slopes: Vec<(CellId, f64)> = base.iter().map(|&(id, _)| (id, 0.0)).collect();
        for a in 0..d {
            for s in [-1.0, 1.0] {
                probe[a] = y[a] + s * h;
                if let Ok(shifted) = p.eval(x, &probe) {
                    for (id, w) in &shifted {
                        if !slopes.iter().any(|&(sid, _)| sid == *id) {
                            slopes.push((*id, 0.0));
                        }
                        let _ = w;
                    }
                    for (id, sl) in slopes.iter_mut() {
                        let w0 = base.iter().find(|&&(b, _)| b == *id).map_or(0.0, |&(_, w)| w);
                        let w1 = shifted.iter().find(|&&(b, _)| b == *id).map_or(0.0, |&(_, w)| w);
                        let rate = math::abs(w1 - w0) / h;
                        if rate > *sl {
                            *sl = rate;
                        }
                    }
                }
                probe[a] = y[a];
            }
        }
        let sum: f64 = slopes.iter().map(|&(_, s)| s).sum();
        per_query.push(t * sum);
    }
    let max = math::fmax_iter(per_query.iter().copied()).unwrap_or(0.0);
    Ok(SlopeSumReport { max_scaled_sum: max, per_query })
}

/// Analytic slope-sum audit for the C1 partition.
pub fn slope_sum_audit_c1(
    p: &C1Partition,
    x: &PointSet,
    queries: &[Vec<f64>],
) -> Result<SlopeSumReport, CoreError> {
    let mut per_query = Vec::with_capacity(queries.len());
    for y in queries {
        let (t, _) = x.dist_to_set(y)?;
        if t == 0.0 {
            per_query.push(0.0);
            continue;
        }
        let entries = p.eval(x, y)?;
        let sum: f64 = entries.iter().map(|e| x.space().dual_norm(&e.grad)).sum();
        per_query.push(t * sum);
    }
    let max = math::fmax_iter(per_query.iter().copied()).unwrap_or(0.0);
    Ok(SlopeSumReport { max_scaled_sum: max, per_query })
}
