//! Ambient-space geometry, distance oracles, and estimators for the doubling
//! constant and the metric capacity of a finite point set.
//!
//! Balls are open throughout; membership tests use strict inequality.
//! Doubling and capacity are estimated with centers restricted to the point
//! set itself, which keeps everything computable on finite data; the reported
//! quantities are written `lambda_hat` and `kappa_hat` to stress that they
//! are estimates relative to X-centered configurations.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math;

/// A d-dimensional vector space normed by the p-norm, 1 < p < inf.
///
/// The open interval for `p` keeps the norm continuously differentiable away
/// from the origin, which the C1 machinery relies on.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AmbientSpace {
    dim: usize,
    norm_exponent: f64,
}

impl AmbientSpace {
    pub fn new(dim: usize, norm_exponent: f64) -> Result<Self, CoreError> {
        if dim == 0 {
            return Err(CoreError::DimensionMismatch { expected: 1, got: 0 });
        }
        if !(norm_exponent > 1.0) || !norm_exponent.is_finite() {
            return Err(CoreError::InvalidNormExponent(norm_exponent));
        }
        Ok(AmbientSpace { dim, norm_exponent })
    }

    /// Euclidean space of dimension `dim` (p = 2).
    pub fn euclidean(dim: usize) -> Self {
        AmbientSpace { dim, norm_exponent: 2.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm_exponent(&self) -> f64 {
        self.norm_exponent
    }

    /// p-norm of a vector.
    pub fn norm(&self, v: &[f64]) -> f64 {
        let p = self.norm_exponent;
        if p == 2.0 {
            let mut s = 0.0;
            for &c in v {
                s += c * c;
            }
            math::sqrt(s)
        } else {
            let mut s = 0.0;
            for &c in v {
                s += math::powf(math::abs(c), p);
            }
            math::powf(s, 1.0 / p)
        }
    }

    /// Distance between two points.
    pub fn dist(&self, a: &[f64], b: &[f64]) -> Result<f64, CoreError> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        Ok(self.dist_unchecked(a, b))
    }

    pub(crate) fn dist_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        let p = self.norm_exponent;
        if p == 2.0 {
            let mut s = 0.0;
            for i in 0..a.len() {
                let c = a[i] - b[i];
                s += c * c;
            }
            math::sqrt(s)
        } else {
            let mut s = 0.0;
            for i in 0..a.len() {
                s += math::powf(math::abs(a[i] - b[i]), p);
            }
            math::powf(s, 1.0 / p)
        }
    }

    /// Gradient of `v -> ||v||_p` at `v != 0`.
    ///
    /// The result acts on directions through the Euclidean pairing; its dual
    /// q-norm is 1.
    pub fn norm_gradient(&self, v: &[f64], out: &mut [f64]) {
        let p = self.norm_exponent;
        let n = self.norm(v);
        debug_assert!(n > 0.0, "norm gradient evaluated at the origin");
        if p == 2.0 {
            for i in 0..v.len() {
                out[i] = v[i] / n;
            }
        } else {
            for i in 0..v.len() {
                let a = math::abs(v[i]);
                let g = if a == 0.0 {
                    0.0
                } else {
                    math::powf(a / n, p - 1.0)
                };
                out[i] = if v[i] < 0.0 { -g } else { g };
            }
        }
    }

    /// Dual (q-)norm of a covector, 1/p + 1/q = 1.
    pub fn dual_norm(&self, c: &[f64]) -> f64 {
        let p = self.norm_exponent;
        if p == 2.0 {
            let mut s = 0.0;
            for &x in c {
                s += x * x;
            }
            math::sqrt(s)
        } else {
            let q = p / (p - 1.0);
            let mut s = 0.0;
            for &x in c {
                s += math::powf(math::abs(x), q);
            }
            math::powf(s, 1.0 / q)
        }
    }

    fn check_dim(&self, v: &[f64]) -> Result<(), CoreError> {
        if v.len() != self.dim {
            Err(CoreError::DimensionMismatch { expected: self.dim, got: v.len() })
        } else {
            Ok(())
        }
    }
}

/// The finite subset X of the ambient space, with optional per-point weights
/// playing the role of the reference measure.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointSet {
    space: AmbientSpace,
    coords: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl PointSet {
    /// Builds a point set from row-major coordinates.
    ///
    /// Points must be pairwise distinct and weights, when given, strictly
    /// positive.
    pub fn new(space: AmbientSpace, points: &[Vec<f64>]) -> Result<Self, CoreError> {
        let mut coords = Vec::with_capacity(points.len() * space.dim());
        for p in points {
            if p.len() != space.dim() {
                return Err(CoreError::DimensionMismatch { expected: space.dim(), got: p.len() });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(space, coords, None)
    }

    /// Builds from a flat row-major coordinate buffer of length `n * dim`.
    pub fn from_flat(
        space: AmbientSpace,
        coords: Vec<f64>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self, CoreError> {
        let d = space.dim();
        if coords.is_empty() || coords.len() % d != 0 {
            return Err(CoreError::EmptyPointSet);
        }
        let n = coords.len() / d;
        if let Some(w) = &weights {
            if w.len() != n {
                return Err(CoreError::FieldSizeMismatch { expected: n, got: w.len() });
            }
            for (i, &wi) in w.iter().enumerate() {
                if !(wi > 0.0) {
                    return Err(CoreError::NonPositiveWeight { index: i });
                }
            }
        }
        let set = PointSet { space, coords, weights };
        for i in 0..n {
            for j in (i + 1)..n {
                if set.point(i) == set.point(j) {
                    return Err(CoreError::DuplicatePoint { first: i, second: j });
                }
            }
        }
        Ok(set)
    }

    pub fn space(&self) -> &AmbientSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.space.dim()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty sets
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.space.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    /// Weight of point `i`; defaults to the counting measure.
    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    pub fn has_weights(&self) -> bool {
        self.weights.is_some()
    }

    /// Distance between two points of the set.
    pub fn dist_pp(&self, i: usize, j: usize) -> f64 {
        self.space.dist_unchecked(self.point(i), self.point(j))
    }

    /// Distance from `y` to point `i` of the set.
    pub fn dist_to_point(&self, y: &[f64], i: usize) -> f64 {
        self.space.dist_unchecked(y, self.point(i))
    }

    /// Exact distance from `y` to the set, with the index of the nearest
    /// point. Ties break to the lowest index, so repeated calls agree.
    pub fn dist_to_set(&self, y: &[f64]) -> Result<(f64, usize), CoreError> {
        if y.len() != self.dim() {
            return Err(CoreError::DimensionMismatch { expected: self.dim(), got: y.len() });
        }
        let mut best = f64::INFINITY;
        let mut best_i = 0;
        for i in 0..self.len() {
            let d = self.dist_to_point(y, i);
            if d < best {
                best = d;
                best_i = i;
            }
        }
        Ok((best, best_i))
    }

    /// Minimum pairwise distance of the set (infinity for a singleton).
    pub fn min_gap(&self) -> f64 {
        let mut g = f64::INFINITY;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let d = self.dist_pp(i, j);
                if d < g {
                    g = d;
                }
            }
        }
        g
    }

    /// Diameter of the set (0 for a singleton).
    pub fn diameter(&self) -> f64 {
        let mut g = 0.0;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let d = self.dist_pp(i, j);
                if d > g {
                    g = d;
                }
            }
        }
        g
    }
}

/// Upper-bound estimate of the doubling constant restricted to X-centered
/// balls, together with the audited (center, radius) pairs.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DoublingEstimate {
    pub lambda_hat: usize,
    /// (center index, radius) pairs whose covers were computed.
    pub sampled_pairs: Vec<(usize, f64)>,
    /// Pair attaining `lambda_hat`.
    pub witness: (usize, f64),
}

/// Certified lower bound for the metric capacity `kappa_X(eps)`, witnessed by
/// an explicit disjoint packing.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CapacityEstimate {
    pub epsilon: f64,
    pub kappa_hat: usize,
    /// True when the search exhausted all X-centered configurations, making
    /// `kappa_hat` exact over them rather than only a lower bound.
    pub exhaustive: bool,
    /// Enclosing center, radius, and packed-ball centers of the best packing.
    pub witness_center: usize,
    pub witness_radius: f64,
    pub witness_packing: Vec<usize>,
}

/// Search budget for [`estimate_capacity`].
#[derive(Debug, Clone)]
pub struct CapacityConfig {
    /// Exhaust all center subsets; only feasible for small sets.
    pub exhaustive: bool,
    /// Cap on enclosing centers scanned in greedy mode.
    pub max_centers: usize,
    /// Cap on radii scanned in greedy mode.
    pub max_radii: usize,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        CapacityConfig { exhaustive: false, max_centers: 64, max_radii: 64 }
    }
}

/// The finite set of radii at which X-centered cover counts can change:
/// all pairwise distances and their halves.
pub fn critical_radii(x: &PointSet) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = x.dist_pp(i, j);
            out.push(d);
            out.push(d / 2.0);
        }
    }
    if out.is_empty() {
        out.push(1.0); // singleton: any radius gives the same answer
    }
    dedup_sorted(&mut out);
    out
}

/// Radius grid for doubling estimation: the full critical set for small sets,
/// a dyadic sweep between min gap and diameter otherwise.
pub fn default_radius_grid(x: &PointSet, critical_cap: usize) -> Vec<f64> {
    if x.len() <= critical_cap {
        return critical_radii(x);
    }
    let lo = x.min_gap() / 4.0;
    let hi = x.diameter();
    let mut out = Vec::new();
    let mut r = lo;
    while r <= hi * 2.0 {
        out.push(r);
        r *= 2.0;
    }
    out
}

/// Greedy upper-bound estimator of the doubling constant: for every center
/// `x` in `centers` and radius `r` in the grid, covers `B(x, 2r) ∩ X` by open
/// r-balls centered at points of X and takes the worst count.
pub fn estimate_doubling_sampled(
    x: &PointSet,
    radius_grid: &[f64],
    centers: &[usize],
) -> DoublingEstimate {
    let n = x.len();
    let mut lambda_hat = 1;
    let mut sampled = Vec::with_capacity(centers.len() * radius_grid.len());
    let mut witness = (centers.first().copied().unwrap_or(0), radius_grid.first().copied().unwrap_or(1.0));
    let mut dists = vec![0.0f64; n];
    let mut covered = vec![false; n];
    for &c in centers {
        for i in 0..n {
            dists[i] = x.dist_pp(c, i);
        }
        for &r in radius_grid {
            sampled.push((c, r));
            let count = cover_count(x, &dists, r, &mut covered);
            if count > lambda_hat {
                lambda_hat = count;
                witness = (c, r);
            }
        }
    }
    DoublingEstimate { lambda_hat, sampled_pairs: sampled, witness }
}

/// Balls with at most this many members get an exact minimum cover.
const EXACT_COVER_CAP: usize = 22;

/// Number of r-balls centered at points of X needed to cover the doubled
/// ball whose member distances are `dists`. Exact (branch-and-bound set
/// cover) for small balls; greedy otherwise. The greedy ball centers are
/// pairwise r-separated, and the exact count never exceeds the greedy one.
fn cover_count(x: &PointSet, dists: &[f64], r: f64, covered: &mut [bool]) -> usize {
    let n = x.len();
    let members: Vec<usize> = (0..n).filter(|&i| dists[i] < 2.0 * r).collect();
    let m = members.len();
    if m <= 1 {
        return m;
    }
    if m <= EXACT_COVER_CAP {
        // candidate centers must lie within r of a member, hence within 3r
        let mut masks: Vec<u32> = Vec::new();
        for s in 0..n {
            if dists[s] >= 3.0 * r {
                continue;
            }
            let mut mask = 0u32;
            for (bit, &i) in members.iter().enumerate() {
                if x.dist_pp(s, i) < r {
                    mask |= 1 << bit;
                }
            }
            if mask != 0 {
                masks.push(mask);
            }
        }
        // drop dominated candidates
        masks.sort_unstable_by_key(|msk| core::cmp::Reverse(msk.count_ones()));
        let mut kept: Vec<u32> = Vec::new();
        for msk in masks {
            if !kept.iter().any(|&k| k & msk == msk) {
                kept.push(msk);
            }
        }
        let full = (1u32 << m) - 1;
        let mut best = greedy_cover_bound(&kept, full);
        branch_cover(&kept, full, 0, 0, &mut best);
        best
    } else {
        for v in covered.iter_mut() {
            *v = false;
        }
        let mut count = 0usize;
        for (a, &i) in members.iter().enumerate() {
            if covered[a] {
                continue;
            }
            count += 1;
            let pi = x.point(i);
            for (b, &j) in members.iter().enumerate().skip(a) {
                if !covered[b] && x.space.dist_unchecked(pi, x.point(j)) < r {
                    covered[b] = true;
                }
            }
        }
        count
    }
}

fn greedy_cover_bound(masks: &[u32], full: u32) -> usize {
    let mut covered = 0u32;
    let mut count = 0usize;
    while covered != full {
        let best = masks
            .iter()
            .copied()
            .max_by_key(|msk| (msk & !covered).count_ones())
            .expect("members always cover themselves");
        debug_assert!(best & !covered != 0);
        covered |= best;
        count += 1;
    }
    count
}

fn branch_cover(masks: &[u32], full: u32, covered: u32, used: usize, best: &mut usize) {
    if covered == full {
        if used < *best {
            *best = used;
        }
        return;
    }
    let remaining = (full & !covered).count_ones() as usize;
    let maxcov = masks
        .iter()
        .map(|msk| (msk & !covered).count_ones() as usize)
        .max()
        .unwrap_or(0);
    if maxcov == 0 || used + remaining.div_ceil(maxcov) >= *best {
        return;
    }
    // branch on the uncovered element with the fewest covering candidates
    let mut pick = 0u32;
    let mut pick_cnt = usize::MAX;
    for bit in 0..32u32 {
        let b = 1u32 << bit;
        if full & b != 0 && covered & b == 0 {
            let cnt = masks.iter().filter(|&&msk| msk & b != 0).count();
            if cnt < pick_cnt {
                pick_cnt = cnt;
                pick = b;
            }
        }
    }
    for &msk in masks.iter().filter(|&&msk| msk & pick != 0) {
        branch_cover(masks, full, covered | msk, used + 1, best);
    }
}

/// [`estimate_doubling_sampled`] with centers ranging over all of X.
pub fn estimate_doubling(x: &PointSet, radius_grid: &[f64]) -> DoublingEstimate {
    let centers: Vec<usize> = (0..x.len()).collect();
    estimate_doubling_sampled(x, radius_grid, &centers)
}

/// Greedy (optionally exhaustive) packing estimator for the metric capacity:
/// the maximum number of disjoint `eps * r` balls packable inside an r-ball,
/// over X-centered configurations.
pub fn estimate_capacity(x: &PointSet, epsilon: f64, cfg: &CapacityConfig) -> CapacityEstimate {
    debug_assert!(epsilon > 0.0 && epsilon <= 1.0);
    let n = x.len();
    let radii = capacity_radii(x, epsilon);

    let (centers, radii, exhaustive) = if cfg.exhaustive {
        ((0..n).collect::<Vec<_>>(), radii, true)
    } else {
        let centers = stride_sample(n, cfg.max_centers);
        let radii_idx = stride_sample(radii.len(), cfg.max_radii);
        let radii: Vec<f64> = radii_idx.iter().map(|&i| radii[i]).collect();
        (centers, radii, false)
    };

    let mut best = CapacityEstimate {
        epsilon,
        kappa_hat: 1,
        exhaustive,
        witness_center: 0,
        witness_radius: radii.first().copied().unwrap_or(1.0),
        witness_packing: vec![0],
    };

    for &c0 in &centers {
        for &r in &radii {
            let er = epsilon * r;
            // Feasible packed-ball centers: B(s, eps r) ⊆ B(c0, r) as subsets
            // of X, i.e. every point within eps r of s lies within r of c0.
            let mut feasible: Vec<usize> = Vec::new();
            'cand: for s in 0..n {
                for w in 0..n {
                    if x.dist_pp(w, s) < er && !(x.dist_pp(w, c0) < r) {
                        continue 'cand;
                    }
                }
                feasible.push(s);
            }
            if feasible.len() <= best.kappa_hat {
                continue;
            }
            // Compatibility: no point of X lies in both eps r balls.
            let k = feasible.len();
            let mut compat = vec![true; k * k];
            for a in 0..k {
                for b in (a + 1)..k {
                    let mut ok = true;
                    for w in 0..n {
                        if x.dist_pp(w, feasible[a]) < er && x.dist_pp(w, feasible[b]) < er {
                            ok = false;
                            break;
                        }
                    }
                    compat[a * k + b] = ok;
                    compat[b * k + a] = ok;
                }
            }
            let packing = if exhaustive {
                max_clique(&compat, k)
            } else {
                greedy_clique(&compat, k)
            };
            if packing.len() > best.kappa_hat {
                best.kappa_hat = packing.len();
                best.witness_center = c0;
                best.witness_radius = r;
                best.witness_packing = packing.iter().map(|&i| feasible[i]).collect();
            }
        }
    }
    best
}

/// Candidate enclosing radii for the capacity search: right endpoints of the
/// intervals on which all ball predicates are constant, plus midpoints and
/// extremes for safety.
fn capacity_radii(x: &PointSet, epsilon: f64) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = x.dist_pp(i, j);
            out.push(d);
            out.push(d / epsilon);
        }
    }
    if out.is_empty() {
        return vec![1.0];
    }
    dedup_sorted(&mut out);
    let mut full = Vec::with_capacity(out.len() * 2 + 2);
    full.push(out[0] / 2.0);
    for w in 0..out.len() {
        full.push(out[w]);
        if w + 1 < out.len() {
            full.push((out[w] + out[w + 1]) / 2.0);
        }
    }
    full.push(out[out.len() - 1] * 2.0);
    full
}

fn dedup_sorted(v: &mut Vec<f64>) {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
}

fn stride_sample(n: usize, cap: usize) -> Vec<usize> {
    if n <= cap {
        (0..n).collect()
    } else {
        (0..cap).map(|i| i * n / cap).collect()
    }
}

/// Exact maximum clique by branch and bound; intended for small candidate
/// sets only.
fn max_clique(compat: &[bool], k: usize) -> Vec<usize> {
    let mut best: Vec<usize> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let candidates: Vec<usize> = (0..k).collect();
    fn recurse(
        compat: &[bool],
        k: usize,
        current: &mut Vec<usize>,
        candidates: &[usize],
        best: &mut Vec<usize>,
    ) {
        if current.len() + candidates.len() <= best.len() {
            return;
        }
        if candidates.is_empty() {
            if current.len() > best.len() {
                *best = current.clone();
            }
            return;
        }
        for (pos, &c) in candidates.iter().enumerate() {
            if current.len() + (candidates.len() - pos) <= best.len() {
                break;
            }
            current.push(c);
            let rest: Vec<usize> = candidates[pos + 1..]
                .iter()
                .copied()
                .filter(|&o| compat[c * k + o])
                .collect();
            recurse(compat, k, current, &rest, best);
            current.pop();
        }
    }
    recurse(compat, k, &mut current, &candidates, &mut best);
    best
}

/// Greedy clique in index order with a single improvement pass.
fn greedy_clique(compat: &[bool], k: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for c in 0..k {
        if chosen.iter().all(|&o| compat[c * k + o]) {
            chosen.push(c);
        }
    }
    // local search: swapping one member for two others
    let mut improved = true;
    while improved {
        improved = false;
        for drop_pos in 0..chosen.len() {
            let mut trial: Vec<usize> = chosen
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != drop_pos)
                .map(|(_, &c)| c)
                .collect();
            for c in 0..k {
                if !trial.contains(&c) && trial.iter().all(|&o| compat[c * k + o]) {
                    trial.push(c);
                }
            }
            if trial.len() > chosen.len() {
                trial.sort_unstable();
                chosen = trial;
                improved = true;
                break;
            }
        }
    }
    chosen
}

/// Report from [`slope_estimate`]: the empirical slope and how many probes
/// were skipped because the field was undefined there.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SlopeReport {
    pub value: f64,
    pub probes: usize,
    pub skipped: usize,
}

/// Empirical lower approximation of the slope |∇F|(y) by finite differences
/// along the given directions at the given probe radii.
pub fn slope_estimate<F>(
    space: &AmbientSpace,
    field: F,
    y: &[f64],
    probe_radii: &[f64],
    directions: &[Vec<f64>],
) -> Result<SlopeReport, CoreError>
where
    F: Fn(&[f64]) -> Option<f64>,
{
    if y.len() != space.dim() {
        return Err(CoreError::DimensionMismatch { expected: space.dim(), got: y.len() });
    }
    let f0 = field(y).ok_or(CoreError::NoOffSetQueries)?;
    let mut value: f64 = 0.0;
    let mut probes = 0usize;
    let mut skipped = 0usize;
    let mut probe = vec![0.0f64; y.len()];
    for &h in probe_radii {
        for dir in directions {
            let dn = space.norm(dir);
            if dn == 0.0 {
                continue;
            }
            for i in 0..y.len() {
                probe[i] = y[i] + h * dir[i] / dn;
            }
            probes += 1;
            match field(&probe) {
                Some(fv) => {
                    let s = math::abs(fv - f0) / h;
                    if s > value {
                        value = s;
                    }
                }
                None => skipped += 1,
            }
        }
    }
    Ok(SlopeReport { value, probes, skipped })
}

/// Coordinate directions and their negatives, the default probe set.
pub fn coordinate_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(2 * dim);
    for i in 0..dim {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        dirs.push(v.clone());
        v[i] = -1.0;
        dirs.push(v);
    }
    dirs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set_1d(pts: &[f64]) -> PointSet {
        let v: Vec<Vec<f64>> = pts.iter().map(|&p| vec![p]).collect();
        PointSet::new(AmbientSpace::euclidean(1), &v).unwrap()
    }

    #[test]
    fn dist_identity_and_pythagoras() {
        let s = AmbientSpace::euclidean(2);
        assert_eq!(s.dist(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(s.dist(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        let s1 = AmbientSpace::euclidean(1);
        assert_eq!(s1.dist(&[0.0], &[3.0]).unwrap(), 3.0);
    }

    #[test]
    fn dist_dimension_mismatch() {
        let s = AmbientSpace::euclidean(2);
        assert!(matches!(
            s.dist(&[0.0], &[1.0, 2.0]),
            Err(CoreError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dist_to_set_examples() {
        let x = set_1d(&[0.0, 1.0]);
        let (d, i) = x.dist_to_set(&[0.25]).unwrap();
        assert_eq!((d, i), (0.25, 0));
        // tie breaks to the lowest index
        let (d, i) = x.dist_to_set(&[0.5]).unwrap();
        assert_eq!((d, i), (0.5, 0));
        // a point of the set maps to itself
        let (d, i) = x.dist_to_set(&[1.0]).unwrap();
        assert_eq!((d, i), (0.0, 1));
    }

    #[test]
    fn dist_to_set_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let x = PointSet::new(AmbientSpace::euclidean(2), &pts).unwrap();
        for _ in 0..200 {
            let y = [rng.gen::<f64>() * 2.0 - 0.5, rng.gen::<f64>() * 2.0 - 0.5];
            let (d, i) = x.dist_to_set(&y).unwrap();
            let mut bd = f64::INFINITY;
            let mut bi = 0;
            for j in 0..x.len() {
                let dj = x.dist_to_point(&y, j);
                if dj < bd {
                    bd = dj;
                    bi = j;
                }
            }
            assert_eq!((d, i), (bd, bi));
        }
    }

    #[test]
    fn triangle_inequality_random_triples() {
        use rand::{Rng, SeedableRng};
        for &p in &[2.0, 1.5, 3.0] {
            let s = AmbientSpace::new(3, p).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
            for _ in 0..100_000 {
                let a: [f64; 3] = rng.gen();
                let b: [f64; 3] = rng.gen();
                let c: [f64; 3] = rng.gen();
                let ab = s.dist(&a, &b).unwrap();
                let bc = s.dist(&b, &c).unwrap();
                let ac = s.dist(&a, &c).unwrap();
                assert!(ac <= ab + bc + 1e-12 * (ab + bc).max(1.0));
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(AmbientSpace::new(2, 1.0).is_err());
        assert!(AmbientSpace::new(2, f64::INFINITY).is_err());
        assert!(PointSet::new(AmbientSpace::euclidean(1), &[]).is_err());
        assert!(PointSet::new(AmbientSpace::euclidean(1), &[vec![0.0], vec![0.0]]).is_err());
        assert!(PointSet::from_flat(
            AmbientSpace::euclidean(1),
            alloc::vec![0.0, 1.0],
            Some(alloc::vec![1.0, 0.0])
        )
        .is_err());
    }

    #[test]
    fn doubling_singleton_and_pair() {
        let x = set_1d(&[0.0]);
        let est = estimate_doubling(&x, &default_radius_grid(&x, 64));
        assert_eq!(est.lambda_hat, 1);
        let x = set_1d(&[0.0, 1.0]);
        let est = estimate_doubling(&x, &default_radius_grid(&x, 64));
        assert!(est.lambda_hat <= 2);
    }

    /// Brute-force minimal X-centered cover of B(x, 2r) ∩ X by r-balls.
    fn min_cover(x: &PointSet, c: usize, r: f64) -> usize {
        let n = x.len();
        let members: Vec<usize> = (0..n).filter(|&i| x.dist_pp(c, i) < 2.0 * r).collect();
        if members.is_empty() {
            return 0;
        }
        let masks: Vec<u32> = (0..n)
            .map(|s| {
                let mut m = 0u32;
                for (bit, &i) in members.iter().enumerate() {
                    if x.dist_pp(s, i) < r {
                        m |= 1 << bit;
                    }
                }
                m
            })
            .collect();
        let full = (1u32 << members.len()) - 1;
        for size in 1..=n {
            if search_cover(&masks, full, 0, 0, size) {
                return size;
            }
        }
        n
    }

    fn search_cover(masks: &[u32], full: u32, covered: u32, start: usize, left: usize) -> bool {
        if covered == full {
            return true;
        }
        if left == 0 || start >= masks.len() {
            return false;
        }
        for s in start..masks.len() {
            if masks[s] & !covered != 0
                && search_cover(masks, full, covered | masks[s], s + 1, left - 1)
            {
                return true;
            }
        }
        false
    }

    #[test]
    fn doubling_matches_exhaustive_cover_on_grid8() {
        let pts: Vec<f64> = (0..8).map(|i| i as f64 / 7.0).collect();
        let x = set_1d(&pts);
        let grid = critical_radii(&x);
        let est = estimate_doubling(&x, &grid);
        let mut oracle = 1;
        for c in 0..x.len() {
            for &r in &grid {
                oracle = oracle.max(min_cover(&x, c, r));
            }
        }
        assert_eq!(est.lambda_hat, oracle);
    }

    /// Exhaustive capacity oracle over X-centered configurations, enumerating
    /// all center subsets at every critical radius.
    fn capacity_oracle(x: &PointSet, eps: f64) -> usize {
        let n = x.len();
        assert!(n <= 12);
        let radii = capacity_radii(x, eps);
        let mut best = 1;
        for c0 in 0..n {
            for &r in &radii {
                let er = eps * r;
                'subset: for mask in 1u32..(1 << n) {
                    let centers: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                    if centers.len() <= best {
                        continue;
                    }
                    for &s in &centers {
                        for w in 0..n {
                            if x.dist_pp(w, s) < er && !(x.dist_pp(w, c0) < r) {
                                continue 'subset;
                            }
                        }
                    }
                    for a in 0..centers.len() {
                        for b in (a + 1)..centers.len() {
                            for w in 0..n {
                                if x.dist_pp(w, centers[a]) < er && x.dist_pp(w, centers[b]) < er {
                                    continue 'subset;
                                }
                            }
                        }
                    }
                    best = centers.len();
                }
            }
        }
        best
    }

    #[test]
    fn capacity_singleton_and_three_points() {
        let x = set_1d(&[0.0]);
        let cfg = CapacityConfig { exhaustive: true, ..Default::default() };
        let est = estimate_capacity(&x, 0.5, &cfg);
        assert_eq!(est.kappa_hat, 1);

        let x = set_1d(&[0.0, 1.0, 2.0]);
        let est = estimate_capacity(&x, 0.2, &cfg);
        assert_eq!(est.kappa_hat, capacity_oracle(&x, 0.2));
    }

    #[test]
    fn prop_comparing_kappa_and_lambda_on_exhaustive_instances() {
        let cfg = CapacityConfig { exhaustive: true, ..Default::default() };
        let instances = [
            set_1d(&[0.0, 1.0, 2.0]),
            set_1d(&(0..8).map(|i| i as f64 / 7.0).collect::<Vec<_>>()),
            set_1d(&[0.0, 0.1, 0.5, 2.0, 2.1]),
            PointSet::new(
                AmbientSpace::euclidean(2),
                &[
                    vec![0.0, 0.0],
                    vec![1.0, 0.0],
                    vec![0.0, 1.0],
                    vec![1.0, 1.0],
                    vec![0.5, 0.5],
                ],
            )
            .unwrap(),
        ];
        for x in &instances {
            let lambda = estimate_doubling(x, &critical_radii(x)).lambda_hat;
            let kappa5 = estimate_capacity(x, 0.2, &cfg).kappa_hat;
            assert!(lambda <= kappa5, "lambda_hat {lambda} > kappa_hat(1/5) {kappa5}");
            // kappa(eps) <= lambda^k for the dyadic k with 2^-k < eps <= 2^-(k-1)
            for &(eps, k) in &[(0.2, 3u32), (0.3, 2), (0.6, 1)] {
                let kap = estimate_capacity(x, eps, &cfg).kappa_hat;
                assert!(kap <= lambda.pow(k), "kappa({eps}) = {kap} > lambda^{k}");
            }
        }
    }

    #[test]
    fn greedy_capacity_is_lower_bound() {
        let pts: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let x = set_1d(&pts);
        let cfg = CapacityConfig { exhaustive: false, max_centers: 5, max_radii: 10 };
        let est = estimate_capacity(&x, 0.2, &cfg);
        assert!(!est.exhaustive);
        assert!(est.kappa_hat >= 1);
        // witness really is a valid packing
        let er = est.epsilon * est.witness_radius;
        let c0 = est.witness_center;
        for &s in &est.witness_packing {
            for w in 0..x.len() {
                assert!(!(x.dist_pp(w, s) < er) || x.dist_pp(w, c0) < est.witness_radius);
            }
        }
    }

    #[test]
    fn slope_examples() {
        let s = AmbientSpace::euclidean(1);
        let dirs = coordinate_directions(1);
        let radii = [1e-3, 1e-5, 1e-7];
        let rep = slope_estimate(&s, |_| Some(2.5), &[0.3], &radii, &dirs).unwrap();
        assert_eq!(rep.value, 0.0);
        let rep = slope_estimate(&s, |y| Some(3.0 * y[0]), &[0.3], &radii, &dirs).unwrap();
        assert!((rep.value - 3.0).abs() < 1e-9);
        let s2 = AmbientSpace::euclidean(2);
        // the slope of the norm is attained along the radial direction, so
        // the direction sample must include it
        let mut dirs2 = coordinate_directions(2);
        let r5 = (1.25f64).sqrt();
        dirs2.push(vec![1.0 / r5, 0.5 / r5]);
        let rep = slope_estimate(
            &s2,
            |y| Some(s2.norm(y)),
            &[1.0, 0.5],
            &[1e-4, 1e-6],
            &dirs2,
        )
        .unwrap();
        assert!((rep.value - 1.0).abs() < 1e-3, "slope = {}", rep.value);
    }

    #[test]
    fn slope_skips_undefined_probes() {
        let s = AmbientSpace::euclidean(1);
        let rep = slope_estimate(
            &s,
            |y| if y[0] > 0.35 { None } else { Some(y[0]) },
            &[0.3],
            &[0.1],
            &coordinate_directions(1),
        )
        .unwrap();
        assert_eq!(rep.skipped, 1);
        assert!((rep.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_gradient_has_unit_dual_norm() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for &p in &[2.0, 1.5, 4.0] {
            let s = AmbientSpace::new(3, p).unwrap();
            let mut g = [0.0; 3];
            for _ in 0..100 {
                let v: [f64; 3] = [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5];
                s.norm_gradient(&v, &mut g);
                assert!((s.dual_norm(&g) - 1.0).abs() < 1e-10);
                // gradient pairs with v to give the norm (Euler homogeneity)
                let pair: f64 = v.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
                assert!((pair - s.norm(&v)).abs() < 1e-10);
            }
        }
    }
}
