//! Greedy maximal separated nets per dyadic scale and the Whitney cell
//! complex with computable 1-Lipschitz gauges.
//!
//! A net at scale `n` is a maximal subfamily of X whose open `2^n`-balls are
//! pairwise disjoint; the doubled balls then cover X. Each (scale, center)
//! pair is a Whitney cell carrying a closed-form gauge that stands in for the
//! distance to the complement of an enlarged cell: it is
//! 1-Lipschitz, bounded by `2^(n-1)`, positive only on a controlled annulus
//! around X, and its maximum over cells dominates `dist(y, X) / 4`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math;
use crate::metric::PointSet;

/// Maximal family of points whose open r-balls are pairwise disjoint,
/// built greedily in index order.
pub fn greedy_net(x: &PointSet, r: f64) -> Vec<usize> {
    let mut centers: Vec<usize> = Vec::new();
    for i in 0..x.len() {
        // open r-balls disjoint <=> center distance >= 2r
        if centers.iter().all(|&c| x.dist_pp(c, i) >= 2.0 * r) {
            centers.push(i);
        }
    }
    centers
}

/// Net at dyadic scale `n` (ball radius `2^n`).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Net {
    pub scale: i32,
    pub center_indices: Vec<usize>,
}

impl Net {
    pub fn build(x: &PointSet, scale: i32) -> Net {
        let r = math::pow2(scale);
        Net { scale, center_indices: greedy_net(x, r) }
    }

    pub fn radius(&self) -> f64 {
        math::pow2(self.scale)
    }
}

/// Identifies one cell: a dyadic scale and the X-index of its net center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellId {
    pub scale: i32,
    pub center: usize,
}

/// One Whitney cell with its gauge parameters: the neighbor centers at the
/// same scale within `18 * 2^n` of the cell center.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WhitneyCell {
    pub scale: i32,
    pub center: usize,
    pub neighbors: Vec<usize>,
}

/// Gauge of a cell at `y`, recomputing `dist(y, X)`.
pub fn cell_gauge(y: &[f64], cell: &WhitneyCell, x: &PointSet) -> f64 {
    let (t, _) = x.dist_to_set(y).expect("dimension mismatch in cell_gauge");
    cell_gauge_with_dist(y, cell, x, t)
}

/// Gauge with `dist(y, X)` already known.
///
/// `g = max(0, min(2^(n-1), t - 2^(n-1), 2^(n+1) + 2^(n-1) - t,
///                 (7 * 2^n - d_i) / 2,
///                 2^(n-1) + min_j (d_j - d_i) / 2))`
/// where `d_i = dist(y, x_i)` and `j` ranges over the neighbor centers.
/// Every term is 1-Lipschitz in `y`, so the gauge is. The locality term
/// `(7 * 2^n - d_i) / 2` forces the center to be near the query wherever the
/// gauge is positive, which also makes the neighbor-restricted argmin term
/// agree with the argmin over all centers of the scale.
pub fn cell_gauge_with_dist(y: &[f64], cell: &WhitneyCell, x: &PointSet, t: f64) -> f64 {
    let half = math::pow2(cell.scale - 1);
    let full = math::pow2(cell.scale);
    let d_i = x.dist_to_point(y, cell.center);
    let mut g = half;
    g = g.min(t - half);
    g = g.min(2.0 * full + half - t); // 2^(n+1) + 2^(n-1) - t
    g = g.min((7.0 * full - d_i) / 2.0);
    let mut min_diff = f64::INFINITY;
    for &j in &cell.neighbors {
        let d_j = x.dist_to_point(y, j);
        if d_j - d_i < min_diff {
            min_diff = d_j - d_i;
        }
    }
    if min_diff.is_finite() {
        g = g.min(half + min_diff / 2.0);
    }
    g.max(0.0)
}

struct ScaleLevel {
    scale: i32,
    centers: Vec<usize>,
    /// neighbors[k]: X-indices of other centers within 18 * 2^n of center k.
    neighbors: Vec<Vec<usize>>,
}

/// Nets and cells for every scale in a dyadic range, with lookup of the
/// positive-gauge cells at a query.
pub struct CellComplex {
    n_min: i32,
    n_max: i32,
    levels: Vec<ScaleLevel>,
}

/// Dyadic scale range covering the given queries: `floor(log2(min dist)) - 2`
/// to `ceil(log2(max dist)) + 2`, extended downward so that the C1 window
/// `[2l * 2^n, 4l * 2^n]` (l = 3) of every query is also covered.
///
/// Queries lying exactly on X are excluded; if none remains the range is
/// empty and an error is returned.
pub fn scale_range(x: &PointSet, queries: &[Vec<f64>]) -> Result<(i32, i32), CoreError> {
    let mut t_min = f64::INFINITY;
    let mut t_max: f64 = 0.0;
    for q in queries {
        let (t, _) = x.dist_to_set(q)?;
        if t == 0.0 {
            continue;
        }
        t_min = t_min.min(t);
        t_max = t_max.max(t);
    }
    if !t_min.is_finite() {
        return Err(CoreError::NoOffSetQueries);
    }
    let mut n_min = math::floor(math::log2(t_min)) as i32 - 2;
    n_min = n_min.min(math::floor(math::log2(t_min / 6.0)) as i32 - 1);
    let n_max = math::ceil(math::log2(t_max)) as i32 + 2;
    Ok((n_min, n_max))
}

impl CellComplex {
    /// Builds the nets and neighbor lists for every scale in `[n_min, n_max]`.
    pub fn build(x: &PointSet, n_min: i32, n_max: i32) -> CellComplex {
        assert!(n_min <= n_max, "empty scale range");
        let min_gap = x.min_gap();
        let mut levels = Vec::with_capacity((n_max - n_min + 1) as usize);
        for n in n_min..=n_max {
            let r = math::pow2(n);
            let centers = if 2.0 * r <= min_gap {
                // every point is 2r-separated: the greedy net keeps all of X
                (0..x.len()).collect()
            } else {
                greedy_net(x, r)
            };
            let thresh = 18.0 * r;
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
            levels.push(ScaleLevel { scale: n, centers, neighbors });
        }
        CellComplex { n_min, n_max, levels }
    }

    pub fn scale_bounds(&self) -> (i32, i32) {
        (self.n_min, self.n_max)
    }

    pub fn net(&self, scale: i32) -> Option<Net> {
        self.level(scale).map(|l| Net { scale, center_indices: l.centers.clone() })
    }

    pub fn nets(&self) -> impl Iterator<Item = Net> + '_ {
        self.levels.iter().map(|l| Net { scale: l.scale, center_indices: l.centers.clone() })
    }

    fn level(&self, scale: i32) -> Option<&ScaleLevel> {
        if scale < self.n_min || scale > self.n_max {
            None
        } else {
            Some(&self.levels[(scale - self.n_min) as usize])
        }
    }

    /// The cell for a (scale, center-position) pair.
    pub fn cell(&self, scale: i32, pos: usize) -> Option<WhitneyCell> {
        self.level(scale).map(|l| WhitneyCell {
            scale,
            center: l.centers[pos],
            neighbors: l.neighbors[pos].clone(),
        })
    }

    /// All cells with positive gauge at `y`, as (id, gauge) pairs.
    ///
    /// At most three consecutive scales can contribute. Queries on X are
    /// rejected with [`CoreError::QueryOnSet`]; queries whose dyadic annulus
    /// is not fully inside the built range are rejected with
    /// [`CoreError::ScaleOutOfRange`].
    pub fn locate_cells(&self, x: &PointSet, y: &[f64]) -> Result<Vec<(CellId, f64)>, CoreError> {
        let (t, nearest) = x.dist_to_set(y)?;
        if t == 0.0 {
            return Err(CoreError::QueryOnSet { nearest });
        }
        // the scale certifying the covering lower bound must be present
        let n_star = math::floor(math::log2(t)) as i32;
        if n_star < self.n_min || n_star > self.n_max {
            return Err(CoreError::ScaleOutOfRange {
                scale: n_star,
                n_min: self.n_min,
                n_max: self.n_max,
            });
        }
        let mut out = Vec::new();
        for dn in -2..=1 {
            let n = n_star + dn;
            let level = match self.level(n) {
                Some(l) => l,
                None => continue,
            };
            let half = math::pow2(n - 1);
            // gauge support in t: (2^(n-1), 2^(n+1) + 2^(n-1))
            if t <= half || t >= 5.0 * half {
                continue;
            }
            let dists: Vec<f64> = level.centers.iter().map(|&c| x.dist_to_point(y, c)).collect();
            for (k, &c) in level.centers.iter().enumerate() {
                let d_i = dists[k];
                let mut g = half;
                g = g.min(t - half);
                g = g.min(5.0 * half - t);
                g = g.min((14.0 * half - d_i) / 2.0);
                if g <= 0.0 {
                    continue;
                }
                let mut min_diff = f64::INFINITY;
                for &j in &level.neighbors[k] {
                    // neighbor lists store X-indices; reuse the dists array
                    // via position lookup is not worth it at these sizes
                    let d_j = x.dist_to_point(y, j);
                    if d_j - d_i < min_diff {
                        min_diff = d_j - d_i;
                    }
                }
                if min_diff.is_finite() {
                    g = g.min(half + min_diff / 2.0);
                }
                if g > 0.0 {
                    out.push((CellId { scale: n, center: c }, g));
                }
            }
        }
        Ok(out)
    }
}
