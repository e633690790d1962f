//! Random projections of the ambient space onto the point set: finitely
//! supported probability measures `mu_y`, plus the differential vector
//! measures `nu_y` of the regular (C1) construction.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math;
use crate::metric::{AmbientSpace, PointSet};
use crate::partition::{C1Partition, LipPartition};

/// Finitely supported probability measure on indices of X.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscreteMeasure {
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Support indices must be distinct, weights nonnegative with unit mass.
    pub fn new(support: Vec<usize>, weights: Vec<f64>) -> Result<Self, CoreError> {
        if support.len() != weights.len() {
            return Err(CoreError::FieldSizeMismatch {
                expected: support.len(),
                got: weights.len(),
            });
        }
        for (k, &w) in weights.iter().enumerate() {
            if !(w >= 0.0) {
                return Err(CoreError::NonPositiveWeight { index: k });
            }
        }
        for a in 0..support.len() {
            for b in (a + 1)..support.len() {
                if support[a] == support[b] {
                    return Err(CoreError::DuplicatePoint { first: a, second: b });
                }
            }
        }
        let mass: f64 = weights.iter().sum();
        if math::abs(mass - 1.0) > 1e-12 {
            return Err(CoreError::MassMismatch { left: mass, right: 1.0 });
        }
        Ok(DiscreteMeasure { support, weights })
    }

    pub fn dirac(index: usize) -> Self {
        DiscreteMeasure { support: vec![index], weights: vec![1.0] }
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn validate_support(&self, x: &PointSet) -> Result<(), CoreError> {
        for &i in &self.support {
            if i >= x.len() {
                return Err(CoreError::SupportOutOfBounds { index: i, len: x.len() });
            }
        }
        Ok(())
    }
}

/// Finitely supported covector-valued measure on indices of X; total mass
/// (the componentwise covector sum) is zero.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VectorMeasure {
    pub support: Vec<usize>,
    pub covectors: Vec<Vec<f64>>,
}

impl VectorMeasure {
    pub fn total_mass(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for c in &self.covectors {
            for (a, v) in c.iter().enumerate() {
                out[a] += v;
            }
        }
        out
    }

    /// Total variation with covectors measured in the dual norm.
    pub fn tv_norm(&self, space: &AmbientSpace) -> f64 {
        self.covectors.iter().map(|c| space.dual_norm(c)).sum()
    }
}

/// Radial kernel for the direct projection: a C1 nonincreasing bump equal to
/// 1 on [0, 2] and 0 on [3, inf), raised to the exponent `m`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelProfile {
    pub exponent: f64,
}

impl KernelProfile {
    /// Default exponent `max(1, ln(lambda_hat) / 3)`.
    pub fn for_doubling(lambda_hat: usize) -> Self {
        KernelProfile { exponent: (math::ln(lambda_hat as f64) / 3.0).max(1.0) }
    }

    pub fn with_exponent(exponent: f64) -> Self {
        KernelProfile { exponent: exponent.max(1.0) }
    }

    /// The cubic-smoothstep bump in the distance ratio `t = |x - y| / dist(y, X)`.
    pub fn bump(t: f64) -> f64 {
        if t <= 2.0 {
            1.0
        } else if t >= 3.0 {
            0.0
        } else {
            let u = t - 2.0;
            1.0 - u * u * (3.0 - 2.0 * u)
        }
    }

    pub fn weight(&self, ratio: f64) -> f64 {
        let b = Self::bump(ratio);
        if b <= 0.0 {
            0.0
        } else if b >= 1.0 {
            1.0
        } else {
            math::powf(b, self.exponent)
        }
    }
}

/// Cell-based projection: the Lipschitz partition weights, merged over the
/// scales sharing a center. On X, the Dirac mass.
pub fn project_cells(
    y: &[f64],
    x: &PointSet,
    p: &LipPartition,
) -> Result<DiscreteMeasure, CoreError> {
    let (t, nearest) = x.dist_to_set(y)?;
    if t == 0.0 {
        return Ok(DiscreteMeasure::dirac(nearest));
    }
    let cells = p.eval(x, y)?;
    let mut support: Vec<usize> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for (id, w) in cells {
        match support.iter().position(|&c| c == id.center) {
            Some(k) => weights[k] += w,
            None => {
                support.push(id.center);
                weights.push(w);
            }
        }
    }
    sort_by_support(&mut support, &mut weights);
    Ok(DiscreteMeasure { support, weights })
}

/// Kernel-based projection: weight of `x_i` proportional to
/// `m_i * bump(|x_i - y| / dist(y, X))^m`, with `m_i` the point weights of X.
/// On X, the Dirac mass.
pub fn project_kernel(
    y: &[f64],
    x: &PointSet,
    k: &KernelProfile,
) -> Result<DiscreteMeasure, CoreError> {
    let (t, nearest) = x.dist_to_set(y)?;
    if t == 0.0 {
        return Ok(DiscreteMeasure::dirac(nearest));
    }
    let mut support: Vec<usize> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut total = 0.0;
    for i in 0..x.len() {
        let ratio = x.dist_to_point(y, i) / t;
        let w = x.weight(i) * k.weight(ratio);
        if w > 0.0 {
            support.push(i);
            weights.push(w);
            total += w;
        }
    }
    // the nearest point has ratio 1, so total >= its weight > 0
    debug_assert!(total > 0.0);
    for w in weights.iter_mut() {
        *w /= total;
    }
    Ok(DiscreteMeasure { support, weights })
}

/// Regular projection: `(mu_y, nu_y)` from the C1 partition weights and
/// their gradients, merged by center across scales.
pub fn project_regular(
    y: &[f64],
    x: &PointSet,
    p: &C1Partition,
) -> Result<(DiscreteMeasure, VectorMeasure), CoreError> {
    let d = x.dim();
    let (t, nearest) = x.dist_to_set(y)?;
    if t == 0.0 {
        let mu = DiscreteMeasure::dirac(nearest);
        let nu = VectorMeasure { support: vec![nearest], covectors: vec![vec![0.0; d]] };
        return Ok((mu, nu));
    }
    let entries = p.eval(x, y)?;
    let mut support: Vec<usize> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut covectors: Vec<Vec<f64>> = Vec::new();
    for e in entries {
        match support.iter().position(|&c| c == e.id.center) {
            Some(k) => {
                weights[k] += e.weight;
                for a in 0..d {
                    covectors[k][a] += e.grad[a];
                }
            }
            None => {
                support.push(e.id.center);
                weights.push(e.weight);
                covectors.push(e.grad);
            }
        }
    }
    let mut order: Vec<usize> = (0..support.len()).collect();
    order.sort_unstable_by_key(|&k| support[k]);
    let mu = DiscreteMeasure {
        support: order.iter().map(|&k| support[k]).collect(),
        weights: order.iter().map(|&k| weights[k]).collect(),
    };
    let nu = VectorMeasure {
        support: mu.support.clone(),
        covectors: order.iter().map(|&k| covectors[k].clone()).collect(),
    };
    Ok((mu, nu))
}

fn sort_by_support(support: &mut Vec<usize>, weights: &mut Vec<f64>) {
    let mut order: Vec<usize> = (0..support.len()).collect();
    order.sort_unstable_by_key(|&k| support[k]);
    let s: Vec<usize> = order.iter().map(|&k| support[k]).collect();
    let w: Vec<f64> = order.iter().map(|&k| weights[k]).collect();
    *support = s;
    *weights = w;
}

/// Worst W1-based difference quotient of a projection map over query pairs.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LipAuditReport {
    pub max_ratio: f64,
    pub per_pair: Vec<f64>,
}

/// Audits `W1(mu_y, mu_y') / dist(y, y')` over the given pairs; coincident
/// pairs contribute 0.
pub fn projection_lip_audit<F>(
    proj: F,
    x: &PointSet,
    pairs: &[(Vec<f64>, Vec<f64>)],
) -> Result<LipAuditReport, CoreError>
where
    F: Fn(&[f64]) -> Result<DiscreteMeasure, CoreError>,
{
    let mut per_pair = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let gap = x.space().dist(a, b)?;
        if gap == 0.0 {
            per_pair.push(0.0);
            continue;
        }
        let mu = proj(a)?;
        let nu = proj(b)?;
        let (w1, _) = crate::wasserstein::w1_exact(&mu, &nu, x)?;
        per_pair.push(w1 / gap);
    }
    let max = math::fmax_iter(per_pair.iter().copied()).unwrap_or(0.0);
    Ok(LipAuditReport { max_ratio: max, per_pair })
}
