//! Ground-truth test functions: McShane-form Lipschitz functions with known
//! constant 1, and reference jets for the C1 checks.

use lipext_core::extension::{Jet, ScalarField};
use lipext_core::metric::{AmbientSpace, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// `f(y) = min_j (v_j + |y - q_j|)`: an inf-convolution of cones, 1-Lipschitz
/// by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McShane {
    pub anchors: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

impl McShane {
    pub fn random(d: usize, anchors: usize, seed: u64) -> Self {
        assert!(anchors >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let anchors: Vec<Vec<f64>> = (0..anchors)
            .map(|_| (0..d).map(|_| rng.gen::<f64>() * 1.5 - 0.25).collect())
            .collect();
        let offsets: Vec<f64> = (0..anchors.len()).map(|_| rng.gen::<f64>()).collect();
        McShane { anchors, offsets }
    }

    /// Like [`McShane::random`], but the first anchor sits at the origin with
    /// offset 0 and the remaining offsets are kept >= 0.7. On any set that
    /// contains the origin corner plus a nearby point along a coordinate axis
    /// the restriction then attains Lipschitz constant exactly 1.
    pub fn anchored(d: usize, extra_anchors: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut anchors = vec![vec![0.0; d]];
        let mut offsets = vec![0.0];
        for _ in 0..extra_anchors {
            anchors.push((0..d).map(|_| rng.gen::<f64>() * 1.5 - 0.25).collect());
            offsets.push(0.7 + 0.8 * rng.gen::<f64>());
        }
        McShane { anchors, offsets }
    }

    pub fn eval(&self, space: &AmbientSpace, y: &[f64]) -> f64 {
        self.anchors
            .iter()
            .zip(&self.offsets)
            .map(|(q, &v)| v + space.dist(y, q).expect("anchor dimension"))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Samples a McShane function on X; the exact pairwise Lipschitz constant is
/// at most 1 and is reported by [`ScalarField::lip`].
pub fn mcshane_field(x: &PointSet, f: &McShane) -> ScalarField {
    let values: Vec<f64> = (0..x.len()).map(|i| f.eval(x.space(), x.point(i))).collect();
    ScalarField::new(1, values, x.len()).expect("one value per point")
}

/// The quadratic reference jet `f(y) = sum y_a^2`, `L_y = 2 y^T`; its
/// remainder is `|y - x|_2^2`.
pub fn square_jet(x: &PointSet) -> Jet {
    let d = x.dim();
    let mut values = Vec::with_capacity(x.len());
    let mut diffs = Vec::with_capacity(x.len() * d);
    for i in 0..x.len() {
        let p = x.point(i);
        values.push(p.iter().map(|v| v * v).sum());
        diffs.extend(p.iter().map(|v| 2.0 * v));
    }
    Jet::new(1, d, values, diffs, x.len()).expect("sizes by construction")
}

/// Affine jet `f(y) = A y + b`, `L == A` (k x d row major).
pub fn affine_jet(x: &PointSet, a: &[f64], b: &[f64]) -> Jet {
    let d = x.dim();
    let k = b.len();
    assert_eq!(a.len(), k * d);
    let mut values = Vec::with_capacity(x.len() * k);
    let mut diffs = Vec::with_capacity(x.len() * k * d);
    for i in 0..x.len() {
        let p = x.point(i);
        for c in 0..k {
            values.push(b[c] + (0..d).map(|j| a[c * d + j] * p[j]).sum::<f64>());
        }
        diffs.extend_from_slice(a);
    }
    Jet::new(k, d, values, diffs, x.len()).expect("sizes by construction")
}

pub fn random_affine(k: usize, d: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<f64> = (0..k * d).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
    let b: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
    (a, b)
}

/// Quadratic values with random (inconsistent) differentials: a jet whose
/// remainder modulus stays bounded away from zero.
pub fn corrupted_jet(x: &PointSet, seed: u64) -> Jet {
    let d = x.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(x.len());
    let mut diffs = Vec::with_capacity(x.len() * d);
    for i in 0..x.len() {
        let p = x.point(i);
        values.push(p.iter().map(|v| v * v).sum());
        diffs.extend((0..d).map(|_| rng.gen::<f64>() * 6.0 - 3.0));
    }
    Jet::new(1, d, values, diffs, x.len()).expect("sizes by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacegen::{generate_space, SpaceSpec};

    #[test]
    fn mcshane_is_one_lipschitz_on_x() {
        let x = generate_space(&SpaceSpec::Grid { d: 2, n: 5 }, 2.0).unwrap();
        for seed in 0..5 {
            let f = McShane::random(2, 3, seed);
            let field = mcshane_field(&x, &f);
            let lip = field.lip(&x);
            assert!(lip <= 1.0 + 1e-12, "lip = {lip}");
        }
        // single anchor with two collinear set points attains exactly 1
        let x = generate_space(&SpaceSpec::Grid { d: 1, n: 3 }, 2.0).unwrap();
        let f = McShane { anchors: vec![vec![-1.0]], offsets: vec![0.0] };
        let field = mcshane_field(&x, &f);
        assert!((field.lip(&x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn offset_shift_shifts_values() {
        let x = generate_space(&SpaceSpec::Grid { d: 1, n: 4 }, 2.0).unwrap();
        let f = McShane::random(1, 2, 3);
        let mut g = f.clone();
        for v in g.offsets.iter_mut() {
            *v += 0.7;
        }
        for i in 0..x.len() {
            let a = f.eval(x.space(), x.point(i));
            let b = g.eval(x.space(), x.point(i));
            assert!((b - a - 0.7).abs() < 1e-12);
        }
    }
}
