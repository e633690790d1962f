//! Deterministic generators for the benchmark point-set families.

use lipext_core::metric::{AmbientSpace, PointSet};
use lipext_core::CoreError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Families with deterministic generation given `(family, params, seed)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SpaceSpec {
    /// Uniform `n^d` lattice in `[0,1]^d`.
    Grid { d: usize, n: usize },
    /// Endpoints of the level-`k` middle-thirds construction in `R`.
    Cantor { level: usize },
    /// Greedy net at separation `2r` on a dense seeded sample of `S^(d-1)`.
    SphereNet { d: usize, r: f64, samples: usize, seed: u64 },
    /// Uniform points in `[0,1]^d`.
    RandomCloud { d: usize, n: usize, seed: u64 },
}

impl SpaceSpec {
    /// Stable identifier used for calibration keys and reports.
    pub fn id(&self) -> String {
        match self {
            SpaceSpec::Grid { d, n } => format!("grid-d{d}-n{n}"),
            SpaceSpec::Cantor { level } => format!("cantor-l{level}"),
            SpaceSpec::SphereNet { d, r, samples, seed } => {
                format!("sphere-d{d}-r{r}-s{samples}-seed{seed}")
            }
            SpaceSpec::RandomCloud { d, n, seed } => format!("cloud-d{d}-n{n}-seed{seed}"),
        }
    }
}

pub fn generate_space(spec: &SpaceSpec, p: f64) -> Result<PointSet, CoreError> {
    match *spec {
        SpaceSpec::Grid { d, n } => grid(d, n, p),
        SpaceSpec::Cantor { level } => cantor(level, p),
        SpaceSpec::SphereNet { d, r, samples, seed } => sphere_net(d, r, samples, seed, p),
        SpaceSpec::RandomCloud { d, n, seed } => random_cloud(d, n, seed, p),
    }
}

fn space(d: usize, p: f64) -> Result<AmbientSpace, CoreError> {
    AmbientSpace::new(d, p)
}

fn grid(d: usize, n: usize, p: f64) -> Result<PointSet, CoreError> {
    assert!(d >= 1 && n >= 1, "grid needs d >= 1 and n >= 1");
    let step = if n > 1 { 1.0 / (n - 1) as f64 } else { 0.0 };
    let total = n.pow(d as u32);
    let mut pts = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rem = idx;
        let mut point = Vec::with_capacity(d);
        for _ in 0..d {
            point.push((rem % n) as f64 * step);
            rem /= n;
        }
        pts.push(point);
    }
    PointSet::new(space(d, p)?, &pts)
}

fn cantor(level: usize, p: f64) -> Result<PointSet, CoreError> {
    // interval endpoints after `level` middle-thirds removals
    let mut intervals = vec![(0.0f64, 1.0f64)];
    for _ in 0..level {
        let mut next = Vec::with_capacity(intervals.len() * 2);
        for (a, b) in intervals {
            let third = (b - a) / 3.0;
            next.push((a, a + third));
            next.push((b - third, b));
        }
        intervals = next;
    }
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(intervals.len() * 2);
    for (a, b) in intervals {
        pts.push(vec![a]);
        pts.push(vec![b]);
    }
    pts.sort_by(|u, v| u[0].partial_cmp(&v[0]).unwrap());
    pts.dedup();
    PointSet::new(space(1, p)?, &pts)
}

fn sphere_net(d: usize, r: f64, samples: usize, seed: u64, p: f64) -> Result<PointSet, CoreError> {
    assert!(d >= 2, "sphere net needs d >= 2");
    assert!(r > 0.0 && samples >= 1);
    let sp = space(d, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample: Vec<Vec<f64>> = Vec::with_capacity(samples);
    while sample.len() < samples {
        // Gaussian direction via Box-Muller, normalized in the 2-norm
        let v: Vec<f64> = (0..d)
            .map(|_| {
                let (u1, u2) = (rng.gen::<f64>().max(1e-300), rng.gen::<f64>());
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-9 {
            sample.push(v.iter().map(|a| a / norm).collect());
        }
    }
    let dense = PointSet::new(sp, &sample)?;
    let kept = lipext_core::covering::greedy_net(&dense, r);
    let pts: Vec<Vec<f64>> = kept.iter().map(|&i| dense.point(i).to_vec()).collect();
    PointSet::new(space(d, p)?, &pts)
}

fn random_cloud(d: usize, n: usize, seed: u64, p: f64) -> Result<PointSet, CoreError> {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.gen::<f64>()).collect())
        .collect();
    PointSet::new(space(d, p)?, &pts)
}

/// Query sample for verification: uniform in the bounding box inflated by
/// 25%, rejecting points of X themselves.
pub fn sample_queries(x: &PointSet, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let d = x.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for i in 0..x.len() {
        for (a, &v) in x.point(i).iter().enumerate() {
            lo[a] = lo[a].min(v);
            hi[a] = hi[a].max(v);
        }
    }
    let margin: Vec<f64> = (0..d)
        .map(|a| 0.25 * (hi[a] - lo[a]).max(1.0 / 8.0))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let y: Vec<f64> = (0..d)
            .map(|a| lo[a] - margin[a] + rng.gen::<f64>() * (hi[a] - lo[a] + 2.0 * margin[a]))
            .collect();
        if x.dist_to_set(&y).unwrap().0 > 0.0 {
            out.push(y);
        }
    }
    out
}
