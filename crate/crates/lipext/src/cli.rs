//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 data
//! error, 3 verification failure.

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use lipext_core::covering::{scale_range, CellComplex};
use lipext_core::extension::{differential_c1, extend_c1, extend_lip, Jet, Projector, ScalarField};
use lipext_core::metric::{estimate_capacity, CapacityConfig, PointSet};
use lipext_core::partition::{C1Partition, LipPartition};
use lipext_core::projection::KernelProfile;
use lipext_core::CoreError;
use serde::Serialize;

use crate::calibration::Calibration;
use crate::io::{self, DataError};
use crate::suite::{self, SuiteConfig};

#[derive(Debug, Parser)]
#[command(name = "lipext", version, about = "Lipschitz and C1 extension via random projections")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
    /// Worker threads; affects timing only, never output bytes.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Kernel,
    Cells,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Doubling and capacity estimates for a point set.
    Estimate {
        #[arg(long)]
        points: PathBuf,
        /// Norm exponent of the ambient space.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Treat the last CSV column as per-point weights.
        #[arg(long)]
        weighted: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lipschitz extension of sampled values at query points.
    Extend {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        values: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Kernel)]
        method: Method,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        weighted: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// C1 (Whitney) extension of a jet at query points.
    ExtendC1 {
        /// Jet JSON document carrying points, values, and differentials.
        #[arg(long)]
        jets: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification suite and emit the acceptance report.
    Verify {
        #[arg(long)]
        report: Option<PathBuf>,
        /// Frozen-constant file checked against measured values.
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Write measured constants to --calibration instead of asserting.
        #[arg(long)]
        freeze: bool,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Optional jet whose remainder hypothesis is audited first.
        #[arg(long)]
        jets: Option<PathBuf>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Dense evaluation grid for plotting (d <= 2 only).
    Grid {
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long)]
        values: Option<PathBuf>,
        #[arg(long)]
        jets: Option<PathBuf>,
        #[arg(long)]
        queries: Option<PathBuf>,
        /// Samples per axis.
        #[arg(long, default_value_t = 33)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Method::Kernel)]
        method: Method,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        weighted: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lambda-hat vs extension-ratio table over the grid families.
    Sweep {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Usage(String),
    Data(DataError),
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Data(DataError::Core(e))
    }
}

/// Parses arguments, dispatches, and maps every outcome to an exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    if let Some(jobs) = cli.jobs {
        // best effort: the pool may already exist under `cargo test`
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            1
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<i32, CliError> {
    match cmd {
        Cmd::Estimate { points, p, weighted, out } => cmd_estimate(&points, p, weighted, out.as_deref()),
        Cmd::Extend { points, values, queries, method, p, weighted, out } => {
            cmd_extend(&points, &values, &queries, method, p, weighted, out.as_deref())
        }
        Cmd::ExtendC1 { jets, queries, p, out } => cmd_extend_c1(&jets, &queries, p, out.as_deref()),
        Cmd::Verify { report, calibration, freeze, seed, jets, p } => {
            cmd_verify(report.as_deref(), calibration.as_deref(), freeze, seed, jets.as_deref(), p)
        }
        Cmd::Grid { points, values, jets, queries, samples, method, p, weighted, out } => cmd_grid(
            points.as_deref(),
            values.as_deref(),
            jets.as_deref(),
            queries.as_deref(),
            samples,
            method,
            p,
            weighted,
            out.as_deref(),
        ),
        Cmd::Sweep { seed, out } => cmd_sweep(seed, out.as_deref()),
    }
}

#[derive(Serialize)]
struct EstimateDoc {
    doubling: lipext_core::metric::DoublingEstimate,
    capacity: lipext_core::metric::CapacityEstimate,
}

fn cmd_estimate(
    points: &Path,
    p: f64,
    weighted: bool,
    out: Option<&Path>,
) -> Result<i32, CliError> {
    let x = io::read_points(points, p, weighted)?;
    let doubling = suite::doubling_estimate_for(&x);
    let cap_cfg = CapacityConfig { exhaustive: x.len() <= 8, ..CapacityConfig::default() };
    let capacity = estimate_capacity(&x, 0.2, &cap_cfg);
    let doc = EstimateDoc { doubling, capacity };
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
    text.push('\n');
    io::emit(out, &text)?;
    Ok(0)
}

fn read_queries(path: &Path, dim: usize) -> Result<Vec<Vec<f64>>, DataError> {
    let rows = io::read_float_rows(path)?;
    if rows[0].len() != dim {
        return Err(DataError::Shape(format!(
            "{}: queries have {} columns, points have dimension {dim}",
            path.display(),
            rows[0].len()
        )));
    }
    Ok(rows)
}

/// Builds the cells projector over a query set; fails when every query sits
/// on X (no scale range is derivable).
fn cells_partition(x: &PointSet, queries: &[Vec<f64>]) -> Result<LipPartition, CoreError> {
    let (n_min, n_max) = scale_range(x, queries)?;
    let complex = CellComplex::build(x, n_min, n_max);
    let lambda_hat = suite::doubling_estimate_for(x).lambda_hat;
    Ok(LipPartition::new(complex, lambda_hat))
}

fn cmd_extend(
    points: &Path,
    values: &Path,
    queries: &Path,
    method: Method,
    p: f64,
    weighted: bool,
    out: Option<&Path>,
) -> Result<i32, CliError> {
    let x = io::read_points(points, p, weighted)?;
    let f = io::read_values(values, x.len())?;
    let qs = read_queries(queries, x.dim())?;
    let lambda_hat = suite::doubling_estimate_for(&x).lambda_hat;
    let kernel = KernelProfile::for_doubling(lambda_hat);
    let cells;
    let projector = match method {
        Method::Kernel => Projector::Kernel(&kernel),
        Method::Cells => {
            cells = cells_partition(&x, &qs)?;
            Projector::Cells(&cells)
        }
    };
    let mut rows = Vec::with_capacity(qs.len());
    for (i, y) in qs.iter().enumerate() {
        let row = extend_lip(&f, &x, &projector, y)
            .map_err(|e| DataError::Parse(format!("query row {}: {e}", i + 1)))?;
        rows.push(row);
    }
    io::emit(out, &io::format_csv(&rows, None))?;
    Ok(0)
}

fn c1_partition(x: &PointSet, queries: &[Vec<f64>]) -> Result<C1Partition, CoreError> {
    let (n_min, n_max) = scale_range(x, queries)?;
    let lambda_hat = suite::doubling_estimate_for(x).lambda_hat;
    C1Partition::build(x, n_min, n_max, lambda_hat)
}

fn cmd_extend_c1(
    jets: &Path,
    queries: &Path,
    p: f64,
    out: Option<&Path>,
) -> Result<i32, CliError> {
    let (x, jet) = io::read_jet(jets, p)?;
    let qs = read_queries(queries, x.dim())?;
    let part = c1_partition(&x, &qs)?;
    let mut rows = Vec::with_capacity(qs.len());
    for (i, y) in qs.iter().enumerate() {
        let mut row = extend_c1(&jet, &x, &part, y)
            .map_err(|e| DataError::Parse(format!("query row {}: {e}", i + 1)))?;
        let diff = differential_c1(&jet, &x, &part, y)
            .map_err(|e| DataError::Parse(format!("query row {}: {e}", i + 1)))?;
        row.extend(diff);
        rows.push(row);
    }
    io::emit(out, &io::format_csv(&rows, None))?;
    Ok(0)
}

fn cmd_verify(
    report: Option<&Path>,
    calibration: Option<&Path>,
    freeze: bool,
    seed: u64,
    jets: Option<&Path>,
    p: f64,
) -> Result<i32, CliError> {
    let frozen = match (calibration, freeze) {
        (Some(path), false) => Some(Calibration::load(path)?),
        _ => None,
    };
    let external_jet = match jets {
        Some(path) => Some(io::read_jet(path, p)?),
        None => None,
    };
    let cfg = SuiteConfig { seed, calibration: frozen, external_jet, ..SuiteConfig::default() };
    let outcome = suite::run_suite(&cfg)?;
    if freeze {
        let path = calibration.ok_or_else(|| {
            CliError::Usage("--freeze requires --calibration <path> to write".into())
        })?;
        outcome.measured.save(path)?;
    }
    let mut text = serde_json::to_string_pretty(&outcome.report).expect("serializable");
    text.push('\n');
    io::emit(report, &text)?;
    for w in &outcome.report.warnings {
        eprintln!("warning: {w}");
    }
    for c in &outcome.report.criteria {
        let verdict = match c.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "N/A ",
        };
        eprintln!("criterion {:02} {}: {} ({})", c.id, c.name, verdict, c.detail);
    }
    Ok(if outcome.report.pass { 0 } else { 3 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_grid(
    points: Option<&Path>,
    values: Option<&Path>,
    jets: Option<&Path>,
    queries: Option<&Path>,
    samples: usize,
    method: Method,
    p: f64,
    weighted: bool,
    out: Option<&Path>,
) -> Result<i32, CliError> {
    if samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let _ = queries; // grid generates its own query lattice
    let (x, field) = match (points, values, jets) {
        (Some(pts), Some(vals), None) => {
            let x = io::read_points(pts, p, weighted)?;
            let f = io::read_values(vals, x.len())?;
            (x, FieldSource::Values(f))
        }
        (None, None, Some(j)) => {
            let (x, jet) = io::read_jet(j, p)?;
            (x, FieldSource::Jet(jet))
        }
        _ => {
            return Err(CliError::Usage(
                "grid needs either --points with --values, or --jets".into(),
            ))
        }
    };
    let d = x.dim();
    if d > 2 {
        return Err(CliError::Usage(format!("grid plotting supports d <= 2, got d = {d}")));
    }
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for i in 0..x.len() {
        for (a, &v) in x.point(i).iter().enumerate() {
            lo[a] = lo[a].min(v);
            hi[a] = hi[a].max(v);
        }
    }
    let axis = |a: usize, i: usize| lo[a] + (hi[a] - lo[a]) * i as f64 / (samples - 1) as f64;
    let mut qs = Vec::new();
    if d == 1 {
        for i in 0..samples {
            qs.push(vec![axis(0, i)]);
        }
    } else {
        for i in 0..samples {
            for j in 0..samples {
                qs.push(vec![axis(0, i), axis(1, j)]);
            }
        }
    }
    let k;
    let mut rows = Vec::with_capacity(qs.len());
    match &field {
        FieldSource::Values(f) => {
            k = f.k;
            let lambda_hat = suite::doubling_estimate_for(&x).lambda_hat;
            let kernel = KernelProfile::for_doubling(lambda_hat);
            let cells;
            let projector = match method {
                Method::Kernel => Projector::Kernel(&kernel),
                Method::Cells => {
                    cells = cells_partition(&x, &qs)?;
                    Projector::Cells(&cells)
                }
            };
            for y in &qs {
                let mut row = y.clone();
                row.extend(extend_lip(f, &x, &projector, y)?);
                rows.push(row);
            }
        }
        FieldSource::Jet(jet) => {
            k = jet.k;
            let part = c1_partition(&x, &qs)?;
            for y in &qs {
                let mut row = y.clone();
                row.extend(extend_c1(jet, &x, &part, y)?);
                rows.push(row);
            }
        }
    }
    let mut header: Vec<String> = (1..=d).map(|a| format!("x{a}")).collect();
    header.extend((1..=k).map(|c| format!("f{c}")));
    io::emit(out, &io::format_csv(&rows, Some(&header.join(","))))?;
    Ok(0)
}

enum FieldSource {
    Values(ScalarField),
    Jet(Jet),
}

fn cmd_sweep(seed: u64, out: Option<&Path>) -> Result<i32, CliError> {
    let cfg = SuiteConfig { seed, ..SuiteConfig::default() };
    let rows = suite::run_sweep(&cfg)?;
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.d as f64, r.n as f64, r.lambda_hat as f64, r.ext_lip_ratio])
        .collect();
    io::emit(out, &io::format_csv(&table, Some("d,n,lambda_hat,ext_lip_ratio")))?;
    Ok(0)
}
