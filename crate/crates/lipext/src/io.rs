//! File formats: points/values/queries CSV and the jet JSON document.

use std::fmt;
use std::fs;
use std::path::Path;

use lipext_core::extension::{Jet, ScalarField};
use lipext_core::metric::{AmbientSpace, PointSet};
use lipext_core::CoreError;
use serde::{Deserialize, Serialize};

/// Anything wrong with input data; mapped to exit code 2 by the CLI.
#[derive(Debug)]
pub enum DataError {
    Io(std::io::Error),
    Parse(String),
    Shape(String),
    Core(CoreError),
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::Io(e) => write!(f, "io error: {e}"),
            DataError::Parse(m) => write!(f, "parse error: {m}"),
            DataError::Shape(m) => write!(f, "shape error: {m}"),
            DataError::Core(e) => write!(f, "data error: {e}"),
        }
    }
}

impl std::error::Error for DataError {}

impl From<std::io::Error> for DataError {
    fn from(e: std::io::Error) -> Self {
        DataError::Io(e)
    }
}

impl From<CoreError> for DataError {
    fn from(e: CoreError) -> Self {
        DataError::Core(e)
    }
}

/// Float rows from a CSV file; `#`-prefixed lines are comments.
pub fn read_float_rows(path: &Path) -> Result<Vec<Vec<f64>>, DataError> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Result<Vec<f64>, _> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect();
        match row {
            Ok(r) => rows.push(r),
            Err(e) => {
                return Err(DataError::Parse(format!(
                    "{}:{}: {e}",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(DataError::Shape(format!("{}: no data rows", path.display())));
    }
    let width = rows[0].len();
    if let Some(bad) = rows.iter().position(|r| r.len() != width) {
        return Err(DataError::Shape(format!(
            "{}: row {} has {} columns, expected {width}",
            path.display(),
            bad + 1,
            rows[bad].len()
        )));
    }
    Ok(rows)
}

/// Points CSV: d float columns per row; with `weighted` the last column is
/// the per-point measure weight.
pub fn read_points(path: &Path, p: f64, weighted: bool) -> Result<PointSet, DataError> {
    let rows = read_float_rows(path)?;
    let width = rows[0].len();
    let d = if weighted { width.checked_sub(1).unwrap_or(0) } else { width };
    if d == 0 {
        return Err(DataError::Shape(format!("{}: no coordinate columns", path.display())));
    }
    let space = AmbientSpace::new(d, p)?;
    let coords: Vec<f64> = rows.iter().flat_map(|r| r[..d].iter().copied()).collect();
    let weights = weighted.then(|| rows.iter().map(|r| r[d]).collect());
    Ok(PointSet::from_flat(space, coords, weights)?)
}

/// Values CSV aligned with the points file by row; k columns.
pub fn read_values(path: &Path, points: usize) -> Result<ScalarField, DataError> {
    let rows = read_float_rows(path)?;
    if rows.len() != points {
        return Err(DataError::Shape(format!(
            "{}: {} value rows for {points} points",
            path.display(),
            rows.len()
        )));
    }
    let k = rows[0].len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(ScalarField::new(k, flat, points)?)
}

/// Serialized jet document.
#[derive(Debug, Serialize, Deserialize)]
pub struct JetFile {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
    pub differentials: Vec<Vec<Vec<f64>>>,
}

/// Reads a jet JSON file into a point set and jet.
pub fn read_jet(path: &Path, p: f64) -> Result<(PointSet, Jet), DataError> {
    let text = fs::read_to_string(path)?;
    let doc: JetFile = serde_json::from_str(&text)
        .map_err(|e| DataError::Parse(format!("{}: {e}", path.display())))?;
    let n = doc.points.len();
    if doc.values.len() != n || doc.differentials.len() != n || n == 0 {
        return Err(DataError::Shape(format!(
            "{}: points/values/differentials misaligned",
            path.display()
        )));
    }
    let d = doc.points[0].len();
    let k = doc.values[0].len();
    let space = AmbientSpace::new(d, p)?;
    let x = PointSet::new(space, &doc.points)?;
    let mut values = Vec::with_capacity(n * k);
    let mut diffs = Vec::with_capacity(n * k * d);
    for i in 0..n {
        if doc.values[i].len() != k {
            return Err(DataError::Shape(format!("{}: ragged values", path.display())));
        }
        values.extend_from_slice(&doc.values[i]);
        if doc.differentials[i].len() != k {
            return Err(DataError::Shape(format!("{}: ragged differentials", path.display())));
        }
        for row in &doc.differentials[i] {
            if row.len() != d {
                return Err(DataError::Shape(format!("{}: ragged differentials", path.display())));
            }
            diffs.extend_from_slice(row);
        }
    }
    let jet = Jet::new(k, d, values, diffs, n)?;
    Ok((x, jet))
}

pub fn write_jet(path: &Path, x: &PointSet, jet: &Jet) -> Result<(), DataError> {
    let d = x.dim();
    let doc = JetFile {
        points: (0..x.len()).map(|i| x.point(i).to_vec()).collect(),
        values: (0..x.len()).map(|i| jet.value(i).to_vec()).collect(),
        differentials: (0..x.len())
            .map(|i| {
                let l = jet.differential(i);
                (0..jet.k).map(|c| l[c * d..(c + 1) * d].to_vec()).collect()
            })
            .collect(),
    };
    fs::write(path, serde_json::to_string_pretty(&doc).expect("serializable"))?;
    Ok(())
}

/// CSV rows in the shortest round-trip decimal form (Rust's `{}` for f64).
pub fn format_csv(rows: &[Vec<f64>], header: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str("# ");
        out.push_str(h);
        out.push('\n');
    }
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Writes to the path, or stdout when no path is given.
pub fn emit(out: Option<&Path>, content: &str) -> Result<(), DataError> {
    match out {
        Some(p) => fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}
