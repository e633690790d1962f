//! Frozen measured constants for the quantitative checks. The file maps a
//! check key (criterion + instance id) to the value measured on the frozen
//! suite; later runs must stay within [`SLACK`] of it.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::io::DataError;

/// Allowed multiplicative drift from a frozen value.
pub const SLACK: f64 = 1.25;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Calibration(pub BTreeMap<String, f64>);

impl Calibration {
    pub fn load(path: &Path) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| DataError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), DataError> {
        let mut text = serde_json::to_string_pretty(&self.0).expect("serializable");
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.0.get(key).copied()
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.0.insert(key.to_string(), value);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// True when `measured` is within the slack band around `frozen`.
pub fn within(frozen: f64, measured: f64) -> bool {
    if frozen == 0.0 {
        return measured == 0.0;
    }
    let ratio = measured / frozen;
    ratio <= SLACK && ratio >= 1.0 / SLACK
}
