use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of one training run. All RMSE values are on normalised targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub rmse_per_epoch: Vec<f64>,
    pub final_train_rmse: f64,
    pub final_test_rmse: f64,
    /// Seconds.
    pub wall_time: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_count: Option<usize>,
}

impl TrainReport {
    pub fn new(seed: u64) -> Self {
        TrainReport {
            rmse_per_epoch: Vec::new(),
            final_train_rmse: f64::NAN,
            final_test_rmse: f64::NAN,
            wall_time: 0.0,
            seed,
            terminal_count: None,
            rule_count: None,
        }
    }
}

pub fn rmse(pred: &[f64], target: &[f64]) -> f64 {
    assert_eq!(pred.len(), target.len());
    if pred.is_empty() {
        return 0.0;
    }
    let sse: f64 = pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum();
    (sse / pred.len() as f64).sqrt()
}

/// Two-column CSV (`<x_name>,<y_name>`), one row per entry, first row index 1.
pub fn curve_csv(x_name: &str, y_name: &str, values: &[f64]) -> String {
    let mut s = format!("{x_name},{y_name}\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{},{}", i + 1, v);
    }
    s
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
