//! Per-model prediction files: JSON lines of `{index, true_label, predicted_label}`.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub index: usize,
    pub true_label: String,
    pub predicted_label: String,
}

pub fn write_predictions(path: &Path, y_true: &[String], y_pred: &[String]) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Data(format!("{} labels vs {} predictions", y_true.len(), y_pred.len())));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut out = String::new();
    for (index, (t, p)) in y_true.iter().zip(y_pred).enumerate() {
        let rec = PredictionRecord {
            index,
            true_label: t.clone(),
            predicted_label: p.clone(),
        };
        out.push_str(&serde_json::to_string(&rec).map_err(|e| Error::format(path, e.to_string()))?);
        out.push('\n');
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Reads a prediction file, returning records sorted by index. Indices must
/// form `0..n` exactly.
pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut recs = Vec::new();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PredictionRecord =
            serde_json::from_str(&line).map_err(|e| Error::format(path, format!("line {}: {e}", n + 1)))?;
        recs.push(rec);
    }
    recs.sort_by_key(|r| r.index);
    if recs.iter().enumerate().any(|(i, r)| r.index != i) {
        return Err(Error::format(path, "indices are not a contiguous 0..n range"));
    }
    Ok(recs)
}
