//! CSV corpus reading and writing.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use textaug_core::corpus::{Dataset, LabeledExample};

use crate::error::{Error, Result};

/// Which header columns hold the sentence and its label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    #[serde(default = "default_text")]
    pub text: String,
    #[serde(default = "default_label")]
    pub label: String,
}

fn default_text() -> String {
    "text".into()
}

fn default_label() -> String {
    "label".into()
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            text: default_text(),
            label: default_label(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadReport {
    pub dataset: Dataset,
    /// Rows dropped for empty text/label or a missing field.
    pub skipped: usize,
    pub histogram: BTreeMap<String, usize>,
}

pub fn load_dataset(path: &Path, name: &str, columns: &ColumnMap) -> Result<LoadReport> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(file, path, name, columns)
}

pub fn read_dataset(reader: impl std::io::Read, path: &Path, name: &str, columns: &ColumnMap) -> Result<LoadReport> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::format(path, e.to_string()))?.clone();
    let find = |col: &str| {
        headers
            .iter()
            .position(|h| h.trim() == col)
            .ok_or_else(|| Error::format(path, format!("header has no column {col:?}")))
    };
    let (ti, li) = (find(&columns.text)?, find(&columns.label)?);

    let mut examples = Vec::new();
    let mut skipped = 0;
    for record in rdr.records() {
        let Ok(record) = record else {
            skipped += 1;
            continue;
        };
        match (record.get(ti), record.get(li)) {
            (Some(t), Some(l)) => match LabeledExample::new(t, l) {
                Ok(e) => examples.push(e),
                Err(_) => skipped += 1,
            },
            _ => skipped += 1,
        }
    }
    if examples.is_empty() {
        return Err(Error::Data(format!("{}: zero valid rows", path.display())));
    }
    let dataset = Dataset::new(name, examples);
    let histogram = dataset.label_counts();
    Ok(LoadReport {
        dataset,
        skipped,
        histogram,
    })
}

/// Writes `text,label` rows with a header.
pub fn write_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let map = |e: csv::Error| Error::format(path, e.to_string());
        w.write_record(["text", "label"]).map_err(map)?;
        for e in dataset.examples() {
            w.write_record([e.text(), e.label()]).map_err(map)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}
