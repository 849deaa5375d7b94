//! Sentence vectors from word embeddings.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::Dataset;
use crate::lexicon::EmbeddingStore;
use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FeatureError {
    #[error("row {row} has {got} components, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("non-finite value at row {0}")]
    NonFinite(usize),
}

/// Dense row-major matrix, one row per sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    dim: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(dim: usize) -> Self {
        Self {
            rows: 0,
            dim,
            values: Vec::new(),
        }
    }

    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self, FeatureError> {
        let mut m = Self::new(dim);
        for r in rows {
            m.push_row(r)?;
        }
        Ok(m)
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<(), FeatureError> {
        if row.len() != self.dim {
            return Err(FeatureError::RaggedRow {
                row: self.rows,
                got: row.len(),
                expected: self.dim,
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(FeatureError::NonFinite(self.rows));
        }
        self.values.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim.max(1)).take(self.rows)
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            dim: self.dim,
            values,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            dim: self.dim,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }
}

/// Component-wise mean of the vectors of in-vocabulary tokens; the zero
/// vector when none are known.
///
/// Known tokens are summed in sorted order, so the result depends only on
/// the token multiset.
pub fn sentence_vector(tokens: &[String], store: &EmbeddingStore) -> Vec<f64> {
    let mut known: Vec<&[f32]> = Vec::new();
    let mut sorted: Vec<&String> = tokens.iter().collect();
    sorted.sort();
    for t in sorted {
        if let Some(v) = store.get(t) {
            known.push(v);
        }
    }
    let mut out = vec![0.0; store.dim()];
    if known.is_empty() {
        return out;
    }
    for v in &known {
        for (o, &x) in out.iter_mut().zip(v.iter()) {
            *o += f64::from(x);
        }
    }
    let n = known.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    out
}

/// Tokenizes and embeds every example of `dataset`.
pub fn featurize(dataset: &Dataset, store: &EmbeddingStore) -> FeatureMatrix {
    let mut m = FeatureMatrix::new(store.dim());
    for text in dataset.texts() {
        m.push_row(&sentence_vector(&tokenize(text), store))
            .expect("embedding store rows are finite and of store dim");
    }
    m
}
