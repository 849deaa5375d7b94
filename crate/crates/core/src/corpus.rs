//! Labeled examples, datasets, and the seeded sampling steps of the
//! benchmark protocol: subset resampling, stratified splitting and the
//! choice of which training rows feed augmentation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};

use crate::rng::{derive, seeded};

/// Default fraction of a subset assigned to the training split.
pub const DEFAULT_SPLIT_RATIO: f64 = 0.75;

/// Resampling attempts before a subset with a single label is reported as
/// degenerate.
pub const MAX_RESAMPLE_RETRIES: u32 = 16;

/// Guard against `p * n` landing a hair below an integer.
const FLOOR_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error("example text is empty")]
    EmptyText,
    #[error("example label is empty")]
    EmptyLabel,
    #[error("subset size {requested} out of range 1..={available}")]
    SubsetSizeOutOfRange { requested: usize, available: usize },
    #[error("no subset with at least two labels after {attempts} attempts")]
    DegenerateDataset { attempts: u32 },
    #[error("subset of {0} examples is too small to split (need at least 4)")]
    SubsetTooSmall(usize),
    #[error("ratio {0} outside (0, 1)")]
    InvalidRatio(f64),
    #[error("fraction {0} outside [0, 1]")]
    InvalidFraction(f64),
    #[error("index {index} out of range for {len} examples")]
    IndexOutOfRange { index: usize, len: usize },
}

/// One sentence with its class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    text: String,
    label: String,
}

impl LabeledExample {
    /// Rejects whitespace-only text and empty labels. The stored text is
    /// trimmed; the label is trimmed as well.
    pub fn new(text: &str, label: &str) -> Result<Self, CorpusError> {
        let text = text.trim();
        let label = label.trim();
        if text.is_empty() {
            return Err(CorpusError::EmptyText);
        }
        if label.is_empty() {
            return Err(CorpusError::EmptyLabel);
        }
        Ok(Self {
            text: text.into(),
            label: label.into(),
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Same label, new text.
    pub fn with_text(&self, text: &str) -> Result<Self, CorpusError> {
        Self::new(text, &self.label)
    }
}

/// An ordered, named collection of examples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    name: String,
    examples: Vec<LabeledExample>,
    labels: BTreeSet<String>,
}

impl Dataset {
    pub fn new(name: &str, examples: Vec<LabeledExample>) -> Self {
        let labels = examples.iter().map(|e| e.label.clone()).collect();
        Self {
            name: name.into(),
            examples,
            labels,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn get(&self, i: usize) -> Option<&LabeledExample> {
        self.examples.get(i)
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Distinct labels in sorted order.
    pub fn label_set(&self) -> &BTreeSet<String> {
        &self.labels
    }

    pub fn labels(&self) -> Vec<String> {
        self.examples.iter().map(|e| e.label.clone()).collect()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.examples.iter().map(|e| e.text.as_str())
    }

    /// Label histogram in label order.
    pub fn label_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.examples {
            *counts.entry(e.label.clone()).or_insert(0) += 1;
        }
        counts
    }

    /// New dataset holding the examples at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self, CorpusError> {
        let examples = indices
            .iter()
            .map(|&i| {
                self.examples
                    .get(i)
                    .cloned()
                    .ok_or(CorpusError::IndexOutOfRange {
                        index: i,
                        len: self.len(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(&self.name, examples))
    }

    /// Appends examples, keeping the label set in sync.
    pub fn extend(&mut self, more: impl IntoIterator<Item = LabeledExample>) {
        for e in more {
            self.labels.insert(e.label.clone());
            self.examples.push(e);
        }
    }
}

/// A train/test partition of a subset. The index vectors refer to rows of
/// the subset the split was drawn from and are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// `floor(fraction * n)` with tolerance for representation error.
pub fn fraction_count(fraction: f64, n: usize) -> usize {
    libm::floor(fraction * n as f64 + FLOOR_EPS) as usize
}

/// Indices of a uniform sample without replacement of `n` rows. Retries
/// with derived seeds until the sample holds at least two labels.
pub fn resample_indices(dataset: &Dataset, n: usize, seed: u64) -> Result<Vec<usize>, CorpusError> {
    if n == 0 || n > dataset.len() {
        return Err(CorpusError::SubsetSizeOutOfRange {
            requested: n,
            available: dataset.len(),
        });
    }
    for attempt in 0..MAX_RESAMPLE_RETRIES {
        let mut rng = seeded(derive(seed, u64::from(attempt)));
        let picked = index::sample(&mut rng, dataset.len(), n).into_vec();
        let first = &dataset.examples[picked[0]].label;
        if picked.iter().any(|&i| &dataset.examples[i].label != first) {
            return Ok(picked);
        }
    }
    Err(CorpusError::DegenerateDataset {
        attempts: MAX_RESAMPLE_RETRIES,
    })
}

/// Uniform subset of `n` examples. Deterministic in (dataset order, n, seed).
pub fn resample_subset(dataset: &Dataset, n: usize, seed: u64) -> Result<Dataset, CorpusError> {
    let picked = resample_indices(dataset, n, seed)?;
    dataset.select(&picked)
}

/// Number of training rows for a subset of `n` examples.
pub fn train_size(n: usize, ratio: f64) -> usize {
    libm::round(ratio * n as f64) as usize
}

/// Per-label training quotas summing to `target`.
///
/// Labels with two or more examples get at least one training example.
/// Leftover slots go to the label with the largest shortfall against its
/// proportional share, preferring labels that would still keep one example
/// for testing.
fn stratified_quotas(counts: &[usize], ratio: f64, target: usize) -> Vec<usize> {
    let ideal: Vec<f64> = counts.iter().map(|&c| ratio * c as f64).collect();
    let floor_of = |c: usize| usize::from(c >= 2);
    let mut quota: Vec<usize> = counts
        .iter()
        .zip(&ideal)
        .map(|(&c, &x)| (libm::floor(x) as usize).clamp(floor_of(c), c))
        .collect();

    let mut total: usize = quota.iter().sum();
    while total < target {
        let pick = (0..counts.len())
            .filter(|&l| quota[l] < counts[l])
            .max_by(|&a, &b| {
                let keep_a = quota[a] + 1 < counts[a];
                let keep_b = quota[b] + 1 < counts[b];
                keep_a
                    .cmp(&keep_b)
                    .then((ideal[a] - quota[a] as f64).total_cmp(&(ideal[b] - quota[b] as f64)))
                    // earlier label wins ties
                    .then(b.cmp(&a))
            })
            .expect("target never exceeds the subset size");
        quota[pick] += 1;
        total += 1;
    }
    while total > target {
        let pick = (0..counts.len())
            .filter(|&l| quota[l] > 0)
            .max_by(|&a, &b| {
                let spare_a = quota[a] > floor_of(counts[a]);
                let spare_b = quota[b] > floor_of(counts[b]);
                spare_a
                    .cmp(&spare_b)
                    .then((quota[a] as f64 - ideal[a]).total_cmp(&(quota[b] as f64 - ideal[b])))
                    .then(b.cmp(&a))
            })
            .expect("total > 0 implies a positive quota");
        quota[pick] -= 1;
        total -= 1;
    }
    quota
}

/// Stratified train/test split with `round(ratio * n)` training rows.
pub fn split(subset: &Dataset, ratio: f64, seed: u64) -> Result<SplitPair, CorpusError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(CorpusError::InvalidRatio(ratio));
    }
    let n = subset.len();
    if n < 4 {
        return Err(CorpusError::SubsetTooSmall(n));
    }
    let target = train_size(n, ratio);

    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, e) in subset.examples.iter().enumerate() {
        groups.entry(e.label.as_str()).or_default().push(i);
    }
    let mut rng = seeded(seed);
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    for g in &mut groups {
        g.shuffle(&mut rng);
    }
    let counts: Vec<usize> = groups.iter().map(Vec::len).collect();
    let quotas = stratified_quotas(&counts, ratio, target);

    let mut train_indices = Vec::with_capacity(target);
    let mut test_indices = Vec::with_capacity(n - target);
    for (g, q) in groups.iter().zip(quotas) {
        train_indices.extend_from_slice(&g[..q]);
        test_indices.extend_from_slice(&g[q..]);
    }
    train_indices.sort_unstable();
    test_indices.sort_unstable();

    Ok(SplitPair {
        train: subset.select(&train_indices)?,
        test: subset.select(&test_indices)?,
        train_indices,
        test_indices,
    })
}

/// Uniform sample of `floor(p * train_len)` training indices, returned in
/// ascending order.
pub fn select_augmentation_targets(train_len: usize, p: f64, seed: u64) -> Result<Vec<usize>, CorpusError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CorpusError::InvalidFraction(p));
    }
    let k = fraction_count(p, train_len).min(train_len);
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut rng = seeded(seed);
    let mut picked = index::sample(&mut rng, train_len, k).into_vec();
    picked.sort_unstable();
    Ok(picked)
}
