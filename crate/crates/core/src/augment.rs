//! Augmenting a training set: the [`Augmenter`] abstraction over the three
//! augmentation groups and the driver that appends generated examples.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::RngCore;

use crate::corpus::{CorpusError, Dataset, LabeledExample};
use crate::eda::{eda_augment, EdaConfig};
use crate::lexicon::SynonymMap;
use crate::replace::{sequential_augment, ProviderError, ReplacementProvider};
use crate::rng::{derive, seeded};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AugmentError {
    #[error("sentence has no tokens")]
    EmptyTokenization,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("translation failed: {0}")]
    Translation(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Produces synthetic examples from one source example.
pub trait Augmenter: Send + Sync {
    fn name(&self) -> &str;

    fn augment(&self, example: &LabeledExample, rng: &mut dyn RngCore) -> Result<Vec<LabeledExample>, AugmentError>;
}

/// The EDA group.
#[derive(Debug, Clone)]
pub struct EdaAugmenter {
    pub config: EdaConfig,
    pub synonyms: Arc<SynonymMap>,
}

impl Augmenter for EdaAugmenter {
    fn name(&self) -> &str {
        "EDA"
    }

    fn augment(&self, example: &LabeledExample, rng: &mut dyn RngCore) -> Result<Vec<LabeledExample>, AugmentError> {
        eda_augment(example, &self.config, &self.synonyms, rng)
    }
}

/// The sequential synonym-replacement group.
pub struct SynAugmenter {
    pub providers: Vec<Arc<dyn ReplacementProvider>>,
    pub rate: f64,
}

impl Augmenter for SynAugmenter {
    fn name(&self) -> &str {
        "Syn"
    }

    fn augment(&self, example: &LabeledExample, rng: &mut dyn RngCore) -> Result<Vec<LabeledExample>, AugmentError> {
        let stages: Vec<&dyn ReplacementProvider> = self.providers.iter().map(|p| p.as_ref()).collect();
        sequential_augment(example, &stages, self.rate, rng).map(|e| alloc::vec![e])
    }
}

/// Where a row of an augmented training set came from, as an index into the
/// un-augmented training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Original(usize),
    Generated { source: usize },
}

impl Origin {
    pub fn source(&self) -> usize {
        match *self {
            Origin::Original(i) | Origin::Generated { source: i } => i,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetFailure {
    pub target: usize,
    pub error: String,
}

/// Training set with generated rows appended after the originals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedSet {
    pub dataset: Dataset,
    /// One entry per row of `dataset`.
    pub origins: Vec<Origin>,
    pub failures: Vec<TargetFailure>,
}

impl AugmentedSet {
    pub fn generated(&self) -> usize {
        self.origins.iter().filter(|o| matches!(o, Origin::Generated { .. })).count()
    }
}

/// Appends the augmenter's output for each target, in target order.
///
/// Every target gets its own generator derived from `(seed, target)`, so
/// one target's output does not depend on the others. A failing target is
/// recorded and skipped.
pub fn augment_training_set(
    train: &Dataset,
    targets: &[usize],
    augmenter: &dyn Augmenter,
    seed: u64,
) -> Result<AugmentedSet, CorpusError> {
    if let Some(&bad) = targets.iter().find(|&&t| t >= train.len()) {
        return Err(CorpusError::IndexOutOfRange {
            index: bad,
            len: train.len(),
        });
    }
    let mut dataset = train.clone();
    let mut origins: Vec<Origin> = (0..train.len()).map(Origin::Original).collect();
    let mut failures = Vec::new();
    for &t in targets {
        let mut rng = seeded(derive(seed, t as u64));
        match augmenter.augment(&train.examples()[t], &mut rng) {
            Ok(generated) => {
                origins.extend(core::iter::repeat_n(Origin::Generated { source: t }, generated.len()));
                dataset.extend(generated);
            }
            Err(e) => failures.push(TargetFailure {
                target: t,
                error: e.to_string(),
            }),
        }
    }
    Ok(AugmentedSet {
        dataset,
        origins,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replace::TableProvider;
    use alloc::format;

    fn train(n: usize) -> Dataset {
        let examples = (0..n)
            .map(|i| LabeledExample::new(&format!("o produto {i} é bom"), if i % 2 == 0 { "pos" } else { "neg" }).unwrap())
            .collect();
        Dataset::new("t", examples)
    }

    fn syn() -> SynAugmenter {
        SynAugmenter {
            providers: alloc::vec![Arc::new(TableProvider::new("t", &[("bom", "ótimo")])) as Arc<dyn ReplacementProvider>],
            rate: 0.1,
        }
    }

    struct FailOdd;

    impl Augmenter for FailOdd {
        fn name(&self) -> &str {
            "fail-odd"
        }

        fn augment(&self, example: &LabeledExample, _rng: &mut dyn RngCore) -> Result<Vec<LabeledExample>, AugmentError> {
            if example.label() == "neg" {
                Err(AugmentError::Translation("timeout".into()))
            } else {
                Ok(alloc::vec![example.clone()])
            }
        }
    }

    #[test]
    fn no_targets_is_identity() {
        let t = train(10);
        let out = augment_training_set(&t, &[], &syn(), 1).unwrap();
        assert_eq!(out.dataset, t);
        assert_eq!(out.generated(), 0);
    }

    #[test]
    fn count_law_and_order() {
        let t = train(375);
        let targets = crate::corpus::select_augmentation_targets(375, 0.2, 3).unwrap();
        let out = augment_training_set(&t, &targets, &syn(), 1).unwrap();
        assert_eq!(out.dataset.len(), 450);
        assert_eq!(&out.dataset.examples()[..375], t.examples());
        for (row, origin) in out.origins.iter().enumerate().skip(375) {
            let src = origin.source();
            assert_eq!(src, targets[row - 375]);
            assert_eq!(out.dataset.examples()[row].label(), t.examples()[src].label());
        }
    }

    #[test]
    fn eda_count_law() {
        let t = train(375);
        let targets: Vec<usize> = (0..75).collect();
        let aug = EdaAugmenter { config: EdaConfig::default(), synonyms: Arc::new(SynonymMap::new()) };
        assert_eq!(augment_training_set(&t, &targets, &aug, 1).unwrap().dataset.len(), 450);
        let aug = EdaAugmenter { config: EdaConfig { n_aug: 3, ..EdaConfig::default() }, synonyms: Arc::new(SynonymMap::new()) };
        assert_eq!(augment_training_set(&t, &targets, &aug, 1).unwrap().dataset.len(), 375 + 225);
    }

    #[test]
    fn failures_are_isolated() {
        let t = train(10);
        let out = augment_training_set(&t, &[0, 1, 2, 3], &FailOdd, 1).unwrap();
        assert_eq!(out.generated(), 2);
        assert_eq!(out.failures.iter().map(|f| f.target).collect::<Vec<_>>(), [1, 3]);
    }

    #[test]
    fn out_of_range_target() {
        assert!(augment_training_set(&train(3), &[3], &syn(), 1).is_err());
    }

    #[test]
    fn reproducible() {
        let t = train(40);
        let targets: Vec<usize> = (0..40).step_by(3).collect();
        let aug = EdaAugmenter { config: EdaConfig::default(), synonyms: Arc::new(SynonymMap::new()) };
        assert_eq!(
            augment_training_set(&t, &targets, &aug, 8).unwrap(),
            augment_training_set(&t, &targets, &aug, 8).unwrap()
        );
    }
}
