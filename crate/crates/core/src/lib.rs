//! Core algorithms for benchmarking text data augmentation on small
//! classification corpora.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure,
//! seed-driven computation:
//!
//! * [`text`] and [`corpus`]: tokenization, subset resampling, stratified
//!   splitting and augmentation target selection.
//! * [`eda`], [`replace`] and [`augment`]: the EDA operations, the sequential
//!   synonym-replacement pipeline and the training-set augmentation driver.
//! * [`lexicon`]: paraphrase maps and word-embedding tables.
//! * [`features`], [`kernel`], [`svm`] and [`metrics`]: sentence vectors, the
//!   RBF kernel, an SMO-trained one-vs-one SVM and weighted F1.
//! * [`stats`], [`grid`] and [`summary`]: McNemar testing, gains, best-model
//!   filtering, grid planning and the report tables.
//!
//! File formats, translation providers and the experiment runner live in the
//! `textaug` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod augment;
pub mod corpus;
pub mod eda;
pub mod features;
pub mod grid;
pub mod kernel;
pub mod lexicon;
pub mod metrics;
pub mod replace;
pub mod rng;
pub mod stats;
pub mod summary;
pub mod svm;
pub mod text;

pub use augment::{augment_training_set, AugmentError, AugmentedSet, Augmenter, Origin};
pub use corpus::{CorpusError, Dataset, LabeledExample, SplitPair};
pub use eda::{EdaConfig, EdaStrategy};
pub use features::{sentence_vector, FeatureMatrix};
pub use grid::{AugPct, ExperimentResult, GridCell, GridCoord, GridSpec, Group, Status};
pub use lexicon::{EmbeddingStore, SynonymMap};
pub use metrics::{evaluate, EvalReport};
pub use replace::{ProviderError, ReplacementProvider};
pub use stats::{ContingencyTable, GainRecord, TestResult};
pub use svm::{SvmConfig, SvmModel};
pub use text::tokenize;
