//! Sequential word-replacement pipeline over pluggable candidate providers.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::augment::AugmentError;
use crate::corpus::{fraction_count, LabeledExample};
use crate::lexicon::{EmbeddingStore, SynonymMap};
use crate::text::{detokenize, tokenize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("provider {provider}: {message}")]
pub struct ProviderError {
    pub provider: String,
    pub message: String,
}

/// Source of replacement candidates for one token in context.
///
/// Implementations return an empty list for unknown words and never return
/// the query word itself. Errors are reserved for transport failures of
/// remote providers.
pub trait ReplacementProvider: Send + Sync {
    fn name(&self) -> &str;

    fn candidates(&self, word: &str, context: &[String], position: usize) -> Result<Vec<String>, ProviderError>;
}

impl ReplacementProvider for SynonymMap {
    fn name(&self) -> &str {
        "ppdb"
    }

    fn candidates(&self, word: &str, _context: &[String], _position: usize) -> Result<Vec<String>, ProviderError> {
        Ok(SynonymMap::candidates(self, word).to_vec())
    }
}

impl<P: ReplacementProvider + ?Sized> ReplacementProvider for Arc<P> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn candidates(&self, word: &str, context: &[String], position: usize) -> Result<Vec<String>, ProviderError> {
        (**self).candidates(word, context, position)
    }
}

/// Embedding nearest neighbors as replacement candidates.
#[derive(Debug, Clone)]
pub struct EmbeddingNeighbors {
    pub store: Arc<EmbeddingStore>,
    pub k: usize,
}

impl ReplacementProvider for EmbeddingNeighbors {
    fn name(&self) -> &str {
        "embedding"
    }

    fn candidates(&self, word: &str, _context: &[String], _position: usize) -> Result<Vec<String>, ProviderError> {
        Ok(self.store.nearest_neighbors(word, self.k).into_iter().map(|(w, _)| w).collect())
    }
}

/// Runs one provider stage over `tokens` in place. Returns the number of
/// replaced positions.
pub fn replacement_stage<R: Rng + ?Sized>(
    tokens: &mut [String],
    provider: &dyn ReplacementProvider,
    rate: f64,
    rng: &mut R,
) -> Result<usize, ProviderError> {
    let budget = fraction_count(rate, tokens.len()).max(1);
    let mut eligible: Vec<(usize, Vec<String>)> = Vec::new();
    for i in 0..tokens.len() {
        let word = tokens[i].clone();
        let mut cands = provider.candidates(&word, tokens, i)?;
        cands.retain(|c| *c != word && !c.is_empty());
        if !cands.is_empty() {
            eligible.push((i, cands));
        }
    }
    let k = budget.min(eligible.len());
    if k == 0 {
        return Ok(0);
    }
    for pick in index::sample(rng, eligible.len(), k) {
        let (pos, cands) = &eligible[pick];
        tokens[*pos] = cands.choose(rng).expect("non-empty candidates").clone();
    }
    Ok(k)
}

/// Applies the providers in order, each stage feeding the next, and returns
/// one new example with the source label.
pub fn sequential_augment<R: Rng + ?Sized>(
    sentence: &LabeledExample,
    providers: &[&dyn ReplacementProvider],
    rate: f64,
    rng: &mut R,
) -> Result<LabeledExample, AugmentError> {
    if providers.is_empty() {
        return Err(AugmentError::InvalidParameter("at least one replacement provider is required"));
    }
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(AugmentError::InvalidParameter("replacement rate must lie in (0, 1]"));
    }
    let mut tokens = tokenize(sentence.text());
    if tokens.is_empty() {
        return Err(AugmentError::EmptyTokenization);
    }
    for p in providers {
        replacement_stage(&mut tokens, *p, rate, rng).map_err(AugmentError::Provider)?;
    }
    Ok(sentence.with_text(&detokenize(&tokens))?)
}

/// Fixed word-to-candidates table; handy as a deterministic provider.
#[derive(Debug, Clone, Default)]
pub struct TableProvider {
    name: String,
    map: SynonymMap,
}

impl TableProvider {
    pub fn new(name: &str, pairs: &[(&str, &str)]) -> Self {
        let mut map = SynonymMap::new();
        for (a, b) in pairs {
            map.insert(a, b);
        }
        Self { name: name.to_string(), map }
    }
}

impl ReplacementProvider for TableProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn candidates(&self, word: &str, _context: &[String], _position: usize) -> Result<Vec<String>, ProviderError> {
        Ok(self.map.candidates(word).to_vec())
    }
}
