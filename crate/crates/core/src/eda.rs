//! The four EDA sentence edits (synonym replacement, random insertion,
//! random swap, random deletion) and the per-sentence driver.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::augment::AugmentError;
use crate::corpus::{fraction_count, LabeledExample};
use crate::lexicon::SynonymMap;
use crate::text::{detokenize, tokenize};

/// How operations are chosen for the generated sentences of one source.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EdaStrategy {
    /// Each generated sentence applies one operation drawn uniformly.
    #[default]
    SampleOne,
    /// Generate `n_aug / 4 + 1` sentences per operation, shuffle, keep
    /// `n_aug`.
    EachOp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdaConfig {
    /// Per-operation intensity.
    pub alpha: f64,
    /// Sentences generated per source.
    pub n_aug: usize,
    pub strategy: EdaStrategy,
}

impl Default for EdaConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            n_aug: 1,
            strategy: EdaStrategy::SampleOne,
        }
    }
}

impl EdaConfig {
    pub fn validate(&self) -> Result<(), AugmentError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(AugmentError::InvalidParameter("eda alpha must lie in (0, 1)"));
        }
        if self.n_aug == 0 {
            return Err(AugmentError::InvalidParameter("eda n_aug must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdaOp {
    SynonymReplacement,
    RandomInsertion,
    RandomSwap,
    RandomDeletion,
}

impl EdaOp {
    pub const ALL: [EdaOp; 4] = [
        EdaOp::SynonymReplacement,
        EdaOp::RandomInsertion,
        EdaOp::RandomSwap,
        EdaOp::RandomDeletion,
    ];
}

/// Edits per operation for a sentence of `len` tokens: `max(1, floor(alpha * len))`.
pub fn intensity(alpha: f64, len: usize) -> usize {
    fraction_count(alpha, len).max(1)
}

/// Replaces up to `n` distinct synonym-bearing positions.
pub fn synonym_replacement<R: Rng + ?Sized>(tokens: &[String], n: usize, synmap: &SynonymMap, rng: &mut R) -> Vec<String> {
    let mut out = tokens.to_vec();
    let eligible: Vec<usize> = (0..tokens.len()).filter(|&i| synmap.has_candidates(&tokens[i])).collect();
    let k = n.min(eligible.len());
    if k == 0 {
        return out;
    }
    for pick in index::sample(rng, eligible.len(), k) {
        let pos = eligible[pick];
        if let Some(s) = synmap.candidates(&tokens[pos]).choose(rng) {
            out[pos] = s.clone();
        }
    }
    out
}

/// `n` times: insert a synonym of a random synonym-bearing token at a
/// random position.
pub fn random_insertion<R: Rng + ?Sized>(tokens: &[String], n: usize, synmap: &SynonymMap, rng: &mut R) -> Vec<String> {
    let mut out = tokens.to_vec();
    for _ in 0..n {
        let eligible: Vec<usize> = (0..out.len()).filter(|&i| synmap.has_candidates(&out[i])).collect();
        let Some(&src) = eligible.choose(rng) else {
            break;
        };
        let word = synmap.candidates(&out[src]).choose(rng).cloned().expect("eligible token has candidates");
        let at = rng.gen_range(0..=out.len());
        out.insert(at, word);
    }
    out
}

/// `n` times: exchange two distinct positions.
pub fn random_swap<R: Rng + ?Sized>(tokens: &[String], n: usize, rng: &mut R) -> Vec<String> {
    let mut out = tokens.to_vec();
    let len = out.len();
    if len < 2 {
        return out;
    }
    for _ in 0..n {
        let i = rng.gen_range(0..len);
        let mut j = rng.gen_range(0..len - 1);
        if j >= i {
            j += 1;
        }
        out.swap(i, j);
    }
    out
}

/// Drops each token with probability `p_del`; never returns an empty list
/// for non-empty input.
pub fn random_deletion<R: Rng + ?Sized>(tokens: &[String], p_del: f64, rng: &mut R) -> Vec<String> {
    if tokens.is_empty() || p_del <= 0.0 {
        return tokens.to_vec();
    }
    let kept: Vec<String> = tokens.iter().filter(|_| rng.gen::<f64>() >= p_del).cloned().collect();
    if kept.is_empty() {
        let i = rng.gen_range(0..tokens.len());
        return alloc::vec![tokens[i].clone()];
    }
    kept
}

/// Applies one operation at the intensity `alpha` implies for `tokens`.
pub fn apply_op<R: Rng + ?Sized>(op: EdaOp, tokens: &[String], alpha: f64, synmap: &SynonymMap, rng: &mut R) -> Vec<String> {
    let n = intensity(alpha, tokens.len());
    match op {
        EdaOp::SynonymReplacement => synonym_replacement(tokens, n, synmap, rng),
        EdaOp::RandomInsertion => random_insertion(tokens, n, synmap, rng),
        EdaOp::RandomSwap => random_swap(tokens, n, rng),
        EdaOp::RandomDeletion => random_deletion(tokens, alpha, rng),
    }
}

/// Generates `cfg.n_aug` variants of `sentence`, each with the source label.
pub fn eda_augment<R: Rng + ?Sized>(
    sentence: &LabeledExample,
    cfg: &EdaConfig,
    synmap: &SynonymMap,
    rng: &mut R,
) -> Result<Vec<LabeledExample>, AugmentError> {
    cfg.validate()?;
    let tokens = tokenize(sentence.text());
    if tokens.is_empty() {
        return Err(AugmentError::EmptyTokenization);
    }
    let ops: Vec<EdaOp> = match cfg.strategy {
        EdaStrategy::SampleOne => (0..cfg.n_aug).map(|_| EdaOp::ALL[rng.gen_range(0..4)]).collect(),
        EdaStrategy::EachOp => {
            let per_op = cfg.n_aug / 4 + 1;
            let mut ops: Vec<EdaOp> = EdaOp::ALL.iter().flat_map(|&op| core::iter::repeat_n(op, per_op)).collect();
            ops.shuffle(rng);
            ops.truncate(cfg.n_aug);
            ops
        }
    };
    ops.into_iter()
        .map(|op| {
            let edited = apply_op(op, &tokens, cfg.alpha, synmap, rng);
            Ok(sentence.with_text(&detokenize(&edited))?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn v(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| String::from(*s)).collect()
    }

    fn bom_map() -> SynonymMap {
        let mut m = SynonymMap::new();
        m.insert("bom", "ótimo");
        m
    }

    #[test]
    fn intensity_examples() {
        assert_eq!(intensity(0.1, 9), 1);
        assert_eq!(intensity(0.1, 25), 2);
        assert_eq!(intensity(0.1, 30), 3);
        assert_eq!(intensity(0.1, 1), 1);
    }

    #[test]
    fn replacement_cases() {
        let mut rng = seeded(1);
        let t = v(&["bom", "produto"]);
        assert_eq!(synonym_replacement(&t, 0, &bom_map(), &mut rng), t);
        assert_eq!(synonym_replacement(&t, 1, &bom_map(), &mut rng), v(&["ótimo", "produto"]));
        assert_eq!(synonym_replacement(&t, 5, &SynonymMap::new(), &mut rng), t);
    }

    #[test]
    fn replacement_caps_at_eligible() {
        let mut rng = seeded(1);
        let t = v(&["bom", "x", "bom"]);
        assert_eq!(synonym_replacement(&t, 10, &bom_map(), &mut rng), v(&["ótimo", "x", "ótimo"]));
    }

    #[test]
    fn insertion_cases() {
        let mut rng = seeded(2);
        let t = v(&["bom"]);
        assert_eq!(random_insertion(&t, 0, &bom_map(), &mut rng), t);
        let mut out = random_insertion(&t, 1, &bom_map(), &mut rng);
        out.sort();
        assert_eq!(out, v(&["bom", "ótimo"]));
        assert_eq!(random_insertion(&t, 3, &SynonymMap::new(), &mut rng), t);
    }

    #[test]
    fn swap_cases() {
        let mut rng = seeded(3);
        assert_eq!(random_swap(&v(&["a"]), 4, &mut rng), v(&["a"]));
        assert_eq!(random_swap(&v(&["a", "b"]), 1, &mut rng), v(&["b", "a"]));
    }

    #[test]
    fn deletion_cases() {
        let mut rng = seeded(4);
        let t = v(&["a", "b", "c"]);
        assert_eq!(random_deletion(&t, 0.0, &mut rng), t);
        let one = random_deletion(&t, 1.0, &mut rng);
        assert_eq!(one.len(), 1);
        assert!(t.contains(&one[0]));
    }

    #[test]
    fn augment_copies_label() {
        let ex = LabeledExample::new("bom produto chegou rápido", "pos").unwrap();
        let out = eda_augment(&ex, &EdaConfig::default(), &bom_map(), &mut seeded(5)).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].label(), "pos");
    }

    #[test]
    fn augment_each_op_count() {
        let ex = LabeledExample::new("bom produto chegou rápido", "pos").unwrap();
        let cfg = EdaConfig { n_aug: 6, strategy: EdaStrategy::EachOp, ..EdaConfig::default() };
        assert_eq!(eda_augment(&ex, &cfg, &bom_map(), &mut seeded(5)).unwrap().len(), 6);
    }

    #[test]
    fn augment_rejects_empty_tokenization() {
        let ex = LabeledExample::new("!!!", "pos").unwrap();
        assert_eq!(
            eda_augment(&ex, &EdaConfig::default(), &bom_map(), &mut seeded(5)),
            Err(AugmentError::EmptyTokenization)
        );
    }

    #[test]
    fn augment_is_seed_deterministic() {
        let ex = LabeledExample::new("o produto bom chegou muito rápido e bem embalado", "pos").unwrap();
        let cfg = EdaConfig { n_aug: 4, ..EdaConfig::default() };
        let a = eda_augment(&ex, &cfg, &bom_map(), &mut seeded(9)).unwrap();
        let b = eda_augment(&ex, &cfg, &bom_map(), &mut seeded(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        assert!(EdaConfig { alpha: 0.0, ..EdaConfig::default() }.validate().is_err());
        assert!(EdaConfig { n_aug: 0, ..EdaConfig::default() }.validate().is_err());
    }
}
