//! Lexical resources: a word-level paraphrase map and a dense word-vector
//! table with brute-force cosine neighbor search.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexiconError {
    #[error("no usable paraphrase records")]
    NoParaphrases,
    #[error("invalid embedding header {0:?}, expected `<count> <dim>`")]
    BadHeader(String),
    #[error("no valid embedding rows")]
    NoVectors,
}

/// Field separator of a paraphrase-database record.
pub const PPDB_SEPARATOR: &str = "|||";

/// Returns the lowercased word when `phrase` is exactly one token.
fn single_token(phrase: &str) -> Option<String> {
    let mut toks = tokenize(phrase);
    let lowered = phrase.trim().to_lowercase();
    (toks.len() == 1 && toks[0] == lowered).then(|| toks.remove(0))
}

/// Result of parsing one paraphrase line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PpdbLine {
    Pair(String, String),
    /// Well-formed record that is not a single-token pair.
    Filtered,
    Malformed,
}

/// Parses `[LHS] ||| source ||| target ||| features ||| ...`.
pub fn parse_ppdb_line(line: &str) -> PpdbLine {
    let fields: Vec<&str> = line.split(PPDB_SEPARATOR).map(str::trim).collect();
    if fields.len() < 3 || fields[1].is_empty() || fields[2].is_empty() {
        return PpdbLine::Malformed;
    }
    match (single_token(fields[1]), single_token(fields[2])) {
        (Some(src), Some(dst)) if src != dst => PpdbLine::Pair(src, dst),
        _ => PpdbLine::Filtered,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PpdbStats {
    pub lines: usize,
    pub pairs: usize,
    pub filtered: usize,
    pub malformed: usize,
}

/// Word to ordered, duplicate-free candidate replacements.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymMap {
    entries: BTreeMap<String, Vec<String>>,
}

impl SynonymMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `dst` as a candidate for `src`. Self-pairs, multi-token
    /// entries and repeats are ignored; returns whether the map changed.
    pub fn insert(&mut self, src: &str, dst: &str) -> bool {
        if src == dst || src.split_whitespace().count() != 1 || dst.split_whitespace().count() != 1 {
            return false;
        }
        let list = self.entries.entry(src.to_string()).or_default();
        if list.iter().any(|c| c == dst) {
            return false;
        }
        list.push(dst.to_string());
        true
    }

    pub fn candidates(&self, word: &str) -> &[String] {
        self.entries.get(word).map_or(&[], Vec::as_slice)
    }

    pub fn has_candidates(&self, word: &str) -> bool {
        !self.candidates(word).is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Builds a map from paraphrase-database lines. With `symmetrize`, each
    /// pair is also inserted in reverse.
    pub fn from_ppdb_lines<'a>(
        lines: impl IntoIterator<Item = &'a str>,
        symmetrize: bool,
    ) -> Result<(Self, PpdbStats), LexiconError> {
        let mut builder = PpdbBuilder::new(symmetrize);
        for line in lines {
            builder.push_line(line);
        }
        builder.finish()
    }
}

/// Incremental paraphrase-file parser, for streaming large files.
#[derive(Debug, Default)]
pub struct PpdbBuilder {
    map: SynonymMap,
    stats: PpdbStats,
    symmetrize: bool,
}

impl PpdbBuilder {
    pub fn new(symmetrize: bool) -> Self {
        Self {
            symmetrize,
            ..Self::default()
        }
    }

    pub fn push_line(&mut self, line: &str) {
        if line.trim().is_empty() {
            return;
        }
        self.stats.lines += 1;
        match parse_ppdb_line(line) {
            PpdbLine::Pair(src, dst) => {
                self.stats.pairs += 1;
                self.map.insert(&src, &dst);
                if self.symmetrize {
                    self.map.insert(&dst, &src);
                }
            }
            PpdbLine::Filtered => self.stats.filtered += 1,
            PpdbLine::Malformed => self.stats.malformed += 1,
        }
    }

    pub fn finish(self) -> Result<(SynonymMap, PpdbStats), LexiconError> {
        if self.map.is_empty() {
            return Err(LexiconError::NoParaphrases);
        }
        Ok((self.map, self.stats))
    }
}

/// Cosine similarity. Zero vectors yield `None`.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = libm::sqrt(a.iter().map(|x| x * x).sum());
    let nb = libm::sqrt(b.iter().map(|x| x * x).sum());
    (na > 0.0 && nb > 0.0).then(|| dot / (na * nb))
}

/// Immutable word-vector table.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    words: Vec<String>,
    index: BTreeMap<String, usize>,
    values: Vec<f32>,
    norms: Vec<f64>,
}

impl EmbeddingStore {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Builds a store from in-memory rows; first occurrence of a word wins.
    pub fn from_rows<'a>(dim: usize, rows: impl IntoIterator<Item = (&'a str, Vec<f32>)>) -> Result<Self, LexiconError> {
        let mut b = EmbeddingBuilder::with_dim(dim);
        for (w, v) in rows {
            b.push(w, v);
        }
        b.finish()
    }

    /// The `k` most cosine-similar words to `word`, excluding `word` itself
    /// and zero vectors. Ties are ordered by word.
    pub fn nearest_neighbors(&self, word: &str, k: usize) -> Vec<(String, f64)> {
        let Some(&qi) = self.index.get(word) else {
            return Vec::new();
        };
        if k == 0 || self.norms[qi] == 0.0 {
            return Vec::new();
        }
        let q = self.row(qi);
        let qn = self.norms[qi];
        let mut best: Vec<(usize, f64)> = Vec::with_capacity(k + 1);
        let better = |a: (usize, f64), b: (usize, f64), words: &[String]| -> bool {
            a.1 > b.1 || (a.1 == b.1 && words[a.0] < words[b.0])
        };
        for i in 0..self.words.len() {
            if i == qi || self.norms[i] == 0.0 {
                continue;
            }
            let dot: f64 = q.iter().zip(self.row(i)).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum();
            let cand = (i, dot / (qn * self.norms[i]));
            if best.len() == k && !better(cand, best[k - 1], &self.words) {
                continue;
            }
            let pos = best
                .iter()
                .position(|&b| better(cand, b, &self.words))
                .unwrap_or(best.len());
            best.insert(pos, cand);
            best.truncate(k);
        }
        best.into_iter().map(|(i, s)| (self.words[i].clone(), s)).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EmbeddingStats {
    pub declared_count: usize,
    pub rows: usize,
    pub bad_arity: usize,
    pub non_finite: usize,
    pub duplicates: usize,
}

impl EmbeddingStats {
    pub fn skipped(&self) -> usize {
        self.bad_arity + self.non_finite + self.duplicates
    }
}

/// Incremental `.vec` parser: a `<count> <dim>` header, then
/// `word v1 .. v<dim>` rows.
#[derive(Debug)]
pub struct EmbeddingBuilder {
    store: EmbeddingStore,
    stats: EmbeddingStats,
}

impl EmbeddingBuilder {
    pub fn from_header(header: &str) -> Result<Self, LexiconError> {
        let bad = || LexiconError::BadHeader(header.trim().to_string());
        let mut parts = header.split_whitespace();
        let count: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let dim: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        if parts.next().is_some() || dim == 0 {
            return Err(bad());
        }
        let mut b = Self::with_dim(dim);
        b.stats.declared_count = count;
        Ok(b)
    }

    pub fn with_dim(dim: usize) -> Self {
        Self {
            store: EmbeddingStore {
                dim,
                words: Vec::new(),
                index: BTreeMap::new(),
                values: Vec::new(),
                norms: Vec::new(),
            },
            stats: EmbeddingStats::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.store.dim
    }

    pub fn push_line(&mut self, line: &str) {
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else {
            return;
        };
        let mut values = Vec::with_capacity(self.store.dim);
        for p in parts {
            match p.parse::<f32>() {
                Ok(v) => values.push(v),
                Err(_) => {
                    self.stats.bad_arity += 1;
                    return;
                }
            }
        }
        self.push(word, values);
    }

    pub fn push(&mut self, word: &str, values: Vec<f32>) {
        if values.len() != self.store.dim {
            self.stats.bad_arity += 1;
            return;
        }
        if values.iter().any(|v| !v.is_finite()) {
            self.stats.non_finite += 1;
            return;
        }
        if self.store.index.contains_key(word) {
            self.stats.duplicates += 1;
            return;
        }
        let norm = libm::sqrt(values.iter().map(|&v| f64::from(v) * f64::from(v)).sum());
        self.store.index.insert(word.to_string(), self.store.words.len());
        self.store.words.push(word.to_string());
        self.store.values.extend_from_slice(&values);
        self.store.norms.push(norm);
        self.stats.rows += 1;
    }

    pub fn stats(&self) -> EmbeddingStats {
        self.stats
    }

    pub fn finish(self) -> Result<EmbeddingStore, LexiconError> {
        if self.store.is_empty() {
            return Err(LexiconError::NoVectors);
        }
        Ok(self.store)
    }
}
