//! Back translation: provider abstraction, offline mocks, an HTTP client,
//! the persistent translation cache and the BT augmenter.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, Mutex, RwLock};
use std::time::{Duration, Instant};

use rand::RngCore;
use serde::{Deserialize, Serialize};
use textaug_core::augment::{AugmentError, Augmenter};
use textaug_core::corpus::LabeledExample;
use textaug_core::text::normalize_whitespace;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TranslateError {
    /// Network failure, timeout, throttling or a server error. Retried.
    #[error("transport error: {0}")]
    Transport(String),
    /// The provider refused the request. Not retried.
    #[error("request rejected: {0}")]
    Rejected(String),
    #[error("provider returned empty text")]
    Empty,
    #[error("cache write failed: {0}")]
    Cache(String),
}

impl TranslateError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, TranslateError::Transport(_))
    }
}

pub trait TranslationProvider: Send + Sync {
    fn name(&self) -> &str;

    fn translate(&self, text: &str, source: &str, target: &str) -> std::result::Result<String, TranslateError>;
}

impl<P: TranslationProvider + ?Sized> TranslationProvider for Arc<P> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn translate(&self, text: &str, source: &str, target: &str) -> std::result::Result<String, TranslateError> {
        (**self).translate(text, source, target)
    }
}

/// Returns its input.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTranslator;

impl TranslationProvider for IdentityTranslator {
    fn name(&self) -> &str {
        "identity"
    }

    fn translate(&self, text: &str, _source: &str, _target: &str) -> std::result::Result<String, TranslateError> {
        if text.trim().is_empty() {
            return Err(TranslateError::Empty);
        }
        Ok(text.to_string())
    }
}

/// Word-by-word dictionary translation.
///
/// Translating out of `source_lang` uses the `src -> dst` table, any other
/// direction uses the inverse table. Unknown words, punctuation and
/// whitespace pass through unchanged; a capitalized first letter is carried
/// over to the replacement.
#[derive(Debug, Clone)]
pub struct DictTranslator {
    name: String,
    source_lang: String,
    forward: HashMap<String, String>,
    inverse: HashMap<String, String>,
}

impl DictTranslator {
    pub fn new(name: &str, source_lang: &str, pairs: &[(&str, &str)]) -> Self {
        let mut forward = HashMap::new();
        let mut inverse = HashMap::new();
        for &(s, d) in pairs {
            forward.entry(s.to_lowercase()).or_insert_with(|| d.to_lowercase());
            inverse.entry(d.to_lowercase()).or_insert_with(|| s.to_lowercase());
        }
        Self {
            name: name.into(),
            source_lang: source_lang.into(),
            forward,
            inverse,
        }
    }

    /// Reads `src<TAB>dst` lines; blank lines and `#` comments are ignored.
    pub fn from_file(name: &str, source_lang: &str, path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut pairs = Vec::new();
        for (n, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once('\t') {
                Some((s, d)) if !s.trim().is_empty() && !d.trim().is_empty() => {
                    pairs.push((s.trim().to_string(), d.trim().to_string()))
                }
                _ => return Err(Error::format(path, format!("line {}: expected `src<TAB>dst`", n + 1))),
            }
        }
        let refs: Vec<(&str, &str)> = pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        Ok(Self::new(name, source_lang, &refs))
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    fn map_word(table: &HashMap<String, String>, word: &str) -> String {
        let start = word.find(|c: char| c.is_alphanumeric());
        let end = word.rfind(|c: char| c.is_alphanumeric());
        let (Some(start), Some(end)) = (start, end) else {
            return word.to_string();
        };
        let end = end + word[end..].chars().next().map_or(0, char::len_utf8);
        let core = &word[start..end];
        let Some(repl) = table.get(&core.to_lowercase()) else {
            return word.to_string();
        };
        let repl = if core.chars().next().is_some_and(char::is_uppercase) {
            let mut c = repl.chars();
            c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
        } else {
            repl.clone()
        };
        format!("{}{}{}", &word[..start], repl, &word[end..])
    }
}

impl TranslationProvider for DictTranslator {
    fn name(&self) -> &str {
        &self.name
    }

    fn translate(&self, text: &str, source: &str, _target: &str) -> std::result::Result<String, TranslateError> {
        if text.trim().is_empty() {
            return Err(TranslateError::Empty);
        }
        let table = if source == self.source_lang { &self.forward } else { &self.inverse };
        let mut out = String::with_capacity(text.len());
        let mut word = String::new();
        for ch in text.chars() {
            if ch.is_whitespace() {
                if !word.is_empty() {
                    out.push_str(&Self::map_word(table, &word));
                    word.clear();
                }
                out.push(ch);
            } else {
                word.push(ch);
            }
        }
        if !word.is_empty() {
            out.push_str(&Self::map_word(table, &word));
        }
        Ok(out)
    }
}

/// Counts calls reaching the wrapped provider.
pub struct CountingTranslator<P> {
    inner: P,
    requests: AtomicU64,
}

impl<P> CountingTranslator<P> {
    pub fn new(inner: P) -> Self {
        Self {
            inner,
            requests: AtomicU64::new(0),
        }
    }

    pub fn requests(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }
}

impl<P: TranslationProvider> TranslationProvider for CountingTranslator<P> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn translate(&self, text: &str, source: &str, target: &str) -> std::result::Result<String, TranslateError> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        self.inner.translate(text, source, target)
    }
}

#[derive(Debug)]
struct LimiterState {
    in_flight: usize,
    next_slot: Instant,
}

/// Caps concurrent requests and the request rate across all threads.
#[derive(Debug)]
pub struct RateLimiter {
    max_in_flight: usize,
    interval: Option<Duration>,
    state: Mutex<LimiterState>,
    freed: Condvar,
}

/// Releases an in-flight slot on drop.
pub struct Permit<'a>(&'a RateLimiter);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut s = self.0.state.lock().unwrap_or_else(|e| e.into_inner());
        s.in_flight -= 1;
        self.0.freed.notify_one();
    }
}

impl RateLimiter {
    /// `max_in_flight = 0` and `per_second = 0.0` mean unlimited.
    pub fn new(max_in_flight: usize, per_second: f64) -> Self {
        Self {
            max_in_flight: if max_in_flight == 0 { usize::MAX } else { max_in_flight },
            interval: (per_second > 0.0).then(|| Duration::from_secs_f64(1.0 / per_second)),
            state: Mutex::new(LimiterState {
                in_flight: 0,
                next_slot: Instant::now(),
            }),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut s = self.state.lock().unwrap_or_else(|e| e.into_inner());
        while s.in_flight >= self.max_in_flight {
            s = self.freed.wait(s).unwrap_or_else(|e| e.into_inner());
        }
        s.in_flight += 1;
        let wait = self.interval.map(|iv| {
            let now = Instant::now();
            let slot = s.next_slot.max(now);
            s.next_slot = slot + iv;
            slot - now
        });
        drop(s);
        if let Some(w) = wait.filter(|w| !w.is_zero()) {
            std::thread::sleep(w);
        }
        Permit(self)
    }

    pub fn in_flight(&self) -> usize {
        self.state.lock().unwrap_or_else(|e| e.into_inner()).in_flight
    }
}

pub struct RateLimited<P> {
    inner: P,
    limiter: RateLimiter,
}

impl<P> RateLimited<P> {
    pub fn new(inner: P, limiter: RateLimiter) -> Self {
        Self { inner, limiter }
    }

    pub fn limiter(&self) -> &RateLimiter {
        &self.limiter
    }
}

impl<P: TranslationProvider> TranslationProvider for RateLimited<P> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn translate(&self, text: &str, source: &str, target: &str) -> std::result::Result<String, TranslateError> {
        let _permit = self.limiter.acquire();
        self.inner.translate(text, source, target)
    }
}

/// Credential that never appears in `Debug` output.
#[derive(Clone)]
pub struct Secret(String);

impl Secret {
    pub fn new(s: String) -> Self {
        Self(s)
    }

    pub fn expose(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Debug for Secret {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Secret(<redacted>)")
    }
}

#[derive(Serialize)]
struct TranslateRequest<'a> {
    text: &'a str,
    source: &'a str,
    target: &'a str,
}

#[derive(Deserialize)]
struct TranslateResponse {
    translated: String,
}

pub(crate) fn http_error(e: ureq::Error) -> TranslateError {
    match e {
        ureq::Error::StatusCode(code) if code == 429 || code >= 500 => TranslateError::Transport(format!("http status {code}")),
        ureq::Error::StatusCode(code) => TranslateError::Rejected(format!("http status {code}")),
        ureq::Error::Json(e) => TranslateError::Rejected(format!("bad response body: {e}")),
        other => TranslateError::Transport(other.to_string()),
    }
}

pub(crate) fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder().timeout_global(Some(timeout)).build().into()
}

/// JSON-over-HTTP translation service:
/// `POST {text, source, target}` answered by `{translated}`, with an
/// optional bearer token.
#[derive(Debug)]
pub struct HttpTranslator {
    name: String,
    endpoint: String,
    token: Option<Secret>,
    agent: ureq::Agent,
}

impl HttpTranslator {
    pub fn new(name: &str, endpoint: &str, token: Option<Secret>, timeout: Duration) -> Self {
        Self {
            name: name.into(),
            endpoint: endpoint.into(),
            token,
            agent: agent(timeout),
        }
    }

    /// Reads the token from `token_env` when that variable is set.
    pub fn from_env(name: &str, endpoint: &str, token_env: &str, timeout: Duration) -> Self {
        let token = std::env::var(token_env).ok().filter(|t| !t.is_empty()).map(Secret::new);
        Self::new(name, endpoint, token, timeout)
    }
}

impl TranslationProvider for HttpTranslator {
    fn name(&self) -> &str {
        &self.name
    }

    fn translate(&self, text: &str, source: &str, target: &str) -> std::result::Result<String, TranslateError> {
        let mut req = self.agent.post(&self.endpoint);
        if let Some(t) = &self.token {
            req = req.header("Authorization", format!("Bearer {}", t.expose()));
        }
        let mut resp = req.send_json(TranslateRequest { text, source, target }).map_err(http_error)?;
        let body: TranslateResponse = resp.body_mut().read_json().map_err(http_error)?;
        if body.translated.trim().is_empty() {
            return Err(TranslateError::Empty);
        }
        Ok(body.translated)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    provider: String,
    source: String,
    target: String,
    text: String,
}

#[derive(Serialize, Deserialize)]
struct CacheRecord {
    provider: String,
    source: String,
    target: String,
    text: String,
    translated: String,
}

/// Translation memo keyed by (provider, source, target, text), optionally
/// persisted as an append-only JSON-lines file.
#[derive(Debug)]
pub struct TranslationCache {
    entries: RwLock<HashMap<CacheKey, String>>,
    file: Option<Mutex<File>>,
    path: Option<PathBuf>,
    skipped_lines: usize,
}

impl TranslationCache {
    pub fn in_memory() -> Self {
        Self {
            entries: RwLock::new(HashMap::new()),
            file: None,
            path: None,
            skipped_lines: 0,
        }
    }

    /// Loads every record of `path` (created if missing) and appends new
    /// entries to it. Unparseable lines, such as a torn final write, are
    /// skipped and counted.
    pub fn open(path: &Path) -> Result<Self> {
        let mut entries = HashMap::new();
        let mut skipped_lines = 0;
        if path.exists() {
            let f = File::open(path).map_err(|e| Error::io(path, e))?;
            for line in BufReader::new(f).lines() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheRecord>(&line) {
                    Ok(r) => {
                        entries.insert(
                            CacheKey {
                                provider: r.provider,
                                source: r.source,
                                target: r.target,
                                text: r.text,
                            },
                            r.translated,
                        );
                    }
                    Err(_) => skipped_lines += 1,
                }
            }
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            entries: RwLock::new(entries),
            file: Some(Mutex::new(file)),
            path: Some(path.to_path_buf()),
            skipped_lines,
        })
    }

    fn key(provider: &str, source: &str, target: &str, text: &str) -> CacheKey {
        CacheKey {
            provider: provider.into(),
            source: source.into(),
            target: target.into(),
            text: text.into(),
        }
    }

    pub fn get(&self, provider: &str, source: &str, target: &str, text: &str) -> Option<String> {
        let entries = self.entries.read().unwrap_or_else(|e| e.into_inner());
        entries.get(&Self::key(provider, source, target, text)).cloned()
    }

    /// Records a translation. Concurrent writers of the same key store the
    /// same value, so the last write winning is harmless.
    pub fn put(&self, provider: &str, source: &str, target: &str, text: &str, translated: &str) -> std::io::Result<()> {
        self.entries
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(Self::key(provider, source, target, text), translated.to_string());
        if let Some(file) = &self.file {
            let rec = CacheRecord {
                provider: provider.into(),
                source: source.into(),
                target: target.into(),
                text: text.into(),
                translated: translated.into(),
            };
            let mut line = serde_json::to_string(&rec).map_err(std::io::Error::other)?;
            line.push('\n');
            let mut f = file.lock().unwrap_or_else(|e| e.into_inner());
            f.write_all(line.as_bytes())?;
            f.flush()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn skipped_lines(&self) -> usize {
        self.skipped_lines
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            base_delay: Duration::from_millis(200),
        }
    }
}

/// One cached, retried translation hop.
pub fn translate_cached(
    text: &str,
    source: &str,
    target: &str,
    provider: &dyn TranslationProvider,
    cache: &TranslationCache,
    retry: &RetryPolicy,
) -> std::result::Result<String, TranslateError> {
    if let Some(hit) = cache.get(provider.name(), source, target, text) {
        return Ok(hit);
    }
    let mut attempt = 0;
    let out = loop {
        match provider.translate(text, source, target) {
            Ok(t) if t.trim().is_empty() => break Err(TranslateError::Empty),
            Ok(t) => break Ok(t),
            Err(e) if e.is_retryable() && attempt < retry.max_retries => {
                std::thread::sleep(retry.base_delay.saturating_mul(1 << attempt.min(16)));
                attempt += 1;
            }
            Err(e) => break Err(e),
        }
    }?;
    cache
        .put(provider.name(), source, target, text, &out)
        .map_err(|e| TranslateError::Cache(e.to_string()))?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackTranslation {
    pub example: LabeledExample,
    /// The round trip reproduced the input up to whitespace.
    pub degenerate: bool,
}

/// `source -> pivot -> source`, each hop through the cache.
pub fn back_translate(
    example: &LabeledExample,
    provider: &dyn TranslationProvider,
    source: &str,
    pivot: &str,
    cache: &TranslationCache,
    retry: &RetryPolicy,
) -> std::result::Result<BackTranslation, TranslateError> {
    let there = translate_cached(example.text(), source, pivot, provider, cache, retry)?;
    let back = translate_cached(&there, pivot, source, provider, cache, retry)?;
    let degenerate = normalize_whitespace(&back) == normalize_whitespace(example.text());
    let example = example.with_text(&back).map_err(|_| TranslateError::Empty)?;
    Ok(BackTranslation { example, degenerate })
}

/// The BT augmentation group: one back-translated sentence per target.
pub struct BtAugmenter {
    pub provider: Arc<dyn TranslationProvider>,
    pub cache: Arc<TranslationCache>,
    pub source_lang: String,
    pub pivot: String,
    pub retry: RetryPolicy,
    degenerate: AtomicUsize,
}

impl BtAugmenter {
    pub fn new(provider: Arc<dyn TranslationProvider>, cache: Arc<TranslationCache>, source_lang: &str, pivot: &str, retry: RetryPolicy) -> Self {
        Self {
            provider,
            cache,
            source_lang: source_lang.into(),
            pivot: pivot.into(),
            retry,
            degenerate: AtomicUsize::new(0),
        }
    }

    /// Outputs equal to their input so far.
    pub fn degenerate_count(&self) -> usize {
        self.degenerate.load(Ordering::Relaxed)
    }
}

impl Augmenter for BtAugmenter {
    fn name(&self) -> &str {
        "BT"
    }

    fn augment(&self, example: &LabeledExample, _rng: &mut dyn RngCore) -> std::result::Result<Vec<LabeledExample>, AugmentError> {
        let bt = back_translate(example, self.provider.as_ref(), &self.source_lang, &self.pivot, &self.cache, &self.retry)
            .map_err(|e| AugmentError::Translation(e.to_string()))?;
        if bt.degenerate {
            self.degenerate.fetch_add(1, Ordering::Relaxed);
        }
        Ok(vec![bt.example])
    }
}
