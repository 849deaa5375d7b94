//! Context-aware replacement candidates: a client for an external
//! masked-language-model service and a deterministic offline stand-in.

use std::collections::{BTreeMap, HashMap};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use textaug_core::replace::{ProviderError, ReplacementProvider};
use textaug_core::text::tokenize;

use crate::translate::{agent, Secret};

#[derive(Serialize)]
struct MaskRequest<'a> {
    tokens: &'a [String],
    position: usize,
}

#[derive(Deserialize)]
struct MaskResponse {
    candidates: Vec<String>,
}

/// `POST {tokens, position}` answered by `{candidates}`.
#[derive(Debug)]
pub struct HttpContextual {
    endpoint: String,
    token: Option<Secret>,
    agent: ureq::Agent,
}

impl HttpContextual {
    pub fn new(endpoint: &str, token: Option<Secret>, timeout: Duration) -> Self {
        Self {
            endpoint: endpoint.into(),
            token,
            agent: agent(timeout),
        }
    }

    pub fn from_env(endpoint: &str, token_env: &str, timeout: Duration) -> Self {
        let token = std::env::var(token_env).ok().filter(|t| !t.is_empty()).map(Secret::new);
        Self::new(endpoint, token, timeout)
    }

    fn error(&self, message: String) -> ProviderError {
        ProviderError {
            provider: "contextual".into(),
            message,
        }
    }
}

impl ReplacementProvider for HttpContextual {
    fn name(&self) -> &str {
        "contextual"
    }

    fn candidates(&self, word: &str, context: &[String], position: usize) -> Result<Vec<String>, ProviderError> {
        let mut req = self.agent.post(&self.endpoint);
        if let Some(t) = &self.token {
            req = req.header("Authorization", format!("Bearer {}", t.expose()));
        }
        let mut resp = req
            .send_json(MaskRequest {
                tokens: context,
                position,
            })
            .map_err(|e| self.error(e.to_string()))?;
        let body: MaskResponse = resp.body_mut().read_json().map_err(|e| self.error(e.to_string()))?;
        let mut out: Vec<String> = Vec::new();
        for c in body.candidates {
            let c = c.trim().to_lowercase();
            if !c.is_empty() && c != word && !c.contains(char::is_whitespace) && !out.contains(&c) {
                out.push(c);
            }
        }
        Ok(out)
    }
}

/// Offline stand-in for a masked language model: proposes the words seen
/// after the preceding token in a reference corpus, most frequent first.
#[derive(Debug, Clone, Default)]
pub struct BigramContextual {
    followers: HashMap<String, Vec<String>>,
    k: usize,
}

const START: &str = "<s>";

impl BigramContextual {
    pub fn from_sentences<'a>(sentences: impl IntoIterator<Item = &'a str>, k: usize) -> Self {
        let mut counts: HashMap<String, BTreeMap<String, usize>> = HashMap::new();
        for s in sentences {
            let toks = tokenize(s);
            let mut prev = START.to_string();
            for t in toks {
                *counts.entry(prev).or_default().entry(t.clone()).or_insert(0) += 1;
                prev = t;
            }
        }
        let followers = counts
            .into_iter()
            .map(|(p, next)| {
                let mut v: Vec<(String, usize)> = next.into_iter().collect();
                // count descending, then word ascending (BTreeMap order is kept by the stable sort)
                v.sort_by_key(|&(_, n)| core::cmp::Reverse(n));
                (p, v.into_iter().map(|(w, _)| w).collect())
            })
            .collect();
        Self { followers, k }
    }
}

impl ReplacementProvider for BigramContextual {
    fn name(&self) -> &str {
        "contextual"
    }

    fn candidates(&self, word: &str, context: &[String], position: usize) -> Result<Vec<String>, ProviderError> {
        let prev = if position == 0 {
            START
        } else {
            context.get(position - 1).map_or(START, String::as_str)
        };
        Ok(self
            .followers
            .get(prev)
            .map(|v| v.iter().filter(|w| *w != word).take(self.k).cloned().collect())
            .unwrap_or_default())
    }
}
