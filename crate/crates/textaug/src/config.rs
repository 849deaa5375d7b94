//! TOML experiment configuration. Relative paths are resolved against the
//! directory of the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use textaug_core::corpus::DEFAULT_SPLIT_RATIO;
use textaug_core::eda::{EdaConfig, EdaStrategy};
use textaug_core::grid::{AugPct, GridSpec, Group, PAPER_AUG_PCTS_BP, PAPER_ROUNDS, PAPER_SUBSET_SIZES};
use textaug_core::svm::{GammaMode, SvmConfig};

use crate::dataset::ColumnMap;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    pub path: PathBuf,
    #[serde(default = "default_text_column")]
    pub text_column: String,
    #[serde(default = "default_label_column")]
    pub label_column: String,
}

fn default_text_column() -> String {
    "text".into()
}

fn default_label_column() -> String {
    "label".into()
}

impl DatasetEntry {
    pub fn columns(&self) -> ColumnMap {
        ColumnMap {
            text: self.text_column.clone(),
            label: self.label_column.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceConfig {
    pub ppdb: Option<PathBuf>,
    #[serde(default)]
    pub ppdb_symmetrize: bool,
    pub embeddings: PathBuf,
    /// Free-form provenance label, e.g. which paraphrase pack was used.
    #[serde(default)]
    pub resource_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdaSection {
    pub alpha: f64,
    pub n_aug: usize,
    /// `sample_one` or `each_op`.
    pub strategy: String,
}

impl Default for EdaSection {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            n_aug: 1,
            strategy: "sample_one".into(),
        }
    }
}

impl EdaSection {
    pub fn to_config(&self) -> Result<EdaConfig> {
        let strategy = match self.strategy.as_str() {
            "sample_one" => EdaStrategy::SampleOne,
            "each_op" => EdaStrategy::EachOp,
            other => return Err(Error::Config(format!("unknown eda strategy {other:?}"))),
        };
        let cfg = EdaConfig {
            alpha: self.alpha,
            n_aug: self.n_aug,
            strategy,
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynSection {
    pub rate: f64,
    /// Ordered subset of `ppdb`, `embedding`, `contextual`.
    pub stages: Vec<String>,
    pub embedding_k: usize,
    /// `bigram` (offline stand-in built from the dataset) or an HTTP URL.
    pub contextual: String,
    pub contextual_k: usize,
    pub token_env: String,
    pub timeout_secs: f64,
}

impl Default for SynSection {
    fn default() -> Self {
        Self {
            rate: 0.1,
            stages: vec!["ppdb".into(), "embedding".into(), "contextual".into()],
            embedding_k: 5,
            contextual: "bigram".into(),
            contextual_k: 5,
            token_env: "TEXTAUG_CONTEXTUAL_TOKEN".into(),
            timeout_secs: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BtSection {
    /// `identity`, `dict:<path>` or `http`.
    pub provider: String,
    pub endpoint: Option<String>,
    pub token_env: String,
    pub source_lang: String,
    pub pivot: String,
    pub cache: Option<PathBuf>,
    pub max_retries: u32,
    pub backoff_ms: u64,
    /// 0 means unlimited.
    pub max_in_flight: usize,
    /// 0 means unlimited.
    pub requests_per_second: f64,
    pub timeout_secs: f64,
}

impl Default for BtSection {
    fn default() -> Self {
        Self {
            provider: "identity".into(),
            endpoint: None,
            token_env: "TEXTAUG_TRANSLATE_TOKEN".into(),
            source_lang: "pt".into(),
            pivot: "en".into(),
            cache: None,
            max_retries: 3,
            backoff_ms: 200,
            max_in_flight: 8,
            requests_per_second: 0.0,
            timeout_secs: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSetting {
    Named(String),
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmSection {
    pub c: f64,
    pub gamma: GammaSetting,
    pub tolerance: f64,
    pub max_passes: usize,
    pub cache_mb: usize,
}

impl Default for SvmSection {
    fn default() -> Self {
        let d = SvmConfig::default();
        Self {
            c: d.c,
            gamma: GammaSetting::Named("scale".into()),
            tolerance: d.tolerance,
            max_passes: d.max_passes,
            cache_mb: d.cache_bytes >> 20,
        }
    }
}

impl SvmSection {
    pub fn to_config(&self) -> Result<SvmConfig> {
        let gamma = match &self.gamma {
            GammaSetting::Named(s) if s == "scale" => GammaMode::Scale,
            GammaSetting::Named(s) => return Err(Error::Config(format!("unknown gamma {s:?}"))),
            GammaSetting::Fixed(g) => GammaMode::Fixed(*g),
        };
        let cfg = SvmConfig {
            c: self.c,
            gamma,
            tolerance: self.tolerance,
            max_passes: self.max_passes,
            cache_bytes: self.cache_mb.max(1) << 20,
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }
}

fn default_groups() -> Vec<String> {
    Group::ALL.iter().map(|g| g.as_str().to_string()).collect()
}

fn default_sizes() -> Vec<usize> {
    PAPER_SUBSET_SIZES.to_vec()
}

fn default_pcts() -> Vec<f64> {
    PAPER_AUG_PCTS_BP.iter().map(|&bp| f64::from(bp) / 10_000.0).collect()
}

fn default_rounds() -> usize {
    PAPER_ROUNDS
}

fn default_split() -> f64 {
    DEFAULT_SPLIT_RATIO
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetEntry>,
    #[serde(default = "default_groups")]
    pub groups: Vec<String>,
    #[serde(default = "default_sizes")]
    pub subset_sizes: Vec<usize>,
    #[serde(default = "default_pcts")]
    pub aug_percentages: Vec<f64>,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    pub master_seed: u64,
    #[serde(default = "default_true")]
    pub share_subset_across_groups: bool,
    #[serde(default = "default_split")]
    pub split_ratio: f64,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub workers: usize,
    /// Failed augmentation targets tolerated before a cell is marked failed.
    #[serde(default)]
    pub max_failed_targets: usize,
    #[serde(default = "default_true")]
    pub write_predictions: bool,
    pub resources: ResourceConfig,
    #[serde(default)]
    pub eda: EdaSection,
    #[serde(default)]
    pub syn: SynSection,
    #[serde(default)]
    pub bt: BtSection,
    #[serde(default)]
    pub svm: SvmSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve_paths(base_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for d in &mut self.datasets {
            fix(&mut d.path);
        }
        if let Some(p) = &mut self.resources.ppdb {
            fix(p);
        }
        fix(&mut self.resources.embeddings);
        if let Some(p) = &mut self.bt.cache {
            fix(p);
        }
        if let Some(rest) = self.bt.provider.strip_prefix("dict:") {
            let mut p = PathBuf::from(rest);
            fix(&mut p);
            self.bt.provider = format!("dict:{}", p.display());
        }
    }

    pub fn groups(&self) -> Result<Vec<Group>> {
        self.groups.iter().map(|g| g.parse::<Group>().map_err(Error::from)).collect()
    }

    pub fn aug_pcts(&self) -> Result<Vec<AugPct>> {
        self.aug_percentages.iter().map(|&p| AugPct::from_fraction(p).map_err(Error::from)).collect()
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        let spec = GridSpec {
            datasets: self.datasets.iter().map(|d| d.name.clone()).collect(),
            groups: self.groups()?,
            subset_sizes: self.subset_sizes.clone(),
            aug_pcts: self.aug_pcts()?,
            rounds: self.rounds,
            master_seed: self.master_seed,
            share_subset_across_groups: self.share_subset_across_groups,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid_spec()?;
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config(format!("split_ratio {} outside (0, 1)", self.split_ratio)));
        }
        self.eda.to_config()?;
        self.svm.to_config()?;
        if !(self.syn.rate > 0.0 && self.syn.rate <= 1.0) {
            return Err(Error::Config("syn.rate must lie in (0, 1]".into()));
        }
        if self.syn.stages.is_empty() {
            return Err(Error::Config("syn.stages is empty".into()));
        }
        for s in &self.syn.stages {
            match s.as_str() {
                "ppdb" if self.resources.ppdb.is_none() => {
                    return Err(Error::Config("syn stage ppdb needs resources.ppdb".into()))
                }
                "ppdb" | "embedding" | "contextual" => {}
                other => return Err(Error::Config(format!("unknown syn stage {other:?}"))),
            }
        }
        let p = &self.bt.provider;
        if !(p == "identity" || p == "http" || p.starts_with("dict:")) {
            return Err(Error::Config(format!("unknown bt provider {p:?}")));
        }
        if p == "http" && self.bt.endpoint.is_none() {
            return Err(Error::Config("bt provider http needs bt.endpoint".into()));
        }
        Ok(())
    }
}
