//! Experiment grid execution.
//!
//! Cells are grouped into blocks (dataset, group, N, round). A block draws
//! one subset and split, trains its `p = 0` baseline once and pairs every
//! augmented cell with that baseline's predictions on the identical test
//! split. Blocks run in parallel; results come back in plan order.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use textaug_core::augment::{augment_training_set, Augmenter, AugmentedSet, EdaAugmenter, Origin, SynAugmenter};
use textaug_core::corpus::{resample_subset, select_augmentation_targets, split, Dataset, SplitPair};
use textaug_core::eda::EdaConfig;
use textaug_core::features::{featurize, FeatureMatrix};
use textaug_core::grid::{plan_grid, BlockKey, ExperimentResult, GridCell, GridCoord, Group, Status};
use textaug_core::lexicon::{EmbeddingStore, SynonymMap};
use textaug_core::metrics::evaluate;
use textaug_core::replace::{EmbeddingNeighbors, ReplacementProvider};
use textaug_core::rng::derive;
use textaug_core::stats::{contingency, mcnemar, GainRecord};
use textaug_core::svm::{svm_predict, svm_train, SvmConfig};
use textaug_core::text::tokenize;

use crate::config::ExperimentConfig;
use crate::contextual::{BigramContextual, HttpContextual};
use crate::dataset::load_dataset;
use crate::error::{Error, Result};
use crate::predictions::write_predictions;
use crate::resources::{load_embeddings, load_ppdb};
use crate::translate::{
    BtAugmenter, DictTranslator, HttpTranslator, IdentityTranslator, RateLimited, RateLimiter, RetryPolicy,
    TranslationCache, TranslationProvider,
};

/// How the contextual Syn stage is served.
#[derive(Clone)]
pub enum ContextualSource {
    /// Bigram stand-in fitted on each cell's training split.
    Bigram { k: usize },
    Remote(Arc<dyn ReplacementProvider>),
}

/// Loaded inputs shared read-only by every worker.
pub struct Resources {
    pub datasets: BTreeMap<String, Dataset>,
    pub synonyms: Arc<SynonymMap>,
    pub embeddings: Arc<EmbeddingStore>,
    pub translator: Arc<dyn TranslationProvider>,
    pub cache: Arc<TranslationCache>,
    pub contextual: ContextualSource,
}

impl Resources {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        let mut datasets = BTreeMap::new();
        for d in &cfg.datasets {
            let report = load_dataset(&d.path, &d.name, &d.columns())?;
            datasets.insert(d.name.clone(), report.dataset);
        }
        let synonyms = match &cfg.resources.ppdb {
            Some(p) => load_ppdb(p, cfg.resources.ppdb_symmetrize)?.0,
            None => SynonymMap::new(),
        };
        let embeddings = load_embeddings(&cfg.resources.embeddings)?.0;
        let cache = match &cfg.bt.cache {
            Some(p) => TranslationCache::open(p)?,
            None => TranslationCache::in_memory(),
        };
        let contextual = if cfg.syn.contextual == "bigram" {
            ContextualSource::Bigram { k: cfg.syn.contextual_k }
        } else {
            let timeout = Duration::from_secs_f64(cfg.syn.timeout_secs);
            ContextualSource::Remote(Arc::new(HttpContextual::from_env(&cfg.syn.contextual, &cfg.syn.token_env, timeout)))
        };
        Ok(Self {
            datasets,
            synonyms: Arc::new(synonyms),
            embeddings: Arc::new(embeddings),
            translator: translator_from_config(cfg)?,
            cache: Arc::new(cache),
            contextual,
        })
    }
}

/// Builds the BT provider named by `bt.provider`, behind the configured
/// rate caps.
pub fn translator_from_config(cfg: &ExperimentConfig) -> Result<Arc<dyn TranslationProvider>> {
    let bt = &cfg.bt;
    let limiter = RateLimiter::new(bt.max_in_flight, bt.requests_per_second);
    let p: Arc<dyn TranslationProvider> = if bt.provider == "identity" {
        Arc::new(RateLimited::new(IdentityTranslator, limiter))
    } else if let Some(path) = bt.provider.strip_prefix("dict:") {
        let path = Path::new(path);
        let name = format!("dict:{}", path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default());
        Arc::new(RateLimited::new(DictTranslator::from_file(&name, &bt.source_lang, path)?, limiter))
    } else if bt.provider == "http" {
        let endpoint = bt.endpoint.as_deref().ok_or_else(|| Error::Config("bt.endpoint missing".into()))?;
        let timeout = Duration::from_secs_f64(bt.timeout_secs);
        Arc::new(RateLimited::new(HttpTranslator::from_env("http", endpoint, &bt.token_env, timeout), limiter))
    } else {
        return Err(Error::Config(format!("unknown bt provider {:?}", bt.provider)));
    };
    Ok(p)
}

/// Per-run knobs that are not grid axes.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub split_ratio: f64,
    pub eda: EdaConfig,
    pub svm: SvmConfig,
    pub syn_rate: f64,
    pub syn_stages: Vec<String>,
    pub embedding_k: usize,
    pub source_lang: String,
    pub pivot: String,
    pub retry: RetryPolicy,
    pub max_failed_targets: usize,
    pub workers: usize,
    /// Where per-model prediction files go; `None` skips them.
    pub predictions_dir: Option<PathBuf>,
}

impl RunSettings {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            split_ratio: cfg.split_ratio,
            eda: cfg.eda.to_config()?,
            svm: cfg.svm.to_config()?,
            syn_rate: cfg.syn.rate,
            syn_stages: cfg.syn.stages.clone(),
            embedding_k: cfg.syn.embedding_k,
            source_lang: cfg.bt.source_lang.clone(),
            pivot: cfg.bt.pivot.clone(),
            retry: RetryPolicy {
                max_retries: cfg.bt.max_retries,
                base_delay: Duration::from_millis(cfg.bt.backoff_ms),
            },
            max_failed_targets: cfg.max_failed_targets,
            workers: cfg.workers,
            predictions_dir: None,
        })
    }
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellLog {
    pub dataset: String,
    pub group: String,
    pub subset_size: usize,
    pub aug_pct: String,
    pub round: usize,
    pub status: String,
    pub train_size: usize,
    pub test_size: usize,
    pub targets: usize,
    pub generated: usize,
    pub augmented_train_size: usize,
    pub failed_targets: usize,
    pub degenerate: usize,
    pub purity_violations: usize,
    pub elapsed_ms: u64,
    pub error: Option<String>,
}

impl CellLog {
    fn new(coord: &GridCoord) -> Self {
        Self {
            dataset: coord.dataset.clone(),
            group: coord.group.to_string(),
            subset_size: coord.subset_size,
            aug_pct: coord.aug_pct.to_string(),
            round: coord.round,
            status: Status::Ok.as_str().into(),
            train_size: 0,
            test_size: 0,
            targets: 0,
            generated: 0,
            augmented_train_size: 0,
            failed_targets: 0,
            degenerate: 0,
            purity_violations: 0,
            elapsed_ms: 0,
            error: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub result: ExperimentResult,
    pub log: CellLog,
}

#[derive(Debug, Clone)]
pub struct GridRun {
    /// In plan order, one per planned cell.
    pub results: Vec<ExperimentResult>,
    pub logs: Vec<CellLog>,
}

impl GridRun {
    pub fn purity_violations(&self) -> usize {
        self.logs.iter().map(|l| l.purity_violations).sum()
    }
}

/// Rows of the augmented training set that could reach evaluation data:
/// generated rows whose source is not a training row of the split.
pub fn purity_violations(split: &SplitPair, augmented: &AugmentedSet) -> usize {
    let mut test_rows: Vec<usize> = split.test_indices.clone();
    test_rows.sort_unstable();
    let overlap = split.train_indices.iter().filter(|i| test_rows.binary_search(i).is_ok()).count();
    let bad_sources = augmented
        .origins
        .iter()
        .filter(|o| match o {
            Origin::Generated { source } | Origin::Original(source) => split
                .train_indices
                .get(*source)
                .is_none_or(|subset_row| test_rows.binary_search(subset_row).is_ok()),
        })
        .count();
    let test_changed = usize::from(split.test.len() != split.test_indices.len());
    overlap + bad_sources + test_changed
}

fn predictions_path(dir: &Path, c: &GridCoord) -> PathBuf {
    dir.join(&c.dataset)
        .join(c.group.as_str())
        .join(format!("n{}_p{}_r{}.jsonl", c.subset_size, c.aug_pct, c.round))
}

struct Trained {
    f1: f64,
    predictions: Vec<String>,
}

fn train_and_eval(train_x: &FeatureMatrix, train_y: &[String], test_x: &FeatureMatrix, test_y: &[String], svm: &SvmConfig) -> std::result::Result<Trained, String> {
    let model = svm_train(train_x, train_y, svm).map_err(|e| e.to_string())?;
    let pred = svm_predict(&model, test_x).map_err(|e| e.to_string())?;
    let report = evaluate(test_y, &pred).map_err(|e| e.to_string())?;
    Ok(Trained {
        f1: report.weighted_f1,
        predictions: report.predictions,
    })
}

/// The augmenter of `group`, with the contextual stage (if any) fitted on
/// `train`.
pub fn augmenter(group: Group, train: &Dataset, res: &Resources, s: &RunSettings) -> Box<dyn Augmenter> {
    augmenter_for(group, train, res, s).into_augmenter()
}

fn augmenter_for(group: Group, train: &Dataset, res: &Resources, s: &RunSettings) -> Box<dyn AugmenterWithStats> {
    match group {
        Group::Eda => Box::new(EdaAugmenter {
            config: s.eda,
            synonyms: res.synonyms.clone(),
        }),
        Group::Syn => {
            let providers = s
                .syn_stages
                .iter()
                .map(|stage| -> Arc<dyn ReplacementProvider> {
                    match stage.as_str() {
                        "ppdb" => res.synonyms.clone(),
                        "embedding" => Arc::new(EmbeddingNeighbors {
                            store: res.embeddings.clone(),
                            k: s.embedding_k,
                        }),
                        _ => match &res.contextual {
                            ContextualSource::Bigram { k } => Arc::new(BigramContextual::from_sentences(train.texts(), *k)),
                            ContextualSource::Remote(p) => p.clone(),
                        },
                    }
                })
                .collect();
            Box::new(SynAugmenter {
                providers,
                rate: s.syn_rate,
            })
        }
        Group::Bt => Box::new(BtAugmenter::new(
            res.translator.clone(),
            res.cache.clone(),
            &s.source_lang,
            &s.pivot,
            s.retry,
        )),
    }
}

trait AugmenterWithStats: Augmenter {
    fn degenerate(&self) -> usize {
        0
    }

    fn as_augmenter(&self) -> &dyn Augmenter;

    fn into_augmenter(self: Box<Self>) -> Box<dyn Augmenter>;
}

impl AugmenterWithStats for EdaAugmenter {
    fn into_augmenter(self: Box<Self>) -> Box<dyn Augmenter> {
        self
    }

    fn as_augmenter(&self) -> &dyn Augmenter {
        self
    }
}

impl AugmenterWithStats for SynAugmenter {
    fn into_augmenter(self: Box<Self>) -> Box<dyn Augmenter> {
        self
    }

    fn as_augmenter(&self) -> &dyn Augmenter {
        self
    }
}

impl AugmenterWithStats for BtAugmenter {
    fn into_augmenter(self: Box<Self>) -> Box<dyn Augmenter> {
        self
    }

    fn degenerate(&self) -> usize {
        self.degenerate_count()
    }

    fn as_augmenter(&self) -> &dyn Augmenter {
        self
    }
}

/// Appends sentence vectors for the generated rows to the originals' matrix.
fn extend_features(base: &FeatureMatrix, augmented: &Dataset, from: usize, store: &EmbeddingStore) -> FeatureMatrix {
    let mut m = base.clone();
    for e in &augmented.examples()[from..] {
        m.push_row(&textaug_core::features::sentence_vector(&tokenize(e.text()), store))
            .expect("sentence vectors have store dim");
    }
    m
}

fn fail_all(cells: &[GridCell], status: Status, message: &str) -> Vec<CellOutcome> {
    cells
        .iter()
        .map(|c| {
            let mut log = CellLog::new(&c.coord);
            log.status = status.as_str().into();
            log.error = Some(message.to_string());
            CellOutcome {
                result: ExperimentResult::new(c.coord.clone(), status),
                log,
            }
        })
        .collect()
}

/// Runs the requested cells of one block. The block's baseline is always
/// trained, and reported only when it is among `cells`.
pub fn run_block(cells: &[GridCell], res: &Resources, s: &RunSettings) -> Vec<CellOutcome> {
    let Some(first) = cells.first() else {
        return Vec::new();
    };
    let block_start = Instant::now();
    let coord0 = &first.coord;
    let Some(dataset) = res.datasets.get(&coord0.dataset) else {
        return fail_all(cells, Status::TrainFailed, &format!("dataset {:?} not loaded", coord0.dataset));
    };
    let data_seed = first.seeds.data;
    let prepared = resample_subset(dataset, coord0.subset_size, derive(data_seed, 0))
        .and_then(|subset| split(&subset, s.split_ratio, derive(data_seed, 1)));
    let sp = match prepared {
        Ok(sp) => sp,
        Err(e) => return fail_all(cells, Status::TrainFailed, &e.to_string()),
    };
    let train_y = sp.train.labels();
    let test_y = sp.test.labels();
    let train_x = featurize(&sp.train, &res.embeddings);
    let test_x = featurize(&sp.test, &res.embeddings);

    let baseline = train_and_eval(&train_x, &train_y, &test_x, &test_y, &s.svm);
    let baseline_ms = block_start.elapsed().as_millis() as u64;
    let mut out = Vec::new();
    for cell in cells {
        let coord = &cell.coord;
        let start = Instant::now();
        let mut log = CellLog::new(coord);
        log.train_size = sp.train.len();
        log.test_size = sp.test.len();
        log.augmented_train_size = sp.train.len();
        let mut result = ExperimentResult::new(coord.clone(), Status::Ok);

        if coord.aug_pct.is_zero() {
            match &baseline {
                Ok(t) => {
                    result.f1 = Some(t.f1);
                    if let Some(dir) = &s.predictions_dir {
                        if let Err(e) = write_predictions(&predictions_path(dir, coord), &test_y, &t.predictions) {
                            log.error = Some(e.to_string());
                        }
                    }
                }
                Err(e) => {
                    result.status = Status::TrainFailed;
                    log.error = Some(e.clone());
                }
            }
            log.status = result.status.as_str().into();
            log.elapsed_ms = baseline_ms;
            out.push(CellOutcome { result, log });
            continue;
        }

        let base = baseline.as_ref().ok();
        result.baseline_f1 = base.map(|b| b.f1);
        let outcome = (|| -> std::result::Result<(Status, Option<Trained>), String> {
            let targets = select_augmentation_targets(sp.train.len(), coord.aug_pct.fraction(), cell.seeds.targets)
                .map_err(|e| e.to_string())?;
            log.targets = targets.len();
            let aug = augmenter_for(coord.group, &sp.train, res, s);
            let augmented = augment_training_set(&sp.train, &targets, aug.as_augmenter(), cell.seeds.augment)
                .map_err(|e| e.to_string())?;
            log.generated = augmented.generated();
            log.failed_targets = augmented.failures.len();
            log.degenerate = aug.degenerate();
            log.augmented_train_size = augmented.dataset.len();
            log.purity_violations = purity_violations(&sp, &augmented);
            if let Some(f) = augmented.failures.first() {
                log.error = Some(format!("target {}: {}", f.target, f.error));
            }
            if augmented.failures.len() > s.max_failed_targets {
                return Ok((Status::AugFailed, None));
            }
            let x = extend_features(&train_x, &augmented.dataset, sp.train.len(), &res.embeddings);
            let y = augmented.dataset.labels();
            match train_and_eval(&x, &y, &test_x, &test_y, &s.svm) {
                Ok(t) => Ok((Status::Ok, Some(t))),
                Err(e) => {
                    log.error = Some(e);
                    Ok((Status::TrainFailed, None))
                }
            }
        })();

        match outcome {
            Ok((status, trained)) => {
                result.status = status;
                if let Some(t) = trained {
                    result.f1 = Some(t.f1);
                    if let Some(b) = base {
                        let gain = GainRecord::new(coord.clone(), b.f1, t.f1).gain;
                        result.gain = Some(gain);
                        if gain > 0.0 {
                            if let Ok(table) = contingency(&test_y, &b.predictions, &t.predictions) {
                                let test = mcnemar(&table);
                                result.b = Some(table.b);
                                result.c = Some(table.c);
                                result.chi2 = Some(test.chi2);
                                result.p_value = Some(test.p_value);
                            }
                        }
                    }
                    if let Some(dir) = &s.predictions_dir {
                        if let Err(e) = write_predictions(&predictions_path(dir, coord), &test_y, &t.predictions) {
                            log.error = Some(e.to_string());
                        }
                    }
                }
            }
            Err(e) => {
                result.status = Status::AugFailed;
                log.error = Some(e);
            }
        }
        log.status = result.status.as_str().into();
        log.elapsed_ms = start.elapsed().as_millis() as u64;
        out.push(CellOutcome { result, log });
    }
    out
}

/// Runs `cell` with its block's baseline for pairing.
pub fn run_cell(cell: &GridCell, res: &Resources, s: &RunSettings) -> CellOutcome {
    run_block(std::slice::from_ref(cell), res, s).remove(0)
}

/// Groups `cells` by block, keeping plan positions.
fn blocks(cells: &[GridCell]) -> Vec<(BlockKey, Vec<(usize, GridCell)>)> {
    let mut order: Vec<BlockKey> = Vec::new();
    let mut map: HashMap<BlockKey, Vec<(usize, GridCell)>> = HashMap::new();
    for (i, c) in cells.iter().enumerate() {
        let key = c.coord.block();
        map.entry(key.clone())
            .or_insert_with(|| {
                order.push(key.clone());
                Vec::new()
            })
            .push((i, c.clone()));
    }
    order
        .into_iter()
        .map(|k| {
            let mut v = map.remove(&k).expect("key recorded");
            // baseline first so its predictions exist before pairing
            v.sort_by_key(|(i, c)| (!c.coord.aug_pct.is_zero(), *i));
            (k, v)
        })
        .collect()
}

/// Runs the given cells on a worker pool and returns them in input order.
pub fn run_cells(cells: &[GridCell], res: &Resources, s: &RunSettings) -> Result<GridRun> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(s.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let grouped = blocks(cells);
    let done: Vec<Vec<(usize, CellOutcome)>> = pool.install(|| {
        grouped
            .par_iter()
            .map(|(_, members)| {
                let block_cells: Vec<GridCell> = members.iter().map(|(_, c)| c.clone()).collect();
                let outcomes = run_block(&block_cells, res, s);
                members.iter().map(|(i, _)| *i).zip(outcomes).collect()
            })
            .collect()
    });
    let mut flat: Vec<(usize, CellOutcome)> = done.into_iter().flatten().collect();
    flat.sort_by_key(|(i, _)| *i);
    let (results, logs) = flat.into_iter().map(|(_, o)| (o.result, o.log)).unzip();
    Ok(GridRun { results, logs })
}

pub fn run_grid(cfg: &ExperimentConfig, res: &Resources, s: &RunSettings) -> Result<GridRun> {
    let cells = plan_grid(&cfg.grid_spec()?)?;
    run_cells(&cells, res, s)
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const RESULT_COLUMNS: [&str; 13] = [
    "dataset",
    "group",
    "subset_size",
    "aug_pct",
    "round",
    "status",
    "f1",
    "baseline_f1",
    "gain",
    "b",
    "c",
    "chi2",
    "p_value",
];

pub fn results_csv(results: &[ExperimentResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let map = |e: csv::Error| Error::Data(e.to_string());
    w.write_record(RESULT_COLUMNS).map_err(map)?;
    for r in results {
        let c = &r.coord;
        w.write_record([
            c.dataset.clone(),
            c.group.to_string(),
            c.subset_size.to_string(),
            c.aug_pct.to_string(),
            c.round.to_string(),
            r.status.as_str().to_string(),
            opt(r.f1),
            opt(r.baseline_f1),
            opt(r.gain),
            opt(r.b),
            opt(r.c),
            opt(r.chi2),
            opt(r.p_value),
        ])
        .map_err(map)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Data(e.to_string()))
}

pub fn parse_results_csv(text: &str, path: &Path) -> Result<Vec<ExperimentResult>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::format(path, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != RESULT_COLUMNS {
        return Err(Error::format(path, format!("expected columns {}", RESULT_COLUMNS.join(","))));
    }
    let mut out = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let line = n + 2;
        let rec = rec.map_err(|e| Error::format(path, e.to_string()))?;
        let bad = |what: &str| Error::format(path, format!("line {line}: bad {what}"));
        fn num<T: std::str::FromStr>(s: &str) -> std::result::Result<Option<T>, ()> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| ())
            }
        }
        let coord = GridCoord {
            dataset: rec[0].to_string(),
            group: rec[1].parse().map_err(|_| bad("group"))?,
            subset_size: rec[2].parse().map_err(|_| bad("subset_size"))?,
            aug_pct: rec[3].parse().map_err(|_| bad("aug_pct"))?,
            round: rec[4].parse().map_err(|_| bad("round"))?,
        };
        let status = match &rec[5] {
            "ok" => Status::Ok,
            "aug_failed" => Status::AugFailed,
            "train_failed" => Status::TrainFailed,
            _ => return Err(bad("status")),
        };
        let mut r = ExperimentResult::new(coord, status);
        r.f1 = num(&rec[6]).map_err(|_| bad("f1"))?;
        r.baseline_f1 = num(&rec[7]).map_err(|_| bad("baseline_f1"))?;
        r.gain = num(&rec[8]).map_err(|_| bad("gain"))?;
        r.b = num(&rec[9]).map_err(|_| bad("b"))?;
        r.c = num(&rec[10]).map_err(|_| bad("c"))?;
        r.chi2 = num(&rec[11]).map_err(|_| bad("chi2"))?;
        r.p_value = num(&rec[12]).map_err(|_| bad("p_value"))?;
        r.check().map_err(|m| Error::format(path, format!("line {line}: {m}")))?;
        out.push(r);
    }
    Ok(out)
}

pub fn run_log_jsonl(logs: &[CellLog]) -> String {
    logs.iter()
        .map(|l| serde_json::to_string(l).expect("log rows serialize") + "\n")
        .collect()
}

/// Writes `results.csv` and `run_log.jsonl` into `out`.
pub fn write_outputs(out: &Path, run: &GridRun) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let results = out.join("results.csv");
    std::fs::write(&results, results_csv(&run.results)?).map_err(|e| Error::io(&results, e))?;
    let log = out.join("run_log.jsonl");
    std::fs::write(&log, run_log_jsonl(&run.logs)).map_err(|e| Error::io(&log, e))
}
