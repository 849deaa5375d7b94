use std::path::Path;
use std::sync::Arc;

use textaug::config::ExperimentConfig;
use textaug::runner::{results_csv, run_grid, Resources, RunSettings};
use textaug::translate::{CountingTranslator, TranslateError, TranslationProvider};
use textaug_core::grid::Status;

fn config(extra: &str) -> ExperimentConfig {
    let text = format!(
        r#"master_seed = 5
{extra}

[[datasets]]
name = "reviews_sentiment"
path = "corpus.csv"
label_column = "sentiment"

[resources]
ppdb = "ppdb.txt"
embeddings = "embeddings.vec"

[bt]
provider = "dict:bt_dict.tsv"
"#
    );
    ExperimentConfig::from_toml(&text, &Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")).unwrap()
}

const N500: &str = r#"subset_sizes = [500]
aug_percentages = [0.0, 0.2]
rounds = 1"#;

#[test]
fn count_laws_hold_in_every_group() {
    let cfg = config(N500);
    let res = Resources::load(&cfg).unwrap();
    let run = run_grid(&cfg, &res, &RunSettings::from_config(&cfg).unwrap()).unwrap();
    assert_eq!(run.results.len(), 6);
    for log in &run.logs {
        assert_eq!((log.train_size, log.test_size), (375, 125), "{log:?}");
        assert_eq!(log.status, "ok");
        assert_eq!(log.purity_violations, 0);
        if log.aug_pct == "0" {
            assert_eq!((log.targets, log.augmented_train_size), (0, 375));
        } else {
            assert_eq!((log.targets, log.generated, log.augmented_train_size), (75, 75, 450), "{log:?}");
        }
        if log.group == "BT" && log.aug_pct != "0" {
            // the dictionary round trip is exact
            assert_eq!(log.degenerate, 75);
        }
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let mut cfg = config(r#"groups = ["EDA", "Syn"]
subset_sizes = [200, 300]
aug_percentages = [0.0, 0.1]
rounds = 2"#);
    let res = Resources::load(&cfg).unwrap();
    cfg.workers = 1;
    let serial = results_csv(&run_grid(&cfg, &res, &RunSettings::from_config(&cfg).unwrap()).unwrap().results).unwrap();
    cfg.workers = 4;
    let parallel = results_csv(&run_grid(&cfg, &res, &RunSettings::from_config(&cfg).unwrap()).unwrap().results).unwrap();
    assert_eq!(serial, parallel);
}

#[test]
fn repeated_bt_run_is_served_from_cache() {
    let cfg = config(r#"groups = ["BT"]
subset_sizes = [200]
aug_percentages = [0.0, 0.2]
rounds = 2"#);
    let mut res = Resources::load(&cfg).unwrap();
    let counter = Arc::new(CountingTranslator::new(Arc::clone(&res.translator)));
    res.translator = counter.clone();
    let settings = RunSettings::from_config(&cfg).unwrap();
    let first = run_grid(&cfg, &res, &settings).unwrap();
    let issued = counter.requests();
    assert!(issued > 0);
    let second = run_grid(&cfg, &res, &settings).unwrap();
    assert_eq!(counter.requests(), issued);
    assert_eq!(results_csv(&first.results).unwrap(), results_csv(&second.results).unwrap());
}

struct Broken;

impl TranslationProvider for Broken {
    fn name(&self) -> &str {
        "broken"
    }

    fn translate(&self, _: &str, _: &str, _: &str) -> Result<String, TranslateError> {
        Err(TranslateError::Rejected("quota exceeded".into()))
    }
}

#[test]
fn failing_translator_marks_only_bt_cells() {
    let cfg = config(r#"subset_sizes = [200]
aug_percentages = [0.0, 0.2]
rounds = 1"#);
    let mut res = Resources::load(&cfg).unwrap();
    res.translator = Arc::new(Broken);
    let run = run_grid(&cfg, &res, &RunSettings::from_config(&cfg).unwrap()).unwrap();
    for (r, log) in run.results.iter().zip(&run.logs) {
        let expect = if r.coord.group.as_str() == "BT" && !r.coord.aug_pct.is_zero() {
            Status::AugFailed
        } else {
            Status::Ok
        };
        assert_eq!(r.status, expect, "{}", r.coord);
        if expect == Status::AugFailed {
            assert_eq!(log.failed_targets, 30);
            assert!(log.error.as_deref().unwrap().contains("quota exceeded"));
            assert!(r.f1.is_none() && r.gain.is_none());
        }
    }
}

#[test]
fn tolerated_failures_still_train() {
    let mut cfg = config(r#"groups = ["BT"]
subset_sizes = [200]
aug_percentages = [0.0, 0.2]
rounds = 1"#);
    cfg.max_failed_targets = 1000;
    let mut res = Resources::load(&cfg).unwrap();
    res.translator = Arc::new(Broken);
    let run = run_grid(&cfg, &res, &RunSettings::from_config(&cfg).unwrap()).unwrap();
    assert!(run.results.iter().all(|r| r.status == Status::Ok));
    assert_eq!(run.logs[1].augmented_train_size, 150);
    assert_eq!(run.results[1].gain, Some(0.0));
}
