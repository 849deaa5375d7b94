//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeSet;
use std::panic::AssertUnwindSafe;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use textaug::config::ExperimentConfig;
use textaug::dataset::{load_dataset, ColumnMap};
use textaug::predictions::read_predictions;
use textaug::runner::{augmenter, parse_results_csv, run_grid, write_outputs, Resources, RunSettings};
use textaug::translate::{back_translate, CountingTranslator, DictTranslator, RetryPolicy, TranslationCache, TranslationProvider};
use textaug_core::augment::augment_training_set;
use textaug_core::corpus::{resample_subset, select_augmentation_targets, split, Dataset};
use textaug_core::eda::{intensity, random_deletion, random_swap, synonym_replacement};
use textaug_core::features::FeatureMatrix;
use textaug_core::grid::{plan_grid, AugPct, ExperimentResult, GridSpec, Group, Status};
use textaug_core::kernel::gamma_scale;
use textaug_core::lexicon::SynonymMap;
use textaug_core::metrics::evaluate;
use textaug_core::rng::derive;
use textaug_core::stats::{filter_best, mcnemar, ContingencyTable};
use textaug_core::summary::summarize;
use textaug_core::svm::{svm_predict, svm_train, SvmConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn strings(s: &[&str]) -> Vec<String> {
    s.iter().map(|x| x.to_string()).collect()
}

/// erfc by its Maclaurin-derived positive series below 2 and a continued
/// fraction above.
fn erfc_oracle(z: f64) -> f64 {
    if z < 2.0 {
        let mut term = z;
        let mut sum = z;
        let mut n = 0.0;
        while term > sum * 1e-18 {
            n += 1.0;
            term *= 2.0 * z * z / (2.0 * n + 1.0);
            sum += term;
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * (-z * z).exp() * sum
    } else {
        let mut frac = z;
        for k in (1..200).rev() {
            frac = z + (k as f64 / 2.0) / frac;
        }
        (-z * z).exp() / std::f64::consts::PI.sqrt() / frac
    }
}

fn mcnemar_oracle() -> Outcome {
    let start = Instant::now();
    let mut tables = 0;
    let mut worst: f64 = 0.0;
    for n in 0..=20u64 {
        for b in 0..=n {
            let c = n - b;
            tables += 1;
            let r = mcnemar(&ContingencyTable { a: 0, b, c, d: 0 });
            if n == 0 {
                ensure!(r.p_value == 1.0, "empty table gave p = {}", r.p_value);
                continue;
            }
            let d = (b.abs_diff(c) as f64 - 1.0).max(0.0);
            let chi2 = d * d / n as f64;
            ensure!((r.chi2 - chi2).abs() <= 1e-12 * chi2.max(1.0), "chi2 at b={b} c={c}: {} vs {chi2}", r.chi2);
            let p = erfc_oracle((chi2 / 2.0).sqrt());
            let rel = if r.p_value == p { 0.0 } else { (r.p_value - p).abs() / p };
            ensure!(rel < 1e-9, "p at b={b} c={c}: {} vs oracle {p}", r.p_value);
            worst = worst.max(rel);
        }
    }
    ensure!(tables == 231, "{tables} tables enumerated");
    let p = mcnemar(&ContingencyTable { a: 0, b: 10, c: 2, d: 0 }).p_value;
    ensure!((p - 0.0433).abs() < 5e-5, "b=10 c=2 gave p = {p}");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("231 tables, max rel err {worst:.1e}, b=10 c=2 -> p={p:.6}, {elapsed:?}"))
}

fn brute_weighted_f1(y_true: &[String], y_pred: &[String]) -> f64 {
    let mut classes: Vec<&String> = y_true.iter().chain(y_pred).collect();
    classes.sort();
    classes.dedup();
    let mut acc = 0.0;
    for c in classes {
        let tp = y_true.iter().zip(y_pred).filter(|(t, p)| *t == c && *p == c).count();
        let fp = y_true.iter().zip(y_pred).filter(|(t, p)| *t != c && *p == c).count();
        let fneg = y_true.iter().zip(y_pred).filter(|(t, p)| *t == c && *p != c).count();
        let support = y_true.iter().filter(|t| *t == c).count();
        let f1 = if 2 * tp + fp + fneg == 0 { 0.0 } else { (2 * tp) as f64 / (2 * tp + fp + fneg) as f64 };
        acc += support as f64 / y_true.len() as f64 * f1;
    }
    acc
}

fn weighted_f1_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let names = ["A", "B", "C", "D", "E"];
    for i in 0..1000 {
        let k = rng.gen_range(1..=5);
        let n = rng.gen_range(1..=50);
        let y_true: Vec<String> = (0..n).map(|_| names[rng.gen_range(0..k)].to_string()).collect();
        let y_pred: Vec<String> = (0..n).map(|_| names[rng.gen_range(0..k)].to_string()).collect();
        let got = evaluate(&y_true, &y_pred).map_err(|e| e.to_string())?.weighted_f1;
        let want = brute_weighted_f1(&y_true, &y_pred);
        ensure!(got == want, "instance {i}: {got} vs {want}");
    }
    let hand = evaluate(&strings(&["A", "A", "B"]), &strings(&["A", "B", "B"])).map_err(|e| e.to_string())?.weighted_f1;
    ensure!((hand - 2.0 / 3.0).abs() < 1e-15, "hand case gave {hand}");
    Ok(format!("1000 random instances exact, [A,A,B]/[A,B,B] -> {hand}"))
}

fn svm_sanity() -> Outcome {
    let start = Instant::now();
    let cfg = SvmConfig::default();
    ensure!(cfg.c == 10.0, "default C is {}", cfg.c);
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (label, centre) in [("neg", -2.0), ("pos", 2.0)] {
        for _ in 0..20 {
            rows.push(vec![centre + rng.gen_range(-1.0..1.0), centre + rng.gen_range(-1.0..1.0)]);
            y.push(label.to_string());
        }
    }
    let x = FeatureMatrix::from_rows(2, &rows).map_err(|e| e.to_string())?;
    let blobs = svm_train(&x, &y, &cfg).map_err(|e| e.to_string())?;
    let pred = svm_predict(&blobs, &x).map_err(|e| e.to_string())?;
    let acc = pred.iter().zip(&y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64;
    ensure!(acc >= 0.99, "blob accuracy {acc}");

    let xor_x = FeatureMatrix::from_rows(2, &[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]]).map_err(|e| e.to_string())?;
    let xor_y = strings(&["a", "a", "b", "b"]);
    let xor = svm_train(&xor_x, &xor_y, &cfg).map_err(|e| e.to_string())?;
    ensure!(svm_predict(&xor, &xor_x).map_err(|e| e.to_string())? == xor_y, "XOR not fitted");

    let mut max_coef: f64 = 0.0;
    for m in blobs.machines().iter().chain(xor.machines()) {
        for a in &m.dual_coef {
            max_coef = max_coef.max(a.abs());
        }
    }
    ensure!(max_coef <= cfg.c, "dual coefficient {max_coef} exceeds C");
    let g = gamma_scale(&FeatureMatrix::from_rows(2, &[vec![0.0, 0.0], vec![2.0, 2.0]]).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure!(g == 0.5, "gamma_scale gave {g}");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!("blobs acc {acc}, XOR acc 1, max |alpha| {max_coef:.3} <= 10, gamma_scale 0.5, {elapsed:?}"))
}

fn is_subsequence(small: &[String], big: &[String]) -> bool {
    let mut it = big.iter();
    small.iter().all(|s| it.any(|b| b == s))
}

fn eda_invariants() -> Outcome {
    let vocab = ["o", "produto", "é", "bom", "ruim", "chegou", "rápido", "muito", "livro", "mesa", "gostei", "não"];
    let mut synonyms = SynonymMap::new();
    for (a, b) in [("bom", "ótimo"), ("ruim", "péssimo"), ("rápido", "veloz"), ("gostei", "adorei"), ("livro", "volume")] {
        synonyms.insert(a, b);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cases = 2000;
    for i in 0..cases {
        let len = rng.gen_range(1..=30);
        let tokens: Vec<String> = (0..len).map(|_| vocab[rng.gen_range(0..vocab.len())].to_string()).collect();
        let n = intensity(0.1, len);
        let sr = synonym_replacement(&tokens, n, &synonyms, &mut rng);
        ensure!(sr.len() == len, "case {i}: synonym replacement changed length");
        let rs = random_swap(&tokens, n, &mut rng);
        ensure!(rs.len() == len, "case {i}: swap changed length");
        let (mut a, mut b) = (rs.clone(), tokens.clone());
        a.sort();
        b.sort();
        ensure!(a == b, "case {i}: swap changed the token multiset");
        for p in [0.1, 0.5, 1.0] {
            let rd = random_deletion(&tokens, p, &mut rng);
            ensure!(!rd.is_empty(), "case {i}: deletion at p={p} returned nothing");
            ensure!(is_subsequence(&rd, &tokens), "case {i}: deletion at p={p} produced foreign tokens");
        }
    }
    ensure!(intensity(0.1, 9) == 1, "intensity(0.1, 9) = {}", intensity(0.1, 9));
    ensure!(intensity(0.1, 25) == 2, "intensity(0.1, 25) = {}", intensity(0.1, 25));
    Ok(format!("{cases} random sentences, n(0.1, 9) = 1, n(0.1, 25) = 2"))
}

fn grid_accounting() -> Outcome {
    let spec = GridSpec::paper_defaults(strings(&["tweets", "b2w", "mercadolibre"]), 1);
    let cells = plan_grid(&spec).map_err(|e| e.to_string())?;
    ensure!(cells.len() == 2700, "{} cells", cells.len());
    let unique: BTreeSet<_> = cells.iter().map(|c| c.coord.clone()).collect();
    ensure!(unique.len() == 2700, "{} distinct coordinates", unique.len());
    let mut kept_per_round = Vec::new();
    for round in 1..=spec.rounds {
        let mut rows: Vec<ExperimentResult> = Vec::new();
        for (i, c) in cells.iter().filter(|c| c.coord.round == round).enumerate() {
            for attempt in 0..2 {
                let mut r = ExperimentResult::new(c.coord.clone(), Status::Ok);
                r.f1 = Some(0.5 + (i % 11) as f64 / 100.0 - attempt as f64 / 10.0);
                rows.push(r);
            }
        }
        let kept = filter_best(&rows);
        ensure!(kept.len() == 180, "round {round}: kept {}", kept.len());
        ensure!(kept.iter().all(|r| rows.iter().filter(|o| o.coord == r.coord).all(|o| o.f1 <= r.f1)), "round {round}: kept a worse row");
        kept_per_round.push(kept.len());
    }
    Ok(format!("2700 cells, filter_best keeps {} per round over {} rounds", kept_per_round[0], kept_per_round.len()))
}

fn grid_config() -> Result<ExperimentConfig, String> {
    ExperimentConfig::load(&fixtures().join("grid.toml")).map_err(|e| e.to_string())
}

fn count_laws() -> Outcome {
    let cfg = grid_config()?;
    let res = Resources::load(&cfg).map_err(|e| e.to_string())?;
    let settings = RunSettings::from_config(&cfg).map_err(|e| e.to_string())?;
    let data = &res.datasets["reviews_sentiment"];
    let subset = resample_subset(data, 500, 1).map_err(|e| e.to_string())?;
    let train = split(&subset, 0.75, 2).map_err(|e| e.to_string())?.train;
    ensure!(train.len() == 375, "train has {} rows", train.len());
    let targets = select_augmentation_targets(375, 0.2, 3).map_err(|e| e.to_string())?;
    ensure!(targets.len() == 75, "{} targets", targets.len());
    for group in [Group::Syn, Group::Bt, Group::Eda] {
        let aug = augmenter(group, &train, &res, &settings);
        let out = augment_training_set(&train, &targets, aug.as_ref(), 4).map_err(|e| e.to_string())?;
        ensure!(out.dataset.len() == 450, "{group}: {} rows", out.dataset.len());
        ensure!(out.dataset.examples()[..375] == *train.examples(), "{group}: originals changed");
        let untouched = augment_training_set(&train, &select_augmentation_targets(375, 0.0, 3).map_err(|e| e.to_string())?, aug.as_ref(), 4)
            .map_err(|e| e.to_string())?;
        ensure!(untouched.dataset == train && untouched.generated() == 0, "{group}: p = 0 changed the train set");
    }
    Ok("375 x 0.2 -> 75 targets, 450 rows for Syn, BT and EDA; p = 0 leaves train untouched".into())
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let cfg = grid_config()?;
    let spec = cfg.grid_spec().map_err(|e| e.to_string())?;
    let cells = plan_grid(&spec).map_err(|e| e.to_string())?;
    ensure!(cells.len() == 48, "{} cells planned", cells.len());
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut csvs = Vec::new();
    let mut violations = 0;
    for run_no in 0..2 {
        let res = Resources::load(&cfg).map_err(|e| e.to_string())?;
        let mut settings = RunSettings::from_config(&cfg).map_err(|e| e.to_string())?;
        let dir = tmp.path().join(format!("run{run_no}"));
        settings.predictions_dir = Some(dir.join("predictions"));
        let run = run_grid(&cfg, &res, &settings).map_err(|e| e.to_string())?;
        write_outputs(&dir, &run).map_err(|e| e.to_string())?;
        ensure!(run.results.iter().all(|r| r.status == Status::Ok), "run {run_no} has failed cells");
        violations += run.purity_violations();
        csvs.push(std::fs::read(dir.join("results.csv")).map_err(|e| e.to_string())?);
    }
    ensure!(csvs[0] == csvs[1], "results.csv differs between runs");
    ensure!(violations == 0, "{violations} purity violations reported");

    // rebuild every test split from the seeds and check it is what the
    // models were scored on, disjoint from training rows
    let datasets: Vec<(String, Dataset)> = cfg
        .datasets
        .iter()
        .map(|d| load_dataset(&d.path, &d.name, &d.columns()).map(|r| (d.name.clone(), r.dataset)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut checked = 0;
    for cell in &cells {
        let c = &cell.coord;
        let data = &datasets.iter().find(|(n, _)| *n == c.dataset).unwrap().1;
        let subset = resample_subset(data, c.subset_size, derive(cell.seeds.data, 0)).map_err(|e| e.to_string())?;
        let sp = split(&subset, cfg.split_ratio, derive(cell.seeds.data, 1)).map_err(|e| e.to_string())?;
        let train: BTreeSet<usize> = sp.train_indices.iter().copied().collect();
        ensure!(sp.test_indices.iter().all(|i| !train.contains(i)), "{c}: train and test overlap");
        let preds = tmp
            .path()
            .join("run0/predictions")
            .join(&c.dataset)
            .join(c.group.as_str())
            .join(format!("n{}_p{}_r{}.jsonl", c.subset_size, c.aug_pct, c.round));
        let preds = read_predictions(&preds).map_err(|e| e.to_string())?;
        let truth: Vec<String> = preds.into_iter().map(|p| p.true_label).collect();
        ensure!(truth == sp.test.labels(), "{c}: scored on something other than the untouched test split");
        checked += 1;
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    Ok(format!(
        "48 cells x 2 runs, results.csv byte-identical ({} bytes), 0 purity violations, {checked} test splits re-derived, {elapsed:?}",
        csvs[0].len()
    ))
}

fn bt_round_trip() -> Outcome {
    let dict = DictTranslator::from_file("dict", "pt", &fixtures().join("bt_dict.tsv")).map_err(|e| e.to_string())?;
    let corpus = load_dataset(&fixtures().join("corpus.csv"), "corpus", &ColumnMap { text: "text".into(), label: "sentiment".into() }).map_err(|e| e.to_string())?.dataset;
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cache_path = tmp.path().join("bt_cache.jsonl");
    let retry = RetryPolicy::default();
    let dict = Arc::new(dict);

    let first = CountingTranslator::new(Arc::clone(&dict));
    let cache = TranslationCache::open(&cache_path).map_err(|e| e.to_string())?;
    for ex in corpus.examples() {
        let bt = back_translate(ex, &first, "pt", "en", &cache, &retry).map_err(|e| e.to_string())?;
        ensure!(bt.example.text() == ex.text(), "{:?} came back as {:?}", ex.text(), bt.example.text());
        ensure!(bt.degenerate, "round trip not flagged degenerate");
    }
    let issued = first.requests();
    ensure!(issued > 0, "first run issued no requests");

    let again = CountingTranslator::new(Arc::clone(&dict));
    for ex in corpus.examples() {
        back_translate(ex, &again, "pt", "en", &cache, &retry).map_err(|e| e.to_string())?;
    }
    ensure!(again.requests() == 0, "repeat run issued {} requests", again.requests());

    let reopened = TranslationCache::open(&cache_path).map_err(|e| e.to_string())?;
    let cold = CountingTranslator::new(Arc::clone(&dict));
    for ex in corpus.examples() {
        back_translate(ex, &cold, "pt", "en", &reopened, &retry).map_err(|e| e.to_string())?;
    }
    ensure!(cold.requests() == 0, "run over the persisted cache issued {} requests", cold.requests());
    ensure!(cold.name() == "dict", "counter renamed the provider");
    Ok(format!(
        "{} sentences round-trip exactly, first run {issued} requests, repeat runs 0 (in memory and reopened from disk)",
        corpus.len()
    ))
}

fn report_fidelity() -> Outcome {
    let path = fixtures().join("report_rows.csv");
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let rows = parse_results_csv(&text, &path).map_err(|e| e.to_string())?;
    ensure!(rows.len() == 36, "{} rows", rows.len());
    let bundle = summarize(&rows).map_err(|e| e.to_string())?;

    // gains are k/64; each (group, N) mean is over 4 rows
    let expected = [
        (Group::Eda, 500, 3.0 / 256.0),
        (Group::Eda, 1000, -5.0 / 256.0),
        (Group::Syn, 500, 14.0 / 256.0),
        (Group::Syn, 1000, -2.0 / 256.0),
        (Group::Bt, 500, -15.0 / 256.0),
        (Group::Bt, 1000, 8.0 / 256.0),
    ];
    ensure!(bundle.gain_combined.len() == expected.len(), "{} (group, N) means", bundle.gain_combined.len());
    for (g, n, want) in expected {
        let m = bundle
            .gain_combined
            .iter()
            .find(|m| m.group == g && m.subset_size == Some(n))
            .ok_or(format!("no mean for {g} N={n}"))?;
        ensure!(m.mean_gain == want && m.count == 4, "{g} N={n}: {} over {} rows, want {want}", m.mean_gain, m.count);
    }

    let pct = |s: &str| s.parse::<AugPct>().unwrap();
    let want_flags: BTreeSet<(Group, usize, AugPct, usize)> = [
        (Group::Eda, 500, "0.05", 1),
        (Group::Eda, 1000, "0.05", 2),
        (Group::Syn, 500, "0.05", 1),
        (Group::Syn, 500, "0.1", 2),
        (Group::Bt, 1000, "0.05", 1),
        (Group::Bt, 1000, "0.1", 2),
    ]
    .into_iter()
    .map(|(g, n, p, r)| (g, n, pct(p), r))
    .collect();
    let flagged: BTreeSet<_> = bundle
        .significance
        .iter()
        .filter(|s| s.significant)
        .map(|s| (s.coord.group, s.coord.subset_size, s.coord.aug_pct, s.coord.round))
        .collect();
    ensure!(bundle.significance.len() == 12, "{} tested rows", bundle.significance.len());
    ensure!(flagged == want_flags, "flagged {flagged:?}");
    Ok("6 (group, N) mean gains exact, 6 of 12 tested rows flagged (p = 0.05 and 0.050001 not flagged)".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("mcnemar oracle", mcnemar_oracle),
        ("weighted-F1 oracle", weighted_f1_oracle),
        ("SVM sanity", svm_sanity),
        ("EDA invariants", eda_invariants),
        ("grid accounting", grid_accounting),
        ("count laws", count_laws),
        ("end-to-end determinism and purity", end_to_end),
        ("back-translation round trip", bt_round_trip),
        ("report fidelity", report_fidelity),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
