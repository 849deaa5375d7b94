//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use textaug_core::augment::augment_training_set;
use textaug_core::corpus::select_augmentation_targets;
use textaug_core::grid::{AugPct, GridCell, GridCoord, Group};
use textaug_core::stats::{contingency, mcnemar};
use textaug_core::summary::summarize;

use crate::config::ExperimentConfig;
use crate::dataset::write_dataset;
use crate::error::{Error, Result};
use crate::predictions::read_predictions;
use crate::report::write_bundle;
use crate::runner::{parse_results_csv, run_cells, run_grid, write_outputs, Resources, RunSettings};

#[derive(Debug, Parser)]
#[command(name = "textaug", version, about = "Text augmentation benchmark harness")]
struct Cli {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Augment a whole dataset with one group and write the result as CSV.
    Augment {
        #[arg(long)]
        dataset: String,
        #[arg(long)]
        group: Group,
        /// Fraction of rows used as augmentation sources.
        #[arg(long)]
        pct: AugPct,
    },
    /// Train and evaluate one grid cell (and its baseline).
    Train {
        #[arg(long)]
        dataset: String,
        #[arg(long)]
        group: Group,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        pct: AugPct,
        #[arg(long, default_value_t = 1)]
        round: usize,
    },
    /// Run every cell of the configured grid.
    RunGrid,
    /// McNemar test between two prediction files on the same test split.
    Mcnemar { baseline: PathBuf, augmented: PathBuf },
    /// Summarize a results CSV into report tables.
    Report { results: PathBuf },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli.config.as_deref().ok_or_else(|| Error::Usage("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let say = |stdout: &mut dyn Write, s: String| writeln!(stdout, "{s}").map_err(|e| Error::io(Path::new("<stdout>"), e));
    match &cli.command {
        Command::Augment { dataset, group, pct } => {
            let cfg = load_config(cli)?;
            let res = Resources::load(&cfg)?;
            let settings = RunSettings::from_config(&cfg)?;
            let ds = res
                .datasets
                .get(dataset)
                .ok_or_else(|| Error::Usage(format!("dataset {dataset:?} is not in the config")))?;
            let seed = cli.seed.unwrap_or(cfg.master_seed);
            let targets = select_augmentation_targets(ds.len(), pct.fraction(), textaug_core::rng::derive(seed, 0))?;
            let aug = crate::runner::augmenter(*group, ds, &res, &settings);
            let out = augment_training_set(ds, &targets, aug.as_ref(), textaug_core::rng::derive(seed, 1))?;
            let dir = out_dir(cli);
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let path = dir.join(format!("{dataset}_{}_{pct}.csv", group.as_str().to_lowercase()));
            write_dataset(&path, &out.dataset)?;
            say(
                stdout,
                format!(
                    "{}: {} rows ({} original, {} generated, {} failed targets)",
                    path.display(),
                    out.dataset.len(),
                    ds.len(),
                    out.generated(),
                    out.failures.len()
                ),
            )
        }
        Command::Train {
            dataset,
            group,
            size,
            pct,
            round,
        } => {
            let cfg = load_config(cli)?;
            let spec = cfg.grid_spec()?;
            let coord = GridCoord {
                dataset: dataset.clone(),
                group: *group,
                subset_size: *size,
                aug_pct: *pct,
                round: *round,
            };
            let mut cells = vec![GridCell {
                seeds: spec.seeds(&coord.baseline()),
                coord: coord.baseline(),
            }];
            if !pct.is_zero() {
                cells.push(GridCell {
                    seeds: spec.seeds(&coord),
                    coord,
                });
            }
            let res = Resources::load(&cfg)?;
            let mut settings = RunSettings::from_config(&cfg)?;
            let dir = out_dir(cli);
            settings.predictions_dir = cfg.write_predictions.then(|| dir.join("predictions"));
            let run = run_cells(&cells, &res, &settings)?;
            write_outputs(&dir, &run)?;
            for r in &run.results {
                say(
                    stdout,
                    format!("{} {} f1={}", r.coord, r.status.as_str(), r.f1.map(|f| f.to_string()).unwrap_or_default()),
                )?;
            }
            Ok(())
        }
        Command::RunGrid => {
            let cfg = load_config(cli)?;
            let res = Resources::load(&cfg)?;
            let mut settings = RunSettings::from_config(&cfg)?;
            let dir = out_dir(cli);
            settings.predictions_dir = cfg.write_predictions.then(|| dir.join("predictions"));
            let run = run_grid(&cfg, &res, &settings)?;
            write_outputs(&dir, &run)?;
            let failed = run.results.iter().filter(|r| r.status != textaug_core::grid::Status::Ok).count();
            say(
                stdout,
                format!(
                    "{} cells, {} failed, {} purity violations -> {}",
                    run.results.len(),
                    failed,
                    run.purity_violations(),
                    dir.join("results.csv").display()
                ),
            )?;
            if run.purity_violations() > 0 {
                return Err(Error::Data("augmented rows reached a test split".into()));
            }
            Ok(())
        }
        Command::Mcnemar { baseline, augmented } => {
            let a = read_predictions(baseline)?;
            let b = read_predictions(augmented)?;
            if a.len() != b.len() || a.iter().zip(&b).any(|(x, y)| x.true_label != y.true_label) {
                return Err(Error::Data("prediction files do not cover the same test split".into()));
            }
            let truth: Vec<&str> = a.iter().map(|r| r.true_label.as_str()).collect();
            let pa: Vec<&str> = a.iter().map(|r| r.predicted_label.as_str()).collect();
            let pb: Vec<&str> = b.iter().map(|r| r.predicted_label.as_str()).collect();
            let table = contingency(&truth, &pa, &pb)?;
            let t = mcnemar(&table);
            say(
                stdout,
                format!(
                    "a={} b={} c={} d={} chi2={} p_value={} significant={}",
                    table.a, table.b, table.c, table.d, t.chi2, t.p_value, t.significant
                ),
            )
        }
        Command::Report { results } => {
            let text = std::fs::read_to_string(results).map_err(|e| Error::io(results, e))?;
            let rows = parse_results_csv(&text, results)?;
            let bundle = summarize(&rows)?;
            let dir = out_dir(cli);
            let files = write_bundle(&dir, &bundle)?;
            say(stdout, format!("wrote {} files to {}", files.len(), dir.display()))?;
            say(stdout, bundle.text)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { crate::error::Category::Usage.exit_code() } else { 0 };
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
            } else {
                let _ = write!(stdout, "{}", e.render());
            }
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let cat = e.category();
            let _ = writeln!(stderr, "error[{}]: {e}", cat.as_str());
            cat.exit_code()
        }
    }
}
