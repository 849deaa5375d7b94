//! Report tables computed from result rows: baseline and p-value grids in
//! the appendix layout, mean gains at several aggregation levels, and the
//! per-model significance series.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::grid::{AugPct, ExperimentResult, GridCoord, Group};
use crate::stats::{filter_best, ALPHA};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SummaryError {
    #[error("no results to summarize")]
    Empty,
}

/// Rows are subset sizes, columns are (group, augmentation fraction) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct AppendixTable {
    pub sizes: Vec<usize>,
    pub columns: Vec<(Group, AugPct)>,
    /// `cells[row][column]`.
    pub cells: Vec<Vec<Option<f64>>>,
    /// Decimal places used when rendering.
    pub decimals: usize,
}

impl AppendixTable {
    pub fn get(&self, size: usize, group: Group, pct: AugPct) -> Option<f64> {
        let r = self.sizes.iter().position(|&s| s == size)?;
        let c = self.columns.iter().position(|&k| k == (group, pct))?;
        self.cells[r][c]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanGain {
    pub dataset: Option<String>,
    pub group: Group,
    pub subset_size: Option<usize>,
    pub mean_gain: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceRow {
    pub coord: GridCoord,
    pub gain: f64,
    pub p_value: f64,
    pub neg_log10_p: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    /// Per dataset, mean paired baseline F1 over rounds.
    pub baseline_tables: Vec<(String, AppendixTable)>,
    /// Per dataset, the p-value of the highest-gain tested model.
    pub pvalue_tables: Vec<(String, AppendixTable)>,
    /// Per (dataset, group).
    pub gain_by_group: Vec<MeanGain>,
    /// Per (dataset, group, N).
    pub gain_by_group_size: Vec<MeanGain>,
    /// Per (group, N) across datasets.
    pub gain_combined: Vec<MeanGain>,
    /// Every tested row in input order.
    pub significance: Vec<SignificanceRow>,
    pub text: String,
}

fn mean_by<K: Ord + Clone>(rows: &[&ExperimentResult], key: impl Fn(&ExperimentResult) -> K) -> Vec<(K, f64, usize)> {
    let mut acc: BTreeMap<K, (f64, usize)> = BTreeMap::new();
    for r in rows {
        if let Some(g) = r.gain {
            let e = acc.entry(key(r)).or_insert((0.0, 0));
            e.0 += g;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(k, (sum, n))| (k, sum / n as f64, n)).collect()
}

fn appendix_table(
    rows: &[&ExperimentResult],
    dataset: &str,
    decimals: usize,
    value: impl Fn(&[&ExperimentResult]) -> Option<f64>,
) -> AppendixTable {
    let rows: Vec<&ExperimentResult> = rows.iter().copied().filter(|r| r.coord.dataset == dataset).collect();
    let sizes: Vec<usize> = rows.iter().map(|r| r.coord.subset_size).collect::<BTreeSet<_>>().into_iter().collect();
    let columns: Vec<(Group, AugPct)> = rows
        .iter()
        .filter(|r| !r.coord.aug_pct.is_zero())
        .map(|r| (r.coord.group, r.coord.aug_pct))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let cells = sizes
        .iter()
        .map(|&n| {
            columns
                .iter()
                .map(|&(g, p)| {
                    let matching: Vec<&ExperimentResult> = rows
                        .iter()
                        .copied()
                        .filter(|r| r.coord.subset_size == n && r.coord.group == g && r.coord.aug_pct == p)
                        .collect();
                    value(&matching)
                })
                .collect()
        })
        .collect();
    AppendixTable {
        sizes,
        columns,
        cells,
        decimals,
    }
}

pub fn neg_log10(p: f64) -> f64 {
    -libm::log10(p)
}

/// Builds every report table. Rows are first reduced with
/// [`filter_best`]; gains are taken from the rows as stored.
pub fn summarize(results: &[ExperimentResult]) -> Result<ReportBundle, SummaryError> {
    if results.is_empty() {
        return Err(SummaryError::Empty);
    }
    let kept = filter_best(results);
    let rows: Vec<&ExperimentResult> = kept.iter().collect();
    let datasets: Vec<String> = {
        let mut seen = BTreeSet::new();
        rows.iter()
            .filter(|r| seen.insert(r.coord.dataset.clone()))
            .map(|r| r.coord.dataset.clone())
            .collect()
    };

    let baseline_tables = datasets
        .iter()
        .map(|d| {
            let t = appendix_table(&rows, d, 4, |m| {
                let vals: Vec<f64> = m.iter().filter_map(|r| r.baseline_f1).collect();
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            });
            (d.clone(), t)
        })
        .collect();

    let pvalue_tables = datasets
        .iter()
        .map(|d| {
            let t = appendix_table(&rows, d, 4, |m| {
                let mut best: Option<(f64, f64)> = None;
                for r in m {
                    if let (Some(g), Some(p)) = (r.gain, r.p_value) {
                        if best.is_none_or(|(bg, _)| g > bg) {
                            best = Some((g, p));
                        }
                    }
                }
                best.map(|(_, p)| p)
            });
            (d.clone(), t)
        })
        .collect();

    let gain_by_group = mean_by(&rows, |r| (r.coord.dataset.clone(), r.coord.group))
        .into_iter()
        .map(|((d, g), mean_gain, count)| MeanGain {
            dataset: Some(d),
            group: g,
            subset_size: None,
            mean_gain,
            count,
        })
        .collect();
    let gain_by_group_size: Vec<MeanGain> = mean_by(&rows, |r| (r.coord.dataset.clone(), r.coord.group, r.coord.subset_size))
        .into_iter()
        .map(|((d, g, n), mean_gain, count)| MeanGain {
            dataset: Some(d),
            group: g,
            subset_size: Some(n),
            mean_gain,
            count,
        })
        .collect();
    let gain_combined: Vec<MeanGain> = mean_by(&rows, |r| (r.coord.group, r.coord.subset_size))
        .into_iter()
        .map(|((g, n), mean_gain, count)| MeanGain {
            dataset: None,
            group: g,
            subset_size: Some(n),
            mean_gain,
            count,
        })
        .collect();

    let significance: Vec<SignificanceRow> = rows
        .iter()
        .filter_map(|r| {
            let p = r.p_value?;
            Some(SignificanceRow {
                coord: r.coord.clone(),
                gain: r.gain.unwrap_or(0.0),
                p_value: p,
                neg_log10_p: neg_log10(p),
                significant: p < ALPHA,
            })
        })
        .collect();

    let mut text = String::new();
    let _ = writeln!(text, "results: {} rows ({} after best-model filtering)", results.len(), kept.len());
    let failed = kept.iter().filter(|r| r.status != crate::grid::Status::Ok).count();
    let _ = writeln!(text, "failed cells: {failed}");
    let _ = writeln!(text, "\nmean F1 gain per group:");
    for g in &gain_combined_by_group(&rows) {
        let _ = writeln!(text, "  {:<4} {:+.4}  (n={})", g.group.as_str(), g.mean_gain, g.count);
    }
    let _ = writeln!(text, "\nmean F1 gain per dataset and group:");
    for (d, g, m, n) in gain_rows(&mean_by(&rows, |r| (r.coord.dataset.clone(), r.coord.group))) {
        let _ = writeln!(text, "  {d:<16} {g:<4} {m:+.4}  (n={n})");
    }
    let sig: Vec<&SignificanceRow> = significance.iter().filter(|s| s.significant).collect();
    let _ = writeln!(
        text,
        "\nMcNemar tests on positive-gain models: {} run, {} significant at alpha = {ALPHA}",
        significance.len(),
        sig.len()
    );
    for s in sig {
        let _ = writeln!(text, "  {}  gain {:+.4}  p = {:.6}", s.coord, s.gain, s.p_value);
    }

    Ok(ReportBundle {
        baseline_tables,
        pvalue_tables,
        gain_by_group,
        gain_by_group_size,
        gain_combined,
        significance,
        text,
    })
}

fn gain_combined_by_group(rows: &[&ExperimentResult]) -> Vec<MeanGain> {
    mean_by(rows, |r| r.coord.group)
        .into_iter()
        .map(|(g, mean_gain, count)| MeanGain {
            dataset: None,
            group: g,
            subset_size: None,
            mean_gain,
            count,
        })
        .collect()
}

fn gain_rows(v: &[((String, Group), f64, usize)]) -> Vec<(String, String, f64, usize)> {
    v.iter()
        .map(|((d, g), m, n)| (d.clone(), format!("{g}"), *m, *n))
        .collect()
}
