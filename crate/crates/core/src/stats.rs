//! Paired model comparison: contingency tables, the continuity-corrected
//! McNemar test, F1 gains and best-model filtering.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::grid::{BlockKey, CombinationKey, ExperimentResult, GridCoord, Status};

/// Significance level for McNemar decisions.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("sequence lengths differ: {0} vs {1} vs {2}")]
    LengthMismatch(usize, usize, usize),
    #[error("contingency table needs at least one item")]
    Empty,
    #[error("chi-square statistic must be non-negative, got {0}")]
    NegativeStatistic(f64),
    #[error("{} augmented cell(s) lack a baseline, first: {}", .0.len(), .0[0])]
    MissingBaseline(Vec<GridCoord>),
    #[error("gain and test keys disagree at {0}")]
    KeyMismatch(GridCoord),
}

/// Paired correctness counts of a baseline and an augmented model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ContingencyTable {
    /// Both correct.
    pub a: u64,
    /// Only the baseline correct.
    pub b: u64,
    /// Only the augmented model correct.
    pub c: u64,
    /// Both wrong.
    pub d: u64,
}

impl ContingencyTable {
    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

pub fn contingency<T: PartialEq>(
    y_true: &[T],
    pred_baseline: &[T],
    pred_augmented: &[T],
) -> Result<ContingencyTable, StatsError> {
    if y_true.len() != pred_baseline.len() || y_true.len() != pred_augmented.len() {
        return Err(StatsError::LengthMismatch(y_true.len(), pred_baseline.len(), pred_augmented.len()));
    }
    if y_true.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut t = ContingencyTable::default();
    for ((y, base), aug) in y_true.iter().zip(pred_baseline).zip(pred_augmented) {
        match (base == y, aug == y) {
            (true, true) => t.a += 1,
            (true, false) => t.b += 1,
            (false, true) => t.c += 1,
            (false, false) => t.d += 1,
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub chi2: f64,
    pub p_value: f64,
    pub significant: bool,
}

/// Chi-square survival function with one degree of freedom,
/// `erfc(sqrt(x / 2))`.
pub fn chi2_sf_1dof(x: f64) -> Result<f64, StatsError> {
    if x.is_nan() || x < 0.0 {
        return Err(StatsError::NegativeStatistic(x));
    }
    Ok(libm::erfc(libm::sqrt(x / 2.0)))
}

/// Continuity-corrected McNemar statistic `(|b - c| - 1)^2 / (b + c)`, with
/// the numerator floored at zero. No discordant pairs gives `p = 1`.
pub fn mcnemar(table: &ContingencyTable) -> TestResult {
    let n = table.b + table.c;
    if n == 0 {
        return TestResult {
            chi2: 0.0,
            p_value: 1.0,
            significant: false,
        };
    }
    let diff = table.b.abs_diff(table.c).saturating_sub(1) as f64;
    let chi2 = diff * diff / n as f64;
    let p_value = chi2_sf_1dof(chi2).expect("statistic is non-negative").clamp(0.0, 1.0);
    TestResult {
        chi2,
        p_value,
        significant: p_value < ALPHA,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainRecord {
    pub coord: GridCoord,
    pub baseline_f1: f64,
    pub augmented_f1: f64,
    pub gain: f64,
}

impl GainRecord {
    pub fn new(coord: GridCoord, baseline_f1: f64, augmented_f1: f64) -> Self {
        Self {
            coord,
            baseline_f1,
            augmented_f1,
            gain: augmented_f1 - baseline_f1,
        }
    }
}

/// Successful rows with an F1, keyed by block; among duplicates the highest
/// F1 wins.
fn baselines(results: &[ExperimentResult]) -> BTreeMap<BlockKey, f64> {
    let mut out: BTreeMap<BlockKey, f64> = BTreeMap::new();
    for r in results.iter().filter(|r| r.coord.aug_pct.is_zero()) {
        if let (Status::Ok, Some(f1)) = (r.status, r.f1) {
            out.entry(r.coord.block()).and_modify(|b| *b = b.max(f1)).or_insert(f1);
        }
    }
    out
}

/// Gains for every successful augmented row, plus the coordinates of those
/// whose block has no successful baseline.
pub fn pair_with_baselines(results: &[ExperimentResult]) -> (Vec<GainRecord>, Vec<GridCoord>) {
    let base = baselines(results);
    let mut gains = Vec::new();
    let mut missing = Vec::new();
    for r in results.iter().filter(|r| !r.coord.aug_pct.is_zero()) {
        let (Status::Ok, Some(f1)) = (r.status, r.f1) else {
            continue;
        };
        match base.get(&r.coord.block()) {
            Some(&b) => gains.push(GainRecord::new(r.coord.clone(), b, f1)),
            None => missing.push(r.coord.clone()),
        }
    }
    (gains, missing)
}

/// One gain record per successful augmented row; a row without a baseline
/// is an error.
pub fn compute_gains(results: &[ExperimentResult]) -> Result<Vec<GainRecord>, StatsError> {
    let (gains, missing) = pair_with_baselines(results);
    if !missing.is_empty() {
        return Err(StatsError::MissingBaseline(missing));
    }
    Ok(gains)
}

/// Keeps the highest-F1 row for each (round, dataset, group, N, p)
/// combination; rows without an F1 survive only when their combination has
/// no scored row. Output follows the first appearance of each combination.
pub fn filter_best(results: &[ExperimentResult]) -> Vec<ExperimentResult> {
    let mut order: Vec<CombinationKey> = Vec::new();
    let mut best: BTreeMap<CombinationKey, &ExperimentResult> = BTreeMap::new();
    for r in results {
        let key = r.coord.combination();
        match best.get(&key) {
            None => {
                order.push(key.clone());
                best.insert(key, r);
            }
            Some(cur) => {
                let better = match (r.f1, cur.f1) {
                    (Some(new), Some(old)) => new > old,
                    (Some(_), None) => true,
                    _ => false,
                };
                if better {
                    best.insert(key, r);
                }
            }
        }
    }
    order.into_iter().map(|k| best[&k].clone()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenRow {
    pub gain: GainRecord,
    /// Present only for strictly positive gains.
    pub test: Option<TestResult>,
}

/// Attaches McNemar results to positive-gain rows only.
pub fn significance_screen(gains: &[GainRecord], tests: &[(GridCoord, TestResult)]) -> Result<Vec<ScreenRow>, StatsError> {
    let by_coord: BTreeMap<&GridCoord, &TestResult> = tests.iter().map(|(c, t)| (c, t)).collect();
    let gain_coords: BTreeMap<&GridCoord, ()> = gains.iter().map(|g| (&g.coord, ())).collect();
    if let Some((c, _)) = tests.iter().find(|(c, _)| !gain_coords.contains_key(c)) {
        return Err(StatsError::KeyMismatch(c.clone()));
    }
    gains
        .iter()
        .map(|g| {
            let test = if g.gain > 0.0 {
                Some(**by_coord.get(&g.coord).ok_or_else(|| StatsError::KeyMismatch(g.coord.clone()))?)
            } else {
                None
            };
            Ok(ScreenRow { gain: g.clone(), test })
        })
        .collect()
}
