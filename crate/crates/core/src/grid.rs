//! Experiment grid: coordinates, per-cell seeds, and result rows.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::rng::StableHasher;

/// Subset sizes of the reference protocol.
pub const PAPER_SUBSET_SIZES: [usize; 5] = [500, 1000, 2000, 5000, 10000];
/// Augmentation fractions of the reference protocol, in basis points.
pub const PAPER_AUG_PCTS_BP: [u32; 4] = [0, 500, 1000, 2000];
pub const PAPER_ROUNDS: usize = 15;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("{0} list is empty")]
    EmptyList(&'static str),
    #[error("duplicate entry {1:?} in {0}")]
    Duplicate(&'static str, String),
    #[error("augmentation percentages must include 0 for baselines")]
    MissingBaseline,
    #[error("rounds must be at least 1")]
    NoRounds,
    #[error("subset size must be positive")]
    ZeroSubset,
    #[error("augmentation fraction {0} must lie in [0, 1] with at most four decimals")]
    BadFraction(f64),
    #[error("unknown augmentation group {0:?}")]
    UnknownGroup(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Group {
    Eda,
    Syn,
    Bt,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::Eda, Group::Syn, Group::Bt];

    pub fn as_str(&self) -> &'static str {
        match self {
            Group::Eda => "EDA",
            Group::Syn => "Syn",
            Group::Bt => "BT",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "eda" => Ok(Group::Eda),
            "syn" => Ok(Group::Syn),
            "bt" => Ok(Group::Bt),
            _ => Err(GridError::UnknownGroup(s.to_string())),
        }
    }
}

/// Augmentation fraction stored in basis points so it can be compared and
/// used as a key exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AugPct(u32);

impl AugPct {
    pub const ZERO: AugPct = AugPct(0);

    pub fn from_basis_points(bp: u32) -> Result<Self, GridError> {
        if bp > 10_000 {
            return Err(GridError::BadFraction(f64::from(bp) / 10_000.0));
        }
        Ok(Self(bp))
    }

    pub fn from_fraction(f: f64) -> Result<Self, GridError> {
        let scaled = f * 10_000.0;
        let bp = libm::round(scaled);
        if !(0.0..=1.0).contains(&f) || (scaled - bp).abs() > 1e-6 {
            return Err(GridError::BadFraction(f));
        }
        Ok(Self(bp as u32))
    }

    pub fn basis_points(&self) -> u32 {
        self.0
    }

    pub fn fraction(&self) -> f64 {
        f64::from(self.0) / 10_000.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

/// Shortest decimal form: `0`, `0.05`, `0.1`, `1`.
impl fmt::Display for AugPct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / 10_000;
        let frac = self.0 % 10_000;
        if frac == 0 {
            return write!(f, "{whole}");
        }
        let digits = format!("{frac:04}");
        write!(f, "{whole}.{}", digits.trim_end_matches('0'))
    }
}

impl FromStr for AugPct {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let f: f64 = s.trim().parse().map_err(|_| GridError::BadFraction(f64::NAN))?;
        Self::from_fraction(f)
    }
}

/// Position of one trained model in the grid.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridCoord {
    pub dataset: String,
    pub group: Group,
    pub subset_size: usize,
    pub aug_pct: AugPct,
    /// 1-based.
    pub round: usize,
}

/// Cells sharing a block share their subset and split; the `p = 0` cell of
/// a block is the baseline of the others.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockKey {
    pub dataset: String,
    pub group: Group,
    pub subset_size: usize,
    pub round: usize,
}

/// Best-model filtering key: one model per (round, combination).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CombinationKey {
    pub round: usize,
    pub dataset: String,
    pub group: Group,
    pub subset_size: usize,
    pub aug_pct: AugPct,
}

impl GridCoord {
    pub fn block(&self) -> BlockKey {
        BlockKey {
            dataset: self.dataset.clone(),
            group: self.group,
            subset_size: self.subset_size,
            round: self.round,
        }
    }

    pub fn combination(&self) -> CombinationKey {
        CombinationKey {
            round: self.round,
            dataset: self.dataset.clone(),
            group: self.group,
            subset_size: self.subset_size,
            aug_pct: self.aug_pct,
        }
    }

    pub fn baseline(&self) -> GridCoord {
        GridCoord {
            aug_pct: AugPct::ZERO,
            ..self.clone()
        }
    }
}

impl fmt::Display for GridCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/N={}/p={}/round={}",
            self.dataset, self.group, self.subset_size, self.aug_pct, self.round
        )
    }
}

/// The grid axes plus the master seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub datasets: Vec<String>,
    pub groups: Vec<Group>,
    pub subset_sizes: Vec<usize>,
    pub aug_pcts: Vec<AugPct>,
    pub rounds: usize,
    pub master_seed: u64,
    /// Reuse one subset/split per (dataset, N, round) for every group.
    pub share_subset_across_groups: bool,
}

impl GridSpec {
    /// Reference axes for the given datasets.
    pub fn paper_defaults(datasets: Vec<String>, master_seed: u64) -> Self {
        Self {
            datasets,
            groups: Group::ALL.to_vec(),
            subset_sizes: PAPER_SUBSET_SIZES.to_vec(),
            aug_pcts: PAPER_AUG_PCTS_BP.iter().map(|&bp| AugPct(bp)).collect(),
            rounds: PAPER_ROUNDS,
            master_seed,
            share_subset_across_groups: true,
        }
    }

    pub fn validate(&self) -> Result<(), GridError> {
        fn unique<T: Ord + fmt::Debug>(name: &'static str, items: &[T]) -> Result<(), GridError> {
            if items.is_empty() {
                return Err(GridError::EmptyList(name));
            }
            let mut seen = BTreeSet::new();
            for it in items {
                if !seen.insert(it) {
                    return Err(GridError::Duplicate(name, format!("{it:?}")));
                }
            }
            Ok(())
        }
        unique("datasets", &self.datasets)?;
        unique("groups", &self.groups)?;
        unique("subset_sizes", &self.subset_sizes)?;
        unique("aug_percentages", &self.aug_pcts)?;
        if self.subset_sizes.contains(&0) {
            return Err(GridError::ZeroSubset);
        }
        if !self.aug_pcts.contains(&AugPct::ZERO) {
            return Err(GridError::MissingBaseline);
        }
        if self.rounds == 0 {
            return Err(GridError::NoRounds);
        }
        Ok(())
    }

    /// Seed for subset resampling and splitting of a block.
    pub fn data_seed(&self, block: &BlockKey) -> u64 {
        let h = StableHasher::new()
            .str("data")
            .u64(self.master_seed)
            .str(&block.dataset)
            .u64(block.subset_size as u64)
            .u64(block.round as u64);
        if self.share_subset_across_groups {
            h.finish()
        } else {
            h.str(block.group.as_str()).finish()
        }
    }

    fn coord_seed(&self, tag: &str, c: &GridCoord) -> u64 {
        StableHasher::new()
            .str(tag)
            .u64(self.master_seed)
            .str(&c.dataset)
            .str(c.group.as_str())
            .u64(c.subset_size as u64)
            .u64(u64::from(c.aug_pct.basis_points()))
            .u64(c.round as u64)
            .finish()
    }

    pub fn seeds(&self, coord: &GridCoord) -> CellSeeds {
        CellSeeds {
            data: self.data_seed(&coord.block()),
            targets: self.coord_seed("targets", coord),
            augment: self.coord_seed("augment", coord),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellSeeds {
    pub data: u64,
    pub targets: u64,
    pub augment: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridCell {
    pub coord: GridCoord,
    pub seeds: CellSeeds,
}

/// Cartesian product datasets x groups x sizes x percentages x rounds, in
/// that nesting order.
pub fn plan_grid(spec: &GridSpec) -> Result<Vec<GridCell>, GridError> {
    spec.validate()?;
    let mut cells = Vec::with_capacity(
        spec.datasets.len() * spec.groups.len() * spec.subset_sizes.len() * spec.aug_pcts.len() * spec.rounds,
    );
    for dataset in &spec.datasets {
        for &group in &spec.groups {
            for &subset_size in &spec.subset_sizes {
                for &aug_pct in &spec.aug_pcts {
                    for round in 1..=spec.rounds {
                        let coord = GridCoord {
                            dataset: dataset.clone(),
                            group,
                            subset_size,
                            aug_pct,
                            round,
                        };
                        let seeds = spec.seeds(&coord);
                        cells.push(GridCell { coord, seeds });
                    }
                }
            }
        }
    }
    Ok(cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Ok,
    AugFailed,
    TrainFailed,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::AugFailed => "aug_failed",
            Status::TrainFailed => "train_failed",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ok" => Ok(Status::Ok),
            "aug_failed" => Ok(Status::AugFailed),
            "train_failed" => Ok(Status::TrainFailed),
            other => Err(format!("unknown status {other:?}")),
        }
    }
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub coord: GridCoord,
    pub status: Status,
    pub f1: Option<f64>,
    pub baseline_f1: Option<f64>,
    pub gain: Option<f64>,
    pub b: Option<u64>,
    pub c: Option<u64>,
    pub chi2: Option<f64>,
    pub p_value: Option<f64>,
}

impl ExperimentResult {
    pub fn new(coord: GridCoord, status: Status) -> Self {
        Self {
            coord,
            status,
            f1: None,
            baseline_f1: None,
            gain: None,
            b: None,
            c: None,
            chi2: None,
            p_value: None,
        }
    }

    /// Checks the row-level invariants: baselines carry no gain or test
    /// fields, and ok rows carry a finite F1 in [0, 1].
    pub fn check(&self) -> Result<(), String> {
        if self.coord.aug_pct.is_zero()
            && (self.gain.is_some() || self.b.is_some() || self.c.is_some() || self.chi2.is_some() || self.p_value.is_some())
        {
            return Err(format!("{}: baseline row carries gain/test fields", self.coord));
        }
        if self.status == Status::Ok && !self.f1.is_some_and(|f| f.is_finite() && (0.0..=1.0).contains(&f)) {
            return Err(format!("{}: ok row without a valid f1", self.coord));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("d{i}")).collect()
    }

    #[test]
    fn paper_grid_has_2700_cells() {
        let spec = GridSpec::paper_defaults(names(3), 1);
        assert_eq!(plan_grid(&spec).unwrap().len(), 2700);
    }

    #[test]
    fn single_cell_grid() {
        let spec = GridSpec {
            datasets: names(1),
            groups: vec![Group::Eda],
            subset_sizes: vec![500],
            aug_pcts: vec![AugPct::ZERO],
            rounds: 1,
            master_seed: 3,
            share_subset_across_groups: true,
        };
        assert_eq!(plan_grid(&spec).unwrap().len(), 1);
    }

    #[test]
    fn seeds_are_stable() {
        let spec = GridSpec::paper_defaults(names(2), 99);
        assert_eq!(plan_grid(&spec).unwrap(), plan_grid(&spec).unwrap());
        let other = GridSpec { master_seed: 100, ..spec.clone() };
        assert_ne!(plan_grid(&spec).unwrap()[0].seeds, plan_grid(&other).unwrap()[0].seeds);
    }

    #[test]
    fn data_seed_shared_within_block() {
        let spec = GridSpec::paper_defaults(names(1), 5);
        let cells = plan_grid(&spec).unwrap();
        let pick = |g: Group, p: u32| {
            cells
                .iter()
                .find(|c| c.coord.group == g && c.coord.aug_pct.basis_points() == p && c.coord.subset_size == 500 && c.coord.round == 2)
                .unwrap()
                .seeds
        };
        assert_eq!(pick(Group::Eda, 0).data, pick(Group::Eda, 2000).data);
        assert_eq!(pick(Group::Eda, 0).data, pick(Group::Bt, 500).data);
        assert_ne!(pick(Group::Eda, 500).augment, pick(Group::Eda, 1000).augment);

        let unshared = GridSpec { share_subset_across_groups: false, ..spec };
        let cells = plan_grid(&unshared).unwrap();
        let a = cells.iter().find(|c| c.coord.group == Group::Eda).unwrap().seeds.data;
        let b = cells.iter().find(|c| c.coord.group == Group::Syn).unwrap().seeds.data;
        assert_ne!(a, b);
    }

    #[test]
    fn validation() {
        let mut spec = GridSpec::paper_defaults(names(1), 1);
        spec.aug_pcts = vec![AugPct::from_fraction(0.1).unwrap()];
        assert_eq!(spec.validate(), Err(GridError::MissingBaseline));
        let mut spec = GridSpec::paper_defaults(names(1), 1);
        spec.subset_sizes = vec![500, 500];
        assert!(matches!(spec.validate(), Err(GridError::Duplicate("subset_sizes", _))));
        let mut spec = GridSpec::paper_defaults(vec![], 1);
        assert_eq!(spec.validate(), Err(GridError::EmptyList("datasets")));
        spec.datasets = names(1);
        spec.rounds = 0;
        assert_eq!(spec.validate(), Err(GridError::NoRounds));
    }

    #[test]
    fn pct_display_and_parse() {
        for (bp, s) in [(0, "0"), (500, "0.05"), (1000, "0.1"), (2000, "0.2"), (10_000, "1"), (1234, "0.1234")] {
            let p = AugPct::from_basis_points(bp).unwrap();
            assert_eq!(p.to_string(), s);
            assert_eq!(s.parse::<AugPct>().unwrap(), p);
        }
        assert!(AugPct::from_fraction(0.12345).is_err());
        assert!(AugPct::from_fraction(1.5).is_err());
    }

    #[test]
    fn group_parse() {
        assert_eq!("eda".parse::<Group>().unwrap(), Group::Eda);
        assert_eq!("BT".parse::<Group>().unwrap(), Group::Bt);
        assert!("gan".parse::<Group>().is_err());
    }

    #[test]
    fn row_invariants() {
        let coord = GridCoord { dataset: "d".into(), group: Group::Syn, subset_size: 10, aug_pct: AugPct::ZERO, round: 1 };
        let mut r = ExperimentResult::new(coord, Status::Ok);
        assert!(r.check().is_err());
        r.f1 = Some(0.5);
        assert!(r.check().is_ok());
        r.gain = Some(0.1);
        assert!(r.check().is_err());
    }
}
