//! Soft-margin RBF support vector classifier.
//!
//! Each binary machine solves the C-SVC dual
//!
//! ```text
//! min_a  1/2 a'Qa - e'a   s.t.  y'a = 0,  0 <= a_i <= C,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! with SMO: every iteration picks the maximal-violating pair using
//! second-order gain (the working-set rule popularised by LIBSVM), solves
//! the two-variable subproblem analytically and updates the gradient.
//! Selection is a deterministic scan, so training is reproducible without a
//! seed. Multiclass problems use one-vs-one machines and majority voting.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::features::FeatureMatrix;
use crate::kernel::{gamma_scale, rbf_unchecked, KernelError};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvmError {
    #[error("training data has a single class")]
    SingleClass,
    #[error("no training rows")]
    Empty,
    #[error("{features} feature rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("non-finite feature value")]
    NonFinite,
    #[error("input dimension {got} does not match model dimension {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaMode {
    /// `1 / (dim * var(X))` over the training matrix.
    Scale,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    pub c: f64,
    pub gamma: GammaMode,
    /// Stopping threshold on the maximal KKT violation.
    pub tolerance: f64,
    /// Iteration cap per binary machine, in multiples of its row count.
    pub max_passes: usize,
    /// Budget for cached kernel columns per binary machine.
    pub cache_bytes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 10.0,
            gamma: GammaMode::Scale,
            tolerance: 1e-3,
            max_passes: 1000,
            cache_bytes: 256 << 20,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<(), SvmError> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(SvmError::InvalidConfig("C must be positive"));
        }
        if let GammaMode::Fixed(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(SvmError::InvalidConfig("fixed gamma must be positive"));
            }
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(SvmError::InvalidConfig("tolerance must be positive"));
        }
        if self.max_passes == 0 {
            return Err(SvmError::InvalidConfig("max_passes must be at least 1"));
        }
        Ok(())
    }
}

/// Lazily computed kernel columns with least-recently-used eviction.
struct KernelColumns<'a> {
    x: &'a FeatureMatrix,
    rows: &'a [usize],
    gamma: f64,
    capacity: usize,
    columns: BTreeMap<usize, (Rc<[f64]>, u64)>,
    clock: u64,
}

impl<'a> KernelColumns<'a> {
    fn new(x: &'a FeatureMatrix, rows: &'a [usize], gamma: f64, cache_bytes: usize) -> Self {
        let per_column = rows.len().max(1) * core::mem::size_of::<f64>();
        Self {
            x,
            rows,
            gamma,
            capacity: (cache_bytes / per_column).max(2),
            columns: BTreeMap::new(),
            clock: 0,
        }
    }

    fn column(&mut self, i: usize) -> Rc<[f64]> {
        self.clock += 1;
        if let Some((col, stamp)) = self.columns.get_mut(&i) {
            *stamp = self.clock;
            return col.clone();
        }
        if self.columns.len() >= self.capacity {
            let oldest = self
                .columns
                .iter()
                .min_by_key(|(_, (_, s))| *s)
                .map(|(&k, _)| k)
                .expect("cache is non-empty");
            self.columns.remove(&oldest);
        }
        let xi = self.x.row(self.rows[i]);
        let col: Rc<[f64]> = self
            .rows
            .iter()
            .map(|&r| rbf_unchecked(xi, self.x.row(r), self.gamma))
            .collect();
        self.columns.insert(i, (col.clone(), self.clock));
        col
    }
}

/// Dual solution of one binary problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySolution {
    pub alpha: Vec<f64>,
    /// Decision function is `sum_i alpha_i y_i K(x_i, x) - rho`.
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// SMO on the rows `rows` of `x` with labels `y` in {-1, +1}.
pub fn solve_binary(x: &FeatureMatrix, rows: &[usize], y: &[f64], gamma: f64, cfg: &SvmConfig) -> BinarySolution {
    let n = rows.len();
    let c = cfg.c;
    let mut kernel = KernelColumns::new(x, rows, gamma, cfg.cache_bytes);
    // K(x, x) = 1 for the RBF kernel
    let diag = vec![1.0; n];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = cfg.max_passes.saturating_mul(n.max(1));
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut sel_i = None;
        for t in 0..n {
            if y[t] > 0.0 {
                if alpha[t] < c && -grad[t] >= gmax {
                    gmax = -grad[t];
                    sel_i = Some(t);
                }
            } else if alpha[t] > 0.0 && grad[t] >= gmax {
                gmax = grad[t];
                sel_i = Some(t);
            }
        }
        let Some(i) = sel_i else {
            converged = true;
            break;
        };
        let ki = kernel.column(i);

        let mut gmax2 = f64::NEG_INFINITY;
        let mut sel_j = None;
        let mut best_obj = f64::INFINITY;
        for t in 0..n {
            let (free, grad_diff, g) = if y[t] > 0.0 {
                (alpha[t] > 0.0, gmax + grad[t], grad[t])
            } else {
                (alpha[t] < c, gmax - grad[t], -grad[t])
            };
            if !free {
                continue;
            }
            if g >= gmax2 {
                gmax2 = g;
            }
            if grad_diff > 0.0 {
                let quad = diag[i] + diag[t] - 2.0 * ki[t];
                let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                if obj <= best_obj {
                    best_obj = obj;
                    sel_j = Some(t);
                }
            }
        }
        let j = match sel_j {
            Some(j) if gmax + gmax2 >= cfg.tolerance => j,
            _ => {
                converged = true;
                break;
            }
        };
        iterations += 1;
        let kj = kernel.column(j);

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * ki[j];
        if y[i] != y[j] {
            let quad = diag[i] + diag[j] + 2.0 * qij;
            let delta = (-grad[i] - grad[j]) / if quad > 0.0 { quad } else { TAU };
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = diag[i] + diag[j] - 2.0 * qij;
            let delta = (grad[i] - grad[j]) / if quad > 0.0 { quad } else { TAU };
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let di = alpha[i] - old_i;
        let dj = alpha[j] - old_j;
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }

    BinarySolution {
        rho: compute_rho(&alpha, &grad, y, c),
        alpha,
        iterations,
        converged,
    }
}

/// Bias from the free multipliers, or the midpoint of the feasible interval
/// when every multiplier sits at a bound.
fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if y[t] < 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if at_lower {
            if y[t] > 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else {
        (upper + lower) / 2.0
    }
}

/// One-vs-one machine separating `classes[positive]` from `classes[negative]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMachine {
    pub positive: usize,
    pub negative: usize,
    /// Indices into [`SvmModel::support_vector`].
    pub support: Vec<usize>,
    /// `alpha_i * y_i` for each support vector.
    pub dual_coef: Vec<f64>,
    /// Decision function is `sum dual_coef_i K(sv_i, x) + bias`.
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    classes: Vec<String>,
    dim: usize,
    gamma: f64,
    c: f64,
    vectors: FeatureMatrix,
    machines: Vec<BinaryMachine>,
}

impl SvmModel {
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn machines(&self) -> &[BinaryMachine] {
        &self.machines
    }

    pub fn support_vector_count(&self) -> usize {
        self.vectors.rows()
    }

    pub fn support_vector(&self, i: usize) -> &[f64] {
        self.vectors.row(i)
    }

    /// One decision value per machine, in machine order.
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>, SvmError> {
        if x.len() != self.dim {
            return Err(SvmError::DimensionMismatch {
                got: x.len(),
                expected: self.dim,
            });
        }
        let k: Vec<f64> = self.vectors.iter_rows().map(|sv| rbf_unchecked(sv, x, self.gamma)).collect();
        Ok(self
            .machines
            .iter()
            .map(|m| m.support.iter().zip(&m.dual_coef).map(|(&s, &a)| a * k[s]).sum::<f64>() + m.bias)
            .collect())
    }

    /// Majority vote over the machines; ties go to the earlier class.
    pub fn predict_one(&self, x: &[f64]) -> Result<&str, SvmError> {
        let decisions = self.decision_values(x)?;
        let mut votes = vec![0usize; self.classes.len()];
        for (m, d) in self.machines.iter().zip(decisions) {
            votes[if d > 0.0 { m.positive } else { m.negative }] += 1;
        }
        let mut best = 0;
        for (k, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = k;
            }
        }
        Ok(&self.classes[best])
    }
}

/// Trains one-vs-one RBF machines for every pair of distinct labels.
pub fn svm_train(x: &FeatureMatrix, y: &[String], cfg: &SvmConfig) -> Result<SvmModel, SvmError> {
    cfg.validate()?;
    if x.rows() != y.len() {
        return Err(SvmError::LengthMismatch {
            features: x.rows(),
            labels: y.len(),
        });
    }
    if x.is_empty() {
        return Err(SvmError::Empty);
    }
    if x.values().iter().any(|v| !v.is_finite()) {
        return Err(SvmError::NonFinite);
    }
    let classes: Vec<String> = y.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if classes.len() < 2 {
        return Err(SvmError::SingleClass);
    }
    let gamma = match cfg.gamma {
        GammaMode::Scale => gamma_scale(x)?,
        GammaMode::Fixed(g) => g,
    };
    let class_of: Vec<usize> = y
        .iter()
        .map(|l| classes.binary_search(l).expect("label is in class list"))
        .collect();

    let mut stored: BTreeMap<usize, usize> = BTreeMap::new();
    let mut vectors = FeatureMatrix::new(x.dim());
    let mut machines = Vec::new();
    for pos in 0..classes.len() {
        for neg in pos + 1..classes.len() {
            let rows: Vec<usize> = (0..x.rows()).filter(|&r| class_of[r] == pos || class_of[r] == neg).collect();
            let signs: Vec<f64> = rows.iter().map(|&r| if class_of[r] == pos { 1.0 } else { -1.0 }).collect();
            let sol = solve_binary(x, &rows, &signs, gamma, cfg);
            let mut support = Vec::new();
            let mut dual_coef = Vec::new();
            for (k, &a) in sol.alpha.iter().enumerate() {
                if a > 0.0 {
                    let row = rows[k];
                    let slot = *stored.entry(row).or_insert_with(|| {
                        vectors.push_row(x.row(row)).expect("training rows are finite");
                        vectors.rows() - 1
                    });
                    support.push(slot);
                    dual_coef.push(a * signs[k]);
                }
            }
            machines.push(BinaryMachine {
                positive: pos,
                negative: neg,
                support,
                dual_coef,
                bias: -sol.rho,
                iterations: sol.iterations,
                converged: sol.converged,
            });
        }
    }
    Ok(SvmModel {
        classes,
        dim: x.dim(),
        gamma,
        c: cfg.c,
        vectors,
        machines,
    })
}

/// Predicted label for every row of `x`.
pub fn svm_predict(model: &SvmModel, x: &FeatureMatrix) -> Result<Vec<String>, SvmError> {
    if x.is_empty() {
        return Ok(Vec::new());
    }
    if x.dim() != model.dim {
        return Err(SvmError::DimensionMismatch {
            got: x.dim(),
            expected: model.dim,
        });
    }
    x.iter_rows().map(|r| model.predict_one(r).map(String::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| String::from(*s)).collect()
    }

    fn xor() -> (FeatureMatrix, Vec<String>) {
        let x = FeatureMatrix::from_rows(2, &[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        (x, labels(&["a", "a", "b", "b"]))
    }

    #[test]
    fn xor_is_separable() {
        let (x, y) = xor();
        let m = svm_train(&x, &y, &SvmConfig::default()).unwrap();
        assert_eq!(svm_predict(&m, &x).unwrap(), y);
    }

    #[test]
    fn three_class_blobs() {
        let mut rng = seeded(11);
        let centers = [(0.0, 0.0), (5.0, 0.0), (0.0, 5.0)];
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (k, (cx, cy)) in centers.iter().enumerate() {
            for _ in 0..15 {
                rows.push(vec![cx + rng.gen_range(-1.0..1.0), cy + rng.gen_range(-1.0..1.0)]);
                y.push(String::from(["x", "y", "z"][k]));
            }
        }
        let x = FeatureMatrix::from_rows(2, &rows).unwrap();
        let m = svm_train(&x, &y, &SvmConfig::default()).unwrap();
        assert_eq!(m.machines().len(), 3);
        assert_eq!(svm_predict(&m, &x).unwrap(), y);
        assert!(m.machines().iter().all(|mm| !mm.support.is_empty() && mm.converged));
    }

    #[test]
    fn training_errors() {
        let (x, _) = xor();
        assert_eq!(svm_train(&x, &labels(&["a", "a", "a", "a"]), &SvmConfig::default()), Err(SvmError::SingleClass));
        assert!(matches!(svm_train(&x, &labels(&["a"]), &SvmConfig::default()), Err(SvmError::LengthMismatch { .. })));
        let bad = SvmConfig { c: 0.0, ..SvmConfig::default() };
        assert!(matches!(svm_train(&x, &labels(&["a", "a", "b", "b"]), &bad), Err(SvmError::InvalidConfig(_))));
        let flat = FeatureMatrix::from_rows(1, &[vec![1.0], vec![1.0]]).unwrap();
        assert_eq!(
            svm_train(&flat, &labels(&["a", "b"]), &SvmConfig::default()),
            Err(SvmError::Kernel(KernelError::ZeroVariance))
        );
    }

    #[test]
    fn predict_edge_cases() {
        let (x, y) = xor();
        let m = svm_train(&x, &y, &SvmConfig::default()).unwrap();
        assert!(svm_predict(&m, &FeatureMatrix::new(2)).unwrap().is_empty());
        let wrong = FeatureMatrix::from_rows(3, &[vec![0.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(svm_predict(&m, &wrong), Err(SvmError::DimensionMismatch { .. })));
    }

    #[test]
    fn tiny_cache_gives_identical_model() {
        let (x, y) = xor();
        let a = svm_train(&x, &y, &SvmConfig::default()).unwrap();
        let b = svm_train(&x, &y, &SvmConfig { cache_bytes: 1, ..SvmConfig::default() }).unwrap();
        assert_eq!(a, b);
    }
}
