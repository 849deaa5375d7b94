//! Per-class precision, recall and F1, and their support-weighted average.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("{truth} true labels but {predicted} predictions")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("no labels to evaluate")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Union of true and predicted labels, sorted.
    pub classes: Vec<String>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub support: Vec<usize>,
    pub weighted_f1: f64,
    pub predictions: Vec<String>,
}

/// Per-class (tp, fp, fn) in `classes` order.
fn counts(classes: &[String], y_true: &[String], y_pred: &[String]) -> Vec<(usize, usize, usize)> {
    let mut out = vec![(0, 0, 0); classes.len()];
    let idx = |l: &String| classes.binary_search(l).expect("label in class list");
    for (t, p) in y_true.iter().zip(y_pred) {
        let (ti, pi) = (idx(t), idx(p));
        if ti == pi {
            out[ti].0 += 1;
        } else {
            out[pi].1 += 1;
            out[ti].2 += 1;
        }
    }
    out
}

/// `num / den`, or 0 when the denominator is 0.
pub fn safe_ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// F1 from raw counts, `2tp / (2tp + fp + fn)`.
pub fn f1_from_counts(tp: usize, fp: usize, fneg: usize) -> f64 {
    safe_ratio(2 * tp, 2 * tp + fp + fneg)
}

/// Support-weighted average over classes, summed in class order.
pub fn weighted_average(values: &[f64], support: &[usize]) -> f64 {
    let total: usize = support.iter().sum();
    if total == 0 {
        return 0.0;
    }
    values
        .iter()
        .zip(support)
        .map(|(&v, &s)| (s as f64 / total as f64) * v)
        .sum()
}

pub fn evaluate(y_true: &[String], y_pred: &[String]) -> Result<EvalReport, MetricsError> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch {
            truth: y_true.len(),
            predicted: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(MetricsError::Empty);
    }
    let classes: Vec<String> = y_true.iter().chain(y_pred).cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let counts = counts(&classes, y_true, y_pred);
    let precision = counts.iter().map(|&(tp, fp, _)| safe_ratio(tp, tp + fp)).collect();
    let recall = counts.iter().map(|&(tp, _, fneg)| safe_ratio(tp, tp + fneg)).collect();
    let f1: Vec<f64> = counts.iter().map(|&(tp, fp, fneg)| f1_from_counts(tp, fp, fneg)).collect();
    let support: Vec<usize> = counts.iter().map(|&(tp, _, fneg)| tp + fneg).collect();
    Ok(EvalReport {
        weighted_f1: weighted_average(&f1, &support),
        classes,
        precision,
        recall,
        f1,
        support,
        predictions: y_pred.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| String::from(*s)).collect()
    }

    #[test]
    fn perfect() {
        let y = l(&["a", "b", "c", "a"]);
        assert_eq!(evaluate(&y, &y).unwrap().weighted_f1, 1.0);
    }

    #[test]
    fn hand_case() {
        let r = evaluate(&l(&["A", "A", "B"]), &l(&["A", "B", "B"])).unwrap();
        assert!((r.f1[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.f1[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.weighted_f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.precision, [1.0, 0.5]);
        assert_eq!(r.recall, [0.5, 1.0]);
        assert_eq!(r.support, [2, 1]);
        assert_eq!(r.predictions, l(&["A", "B", "B"]));
    }

    #[test]
    fn all_wrong_binary() {
        assert_eq!(evaluate(&l(&["a", "b"]), &l(&["b", "a"])).unwrap().weighted_f1, 0.0);
    }

    #[test]
    fn predicted_only_class_has_zero_support() {
        let r = evaluate(&l(&["a", "a"]), &l(&["a", "z"])).unwrap();
        assert_eq!(r.classes, l(&["a", "z"]));
        assert_eq!(r.support, [2, 0]);
        assert_eq!(r.f1[1], 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(evaluate(&l(&["a"]), &l(&[])), Err(MetricsError::LengthMismatch { .. })));
        assert_eq!(evaluate(&[], &[]), Err(MetricsError::Empty));
    }
}
