//! Gaussian (RBF) kernel and the `scale` bandwidth heuristic.

use crate::features::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("gamma must be positive and finite, got {0}")]
    InvalidGamma(f64),
    #[error("feature matrix is empty")]
    Empty,
    #[error("features have zero variance")]
    ZeroVariance,
}

/// `1 / (dim * var(X))`, with `var` the population variance of all entries.
pub fn gamma_scale(x: &FeatureMatrix) -> Result<f64, KernelError> {
    let values = x.values();
    if values.is_empty() {
        return Err(KernelError::Empty);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if !(var > 0.0 && var.is_finite()) {
        return Err(KernelError::ZeroVariance);
    }
    Ok(1.0 / (x.dim() as f64 * var))
}

pub fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `exp(-gamma * |x - y|^2)`.
pub fn rbf_kernel(x: &[f64], y: &[f64], gamma: f64) -> Result<f64, KernelError> {
    if x.len() != y.len() {
        return Err(KernelError::DimensionMismatch(x.len(), y.len()));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(KernelError::InvalidGamma(gamma));
    }
    Ok(rbf_unchecked(x, y, gamma))
}

#[inline]
pub(crate) fn rbf_unchecked(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    libm::exp(-gamma * squared_distance(x, y))
}
