use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{solve_normal_equations, Standardizer};
use crate::error::{Error, Result};
use crate::forecasting::TrainingSet;

/// Ridge strength used only when the plain normal equations are singular.
pub const FALLBACK_RIDGE: f64 = 1e-8;

/// Coefficients in raw flow units, oldest lag first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub coefficients: Vec<f64>,
    pub bias: f64,
}

impl LinearParams {
    pub fn predict(&self, window: &[f64]) -> f64 {
        self.bias
            + self
                .coefficients
                .iter()
                .zip(window)
                .map(|(c, x)| c * x)
                .sum::<f64>()
    }
}

/// Ordinary least squares on standardized lags, mapped back to raw units.
pub(crate) fn fit(set: &TrainingSet, scaler: &Standardizer, target: &Standardizer) -> Result<LinearParams> {
    let lag = set.lag();
    let n = set.len();
    let x = DMatrix::from_fn(n, lag, |i, j| scaler.apply(set.input(i)[j]));
    let col_means: Vec<f64> = (0..lag).map(|j| x.column(j).mean()).collect();
    let xc = DMatrix::from_fn(n, lag, |i, j| x[(i, j)] - col_means[j]);
    let y = DVector::from_iterator(n, set.targets().iter().map(|&t| target.apply(t)));
    let y_mean = y.mean();
    let yc = y.add_scalar(-y_mean);

    let gram = xc.transpose() * &xc;
    let rhs = xc.transpose() * yc;
    let w = solve_normal_equations(&gram, &rhs, 0.0)
        .or_else(|| solve_normal_equations(&gram, &rhs, FALLBACK_RIDGE))
        .ok_or_else(|| Error::Numerical("linear normal equations".into()))?;

    // y_raw = t.mean + t.std * (y_mean + Σ w_j (s(x_j) - m_j)), s(x) = (x - mu) / sd
    let scale = target.std / scaler.std;
    let coefficients: Vec<f64> = w.iter().map(|wj| wj * scale).collect();
    let offset: f64 = w
        .iter()
        .zip(&col_means)
        .map(|(wj, mj)| wj * (mj + scaler.mean / scaler.std))
        .sum();
    let bias = target.mean + target.std * (y_mean - offset);
    if coefficients.iter().any(|c| !c.is_finite()) || !bias.is_finite() {
        return Err(Error::Numerical("non-finite linear coefficients".into()));
    }
    Ok(LinearParams { coefficients, bias })
}
