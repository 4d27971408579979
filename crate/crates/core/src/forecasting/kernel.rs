use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{solve_normal_equations, Standardizer};
use crate::error::{Error, Result};
use crate::forecasting::TrainingSet;

pub const N_FEATURES: usize = 64;
pub const RIDGE: f64 = 1e-2;

/// Ridge regression over random Fourier features of the standardized window.
///
/// `feature_j(z) = sqrt(2 / D) * cos(frequencies[j] · z + phases[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// `D x lag`, row-major.
    pub frequencies: Vec<f64>,
    pub phases: Vec<f64>,
    pub weights: Vec<f64>,
}

impl KernelParams {
    pub fn n_features(&self) -> usize {
        self.phases.len()
    }

    pub fn feature(&self, j: usize, z: &[f64]) -> f64 {
        let lag = z.len();
        let w = &self.frequencies[j * lag..(j + 1) * lag];
        let arg: f64 = w.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() + self.phases[j];
        (2.0 / self.n_features() as f64).sqrt() * arg.cos()
    }

    /// Standardized-target output for a standardized window.
    pub fn predict_standardized(&self, z: &[f64]) -> f64 {
        (0..self.n_features())
            .map(|j| self.weights[j] * self.feature(j, z))
            .sum()
    }
}

pub(crate) fn fit(
    set: &TrainingSet,
    scaler: &Standardizer,
    target: &Standardizer,
    seed: u64,
) -> Result<KernelParams> {
    let lag = set.lag();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // unit-variance inputs; lengthscale sqrt(lag) keeps arguments O(1)
    let bandwidth = 1.0 / (lag as f64).sqrt();
    let frequencies: Vec<f64> = (0..N_FEATURES * lag)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            g * bandwidth
        })
        .collect();
    let phases: Vec<f64> = (0..N_FEATURES).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let mut params = KernelParams {
        frequencies,
        phases,
        weights: vec![0.0; N_FEATURES],
    };

    let n = set.len();
    let mut z = vec![0.0; lag];
    let mut phi = DMatrix::zeros(n, N_FEATURES);
    for (i, row) in set.inputs().enumerate() {
        for (zj, x) in z.iter_mut().zip(row) {
            *zj = scaler.apply(*x);
        }
        for j in 0..N_FEATURES {
            phi[(i, j)] = params.feature(j, &z);
        }
    }
    let y = DVector::from_iterator(n, set.targets().iter().map(|&t| target.apply(t)));
    let gram = phi.transpose() * &phi;
    let rhs = phi.transpose() * y;
    let w = solve_normal_equations(&gram, &rhs, RIDGE)
        .ok_or_else(|| Error::Numerical("kernel ridge system".into()))?;
    params.weights = w.iter().copied().collect();
    Ok(params)
}
