//! The managed system's model spectrum: three forecaster families that trade
//! accuracy for energy, plus windowing and energy accounting.

pub mod energy;
pub mod kernel;
pub mod linear;
pub mod recurrent;
pub mod window;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use energy::{EnergyCostModel, EnergyMeter, FamilyCosts, OpKind};
pub use kernel::KernelParams;
pub use linear::LinearParams;
pub use recurrent::RecurrentParams;
pub use window::{make_supervised, TrainingSet, LAG};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Family {
    Linear,
    Kernel,
    Recurrent,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Linear, Family::Kernel, Family::Recurrent];

    /// Repository id of the family's base model.
    pub fn id(self) -> &'static str {
        match self {
            Family::Linear => "linear",
            Family::Kernel => "kernel",
            Family::Recurrent => "recurrent",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// Affine standardization `(x - mean) / std`; a zero spread is treated as unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: f64,
    pub std: f64,
}

impl Standardizer {
    pub fn fit(values: &[f64]) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        Self {
            mean,
            std: if std > 1e-12 { std } else { 1.0 },
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    pub fn invert(&self, z: f64) -> f64 {
        self.mean + self.std * z
    }
}

/// Half-open range of series indices a model was fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Params {
    Linear(LinearParams),
    Kernel(KernelParams),
    Recurrent(RecurrentParams),
}

/// An immutable fitted forecaster. The JSON form is self-describing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub model_id: String,
    pub family: Family,
    pub seed: u64,
    pub lag: usize,
    pub trained_on: Segment,
    pub input_scaler: Standardizer,
    pub target_scaler: Standardizer,
    pub params: Params,
}

impl TrainedModel {
    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.model_id = id.into();
        self
    }

    pub fn with_segment(mut self, start: usize, end: usize) -> Self {
        self.trained_on = Segment { start, end };
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Fits `family` on `set`. Deterministic in `(family, set, seed)`.
pub fn train(family: Family, set: &TrainingSet, seed: u64) -> Result<TrainedModel> {
    if set.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let input_scaler = Standardizer::fit(set.flat_inputs());
    let target_scaler = Standardizer::fit(set.targets());
    let params = match family {
        Family::Linear => Params::Linear(linear::fit(set, &input_scaler, &target_scaler)?),
        Family::Kernel => Params::Kernel(kernel::fit(set, &input_scaler, &target_scaler, seed)?),
        Family::Recurrent => {
            Params::Recurrent(recurrent::fit(set, &input_scaler, &target_scaler, seed)?)
        }
    };
    Ok(TrainedModel {
        model_id: family.id().to_string(),
        family,
        seed,
        lag: set.lag(),
        trained_on: Segment {
            start: 0,
            end: set.len() + set.lag(),
        },
        input_scaler,
        target_scaler,
        params,
    })
}

/// One-step forecast from the `lag` most recent readings, oldest first.
pub fn predict(model: &TrainedModel, window: &[f64]) -> Result<f64> {
    assert_eq!(window.len(), model.lag, "window length must equal the model lag");
    if window.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let y = match &model.params {
        Params::Linear(p) => p.predict(window),
        Params::Kernel(p) => {
            let z: Vec<f64> = window.iter().map(|&x| model.input_scaler.apply(x)).collect();
            model.target_scaler.invert(p.predict_standardized(&z))
        }
        Params::Recurrent(p) => {
            let z: Vec<f64> = window.iter().map(|&x| model.input_scaler.apply(x)).collect();
            model.target_scaler.invert(p.predict_standardized(&z))
        }
    };
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFinite)
    }
}

/// Solves `(gram + ridge I) x = rhs` by Cholesky; `None` if not positive definite.
pub(crate) fn solve_normal_equations(
    gram: &DMatrix<f64>,
    rhs: &DVector<f64>,
    ridge: f64,
) -> Option<DVector<f64>> {
    let mut a = gram.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += ridge;
    }
    let x = a.cholesky()?.solve(rhs);
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noisy_series(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|t| {
                let tf = t as f64;
                150.0 + 80.0 * (tf * 2.0 * std::f64::consts::PI / 48.0).sin()
                    + rng.random_range(-5.0..5.0)
            })
            .collect()
    }

    #[test]
    fn linear_recovers_last_lag_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 300;
        let mut inputs = Vec::with_capacity(n * LAG);
        let mut targets = Vec::with_capacity(n);
        for _ in 0..n {
            let row: Vec<f64> = (0..LAG).map(|_| rng.random_range(0.0..100.0)).collect();
            targets.push(2.0 * row[LAG - 1]);
            inputs.extend(row);
        }
        let set = TrainingSet::new(LAG, inputs, targets);
        let m = train(Family::Linear, &set, 0).unwrap();
        let Params::Linear(p) = &m.params else { unreachable!() };
        assert!((p.coefficients[LAG - 1] - 2.0).abs() < 1e-6);
        for c in &p.coefficients[..LAG - 1] {
            assert!(c.abs() < 1e-6);
        }
        assert!(p.bias.abs() < 1e-6);
    }

    #[test]
    fn constant_series_predicts_constant() {
        let series = vec![73.5; 200];
        let set = make_supervised(&series, LAG).unwrap();
        for family in Family::ALL {
            let m = train(family, &set, 3).unwrap();
            for row in set.inputs() {
                let y = predict(&m, row).unwrap();
                assert!((y - 73.5).abs() < 1e-3, "{family}: {y}");
            }
        }
    }

    #[test]
    fn training_is_deterministic() {
        let series = noisy_series(400, 1);
        let set = make_supervised(&series, LAG).unwrap();
        for family in Family::ALL {
            let a = train(family, &set, 17).unwrap();
            let b = train(family, &set, 17).unwrap();
            assert_eq!(a.to_json(), b.to_json(), "{family}");
        }
    }

    #[test]
    fn seed_changes_randomized_families() {
        let series = noisy_series(400, 1);
        let set = make_supervised(&series, LAG).unwrap();
        for family in [Family::Kernel, Family::Recurrent] {
            let a = train(family, &set, 1).unwrap();
            let b = train(family, &set, 2).unwrap();
            assert_ne!(a.params, b.params);
        }
    }

    #[test]
    fn handmade_linear_model() {
        let set = make_supervised(&[1.0; 10], LAG).unwrap();
        let mut m = train(Family::Linear, &set, 0).unwrap();
        m.params = Params::Linear(LinearParams {
            coefficients: vec![0.0, 0.0, 0.0, 0.0, 1.0],
            bias: 0.0,
        });
        let w = [3.0, 9.0, 1.0, 7.0, 42.0];
        assert_eq!(predict(&m, &w).unwrap(), 42.0);
        assert_eq!(predict(&m, &w).unwrap(), predict(&m, &w).unwrap());
    }

    #[test]
    fn kernel_matches_direct_expansion() {
        let series = noisy_series(300, 4);
        let set = make_supervised(&series, LAG).unwrap();
        let m = train(Family::Kernel, &set, 8).unwrap();
        let Params::Kernel(p) = &m.params else { unreachable!() };
        let window = &series[100..105];
        // independent expansion straight from the stored arrays
        let z: Vec<f64> = window
            .iter()
            .map(|x| (x - m.input_scaler.mean) / m.input_scaler.std)
            .collect();
        let d = p.phases.len();
        let mut acc = 0.0;
        for j in 0..d {
            let mut arg = p.phases[j];
            for k in 0..LAG {
                arg += p.frequencies[j * LAG + k] * z[k];
            }
            acc += p.weights[j] * (2.0 / d as f64).sqrt() * arg.cos();
        }
        let expected = m.target_scaler.mean + m.target_scaler.std * acc;
        let got = predict(&m, window).unwrap();
        assert!((got - expected).abs() < 1e-9 * expected.abs().max(1.0));
        assert_eq!(d, kernel::N_FEATURES);
    }

    #[test]
    fn nonfinite_window_rejected() {
        let set = make_supervised(&noisy_series(50, 2), LAG).unwrap();
        let m = train(Family::Linear, &set, 0).unwrap();
        assert!(matches!(
            predict(&m, &[1.0, 2.0, f64::NAN, 4.0, 5.0]),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn empty_set_rejected() {
        let set = TrainingSet::new(LAG, vec![], vec![]);
        assert!(matches!(
            train(Family::Linear, &set, 0),
            Err(Error::EmptyTrainingSet)
        ));
    }

    #[test]
    fn json_round_trip() {
        let set = make_supervised(&noisy_series(120, 3), LAG).unwrap();
        let m = train(Family::Recurrent, &set, 5).unwrap();
        let back = TrainedModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back.to_json(), m.to_json());
        let w = [150.0, 160.0, 170.0, 175.0, 180.0];
        assert_eq!(predict(&back, &w).unwrap(), predict(&m, &w).unwrap());
    }
}
