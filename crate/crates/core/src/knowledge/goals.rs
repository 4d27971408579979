//! Design-time sustainability goals loaded from the decision-map config.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Adaptation boundaries and tuning constants for one run.
///
/// The JSON form uses exactly these field names. Any field may be omitted,
/// in which case the value from [`SustainabilityGoals::default`] is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SustainabilityGoals {
    /// Accuracy weight in the performance score.
    pub beta: f64,
    /// EMA smoothing factor.
    pub gamma: f64,
    /// Gain of the energy-threshold update.
    pub delta: f64,
    pub s_min: f64,
    /// Reference normalized energy level.
    pub e_ref: f64,
    pub tau_e_init: f64,
    pub tau_e_bounds: (f64, f64),
    /// KL threshold (nats) above which drift is reported.
    pub tau_drift: f64,
    /// KL threshold (nats) below which a stored version counts as a match.
    pub tau_match: f64,
    pub epsilon: f64,
    pub interval_len: usize,
    pub cooldown: usize,
    pub vmr_capacity: usize,
    pub histogram_bins: usize,
    pub seed: u64,
}

impl Default for SustainabilityGoals {
    fn default() -> Self {
        Self {
            beta: 0.5,
            gamma: 0.3,
            delta: 0.1,
            s_min: 0.6,
            e_ref: 0.6,
            tau_e_init: 0.75,
            tau_e_bounds: (0.3, 0.95),
            tau_drift: 0.15,
            tau_match: 0.05,
            epsilon: 0.1,
            interval_len: 100,
            cooldown: 1,
            vmr_capacity: 16,
            histogram_bins: 20,
            seed: 42,
        }
    }
}

impl SustainabilityGoals {
    pub fn tau_min(&self) -> f64 {
        self.tau_e_bounds.0
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_e_bounds.1
    }

    /// Checks every field in declaration order and reports the first one out of range.
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        let checks: [(&str, bool); 14] = [
            ("beta", unit(self.beta)),
            ("gamma", self.gamma > 0.0 && self.gamma <= 1.0),
            ("delta", self.delta > 0.0 && self.delta < 1.0),
            ("s_min", unit(self.s_min)),
            ("e_ref", self.e_ref > 0.0 && self.e_ref <= 1.0),
            (
                "tau_e_init",
                self.tau_e_init >= self.tau_min() && self.tau_e_init <= self.tau_max(),
            ),
            (
                "tau_e_bounds",
                self.tau_min().is_finite()
                    && self.tau_max().is_finite()
                    && self.tau_min() >= 0.0
                    && self.tau_min() <= self.tau_max(),
            ),
            ("tau_drift", self.tau_drift >= 0.0 && self.tau_drift.is_finite()),
            ("tau_match", self.tau_match >= 0.0 && self.tau_match.is_finite()),
            ("epsilon", unit(self.epsilon)),
            ("interval_len", self.interval_len >= 1),
            // cooldown is unsigned, any value is admissible
            ("cooldown", true),
            ("vmr_capacity", self.vmr_capacity >= 1),
            ("histogram_bins", self.histogram_bins >= 2),
        ];
        match checks.iter().find(|(_, ok)| !ok) {
            Some((name, _)) => Err(Error::Validation((*name).to_string())),
            None => Ok(()),
        }
    }

    pub fn from_json_str(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Reads and validates a decision-map JSON file.
pub fn load_decision_map(path: impl AsRef<Path>) -> Result<SustainabilityGoals> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let goals = SustainabilityGoals::from_json_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    goals.validate()?;
    Ok(goals)
}
