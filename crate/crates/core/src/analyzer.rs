//! Boundary checks on interval metrics and the dynamic energy threshold.

use serde::{Deserialize, Serialize};

use crate::knowledge::SustainabilityGoals;
use crate::monitor::IntervalMetrics;

/// Listed in planner priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UncertaintyKind {
    DriftDetected,
    EnergyViolation,
    PerformanceDegradation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uncertainty {
    pub kind: UncertaintyKind,
    /// Size of the violation in the metric's own units, always positive.
    pub magnitude: f64,
    pub interval: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdState {
    pub tau_e: f64,
    pub history: Vec<(usize, f64)>,
}

impl ThresholdState {
    pub fn new(goals: &SustainabilityGoals) -> Self {
        Self {
            tau_e: goals.tau_e_init,
            history: Vec::new(),
        }
    }

    /// Moves the threshold toward the reference energy level:
    /// `tau + delta * (e_ref - e_bar)`, clamped into the configured bounds.
    pub fn update(&mut self, interval: usize, e_bar: f64, goals: &SustainabilityGoals) -> f64 {
        let raw = self.tau_e + goals.delta * (goals.e_ref - e_bar);
        self.tau_e = raw.clamp(goals.tau_min(), goals.tau_max());
        self.history.push((interval, self.tau_e));
        self.tau_e
    }
}

/// Functional form of [`ThresholdState::update`].
pub fn update_energy_threshold(
    state: &ThresholdState,
    interval: usize,
    e_bar: f64,
    goals: &SustainabilityGoals,
) -> ThresholdState {
    let mut next = state.clone();
    next.update(interval, e_bar, goals);
    next
}

/// All boundary violations in the interval, ordered drift, energy, performance.
/// Boundary values themselves are acceptable.
pub fn detect(metrics: &IntervalMetrics, goals: &SustainabilityGoals, tau_e: f64) -> Vec<Uncertainty> {
    let mut found = Vec::with_capacity(3);
    let mut push = |kind, magnitude: f64| {
        found.push(Uncertainty {
            kind,
            magnitude,
            interval: metrics.interval,
        })
    };
    if metrics.d_i > goals.tau_drift {
        push(UncertaintyKind::DriftDetected, metrics.d_i - goals.tau_drift);
    }
    if metrics.e_bar_i > tau_e {
        push(UncertaintyKind::EnergyViolation, metrics.e_bar_i - tau_e);
    }
    if metrics.ema_s_i < goals.s_min {
        push(UncertaintyKind::PerformanceDegradation, goals.s_min - metrics.ema_s_i);
    }
    found
}
