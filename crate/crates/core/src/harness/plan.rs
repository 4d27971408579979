use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::series::DriftSegment;
use crate::error::{Error, Result};
use crate::forecasting::{EnergyCostModel, Family};
use crate::knowledge::SustainabilityGoals;
use crate::planner::Tactics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Approach {
    Linear,
    LinearPrt,
    Kernel,
    KernelPrt,
    Recurrent,
    RecurrentPrt,
    Switch,
    SwitchPrt,
    HarmonE,
}

impl Approach {
    pub const ALL: [Approach; 9] = [
        Approach::Linear,
        Approach::LinearPrt,
        Approach::Kernel,
        Approach::KernelPrt,
        Approach::Recurrent,
        Approach::RecurrentPrt,
        Approach::Switch,
        Approach::SwitchPrt,
        Approach::HarmonE,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Approach::Linear => "linear",
            Approach::LinearPrt => "linear-prt",
            Approach::Kernel => "kernel",
            Approach::KernelPrt => "kernel-prt",
            Approach::Recurrent => "recurrent",
            Approach::RecurrentPrt => "recurrent-prt",
            Approach::Switch => "switch",
            Approach::SwitchPrt => "switch-prt",
            Approach::HarmonE => "harmone",
        }
    }

    /// The fixed family of a single-model baseline.
    pub fn static_family(self) -> Option<Family> {
        match self {
            Approach::Linear | Approach::LinearPrt => Some(Family::Linear),
            Approach::Kernel | Approach::KernelPrt => Some(Family::Kernel),
            Approach::Recurrent | Approach::RecurrentPrt => Some(Family::Recurrent),
            _ => None,
        }
    }

    pub fn periodic_retraining(self) -> bool {
        matches!(
            self,
            Approach::LinearPrt | Approach::KernelPrt | Approach::RecurrentPrt | Approach::SwitchPrt
        )
    }

    /// Tactics available to the control loop, or `None` when no loop runs.
    pub fn tactics(self) -> Option<Tactics> {
        match self {
            Approach::Switch | Approach::SwitchPrt => Some(Tactics::SWITCH_ONLY),
            Approach::HarmonE => Some(Tactics::FULL),
            _ => None,
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Approach {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Approach::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Plan(format!("unknown approach `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl Split {
    pub fn total(&self) -> usize {
        self.train + self.val + self.test
    }

    /// Series index of the first test reading.
    pub fn test_start(&self) -> usize {
        self.train + self.val
    }
}

impl Default for Split {
    fn default() -> Self {
        Self {
            train: 1200,
            val: 240,
            test: 14_500,
        }
    }
}

pub const DEFAULT_PRT_PERIOD: usize = 3200;

/// The double-drift scenario: one scale-and-shift applied to two test windows.
pub fn default_drift() -> Vec<DriftSegment> {
    vec![
        DriftSegment {
            start: 4000,
            end: 6000,
            scale: 1.4,
            shift: 30.0,
        },
        DriftSegment {
            start: 10_000,
            end: 12_000,
            scale: 1.4,
            shift: 30.0,
        },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub approach: Approach,
    pub split: Split,
    pub prt_period: usize,
    /// Drift segments in test-stream coordinates.
    pub drift: Vec<DriftSegment>,
    pub goals: SustainabilityGoals,
    pub cost_model: EnergyCostModel,
    pub repetitions: usize,
    /// Measure wall-clock inference time. Off by default so outputs stay reproducible.
    pub measure_wall_clock: bool,
}

impl ExperimentPlan {
    pub fn new(approach: Approach, goals: SustainabilityGoals) -> Self {
        Self {
            approach,
            split: Split::default(),
            prt_period: DEFAULT_PRT_PERIOD,
            drift: default_drift(),
            goals,
            cost_model: EnergyCostModel::default(),
            repetitions: 5,
            measure_wall_clock: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.goals.validate()?;
        self.cost_model.validate()?;
        if self.repetitions == 0 {
            return Err(Error::Plan("repetitions must be at least 1".into()));
        }
        if self.prt_period == 0 {
            return Err(Error::Plan("prt_period must be positive".into()));
        }
        if self.split.train <= crate::forecasting::LAG || self.split.val < 2 || self.split.test == 0 {
            return Err(Error::Plan("split windows too small".into()));
        }
        super::series::validate_segments(&self.drift, self.split.test)
    }

    /// Seed of repetition `rep`.
    pub fn seed(&self, rep: usize) -> u64 {
        self.goals.seed.wrapping_add(rep as u64)
    }
}

/// True at every positive multiple of `period`.
pub fn should_periodic_retrain(t: usize, period: usize) -> bool {
    t > 0 && t.is_multiple_of(period)
}
