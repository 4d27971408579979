//! Deterministic energy accounting in abstract energy units (eu).

use serde::{Deserialize, Serialize};

use super::Family;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyCosts {
    pub linear: f64,
    pub kernel: f64,
    pub recurrent: f64,
}

impl FamilyCosts {
    pub fn get(&self, family: Family) -> f64 {
        match family {
            Family::Linear => self.linear,
            Family::Kernel => self.kernel,
            Family::Recurrent => self.recurrent,
        }
    }

    fn is_strictly_ordered(&self) -> bool {
        0.0 < self.linear && self.linear < self.kernel && self.kernel < self.recurrent
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OpKind {
    Infer,
    Train,
    Loop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyCostModel {
    pub infer_cost: FamilyCosts,
    /// Cost of one full retrain on the 1200-sample window.
    pub train_cost: FamilyCosts,
    /// Cost of one control-loop invocation.
    pub loop_cost: f64,
}

impl Default for EnergyCostModel {
    fn default() -> Self {
        Self {
            infer_cost: FamilyCosts {
                linear: 1.0,
                kernel: 3.0,
                recurrent: 12.0,
            },
            train_cost: FamilyCosts {
                linear: 200.0,
                kernel: 800.0,
                recurrent: 6000.0,
            },
            loop_cost: 0.5,
        }
    }
}

impl EnergyCostModel {
    pub fn validate(&self) -> Result<()> {
        if !self.infer_cost.is_strictly_ordered() {
            return Err(Error::Validation("infer_cost".into()));
        }
        if !self.train_cost.is_strictly_ordered() {
            return Err(Error::Validation("train_cost".into()));
        }
        if !(self.loop_cost > 0.0) {
            return Err(Error::Validation("loop_cost".into()));
        }
        Ok(())
    }

    /// `count` times the unit cost of `op`. `family` is ignored for [`OpKind::Loop`].
    pub fn charge(&self, op: OpKind, family: Family, count: usize) -> f64 {
        let unit = match op {
            OpKind::Infer => self.infer_cost.get(family),
            OpKind::Train => self.train_cost.get(family),
            OpKind::Loop => self.loop_cost,
        };
        count as f64 * unit
    }

    /// The most expensive family per inference.
    pub fn heaviest(&self) -> Family {
        Family::ALL
            .into_iter()
            .max_by(|a, b| self.infer_cost.get(*a).total_cmp(&self.infer_cost.get(*b)))
            .expect("non-empty")
    }
}

/// Running energy totals for one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyMeter {
    pub inference: f64,
    pub training: f64,
    pub loop_overhead: f64,
    total: f64,
}

impl EnergyMeter {
    pub fn add(&mut self, op: OpKind, amount: f64) -> f64 {
        match op {
            OpKind::Infer => self.inference += amount,
            OpKind::Train => self.training += amount,
            OpKind::Loop => self.loop_overhead += amount,
        }
        self.total += amount;
        amount
    }

    /// Sum of every charge in the order it was made.
    pub fn total(&self) -> f64 {
        self.total
    }
}
