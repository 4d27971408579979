use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One inference step as seen by the knowledge base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub timestep: usize,
    pub y_true: f64,
    pub y_pred: f64,
    pub model_id: String,
    pub energy: f64,
}

/// Append-only store of observations and predictions.
#[derive(Debug, Clone, Default)]
pub struct DataRepository {
    records: Vec<Observation>,
}

impl DataRepository {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            records: Vec::with_capacity(n),
        }
    }

    pub fn record_observation(
        &mut self,
        timestep: usize,
        y_true: f64,
        y_pred: f64,
        model_id: &str,
        energy: f64,
    ) -> Result<()> {
        if let Some(last) = self.records.last() {
            if timestep <= last.timestep {
                return Err(Error::Order {
                    last: last.timestep,
                    got: timestep,
                });
            }
        }
        self.records.push(Observation {
            timestep,
            y_true,
            y_pred,
            model_id: model_id.to_string(),
            energy,
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[Observation] {
        &self.records
    }

    /// Records from position `start` onward.
    pub fn since(&self, start: usize) -> &[Observation] {
        &self.records[start.min(self.records.len())..]
    }
}
