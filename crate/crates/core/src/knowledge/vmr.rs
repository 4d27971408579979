//! Versioned model repository: retrained models archived together with the
//! histogram of the data they were fitted on.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::forecasting::TrainedModel;
use crate::monitor::{kl_divergence, Histogram};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VersionedModelEntry {
    pub version_id: String,
    pub model: TrainedModel,
    pub train_histogram: Histogram,
    pub created_at: usize,
}

/// Bounded FIFO archive. Ids are `v1`, `v2`, ... in store order and are never reused.
#[derive(Debug, Clone)]
pub struct VersionedModelRepository {
    capacity: usize,
    next_id: u64,
    entries: VecDeque<VersionedModelEntry>,
}

impl VersionedModelRepository {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "VMR capacity must be at least 1");
        Self {
            capacity,
            next_id: 1,
            entries: VecDeque::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &VersionedModelEntry> {
        self.entries.iter()
    }

    pub fn get(&self, version_id: &str) -> Option<&VersionedModelEntry> {
        self.entries.iter().find(|e| e.version_id == version_id)
    }

    /// Archives a model, evicting the oldest entry when full. Returns the new id.
    pub fn store_version(
        &mut self,
        model: TrainedModel,
        train_histogram: Histogram,
        timestep: usize,
    ) -> String {
        debug_assert!(train_histogram.is_normalized(1e-9));
        let version_id = format!("v{}", self.next_id);
        self.next_id += 1;
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(VersionedModelEntry {
            version_id: version_id.clone(),
            model,
            train_histogram,
            created_at: timestep,
        });
        version_id
    }

    /// Entry whose training distribution is closest to `current` in KL(current ‖ stored),
    /// provided the distance is below `tau_match`. Ties go to the newest entry.
    pub fn match_distribution(
        &self,
        current: &Histogram,
        tau_match: f64,
    ) -> Result<Option<&VersionedModelEntry>> {
        let mut best: Option<(f64, &VersionedModelEntry)> = None;
        // entries are in store order, so a later entry wins ties with `<=`
        for entry in &self.entries {
            let d = kl_divergence(current, &entry.train_histogram)?;
            let better = match best {
                None => true,
                Some((bd, be)) => d < bd || (d == bd && entry.created_at >= be.created_at),
            };
            if better {
                best = Some((d, entry));
            }
        }
        Ok(best.filter(|(d, _)| *d < tau_match).map(|(_, e)| e))
    }
}
