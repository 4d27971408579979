//! Knowledge base shared by the loop stages: goals, observations, archived
//! model versions and the adaptation audit log.

pub mod events;
pub mod goals;
pub mod repository;
pub mod vmr;

pub use events::{AdaptationEvent, EventKind, EventLog, Trigger};
pub use goals::{load_decision_map, SustainabilityGoals};
pub use repository::{DataRepository, Observation};
pub use vmr::{VersionedModelEntry, VersionedModelRepository};
