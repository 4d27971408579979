//! Energy-aware self-adaptation for time-series forecasting pipelines.
//!
//! A MAPE-K loop (monitor, analyze, plan, execute over a shared knowledge
//! base) watches a forecaster serving a flow series and switches models,
//! retrains, or restores archived versions so that accuracy and modeled
//! energy stay inside configured boundaries. The [`harness`] module runs the
//! comparative experiment against static and periodically retrained baselines.

pub mod analyzer;
pub mod error;
pub mod executor;
pub mod forecasting;
pub mod harness;
pub mod knowledge;
pub mod monitor;
pub mod planner;
pub mod report;

pub use error::{Error, Result};
