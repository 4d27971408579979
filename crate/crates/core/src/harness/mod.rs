//! Experiment orchestration: series preparation, the nine approaches and
//! repetition fan-out.
//!
//! Repetitions are independent simulations. With the `parallel` feature
//! (default) they run on the rayon pool; otherwise sequentially. Both paths
//! produce identical results.

pub mod output;
pub mod plan;
pub mod run;
pub mod series;

pub use output::{write_run_artifacts, RunArtifacts, SummaryRow};
pub use plan::{default_drift, should_periodic_retrain, Approach, ExperimentPlan, Split};
pub use run::{run_repetition, MetricsRow, RunResult};
pub use series::{
    generate_synthetic, inject_drift, load_series_csv, DriftSegment, Series, SyntheticParams,
};

use crate::error::Result;

/// Applies the plan's test-coordinate drift segments to a clean series.
pub fn prepare_series(clean: &[f64], plan: &ExperimentPlan) -> Result<Vec<f64>> {
    let offset = plan.split.test_start();
    let segments: Vec<DriftSegment> = plan.drift.iter().map(|s| s.offset(offset)).collect();
    inject_drift(clean, &segments)
}

pub fn run_repetitions_sequential(series: &[f64], plan: &ExperimentPlan) -> Result<Vec<RunResult>> {
    (0..plan.repetitions)
        .map(|rep| run_repetition(series, plan, rep))
        .collect()
}

#[cfg(feature = "parallel")]
pub fn run_repetitions_parallel(series: &[f64], plan: &ExperimentPlan) -> Result<Vec<RunResult>> {
    use rayon::prelude::*;
    (0..plan.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(series, plan, rep))
        .collect()
}

/// All repetitions of `plan` on a clean series (drift is injected here).
pub fn run_experiment(clean: &[f64], plan: &ExperimentPlan) -> Result<Vec<RunResult>> {
    plan.validate()?;
    let series = prepare_series(clean, plan)?;
    #[cfg(feature = "parallel")]
    {
        run_repetitions_parallel(&series, plan)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_repetitions_sequential(&series, plan)
    }
}

/// Every (approach, repetition) pair, flattened so the pool sees all of them at once.
/// Results are grouped per approach in input order.
pub fn run_matrix(
    clean: &[f64],
    base: &ExperimentPlan,
    approaches: &[Approach],
) -> Result<Vec<Vec<RunResult>>> {
    base.validate()?;
    let series = prepare_series(clean, base)?;
    let plans: Vec<ExperimentPlan> = approaches
        .iter()
        .map(|&a| ExperimentPlan {
            approach: a,
            ..base.clone()
        })
        .collect();
    let jobs: Vec<(usize, usize)> = (0..plans.len())
        .flat_map(|p| (0..base.repetitions).map(move |r| (p, r)))
        .collect();
    let run = |&(p, r): &(usize, usize)| run_repetition(&series, &plans[p], r);
    #[cfg(feature = "parallel")]
    let flat: Vec<RunResult> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let flat: Vec<RunResult> = jobs.iter().map(run).collect::<Result<_>>()?;

    let mut grouped: Vec<Vec<RunResult>> = (0..plans.len()).map(|_| Vec::new()).collect();
    for (result, (p, _)) in flat.into_iter().zip(&jobs) {
        grouped[*p].push(result);
    }
    Ok(grouped)
}

/// Mean over repetitions of the headline numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanResult {
    pub total_energy: f64,
    pub r2: f64,
    pub mse: f64,
    pub n_adaptations: f64,
    pub loop_energy: f64,
}

pub fn mean_result(results: &[RunResult]) -> MeanResult {
    let n = results.len().max(1) as f64;
    let avg = |f: &dyn Fn(&RunResult) -> f64| results.iter().map(f).sum::<f64>() / n;
    MeanResult {
        total_energy: avg(&|r| r.total_energy),
        r2: avg(&|r| r.r2),
        mse: avg(&|r| r.mse),
        n_adaptations: avg(&|r| r.n_adaptations as f64),
        loop_energy: avg(&|r| r.energy.loop_overhead),
    }
}
