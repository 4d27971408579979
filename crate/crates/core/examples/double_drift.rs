//! Runs all nine approaches on the synthetic double-drift scenario and prints
//! mean energy, R² and adaptation counts.
//!
//! cargo run --release -p sustainloop --example double_drift

use sustainloop::harness::{
    generate_synthetic, mean_result, run_matrix, Approach, ExperimentPlan, SyntheticParams,
};
use sustainloop::knowledge::{EventKind, SustainabilityGoals};

fn main() -> sustainloop::Result<()> {
    let goals = SustainabilityGoals::default();
    let plan = ExperimentPlan::new(Approach::HarmonE, goals.clone());
    let clean = generate_synthetic(&SyntheticParams::default(), goals.seed, plan.split.total());
    let results = run_matrix(&clean.readings, &plan, &Approach::ALL)?;

    println!("{:<14} {:>12} {:>8} {:>10} {:>6}", "approach", "energy_eu", "r2", "mse", "adapt");
    for runs in &results {
        let m = mean_result(runs);
        println!(
            "{:<14} {:>12.1} {:>8.4} {:>10.2} {:>6.1}",
            runs[0].approach.name(),
            m.total_energy,
            m.r2,
            m.mse,
            m.n_adaptations
        );
    }

    let harmone = results.last().expect("harmone runs");
    for run in harmone {
        let timeline: Vec<String> = run
            .events
            .events()
            .iter()
            .filter(|e| e.kind.is_adaptation())
            .map(|e| {
                let tag = match e.kind {
                    EventKind::Switch => "S",
                    EventKind::Retrain => "R",
                    _ => "V",
                };
                format!("{tag}{}", e.interval)
            })
            .collect();
        println!("rep {} ({} adaptations): {}", run.rep, run.n_adaptations, timeline.join(" "));
    }
    Ok(())
}
