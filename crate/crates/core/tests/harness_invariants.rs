use sustainloop::forecasting::{make_supervised, predict, train, EnergyCostModel, Family, LAG};
use sustainloop::harness::output::{read_events, read_metrics, read_summary};
use sustainloop::harness::{
    generate_synthetic, prepare_series, run_repetition, run_repetitions_sequential,
    write_run_artifacts, Approach, ExperimentPlan, RunArtifacts, SummaryRow, SyntheticParams,
};
use sustainloop::knowledge::{EventKind, SustainabilityGoals};
use sustainloop::monitor::r_squared;
use sustainloop::report::{compare, ResultSet};

fn scenario(approach: Approach, reps: usize) -> (ExperimentPlan, Vec<f64>) {
    let goals = SustainabilityGoals::default();
    let mut plan = ExperimentPlan::new(approach, goals.clone());
    plan.repetitions = reps;
    let clean = generate_synthetic(&SyntheticParams::default(), goals.seed, plan.split.total());
    let series = prepare_series(&clean.readings, &plan).unwrap();
    (plan, series)
}

#[test]
fn static_and_periodic_energy_follow_closed_form() {
    let cost = EnergyCostModel::default();
    for (stat, prt, family) in [
        (Approach::Linear, Approach::LinearPrt, Family::Linear),
        (Approach::Kernel, Approach::KernelPrt, Family::Kernel),
        (Approach::Recurrent, Approach::RecurrentPrt, Family::Recurrent),
    ] {
        let (plan, series) = scenario(stat, 1);
        let r = run_repetition(&series, &plan, 0).unwrap();
        let expected = 14_500.0 * cost.infer_cost.get(family);
        assert_eq!(r.total_energy, expected, "{}", stat.name());
        assert_eq!(r.n_adaptations, 0);
        assert!(r.events.is_empty());

        let (plan, series) = scenario(prt, 1);
        let r = run_repetition(&series, &plan, 0).unwrap();
        assert_eq!(r.total_energy, expected + 4.0 * cost.train_cost.get(family), "{}", prt.name());
        let intervals: Vec<usize> = r.events.events().iter().map(|e| e.interval).collect();
        assert_eq!(intervals, vec![32, 64, 96, 128]);
    }
}

#[test]
fn recurrent_forecaster_competitive_with_linear_on_held_out_data() {
    let series = generate_synthetic(&SyntheticParams::default(), 11, 3000).readings;
    let train_set = make_supervised(&series[..1200], LAG).unwrap();
    let held_out = &series[1200..];
    let score = |family| {
        let model = train(family, &train_set, 11).unwrap();
        let (mut y, mut p) = (Vec::new(), Vec::new());
        for t in LAG..held_out.len() {
            y.push(held_out[t]);
            p.push(predict(&model, &held_out[t - LAG..t]).unwrap());
        }
        r_squared(&y, &p).unwrap()
    };
    let (linear, recurrent) = (score(Family::Linear), score(Family::Recurrent));
    assert!(recurrent >= linear - 0.02, "recurrent {recurrent} vs linear {linear}");
}

#[cfg(feature = "parallel")]
#[test]
fn parallel_and_sequential_repetitions_agree() {
    let (plan, series) = scenario(Approach::SwitchPrt, 3);
    let seq = run_repetitions_sequential(&series, &plan).unwrap();
    let par = sustainloop::harness::run_repetitions_parallel(&series, &plan).unwrap();
    assert_eq!(seq, par);
}

#[test]
fn artifacts_round_trip_and_chart_totals_match_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let mut sets = Vec::new();
    for approach in [Approach::HarmonE, Approach::LinearPrt] {
        let (plan, series) = scenario(approach, 2);
        let results = run_repetitions_sequential(&series, &plan).unwrap();
        write_run_artifacts(dir.path(), &results).unwrap();

        let art = RunArtifacts::new(dir.path(), approach);
        let summary = read_summary(&art.summary()).unwrap();
        assert_eq!(summary, results.iter().map(SummaryRow::from).collect::<Vec<_>>());
        for r in &results {
            assert_eq!(read_metrics(&art.metrics(r.rep)).unwrap(), r.per_interval);
            assert_eq!(read_events(&art.events(r.rep)).unwrap(), r.events);
        }

        let loaded = ResultSet::load(&art.summary()).unwrap();
        for (rep, r) in loaded.reps.iter().zip(&results) {
            let curve = rep.cumulative_energy();
            assert_eq!(curve.len(), 145);
            assert!((curve[144] - r.total_energy).abs() <= 1e-9 * r.total_energy);
            assert!(curve.windows(2).all(|w| w[1] >= w[0]));
            assert_eq!(rep.loop_energy(), r.energy.loop_overhead);
        }
        sets.push(loaded);
    }
    let report = compare(&sets).unwrap();
    for row in &report.rows {
        assert!((0.0..=1.0).contains(&row.loop_energy_share));
    }
}

#[test]
fn harmone_event_stream_is_well_formed() {
    let (plan, series) = scenario(Approach::HarmonE, 1);
    let r = run_repetition(&series, &plan, 0).unwrap();
    let events = r.events.events();
    assert!(events.windows(2).all(|w| w[0].interval <= w[1].interval));
    assert_eq!(r.events.count(EventKind::ThresholdUpdate), 145);
    assert_eq!(r.n_adaptations, r.events.n_adaptations());
    for e in events.iter().filter(|e| e.kind.is_adaptation()) {
        assert_ne!(e.from_model, e.to_model);
        assert!(e.is_consistent());
    }
    // every reused version exists among earlier retrains
    let stored: Vec<&str> = events
        .iter()
        .filter(|e| e.kind == EventKind::Retrain)
        .map(|e| e.to_model.as_str())
        .collect();
    for e in events.iter().filter(|e| e.kind == EventKind::VersionReuse) {
        assert!(stored.contains(&e.to_model.as_str()), "{}", e.to_model);
    }
    for row in &r.per_interval {
        let g = &plan.goals;
        assert!(row.tau_e_i >= g.tau_min() && row.tau_e_i <= g.tau_max());
        assert!((0.0..=1.0).contains(&row.metrics.s_i));
    }
}

#[test]
fn shipped_decision_map_matches_defaults() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/decision_map.json");
    let goals = sustainloop::knowledge::load_decision_map(path).unwrap();
    assert_eq!(goals, SustainabilityGoals::default());
}
