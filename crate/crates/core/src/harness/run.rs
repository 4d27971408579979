//! One repetition of one approach over the test stream.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::plan::{should_periodic_retrain, Approach, ExperimentPlan};
use crate::analyzer::{detect, ThresholdState};
use crate::error::{Error, Result};
use crate::executor::{execute, CurrentRepository, DeploymentState, ExecutionContext, ModelSlot};
use crate::forecasting::{
    make_supervised, predict, train, EnergyCostModel, EnergyMeter, Family, OpKind, LAG,
};
use crate::knowledge::{
    AdaptationEvent, DataRepository, EventKind, EventLog, SustainabilityGoals, Trigger,
    VersionedModelRepository,
};
use crate::monitor::{
    aggregate_interval, estimate_histogram, mean_squared_error, performance_score, r_squared,
    HistogramEdges, IntervalInput, IntervalMetrics,
};
use crate::planner::{plan, ActionKind, AdaptationAction, BoardEntry, ModelScoreBoard, PlanContext};

/// One row of the per-interval metrics output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    #[serde(flatten)]
    pub metrics: IntervalMetrics,
    /// Energy threshold in force while the interval was evaluated.
    pub tau_e_i: f64,
    pub active_model: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub approach: Approach,
    pub rep: usize,
    pub seed: u64,
    pub total_energy: f64,
    pub energy: EnergyMeter,
    pub r2: f64,
    pub mse: f64,
    pub mean_inference_cost: f64,
    pub wall_ms_per_pred: f64,
    pub n_adaptations: usize,
    pub events: EventLog,
    pub per_interval: Vec<MetricsRow>,
    /// Normalizer for interval energy.
    pub e_max_train: f64,
}

/// Accuracy and score of a model on the validation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationScore {
    pub raw_r2: f64,
    pub accuracy: f64,
    pub score: f64,
}

/// Largest per-interval inference energy of the heaviest family over the training window.
pub fn calibrate_e_max(n_predictions: usize, interval_len: usize, cost: &EnergyCostModel) -> f64 {
    let heaviest = cost.heaviest();
    (0..n_predictions)
        .step_by(interval_len)
        .map(|start| cost.charge(OpKind::Infer, heaviest, interval_len.min(n_predictions - start)))
        .fold(0.0, f64::max)
}

fn validate_model(
    slot: &ModelSlot,
    series: &[f64],
    range: std::ops::Range<usize>,
    goals: &SustainabilityGoals,
    cost: &EnergyCostModel,
    e_max: f64,
) -> Result<ValidationScore> {
    let mut y = Vec::with_capacity(range.len());
    let mut p = Vec::with_capacity(range.len());
    for t in range {
        y.push(series[t]);
        p.push(predict(&slot.model, &series[t - LAG..t])?);
    }
    let raw_r2 = r_squared(&y, &p).unwrap_or(0.0);
    let accuracy = raw_r2.clamp(0.0, 1.0);
    let e_bar = cost.charge(OpKind::Infer, slot.model.family, goals.interval_len) / e_max;
    Ok(ValidationScore {
        raw_r2,
        accuracy,
        score: performance_score(accuracy, e_bar.clamp(0.0, 1.0), goals.beta),
    })
}

struct Loop {
    board: ModelScoreBoard,
    rng: ChaCha8Rng,
    tactics: crate::planner::Tactics,
}

/// Runs repetition `rep` of `plan` on an already drifted series.
pub fn run_repetition(series: &[f64], plan_cfg: &ExperimentPlan, rep: usize) -> Result<RunResult> {
    plan_cfg.validate()?;
    let split = plan_cfg.split;
    if series.len() < split.total() {
        return Err(Error::Plan(format!(
            "series has {} readings, split needs {}",
            series.len(),
            split.total()
        )));
    }
    let goals = &plan_cfg.goals;
    let cost = &plan_cfg.cost_model;
    let seed = plan_cfg.seed(rep);
    let approach = plan_cfg.approach;

    // Training subsystem: every family on the same window.
    let train_series = &series[..split.train];
    let edges = HistogramEdges::from_range(train_series, goals.histogram_bins);
    let train_hist = estimate_histogram(train_series, &edges);
    let set = make_supervised(train_series, LAG)?;
    let slots: Vec<ModelSlot> = Family::ALL
        .into_iter()
        .map(|f| {
            Ok(ModelSlot {
                model: train(f, &set, seed)?.with_segment(0, split.train),
                histogram: train_hist.clone(),
            })
        })
        .collect::<Result<_>>()?;
    let e_max = calibrate_e_max(set.len(), goals.interval_len, cost);
    let val_range = split.train..split.test_start();
    let scores: Vec<ValidationScore> = slots
        .iter()
        .map(|s| validate_model(s, series, val_range.clone(), goals, cost, e_max))
        .collect::<Result<_>>()?;

    let initial = match approach.static_family() {
        Some(f) => f,
        None => Family::ALL
            .into_iter()
            .zip(&scores)
            .max_by(|(fa, a), (fb, b)| a.raw_r2.total_cmp(&b.raw_r2).then(fa.cmp(fb)))
            .map(|(f, _)| f)
            .expect("non-empty"),
    };
    let initial_idx = Family::ALL.iter().position(|f| *f == initial).expect("known family");
    let mut repository = CurrentRepository::new(slots.clone());
    let mut deployment = DeploymentState {
        active: slots[initial_idx].clone(),
        deployed_at: 0,
    };
    let mut vmr = VersionedModelRepository::new(goals.vmr_capacity);

    let mut control = approach.tactics().map(|tactics| Loop {
        board: ModelScoreBoard {
            entries: Family::ALL
                .into_iter()
                .zip(&scores)
                .map(|(f, s)| BoardEntry {
                    model_id: f.id().to_string(),
                    ema: s.score,
                    infer_cost: cost.infer_cost.get(f),
                })
                .collect(),
            active: initial.id().to_string(),
            last_adaptation: None,
        },
        rng: ChaCha8Rng::seed_from_u64(seed),
        tactics,
    });

    let mut threshold = ThresholdState::new(goals);
    let mut passive_ema = Some(scores[initial_idx].score);
    let mut prev_accuracy = Some(scores[initial_idx].accuracy);
    let mut prev_raw = Some(scores[initial_idx].raw_r2);

    let test_start = split.test_start();
    let drift_window = split.train;
    let mut repo = DataRepository::with_capacity(split.test);
    let mut meter = EnergyMeter::default();
    let mut events = EventLog::new();
    let mut rows = Vec::with_capacity(split.test / goals.interval_len + 1);
    let mut wall = std::time::Duration::ZERO;
    let mut interval_start = 0;

    for t in 0..split.test {
        let idx = test_start + t;
        let interval = t / goals.interval_len;

        if approach.periodic_retraining() && should_periodic_retrain(t, plan_cfg.prt_period) {
            let action = AdaptationAction {
                kind: ActionKind::RetrainCurrent,
                trigger: Trigger::Periodic,
                decided_at: interval,
                note: format!("periodic at t={t}"),
            };
            let (event, energy) = execute(
                &action,
                ExecutionContext {
                    deployment: &mut deployment,
                    repository: &mut repository,
                    vmr: &mut vmr,
                    history: &series[..idx],
                    timestep: idx,
                    edges: &edges,
                    cost_model: cost,
                    run_seed: seed,
                },
            )?;
            meter.add(OpKind::Train, energy);
            events.log_event(event);
            if let Some(c) = control.as_mut() {
                c.board.last_adaptation = Some(interval);
            }
        }

        let window = &series[idx - LAG..idx];
        let y_pred = if plan_cfg.measure_wall_clock {
            let start = Instant::now();
            let y = predict(deployment.model(), window)?;
            wall += start.elapsed();
            y
        } else {
            predict(deployment.model(), window)?
        };
        let energy = meter.add(OpKind::Infer, cost.charge(OpKind::Infer, deployment.family(), 1));
        repo.record_observation(t, series[idx], y_pred, &deployment.model().model_id, energy)?;

        let interval_done = (t + 1) % goals.interval_len == 0 || t + 1 == split.test;
        if !interval_done {
            continue;
        }

        // Monitor
        let known = idx + 1;
        let recent_truth = &series[known.saturating_sub(drift_window)..known];
        let active_id = deployment.family().id();
        let prev_ema = match &control {
            Some(c) => c.board.ema(active_id),
            None => passive_ema,
        };
        let metrics = aggregate_interval(
            &IntervalInput {
                interval,
                records: repo.since(interval_start),
                recent_truth,
                reference: deployment.reference(),
                e_max_train: e_max,
                prev_accuracy,
                prev_raw_r2: prev_raw,
                prev_ema,
            },
            goals,
        )?;
        interval_start = repo.len();
        prev_accuracy = Some(metrics.a_i);
        prev_raw = Some(metrics.raw_r2);
        passive_ema = Some(metrics.ema_s_i);

        // Analyze: detection uses the threshold in force, then it is updated.
        let tau_e_i = threshold.tau_e;
        let uncertainties = detect(&metrics, goals, tau_e_i);
        threshold.update(interval, metrics.e_bar_i, goals);
        rows.push(MetricsRow {
            metrics: metrics.clone(),
            tau_e_i,
            active_model: deployment.model().model_id.clone(),
        });

        let Some(c) = control.as_mut() else {
            continue;
        };
        let loop_energy = meter.add(OpKind::Loop, cost.charge(OpKind::Loop, deployment.family(), 1));
        c.board.set_ema(active_id, metrics.ema_s_i);
        events.log_event(AdaptationEvent {
            interval,
            kind: EventKind::ThresholdUpdate,
            trigger: Trigger::None,
            from_model: deployment.model().model_id.clone(),
            to_model: deployment.model().model_id.clone(),
            detail: format!("tau_e {} -> {}", tau_e_i, threshold.tau_e),
            loop_energy,
        });

        // Plan
        let current_histogram = estimate_histogram(recent_truth, &edges);
        let action = plan(
            &PlanContext {
                interval,
                uncertainties: &uncertainties,
                board: &c.board,
                current_histogram: &current_histogram,
                vmr: &vmr,
                goals,
                tactics: c.tactics,
            },
            &mut c.rng,
        )?;
        if action.is_noop() {
            if action.trigger != Trigger::None {
                events.log_event(AdaptationEvent {
                    interval,
                    kind: EventKind::NoAction,
                    trigger: action.trigger,
                    from_model: deployment.model().model_id.clone(),
                    to_model: deployment.model().model_id.clone(),
                    detail: action.note.clone(),
                    loop_energy: 0.0,
                });
            }
            continue;
        }

        // Execute
        let (event, energy) = execute(
            &action,
            ExecutionContext {
                deployment: &mut deployment,
                repository: &mut repository,
                vmr: &mut vmr,
                history: &series[..known],
                timestep: known,
                edges: &edges,
                cost_model: cost,
                run_seed: seed,
            },
        )?;
        if energy > 0.0 {
            meter.add(OpKind::Train, energy);
        }
        events.log_event(event);
        c.board.active = deployment.family().id().to_string();
        c.board.last_adaptation = Some(interval);
        debug_assert!(vmr.len() <= vmr.capacity());
    }

    let y_true: Vec<f64> = repo.records().iter().map(|r| r.y_true).collect();
    let y_pred: Vec<f64> = repo.records().iter().map(|r| r.y_pred).collect();
    let r2 = r_squared(&y_true, &y_pred)?;
    let mse = mean_squared_error(&y_true, &y_pred);
    let wall_ms_per_pred = if plan_cfg.measure_wall_clock {
        wall.as_secs_f64() * 1e3 / split.test as f64
    } else {
        0.0
    };

    Ok(RunResult {
        approach,
        rep,
        seed,
        total_energy: meter.total(),
        energy: meter,
        r2,
        mse,
        mean_inference_cost: meter.inference / split.test as f64,
        wall_ms_per_pred,
        n_adaptations: events.n_adaptations(),
        events,
        per_interval: rows,
        e_max_train: e_max,
    })
}
