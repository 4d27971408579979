//! Maps detected uncertainties onto adaptation actions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analyzer::{Uncertainty, UncertaintyKind};
use crate::error::{Error, Result};
use crate::knowledge::{SustainabilityGoals, Trigger, VersionedModelRepository};
use crate::monitor::Histogram;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionKind {
    SwitchTo(String),
    ReuseVersion(String),
    RetrainCurrent,
    NoOp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationAction {
    pub kind: ActionKind,
    pub trigger: Trigger,
    pub decided_at: usize,
    /// Short reason recorded in the event log.
    pub note: String,
}

impl AdaptationAction {
    fn new(kind: ActionKind, trigger: Trigger, decided_at: usize, note: impl Into<String>) -> Self {
        Self {
            kind,
            trigger,
            decided_at,
            note: note.into(),
        }
    }

    pub fn is_noop(&self) -> bool {
        self.kind == ActionKind::NoOp
    }
}

impl From<UncertaintyKind> for Trigger {
    fn from(kind: UncertaintyKind) -> Self {
        match kind {
            UncertaintyKind::DriftDetected => Trigger::Drift,
            UncertaintyKind::EnergyViolation => Trigger::Energy,
            UncertaintyKind::PerformanceDegradation => Trigger::Performance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoardEntry {
    pub model_id: String,
    pub ema: f64,
    /// Per-inference cost, used to break EMA ties.
    pub infer_cost: f64,
}

/// Per-model smoothed scores for the current model repository.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScoreBoard {
    pub entries: Vec<BoardEntry>,
    pub active: String,
    pub last_adaptation: Option<usize>,
}

impl ModelScoreBoard {
    pub fn ema(&self, model_id: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.model_id == model_id).map(|e| e.ema)
    }

    pub fn set_ema(&mut self, model_id: &str, ema: f64) {
        if let Some(e) = self.entries.iter_mut().find(|e| e.model_id == model_id) {
            e.ema = ema;
        }
    }

    pub fn in_cooldown(&self, interval: usize, cooldown: usize) -> bool {
        self.last_adaptation
            .is_some_and(|last| interval.saturating_sub(last) <= cooldown)
    }
}

/// Highest EMA among the non-active models; ties go to the cheaper model, then the smaller id.
pub fn select_exploit(board: &ModelScoreBoard) -> Result<String> {
    board
        .entries
        .iter()
        .filter(|e| e.model_id != board.active)
        .max_by(|a, b| {
            a.ema
                .total_cmp(&b.ema)
                .then(b.infer_cost.total_cmp(&a.infer_cost))
                .then(b.model_id.cmp(&a.model_id))
        })
        .map(|e| e.model_id.clone())
        .ok_or(Error::NoAlternative(board.entries.len()))
}

/// With probability `epsilon` a uniformly random repository model (the active
/// one included), otherwise [`select_exploit`]. Consumes exactly one uniform
/// draw per call, plus one index draw when exploring.
pub fn epsilon_greedy<R: Rng + ?Sized>(
    board: &ModelScoreBoard,
    epsilon: f64,
    rng: &mut R,
) -> Result<String> {
    let u: f64 = rng.random();
    if u < epsilon && !board.entries.is_empty() {
        let k = rng.random_range(0..board.entries.len());
        Ok(board.entries[k].model_id.clone())
    } else {
        select_exploit(board)
    }
}

/// Reuse the closest archived version if one is within `tau_match`, else retrain.
pub fn plan_drift(
    current: &Histogram,
    vmr: &VersionedModelRepository,
    goals: &SustainabilityGoals,
    interval: usize,
) -> Result<AdaptationAction> {
    Ok(match vmr.match_distribution(current, goals.tau_match)? {
        Some(entry) => AdaptationAction::new(
            ActionKind::ReuseVersion(entry.version_id.clone()),
            Trigger::Drift,
            interval,
            "matched archived distribution",
        ),
        None => AdaptationAction::new(
            ActionKind::RetrainCurrent,
            Trigger::Drift,
            interval,
            "no archived match",
        ),
    })
}

/// Which drift tactics the planner may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tactics {
    pub version_reuse: bool,
    pub retrain_on_drift: bool,
}

impl Tactics {
    pub const FULL: Tactics = Tactics {
        version_reuse: true,
        retrain_on_drift: true,
    };
    pub const SWITCH_ONLY: Tactics = Tactics {
        version_reuse: false,
        retrain_on_drift: false,
    };
}

pub struct PlanContext<'a> {
    pub interval: usize,
    pub uncertainties: &'a [Uncertainty],
    pub board: &'a ModelScoreBoard,
    pub current_histogram: &'a Histogram,
    pub vmr: &'a VersionedModelRepository,
    pub goals: &'a SustainabilityGoals,
    pub tactics: Tactics,
}

/// Picks one action for the highest-priority uncertainty.
pub fn plan<R: Rng + ?Sized>(ctx: &PlanContext<'_>, rng: &mut R) -> Result<AdaptationAction> {
    let interval = ctx.interval;
    let Some(top) = ctx.uncertainties.iter().min_by_key(|u| u.kind) else {
        return Ok(AdaptationAction::new(ActionKind::NoOp, Trigger::None, interval, ""));
    };
    let trigger = Trigger::from(top.kind);
    if ctx.board.in_cooldown(interval, ctx.goals.cooldown) {
        return Ok(AdaptationAction::new(ActionKind::NoOp, trigger, interval, "cooldown"));
    }
    match top.kind {
        UncertaintyKind::DriftDetected => {
            if ctx.tactics.version_reuse || ctx.tactics.retrain_on_drift {
                let action = if ctx.tactics.version_reuse {
                    plan_drift(ctx.current_histogram, ctx.vmr, ctx.goals, interval)?
                } else {
                    AdaptationAction::new(
                        ActionKind::RetrainCurrent,
                        Trigger::Drift,
                        interval,
                        "version reuse disabled",
                    )
                };
                if action.kind != ActionKind::RetrainCurrent || ctx.tactics.retrain_on_drift {
                    return Ok(action);
                }
            }
            switch_exploit(ctx.board, trigger, interval, "drift handled by switching")
        }
        UncertaintyKind::EnergyViolation => switch_exploit(ctx.board, trigger, interval, "exploit"),
        UncertaintyKind::PerformanceDegradation => {
            let pick = epsilon_greedy(ctx.board, ctx.goals.epsilon, rng)?;
            if pick == ctx.board.active {
                Ok(AdaptationAction::new(
                    ActionKind::NoOp,
                    trigger,
                    interval,
                    "explored active model",
                ))
            } else {
                Ok(AdaptationAction::new(
                    ActionKind::SwitchTo(pick),
                    trigger,
                    interval,
                    "epsilon-greedy",
                ))
            }
        }
    }
}

fn switch_exploit(
    board: &ModelScoreBoard,
    trigger: Trigger,
    interval: usize,
    note: &str,
) -> Result<AdaptationAction> {
    let target = select_exploit(board)?;
    Ok(AdaptationAction::new(ActionKind::SwitchTo(target), trigger, interval, note))
}
