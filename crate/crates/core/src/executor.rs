//! Enacts planned actions on the managed system.

use crate::error::{Error, Result};
use crate::forecasting::{make_supervised, train, EnergyCostModel, Family, OpKind, TrainedModel, LAG};
use crate::knowledge::{AdaptationEvent, EventKind, VersionedModelRepository};
use crate::monitor::{estimate_histogram, Histogram, HistogramEdges};
use crate::planner::{ActionKind, AdaptationAction};

/// Readings used for every retrain.
pub const RETRAIN_WINDOW: usize = 1200;

/// A deployable model paired with the distribution it was fitted on.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSlot {
    pub model: TrainedModel,
    pub histogram: Histogram,
}

/// The current model repository: one slot per family, each holding the most
/// recent model of that family that was trained or restored.
#[derive(Debug, Clone)]
pub struct CurrentRepository {
    slots: Vec<ModelSlot>,
}

impl CurrentRepository {
    pub fn new(slots: Vec<ModelSlot>) -> Self {
        Self { slots }
    }

    /// Slot addressed by family id (`linear`, `kernel`, `recurrent`).
    pub fn get(&self, id: &str) -> Option<&ModelSlot> {
        self.slots.iter().find(|s| s.model.family.id() == id)
    }

    fn replace(&mut self, slot: ModelSlot) {
        match self.slots.iter_mut().find(|s| s.model.family == slot.model.family) {
            Some(s) => *s = slot,
            None => self.slots.push(slot),
        }
    }

    pub fn slots(&self) -> &[ModelSlot] {
        &self.slots
    }
}

#[derive(Debug, Clone)]
pub struct DeploymentState {
    pub active: ModelSlot,
    pub deployed_at: usize,
}

impl DeploymentState {
    pub fn model(&self) -> &TrainedModel {
        &self.active.model
    }

    pub fn reference(&self) -> &Histogram {
        &self.active.histogram
    }

    pub fn family(&self) -> Family {
        self.active.model.family
    }
}

/// Everything execute may read or mutate for one action.
pub struct ExecutionContext<'a> {
    pub deployment: &'a mut DeploymentState,
    pub repository: &'a mut CurrentRepository,
    pub vmr: &'a mut VersionedModelRepository,
    /// All readings observed so far, oldest first.
    pub history: &'a [f64],
    /// Series index at which the action takes effect.
    pub timestep: usize,
    pub edges: &'a HistogramEdges,
    pub cost_model: &'a EnergyCostModel,
    pub run_seed: u64,
}

/// Training seed for a retrain decided at `interval`.
pub fn retrain_seed(run_seed: u64, interval: usize) -> u64 {
    run_seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(interval as u64)
}

/// Applies `action` and returns its audit event and the training energy charged.
pub fn execute(action: &AdaptationAction, ctx: ExecutionContext<'_>) -> Result<(AdaptationEvent, f64)> {
    let from = ctx.deployment.model().model_id.clone();
    let interval = action.decided_at;
    let (kind, slot, detail, energy) = match &action.kind {
        ActionKind::NoOp => {
            return Err(Error::Plan("cannot execute a no-op action".into()));
        }
        ActionKind::SwitchTo(id) => {
            let slot = ctx
                .repository
                .get(id)
                .ok_or_else(|| Error::UnknownModel(id.clone()))?
                .clone();
            (EventKind::Switch, slot, action.note.clone(), 0.0)
        }
        ActionKind::ReuseVersion(vid) => {
            let entry = ctx
                .vmr
                .get(vid)
                .ok_or_else(|| Error::UnknownVersion(vid.clone()))?;
            let slot = ModelSlot {
                model: entry
                    .model
                    .clone()
                    .with_id(format!("{}@{vid}", entry.model.family.id())),
                histogram: entry.train_histogram.clone(),
            };
            ctx.repository.replace(slot.clone());
            (EventKind::VersionReuse, slot, format!("reused {vid}"), 0.0)
        }
        ActionKind::RetrainCurrent => {
            let needed = RETRAIN_WINDOW + LAG;
            let available = ctx.history.len();
            if available < needed {
                return Err(Error::InsufficientData { needed, available });
            }
            let start = available - needed;
            let window = &ctx.history[start..];
            let set = make_supervised(window, LAG)?;
            let family = ctx.deployment.family();
            let seed = retrain_seed(ctx.run_seed, interval);
            let model = train(family, &set, seed)?.with_segment(start, available);
            let histogram = estimate_histogram(set.targets(), ctx.edges);
            let vid = ctx.vmr.store_version(model.clone(), histogram.clone(), ctx.timestep);
            let slot = ModelSlot {
                model: model.with_id(format!("{}@{vid}", family.id())),
                histogram,
            };
            ctx.repository.replace(slot.clone());
            let energy = ctx.cost_model.charge(OpKind::Train, family, 1);
            (EventKind::Retrain, slot, format!("stored {vid}"), energy)
        }
    };
    let to = slot.model.model_id.clone();
    ctx.deployment.active = slot;
    ctx.deployment.deployed_at = interval;
    Ok((
        AdaptationEvent {
            interval,
            kind,
            trigger: action.trigger,
            from_model: from,
            to_model: to,
            detail,
            loop_energy: energy,
        },
        energy,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::Trigger;

    fn series(n: usize) -> Vec<f64> {
        (0..n)
            .map(|t| 100.0 + 50.0 * (t as f64 * 2.0 * std::f64::consts::PI / 60.0).sin())
            .collect()
    }

    fn setup() -> (DeploymentState, CurrentRepository, VersionedModelRepository, HistogramEdges) {
        let s = series(300);
        let edges = HistogramEdges::from_range(&s, 20);
        let set = make_supervised(&s, LAG).unwrap();
        let slots: Vec<ModelSlot> = Family::ALL
            .into_iter()
            .map(|f| ModelSlot {
                model: train(f, &set, 1).unwrap(),
                histogram: estimate_histogram(&s, &edges),
            })
            .collect();
        let deployment = DeploymentState {
            active: slots[2].clone(),
            deployed_at: 0,
        };
        (deployment, CurrentRepository::new(slots), VersionedModelRepository::new(4), edges)
    }

    fn action(kind: ActionKind, trigger: Trigger) -> AdaptationAction {
        AdaptationAction {
            kind,
            trigger,
            decided_at: 3,
            note: String::new(),
        }
    }

    #[test]
    fn switch_charges_nothing() {
        let (mut dep, mut repo, mut vmr, edges) = setup();
        let history = series(2000);
        let (event, energy) = execute(
            &action(ActionKind::SwitchTo("linear".into()), Trigger::Energy),
            ExecutionContext {
                deployment: &mut dep,
                repository: &mut repo,
                vmr: &mut vmr,
                history: &history,
                timestep: 2000,
                edges: &edges,
                cost_model: &EnergyCostModel::default(),
                run_seed: 1,
            },
        )
        .unwrap();
        assert_eq!(dep.family(), Family::Linear);
        assert_eq!(energy, 0.0);
        assert_eq!(event.kind, EventKind::Switch);
        assert_eq!(vmr.len(), 0);
        assert_eq!(dep.reference(), &repo.get("linear").unwrap().histogram);
    }

    #[test]
    fn retrain_stores_version_and_charges() {
        let (mut dep, mut repo, mut vmr, edges) = setup();
        let history = series(2000);
        let (event, energy) = execute(
            &action(ActionKind::RetrainCurrent, Trigger::Drift),
            ExecutionContext {
                deployment: &mut dep,
                repository: &mut repo,
                vmr: &mut vmr,
                history: &history,
                timestep: 2000,
                edges: &edges,
                cost_model: &EnergyCostModel::default(),
                run_seed: 1,
            },
        )
        .unwrap();
        assert_eq!(vmr.len(), 1);
        assert_eq!(energy, 6000.0);
        assert_eq!(event.loop_energy, 6000.0);
        assert_eq!(event.kind, EventKind::Retrain);
        assert_eq!(dep.family(), Family::Recurrent);
        assert_eq!(dep.model().model_id, "recurrent@v1");
        let stored = vmr.get("v1").unwrap();
        assert_eq!(dep.reference(), &stored.train_histogram);
        assert_eq!(stored.model.params, dep.model().params);
        assert_eq!(stored.model.trained_on.end - stored.model.trained_on.start, 1205);
    }

    fn run(
        a: AdaptationAction,
        dep: &mut DeploymentState,
        repo: &mut CurrentRepository,
        vmr: &mut VersionedModelRepository,
        edges: &HistogramEdges,
        history: &[f64],
    ) -> (AdaptationEvent, f64) {
        execute(
            &a,
            ExecutionContext {
                deployment: dep,
                repository: repo,
                vmr,
                history,
                timestep: history.len(),
                edges,
                cost_model: &EnergyCostModel::default(),
                run_seed: 1,
            },
        )
        .unwrap()
    }

    #[test]
    fn reuse_deploys_stored_copy() {
        let (mut dep, mut repo, mut vmr, edges) = setup();
        let history = series(2000);
        run(action(ActionKind::RetrainCurrent, Trigger::Drift), &mut dep, &mut repo, &mut vmr, &edges, &history);
        run(action(ActionKind::SwitchTo("linear".into()), Trigger::Energy), &mut dep, &mut repo, &mut vmr, &edges, &history);
        assert_eq!(dep.family(), Family::Linear);
        let (event, energy) = run(
            action(ActionKind::ReuseVersion("v1".into()), Trigger::Drift),
            &mut dep,
            &mut repo,
            &mut vmr,
            &edges,
            &history,
        );
        assert_eq!(energy, 0.0);
        assert_eq!(event.kind, EventKind::VersionReuse);
        assert_eq!(event.to_model, "recurrent@v1");
        assert_eq!(vmr.len(), 1);
        assert_eq!(dep.model().params, vmr.get("v1").unwrap().model.params);
        assert_eq!(dep.reference(), &vmr.get("v1").unwrap().train_histogram);
    }

    #[test]
    fn retrain_needs_history() {
        let (mut dep, mut repo, mut vmr, edges) = setup();
        let history = series(1000);
        let err = execute(
            &action(ActionKind::RetrainCurrent, Trigger::Periodic),
            ExecutionContext {
                deployment: &mut dep,
                repository: &mut repo,
                vmr: &mut vmr,
                history: &history,
                timestep: 1000,
                edges: &edges,
                cost_model: &EnergyCostModel::default(),
                run_seed: 1,
            },
        );
        assert!(matches!(err, Err(Error::InsufficientData { needed: 1205, available: 1000 })));
    }

    #[test]
    fn unknown_targets() {
        let (mut dep, mut repo, mut vmr, edges) = setup();
        let history = series(2000);
        for kind in [ActionKind::SwitchTo("lstm".into()), ActionKind::ReuseVersion("v9".into())] {
            let err = execute(
                &action(kind, Trigger::Drift),
                ExecutionContext {
                    deployment: &mut dep,
                    repository: &mut repo,
                    vmr: &mut vmr,
                    history: &history,
                    timestep: 2000,
                    edges: &edges,
                    cost_model: &EnergyCostModel::default(),
                    run_seed: 1,
                },
            );
            assert!(matches!(err, Err(Error::UnknownModel(_) | Error::UnknownVersion(_))));
        }
    }
}
