use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Switch,
    Retrain,
    VersionReuse,
    ThresholdUpdate,
    NoAction,
}

impl EventKind {
    /// True for the kinds that count as adaptations in run summaries.
    pub fn is_adaptation(self) -> bool {
        matches!(self, Self::Switch | Self::Retrain | Self::VersionReuse)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Trigger {
    Performance,
    Energy,
    Drift,
    Periodic,
    None,
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Audit record of one loop outcome.
///
/// `loop_energy` is the managing-system energy attributed to the event: the
/// per-invocation loop overhead on `ThresholdUpdate`, the training charge on
/// `Retrain`, zero otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationEvent {
    pub interval: usize,
    pub kind: EventKind,
    pub trigger: Trigger,
    pub from_model: String,
    pub to_model: String,
    pub detail: String,
    pub loop_energy: f64,
}

impl AdaptationEvent {
    pub fn is_consistent(&self) -> bool {
        match self.kind {
            EventKind::Retrain => matches!(self.trigger, Trigger::Drift | Trigger::Periodic),
            EventKind::VersionReuse => self.trigger == Trigger::Drift,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    events: Vec<AdaptationEvent>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn log_event(&mut self, event: AdaptationEvent) {
        debug_assert!(event.is_consistent(), "inconsistent event {event:?}");
        self.events.push(event);
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[AdaptationEvent] {
        &self.events
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn n_adaptations(&self) -> usize {
        self.events.iter().filter(|e| e.kind.is_adaptation()).count()
    }

    /// JSON Lines, one event per line, fields in declaration order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serialization is infallible"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> serde_json::Result<Self> {
        let events = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<serde_json::Result<Vec<_>>>()?;
        Ok(Self { events })
    }
}
