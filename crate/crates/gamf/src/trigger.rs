use crate::knowledge::Event;

/// Caller-defined trigger logic for schedules the built-in modes cannot
/// express, e.g. firing on every 100th event of a type, or when a type has
/// been silent for some time.
pub trait CustomTrigger: Send {
    /// Inspect a newly stored event. Returning true fires the owning adapter
    /// at the event's timestamp.
    fn on_event(&mut self, _event: &Event) -> bool {
        false
    }

    /// Inspect a time advance. Returning true fires the owning adapter at
    /// `now_ms`.
    fn on_advance(&mut self, _now_ms: u64) -> bool {
        false
    }
}

/// When a registered adapter is executed.
pub enum TriggerSpec {
    /// Fire every `interval_ms`, first at registration time + interval.
    Periodic { interval_ms: u64 },
    /// Fire whenever an event of this type is stored.
    OnEvent { event_type: String },
    /// Fire whenever the boxed logic says so.
    Custom(Box<dyn CustomTrigger>),
}

impl std::fmt::Debug for TriggerSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TriggerSpec::Periodic { interval_ms } => {
                write!(f, "Periodic {{ interval_ms: {interval_ms} }}")
            }
            TriggerSpec::OnEvent { event_type } => {
                write!(f, "OnEvent {{ event_type: {event_type} }}")
            }
            TriggerSpec::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}
