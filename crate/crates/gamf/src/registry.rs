use std::collections::BTreeSet;

/// The four roles a system adapter can play in the control loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdapterKind {
    /// Feeds time-stamped events from the target system into the knowledge store.
    EventGenerator,
    /// Computes metric values from stored events.
    MetricExtractor,
    /// Decides a response from metric values.
    PolicyEvaluator,
    /// Applies the decided response to the target system.
    Effector,
}

/// Registration entry for one system adapter.
#[derive(Debug, Clone)]
pub struct AdapterDescriptor {
    /// Unique within one registry.
    pub adapter_id: String,
    pub kind: AdapterKind,
    /// Free-form grouping label; several adapters managing the same aspect of
    /// the target system share a facet.
    pub facet: String,
    /// Event types only this generator may record. Claims must be disjoint
    /// across generators.
    pub claimed_event_types: BTreeSet<String>,
    /// Protected adapters cannot be unregistered.
    pub protected: bool,
}

impl AdapterDescriptor {
    pub fn new(adapter_id: impl Into<String>, kind: AdapterKind) -> Self {
        AdapterDescriptor {
            adapter_id: adapter_id.into(),
            kind,
            facet: String::new(),
            claimed_event_types: BTreeSet::new(),
            protected: false,
        }
    }

    pub fn facet(mut self, facet: impl Into<String>) -> Self {
        self.facet = facet.into();
        self
    }

    pub fn claims<I, S>(mut self, types: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.claimed_event_types = types.into_iter().map(Into::into).collect();
        self
    }

    pub fn protected(mut self) -> Self {
        self.protected = true;
        self
    }
}
