use std::collections::{BTreeMap, BTreeSet};

/// Free-form string map attached to events and metrics. Adapters own the
/// semantics of the entries; the framework never interprets them.
pub type Payload = BTreeMap<String, String>;

/// A time-stamped observation of something that happened in the target system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub event_type: String,
    /// Simulated time in milliseconds.
    pub timestamp: u64,
    pub payload: Payload,
}

impl Event {
    pub fn new(event_type: impl Into<String>, timestamp: u64) -> Self {
        Event {
            event_type: event_type.into(),
            timestamp,
            payload: Payload::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.payload.insert(key.into(), value.to_string());
        self
    }
}

/// A numerical metric value computed by a metric extractor.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricValue {
    pub metric_type: String,
    /// Simulated time in milliseconds.
    pub timestamp: u64,
    pub value: f64,
    pub info: Payload,
}

impl MetricValue {
    pub fn new(metric_type: impl Into<String>, timestamp: u64, value: f64) -> Self {
        MetricValue {
            metric_type: metric_type.into(),
            timestamp,
            value,
            info: Payload::new(),
        }
    }
}

/// One entry of the shared knowledge store.
#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    Event(Event),
    Metric(MetricValue),
}

impl Record {
    /// The event type or metric type tag.
    pub fn tag(&self) -> &str {
        match self {
            Record::Event(e) => &e.event_type,
            Record::Metric(m) => &m.metric_type,
        }
    }

    pub fn timestamp(&self) -> u64 {
        match self {
            Record::Event(e) => e.timestamp,
            Record::Metric(m) => m.timestamp,
        }
    }

    pub fn as_event(&self) -> Option<&Event> {
        match self {
            Record::Event(e) => Some(e),
            Record::Metric(_) => None,
        }
    }

    pub fn as_metric(&self) -> Option<&MetricValue> {
        match self {
            Record::Metric(m) => Some(m),
            Record::Event(_) => None,
        }
    }
}

/// Selects records from the shared knowledge store.
///
/// Matching is by type tag and half-open time window `[from_ms, to_ms)`.
/// With `consume_since_last` set, the querying adapter only sees records it
/// has not seen before: the store keeps one cursor per (adapter, type) pair
/// and bumps it on every consuming query.
#[derive(Debug, Clone)]
pub struct KnowledgeFilter {
    pub type_filter: Option<BTreeSet<String>>,
    pub from_ms: u64,
    pub to_ms: u64,
    pub consume_since_last: bool,
}

impl Default for KnowledgeFilter {
    fn default() -> Self {
        KnowledgeFilter {
            type_filter: None,
            from_ms: 0,
            to_ms: u64::MAX,
            consume_since_last: false,
        }
    }
}

impl KnowledgeFilter {
    /// Everything ever recorded.
    pub fn all() -> Self {
        Self::default()
    }

    pub fn types<I, S>(mut self, types: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.type_filter = Some(types.into_iter().map(Into::into).collect());
        self
    }

    pub fn window(mut self, from_ms: u64, to_ms: u64) -> Self {
        assert!(from_ms <= to_ms, "window must satisfy from <= to");
        self.from_ms = from_ms;
        self.to_ms = to_ms;
        self
    }

    pub fn consume(mut self) -> Self {
        self.consume_since_last = true;
        self
    }

    pub(crate) fn matches(&self, record: &Record) -> bool {
        let ts = record.timestamp();
        if ts < self.from_ms || ts >= self.to_ms {
            return false;
        }
        match &self.type_filter {
            Some(set) => set.contains(record.tag()),
            None => true,
        }
    }
}
