use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};

use crate::error::GamfError;
use crate::knowledge::{Event, KnowledgeFilter, MetricValue, Record};
use crate::registry::{AdapterDescriptor, AdapterKind};
use crate::trigger::TriggerSpec;

/// One execution of a triggered adapter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Firing {
    pub at_ms: u64,
    pub adapter_id: String,
}

struct RegisteredAdapter {
    descriptor: AdapterDescriptor,
    trigger: Option<TriggerSpec>,
    /// Next due time of a periodic trigger.
    next_due: Option<u64>,
}

/// Handle for callers that share one store across threads. Each locked call
/// is atomic, which is all the concurrency contract promises.
pub type SharedGamf = Arc<Mutex<Gamf>>;

/// The shared knowledge store, adapter registry and trigger engine.
///
/// Knowledge is append-only: nothing ever mutates or deletes a stored record.
/// All times are simulated milliseconds supplied by the caller.
pub struct Gamf {
    store: Vec<Record>,
    adapters: BTreeMap<String, RegisteredAdapter>,
    /// Ids in registration order; event-arrival triggers fire in this order.
    registration_order: Vec<String>,
    /// (adapter, type tag) -> index of the first unconsumed record.
    cursors: HashMap<(String, String), usize>,
    last_advance: u64,
    firing_log: Vec<Firing>,
}

/// Cursor key used when a consuming query has no type filter.
const ANY_TYPE: &str = "*";

impl Default for Gamf {
    fn default() -> Self {
        Self::new()
    }
}

impl Gamf {
    pub fn new() -> Self {
        Gamf {
            store: Vec::new(),
            adapters: BTreeMap::new(),
            registration_order: Vec::new(),
            cursors: HashMap::new(),
            last_advance: 0,
            firing_log: Vec::new(),
        }
    }

    pub fn shared() -> SharedGamf {
        Arc::new(Mutex::new(Gamf::new()))
    }

    /// Register an adapter without any trigger.
    pub fn register_adapter(&mut self, descriptor: AdapterDescriptor) -> Result<(), GamfError> {
        self.register_adapter_with_trigger(descriptor, None)
    }

    /// Register an adapter together with the trigger that executes it.
    pub fn register_adapter_with_trigger(
        &mut self,
        descriptor: AdapterDescriptor,
        trigger: impl Into<Option<TriggerSpec>>,
    ) -> Result<(), GamfError> {
        let trigger = trigger.into();
        if self.adapters.contains_key(&descriptor.adapter_id) {
            return Err(GamfError::DuplicateAdapter(descriptor.adapter_id.clone()));
        }
        if descriptor.kind == AdapterKind::EventGenerator {
            for ty in &descriptor.claimed_event_types {
                if let Some(owner) = self.claim_owner(ty) {
                    return Err(GamfError::ClaimConflict {
                        event_type: ty.clone(),
                        claimed_by: owner.to_string(),
                    });
                }
            }
        }
        let next_due = match &trigger {
            Some(TriggerSpec::Periodic { interval_ms }) => {
                if *interval_ms == 0 {
                    return Err(GamfError::ZeroInterval);
                }
                Some(self.last_advance + interval_ms)
            }
            _ => None,
        };
        self.registration_order.push(descriptor.adapter_id.clone());
        self.adapters.insert(
            descriptor.adapter_id.clone(),
            RegisteredAdapter {
                descriptor,
                trigger,
                next_due,
            },
        );
        Ok(())
    }

    /// Remove an adapter. Protected adapters stay put.
    pub fn unregister(&mut self, adapter_id: &str) -> Result<(), GamfError> {
        let adapter = self
            .adapters
            .get(adapter_id)
            .ok_or_else(|| GamfError::UnknownAdapter(adapter_id.to_string()))?;
        if adapter.descriptor.protected {
            return Err(GamfError::ProtectedAdapter(adapter_id.to_string()));
        }
        self.adapters.remove(adapter_id);
        self.registration_order.retain(|id| id != adapter_id);
        Ok(())
    }

    pub fn adapter(&self, adapter_id: &str) -> Option<&AdapterDescriptor> {
        self.adapters.get(adapter_id).map(|a| &a.descriptor)
    }

    /// All registered adapters with the given facet, in id order.
    pub fn adapters_for_facet(&self, facet: &str) -> Vec<&AdapterDescriptor> {
        self.adapters
            .values()
            .map(|a| &a.descriptor)
            .filter(|d| d.facet == facet)
            .collect()
    }

    fn claim_owner(&self, event_type: &str) -> Option<&str> {
        self.adapters.values().find_map(|a| {
            (a.descriptor.kind == AdapterKind::EventGenerator
                && a.descriptor.claimed_event_types.contains(event_type))
            .then_some(a.descriptor.adapter_id.as_str())
        })
    }

    /// Store an event on behalf of `generator_id` and fire matching
    /// event-arrival triggers synchronously, in registration order.
    /// Returns the adapter ids that fired.
    pub fn record_event(
        &mut self,
        generator_id: &str,
        event: Event,
    ) -> Result<Vec<String>, GamfError> {
        if event.event_type.is_empty() {
            return Err(GamfError::InvalidEvent("empty event type".to_string()));
        }
        if let Some(owner) = self.claim_owner(&event.event_type) {
            if owner != generator_id {
                return Err(GamfError::ClaimViolation {
                    generator: generator_id.to_string(),
                    event_type: event.event_type.clone(),
                    claimed_by: owner.to_string(),
                });
            }
        }
        let at_ms = event.timestamp;
        let event_type = event.event_type.clone();
        self.store.push(Record::Event(event));

        let mut fired = Vec::new();
        for id in self.registration_order.clone() {
            let adapter = self.adapters.get_mut(&id).expect("registered id");
            let fires = match &mut adapter.trigger {
                Some(TriggerSpec::OnEvent { event_type: et }) => *et == event_type,
                Some(TriggerSpec::Custom(custom)) => {
                    let Record::Event(stored) = self.store.last().expect("just pushed") else {
                        unreachable!()
                    };
                    custom.on_event(stored)
                }
                _ => false,
            };
            if fires {
                self.firing_log.push(Firing {
                    at_ms,
                    adapter_id: id.clone(),
                });
                fired.push(id);
            }
        }
        Ok(fired)
    }

    /// Store a metric value computed by `extractor_id`.
    pub fn record_metric(
        &mut self,
        _extractor_id: &str,
        metric: MetricValue,
    ) -> Result<(), GamfError> {
        if !metric.value.is_finite() {
            return Err(GamfError::NonFiniteMetric(metric.value));
        }
        self.store.push(Record::Metric(metric));
        Ok(())
    }

    /// Advance simulated time, firing every periodic trigger due at or before
    /// `now`, catching up if several intervals passed. Firing order is
    /// (due time, adapter id). Custom triggers are consulted once at `now`.
    pub fn advance(&mut self, now: u64) -> Result<Vec<Firing>, GamfError> {
        if now < self.last_advance {
            return Err(GamfError::TimeRegression {
                current: self.last_advance,
                requested: now,
            });
        }
        let mut fired = Vec::new();
        loop {
            // Smallest (due, id) among due periodic triggers; BTreeMap order
            // breaks due-time ties by adapter id.
            let next = self
                .adapters
                .iter()
                .filter_map(|(id, a)| a.next_due.filter(|d| *d <= now).map(|d| (d, id.clone())))
                .min();
            let Some((due, id)) = next else { break };
            let adapter = self.adapters.get_mut(&id).expect("registered id");
            if let Some(TriggerSpec::Periodic { interval_ms }) = &adapter.trigger {
                adapter.next_due = Some(due + interval_ms);
            }
            let firing = Firing {
                at_ms: due,
                adapter_id: id,
            };
            self.firing_log.push(firing.clone());
            fired.push(firing);
        }
        for id in self.registration_order.clone() {
            let adapter = self.adapters.get_mut(&id).expect("registered id");
            if let Some(TriggerSpec::Custom(custom)) = &mut adapter.trigger {
                if custom.on_advance(now) {
                    let firing = Firing {
                        at_ms: now,
                        adapter_id: id.clone(),
                    };
                    self.firing_log.push(firing.clone());
                    fired.push(firing);
                }
            }
        }
        self.last_advance = now;
        Ok(fired)
    }

    /// Records matching the filter, ordered by timestamp then insertion
    /// order. A consuming query advances the caller's per-type cursor so the
    /// next consuming query only sees newer records.
    pub fn query(&mut self, adapter_id: &str, filter: &KnowledgeFilter) -> Vec<Record> {
        let cursor_keys: Vec<String> = match &filter.type_filter {
            Some(set) => set.iter().cloned().collect(),
            None => vec![ANY_TYPE.to_string()],
        };
        let min_index = |cursors: &HashMap<(String, String), usize>, tag: &str| -> usize {
            let key = match &filter.type_filter {
                Some(_) => (adapter_id.to_string(), tag.to_string()),
                None => (adapter_id.to_string(), ANY_TYPE.to_string()),
            };
            cursors.get(&key).copied().unwrap_or(0)
        };
        // Nothing before the smallest involved cursor can match a consuming
        // query, so the scan starts there; the store only ever appends.
        let scan_from = if filter.consume_since_last {
            cursor_keys
                .iter()
                .map(|key| min_index(&self.cursors, key))
                .min()
                .unwrap_or(0)
        } else {
            0
        };
        let mut result: Vec<Record> = self
            .store
            .iter()
            .enumerate()
            .skip(scan_from)
            .filter(|(idx, r)| {
                filter.matches(r)
                    && (!filter.consume_since_last || *idx >= min_index(&self.cursors, r.tag()))
            })
            .map(|(_, r)| r.clone())
            .collect();
        result.sort_by_key(|r| r.timestamp());
        if filter.consume_since_last {
            for key in cursor_keys {
                self.cursors
                    .insert((adapter_id.to_string(), key), self.store.len());
            }
        }
        result
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }

    pub fn firing_log(&self) -> &[Firing] {
        &self.firing_log
    }

    /// Newline-delimited dump `timestamp,kind,type,value,info` with the info
    /// map joined as `k=v&k=v` and percent-encoded.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for record in &self.store {
            let (kind, ty, value, info) = match record {
                Record::Event(e) => ("event", &e.event_type, String::new(), &e.payload),
                Record::Metric(m) => ("metric", &m.metric_type, m.value.to_string(), &m.info),
            };
            let info = info
                .iter()
                .map(|(k, v)| {
                    format!(
                        "{}={}",
                        utf8_percent_encode(k, NON_ALPHANUMERIC),
                        utf8_percent_encode(v, NON_ALPHANUMERIC)
                    )
                })
                .collect::<Vec<_>>()
                .join("&");
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                record.timestamp(),
                kind,
                ty,
                value,
                info
            ));
        }
        out
    }
}
