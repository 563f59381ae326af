//! Per-node feedback manager for maintenance scheduling.
//!
//! Each node runs one manager with three independently evaluated policies,
//! one per maintenance operation. A policy aggregates sub-policies that each
//! look at a single signal in isolation:
//!
//! * NEMO — maintenance runs that changed nothing (wasted effort, push the
//!   interval up),
//! * ER — failed accesses to maintained peers (under-maintenance, pull the
//!   interval down),
//! * LILT — mean completion time of locally issued lookups (pull down).
//!
//! A sub-policy proposes `current * (1 +/- P)` where
//! `P = 1 - 1/((value - t)/k + 1)` for values above the threshold `t`, else
//! 0. Smaller `k` means a sharper response. The aggregation policy applies
//! the mean of all proposals and additionally schedules one immediate run of
//! the operation whenever an error was seen in the window.

use gamf::{AdapterDescriptor, AdapterKind, Event, Gamf, KnowledgeFilter, MetricValue, Record, TriggerSpec};

use crate::overlay::{MaintenanceOp, MaintenanceOutcome, OverlayEvent, OverlayEventKind, PeerRole};

/// Interval floor; multiplicative decreases never reach zero but float drift
/// and immediate-execution bursts need a hard stop.
pub const MIN_INTERVAL_MS: f64 = 100.0;

pub const DEFAULT_EVAL_INTERVAL_MS: u64 = 2000;
pub const DEFAULT_INITIAL_INTERVAL_MS: f64 = 2000.0;

/// Event type tags used in a node's knowledge store.
pub mod event_types {
    use crate::overlay::{MaintenanceOp, PeerRole};

    pub const LOOKUP_COMPLETED: &str = "lookup_completed";
    pub const LOOKUP_FAILED: &str = "lookup_failed";
    pub const JOIN_FAILED: &str = "join_failed";

    pub fn maintenance(op: MaintenanceOp) -> &'static str {
        match op {
            MaintenanceOp::Stabilize => "maint_stabilize",
            MaintenanceOp::FixNextFinger => "maint_fix_next_finger",
            MaintenanceOp::CheckPredecessor => "maint_check_predecessor",
        }
    }

    pub fn access_failure(role: PeerRole) -> &'static str {
        match role {
            PeerRole::Successor => "fail_successor",
            PeerRole::Finger => "fail_finger",
            PeerRole::Predecessor => "fail_predecessor",
        }
    }

    /// The failure tag feeding the error-rate signal of `op`.
    pub fn error_source(op: MaintenanceOp) -> &'static str {
        match op {
            MaintenanceOp::Stabilize => access_failure(super::PeerRole::Successor),
            MaintenanceOp::FixNextFinger => access_failure(super::PeerRole::Finger),
            MaintenanceOp::CheckPredecessor => access_failure(super::PeerRole::Predecessor),
        }
    }
}

/// Translate an overlay observation into a knowledge-store event.
pub fn knowledge_event(ev: &OverlayEvent) -> Event {
    match &ev.kind {
        OverlayEventKind::MaintenanceOutcome { op, outcome } => {
            let outcome = match outcome {
                MaintenanceOutcome::Effective => "effective",
                MaintenanceOutcome::NonEffective => "non_effective",
                MaintenanceOutcome::AccessFailed => "access_failed",
            };
            Event::new(event_types::maintenance(*op), ev.at_ms).with("outcome", outcome)
        }
        OverlayEventKind::PeerAccessFailed { role } => {
            Event::new(event_types::access_failure(*role), ev.at_ms)
        }
        OverlayEventKind::LookupCompleted { elapsed_ms } => {
            Event::new(event_types::LOOKUP_COMPLETED, ev.at_ms).with("elapsed_ms", elapsed_ms)
        }
        OverlayEventKind::LookupFailed { elapsed_ms } => {
            Event::new(event_types::LOOKUP_FAILED, ev.at_ms).with("elapsed_ms", elapsed_ms)
        }
        OverlayEventKind::JoinFailed => Event::new(event_types::JOIN_FAILED, ev.at_ms),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Nemo,
    Er,
    Lilt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increase,
    Decrease,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubPolicyParams {
    /// Metric values at or below the threshold leave the interval alone.
    pub t: f64,
    /// Rate constant; infinity disables the sub-policy (P stays 0).
    pub k: f64,
    pub direction: Direction,
}

impl SubPolicyParams {
    pub fn new(t: f64, k: f64, direction: Direction) -> Self {
        assert!(k > 0.0, "rate constant must be positive");
        assert!(t >= 0.0, "threshold must be non-negative");
        SubPolicyParams { t, k, direction }
    }
}

/// The change proportion: 0 at or below the threshold, approaching 1 as the
/// metric value grows, faster for smaller `k`.
pub fn proportion(metric_value: f64, t: f64, k: f64) -> f64 {
    if metric_value <= t || k.is_infinite() {
        0.0
    } else {
        1.0 - 1.0 / ((metric_value - t) / k + 1.0)
    }
}

/// One sub-policy's interval proposal, floored at [`MIN_INTERVAL_MS`].
pub fn sub_policy_interval(current_ms: f64, metric_value: f64, p: &SubPolicyParams) -> f64 {
    assert!(current_ms > 0.0);
    let prop = proportion(metric_value, p.t, p.k);
    let new = match p.direction {
        Direction::Increase => current_ms * (1.0 + prop),
        Direction::Decrease => current_ms * (1.0 - prop),
    };
    new.max(MIN_INTERVAL_MS)
}

/// Mean of the sub-policy proposals.
pub fn aggregate_responses(responses: &[f64]) -> f64 {
    assert!(!responses.is_empty(), "no sub-policy responses");
    responses.iter().sum::<f64>() / responses.len() as f64
}

/// Configuration of one operation's policy.
#[derive(Debug, Clone)]
pub struct OpPolicyConfig {
    pub op: MaintenanceOp,
    pub sub_policies: Vec<(MetricKind, SubPolicyParams)>,
    pub eval_interval_ms: u64,
    pub initial_interval_ms: f64,
    /// Run the operation once, immediately, when an error shows up in the
    /// evaluation window.
    pub immediate_on_error: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicySetId {
    Policy0,
    Policy1,
    Policy2,
    Custom,
}

impl PolicySetId {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicySetId::Policy0 => "policy0",
            PolicySetId::Policy1 => "policy1",
            PolicySetId::Policy2 => "policy2",
            PolicySetId::Custom => "custom",
        }
    }
}

/// Three op policies making up one node's manager configuration.
#[derive(Debug, Clone)]
pub struct PolicySet {
    pub id: PolicySetId,
    pub ops: Vec<OpPolicyConfig>,
}

fn op_config(
    op: MaintenanceOp,
    nemo: Option<SubPolicyParams>,
    er: Option<SubPolicyParams>,
    lilt: Option<SubPolicyParams>,
    immediate_on_error: bool,
) -> OpPolicyConfig {
    let mut sub_policies = Vec::new();
    if let Some(p) = nemo {
        sub_policies.push((MetricKind::Nemo, p));
    }
    if let Some(p) = er {
        sub_policies.push((MetricKind::Er, p));
    }
    // The predecessor check never touches lookups, so lookup speed says
    // nothing about it.
    if op != MaintenanceOp::CheckPredecessor {
        if let Some(p) = lilt {
            sub_policies.push((MetricKind::Lilt, p));
        }
    }
    OpPolicyConfig {
        op,
        sub_policies,
        eval_interval_ms: DEFAULT_EVAL_INTERVAL_MS,
        initial_interval_ms: DEFAULT_INITIAL_INTERVAL_MS,
        immediate_on_error,
    }
}

impl PolicySet {
    /// Static baseline: sub-policies disabled, no immediate repairs. The
    /// management machinery still runs so its overhead is comparable.
    pub fn policy0() -> Self {
        let off = SubPolicyParams::new(0.0, f64::INFINITY, Direction::Increase);
        let off_dec = SubPolicyParams::new(0.0, f64::INFINITY, Direction::Decrease);
        PolicySet {
            id: PolicySetId::Policy0,
            ops: MaintenanceOp::ALL
                .iter()
                .map(|op| op_config(*op, Some(off), Some(off_dec), Some(off_dec), false))
                .collect(),
        }
    }

    /// The tuned parameter set: NEMO(k=8), ER(k=32), LILT disabled by
    /// k = infinity with threshold 1600 ms.
    pub fn policy1() -> Self {
        let nemo = SubPolicyParams::new(0.0, 8.0, Direction::Increase);
        let er = SubPolicyParams::new(0.0, 32.0, Direction::Decrease);
        let lilt = SubPolicyParams::new(1600.0, f64::INFINITY, Direction::Decrease);
        PolicySet {
            id: PolicySetId::Policy1,
            ops: MaintenanceOp::ALL
                .iter()
                .map(|op| op_config(*op, Some(nemo), Some(er), Some(lilt), true))
                .collect(),
        }
    }

    /// Aggressive variant: smaller rate constants react harder to both
    /// wasted effort and errors; lookup times are ignored entirely.
    pub fn policy2() -> Self {
        let nemo = SubPolicyParams::new(0.0, 2.0, Direction::Increase);
        let er = SubPolicyParams::new(0.0, 8.0, Direction::Decrease);
        let lilt = SubPolicyParams::new(1600.0, f64::INFINITY, Direction::Decrease);
        PolicySet {
            id: PolicySetId::Policy2,
            ops: MaintenanceOp::ALL
                .iter()
                .map(|op| op_config(*op, Some(nemo), Some(er), Some(lilt), true))
                .collect(),
        }
    }

    pub fn by_id(id: PolicySetId) -> Self {
        match id {
            PolicySetId::Policy0 => Self::policy0(),
            PolicySetId::Policy1 => Self::policy1(),
            PolicySetId::Policy2 => Self::policy2(),
            PolicySetId::Custom => panic!("custom policy sets are built directly"),
        }
    }
}

/// Count of no-effect runs of `op` among the given records.
pub fn extract_nemo(records: &[Record], op: MaintenanceOp) -> f64 {
    records
        .iter()
        .filter_map(Record::as_event)
        .filter(|e| {
            e.event_type == event_types::maintenance(op)
                && e.payload.get("outcome").map(String::as_str) == Some("non_effective")
        })
        .count() as f64
}

/// Count of failed accesses feeding `op`'s error signal.
pub fn extract_er(records: &[Record], op: MaintenanceOp) -> f64 {
    records
        .iter()
        .filter_map(Record::as_event)
        .filter(|e| e.event_type == event_types::error_source(op))
        .count() as f64
}

/// Mean completion time of locally issued lookups; an empty window counts
/// as the ideal value 0.
pub fn extract_lilt(records: &[Record]) -> f64 {
    let times: Vec<f64> = records
        .iter()
        .filter_map(Record::as_event)
        .filter(|e| e.event_type == event_types::LOOKUP_COMPLETED)
        .filter_map(|e| e.payload.get("elapsed_ms")?.parse::<f64>().ok())
        .collect();
    if times.is_empty() {
        0.0
    } else {
        times.iter().sum::<f64>() / times.len() as f64
    }
}

/// Result of one policy evaluation for one operation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutcome {
    pub op: MaintenanceOp,
    pub new_interval_ms: f64,
    pub error_seen: bool,
    /// Execute the operation once right now, on top of its schedule.
    pub immediate: bool,
}

fn evaluator_id(op: MaintenanceOp) -> String {
    format!("eval_{}", op.as_str())
}

fn extractor_id(kind: &str, op: MaintenanceOp) -> String {
    format!("{kind}_{}", op.as_str())
}

/// One node's manager: a knowledge store plus the registered adapters that
/// implement the three interval policies.
pub struct NodeManager {
    pub gamf: Gamf,
    policy: PolicySet,
}

pub const GENERATOR_ID: &str = "overlay_events";
pub const EFFECTOR_ID: &str = "interval_effector";

impl NodeManager {
    /// Build a manager whose evaluation cadence starts at `now`; a node that
    /// (re)joins mid-run gets fresh knowledge and a fresh schedule.
    pub fn new(policy: PolicySet, now: u64) -> Self {
        let mut gamf = Gamf::new();
        // The overlay is the only source of these event types; claiming them
        // and protecting the core adapters guards against a reassembled
        // manager stepping on them.
        gamf.register_adapter(
            AdapterDescriptor::new(GENERATOR_ID, AdapterKind::EventGenerator)
                .facet("maintenance")
                .claims([
                    event_types::LOOKUP_COMPLETED,
                    event_types::LOOKUP_FAILED,
                    event_types::JOIN_FAILED,
                    event_types::maintenance(MaintenanceOp::Stabilize),
                    event_types::maintenance(MaintenanceOp::FixNextFinger),
                    event_types::maintenance(MaintenanceOp::CheckPredecessor),
                    event_types::access_failure(PeerRole::Successor),
                    event_types::access_failure(PeerRole::Finger),
                    event_types::access_failure(PeerRole::Predecessor),
                ])
                .protected(),
        )
        .expect("fresh registry");
        gamf.register_adapter(
            AdapterDescriptor::new(EFFECTOR_ID, AdapterKind::Effector)
                .facet("maintenance")
                .protected(),
        )
        .expect("fresh registry");
        // Anchor the periodic evaluation schedule at the registration time.
        gamf.advance(now).expect("fresh store accepts any start time");
        for cfg in &policy.ops {
            for kind in ["nemo", "er", "lilt"] {
                gamf.register_adapter(
                    AdapterDescriptor::new(extractor_id(kind, cfg.op), AdapterKind::MetricExtractor)
                        .facet("maintenance"),
                )
                .expect("fresh registry");
            }
            gamf.register_adapter_with_trigger(
                AdapterDescriptor::new(evaluator_id(cfg.op), AdapterKind::PolicyEvaluator)
                    .facet("maintenance"),
                TriggerSpec::Periodic {
                    interval_ms: cfg.eval_interval_ms,
                },
            )
            .expect("fresh registry");
        }
        NodeManager { gamf, policy }
    }

    pub fn policy(&self) -> &PolicySet {
        &self.policy
    }

    /// Store one overlay observation.
    pub fn ingest(&mut self, ev: &OverlayEvent) {
        self.gamf
            .record_event(GENERATOR_ID, knowledge_event(ev))
            .expect("overlay events are claimed by the overlay generator");
    }

    /// Advance the trigger engine to `now` and run every policy evaluation
    /// that came due. `current` is read per fired op and updated in place
    /// (the effector write).
    pub fn advance(
        &mut self,
        now: u64,
        current: &mut crate::overlay::OpIntervals,
    ) -> Vec<EvalOutcome> {
        let fired = self.gamf.advance(now).expect("monotonic manager time");
        let mut out = Vec::new();
        for firing in fired {
            let Some(cfg) = self
                .policy
                .ops
                .iter()
                .find(|c| evaluator_id(c.op) == firing.adapter_id)
                .cloned()
            else {
                continue;
            };
            out.push(self.evaluate_op(&cfg, firing.at_ms, current));
        }
        out
    }

    /// Evaluate one op policy over the records that arrived since its last
    /// evaluation. Only events not yet analysed are considered; each
    /// extractor keeps its own cursor.
    fn evaluate_op(
        &mut self,
        cfg: &OpPolicyConfig,
        now: u64,
        current: &mut crate::overlay::OpIntervals,
    ) -> EvalOutcome {
        let op = cfg.op;
        let nemo_records = self.gamf.query(
            &extractor_id("nemo", op),
            &KnowledgeFilter::all()
                .types([event_types::maintenance(op)])
                .consume(),
        );
        let nemo = extract_nemo(&nemo_records, op);
        let er_records = self.gamf.query(
            &extractor_id("er", op),
            &KnowledgeFilter::all()
                .types([event_types::error_source(op)])
                .consume(),
        );
        let er = er_records.len() as f64;
        let lilt_records = self.gamf.query(
            &extractor_id("lilt", op),
            &KnowledgeFilter::all()
                .types([event_types::LOOKUP_COMPLETED])
                .consume(),
        );
        let lilt = extract_lilt(&lilt_records);

        for (name, value) in [("nemo", nemo), ("er", er), ("lilt", lilt)] {
            self.gamf
                .record_metric(
                    &extractor_id(name, op),
                    MetricValue::new(format!("{name}_{}", op.as_str()), now, value),
                )
                .expect("finite metric");
        }

        let current_ms = current.get(op);
        let responses: Vec<f64> = cfg
            .sub_policies
            .iter()
            .map(|(kind, params)| {
                let value = match kind {
                    MetricKind::Nemo => nemo,
                    MetricKind::Er => er,
                    MetricKind::Lilt => lilt,
                };
                sub_policy_interval(current_ms, value, params)
            })
            .collect();
        let new_interval_ms = if responses.is_empty() {
            current_ms
        } else {
            aggregate_responses(&responses)
        };
        current.set(op, new_interval_ms);

        let error_seen = er > 0.0;
        EvalOutcome {
            op,
            new_interval_ms,
            error_seen,
            immediate: error_seen && cfg.immediate_on_error,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gamf::Event;

    fn maint_event(op: MaintenanceOp, outcome: &str, t: u64) -> Record {
        Record::Event(Event::new(event_types::maintenance(op), t).with("outcome", outcome))
    }

    #[test]
    fn proportion_hand_values() {
        assert_eq!(proportion(8.0, 0.0, 8.0), 0.5);
        assert_eq!(proportion(0.0, 0.0, 8.0), 0.0);
        assert_eq!(proportion(5.0, 5.0, 8.0), 0.0);
        assert_eq!(proportion(100.0, 0.0, f64::INFINITY), 0.0);
        // 1 - 1/((24-8)/8 + 1) = 1 - 1/3
        assert!((proportion(24.0, 8.0, 8.0) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sub_policy_interval_direct_evaluation() {
        let inc = SubPolicyParams::new(0.0, 8.0, Direction::Increase);
        assert_eq!(sub_policy_interval(2000.0, 8.0, &inc), 3000.0);
        let dec = SubPolicyParams::new(0.0, 8.0, Direction::Decrease);
        assert_eq!(sub_policy_interval(2000.0, 8.0, &dec), 1000.0);
    }

    #[test]
    fn threshold_leaves_interval_unchanged() {
        let p = SubPolicyParams::new(5.0, 8.0, Direction::Increase);
        assert_eq!(sub_policy_interval(2000.0, 5.0, &p), 2000.0);
        assert_eq!(sub_policy_interval(2000.0, 0.0, &p), 2000.0);
    }

    #[test]
    fn huge_metric_clamps_decrease_at_floor() {
        let p = SubPolicyParams::new(0.0, 1.0, Direction::Decrease);
        // P -> 1, so current * (1 - P) -> 0, held at the floor.
        assert_eq!(sub_policy_interval(2000.0, 1e12, &p), MIN_INTERVAL_MS);
    }

    #[test]
    fn proportion_stays_in_unit_interval_and_is_monotone() {
        let mut last = -1.0;
        for i in 0..10_000 {
            let v = i as f64 * 0.5;
            let p = proportion(v, 3.0, 7.0);
            assert!((0.0..1.0).contains(&p));
            assert!(p >= last);
            last = p;
        }
    }

    #[test]
    fn aggregation_is_the_mean() {
        assert_eq!(aggregate_responses(&[3000.0, 1000.0]), 2000.0);
    }

    #[test]
    fn nemo_counts_only_non_effective_of_the_op() {
        let records = vec![
            maint_event(MaintenanceOp::Stabilize, "effective", 1),
            maint_event(MaintenanceOp::Stabilize, "non_effective", 2),
            maint_event(MaintenanceOp::Stabilize, "non_effective", 3),
            maint_event(MaintenanceOp::Stabilize, "non_effective", 4),
            maint_event(MaintenanceOp::Stabilize, "effective", 5),
            maint_event(MaintenanceOp::FixNextFinger, "non_effective", 6),
            maint_event(MaintenanceOp::Stabilize, "access_failed", 7),
        ];
        assert_eq!(extract_nemo(&records, MaintenanceOp::Stabilize), 3.0);
        assert_eq!(extract_nemo(&records, MaintenanceOp::CheckPredecessor), 0.0);
    }

    #[test]
    fn er_separates_failure_sources() {
        let records = vec![
            Record::Event(Event::new("fail_finger", 1)),
            Record::Event(Event::new("fail_finger", 2)),
            Record::Event(Event::new("fail_successor", 3)),
        ];
        assert_eq!(extract_er(&records, MaintenanceOp::FixNextFinger), 2.0);
        assert_eq!(extract_er(&records, MaintenanceOp::Stabilize), 1.0);
        assert_eq!(extract_er(&records, MaintenanceOp::CheckPredecessor), 0.0);
    }

    #[test]
    fn lilt_is_the_mean_of_completed_lookups() {
        let records = vec![
            Record::Event(Event::new("lookup_completed", 1).with("elapsed_ms", 400)),
            Record::Event(Event::new("lookup_completed", 2).with("elapsed_ms", 600)),
            Record::Event(Event::new("lookup_failed", 3).with("elapsed_ms", 90_000)),
        ];
        assert_eq!(extract_lilt(&records), 500.0);
        assert_eq!(extract_lilt(&[]), 0.0);
    }

    #[test]
    fn check_predecessor_policy_has_no_lilt() {
        for set in [PolicySet::policy1(), PolicySet::policy2()] {
            let cp = set
                .ops
                .iter()
                .find(|c| c.op == MaintenanceOp::CheckPredecessor)
                .unwrap();
            assert!(cp
                .sub_policies
                .iter()
                .all(|(kind, _)| *kind != MetricKind::Lilt));
            assert_eq!(cp.sub_policies.len(), 2);
        }
    }

    #[test]
    fn policy0_keeps_interval_static_forever() {
        let mut mgr = NodeManager::new(PolicySet::policy0(), 0);
        let mut intervals = crate::overlay::OpIntervals::uniform(2000.0);
        for step in 1..=50u64 {
            // Feed a busy, error-laden window; the static policy must not move.
            mgr.ingest(&OverlayEvent {
                at_ms: step * 2000 - 1,
                node: 0,
                kind: OverlayEventKind::MaintenanceOutcome {
                    op: MaintenanceOp::Stabilize,
                    outcome: MaintenanceOutcome::NonEffective,
                },
            });
            mgr.ingest(&OverlayEvent {
                at_ms: step * 2000 - 1,
                node: 0,
                kind: OverlayEventKind::PeerAccessFailed {
                    role: PeerRole::Successor,
                },
            });
            let outcomes = mgr.advance(step * 2000, &mut intervals);
            assert_eq!(outcomes.len(), 3);
            for o in outcomes {
                assert_eq!(o.new_interval_ms, 2000.0);
                assert!(!o.immediate);
            }
        }
        assert_eq!(intervals.stabilize, 2000.0);
    }

    #[test]
    fn errors_request_immediate_execution_once_per_window() {
        let mut mgr = NodeManager::new(PolicySet::policy1(), 0);
        let mut intervals = crate::overlay::OpIntervals::uniform(2000.0);
        mgr.ingest(&OverlayEvent {
            at_ms: 100,
            node: 0,
            kind: OverlayEventKind::PeerAccessFailed {
                role: PeerRole::Successor,
            },
        });
        let outcomes = mgr.advance(2000, &mut intervals);
        let stab = outcomes
            .iter()
            .find(|o| o.op == MaintenanceOp::Stabilize)
            .unwrap();
        assert!(stab.error_seen && stab.immediate);
        assert!(stab.new_interval_ms < 2000.0);
        // The error was consumed; the next window is quiet.
        let outcomes = mgr.advance(4000, &mut intervals);
        let stab = outcomes
            .iter()
            .find(|o| o.op == MaintenanceOp::Stabilize)
            .unwrap();
        assert!(!stab.error_seen && !stab.immediate);
    }

    #[test]
    fn wasted_effort_raises_interval_by_the_mean_of_proposals() {
        let mut mgr = NodeManager::new(PolicySet::policy1(), 0);
        let mut intervals = crate::overlay::OpIntervals::uniform(2000.0);
        for _ in 0..8 {
            mgr.ingest(&OverlayEvent {
                at_ms: 500,
                node: 0,
                kind: OverlayEventKind::MaintenanceOutcome {
                    op: MaintenanceOp::FixNextFinger,
                    outcome: MaintenanceOutcome::NonEffective,
                },
            });
        }
        mgr.advance(2000, &mut intervals);
        // NEMO=8 proposes 3000, ER and LILT propose no change: mean 7000/3.
        assert!((intervals.fix_next_finger - 7000.0 / 3.0).abs() < 1e-9);
    }
}
