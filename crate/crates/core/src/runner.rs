//! Experiment execution: a discrete-event driver that wires the overlay,
//! per-node managers, churn and workloads together, a store-client driver
//! for concurrency experiments, and the artifact plumbing (plans, CSV
//! output, summaries).

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use gamf::{AdapterDescriptor, AdapterKind, Event, Gamf, KnowledgeFilter, Record, TriggerSpec};
use rand::Rng;

use crate::analytics::{
    self, window_aggregate, LookupRecord, LookupRecordOutcome, UlmWindow, DEFAULT_RETRY_CAP,
    WINDOW_MS,
};
use crate::doc_model::{
    doc_policy_step, edtt, extract_doc_metrics, rank_servers, simulate_get, DocPolicyConfig,
    DocPolicyMode, DocWindowData, FetchSimConfig, ServerMonitor, EDTT_REF_SIZE_BITS,
};
use crate::manager::{NodeManager, PolicySet, PolicySetId};
use crate::overlay::{
    LookupOutcome, MaintenanceOp, NodeId, OverlayConfig, OverlaySim,
};
use crate::ring::RingKey;
use crate::scenario::{
    build_churn_schedule, ChurnParams, ChurnPattern, ChurnSchedule, LinkSpeedKind,
    LinkSpeedSchedule, WorkloadPlan,
};
use crate::seeds;

pub const RING_WALK_INTERVAL_MS: u64 = 50_000;

/// One overlay experiment cell.
#[derive(Debug, Clone)]
pub struct OverlayScenario {
    pub nodes: usize,
    pub key_bits: u32,
    pub churn: ChurnPattern,
    pub churn_params: ChurnParams,
    pub workload: WorkloadPlan,
    /// None runs completely unmanaged (not even management overhead).
    pub policy: Option<PolicySetId>,
    pub horizon_ms: u64,
    pub warmup_ms: u64,
    pub link_latency_ms: u64,
    pub node_service_ms: u64,
    pub dead_timeout_ms: u64,
    pub retry_cap: u32,
    pub window_ms: u64,
    pub seed: u64,
}

impl OverlayScenario {
    pub fn new(churn: ChurnPattern, workload: WorkloadPlan, policy: Option<PolicySetId>, seed: u64) -> Self {
        OverlayScenario {
            nodes: 16,
            key_bits: 32,
            churn,
            churn_params: ChurnParams::overlay(),
            workload,
            policy,
            horizon_ms: 40 * 60_000,
            warmup_ms: 60_000,
            link_latency_ms: 10,
            // Message handling dominates on a middleware-heavy deployment;
            // this is what makes maintenance compete with lookups for a
            // node's attention.
            node_service_ms: 120,
            dead_timeout_ms: 500,
            retry_cap: DEFAULT_RETRY_CAP,
            window_ms: WINDOW_MS,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPoint {
    pub at_ms: u64,
    pub node: NodeId,
    pub op: MaintenanceOp,
    pub interval_ms: f64,
}

#[derive(Debug, Clone)]
pub struct OverlayRunResult {
    pub lookups: Vec<LookupRecord>,
    pub windows: Vec<UlmWindow>,
    pub holistic_elt_ms: Option<f64>,
    pub interval_trace: Vec<IntervalPoint>,
    pub encounters: Vec<(u64, usize)>,
    pub total_bytes: u64,
    /// First issue and last completion of the workload.
    pub run_span_ms: (u64, u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum DriverEvent {
    Maintenance { node: NodeId, op: u8, epoch: u64 },
    Evaluation { node: NodeId, epoch: u64 },
    ChurnDown { node: NodeId },
    ChurnUp { node: NodeId },
    Batch { index: usize },
    RingWalk,
}

fn op_from_u8(code: u8) -> MaintenanceOp {
    MaintenanceOp::ALL[code as usize]
}

fn op_to_u8(op: MaintenanceOp) -> u8 {
    MaintenanceOp::ALL.iter().position(|o| *o == op).unwrap() as u8
}

/// The discrete-event driver for one overlay run.
struct Driver {
    scn: OverlayScenario,
    sim: OverlaySim,
    managers: Vec<Option<NodeManager>>,
    epochs: Vec<u64>,
    heap: BinaryHeap<Reverse<(u64, u64, DriverEvent)>>,
    seq: u64,
    gateway: NodeId,
    lookups: Vec<LookupRecord>,
    interval_trace: Vec<IntervalPoint>,
    encounters: Vec<(u64, usize)>,
    batch_done_at: u64,
    workload_done: bool,
}

impl Driver {
    fn new(scn: OverlayScenario) -> Self {
        let cfg = OverlayConfig {
            key_bits: scn.key_bits,
            link_latency_ms: scn.link_latency_ms,
            node_service_ms: scn.node_service_ms,
            dead_timeout_ms: scn.dead_timeout_ms,
            ..OverlayConfig::default()
        };
        let mut sim = OverlaySim::new(cfg);
        let mut id_rng = seeds::rng(scn.seed, "node-ids", 0);
        let mut seen = std::collections::BTreeSet::new();
        while seen.len() < scn.nodes {
            seen.insert(RingKey::random(&mut id_rng, scn.key_bits));
        }
        // Set order is value order; shuffle-free but deterministic. The
        // gateway gets the first drawn layout slot.
        for id in seen {
            sim.add_node(id);
        }
        let gateway = 0;
        sim.bootstrap_first(gateway);

        let managers = (0..scn.nodes).map(|_| None).collect();
        let mut driver = Driver {
            sim,
            managers,
            epochs: vec![0; scn.nodes],
            heap: BinaryHeap::new(),
            seq: 0,
            gateway,
            lookups: Vec::new(),
            interval_trace: Vec::new(),
            encounters: Vec::new(),
            batch_done_at: 0,
            workload_done: false,
            scn,
        };
        driver.start_node(gateway, 0);

        // Remaining nodes come up shortly after another through the gateway.
        for node in 1..driver.scn.nodes {
            driver.schedule(node as u64 * 200, DriverEvent::ChurnUp { node });
        }
        // Churn begins once the ring had its warm-up; the gateway is exempt
        // so the workload always has an entry point.
        let churn = build_churn_schedule(
            driver.scn.churn,
            &driver.scn.churn_params,
            driver.scn.nodes,
            driver.scn.horizon_ms * 2,
            seeds::sub_seed(driver.scn.seed, "churn-root", 0),
        );
        for (node, spans) in churn.iter().enumerate().skip(1) {
            for (down_at, up_at) in spans {
                driver.schedule(driver.scn.warmup_ms + down_at, DriverEvent::ChurnDown { node });
                driver.schedule(driver.scn.warmup_ms + up_at, DriverEvent::ChurnUp { node });
            }
        }
        driver.schedule(driver.scn.warmup_ms, DriverEvent::RingWalk);
        driver
    }

    fn schedule(&mut self, at: u64, ev: DriverEvent) {
        self.heap.push(Reverse((at, self.seq, ev)));
        self.seq += 1;
    }

    /// Bring a node online: fresh timers, fresh manager, epoch bump.
    fn start_node(&mut self, node: NodeId, t: u64) {
        self.epochs[node] += 1;
        let epoch = self.epochs[node];
        for op in MaintenanceOp::ALL {
            let due = t + self.sim.node(node).intervals.get(op).round() as u64;
            self.schedule(due, DriverEvent::Maintenance { node, op: op_to_u8(op), epoch });
        }
        if let Some(policy) = self.scn.policy {
            let mgr = NodeManager::new(PolicySet::by_id(policy), t);
            let eval_interval = mgr.policy().ops[0].eval_interval_ms;
            self.managers[node] = Some(mgr);
            self.schedule(t + eval_interval, DriverEvent::Evaluation { node, epoch });
        }
    }

    fn route_events(&mut self) {
        for ev in self.sim.drain_events() {
            if let Some(mgr) = &mut self.managers[ev.node] {
                mgr.ingest(&ev);
            }
        }
    }

    fn execute_op(&mut self, node: NodeId, op: MaintenanceOp, t: u64) {
        match op {
            MaintenanceOp::Stabilize => {
                self.sim.stabilize(node, t);
            }
            MaintenanceOp::FixNextFinger => {
                self.sim.fix_next_finger(node, t);
            }
            MaintenanceOp::CheckPredecessor => {
                self.sim.check_predecessor(node, t);
            }
        }
        self.route_events();
    }

    fn handle(&mut self, t: u64, ev: DriverEvent) {
        match ev {
            DriverEvent::Maintenance { node, op, epoch } => {
                if epoch != self.epochs[node] || !self.sim.node(node).alive {
                    return;
                }
                let op = op_from_u8(op);
                self.execute_op(node, op, t);
                let due = t + self.sim.node(node).intervals.get(op).round().max(1.0) as u64;
                self.schedule(due, DriverEvent::Maintenance { node, op: op_to_u8(op), epoch });
            }
            DriverEvent::Evaluation { node, epoch } => {
                if epoch != self.epochs[node] || !self.sim.node(node).alive {
                    return;
                }
                let Some(mgr) = &mut self.managers[node] else {
                    return;
                };
                let mut intervals = self.sim.node(node).intervals;
                let outcomes = mgr.advance(t, &mut intervals);
                let eval_interval = mgr.policy().ops[0].eval_interval_ms;
                for outcome in &outcomes {
                    self.sim.set_interval(node, outcome.op, outcome.new_interval_ms);
                    self.interval_trace.push(IntervalPoint {
                        at_ms: t,
                        node,
                        op: outcome.op,
                        interval_ms: outcome.new_interval_ms,
                    });
                }
                // Repairs jump the queue when the window saw an error.
                for outcome in outcomes {
                    if outcome.immediate {
                        self.execute_op(node, outcome.op, t);
                    }
                }
                self.schedule(t + eval_interval, DriverEvent::Evaluation { node, epoch });
            }
            DriverEvent::ChurnDown { node } => {
                if self.sim.node(node).alive {
                    self.sim.kill(node);
                    self.epochs[node] += 1;
                }
            }
            DriverEvent::ChurnUp { node } => {
                if self.sim.node(node).alive || !self.sim.node(self.gateway).alive {
                    return;
                }
                let joined = self.sim.join(node, self.gateway, t);
                self.route_events();
                if joined {
                    self.start_node(node, t);
                }
            }
            DriverEvent::Batch { index } => {
                let batch = self.scn.workload.batches[index].clone();
                let mut completion = t;
                for key in &batch.keys {
                    let outcome = self.sim.client_lookup(self.gateway, key, t);
                    self.route_events();
                    let elapsed = outcome.elapsed_ms();
                    completion = completion.max(t + elapsed);
                    self.lookups.push(LookupRecord {
                        issued_at_ms: t,
                        outcome: match outcome {
                            LookupOutcome::Success { .. } => LookupRecordOutcome::Success {
                                lt_ms: elapsed as f64,
                            },
                            LookupOutcome::Failure { .. } => LookupRecordOutcome::Failure {
                                let_ms: elapsed as f64,
                            },
                        },
                    });
                }
                self.batch_done_at = completion;
                match self.scn.workload.batches.get(index + 1) {
                    Some(next) => {
                        let at = match next.start {
                            crate::scenario::BatchStart::AfterPrev { gap_ms } => {
                                completion + gap_ms
                            }
                            crate::scenario::BatchStart::AtOffset { offset_ms } => {
                                (self.scn.warmup_ms + offset_ms).max(completion)
                            }
                        };
                        self.schedule(at, DriverEvent::Batch { index: index + 1 });
                    }
                    None => self.workload_done = true,
                }
            }
            DriverEvent::RingWalk => {
                let count = self.sim.ring_walk(self.gateway, t);
                self.route_events();
                self.encounters.push((t, count));
                self.schedule(t + RING_WALK_INTERVAL_MS, DriverEvent::RingWalk);
            }
        }
    }

    /// Run until the workload is done (when one is scheduled) or until the
    /// given time. The hard cap guards against runaway configurations.
    fn run(&mut self, until_ms: Option<u64>) {
        let cap = self.scn.warmup_ms + self.scn.horizon_ms.saturating_mul(20);
        while let Some(Reverse((t, _, ev))) = self.heap.pop() {
            if let Some(until) = until_ms {
                if t > until {
                    break;
                }
            }
            if t > cap {
                break;
            }
            self.handle(t, ev);
            if self.workload_done && until_ms.is_none() {
                break;
            }
        }
    }
}

/// Run one overlay cell to workload completion.
pub fn run_overlay_experiment(scn: &OverlayScenario) -> OverlayRunResult {
    assert!(!scn.workload.batches.is_empty(), "workload is empty");
    let mut driver = Driver::new(scn.clone());
    driver.schedule(scn.warmup_ms, DriverEvent::Batch { index: 0 });
    driver.run(None);

    let first = driver.lookups.first().map(|l| l.issued_at_ms).unwrap_or(0);
    let windows = window_aggregate(
        &driver.lookups,
        driver.sim.bytes_log(),
        scn.window_ms,
        scn.retry_cap,
    );
    let holistic = analytics::holistic_elt(&driver.lookups, scn.retry_cap).ok();
    OverlayRunResult {
        windows,
        holistic_elt_ms: holistic,
        interval_trace: driver.interval_trace,
        encounters: driver.encounters,
        total_bytes: driver.sim.total_bytes(),
        run_span_ms: (first, driver.batch_done_at),
        lookups: driver.lookups,
    }
}

/// Run churn and maintenance only (no workload) up to `until_ms` and hand
/// back the final overlay next to the interval trace.
pub fn run_overlay_until(scn: &OverlayScenario, until_ms: u64) -> (OverlaySim, Vec<IntervalPoint>) {
    let mut driver = Driver::new(scn.clone());
    driver.run(Some(until_ms));
    (driver.sim, driver.interval_trace)
}

// ---------------------------------------------------------------------------
// Store-client (DOC) experiments
// ---------------------------------------------------------------------------

/// Store-layer churn selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocChurn {
    None,
    High,
    TemporallyVarying,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocWorkloadKind {
    /// 300 sequential gets.
    Heavy,
    /// 10 gets, two minutes apart.
    Light,
    /// Bursts of 3 gets, two minutes between bursts, 30 in total.
    Variable,
}

impl DocWorkloadKind {
    /// Gap before each get request.
    pub fn gaps_ms(&self) -> Vec<u64> {
        match self {
            DocWorkloadKind::Heavy => vec![0; 300],
            DocWorkloadKind::Light => (0..10).map(|i| if i == 0 { 0 } else { 120_000 }).collect(),
            DocWorkloadKind::Variable => (0..30)
                .map(|i| if i > 0 && i % 3 == 0 { 120_000 } else { 0 })
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DocScenario {
    pub replicas: usize,
    pub size_bits: f64,
    pub link_kind: LinkSpeedKind,
    pub churn: DocChurn,
    pub workload: DocWorkloadKind,
    pub policy: DocPolicyConfig,
    /// Multiplicative error on monitored link parameters.
    pub monitor_noise: f64,
    pub probe_interval_ms: u64,
    pub horizon_ms: u64,
    pub retry_cap: u32,
    pub window_ms: u64,
    pub seed: u64,
}

impl DocScenario {
    pub fn new(
        link_kind: LinkSpeedKind,
        churn: DocChurn,
        workload: DocWorkloadKind,
        policy: DocPolicyConfig,
        seed: u64,
    ) -> Self {
        DocScenario {
            replicas: 4,
            size_bits: 1024.0 * crate::doc_model::BITS_PER_KBYTE,
            link_kind,
            churn,
            workload,
            policy,
            monitor_noise: 0.05,
            probe_interval_ms: 15_000,
            horizon_ms: 40 * 60_000,
            retry_cap: DEFAULT_RETRY_CAP,
            window_ms: WINDOW_MS,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GetRecord {
    pub issued_ms: u64,
    pub doc: u32,
    pub get_time_ms: f64,
    pub failed: bool,
    pub bytes: u64,
}

#[derive(Debug, Clone)]
pub struct DocRunResult {
    pub gets: Vec<GetRecord>,
    pub doc_trace: Vec<(u64, u32)>,
    pub windows: Vec<UlmWindow>,
    pub total_bytes: u64,
}

mod doc_events {
    pub const FETCH_INITIATED: &str = "fetch_initiated";
    pub const FETCH_FAILED: &str = "fetch_failed";
    pub const EDTT: &str = "edtt";
    pub const CLIENT_BW: &str = "client_bandwidth";
    pub const SERVER_BW: &str = "server_bandwidth";
    pub const GENERATOR: &str = "store_client";
    pub const EXTRACTOR: &str = "doc_metrics";
    pub const EVALUATOR: &str = "doc_policy";
    pub const EFFECTOR: &str = "doc_effector";
}

/// Run one store-client cell: sequential gets through a ranked replica set,
/// periodic link probes feeding the manager, periodic policy evaluations
/// adapting the concurrency degree.
pub fn run_doc_experiment(scn: &DocScenario) -> DocRunResult {
    let link = LinkSpeedSchedule::new(scn.link_kind, seeds::sub_seed(scn.seed, "links", 0));
    let churn_pattern = match scn.churn {
        DocChurn::None => None,
        DocChurn::High => Some(ChurnPattern::High),
        DocChurn::TemporallyVarying => Some(ChurnPattern::TemporallyVarying {
            phase_ms: 300_000,
        }),
    };
    let downtime: ChurnSchedule = match churn_pattern {
        Some(pattern) => build_churn_schedule(
            pattern,
            &ChurnParams::store(),
            scn.replicas,
            scn.horizon_ms,
            seeds::sub_seed(scn.seed, "doc-churn", 0),
        ),
        None => vec![Vec::new(); scn.replicas],
    };

    let mut gamf = Gamf::new();
    gamf.register_adapter(
        AdapterDescriptor::new(doc_events::GENERATOR, AdapterKind::EventGenerator)
            .facet("doc")
            .claims([
                doc_events::FETCH_INITIATED,
                doc_events::FETCH_FAILED,
                doc_events::EDTT,
                doc_events::CLIENT_BW,
                doc_events::SERVER_BW,
            ])
            .protected(),
    )
    .expect("fresh registry");
    gamf.register_adapter(
        AdapterDescriptor::new(doc_events::EXTRACTOR, AdapterKind::MetricExtractor).facet("doc"),
    )
    .expect("fresh registry");
    gamf.register_adapter(
        AdapterDescriptor::new(doc_events::EFFECTOR, AdapterKind::Effector).facet("doc"),
    )
    .expect("fresh registry");
    gamf.register_adapter_with_trigger(
        AdapterDescriptor::new(doc_events::EVALUATOR, AdapterKind::PolicyEvaluator).facet("doc"),
        TriggerSpec::Periodic {
            interval_ms: scn.policy.eval_interval_ms,
        },
    )
    .expect("fresh registry");

    let fetch_cfg = FetchSimConfig {
        replicas: scn.replicas,
        size_bits: scn.size_bits,
        header_bytes: 64,
    };
    let mut noise_rng = seeds::rng(scn.seed, "monitor-noise", 0);
    let mut noisy = |value: f64| -> f64 {
        if scn.monitor_noise == 0.0 {
            value
        } else {
            value * (1.0 + noise_rng.random_range(-scn.monitor_noise..=scn.monitor_noise))
        }
    };

    let mut monitors: Vec<ServerMonitor> = (0..scn.replicas)
        .map(|server| ServerMonitor {
            server,
            edtt_s: None,
            failed: false,
        })
        .collect();
    let server_down_at = |server: usize, t: u64| {
        downtime[server]
            .iter()
            .any(|(down, up)| *down <= t && t < *up)
    };

    let mut doc = scn.policy.initial_doc.clamp(1, scn.replicas as u32);
    let mut doc_trace = vec![(0u64, doc)];
    let mut gets: Vec<GetRecord> = Vec::new();
    let mut bytes_log: Vec<(u64, u64)> = Vec::new();
    let mut next_probe = 0u64;
    let mut clock = 0u64;

    let probe = |at: u64,
                     gamf: &mut Gamf,
                     monitors: &mut Vec<ServerMonitor>,
                     noisy: &mut dyn FnMut(f64) -> f64| {
        let (client_bw, _) = link.params_at(0, at);
        gamf.record_event(
            doc_events::GENERATOR,
            Event::new(doc_events::CLIENT_BW, at).with("bps", noisy(client_bw)),
        )
        .expect("claimed type");
        for server in 0..scn.replicas {
            if server_down_at(server, at) {
                monitors[server].failed = true;
                continue;
            }
            let (bw, lat) = link.params_at(1 + server, at);
            let bw = noisy(bw);
            let lat = noisy(lat).max(0.0);
            let estimate = edtt(lat, EDTT_REF_SIZE_BITS, bw);
            monitors[server].edtt_s = Some(estimate);
            monitors[server].failed = false;
            gamf.record_event(
                doc_events::GENERATOR,
                Event::new(doc_events::SERVER_BW, at)
                    .with("bps", bw)
                    .with("server", server),
            )
            .expect("claimed type");
            gamf.record_event(
                doc_events::GENERATOR,
                Event::new(doc_events::EDTT, at)
                    .with("seconds", estimate)
                    .with("server", server),
            )
            .expect("claimed type");
        }
    };

    let evaluate = |at: u64, gamf: &mut Gamf, doc: &mut u32, doc_trace: &mut Vec<(u64, u32)>| {
        for firing in gamf.advance(at).expect("monotonic time") {
            if firing.adapter_id != doc_events::EVALUATOR {
                continue;
            }
            let read = |g: &mut Gamf, ty: &str| {
                g.query(
                    doc_events::EXTRACTOR,
                    &KnowledgeFilter::all().types([ty]).consume(),
                )
            };
            let parse = |records: Vec<Record>, field: &str| -> Vec<f64> {
                records
                    .iter()
                    .filter_map(Record::as_event)
                    .filter_map(|e| e.payload.get(field)?.parse().ok())
                    .collect()
            };
            let initiated = read(gamf, doc_events::FETCH_INITIATED).len();
            let failed = read(gamf, doc_events::FETCH_FAILED).len();
            let window = DocWindowData {
                initiated,
                failed,
                edtts_s: parse(read(gamf, doc_events::EDTT), "seconds"),
                client_bw_bps: parse(read(gamf, doc_events::CLIENT_BW), "bps"),
                server_bw_bps: parse(read(gamf, doc_events::SERVER_BW), "bps"),
            };
            let metrics = extract_doc_metrics(&window, *doc);
            let next = doc_policy_step(&metrics, &scn.policy, scn.replicas as u32);
            if scn.policy.mode == DocPolicyMode::Autonomic {
                *doc = next;
            }
            doc_trace.push((firing.at_ms, *doc));
        }
    };

    for gap in scn.workload.gaps_ms() {
        let issue_at = clock + gap;
        while next_probe <= issue_at {
            probe(next_probe, &mut gamf, &mut monitors, &mut noisy);
            evaluate(next_probe, &mut gamf, &mut doc, &mut doc_trace);
            next_probe += scn.probe_interval_ms;
        }
        evaluate(issue_at, &mut gamf, &mut doc, &mut doc_trace);

        let ranking = rank_servers(&monitors);
        let result = simulate_get(&fetch_cfg, &link, &downtime, &ranking, doc, issue_at);
        for outcome in &result.per_fetch {
            gamf.record_event(
                doc_events::GENERATOR,
                Event::new(doc_events::FETCH_INITIATED, issue_at).with("server", outcome.server),
            )
            .expect("claimed type");
            if outcome.failed {
                gamf.record_event(
                    doc_events::GENERATOR,
                    Event::new(doc_events::FETCH_FAILED, issue_at).with("server", outcome.server),
                )
                .expect("claimed type");
                monitors[outcome.server].failed = true;
            }
        }
        let get_time_ms = result.get_time_s * 1000.0;
        bytes_log.push((issue_at, result.bytes));
        gets.push(GetRecord {
            issued_ms: issue_at,
            doc,
            get_time_ms,
            failed: result.failed,
            bytes: result.bytes,
        });
        clock = issue_at + get_time_ms.round() as u64;
    }

    let records: Vec<LookupRecord> = gets
        .iter()
        .map(|g| LookupRecord {
            issued_at_ms: g.issued_ms,
            outcome: if g.failed {
                LookupRecordOutcome::Failure { let_ms: g.get_time_ms }
            } else {
                LookupRecordOutcome::Success { lt_ms: g.get_time_ms }
            },
        })
        .collect();
    let windows = window_aggregate(&records, &bytes_log, scn.window_ms, scn.retry_cap);
    let total_bytes = gets.iter().map(|g| g.bytes).sum();
    DocRunResult {
        gets,
        doc_trace,
        windows,
        total_bytes,
    }
}
