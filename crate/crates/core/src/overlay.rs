//! Simulated key-based-routing overlay over a discrete-event network.
//!
//! Every remote exchange is costed in simulated milliseconds and bytes.
//! Nodes are single-threaded: an operation occupies its initiator from start
//! to completion, and serving a remote message occupies the target for a
//! configurable service time. Contacting a dead node costs one fixed timeout
//! and surfaces as a peer-access failure.

use crate::ring::{in_half_open_interval, RingKey};

pub type NodeId = usize;

/// Open arc (a, b): like the half-open test but excluding b. The degenerate
/// arc (a, a) is the whole circle minus a itself.
fn in_open_interval(x: &RingKey, a: &RingKey, b: &RingKey) -> bool {
    if a == b {
        x != a
    } else {
        in_half_open_interval(x, a, b) && x != b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaintenanceOp {
    Stabilize,
    FixNextFinger,
    CheckPredecessor,
}

impl MaintenanceOp {
    pub const ALL: [MaintenanceOp; 3] = [
        MaintenanceOp::Stabilize,
        MaintenanceOp::FixNextFinger,
        MaintenanceOp::CheckPredecessor,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MaintenanceOp::Stabilize => "stabilize",
            MaintenanceOp::FixNextFinger => "fix_next_finger",
            MaintenanceOp::CheckPredecessor => "check_predecessor",
        }
    }
}

/// What a maintenance run did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaintenanceOutcome {
    /// Installed something new (successor, list entry, finger or predecessor).
    Effective,
    /// Ran and verified, changed nothing.
    NonEffective,
    /// A maintained peer could not be reached.
    AccessFailed,
}

/// Which pointer of the peer set a failed access went through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeerRole {
    Successor,
    Finger,
    Predecessor,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OverlayEventKind {
    MaintenanceOutcome {
        op: MaintenanceOp,
        outcome: MaintenanceOutcome,
    },
    PeerAccessFailed {
        role: PeerRole,
    },
    LookupCompleted {
        elapsed_ms: u64,
    },
    LookupFailed {
        elapsed_ms: u64,
    },
    JoinFailed,
}

/// Observation produced by the overlay, owned by (attributed to) one node.
/// The driver feeds these into the owning node's knowledge store.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlayEvent {
    pub at_ms: u64,
    pub node: NodeId,
    pub kind: OverlayEventKind,
}

#[derive(Debug, Clone)]
pub struct PeerSet {
    pub successor: NodeId,
    /// Successors after `successor`, self excluded, at most `successor_list_len`.
    pub successor_list: Vec<NodeId>,
    pub predecessor: Option<NodeId>,
    pub fingers: Vec<Option<NodeId>>,
    pub next_finger: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpIntervals {
    pub stabilize: f64,
    pub fix_next_finger: f64,
    pub check_predecessor: f64,
}

impl OpIntervals {
    pub fn uniform(ms: f64) -> Self {
        OpIntervals {
            stabilize: ms,
            fix_next_finger: ms,
            check_predecessor: ms,
        }
    }

    pub fn get(&self, op: MaintenanceOp) -> f64 {
        match op {
            MaintenanceOp::Stabilize => self.stabilize,
            MaintenanceOp::FixNextFinger => self.fix_next_finger,
            MaintenanceOp::CheckPredecessor => self.check_predecessor,
        }
    }

    pub fn set(&mut self, op: MaintenanceOp, ms: f64) {
        match op {
            MaintenanceOp::Stabilize => self.stabilize = ms,
            MaintenanceOp::FixNextFinger => self.fix_next_finger = ms,
            MaintenanceOp::CheckPredecessor => self.check_predecessor = ms,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: RingKey,
    pub alive: bool,
    pub peers: PeerSet,
    pub intervals: OpIntervals,
    pub bytes_sent: u64,
    /// The node is occupied until this instant; work arriving earlier queues.
    pub busy_until: u64,
}

#[derive(Debug, Clone)]
pub struct OverlayConfig {
    pub key_bits: u32,
    pub successor_list_len: usize,
    /// One-way link latency, applied to every message.
    pub link_latency_ms: u64,
    /// Cost of detecting that a contacted node is dead.
    pub dead_timeout_ms: u64,
    /// Time a node needs to serve one incoming message.
    pub node_service_ms: u64,
    pub header_bytes: u64,
    pub descriptor_bytes: u64,
    pub initial_interval_ms: f64,
    pub max_hops: u32,
}

impl Default for OverlayConfig {
    fn default() -> Self {
        OverlayConfig {
            key_bits: 32,
            successor_list_len: 4,
            link_latency_ms: 10,
            dead_timeout_ms: 500,
            node_service_ms: 2,
            header_bytes: 64,
            descriptor_bytes: 16,
            initial_interval_ms: 2000.0,
            max_hops: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LookupOutcome {
    Success {
        node: NodeId,
        hops: u32,
        elapsed_ms: u64,
    },
    Failure {
        elapsed_ms: u64,
    },
}

impl LookupOutcome {
    pub fn elapsed_ms(&self) -> u64 {
        match self {
            LookupOutcome::Success { elapsed_ms, .. } => *elapsed_ms,
            LookupOutcome::Failure { elapsed_ms } => *elapsed_ms,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, LookupOutcome::Failure { .. })
    }
}

pub struct OverlaySim {
    pub cfg: OverlayConfig,
    nodes: Vec<NodeState>,
    /// (time, bytes) per message sent, in send order.
    bytes_log: Vec<(u64, u64)>,
    events: Vec<OverlayEvent>,
}

impl OverlaySim {
    pub fn new(cfg: OverlayConfig) -> Self {
        OverlaySim {
            cfg,
            nodes: Vec::new(),
            bytes_log: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn add_node(&mut self, id: RingKey) -> NodeId {
        assert_eq!(id.bits(), self.cfg.key_bits, "key width mismatch");
        let n = self.nodes.len();
        self.nodes.push(NodeState {
            id,
            alive: false,
            peers: PeerSet {
                successor: n,
                successor_list: Vec::new(),
                predecessor: None,
                fingers: vec![None; self.cfg.key_bits as usize],
                next_finger: 0,
            },
            intervals: OpIntervals::uniform(self.cfg.initial_interval_ms),
            bytes_sent: 0,
            busy_until: 0,
        });
        n
    }

    /// Bring the first node online as a single-node ring.
    pub fn bootstrap_first(&mut self, n: NodeId) {
        let node = &mut self.nodes[n];
        node.alive = true;
        node.peers.successor = n;
        node.peers.successor_list.clear();
        node.peers.predecessor = None;
    }

    pub fn node(&self, n: NodeId) -> &NodeState {
        &self.nodes[n]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn live_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|n| self.nodes[*n].alive)
    }

    pub fn set_interval(&mut self, n: NodeId, op: MaintenanceOp, ms: f64) {
        self.nodes[n].intervals.set(op, ms);
    }

    pub fn kill(&mut self, n: NodeId) {
        self.nodes[n].alive = false;
    }

    pub fn drain_events(&mut self) -> Vec<OverlayEvent> {
        std::mem::take(&mut self.events)
    }

    pub fn bytes_log(&self) -> &[(u64, u64)] {
        &self.bytes_log
    }

    pub fn total_bytes(&self) -> u64 {
        self.nodes.iter().map(|n| n.bytes_sent).sum()
    }

    fn emit(&mut self, at_ms: u64, node: NodeId, kind: OverlayEventKind) {
        self.events.push(OverlayEvent { at_ms, node, kind });
    }

    fn log_send(&mut self, from: NodeId, at: u64, bytes: u64) {
        self.nodes[from].bytes_sent += bytes;
        self.bytes_log.push((at, bytes));
    }

    /// Request/response exchange. Returns the time the response reaches the
    /// caller, or the time the caller gives up on a dead target.
    fn remote_call(
        &mut self,
        from: NodeId,
        to: NodeId,
        t_send: u64,
        req_bytes: u64,
        resp_bytes: u64,
    ) -> Result<u64, u64> {
        self.log_send(from, t_send, req_bytes);
        if !self.nodes[to].alive {
            return Err(t_send + self.cfg.dead_timeout_ms);
        }
        let arrival = t_send + self.cfg.link_latency_ms;
        let served = arrival.max(self.nodes[to].busy_until) + self.cfg.node_service_ms;
        self.nodes[to].busy_until = served;
        self.log_send(to, served, resp_bytes);
        Ok(served + self.cfg.link_latency_ms)
    }

    /// Fire-and-forget message; the target processes it on arrival if alive.
    /// Returns whether it was delivered.
    fn send_one_way(&mut self, from: NodeId, to: NodeId, t_send: u64, bytes: u64) -> Option<u64> {
        self.log_send(from, t_send, bytes);
        if !self.nodes[to].alive {
            return None;
        }
        let arrival = t_send + self.cfg.link_latency_ms;
        let served = arrival.max(self.nodes[to].busy_until) + self.cfg.node_service_ms;
        self.nodes[to].busy_until = served;
        Some(served)
    }

    fn descriptor_msg(&self) -> u64 {
        self.cfg.header_bytes + self.cfg.descriptor_bytes
    }

    fn list_msg(&self) -> u64 {
        self.cfg.header_bytes + self.cfg.descriptor_bytes * self.cfg.successor_list_len as u64
    }

    /// Best known predecessor of `key` from `n`'s finger table, falling back
    /// to the successor when no finger precedes the key.
    fn closest_preceding(&self, n: NodeId, key: &RingKey) -> NodeId {
        let node = &self.nodes[n];
        for entry in node.peers.fingers.iter().rev() {
            if let Some(f) = entry {
                if in_open_interval(&self.nodes[*f].id, &node.id, key) {
                    return *f;
                }
            }
        }
        node.peers.successor
    }

    /// A lookup handed to `origin` from outside (the workload executor or a
    /// joining node): the request is served at the origin and the answer
    /// travels back, so even a locally resolved key costs one round trip.
    pub fn client_lookup(&mut self, origin: NodeId, key: &RingKey, t: u64) -> LookupOutcome {
        assert!(self.nodes[origin].alive, "lookup via a dead node");
        let arrival = t + self.cfg.link_latency_ms;
        let served = arrival.max(self.nodes[origin].busy_until) + self.cfg.node_service_ms;
        self.nodes[origin].busy_until = served;
        let outcome = self.route(origin, key, served, t);
        self.log_send(origin, served, self.descriptor_msg());
        match outcome {
            LookupOutcome::Success { node, hops, elapsed_ms } => LookupOutcome::Success {
                node,
                hops,
                elapsed_ms: elapsed_ms + self.cfg.link_latency_ms,
            },
            LookupOutcome::Failure { elapsed_ms } => LookupOutcome::Failure {
                elapsed_ms: elapsed_ms + self.cfg.link_latency_ms,
            },
        }
    }

    /// Iterative greedy routing driven by the origin. Returns the successor
    /// of `key`. Contacting a dead hop fails the whole lookup after the time
    /// spent so far plus one dead timeout; the stale pointer's owner gets a
    /// finger-failure event.
    pub fn lookup(&mut self, origin: NodeId, key: &RingKey, t: u64) -> LookupOutcome {
        self.route(origin, key, t, t)
    }

    /// Routing core: starts at `clock0`, reports times relative to
    /// `issued_at` (they differ when an entry hop preceded routing).
    fn route(&mut self, origin: NodeId, key: &RingKey, clock0: u64, issued_at: u64) -> LookupOutcome {
        assert!(self.nodes[origin].alive, "lookup from a dead node");
        let t = issued_at;
        let mut clock = clock0;
        let mut current = origin;
        let mut hops = 0u32;
        loop {
            let succ = self.nodes[current].peers.successor;
            if in_half_open_interval(key, &self.nodes[current].id, &self.nodes[succ].id) {
                let elapsed_ms = clock - t;
                self.emit(t, origin, OverlayEventKind::LookupCompleted { elapsed_ms });
                return LookupOutcome::Success {
                    node: succ,
                    hops,
                    elapsed_ms,
                };
            }
            if hops >= self.cfg.max_hops {
                // Routing loop in a degenerate state; give up without a
                // peer-access failure (nothing was unreachable).
                let elapsed_ms = clock - t;
                self.emit(t, origin, OverlayEventKind::LookupFailed { elapsed_ms });
                return LookupOutcome::Failure { elapsed_ms };
            }
            let mut next = self.closest_preceding(current, key);
            if next == current {
                next = succ;
            }
            match self.remote_call(origin, next, clock, self.descriptor_msg(), self.descriptor_msg())
            {
                Ok(t_recv) => {
                    clock = t_recv;
                    hops += 1;
                    current = next;
                }
                Err(t_fail) => {
                    self.emit(
                        clock,
                        current,
                        OverlayEventKind::PeerAccessFailed {
                            role: PeerRole::Finger,
                        },
                    );
                    let elapsed_ms = t_fail - t;
                    self.emit(t, origin, OverlayEventKind::LookupFailed { elapsed_ms });
                    return LookupOutcome::Failure { elapsed_ms };
                }
            }
        }
    }

    /// Probe the successor list for the first live entry and install it as
    /// the successor. Returns the time when done.
    fn find_working_successor(&mut self, n: NodeId, t: u64) -> u64 {
        let mut clock = t;
        let list = self.nodes[n].peers.successor_list.clone();
        for (i, candidate) in list.iter().enumerate() {
            if *candidate == self.nodes[n].peers.successor {
                continue;
            }
            match self.remote_call(n, *candidate, clock, self.cfg.header_bytes, self.cfg.header_bytes)
            {
                Ok(t_recv) => {
                    self.nodes[n].peers.successor = *candidate;
                    self.nodes[n].peers.successor_list = list[i..].to_vec();
                    return t_recv;
                }
                Err(t_fail) => clock = t_fail,
            }
        }
        // Nobody left; fall back to a single-node ring.
        self.nodes[n].peers.successor = n;
        self.nodes[n].peers.successor_list.clear();
        clock
    }

    /// Ask the successor for its predecessor, adopt a closer one, notify the
    /// successor and refresh the successor list. A dead successor raises a
    /// failure event and is replaced from the successor list.
    pub fn stabilize(&mut self, n: NodeId, t: u64) -> MaintenanceOutcome {
        assert!(self.nodes[n].alive, "stabilize on a dead node");
        let start = t;
        let mut clock = start;
        let mut succ = self.nodes[n].peers.successor;
        let mut changed = false;

        let candidate = if succ == n {
            // Own state, no message.
            self.nodes[n].peers.predecessor
        } else {
            match self.remote_call(n, succ, clock, self.cfg.header_bytes, self.descriptor_msg()) {
                Ok(t_recv) => {
                    clock = t_recv;
                    self.nodes[succ].peers.predecessor
                }
                Err(t_fail) => {
                    self.emit(
                        clock,
                        n,
                        OverlayEventKind::PeerAccessFailed {
                            role: PeerRole::Successor,
                        },
                    );
                    self.find_working_successor(n, t_fail);
                    self.emit(
                        start,
                        n,
                        OverlayEventKind::MaintenanceOutcome {
                            op: MaintenanceOp::Stabilize,
                            outcome: MaintenanceOutcome::AccessFailed,
                        },
                    );
                    return MaintenanceOutcome::AccessFailed;
                }
            }
        };

        if let Some(x) = candidate {
            if x != n && in_open_interval(&self.nodes[x].id, &self.nodes[n].id, &self.nodes[succ].id)
            {
                self.nodes[n].peers.successor = x;
                succ = x;
                changed = true;
            }
        }

        if succ != n {
            // Tell the successor about us; it adopts a closer predecessor.
            if self.send_one_way(n, succ, clock, self.descriptor_msg()).is_some() {
                let adopt = match self.nodes[succ].peers.predecessor {
                    None => true,
                    Some(p) => {
                        p != n
                            && in_open_interval(
                                &self.nodes[n].id,
                                &self.nodes[p].id,
                                &self.nodes[succ].id,
                            )
                    }
                };
                if adopt {
                    self.nodes[succ].peers.predecessor = Some(n);
                }
            }

            // Pull the successor's list and keep our own view fresh.
            match self.remote_call(n, succ, clock, self.cfg.header_bytes, self.list_msg()) {
                Ok(_) => {
                    let mut new_list = vec![succ];
                    new_list.extend(self.nodes[succ].peers.successor_list.iter().copied());
                    new_list.dedup();
                    new_list.retain(|e| *e != n);
                    new_list.truncate(self.cfg.successor_list_len);
                    if new_list != self.nodes[n].peers.successor_list {
                        self.nodes[n].peers.successor_list = new_list;
                        changed = true;
                    }
                }
                Err(t_fail) => {
                    self.emit(
                        clock,
                        n,
                        OverlayEventKind::PeerAccessFailed {
                            role: PeerRole::Successor,
                        },
                    );
                    self.find_working_successor(n, t_fail);
                    self.emit(
                        start,
                        n,
                        OverlayEventKind::MaintenanceOutcome {
                            op: MaintenanceOp::Stabilize,
                            outcome: MaintenanceOutcome::AccessFailed,
                        },
                    );
                    return MaintenanceOutcome::AccessFailed;
                }
            }
        }

        let outcome = if changed {
            MaintenanceOutcome::Effective
        } else {
            MaintenanceOutcome::NonEffective
        };
        self.emit(
            start,
            n,
            OverlayEventKind::MaintenanceOutcome {
                op: MaintenanceOp::Stabilize,
                outcome,
            },
        );
        outcome
    }

    /// Resolve the next finger target via a lookup and install the result.
    /// The cursor advances whether or not the lookup succeeded.
    pub fn fix_next_finger(&mut self, n: NodeId, t: u64) -> MaintenanceOutcome {
        assert!(self.nodes[n].alive, "fix_next_finger on a dead node");
        let start = t;
        let i = self.nodes[n].peers.next_finger;
        let target = self.nodes[n].id.add_pow2(i as u32);
        let result = self.lookup(n, &target, start);
        self.nodes[n].peers.next_finger = (i + 1) % self.cfg.key_bits as usize;
        let outcome = match result {
            LookupOutcome::Success { node: owner, .. } => {
                if self.nodes[n].peers.fingers[i] != Some(owner) {
                    self.nodes[n].peers.fingers[i] = Some(owner);
                    MaintenanceOutcome::Effective
                } else {
                    MaintenanceOutcome::NonEffective
                }
            }
            LookupOutcome::Failure { .. } => MaintenanceOutcome::AccessFailed,
        };
        self.emit(
            start,
            n,
            OverlayEventKind::MaintenanceOutcome {
                op: MaintenanceOp::FixNextFinger,
                outcome,
            },
        );
        outcome
    }

    /// Ping the predecessor and clear the pointer if it is gone.
    pub fn check_predecessor(&mut self, n: NodeId, t: u64) -> MaintenanceOutcome {
        assert!(self.nodes[n].alive, "check_predecessor on a dead node");
        let start = t;
        let outcome = match self.nodes[n].peers.predecessor {
            None => MaintenanceOutcome::NonEffective,
            Some(p) => {
                match self.remote_call(n, p, start, self.cfg.header_bytes, self.cfg.header_bytes) {
                    Ok(_) => MaintenanceOutcome::NonEffective,
                    Err(_) => {
                        self.emit(
                            start,
                            n,
                            OverlayEventKind::PeerAccessFailed {
                                role: PeerRole::Predecessor,
                            },
                        );
                        self.nodes[n].peers.predecessor = None;
                        MaintenanceOutcome::Effective
                    }
                }
            }
        };
        self.emit(
            start,
            n,
            OverlayEventKind::MaintenanceOutcome {
                op: MaintenanceOp::CheckPredecessor,
                outcome,
            },
        );
        outcome
    }

    /// Locate the joining node's successor via a lookup through `known` and
    /// initialise the peer set. A failed or self-referential lookup leaves
    /// the node out and reports a join failure.
    pub fn join(&mut self, n: NodeId, known: NodeId, t: u64) -> bool {
        assert!(self.nodes[known].alive, "join via a dead gateway");
        assert!(!self.nodes[n].alive, "joining node already online");
        let key = self.nodes[n].id.clone();
        match self.client_lookup(known, &key, t) {
            LookupOutcome::Success { node: succ, .. } if succ != n => {
                let bits = self.cfg.key_bits as usize;
                let initial = self.cfg.initial_interval_ms;
                let node = &mut self.nodes[n];
                node.alive = true;
                node.peers.successor = succ;
                node.peers.successor_list = vec![succ];
                node.peers.predecessor = None;
                node.peers.fingers = vec![None; bits];
                node.peers.next_finger = 0;
                node.intervals = OpIntervals::uniform(initial);
                true
            }
            _ => {
                self.emit(t, n, OverlayEventKind::JoinFailed);
                false
            }
        }
    }

    /// Walk the successor chain from the gateway's successor until it comes
    /// around again or breaks. Returns the number of nodes encountered.
    pub fn ring_walk(&mut self, gateway: NodeId, t: u64) -> usize {
        assert!(self.nodes[gateway].alive, "ring walk from a dead gateway");
        let first = self.nodes[gateway].peers.successor;
        if !self.nodes[first].alive {
            return 0;
        }
        let mut seen = vec![first];
        let mut clock = t;
        let mut current = first;
        loop {
            // Ask `current` for its successor; the walker is external, so
            // only the serving node's response is costed.
            let arrival = clock + self.cfg.link_latency_ms;
            let served = arrival.max(self.nodes[current].busy_until) + self.cfg.node_service_ms;
            self.nodes[current].busy_until = served;
            let resp = self.descriptor_msg();
            self.log_send(current, served, resp);
            clock = served + self.cfg.link_latency_ms;

            let next = self.nodes[current].peers.successor;
            if next == first {
                return seen.len();
            }
            if !self.nodes[next].alive || seen.contains(&next) {
                return seen.len();
            }
            seen.push(next);
            current = next;
        }
    }

    /// One line per node: `id,alive,successor,predecessor,finger0..`.
    pub fn export_topology(&self) -> String {
        let mut out = String::new();
        for node in &self.nodes {
            let pred = node
                .peers
                .predecessor
                .map(|p| self.nodes[p].id.to_string())
                .unwrap_or_default();
            let fingers = node
                .peers
                .fingers
                .iter()
                .map(|f| {
                    f.map(|id| self.nodes[id].id.to_string())
                        .unwrap_or_default()
                })
                .collect::<Vec<_>>()
                .join(",");
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                node.id,
                node.alive,
                self.nodes[node.peers.successor].id,
                pred,
                fingers
            ));
        }
        out
    }
}
