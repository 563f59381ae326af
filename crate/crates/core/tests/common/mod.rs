//! Brute-force ground truth shared by the integration suites: peer sets and
//! key ownership computed straight from the sorted id set, independent of
//! the routing implementation.

use amsim::overlay::{NodeId, OverlaySim};
use amsim::ring::RingKey;

/// The live node owning `key`: the first live id at or after it, wrapping.
pub fn brute_successor_of_key(sim: &OverlaySim, key: &RingKey) -> NodeId {
    let mut live: Vec<NodeId> = sim.live_nodes().collect();
    live.sort_by(|a, b| sim.node(*a).id.value().cmp(sim.node(*b).id.value()));
    live.iter()
        .copied()
        .find(|n| sim.node(*n).id.value() >= key.value())
        .unwrap_or(live[0])
}

pub struct GroundTruth {
    pub node: NodeId,
    pub successor: NodeId,
    pub predecessor: Option<NodeId>,
    pub successor_list: Vec<NodeId>,
    pub fingers: Vec<NodeId>,
}

/// Expected peer-set fields for every live node.
pub fn brute_ring(sim: &OverlaySim) -> Vec<GroundTruth> {
    let mut live: Vec<NodeId> = sim.live_nodes().collect();
    live.sort_by(|a, b| sim.node(*a).id.value().cmp(sim.node(*b).id.value()));
    let n = live.len();
    let list_len = sim.cfg.successor_list_len.min(n - 1);
    live.iter()
        .enumerate()
        .map(|(pos, node)| GroundTruth {
            node: *node,
            successor: live[(pos + 1) % n],
            predecessor: if n == 1 {
                None
            } else {
                Some(live[(pos + n - 1) % n])
            },
            successor_list: (1..=list_len).map(|k| live[(pos + k) % n]).collect(),
            fingers: (0..sim.cfg.key_bits)
                .map(|i| brute_successor_of_key(sim, &sim.node(*node).id.add_pow2(i)))
                .collect(),
        })
        .collect()
}

/// Panics with a description of the first divergence from ground truth.
pub fn assert_converged(sim: &OverlaySim) {
    for truth in brute_ring(sim) {
        let peers = &sim.node(truth.node).peers;
        assert_eq!(peers.successor, truth.successor, "successor of {}", truth.node);
        assert_eq!(
            peers.predecessor, truth.predecessor,
            "predecessor of {}",
            truth.node
        );
        assert_eq!(
            peers.successor_list, truth.successor_list,
            "successor list of {}",
            truth.node
        );
        for (i, expected) in truth.fingers.iter().enumerate() {
            assert_eq!(
                peers.fingers[i],
                Some(*expected),
                "finger {i} of node {}",
                truth.node
            );
        }
    }
}
