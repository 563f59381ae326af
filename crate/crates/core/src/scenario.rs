//! Seeded generators for churn schedules, lookup workloads and link-speed
//! schedules. Generators are pure functions of their parameters and seed:
//! equal inputs give byte-identical output.

use rand::Rng;
use thiserror::Error;

use crate::ring::RingKey;
use crate::seeds;

/// Duration drawn uniformly from [mean - jitter, mean + jitter].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitteredDuration {
    pub mean_ms: u64,
    pub jitter_ms: u64,
}

impl JitteredDuration {
    pub const fn new(mean_ms: u64, jitter_ms: u64) -> Self {
        assert!(jitter_ms <= mean_ms, "jitter larger than mean");
        JitteredDuration { mean_ms, jitter_ms }
    }

    pub fn draw(&self, rng: &mut impl Rng) -> u64 {
        rng.random_range(self.mean_ms - self.jitter_ms..=self.mean_ms + self.jitter_ms)
    }
}

/// An on-line/off-line cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnOff {
    pub on: JitteredDuration,
    pub off: JitteredDuration,
}

/// The four membership-churn shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChurnPattern {
    /// Nodes stay up far longer than any experiment runs.
    Low,
    High,
    /// A fixed fraction of nodes behaves like dedicated servers (low churn),
    /// the rest like workstations (high churn).
    LocallyVarying { low_fraction: f64 },
    /// The whole population alternates between low- and high-churn phases.
    TemporallyVarying { phase_ms: u64 },
}

/// Cycle durations for the low- and high-churn node classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChurnParams {
    pub low: OnOff,
    pub high: OnOff,
    /// Extra initial up-time prepended to every node's first cycle.
    pub initial_on: Option<JitteredDuration>,
}

impl ChurnParams {
    /// Overlay experiments: low churn keeps nodes up for hours; high churn
    /// cycles 200 +/- 40 s on, 100 +/- 20 s off.
    pub fn overlay() -> Self {
        ChurnParams {
            low: OnOff {
                on: JitteredDuration::new(7_200_000, 0),
                off: JitteredDuration::new(157_000, 20_000),
            },
            high: OnOff {
                on: JitteredDuration::new(200_000, 40_000),
                off: JitteredDuration::new(100_000, 20_000),
            },
            initial_on: None,
        }
    }

    /// Store experiments: 37 +/- 5 s on, 27 +/- 2 s off, with an extra
    /// 20 +/- 5 s up-front.
    pub fn store() -> Self {
        ChurnParams {
            low: OnOff {
                on: JitteredDuration::new(7_200_000, 0),
                off: JitteredDuration::new(157_000, 20_000),
            },
            high: OnOff {
                on: JitteredDuration::new(37_000, 5_000),
                off: JitteredDuration::new(27_000, 2_000),
            },
            initial_on: Some(JitteredDuration::new(20_000, 5_000)),
        }
    }
}

/// Per-node list of (down_at, up_at) pairs, sorted by time.
pub type ChurnSchedule = Vec<Vec<(u64, u64)>>;

fn cycle_schedule(
    cycle: OnOff,
    initial_on: Option<JitteredDuration>,
    horizon_ms: u64,
    rng: &mut impl Rng,
) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut t = initial_on.map(|d| d.draw(rng)).unwrap_or(0);
    loop {
        let down_at = t + cycle.on.draw(rng);
        if down_at >= horizon_ms {
            return out;
        }
        let up_at = down_at + cycle.off.draw(rng);
        out.push((down_at, up_at));
        t = up_at;
    }
}

fn phased_schedule(
    params: &ChurnParams,
    phase_ms: u64,
    horizon_ms: u64,
    rng: &mut impl Rng,
) -> Vec<(u64, u64)> {
    // Even phases are calm, odd phases churn. A node whose next down-time
    // would fall outside the current churn phase stays up until the next one.
    let mut out = Vec::new();
    let mut t = params.initial_on.map(|d| d.draw(rng)).unwrap_or(0);
    while t < horizon_ms {
        let phase = t / phase_ms;
        if phase % 2 == 0 {
            t = (phase + 1) * phase_ms;
            continue;
        }
        let phase_end = (phase + 1) * phase_ms;
        let down_at = t + params.high.on.draw(rng);
        if down_at >= phase_end.min(horizon_ms) {
            t = phase_end;
            continue;
        }
        let up_at = down_at + params.high.off.draw(rng);
        out.push((down_at, up_at));
        t = up_at;
    }
    out
}

/// Deterministic per-node churn schedules over `[0, horizon_ms)`.
///
/// Each node draws from its own seeded stream, so schedules do not shift
/// when the node count changes.
pub fn build_churn_schedule(
    pattern: ChurnPattern,
    params: &ChurnParams,
    node_count: usize,
    horizon_ms: u64,
    seed: u64,
) -> ChurnSchedule {
    assert!(horizon_ms > 0);
    let mut pick = seeds::rng(seed, "churn-class", 0);
    (0..node_count)
        .map(|i| {
            let mut rng = seeds::rng(seed, "churn", i as u64);
            match pattern {
                ChurnPattern::Low => {
                    cycle_schedule(params.low, params.initial_on, horizon_ms, &mut rng)
                }
                ChurnPattern::High => {
                    cycle_schedule(params.high, params.initial_on, horizon_ms, &mut rng)
                }
                ChurnPattern::LocallyVarying { low_fraction } => {
                    let calm: bool = pick.random_bool(low_fraction.clamp(0.0, 1.0));
                    let cycle = if calm { params.low } else { params.high };
                    cycle_schedule(cycle, params.initial_on, horizon_ms, &mut rng)
                }
                ChurnPattern::TemporallyVarying { phase_ms } => {
                    phased_schedule(params, phase_ms, horizon_ms, &mut rng)
                }
            }
        })
        .collect()
}

/// When a workload batch is issued relative to its predecessor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BatchStart {
    /// This long after the previous batch completed (0 = back to back).
    AfterPrev { gap_ms: u64 },
    /// At a fixed offset from the start of the workload, or when the
    /// previous batch completes, whichever is later.
    AtOffset { offset_ms: u64 },
}

/// One set of keys resolved in parallel through the gateway.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub start: BatchStart,
    pub keys: Vec<RingKey>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadPlan {
    pub batches: Vec<Batch>,
}

impl WorkloadPlan {
    pub fn total_lookups(&self) -> usize {
        self.batches.iter().map(|b| b.keys.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkloadKind {
    /// 10 lookups, five minutes apart.
    Light,
    /// 6000 lookups issued back to back.
    Heavy,
    /// 10 bursts of 100 back-to-back lookups, five minutes between bursts.
    Variable,
}

/// Build a synthetic workload; keys are drawn uniformly from the key space.
pub fn build_workload(kind: WorkloadKind, key_bits: u32, seed: u64) -> WorkloadPlan {
    let mut rng = seeds::rng(seed, "workload", 0);
    let mut key = || RingKey::random(&mut rng, key_bits);
    let batches = match kind {
        WorkloadKind::Light => (0..10)
            .map(|i| Batch {
                start: BatchStart::AtOffset {
                    offset_ms: i * 300_000,
                },
                keys: vec![key()],
            })
            .collect(),
        WorkloadKind::Heavy => (0..6000)
            .map(|_| Batch {
                start: BatchStart::AfterPrev { gap_ms: 0 },
                keys: vec![key()],
            })
            .collect(),
        WorkloadKind::Variable => {
            let mut batches = Vec::with_capacity(1000);
            for burst in 0..10 {
                for j in 0..100 {
                    let gap_ms = if burst > 0 && j == 0 { 300_000 } else { 0 };
                    batches.push(Batch {
                        start: BatchStart::AfterPrev { gap_ms },
                        keys: vec![key()],
                    });
                }
            }
            batches
        }
    };
    WorkloadPlan { batches }
}

pub const TRACE_REPLICATION: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: offset {offset} goes back in time")]
    OutOfOrder { line: usize, offset: u64 },
}

/// Stable key for one item derived from a trace record. The whole tuple is
/// hashed so replicas of the same item land on unrelated ring positions.
fn trace_key(file_id: u64, element: u64, is_meta: bool, replica: usize, bits: u32) -> RingKey {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for part in [file_id, element, is_meta as u64, replica as u64] {
        h ^= part;
        h = h.wrapping_mul(0x1000_0000_01b3);
        h ^= h >> 29;
    }
    RingKey::new(num_bigint::BigUint::from(h), bits)
}

/// Expand one trace record into workload batches.
///
/// Each path element is addressed through meta-data keys which are looked up
/// in parallel; a data record then fetches its data keys in sequence. Every
/// item is replicated fourfold, so a meta element contributes 4 parallel
/// keys and the data item 4 sequential single-key lookups.
fn expand_record(
    offset_ms: u64,
    is_data: bool,
    path_depth: u64,
    file_id: u64,
    bits: u32,
    out: &mut Vec<Batch>,
) {
    let mut meta_keys = Vec::with_capacity(path_depth as usize * TRACE_REPLICATION);
    for element in 0..path_depth {
        for replica in 0..TRACE_REPLICATION {
            meta_keys.push(trace_key(file_id, element, true, replica, bits));
        }
    }
    if !meta_keys.is_empty() {
        out.push(Batch {
            start: BatchStart::AtOffset { offset_ms },
            keys: meta_keys,
        });
    }
    if is_data {
        for replica in 0..TRACE_REPLICATION {
            out.push(Batch {
                start: if replica == 0 && path_depth == 0 {
                    BatchStart::AtOffset { offset_ms }
                } else {
                    BatchStart::AfterPrev { gap_ms: 0 }
                },
                keys: vec![trace_key(file_id, 0, false, replica, bits)],
            });
        }
    }
}

/// Parse the trace format: one record per line,
/// `offset_ms,kind(meta|data),path_depth,file_id`, offsets non-decreasing.
pub fn parse_trace_workload(text: &str, key_bits: u32) -> Result<WorkloadPlan, TraceError> {
    let mut batches = Vec::new();
    let mut last_offset = 0u64;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 4 {
            return Err(TraceError::Parse {
                line,
                message: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let offset_ms: u64 = fields[0].parse().map_err(|_| TraceError::Parse {
            line,
            message: format!("bad offset `{}`", fields[0]),
        })?;
        let is_data = match fields[1] {
            "meta" => false,
            "data" => true,
            other => {
                return Err(TraceError::Parse {
                    line,
                    message: format!("kind must be meta or data, got `{other}`"),
                })
            }
        };
        let path_depth: u64 = fields[2].parse().map_err(|_| TraceError::Parse {
            line,
            message: format!("bad path depth `{}`", fields[2]),
        })?;
        let file_id: u64 = fields[3].parse().map_err(|_| TraceError::Parse {
            line,
            message: format!("bad file id `{}`", fields[3]),
        })?;
        if offset_ms < last_offset {
            return Err(TraceError::OutOfOrder {
                line,
                offset: offset_ms,
            });
        }
        last_offset = offset_ms;
        expand_record(offset_ms, is_data, path_depth, file_id, key_bits, &mut batches);
    }
    Ok(WorkloadPlan { batches })
}

/// Emit a synthetic file-system-flavoured trace in the text format above.
pub fn generate_trace(records: usize, max_depth: u64, horizon_ms: u64, seed: u64) -> String {
    let mut rng = seeds::rng(seed, "trace-gen", 0);
    let mut offsets: Vec<u64> = (0..records)
        .map(|_| rng.random_range(0..horizon_ms))
        .collect();
    offsets.sort_unstable();
    let mut out = String::new();
    for offset in offsets {
        let kind = if rng.random_bool(0.7) { "data" } else { "meta" };
        let depth = rng.random_range(1..=max_depth.max(1));
        let file_id: u64 = rng.random_range(0..1_000_000);
        out.push_str(&format!("{offset},{kind},{depth},{file_id}\n"));
    }
    out
}

/// Which side of the store is starved, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkSpeedKind {
    ServerBottleneck,
    ClientBottleneck,
    NoBottleneck,
    TemporallyVarying,
}

/// Bandwidth/latency per participant over time. Participant 0 is the client,
/// participants 1..=R the servers.
#[derive(Debug, Clone)]
pub struct LinkSpeedSchedule {
    pub kind: LinkSpeedKind,
    /// Varying links pick a new configuration this often.
    pub reconfig_ms: u64,
    pub bw_range_bps: (f64, f64),
    pub latency_range_s: (f64, f64),
    pub seed: u64,
}

impl LinkSpeedSchedule {
    pub fn new(kind: LinkSpeedKind, seed: u64) -> Self {
        LinkSpeedSchedule {
            kind,
            reconfig_ms: 10_000,
            bw_range_bps: (220_000.0, 22_000_000.0),
            latency_range_s: (0.0, 0.020),
            seed,
        }
    }

    /// (bandwidth bps, latency seconds) of `participant`'s link at `t_ms`.
    pub fn params_at(&self, participant: usize, t_ms: u64) -> (f64, f64) {
        let client = participant == 0;
        match self.kind {
            LinkSpeedKind::ServerBottleneck => {
                if client {
                    (78e6, 0.0)
                } else {
                    (3e6, 0.020)
                }
            }
            LinkSpeedKind::ClientBottleneck => {
                if client {
                    (3e6, 0.020)
                } else {
                    (22e6, 0.0)
                }
            }
            LinkSpeedKind::NoBottleneck => (18e6, 0.0),
            LinkSpeedKind::TemporallyVarying => {
                let slot = t_ms / self.reconfig_ms;
                let mut rng =
                    seeds::rng(self.seed, "link", ((participant as u64) << 32) | slot);
                let u: f64 = rng.random_range(0.0..=1.0);
                let (bw_lo, bw_hi) = self.bw_range_bps;
                let (lat_lo, lat_hi) = self.latency_range_s;
                // Fast links answer fast: latency runs opposite to bandwidth.
                let bw = bw_lo + u * (bw_hi - bw_lo);
                let lat = lat_hi - u * (lat_hi - lat_lo);
                (bw, lat)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_churn_emits_no_events_inside_forty_minutes() {
        let schedule = build_churn_schedule(
            ChurnPattern::Low,
            &ChurnParams::overlay(),
            16,
            40 * 60_000,
            7,
        );
        assert!(schedule.iter().all(|s| s.is_empty()));
    }

    #[test]
    fn high_churn_draws_stay_in_range() {
        let params = ChurnParams::overlay();
        let schedule = build_churn_schedule(ChurnPattern::High, &params, 100, 40_000_000, 11);
        let mut draws = 0;
        for node in &schedule {
            let mut up_since = 0;
            for (down, up) in node {
                let on = down - up_since;
                let off = up - down;
                assert!((160_000..=240_000).contains(&on), "on duration {on}");
                assert!((80_000..=120_000).contains(&off), "off duration {off}");
                up_since = *up;
                draws += 2;
            }
        }
        assert!(draws > 10_000, "only {draws} draws checked");
    }

    #[test]
    fn same_seed_reproduces_schedule() {
        let params = ChurnParams::overlay();
        let a = build_churn_schedule(ChurnPattern::High, &params, 16, 2_400_000, 3);
        let b = build_churn_schedule(ChurnPattern::High, &params, 16, 2_400_000, 3);
        assert_eq!(a, b);
    }

    #[test]
    fn temporally_varying_churns_only_in_odd_phases() {
        let params = ChurnParams::overlay();
        let schedule = build_churn_schedule(
            ChurnPattern::TemporallyVarying {
                phase_ms: 1_000_000,
            },
            &params,
            16,
            4_000_000,
            5,
        );
        let mut downs = 0;
        for node in &schedule {
            for (down, _) in node {
                let phase = down / 1_000_000;
                assert_eq!(phase % 2, 1, "down event at {down} in a calm phase");
                downs += 1;
            }
        }
        assert!(downs > 0);
    }

    #[test]
    fn locally_varying_splits_population() {
        let params = ChurnParams::overlay();
        let schedule = build_churn_schedule(
            ChurnPattern::LocallyVarying { low_fraction: 0.25 },
            &params,
            200,
            2_400_000,
            9,
        );
        let calm = schedule.iter().filter(|s| s.is_empty()).count();
        assert!((30..=70).contains(&calm), "calm nodes: {calm}");
    }

    #[test]
    fn light_workload_is_ten_spaced_lookups() {
        let plan = build_workload(WorkloadKind::Light, 32, 1);
        assert_eq!(plan.total_lookups(), 10);
        for (i, batch) in plan.batches.iter().enumerate() {
            assert_eq!(
                batch.start,
                BatchStart::AtOffset {
                    offset_ms: i as u64 * 300_000
                }
            );
            assert_eq!(batch.keys.len(), 1);
        }
    }

    #[test]
    fn heavy_workload_is_back_to_back() {
        let plan = build_workload(WorkloadKind::Heavy, 32, 1);
        assert_eq!(plan.total_lookups(), 6000);
        assert!(plan
            .batches
            .iter()
            .all(|b| b.start == BatchStart::AfterPrev { gap_ms: 0 }));
    }

    #[test]
    fn variable_workload_bursts() {
        let plan = build_workload(WorkloadKind::Variable, 32, 1);
        assert_eq!(plan.total_lookups(), 1000);
        let gaps = plan
            .batches
            .iter()
            .filter(|b| b.start == BatchStart::AfterPrev { gap_ms: 300_000 })
            .count();
        assert_eq!(gaps, 9);
    }

    #[test]
    fn empty_trace_is_empty_workload() {
        let plan = parse_trace_workload("", 32).unwrap();
        assert!(plan.batches.is_empty());
    }

    #[test]
    fn one_data_record_expands_per_replication_rule() {
        let plan = parse_trace_workload("1000,data,2,42\n", 32).unwrap();
        // One parallel batch with 2 path elements x 4 replicas, then the
        // data item's 4 replicas in sequence.
        assert_eq!(plan.batches.len(), 5);
        assert_eq!(plan.batches[0].keys.len(), 8);
        assert_eq!(
            plan.batches[0].start,
            BatchStart::AtOffset { offset_ms: 1000 }
        );
        for b in &plan.batches[1..] {
            assert_eq!(b.keys.len(), 1);
            assert_eq!(b.start, BatchStart::AfterPrev { gap_ms: 0 });
        }
        assert_eq!(plan.total_lookups(), 12);
    }

    #[test]
    fn meta_record_has_no_data_lookups() {
        let plan = parse_trace_workload("0,meta,3,7\n", 32).unwrap();
        assert_eq!(plan.batches.len(), 1);
        assert_eq!(plan.batches[0].keys.len(), 12);
    }

    #[test]
    fn out_of_order_offsets_rejected() {
        let err = parse_trace_workload("100,data,1,1\n50,data,1,2\n", 32).unwrap_err();
        assert_eq!(
            err,
            TraceError::OutOfOrder {
                line: 2,
                offset: 50
            }
        );
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_trace_workload("0,data,1,1\nnot-a-record\n", 32).unwrap_err();
        assert!(matches!(err, TraceError::Parse { line: 2, .. }));
    }

    #[test]
    fn generated_traces_parse() {
        let text = generate_trace(50, 4, 600_000, 13);
        let plan = parse_trace_workload(&text, 32).unwrap();
        assert!(plan.total_lookups() >= 50 * 4);
        assert_eq!(text, generate_trace(50, 4, 600_000, 13));
    }

    #[test]
    fn static_link_speeds_match_their_scenario() {
        let s = LinkSpeedSchedule::new(LinkSpeedKind::ServerBottleneck, 0);
        assert_eq!(s.params_at(0, 0), (78e6, 0.0));
        assert_eq!(s.params_at(2, 123_456), (3e6, 0.020));
    }

    #[test]
    fn varying_links_couple_latency_inversely() {
        let s = LinkSpeedSchedule::new(LinkSpeedKind::TemporallyVarying, 21);
        for participant in 0..5 {
            for slot in 0..50 {
                let (bw, lat) = s.params_at(participant, slot * 10_000);
                assert!((220_000.0..=22_000_000.0).contains(&bw));
                assert!((0.0..=0.020).contains(&lat));
                let u = (bw - 220_000.0) / (22_000_000.0 - 220_000.0);
                let expected_lat = 0.020 - u * 0.020;
                assert!((lat - expected_lat).abs() < 1e-12);
            }
        }
        // Constant within a slot, changing across slots.
        assert_eq!(s.params_at(1, 0), s.params_at(1, 9_999));
        assert_ne!(s.params_at(1, 0), s.params_at(1, 10_000));
    }
}
