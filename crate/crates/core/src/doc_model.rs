//! Degree-of-concurrency model for a distributed store client.
//!
//! A get request fetches one of R replicas, each behind its own server link;
//! the client link is shared by however many fetches run in parallel (the
//! DOC). Closed forms cover the static low-DOC, static high-DOC and
//! perfect-ranking cases; a small event simulator reproduces them and adds
//! churn, link schedules and fetch cancellation.
//!
//! Units: sizes in bits, bandwidth in bits/s, latency in seconds,
//! 1 KByte = 1024 bytes.

use crate::scenario::LinkSpeedSchedule;

pub const BITS_PER_KBYTE: f64 = 1024.0 * 8.0;

/// Reference data size used for ranking transfers: 1 MByte.
pub const EDTT_REF_SIZE_BITS: f64 = 1024.0 * BITS_PER_KBYTE;

/// Parameters of the closed-form get-time model.
#[derive(Debug, Clone)]
pub struct DocModelParams {
    /// Replica count R; one server per replica.
    pub replicas: usize,
    /// Replica size S in bits.
    pub size_bits: f64,
    pub bw_client_bps: f64,
    pub bw_server_bps: Vec<f64>,
    pub lat_client_s: f64,
    pub lat_server_s: Vec<f64>,
    /// Probability that an individual fetch fails.
    pub p_failure: f64,
}

impl DocModelParams {
    /// Uniform servers around one client link.
    pub fn uniform(
        replicas: usize,
        size_bits: f64,
        bw_client_bps: f64,
        bw_server_bps: f64,
        lat_client_s: f64,
        lat_server_s: f64,
        p_failure: f64,
    ) -> Self {
        DocModelParams {
            replicas,
            size_bits,
            bw_client_bps,
            bw_server_bps: vec![bw_server_bps; replicas],
            lat_client_s: lat_client_s,
            lat_server_s: vec![lat_server_s; replicas],
            p_failure,
        }
    }

    /// Client-side bottleneck study: 500 KByte replicas, 100 ms latencies,
    /// fast servers behind a 1 Mbps client link.
    pub fn client_bottleneck_study() -> Self {
        Self::uniform(4, 500.0 * BITS_PER_KBYTE, 1e6, 100e6, 0.100, 0.100, 0.0)
    }

    /// Server-side bottleneck study: the mirror image.
    pub fn server_bottleneck_study() -> Self {
        Self::uniform(4, 500.0 * BITS_PER_KBYTE, 100e6, 1e6, 0.100, 0.100, 0.0)
    }
}

/// Time to fetch one replica from server `i` while `doc` fetches share the
/// client link: request latencies, the server-side transfer and the
/// client-side transfer at `BW_client / doc`.
pub fn fetch_time(p: &DocModelParams, i: usize, doc: u32) -> f64 {
    2.0 * p.lat_client_s
        + 2.0 * p.lat_server_s[i]
        + p.size_bits * (1.0 / p.bw_server_bps[i] + doc as f64 / p.bw_client_bps)
}

/// Expected single fetch time under uniformly random server choice, DOC 1.
pub fn mean_fetch_time(p: &DocModelParams) -> f64 {
    (0..p.replicas).map(|i| fetch_time(p, i, 1)).sum::<f64>() / p.replicas as f64
}

/// Static DOC 1 with random server selection: failures trigger up to R-1
/// sequential retries weighted as `t * (1 + sum k * P^k)`.
pub fn get_time_low_doc(p: &DocModelParams) -> f64 {
    assert!((0.0..1.0).contains(&p.p_failure));
    let t = mean_fetch_time(p);
    let mut sum = t;
    for k in 1..p.replicas {
        sum += k as f64 * t * p.p_failure.powi(k as i32);
    }
    sum
}

/// Static DOC R: the fastest of R concurrent fetches wins, each slowed by
/// the shared client link.
pub fn get_time_high_doc(p: &DocModelParams) -> f64 {
    (0..p.replicas)
        .map(|i| fetch_time(p, i, p.replicas as u32))
        .fold(f64::INFINITY, f64::min)
}

/// Perfect ranking with DOC 1: the single fetch goes to the fastest server
/// at full client bandwidth.
pub fn get_time_perfect_srm(p: &DocModelParams) -> f64 {
    (0..p.replicas)
        .map(|i| fetch_time(p, i, 1))
        .fold(f64::INFINITY, f64::min)
}

/// Expected data transfer time: the ranking score of one link.
pub fn edtt(latency_s: f64, size_bits: f64, bw_bps: f64) -> f64 {
    latency_s + size_bits / bw_bps
}

/// Most recent monitoring knowledge about one server.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServerMonitor {
    pub server: usize,
    /// Last expected transfer time; absent when never measured.
    pub edtt_s: Option<f64>,
    /// The last interaction failed or the server was unreachable.
    pub failed: bool,
}

/// Ascending by expected transfer time, failed or unmeasured servers last,
/// ties broken by server id.
pub fn rank_servers(monitors: &[ServerMonitor]) -> Vec<usize> {
    let mut order: Vec<&ServerMonitor> = monitors.iter().collect();
    order.sort_by(|a, b| {
        let group = |m: &ServerMonitor| (m.failed || m.edtt_s.is_none()) as u8;
        group(a)
            .cmp(&group(b))
            .then(
                a.edtt_s
                    .unwrap_or(f64::INFINITY)
                    .partial_cmp(&b.edtt_s.unwrap_or(f64::INFINITY))
                    .expect("EDTT is never NaN"),
            )
            .then(a.server.cmp(&b.server))
    });
    order.into_iter().map(|m| m.server).collect()
}

/// Rank servers of the closed-form model by reference-size EDTT.
pub fn rank_by_edtt(p: &DocModelParams, ref_size_bits: f64) -> Vec<usize> {
    let monitors: Vec<ServerMonitor> = (0..p.replicas)
        .map(|i| ServerMonitor {
            server: i,
            edtt_s: Some(edtt(p.lat_server_s[i], ref_size_bits, p.bw_server_bps[i])),
            failed: false,
        })
        .collect();
    rank_servers(&monitors)
}

/// Closed-form mirror of the simulator's static case: the fastest of the
/// `doc` best-ranked servers, each fetching at DOC `doc`.
pub fn get_time_static_ranked(p: &DocModelParams, doc: u32, ref_size_bits: f64) -> f64 {
    assert!(doc >= 1 && doc as usize <= p.replicas);
    rank_by_edtt(p, ref_size_bits)
        .into_iter()
        .take(doc as usize)
        .map(|i| fetch_time(p, i, doc))
        .fold(f64::INFINITY, f64::min)
}

/// Signals the DOC policy reads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocMetrics {
    /// Fetch failure rate: failures / initiated, 0 without activity.
    pub ffr: f64,
    /// Fetch-time variation: population sigma/mean of recent transfer-time
    /// estimates, 0 without data.
    pub ftv: f64,
    /// Bottleneck locator: mean client bandwidth / mean server bandwidth,
    /// 1 without data. Below 1 points at the client side.
    pub bn: f64,
    pub current_doc: u32,
}

/// Raw monitoring data of one observation window.
#[derive(Debug, Clone, Default)]
pub struct DocWindowData {
    pub initiated: usize,
    pub failed: usize,
    pub edtts_s: Vec<f64>,
    pub client_bw_bps: Vec<f64>,
    pub server_bw_bps: Vec<f64>,
}

pub fn extract_doc_metrics(data: &DocWindowData, current_doc: u32) -> DocMetrics {
    let ffr = if data.initiated == 0 {
        0.0
    } else {
        data.failed as f64 / data.initiated as f64
    };
    let ftv = if data.edtts_s.is_empty() {
        0.0
    } else {
        let mean = data.edtts_s.iter().sum::<f64>() / data.edtts_s.len() as f64;
        if mean == 0.0 {
            0.0
        } else {
            let var = data.edtts_s.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                / data.edtts_s.len() as f64;
            var.sqrt() / mean
        }
    };
    let bn = if data.client_bw_bps.is_empty() || data.server_bw_bps.is_empty() {
        1.0
    } else {
        let client = data.client_bw_bps.iter().sum::<f64>() / data.client_bw_bps.len() as f64;
        let server = data.server_bw_bps.iter().sum::<f64>() / data.server_bw_bps.len() as f64;
        client / server
    };
    DocMetrics {
        ffr,
        ftv,
        bn,
        current_doc,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocPolicyMode {
    Static,
    Autonomic,
}

/// Thresholded policy configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocPolicyConfig {
    pub t_ffr: f64,
    pub t_ftv: f64,
    pub t_bn: f64,
    pub initial_doc: u32,
    pub eval_interval_ms: u64,
    pub mode: DocPolicyMode,
}

impl DocPolicyConfig {
    pub fn static_doc(doc: u32) -> Self {
        DocPolicyConfig {
            t_ffr: 0.0,
            t_ftv: 0.0,
            t_bn: 0.0,
            initial_doc: doc,
            eval_interval_ms: 60_000,
            mode: DocPolicyMode::Static,
        }
    }

    /// Adaptive policy; the failure-rate threshold is the knob that varies
    /// between the studied policies (0.1, 0.3, 0.5).
    pub fn autonomic(t_ffr: f64) -> Self {
        DocPolicyConfig {
            t_ffr,
            t_ftv: 0.2,
            t_bn: 0.8,
            initial_doc: 1,
            eval_interval_ms: 60_000,
            mode: DocPolicyMode::Autonomic,
        }
    }

    pub fn with_initial_doc(mut self, doc: u32) -> Self {
        self.initial_doc = doc;
        self
    }
}

/// One policy evaluation: raise concurrency when fetches fail or vary, all
/// the way up when both say so; relax it when things are calm, straight to 1
/// when the client link is the bottleneck.
pub fn doc_policy_step(m: &DocMetrics, c: &DocPolicyConfig, replicas: u32) -> u32 {
    let doc = m.current_doc.clamp(1, replicas);
    if c.mode == DocPolicyMode::Static {
        return doc;
    }
    let ffr_high = m.ffr > c.t_ffr;
    let ftv_high = m.ftv > c.t_ftv;
    let client_bottleneck = m.bn < c.t_bn;
    if doc < replicas && ffr_high && ftv_high {
        replicas
    } else if doc < replicas && (ffr_high || ftv_high) {
        doc + 1
    } else if doc > 1 && !ffr_high && !ftv_high {
        if client_bottleneck {
            1
        } else {
            doc - 1
        }
    } else {
        doc
    }
}

/// Fetch-simulator configuration.
#[derive(Debug, Clone)]
pub struct FetchSimConfig {
    pub replicas: usize,
    pub size_bits: f64,
    /// Request overhead counted per launched fetch.
    pub header_bytes: u64,
}

/// Outcome of one simulated get request.
#[derive(Debug, Clone, PartialEq)]
pub struct GetResult {
    pub get_time_s: f64,
    pub failed: bool,
    /// Data moved by all fetches, including the partial transfers of
    /// cancelled losers.
    pub bytes: u64,
    pub per_fetch: Vec<FetchOutcome>,
}

/// How one of the parallel fetches ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FetchOutcome {
    pub server: usize,
    pub failed: bool,
}

fn server_down_during(downtime: &[(u64, u64)], from_ms: u64, to_ms: u64) -> bool {
    downtime
        .iter()
        .any(|(down, up)| *down < to_ms && *up > from_ms)
}

/// Launch `doc` parallel fetches to the best-ranked servers and take the
/// first success; the losers are cancelled at that instant. Link parameters
/// are read from the schedule at issue time and held for the transfer. A
/// fetch whose server dies anywhere inside the transfer window fails, and
/// the failure surfaces at the fetch's nominal completion time.
pub fn simulate_get(
    cfg: &FetchSimConfig,
    link: &LinkSpeedSchedule,
    server_downtime: &[Vec<(u64, u64)>],
    ranking: &[usize],
    doc: u32,
    t_ms: u64,
) -> GetResult {
    assert!(doc >= 1 && doc as usize <= cfg.replicas);
    let (client_bw, client_lat) = link.params_at(0, t_ms);
    let chosen: Vec<usize> = ranking.iter().copied().take(doc as usize).collect();
    let mut completions: Vec<(usize, f64, bool)> = chosen
        .iter()
        .map(|&server| {
            let (srv_bw, srv_lat) = link.params_at(1 + server, t_ms);
            let duration = 2.0 * client_lat
                + 2.0 * srv_lat
                + cfg.size_bits * (1.0 / srv_bw + doc as f64 / client_bw);
            let end_ms = t_ms + (duration * 1000.0).round() as u64;
            let dead = server_down_during(&server_downtime[server], t_ms, end_ms);
            (server, duration, dead)
        })
        .collect();
    completions.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite durations"));

    let winner = completions.iter().find(|(_, _, dead)| !dead);
    let full_bytes = (cfg.size_bits / 8.0).round() as u64;
    let per_fetch = completions
        .iter()
        .map(|(server, _, dead)| FetchOutcome {
            server: *server,
            failed: *dead,
        })
        .collect();
    match winner {
        Some(&(_, win_time, _)) => {
            let mut bytes = 0;
            for (_, duration, _) in &completions {
                let fraction = (win_time / duration).min(1.0);
                bytes += cfg.header_bytes + (full_bytes as f64 * fraction).round() as u64;
            }
            GetResult {
                get_time_s: win_time,
                failed: false,
                bytes,
                per_fetch,
            }
        }
        None => {
            let last = completions
                .iter()
                .map(|(_, d, _)| *d)
                .fold(0.0f64, f64::max);
            GetResult {
                get_time_s: last,
                failed: true,
                bytes: completions.len() as u64 * (cfg.header_bytes + full_bytes),
                per_fetch,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::LinkSpeedKind;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn symmetric_fetch_is_two_transfers() {
        let p = DocModelParams::uniform(4, 1e6, 5e6, 5e6, 0.0, 0.0, 0.0);
        assert!(close(fetch_time(&p, 0, 1), 2.0 * 1e6 / 5e6, 1e-12));
    }

    #[test]
    fn client_bottleneck_constants() {
        let p = DocModelParams::client_bottleneck_study();
        // 0.4 + 0.04096 + 4.096 seconds.
        assert!(close(fetch_time(&p, 0, 1), 4.53696, 1e-9));
    }

    #[test]
    fn doc_increment_adds_one_client_share() {
        let p = DocModelParams::client_bottleneck_study();
        let d1 = fetch_time(&p, 0, 1);
        let d2 = fetch_time(&p, 0, 2);
        assert!(close(d2 - d1, p.size_bits / p.bw_client_bps, 1e-12));
    }

    #[test]
    fn low_doc_reduces_to_single_fetch_without_failures() {
        let p = DocModelParams::client_bottleneck_study();
        assert!(close(get_time_low_doc(&p), mean_fetch_time(&p), 1e-12));
    }

    #[test]
    fn low_doc_hand_value_at_half_failure() {
        let mut p = DocModelParams::client_bottleneck_study();
        p.p_failure = 0.5;
        // t * (1 + 0.5 + 2*0.25 + 3*0.125) = t * 2.375
        assert!(close(get_time_low_doc(&p), 4.53696 * 2.375, 1e-9));
    }

    #[test]
    fn printed_low_doc_weights_diverge_from_retry_expectation() {
        // The closed form weights the k-th retry as k*P^k with no success
        // factor; an actual retry process (fresh random server per attempt,
        // at most R-1 retries) has a smaller expectation once P is large.
        let mut p = DocModelParams::client_bottleneck_study();
        p.p_failure = 0.5;
        let printed = get_time_low_doc(&p);
        let t = mean_fetch_time(&p);
        use rand::Rng;
        let mut rng = crate::seeds::rng(7, "doc-mc", 0);
        let samples = 200_000;
        let mut total = 0.0;
        for _ in 0..samples {
            let mut attempts = 1;
            while attempts < p.replicas && rng.random_bool(p.p_failure) {
                attempts += 1;
            }
            total += attempts as f64 * t;
        }
        let simulated = total / samples as f64;
        assert!(
            printed > simulated * 1.15,
            "printed {printed} vs simulated {simulated}"
        );
    }

    #[test]
    fn high_doc_takes_the_fastest_shared_fetch() {
        let p = DocModelParams::client_bottleneck_study();
        assert!(close(get_time_high_doc(&p), fetch_time(&p, 0, 4), 1e-12));

        let mut hetero = DocModelParams::client_bottleneck_study();
        hetero.bw_server_bps[2] = 200e6;
        hetero.lat_server_s[2] = 0.010;
        let by_hand = (0..4).map(|i| fetch_time(&hetero, i, 4)).fold(f64::INFINITY, f64::min);
        assert_eq!(get_time_high_doc(&hetero), by_hand);
        assert!(close(get_time_high_doc(&hetero), fetch_time(&hetero, 2, 4), 1e-12));
    }

    #[test]
    fn perfect_ranking_equals_low_doc_for_uniform_servers() {
        let p = DocModelParams::client_bottleneck_study();
        assert!(close(get_time_perfect_srm(&p), get_time_low_doc(&p), 1e-12));
    }

    #[test]
    fn single_replica_degenerates_to_one_fetch() {
        let p = DocModelParams::uniform(1, 1e6, 2e6, 3e6, 0.01, 0.02, 0.0);
        assert_eq!(get_time_high_doc(&p), get_time_perfect_srm(&p));
        assert_eq!(get_time_low_doc(&p), fetch_time(&p, 0, 1));
    }

    #[test]
    fn edtt_hand_values() {
        assert!(close(edtt(0.0, 8e6, 8e6), 1.0, 1e-12));
        assert!(close(edtt(0.020, 8e6, 3e6), 2.6867, 1e-4));
        assert!(close(edtt(0.020, 8e6, f64::MAX), 0.020, 1e-12));
    }

    #[test]
    fn ranking_prefers_fast_then_id_then_pushes_failures_last() {
        let uniform: Vec<ServerMonitor> = (0..4)
            .map(|server| ServerMonitor {
                server,
                edtt_s: Some(1.0),
                failed: false,
            })
            .collect();
        assert_eq!(rank_servers(&uniform), vec![0, 1, 2, 3]);

        let mut congested = uniform.clone();
        congested[1].edtt_s = Some(9.0);
        assert_eq!(rank_servers(&congested), vec![0, 2, 3, 1]);

        let mut one_dead = uniform;
        one_dead[0].failed = true;
        assert_eq!(rank_servers(&one_dead), vec![1, 2, 3, 0]);

        let unmeasured = vec![
            ServerMonitor { server: 0, edtt_s: None, failed: false },
            ServerMonitor { server: 1, edtt_s: Some(2.0), failed: false },
        ];
        assert_eq!(rank_servers(&unmeasured), vec![1, 0]);
    }

    #[test]
    fn metrics_defaults_and_ratios() {
        let empty = extract_doc_metrics(&DocWindowData::default(), 2);
        assert_eq!(empty, DocMetrics { ffr: 0.0, ftv: 0.0, bn: 1.0, current_doc: 2 });

        let window = DocWindowData {
            initiated: 8,
            failed: 2,
            edtts_s: vec![2.0, 2.0, 2.0],
            client_bw_bps: vec![10e6],
            server_bw_bps: vec![20e6, 20e6],
        };
        let m = extract_doc_metrics(&window, 1);
        assert!(close(m.ffr, 0.25, 1e-12));
        assert_eq!(m.ftv, 0.0);
        assert!(close(m.bn, 0.5, 1e-12));
    }

    #[test]
    fn policy_branches() {
        let c = DocPolicyConfig::autonomic(0.5);
        let m = |ffr, ftv, bn, doc| DocMetrics { ffr, ftv, bn, current_doc: doc };
        // Both signals high: jump to the maximum.
        assert_eq!(doc_policy_step(&m(0.6, 0.5, 1.0, 1), &c, 4), 4);
        // One signal high: one step up.
        assert_eq!(doc_policy_step(&m(0.6, 0.1, 1.0, 2), &c, 4), 3);
        // Calm and the client link starved: collapse to 1.
        assert_eq!(doc_policy_step(&m(0.1, 0.1, 0.5, 3), &c, 4), 1);
        // Calm with headroom: one step down.
        assert_eq!(doc_policy_step(&m(0.1, 0.1, 1.0, 3), &c, 4), 2);
        // Already at the ceiling with high signals: stay.
        assert_eq!(doc_policy_step(&m(0.9, 0.9, 1.0, 4), &c, 4), 4);
        // Static mode never moves.
        let st = DocPolicyConfig::static_doc(4);
        assert_eq!(doc_policy_step(&m(0.9, 0.9, 0.1, 4), &st, 4), 4);
    }

    #[test]
    fn policy_output_stays_in_range() {
        let c = DocPolicyConfig::autonomic(0.3);
        for ffr in [0.0, 0.2, 0.4, 0.9] {
            for ftv in [0.0, 0.3] {
                for bn in [0.5, 1.0, 2.0] {
                    for doc in 1..=4 {
                        let m = DocMetrics { ffr, ftv, bn, current_doc: doc };
                        let next = doc_policy_step(&m, &c, 4);
                        assert!((1..=4).contains(&next));
                    }
                }
            }
        }
    }

    #[test]
    fn simulator_matches_closed_form_on_static_links() {
        // Client-bottleneck constants as a link schedule: client 1 Mbps /
        // 100 ms is not one of the canned kinds, so check against the
        // canned server-bottleneck configuration instead.
        let link = LinkSpeedSchedule::new(LinkSpeedKind::ServerBottleneck, 0);
        let p = DocModelParams::uniform(4, 500.0 * BITS_PER_KBYTE, 78e6, 3e6, 0.0, 0.020, 0.0);
        let cfg = FetchSimConfig {
            replicas: 4,
            size_bits: p.size_bits,
            header_bytes: 64,
        };
        let downtime = vec![Vec::new(); 4];
        let ranking = rank_by_edtt(&p, EDTT_REF_SIZE_BITS);
        for doc in 1..=4u32 {
            let sim = simulate_get(&cfg, &link, &downtime, &ranking, doc, 0);
            let closed = get_time_static_ranked(&p, doc, EDTT_REF_SIZE_BITS);
            assert!(!sim.failed);
            assert!(close(sim.get_time_s, closed, 1e-9), "doc={doc}");
        }
    }

    #[test]
    fn dead_servers_fail_the_get() {
        let link = LinkSpeedSchedule::new(LinkSpeedKind::NoBottleneck, 0);
        let cfg = FetchSimConfig {
            replicas: 4,
            size_bits: 8e6,
            header_bytes: 64,
        };
        let downtime = vec![vec![(0u64, u64::MAX)]; 4];
        let result = simulate_get(&cfg, &link, &downtime, &[0, 1, 2, 3], 4, 1000);
        assert!(result.failed);
        assert!(result.get_time_s > 0.0);
    }

    #[test]
    fn cancelled_fetches_transfer_partial_data() {
        let link = LinkSpeedSchedule::new(LinkSpeedKind::NoBottleneck, 0);
        let cfg = FetchSimConfig {
            replicas: 2,
            size_bits: 8e6,
            header_bytes: 0,
        };
        let downtime = vec![Vec::new(); 2];
        let one = simulate_get(&cfg, &link, &downtime, &[0, 1], 1, 0);
        let two = simulate_get(&cfg, &link, &downtime, &[0, 1], 2, 0);
        // Equal completion times: the winner moves a full replica, the
        // loser is cancelled at the same instant with the same fraction.
        assert_eq!(one.bytes, 1e6 as u64);
        assert_eq!(two.bytes, 2e6 as u64);
        assert!(two.get_time_s > one.get_time_s);
    }
}
