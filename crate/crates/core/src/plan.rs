//! Experiment plans: a parsed configuration expands into a matrix of cells
//! (scenario x policy x repetition), each run writing its CSV artifacts into
//! its own directory. Completed cells are never overwritten, and everything
//! is a pure function of (config, seed), so re-running a plan reproduces the
//! artifacts byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::analytics::{nsd, summarize, summaries_to_csv, windows_to_csv, LookupRecordOutcome};
use crate::doc_model::{DocPolicyConfig, BITS_PER_KBYTE};
use crate::manager::PolicySetId;
use crate::runner::{
    run_doc_experiment, run_overlay_experiment, DocChurn, DocScenario, DocWorkloadKind,
    OverlayScenario,
};
use crate::scenario::{
    build_workload, parse_trace_workload, ChurnParams, ChurnPattern, LinkSpeedKind, WorkloadKind,
    WorkloadPlan,
};
use crate::seeds;

pub const COMPLETE_MARKER: &str = ".complete";

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("no run directories under {0}")]
    EmptyDir(PathBuf),
    #[error("experiment `{0}` has no baseline runs ({1})")]
    MissingBaseline(String, String),
}

fn config_err(msg: impl Into<String>) -> PlanError {
    PlanError::Config(msg.into())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    /// "overlay" or "doc".
    pub layer: String,
    pub seed: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
    #[serde(default)]
    pub overlay: Option<OverlayPlanConfig>,
    #[serde(default)]
    pub doc: Option<DocPlanConfig>,
}

fn default_repetitions() -> u32 {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlayPlanConfig {
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_key_bits")]
    pub key_bits: u32,
    pub churns: Vec<String>,
    pub workloads: Vec<String>,
    pub policies: Vec<String>,
    #[serde(default = "default_horizon_ms")]
    pub horizon_ms: u64,
    #[serde(default = "default_warmup_ms")]
    pub warmup_ms: u64,
    #[serde(default = "default_latency_ms")]
    pub link_latency_ms: u64,
    #[serde(default = "default_service_ms")]
    pub node_service_ms: u64,
    #[serde(default = "default_timeout_ms")]
    pub dead_timeout_ms: u64,
    #[serde(default = "default_window_ms")]
    pub window_ms: u64,
    /// Required when `workloads` contains "trace".
    #[serde(default)]
    pub trace_path: Option<String>,
}

fn default_nodes() -> usize {
    16
}
fn default_key_bits() -> u32 {
    32
}
fn default_horizon_ms() -> u64 {
    40 * 60_000
}
fn default_warmup_ms() -> u64 {
    60_000
}
fn default_latency_ms() -> u64 {
    10
}
fn default_service_ms() -> u64 {
    120
}
fn default_timeout_ms() -> u64 {
    500
}
fn default_window_ms() -> u64 {
    300_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocPlanConfig {
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_sizes_kb")]
    pub sizes_kb: Vec<u64>,
    pub links: Vec<String>,
    pub churns: Vec<String>,
    pub workloads: Vec<String>,
    pub policies: Vec<String>,
    #[serde(default = "default_noise")]
    pub monitor_noise: f64,
    #[serde(default = "default_horizon_ms")]
    pub horizon_ms: u64,
    #[serde(default = "default_window_ms")]
    pub window_ms: u64,
}

fn default_replicas() -> usize {
    4
}
fn default_sizes_kb() -> Vec<u64> {
    vec![1024]
}
fn default_noise() -> f64 {
    0.05
}

impl PlanConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, PlanError> {
        let plan: PlanConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        match plan.layer.as_str() {
            "overlay" if plan.overlay.is_none() => {
                Err(config_err("layer = \"overlay\" needs an [overlay] table"))
            }
            "doc" if plan.doc.is_none() => Err(config_err("layer = \"doc\" needs a [doc] table")),
            "overlay" | "doc" => Ok(plan),
            other => Err(config_err(format!("unknown layer `{other}`"))),
        }
    }

    pub fn load(path: &Path) -> Result<Self, PlanError> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }
}

fn parse_churn(name: &str) -> Result<ChurnPattern, PlanError> {
    Ok(match name {
        "low" => ChurnPattern::Low,
        "high" => ChurnPattern::High,
        "locally_varying" => ChurnPattern::LocallyVarying { low_fraction: 0.25 },
        "temporally_varying" => ChurnPattern::TemporallyVarying {
            phase_ms: 1_000_000,
        },
        other => return Err(config_err(format!("unknown churn `{other}`"))),
    })
}

fn parse_policy(name: &str) -> Result<Option<PolicySetId>, PlanError> {
    Ok(match name {
        "none" => None,
        "policy0" => Some(PolicySetId::Policy0),
        "policy1" => Some(PolicySetId::Policy1),
        "policy2" => Some(PolicySetId::Policy2),
        other => return Err(config_err(format!("unknown policy `{other}`"))),
    })
}

fn parse_doc_policy(name: &str) -> Result<DocPolicyConfig, PlanError> {
    if let Some(rest) = name.strip_prefix("static") {
        let doc: u32 = rest
            .parse()
            .map_err(|_| config_err(format!("bad static policy `{name}`")))?;
        return Ok(DocPolicyConfig::static_doc(doc));
    }
    if let Some(rest) = name.strip_prefix("ffr") {
        let t: f64 = rest
            .parse()
            .map_err(|_| config_err(format!("bad autonomic policy `{name}`")))?;
        return Ok(DocPolicyConfig::autonomic(t));
    }
    Err(config_err(format!("unknown doc policy `{name}`")))
}

fn parse_link(name: &str) -> Result<LinkSpeedKind, PlanError> {
    Ok(match name {
        "server_bottleneck" => LinkSpeedKind::ServerBottleneck,
        "client_bottleneck" => LinkSpeedKind::ClientBottleneck,
        "none" => LinkSpeedKind::NoBottleneck,
        "temporally_varying" => LinkSpeedKind::TemporallyVarying,
        other => return Err(config_err(format!("unknown link kind `{other}`"))),
    })
}

fn parse_doc_churn(name: &str) -> Result<DocChurn, PlanError> {
    Ok(match name {
        "none" => DocChurn::None,
        "high" => DocChurn::High,
        "temporally_varying" => DocChurn::TemporallyVarying,
        other => return Err(config_err(format!("unknown doc churn `{other}`"))),
    })
}

fn parse_doc_workload(name: &str) -> Result<DocWorkloadKind, PlanError> {
    Ok(match name {
        "heavy" => DocWorkloadKind::Heavy,
        "light" => DocWorkloadKind::Light,
        "variable" => DocWorkloadKind::Variable,
        other => return Err(config_err(format!("unknown doc workload `{other}`"))),
    })
}

fn build_named_workload(
    name: &str,
    key_bits: u32,
    seed: u64,
    trace_path: Option<&str>,
) -> Result<WorkloadPlan, PlanError> {
    match name {
        "light" => Ok(build_workload(WorkloadKind::Light, key_bits, seed)),
        "heavy" => Ok(build_workload(WorkloadKind::Heavy, key_bits, seed)),
        "variable" => Ok(build_workload(WorkloadKind::Variable, key_bits, seed)),
        "trace" => {
            let path =
                trace_path.ok_or_else(|| config_err("trace workload needs trace_path"))?;
            let text = fs::read_to_string(path)?;
            parse_trace_workload(&text, key_bits).map_err(|e| config_err(e.to_string()))
        }
        other => Err(config_err(format!("unknown workload `{other}`"))),
    }
}

/// What `run_plan` did for one cell repetition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellRun {
    pub cell: String,
    pub rep: u32,
    pub skipped: bool,
}

fn write_if_new(dir: &Path, name: &str, content: &str) -> Result<(), PlanError> {
    fs::write(dir.join(name), content)?;
    Ok(())
}

fn summary_rows(
    windows: &[crate::analytics::UlmWindow],
    lookups: &[crate::analytics::LookupRecord],
) -> String {
    let elt: Vec<f64> = windows.iter().filter_map(|w| w.elt_ms).collect();
    let nu: Vec<f64> = windows.iter().map(|w| w.nu_bytes as f64).collect();
    let ler: Vec<f64> = windows.iter().map(|w| w.ler).collect();
    let lt: Vec<f64> = lookups
        .iter()
        .filter_map(|l| match l.outcome {
            LookupRecordOutcome::Success { lt_ms } => Some(lt_ms),
            LookupRecordOutcome::Failure { .. } => None,
        })
        .collect();
    let lets: Vec<f64> = lookups
        .iter()
        .filter_map(|l| match l.outcome {
            LookupRecordOutcome::Failure { let_ms } => Some(let_ms),
            LookupRecordOutcome::Success { .. } => None,
        })
        .collect();
    summaries_to_csv(&[
        ("elt", summarize(&elt).ok()),
        ("nu", summarize(&nu).ok()),
        ("ler", summarize(&ler).ok()),
        ("lt", summarize(&lt).ok()),
        ("let", summarize(&lets).ok()),
    ])
}

fn run_overlay_cell(
    cfg: &OverlayPlanConfig,
    churn_name: &str,
    workload_name: &str,
    policy_name: &str,
    rep_dir: &Path,
    scenario_seed: u64,
) -> Result<(), PlanError> {
    let workload =
        build_named_workload(workload_name, cfg.key_bits, scenario_seed, cfg.trace_path.as_deref())?;
    let mut scn = OverlayScenario::new(
        parse_churn(churn_name)?,
        workload,
        parse_policy(policy_name)?,
        scenario_seed,
    );
    scn.nodes = cfg.nodes;
    scn.key_bits = cfg.key_bits;
    scn.churn_params = ChurnParams::overlay();
    scn.horizon_ms = cfg.horizon_ms;
    scn.warmup_ms = cfg.warmup_ms;
    scn.link_latency_ms = cfg.link_latency_ms;
    scn.node_service_ms = cfg.node_service_ms;
    scn.dead_timeout_ms = cfg.dead_timeout_ms;
    scn.window_ms = cfg.window_ms;

    let result = run_overlay_experiment(&scn);

    write_if_new(rep_dir, "ulm.csv", &windows_to_csv(&result.windows))?;

    let mut lookups_csv = String::from("issued_ms,outcome,elapsed_ms\n");
    for l in &result.lookups {
        let (kind, ms) = match l.outcome {
            LookupRecordOutcome::Success { lt_ms } => ("success", lt_ms),
            LookupRecordOutcome::Failure { let_ms } => ("failure", let_ms),
        };
        let _ = writeln!(lookups_csv, "{},{},{:.3}", l.issued_at_ms, kind, ms);
    }
    write_if_new(rep_dir, "lookups.csv", &lookups_csv)?;

    let mut intervals_csv = String::from("time_ms,node_id,op,interval_ms\n");
    for p in &result.interval_trace {
        let _ = writeln!(
            intervals_csv,
            "{},{},{},{:.3}",
            p.at_ms,
            p.node,
            p.op.as_str(),
            p.interval_ms
        );
    }
    write_if_new(rep_dir, "intervals.csv", &intervals_csv)?;

    let mut encounters_csv = String::from("time_ms,count\n");
    for (t, count) in &result.encounters {
        let _ = writeln!(encounters_csv, "{t},{count}");
    }
    write_if_new(rep_dir, "encounters.csv", &encounters_csv)?;

    write_if_new(rep_dir, "summary.csv", &summary_rows(&result.windows, &result.lookups))?;

    let mut meta = String::from("key,value\n");
    let _ = writeln!(meta, "lookups,{}", result.lookups.len());
    let _ = writeln!(meta, "total_bytes,{}", result.total_bytes);
    let _ = writeln!(meta, "span_from_ms,{}", result.run_span_ms.0);
    let _ = writeln!(meta, "span_to_ms,{}", result.run_span_ms.1);
    if let Some(h) = result.holistic_elt_ms {
        let _ = writeln!(meta, "holistic_elt_ms,{h:.3}");
    }
    write_if_new(rep_dir, "meta.csv", &meta)?;
    Ok(())
}

fn run_doc_cell(
    cfg: &DocPlanConfig,
    link_name: &str,
    churn_name: &str,
    workload_name: &str,
    size_kb: u64,
    policy_name: &str,
    rep_dir: &Path,
    scenario_seed: u64,
) -> Result<(), PlanError> {
    let mut scn = DocScenario::new(
        parse_link(link_name)?,
        parse_doc_churn(churn_name)?,
        parse_doc_workload(workload_name)?,
        parse_doc_policy(policy_name)?,
        scenario_seed,
    );
    scn.replicas = cfg.replicas;
    scn.size_bits = size_kb as f64 * BITS_PER_KBYTE;
    scn.monitor_noise = cfg.monitor_noise;
    scn.horizon_ms = cfg.horizon_ms;
    scn.window_ms = cfg.window_ms;

    let result = run_doc_experiment(&scn);

    write_if_new(rep_dir, "ulm.csv", &windows_to_csv(&result.windows))?;

    let mut gets_csv = String::from("issued_ms,doc,get_time_ms,failed\n");
    for g in &result.gets {
        let _ = writeln!(
            gets_csv,
            "{},{},{:.3},{}",
            g.issued_ms, g.doc, g.get_time_ms, g.failed
        );
    }
    write_if_new(rep_dir, "gets.csv", &gets_csv)?;

    let mut trace_csv = String::from("time_ms,doc\n");
    for (t, doc) in &result.doc_trace {
        let _ = writeln!(trace_csv, "{t},{doc}");
    }
    write_if_new(rep_dir, "doc_trace.csv", &trace_csv)?;

    let records: Vec<crate::analytics::LookupRecord> = result
        .gets
        .iter()
        .map(|g| crate::analytics::LookupRecord {
            issued_at_ms: g.issued_ms,
            outcome: if g.failed {
                LookupRecordOutcome::Failure { let_ms: g.get_time_ms }
            } else {
                LookupRecordOutcome::Success { lt_ms: g.get_time_ms }
            },
        })
        .collect();
    write_if_new(rep_dir, "summary.csv", &summary_rows(&result.windows, &records))?;

    let mut meta = String::from("key,value\n");
    let _ = writeln!(meta, "gets,{}", result.gets.len());
    let _ = writeln!(meta, "total_bytes,{}", result.total_bytes);
    write_if_new(rep_dir, "meta.csv", &meta)?;
    Ok(())
}

/// Execute every (scenario, policy, repetition) cell of the plan under
/// `out_dir`, skipping cells already marked complete.
pub fn run_plan(plan: &PlanConfig, out_dir: &Path) -> Result<Vec<CellRun>, PlanError> {
    fs::create_dir_all(out_dir)?;
    let mut runs = Vec::new();
    let mut execute = |cell: String,
                       rep: u32,
                       body: &dyn Fn(&Path, u64) -> Result<(), PlanError>,
                       scenario_seed: u64|
     -> Result<(), PlanError> {
        let rep_dir = out_dir.join(&cell).join(format!("rep{rep}"));
        if rep_dir.join(COMPLETE_MARKER).exists() {
            runs.push(CellRun { cell, rep, skipped: true });
            return Ok(());
        }
        fs::create_dir_all(&rep_dir)?;
        body(&rep_dir, scenario_seed)?;
        fs::write(rep_dir.join(COMPLETE_MARKER), "")?;
        runs.push(CellRun { cell, rep, skipped: false });
        Ok(())
    };

    match plan.layer.as_str() {
        "overlay" => {
            let cfg = plan.overlay.as_ref().expect("validated");
            for churn in &cfg.churns {
                for workload in &cfg.workloads {
                    for policy in &cfg.policies {
                        parse_churn(churn)?;
                        parse_policy(policy)?;
                        for rep in 0..plan.repetitions {
                            // The scenario seed ignores the policy so rivals
                            // face identical churn and workloads.
                            let scenario_seed = seeds::sub_seed(
                                plan.seed,
                                &format!("overlay|{churn}|{workload}|rep{rep}"),
                                0,
                            );
                            let cell = format!("overlay_{churn}_{workload}__{policy}");
                            execute(
                                cell,
                                rep,
                                &|dir, seed| {
                                    run_overlay_cell(cfg, churn, workload, policy, dir, seed)
                                },
                                scenario_seed,
                            )?;
                        }
                    }
                }
            }
        }
        "doc" => {
            let cfg = plan.doc.as_ref().expect("validated");
            for link in &cfg.links {
                for churn in &cfg.churns {
                    for workload in &cfg.workloads {
                        for size_kb in &cfg.sizes_kb {
                            for policy in &cfg.policies {
                                parse_link(link)?;
                                parse_doc_churn(churn)?;
                                parse_doc_policy(policy)?;
                                for rep in 0..plan.repetitions {
                                    let scenario_seed = seeds::sub_seed(
                                        plan.seed,
                                        &format!(
                                            "doc|{link}|{churn}|{workload}|{size_kb}|rep{rep}"
                                        ),
                                        0,
                                    );
                                    let cell = format!(
                                        "doc_{link}_{churn}_{workload}_{size_kb}kb__{policy}"
                                    );
                                    execute(
                                        cell,
                                        rep,
                                        &|dir, seed| {
                                            run_doc_cell(
                                                cfg, link, churn, workload, *size_kb, policy,
                                                dir, seed,
                                            )
                                        },
                                        scenario_seed,
                                    )?;
                                }
                            }
                        }
                    }
                }
            }
        }
        _ => unreachable!("validated at parse time"),
    }
    Ok(runs)
}

fn baseline_policy(cell: &str) -> &'static str {
    if cell.starts_with("doc_") {
        "static1"
    } else {
        "policy0"
    }
}

fn read_ulm(path: &Path) -> Result<(Vec<Option<f64>>, Vec<f64>), PlanError> {
    let text = fs::read_to_string(path)?;
    let mut elts = Vec::new();
    let mut nus = Vec::new();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            continue;
        }
        elts.push(fields[1].parse::<f64>().ok());
        nus.push(fields[2].parse::<f64>().unwrap_or(0.0));
    }
    Ok((elts, nus))
}

/// One row of the normalised summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub experiment: String,
    pub policy: String,
    pub mean_elt_ms: f64,
    pub mean_nu_bytes: f64,
    pub elt_vs_baseline: f64,
    pub nu_vs_baseline: f64,
    /// Reproducibility of the expected-time series across repetitions;
    /// absent with fewer than two repetitions.
    pub nsd_elt: Option<f64>,
}

/// Recompute the normalised user-level-metric table from a plan's output
/// directory: every policy's mean expected time and network usage per
/// experiment, as ratios against the baseline policy.
pub fn summarize_dir(dir: &Path) -> Result<Vec<SummaryRow>, PlanError> {
    // experiment -> policy -> per-rep (elt series, nu series)
    let mut tree: std::collections::BTreeMap<
        String,
        std::collections::BTreeMap<String, Vec<(Vec<Option<f64>>, Vec<f64>)>>,
    > = Default::default();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        if !entry.file_type()?.is_dir() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().to_string();
        let Some((experiment, policy)) = name.split_once("__") else {
            continue;
        };
        let mut reps: Vec<(u32, PathBuf)> = fs::read_dir(entry.path())?
            .filter_map(|r| r.ok())
            .filter_map(|r| {
                let rep_name = r.file_name().to_string_lossy().to_string();
                let idx: u32 = rep_name.strip_prefix("rep")?.parse().ok()?;
                Some((idx, r.path()))
            })
            .collect();
        reps.sort();
        for (_, rep_path) in reps {
            let ulm = rep_path.join("ulm.csv");
            if !ulm.exists() {
                continue;
            }
            tree.entry(experiment.to_string())
                .or_default()
                .entry(policy.to_string())
                .or_default()
                .push(read_ulm(&ulm)?);
        }
    }
    if tree.is_empty() {
        return Err(PlanError::EmptyDir(dir.to_path_buf()));
    }

    let pooled = |runs: &[(Vec<Option<f64>>, Vec<f64>)]| -> (f64, f64) {
        let elts: Vec<f64> = runs
            .iter()
            .flat_map(|(e, _)| e.iter().flatten().copied())
            .collect();
        let nus: Vec<f64> = runs.iter().flat_map(|(_, n)| n.iter().copied()).collect();
        let mean = |v: &[f64]| {
            if v.is_empty() {
                0.0
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            }
        };
        (mean(&elts), mean(&nus))
    };

    let mut rows = Vec::new();
    for (experiment, policies) in &tree {
        let baseline_name = baseline_policy(
            policies
                .keys()
                .next()
                .map(String::as_str)
                .map(|_| experiment.as_str())
                .unwrap_or(experiment),
        );
        let baseline = policies.get(baseline_name).ok_or_else(|| {
            PlanError::MissingBaseline(experiment.clone(), baseline_name.to_string())
        })?;
        let (base_elt, base_nu) = pooled(baseline);
        for (policy, runs) in policies {
            let (mean_elt, mean_nu) = pooled(runs);
            let nsd_elt = if runs.len() >= 2 {
                // Align windows: keep indexes where every repetition has a
                // value.
                let min_len = runs.iter().map(|(e, _)| e.len()).min().unwrap_or(0);
                let mut series: Vec<Vec<f64>> = vec![Vec::new(); runs.len()];
                for w in 0..min_len {
                    if runs.iter().all(|(e, _)| e[w].is_some()) {
                        for (k, (e, _)) in runs.iter().enumerate() {
                            series[k].push(e[w].unwrap());
                        }
                    }
                }
                if series[0].is_empty() {
                    None
                } else {
                    nsd(&series).ok()
                }
            } else {
                None
            };
            rows.push(SummaryRow {
                experiment: experiment.clone(),
                policy: policy.clone(),
                mean_elt_ms: mean_elt,
                mean_nu_bytes: mean_nu,
                elt_vs_baseline: if base_elt > 0.0 { mean_elt / base_elt } else { 0.0 },
                nu_vs_baseline: if base_nu > 0.0 { mean_nu / base_nu } else { 0.0 },
                nsd_elt,
            });
        }
    }
    Ok(rows)
}

pub fn summary_table_csv(rows: &[SummaryRow]) -> String {
    let mut out =
        String::from("experiment,policy,mean_elt_ms,mean_nu_bytes,elt_vs_baseline,nu_vs_baseline,nsd_elt\n");
    for r in rows {
        let nsd = r.nsd_elt.map(|v| format!("{v:.4}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{:.3},{:.0},{:.4},{:.4},{}",
            r.experiment, r.policy, r.mean_elt_ms, r.mean_nu_bytes, r.elt_vs_baseline,
            r.nu_vs_baseline, nsd
        );
    }
    out
}
