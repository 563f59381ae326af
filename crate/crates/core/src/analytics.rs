//! User-level metrics: failure-weighted expected completion times per
//! observation window, network usage, distribution summaries, normalisation
//! against a baseline and a reproducibility score.

use thiserror::Error;

/// Default observation window width.
pub const WINDOW_MS: u64 = 5 * 60_000;

/// Default retry cap of the expected-completion-time model.
pub const DEFAULT_RETRY_CAP: u32 = 16;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("failure probability must lie in [0, 1), got {0}")]
    FailureProbabilityOutOfRange(f64),
    #[error("no values to summarise")]
    Empty,
    #[error("baseline mean is zero")]
    ZeroBaseline,
    #[error("series lengths differ")]
    RaggedSeries,
    #[error("no successful completions available")]
    NoSuccesses,
}

/// One workload request observed at the gateway.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LookupRecord {
    pub issued_at_ms: u64,
    pub outcome: LookupRecordOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LookupRecordOutcome {
    /// Completed after this long.
    Success { lt_ms: f64 },
    /// Reported failure after this long.
    Failure { let_ms: f64 },
}

/// Expected completion time under fail-and-retry: the weighted sum over
/// "i failures, then success" for i = 0..=n. Runs that exhaust all retries
/// carry no weight, so the weights sum to 1 - p^(n+1).
pub fn expected_lookup_time(
    mean_lt: f64,
    mean_let: f64,
    p_failure: f64,
    n: u32,
) -> Result<f64, AnalyticsError> {
    if !(0.0..1.0).contains(&p_failure) {
        return Err(AnalyticsError::FailureProbabilityOutOfRange(p_failure));
    }
    let p_success = 1.0 - p_failure;
    let mut sum = 0.0;
    let mut weight = p_success; // p_success * p_failure^i
    for i in 0..=n {
        sum += (mean_lt + i as f64 * mean_let) * weight;
        weight *= p_failure;
    }
    Ok(sum)
}

/// Per-window aggregation of lookups and network usage.
#[derive(Debug, Clone, PartialEq)]
pub struct UlmWindow {
    pub from_ms: u64,
    pub to_ms: u64,
    /// Expected completion time; absent when the window saw no success.
    pub elt_ms: Option<f64>,
    pub nu_bytes: u64,
    /// Failure fraction in [0, 1].
    pub ler: f64,
    pub mean_lt_ms: Option<f64>,
    pub mean_let_ms: Option<f64>,
    pub lookups: usize,
}

/// Slice a run into fixed-width windows anchored at the first record.
/// Windows without any lookups are not emitted. Network usage counts the
/// bytes sent inside each window's bounds.
pub fn window_aggregate(
    records: &[LookupRecord],
    bytes_log: &[(u64, u64)],
    width_ms: u64,
    retry_cap: u32,
) -> Vec<UlmWindow> {
    assert!(width_ms > 0);
    let Some(first) = records.first() else {
        return Vec::new();
    };
    let origin = first.issued_at_ms;
    let mut buckets: std::collections::BTreeMap<u64, Vec<&LookupRecord>> =
        std::collections::BTreeMap::new();
    for r in records {
        assert!(r.issued_at_ms >= origin, "records must be time-sorted");
        buckets.entry((r.issued_at_ms - origin) / width_ms).or_default().push(r);
    }
    let mut windows = Vec::with_capacity(buckets.len());
    for (idx, bucket) in buckets {
        let from_ms = origin + idx * width_ms;
        let to_ms = from_ms + width_ms;
        let total = bucket.len();
        let mut lts = Vec::new();
        let mut lets = Vec::new();
        for r in &bucket {
            match r.outcome {
                LookupRecordOutcome::Success { lt_ms } => lts.push(lt_ms),
                LookupRecordOutcome::Failure { let_ms } => lets.push(let_ms),
            }
        }
        let ler = lets.len() as f64 / total as f64;
        let mean_lt = (!lts.is_empty()).then(|| lts.iter().sum::<f64>() / lts.len() as f64);
        let mean_let = (!lets.is_empty()).then(|| lets.iter().sum::<f64>() / lets.len() as f64);
        let elt_ms = mean_lt.map(|lt| {
            expected_lookup_time(lt, mean_let.unwrap_or(0.0), ler.min(1.0 - f64::EPSILON), retry_cap)
                .expect("ler < 1 when a success exists")
        });
        let nu_bytes = bytes_log
            .iter()
            .filter(|(t, _)| *t >= from_ms && *t < to_ms)
            .map(|(_, b)| *b)
            .sum();
        windows.push(UlmWindow {
            from_ms,
            to_ms,
            elt_ms,
            nu_bytes,
            ler,
            mean_lt_ms: mean_lt,
            mean_let_ms: mean_let,
            lookups: total,
        });
    }
    windows
}

/// One expected completion time over whole-run means and the whole-run
/// error rate, so windows that saw only errors still count.
pub fn holistic_elt(records: &[LookupRecord], retry_cap: u32) -> Result<f64, AnalyticsError> {
    let mut lts = Vec::new();
    let mut lets = Vec::new();
    for r in records {
        match r.outcome {
            LookupRecordOutcome::Success { lt_ms } => lts.push(lt_ms),
            LookupRecordOutcome::Failure { let_ms } => lets.push(let_ms),
        }
    }
    if lts.is_empty() {
        return Err(AnalyticsError::NoSuccesses);
    }
    let mean_lt = lts.iter().sum::<f64>() / lts.len() as f64;
    let mean_let = if lets.is_empty() {
        0.0
    } else {
        lets.iter().sum::<f64>() / lets.len() as f64
    };
    let p = lets.len() as f64 / records.len() as f64;
    expected_lookup_time(mean_lt, mean_let, p, retry_cap)
}

/// Mean, spread and quartiles of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSummary {
    pub mean: f64,
    /// Half-width of the 90% confidence interval of the mean
    /// (normal approximation, 1.645 * s / sqrt(N)).
    pub ci90_halfwidth: f64,
    /// Sample standard deviation.
    pub s: f64,
    pub min: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub max: f64,
    pub n: usize,
}

/// Quartile by linear interpolation between closest ranks
/// (position q * (N - 1) in the sorted sample).
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn summarize(values: &[f64]) -> Result<DistributionSummary, AnalyticsError> {
    if values.is_empty() {
        return Err(AnalyticsError::Empty);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let s = if n == 1 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    let ci90_halfwidth = 1.645 * s / (n as f64).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in summaries"));
    Ok(DistributionSummary {
        mean,
        ci90_halfwidth,
        s,
        min: sorted[0],
        q1: percentile(&sorted, 0.25),
        q2: percentile(&sorted, 0.5),
        q3: percentile(&sorted, 0.75),
        max: sorted[n - 1],
        n,
    })
}

/// Reproducibility score across repeated runs: per aligned window, the
/// population standard deviation over the runs normalised by their mean,
/// averaged over all windows with a non-zero mean. Identical runs score 0.
pub fn nsd(runs: &[Vec<f64>]) -> Result<f64, AnalyticsError> {
    assert!(runs.len() >= 2, "need at least two runs");
    let len = runs[0].len();
    if runs.iter().any(|r| r.len() != len) {
        return Err(AnalyticsError::RaggedSeries);
    }
    let mut ratios = Vec::with_capacity(len);
    for w in 0..len {
        let values: Vec<f64> = runs.iter().map(|r| r[w]).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        if mean == 0.0 {
            continue;
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
        ratios.push(var.sqrt() / mean);
    }
    if ratios.is_empty() {
        return Ok(0.0);
    }
    Ok(ratios.iter().sum::<f64>() / ratios.len() as f64)
}

/// Ratio of the mean of a policy's series to the baseline's; below 1 means
/// the policy improved on the baseline.
pub fn normalize(policy: &[f64], baseline: &[f64]) -> Result<f64, AnalyticsError> {
    if baseline.is_empty() || policy.is_empty() {
        return Err(AnalyticsError::Empty);
    }
    let base_mean = baseline.iter().sum::<f64>() / baseline.len() as f64;
    if base_mean == 0.0 {
        return Err(AnalyticsError::ZeroBaseline);
    }
    let pol_mean = policy.iter().sum::<f64>() / policy.len() as f64;
    Ok(pol_mean / base_mean)
}

/// CSV lines `window_start_ms,elt_ms,nu_bytes,ler`, empty field when no
/// expected time exists.
pub fn windows_to_csv(windows: &[UlmWindow]) -> String {
    let mut out = String::from("window_start_ms,elt_ms,nu_bytes,ler\n");
    for w in windows {
        let elt = w.elt_ms.map(|v| format!("{v:.3}")).unwrap_or_default();
        out.push_str(&format!("{},{},{},{:.6}\n", w.from_ms, elt, w.nu_bytes, w.ler));
    }
    out
}

/// CSV rows shaped like the distribution tables:
/// `metric,mean,ci90,s,min,q1,q2,q3,max`.
pub fn summaries_to_csv(rows: &[(&str, Option<DistributionSummary>)]) -> String {
    let mut out = String::from("metric,mean,ci90,s,min,q1,q2,q3,max\n");
    for (name, summary) in rows {
        match summary {
            Some(s) => out.push_str(&format!(
                "{},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3}\n",
                name, s.mean, s.ci90_halfwidth, s.s, s.min, s.q1, s.q2, s.q3, s.max
            )),
            None => out.push_str(&format!("{name},,,,,,,,\n")),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_failures_reduce_to_the_plain_mean() {
        assert_eq!(expected_lookup_time(500.0, 100.0, 0.0, 16).unwrap(), 500.0);
    }

    #[test]
    fn hand_evaluated_retry_sum() {
        // 0.5*500 + 0.25*600 + 0.125*700 + 0.0625*800 = 537.5; a million
        // truncated-retry samples land on the same value.
        let v = expected_lookup_time(500.0, 100.0, 0.5, 3).unwrap();
        assert!((v - 537.5).abs() < 1e-9, "{v}");
    }

    #[test]
    fn zero_retries_keeps_only_the_first_attempt() {
        let v = expected_lookup_time(500.0, 100.0, 0.25, 0).unwrap();
        assert!((v - 500.0 * 0.75).abs() < 1e-12);
    }

    #[test]
    fn certain_failure_is_rejected() {
        assert_eq!(
            expected_lookup_time(500.0, 100.0, 1.0, 4),
            Err(AnalyticsError::FailureProbabilityOutOfRange(1.0))
        );
    }

    #[test]
    fn expectation_monotone_in_failure_rate_and_error_time() {
        // Monotone in p on the operating range; near p = 1 the truncation
        // swallows nearly all runs and the sum falls back toward zero.
        let mut last = 0.0;
        for i in 0..=80 {
            let p = i as f64 / 100.0;
            let v = expected_lookup_time(500.0, 100.0, p, 16).unwrap();
            assert!(v >= last, "p={p}");
            last = v;
        }
        assert!(
            expected_lookup_time(500.0, 200.0, 0.5, 16).unwrap()
                > expected_lookup_time(500.0, 100.0, 0.5, 16).unwrap()
        );
        assert!(
            expected_lookup_time(500.0, 100.0, 0.5, 8).unwrap()
                > expected_lookup_time(500.0, 100.0, 0.5, 4).unwrap()
        );
    }

    fn success(at: u64, lt: f64) -> LookupRecord {
        LookupRecord {
            issued_at_ms: at,
            outcome: LookupRecordOutcome::Success { lt_ms: lt },
        }
    }

    fn failure(at: u64, let_ms: f64) -> LookupRecord {
        LookupRecord {
            issued_at_ms: at,
            outcome: LookupRecordOutcome::Failure { let_ms },
        }
    }

    #[test]
    fn all_success_window_reports_plain_mean() {
        let records = vec![success(0, 400.0), success(1000, 600.0)];
        let windows = window_aggregate(&records, &[], WINDOW_MS, 16);
        assert_eq!(windows.len(), 1);
        assert_eq!(windows[0].elt_ms, Some(500.0));
        assert_eq!(windows[0].ler, 0.0);
    }

    #[test]
    fn all_failure_window_has_no_expected_time() {
        let records = vec![failure(0, 50.0), failure(10, 70.0)];
        let windows = window_aggregate(&records, &[], WINDOW_MS, 16);
        assert_eq!(windows.len(), 1);
        assert_eq!(windows[0].elt_ms, None);
        assert_eq!(windows[0].ler, 1.0);
    }

    #[test]
    fn empty_windows_are_skipped_and_bytes_bucketed() {
        let records = vec![success(0, 100.0), success(2 * WINDOW_MS + 5, 100.0)];
        let bytes = vec![(10, 50u64), (2 * WINDOW_MS + 6, 70u64), (WINDOW_MS + 1, 999u64)];
        let windows = window_aggregate(&records, &bytes, WINDOW_MS, 16);
        assert_eq!(windows.len(), 2);
        assert_eq!(windows[0].nu_bytes, 50);
        assert_eq!(windows[1].nu_bytes, 70);
    }

    #[test]
    fn holistic_covers_error_only_windows() {
        let records = vec![success(0, 400.0), failure(WINDOW_MS, 100.0)];
        let v = holistic_elt(&records, 16).unwrap();
        let direct = expected_lookup_time(400.0, 100.0, 0.5, 16).unwrap();
        assert_eq!(v, direct);
        assert_eq!(
            holistic_elt(&[failure(0, 5.0)], 16),
            Err(AnalyticsError::NoSuccesses)
        );
        assert_eq!(holistic_elt(&[success(0, 400.0)], 16).unwrap(), 400.0);
    }

    #[test]
    fn summary_of_small_sample() {
        let s = summarize(&[5.0, 3.0, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(s.mean, 3.0);
        assert_eq!(s.q2, 3.0);
        assert_eq!(s.min, 1.0);
        assert_eq!(s.max, 5.0);
        assert_eq!(s.q1, 2.0);
        assert_eq!(s.q3, 4.0);
    }

    #[test]
    fn constant_sample_has_zero_spread() {
        let s = summarize(&[7.0; 12]).unwrap();
        assert_eq!(s.s, 0.0);
        assert_eq!(s.ci90_halfwidth, 0.0);
        assert_eq!(s.q1, 7.0);
    }

    #[test]
    fn summarize_is_permutation_invariant() {
        let a = summarize(&[9.0, 1.0, 5.0, 3.0, 7.0]).unwrap();
        let b = summarize(&[1.0, 3.0, 5.0, 7.0, 9.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_sample_is_an_error() {
        assert_eq!(summarize(&[]), Err(AnalyticsError::Empty));
    }

    #[test]
    fn identical_runs_have_zero_nsd() {
        let run = vec![120.0, 130.0, 110.0];
        assert_eq!(nsd(&[run.clone(), run.clone(), run]).unwrap(), 0.0);
    }

    #[test]
    fn constructed_nsd_value() {
        // Three runs of constant series 100/200/300: each window has
        // population sigma sqrt(20000/3) and mean 200.
        let runs = vec![vec![100.0; 3], vec![200.0; 3], vec![300.0; 3]];
        let v = nsd(&runs).unwrap();
        let expected = (20000.0f64 / 3.0).sqrt() / 200.0;
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 0.408).abs() < 5e-4, "{v}");
    }

    #[test]
    fn zero_mean_windows_are_skipped() {
        let runs = vec![vec![0.0, 100.0], vec![0.0, 300.0]];
        let v = nsd(&runs).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&[5.0, 5.0], &[5.0, 5.0]).unwrap(), 1.0);
        let r = normalize(&[445.0], &[613.0]).unwrap();
        assert!((r - 0.726).abs() < 0.001, "{r}");
        assert_eq!(normalize(&[0.0], &[10.0]).unwrap(), 0.0);
        assert_eq!(normalize(&[1.0], &[0.0]), Err(AnalyticsError::ZeroBaseline));
    }

    #[test]
    fn windows_csv_shape() {
        let records = vec![success(0, 100.0)];
        let csv = windows_to_csv(&window_aggregate(&records, &[], WINDOW_MS, 16));
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("window_start_ms,elt_ms,nu_bytes,ler"));
        assert_eq!(lines.next(), Some("0,100.000,0,0.000000"));
    }
}
