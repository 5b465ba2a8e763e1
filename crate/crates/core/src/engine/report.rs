use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{EngineError, RunResult, ATTRIBUTION_METRICS};
use crate::metrics::{confidence_interval, relative_change, ConfidenceInterval, KpiSnapshot};
use crate::scenario::Mode;

/// KPI means and 95% intervals over a set of runs of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scenario: String,
    pub family: String,
    pub mode: Mode,
    pub seeds: Vec<u64>,
    pub per_run: Vec<KpiSnapshot>,
    pub means: BTreeMap<String, f64>,
    /// Empty for a single run.
    pub intervals: BTreeMap<String, ConfidenceInterval>,
}

impl Aggregate {
    pub fn from_runs(runs: &[RunResult]) -> Result<Self, EngineError> {
        let first = runs.first().ok_or(EngineError::NoRuns)?;
        if runs.iter().any(|r| r.family != first.family || r.mode != first.mode) {
            return Err(EngineError::MismatchedScenarios);
        }
        let per_run: Vec<KpiSnapshot> = runs.iter().map(|r| r.kpis.clone()).collect();
        let mut means = BTreeMap::new();
        let mut intervals = BTreeMap::new();
        for (i, (name, _)) in first.kpis.fields().iter().enumerate() {
            let xs: Vec<f64> = per_run.iter().map(|k| k.fields()[i].1).collect();
            means.insert(name.to_string(), crate::metrics::mean(&xs));
            if xs.len() >= 2 {
                intervals.insert(name.to_string(), confidence_interval(&xs, 0.95)?);
            }
        }
        Ok(Self {
            scenario: first.scenario.clone(),
            family: first.family.clone(),
            mode: first.mode,
            seeds: runs.iter().map(|r| r.seed).collect(),
            per_run,
            means,
            intervals,
        })
    }

    pub fn mean(&self, metric: &str) -> f64 {
        self.means.get(metric).copied().unwrap_or(f64::NAN)
    }
}

/// Per-metric shares of the total degradation caused by switching each layer
/// off. Metrics with no degradation at all are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub seed: u64,
    pub degradation: BTreeMap<String, BTreeMap<String, f64>>,
    pub shares: BTreeMap<String, BTreeMap<String, f64>>,
}

impl Attribution {
    pub(super) fn from_runs(full: &RunResult, offs: &[(&str, RunResult)]) -> Self {
        let value = |r: &RunResult, m: &str| {
            r.kpis.fields().iter().find(|(n, _)| *n == m).map(|(_, v)| *v).expect("known metric")
        };
        let mut degradation = BTreeMap::new();
        let mut shares = BTreeMap::new();
        for m in ATTRIBUTION_METRICS {
            let base = value(full, m);
            let deg: BTreeMap<String, f64> = offs
                .iter()
                .map(|(layer, r)| {
                    let v = value(r, m);
                    let d = if KpiSnapshot::lower_is_better(m) { v - base } else { base - v };
                    (layer.to_string(), d.max(0.0))
                })
                .collect();
            let total: f64 = deg.values().sum();
            if total > 0.0 {
                shares.insert(m.to_string(), deg.iter().map(|(k, d)| (k.clone(), d / total)).collect());
            }
            degradation.insert(m.to_string(), deg);
        }
        Self { seed: full.seed, degradation, shares }
    }
}

/// Baseline against proposed over one scenario family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub family: String,
    pub baseline: Aggregate,
    pub proposed: Aggregate,
    /// `(baseline − proposed) / baseline` per metric; metrics whose
    /// baseline mean is zero are omitted.
    pub deltas: BTreeMap<String, f64>,
    /// Deltas signed so that positive means the proposed side is better.
    pub improvements: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribution: Option<Attribution>,
}

impl ComparisonReport {
    pub fn new(baseline: &Aggregate, proposed: &Aggregate) -> Result<Self, EngineError> {
        if baseline.family != proposed.family {
            return Err(EngineError::MismatchedScenarios);
        }
        let mut deltas = BTreeMap::new();
        let mut improvements = BTreeMap::new();
        for (name, &b) in &baseline.means {
            let p = proposed.mean(name);
            if let Ok(d) = relative_change(b, p) {
                deltas.insert(name.clone(), d);
                let sign = if KpiSnapshot::lower_is_better(name) { 1.0 } else { -1.0 };
                improvements.insert(name.clone(), sign * d);
            }
        }
        Ok(Self {
            family: baseline.family.clone(),
            baseline: baseline.clone(),
            proposed: proposed.clone(),
            deltas,
            improvements,
            attribution: None,
        })
    }
}

#[derive(Serialize)]
struct CsvRow {
    t: u64,
    lambda_mbps: f64,
    rho: f64,
    latency_ms: f64,
    throughput_mbps: f64,
    loss: f64,
    beff: f64,
    alpha_s: f64,
}

/// Per-sample CSV with header
/// `t,lambda_mbps,rho,latency_ms,throughput_mbps,loss,beff,alpha_s`.
pub fn write_samples_csv<W: Write>(run: &RunResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in &run.samples {
        w.serialize(CsvRow {
            t: s.t,
            lambda_mbps: s.lambda_mbps,
            rho: s.rho,
            latency_ms: s.latency_ms,
            throughput_mbps: s.throughput_mbps,
            loss: s.loss,
            beff: s.beff,
            alpha_s: s.alpha_s,
        })?;
    }
    w.flush()?;
    Ok(())
}
