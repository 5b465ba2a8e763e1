//! KPI formulas and replication statistics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("input is empty")]
    EmptyInput,
    #[error("all values are zero")]
    AllZero,
    #[error("nothing was sent")]
    NothingSent,
    #[error("normalizing maximum must be positive")]
    ZeroMax,
    #[error("weights must be non-negative and sum to 1")]
    BadWeights,
    #[error("baseline value is zero")]
    ZeroBase,
    #[error("at least two samples are needed, got {0}")]
    TooFewSamples(usize),
    #[error("only the 0.95 confidence level is tabulated, got {0}")]
    UnsupportedLevel(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

/// Normalization constants and per-mode scalars used by the composite KPIs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiParams {
    pub l_max_ms: f64,
    pub theta_max_mbps: f64,
    /// Recovery-time normalizer for the composite loss.
    pub t_norm_s: f64,
    /// Latency reported while the bottleneck is saturated.
    pub latency_cap_ms: f64,
    /// Required coverage fraction.
    pub coverage_requirement: f64,
    /// Cost-efficiency component of the performance index, per mode.
    pub cost_efficiency_baseline: f64,
    pub cost_efficiency_proposed: f64,
}

impl Default for KpiParams {
    fn default() -> Self {
        Self {
            l_max_ms: 200.0,
            theta_max_mbps: 50.0,
            t_norm_s: 20.0,
            latency_cap_ms: 500.0,
            coverage_requirement: 1.0,
            cost_efficiency_baseline: 0.6,
            cost_efficiency_proposed: 0.8,
        }
    }
}

impl KpiParams {
    pub(crate) fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.l_max_ms > 0.0 && self.theta_max_mbps > 0.0 && self.t_norm_s > 0.0) {
            out.push("kpi maxima and recovery normalizer must be positive".into());
        }
        if !(self.latency_cap_ms > 0.0) {
            out.push("latency cap must be positive".into());
        }
        if !(self.coverage_requirement > 0.0 && self.coverage_requirement <= 1.0) {
            out.push("coverage requirement must be in (0, 1]".into());
        }
        let ce = [self.cost_efficiency_baseline, self.cost_efficiency_proposed];
        if ce.iter().any(|c| !(0.0..=1.0).contains(c)) {
            out.push("cost efficiency must be in [0, 1]".into());
        }
        out
    }
}

/// Per-run KPIs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiSnapshot {
    /// Time mean of the per-step 95th-percentile user latency, ms.
    pub latency_p95_ms: f64,
    /// Mean delivered unicast throughput, Mbps.
    pub throughput_mbps: f64,
    pub throughput_per_user_mbps: f64,
    pub loss: f64,
    pub jain: f64,
    pub cqs: f64,
    pub t_rec_mean_s: f64,
    pub t_rec_single_s: f64,
    pub t_rec_multi_s: f64,
    /// Mean bottleneck utilization over the peak window.
    pub rho_u: f64,
    pub delta_r: f64,
    pub beff_peak: f64,
    pub beff_mean: f64,
    pub d_mesh_mean: f64,
    pub gpl: f64,
    pub gpi: f64,
}

impl KpiSnapshot {
    /// Named numeric fields in a fixed order, for aggregation and CSV output.
    pub fn fields(&self) -> [(&'static str, f64); 16] {
        [
            ("latency_p95_ms", self.latency_p95_ms),
            ("throughput_mbps", self.throughput_mbps),
            ("throughput_per_user_mbps", self.throughput_per_user_mbps),
            ("loss", self.loss),
            ("jain", self.jain),
            ("cqs", self.cqs),
            ("t_rec_mean_s", self.t_rec_mean_s),
            ("t_rec_single_s", self.t_rec_single_s),
            ("t_rec_multi_s", self.t_rec_multi_s),
            ("rho_u", self.rho_u),
            ("delta_r", self.delta_r),
            ("beff_peak", self.beff_peak),
            ("beff_mean", self.beff_mean),
            ("d_mesh_mean", self.d_mesh_mean),
            ("gpl", self.gpl),
            ("gpi", self.gpi),
        ]
    }

    /// Metrics where a lower value is better.
    pub fn lower_is_better(name: &str) -> bool {
        matches!(
            name,
            "latency_p95_ms"
                | "loss"
                | "t_rec_mean_s"
                | "t_rec_single_s"
                | "t_rec_multi_s"
                | "rho_u"
                | "delta_r"
                | "d_mesh_mean"
                | "gpl"
        )
    }
}

/// `(Σx)² / (n·Σx²)`.
pub fn jain_index(xs: &[f64]) -> Result<f64, MetricsError> {
    if xs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if xs.iter().any(|x| !(*x >= 0.0)) {
        return Err(MetricsError::InvalidArgument("throughputs must be non-negative"));
    }
    let sum: f64 = xs.iter().sum();
    let sq: f64 = xs.iter().map(|x| x * x).sum();
    if sq == 0.0 {
        return Err(MetricsError::AllZero);
    }
    Ok((sum * sum / (xs.len() as f64 * sq)).min(1.0))
}

/// Nearest-rank percentile: the sorted sample at rank `ceil(p·n)`.
pub fn percentile(samples: &[f64], p: f64) -> Result<f64, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(MetricsError::InvalidArgument("percentile must be in [0, 1]"));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(nearest_rank_sorted(&v, p))
}

pub(crate) fn nearest_rank_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = (p * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

pub fn loss_rate(lost: u64, sent: u64) -> Result<f64, MetricsError> {
    if sent == 0 {
        return Err(MetricsError::NothingSent);
    }
    if lost > sent {
        return Err(MetricsError::InvalidArgument("lost exceeds sent"));
    }
    Ok(lost as f64 / sent as f64)
}

/// Composite quality score. Latency above `l_max` and throughput above
/// `theta_max` saturate their terms.
pub fn cqs(l: f64, l_max: f64, theta: f64, theta_max: f64, jain: f64, w: [f64; 3]) -> Result<f64, MetricsError> {
    if !(l_max > 0.0 && theta_max > 0.0) {
        return Err(MetricsError::ZeroMax);
    }
    if w.iter().any(|x| !(*x >= 0.0)) {
        return Err(MetricsError::BadWeights);
    }
    let l = l.clamp(0.0, l_max);
    let theta = theta.clamp(0.0, theta_max);
    Ok(w[0] * (1.0 - l / l_max) + w[1] * theta / theta_max + w[2] * jain)
}

/// Composite global loss over congestion, coverage deficit and normalized
/// recovery time.
pub fn gpl(rho_u: f64, delta_r: f64, t_rec_norm: f64, w: [f64; 3]) -> f64 {
    w[0] * rho_u + w[1] * delta_r + w[2] * t_rec_norm
}

/// Composite performance index; weights must sum to 1.
pub fn gpi(qos: f64, r_cov: f64, c_eff: f64, w: [f64; 3]) -> Result<f64, MetricsError> {
    if w.iter().any(|x| !(*x >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(MetricsError::BadWeights);
    }
    Ok(w[0] * qos + w[1] * r_cov + w[2] * c_eff)
}

/// `(base − new) / base`: positive when `new` is smaller. For gains use
/// `-relative_change(base, new)`.
pub fn relative_change(base: f64, new: f64) -> Result<f64, MetricsError> {
    if base == 0.0 {
        return Err(MetricsError::ZeroBase);
    }
    Ok((base - new) / base)
}

/// Two-sided 97.5% Student-t quantiles for df = 1..=30.
const T_975: [f64; 30] = [
    12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912, 2.364624, 2.306004, 2.262157, 2.228139,
    2.200985, 2.178813, 2.160369, 2.144787, 2.131450, 2.119905, 2.109816, 2.100922, 2.093024, 2.085963,
    2.079614, 2.073873, 2.068658, 2.063899, 2.059539, 2.055529, 2.051831, 2.048407, 2.045230, 2.042272,
];
const Z_975: f64 = 1.959964;

/// Critical value for a 95% interval with `df` degrees of freedom. Beyond the
/// table the normal quantile is used.
pub fn t_critical(df: usize) -> f64 {
    match df {
        0 => f64::INFINITY,
        1..=30 => T_975[df - 1],
        _ => Z_975,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub mean: f64,
    pub half_width: f64,
    pub level: f64,
    pub n: usize,
}

impl ConfidenceInterval {
    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if !xs.is_empty() && xs.iter().all(|x| *x == xs[0]) {
        return xs[0];
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.iter().all(|x| *x == xs[0]) {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// `mean ± t·s/√n` at the 95% level.
pub fn confidence_interval(samples: &[f64], level: f64) -> Result<ConfidenceInterval, MetricsError> {
    if (level - 0.95).abs() > 1e-12 {
        return Err(MetricsError::UnsupportedLevel(level));
    }
    let n = samples.len();
    if n < 2 {
        return Err(MetricsError::TooFewSamples(n));
    }
    let m = mean(samples);
    let s = std_dev(samples);
    Ok(ConfidenceInterval { mean: m, half_width: t_critical(n - 1) * s / (n as f64).sqrt(), level, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jain_examples() {
        assert_eq!(jain_index(&[5.0; 4]).unwrap(), 1.0);
        assert!((jain_index(&[1.0, 2.0, 3.0]).unwrap() - 36.0 / 42.0).abs() < 1e-12);
        assert_eq!(jain_index(&[]), Err(MetricsError::EmptyInput));
        assert_eq!(jain_index(&[0.0, 0.0]), Err(MetricsError::AllZero));
        assert!((jain_index(&[7.0, 0.0, 0.0, 0.0]).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn percentile_examples() {
        assert_eq!(percentile(&[10.0], 0.95).unwrap(), 10.0);
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.95).unwrap(), 95.0);
        assert_eq!(percentile(&v, 1.0).unwrap(), 100.0);
        assert_eq!(percentile(&v, 0.0).unwrap(), 1.0);
        assert_eq!(percentile(&[], 0.5), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn loss_examples() {
        assert_eq!(loss_rate(0, 100).unwrap(), 0.0);
        assert_eq!(loss_rate(41, 1000).unwrap(), 0.041);
        assert_eq!(loss_rate(18, 1000).unwrap(), 0.018);
        assert_eq!(loss_rate(0, 0), Err(MetricsError::NothingSent));
    }

    #[test]
    fn cqs_examples() {
        let w = [0.4, 0.4, 0.2];
        assert!((cqs(0.0, 200.0, 50.0, 50.0, 1.0, w).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cqs(200.0, 200.0, 0.0, 50.0, 0.0, w).unwrap(), 0.0);
        let v = cqs(92.0, 200.0, 36.7, 50.0, 0.91, w).unwrap();
        assert!((v - 0.6916).abs() < 1e-9, "{v}");
        // saturation
        assert_eq!(cqs(900.0, 200.0, 80.0, 50.0, 0.0, w).unwrap(), 0.4);
        assert_eq!(cqs(1.0, 0.0, 1.0, 1.0, 1.0, w), Err(MetricsError::ZeroMax));
    }

    #[test]
    fn gpl_gpi_examples() {
        assert_eq!(gpl(0.0, 0.0, 0.0, [0.4, 0.3, 0.3]), 0.0);
        let v = gpl(1.12, 0.64, 12.6 / 20.0, [0.4, 0.3, 0.3]);
        assert!((v - 0.829).abs() < 1e-9, "{v}");
        let w = [0.4, 0.3, 0.3];
        assert!((gpi(1.0, 1.0, 1.0, w).unwrap() - 1.0).abs() < 1e-12);
        assert!((gpi(0.9, 0.8, 0.8, w).unwrap() - 0.84).abs() < 1e-12);
        assert_eq!(gpi(1.0, 1.0, 1.0, [0.5, 0.5, 0.5]), Err(MetricsError::BadWeights));
    }

    #[test]
    fn relative_change_examples() {
        assert!((relative_change(145.0, 92.0).unwrap() - 0.3655).abs() < 5e-5);
        assert!((-relative_change(28.4, 36.7).unwrap() - 0.2923).abs() < 5e-5);
        assert_eq!(relative_change(3.0, 3.0).unwrap(), 0.0);
        assert_eq!(relative_change(0.0, 1.0), Err(MetricsError::ZeroBase));
    }

    #[test]
    fn t_table() {
        // standard t-table values
        assert!((t_critical(9) - 2.262).abs() < 5e-4);
        assert!((t_critical(1) - 12.706).abs() < 5e-4);
        assert!((t_critical(30) - 2.042).abs() < 5e-4);
        assert!((t_critical(120) - 1.960).abs() < 5e-4);
        assert!(T_975.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn ci_examples() {
        let ci = confidence_interval(&[4.2; 10], 0.95).unwrap();
        assert_eq!(ci.half_width, 0.0);
        assert_eq!(ci.mean, 4.2);
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ci = confidence_interval(&xs, 0.95).unwrap();
        let s = (82.5f64 / 9.0).sqrt();
        assert!((ci.half_width - 2.262157 * s / 10f64.sqrt()).abs() < 1e-9);
        assert_eq!(confidence_interval(&[1.0], 0.95), Err(MetricsError::TooFewSamples(1)));
        assert!(matches!(confidence_interval(&xs, 0.9), Err(MetricsError::UnsupportedLevel(_))));
    }

    #[test]
    fn ci_back_solved_spread() {
        // alternating 145 ± 4 over ten samples: s = 4·sqrt(10/9), s/sqrt(10) = 4/3
        let xs: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 141.0 } else { 149.0 }).collect();
        let ci = confidence_interval(&xs, 0.95).unwrap();
        assert!((ci.mean - 145.0).abs() < 1e-9);
        assert!((ci.lower() - 142.0).abs() < 0.05 && (ci.upper() - 148.0).abs() < 0.05, "{ci:?}");
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn jain_scale_invariant(xs in prop::collection::vec(0.01f64..100.0, 1..50), k in 0.01f64..100.0) {
                let a = jain_index(&xs).unwrap();
                let scaled: Vec<f64> = xs.iter().map(|x| x * k).collect();
                prop_assert!((a - jain_index(&scaled).unwrap()).abs() < 1e-12);
                prop_assert!(a >= 1.0 / xs.len() as f64 - 1e-12 && a <= 1.0);
            }

            #[test]
            fn percentile_is_element(xs in prop::collection::vec(-1e6f64..1e6, 1..60), p in 0.0f64..=1.0) {
                let v = percentile(&xs, p).unwrap();
                prop_assert!(xs.contains(&v));
            }

            #[test]
            fn cqs_monotone(l1 in 0.0f64..400.0, l2 in 0.0f64..400.0, t in 0.0f64..80.0, j in 0.0f64..=1.0) {
                let w = [0.4, 0.4, 0.2];
                let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
                prop_assert!(cqs(hi, 200.0, t, 50.0, j, w).unwrap() <= cqs(lo, 200.0, t, 50.0, j, w).unwrap());
                prop_assert!(cqs(lo, 200.0, t + 1.0, 50.0, j, w).unwrap() >= cqs(lo, 200.0, t, 50.0, j, w).unwrap());
                let c = cqs(lo, 200.0, t, 50.0, j, w).unwrap();
                prop_assert!((0.0..=1.0 + 1e-12).contains(&c));
            }

            #[test]
            fn gpi_of_equal_components(c in 0.0f64..=1.0) {
                prop_assert!((gpi(c, c, c, [0.4, 0.3, 0.3]).unwrap() - c).abs() < 1e-12);
            }

            #[test]
            fn gpl_linear(r in 0.0f64..5.0, d in 0.0f64..1.0, t in 0.0f64..3.0, k in 0.0f64..10.0) {
                let w = [0.4, 0.3, 0.3];
                prop_assert!((gpl(k * r, k * d, k * t, w) - k * gpl(r, d, t, w)).abs() < 1e-9);
            }
        }
    }
}
