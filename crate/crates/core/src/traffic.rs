//! Offered load: session arrivals and durations, aggregate load, utilization
//! and the single-server queueing delay used for the bottleneck.

use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrafficError {
    #[error("rate must be finite and non-negative, got {0}")]
    InvalidRate(f64),
    #[error("time step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("mean session duration must be positive, got {0}")]
    InvalidMean(f64),
    #[error("capacity must be positive")]
    ZeroCapacity,
    #[error("queue saturated: arrival rate {lambda} >= service rate {mu}")]
    Saturated { lambda: f64, mu: f64 },
}

/// One piece of a piecewise-constant schedule, in effect from `from_s` until
/// the next segment starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub from_s: f64,
    pub value: f64,
}

/// Piecewise-constant rate over time. Repeats with `period_s` when set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSchedule {
    pub segments: Vec<Segment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_s: Option<f64>,
}

impl RateSchedule {
    pub fn constant(value: f64) -> Self {
        Self {
            segments: vec![Segment { from_s: 0.0, value }],
            period_s: None,
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        let t = match self.period_s {
            Some(p) if p > 0.0 => t.rem_euclid(p),
            _ => t,
        };
        let i = self.segments.partition_point(|s| s.from_s <= t);
        if i == 0 {
            0.0
        } else {
            self.segments[i - 1].value
        }
    }

    pub fn max_value(&self) -> f64 {
        self.segments.iter().map(|s| s.value).fold(0.0, f64::max)
    }

    pub(crate) fn violations(&self, what: &str) -> Vec<String> {
        let mut out = Vec::new();
        if self.segments.is_empty() {
            out.push(format!("{what} schedule must have at least one segment"));
            return out;
        }
        if self.segments[0].from_s != 0.0 {
            out.push(format!("{what} schedule must start at 0"));
        }
        if self.segments.windows(2).any(|w| w[1].from_s <= w[0].from_s) {
            out.push(format!("{what} schedule segments must be strictly increasing in time"));
        }
        if self.segments.iter().any(|s| !(s.value >= 0.0) || !s.value.is_finite()) {
            out.push(format!("{what} rates must be non-negative"));
        }
        if matches!(self.period_s, Some(p) if !(p > 0.0)) {
            out.push(format!("{what} schedule period must be positive"));
        }
        out
    }
}

/// Half-open time window `[start_s, end_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start_s: f64,
    pub end_s: f64,
}

impl Window {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.start_s && t < self.end_s
    }
}

fn default_packet_kbit() -> f64 {
    12.0
}

/// Offered-load description embedded in a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficParams {
    /// Session initiations per second.
    pub user_rate: RateSchedule,
    /// Broadcast-eligible video demand in Mbps.
    pub video_rate: RateSchedule,
    /// Mean of the exponential session duration, seconds.
    pub mean_session_s: f64,
    /// Nominal rate of one unicast session, Mbps.
    pub per_session_mbps: f64,
    /// Unicast capacity of the access network with the full spectrum, Mbps.
    pub total_capacity_mbps: f64,
    /// Mean packet size used to convert Mbps to a packet service rate.
    #[serde(default = "default_packet_kbit")]
    pub packet_kbit: f64,
    /// Busy-hour window used for peak KPIs.
    pub peak_window: Window,
}

impl TrafficParams {
    pub(crate) fn violations(&self) -> Vec<String> {
        let mut out = self.user_rate.violations("user_rate");
        out.extend(self.video_rate.violations("video_rate"));
        if !(self.mean_session_s > 0.0) {
            out.push("mean session duration must be positive".into());
        }
        if !(self.per_session_mbps >= 0.0) {
            out.push("per-session bandwidth must be non-negative".into());
        }
        if !(self.total_capacity_mbps > 0.0) {
            out.push("total capacity must be positive".into());
        }
        if !(self.packet_kbit > 0.0) {
            out.push("packet size must be positive".into());
        }
        if !(self.peak_window.end_s > self.peak_window.start_s) {
            out.push("peak window must have positive length".into());
        }
        out
    }
}

/// Instantaneous load observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadSample {
    pub time: f64,
    pub offered_load: f64,
    pub utilization: f64,
}

impl LoadSample {
    pub fn new(time: f64, offered_load: f64, capacity: f64) -> Result<Self, TrafficError> {
        Ok(Self {
            time,
            offered_load,
            utilization: utilization(offered_load, capacity)?,
        })
    }
}

/// Poisson-distributed number of arrivals in `dt` seconds at `rate` per second.
pub fn sample_arrivals<R: Rng + ?Sized>(rate: f64, dt: f64, rng: &mut R) -> Result<u64, TrafficError> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(TrafficError::InvalidRate(rate));
    }
    if !(dt > 0.0) {
        return Err(TrafficError::InvalidStep(dt));
    }
    let mean = rate * dt;
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|_| TrafficError::InvalidRate(rate))?;
    let draw: f64 = dist.sample(rng);
    Ok(draw as u64)
}

/// Exponential session duration with the given mean; always strictly positive.
pub fn sample_session_duration<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<f64, TrafficError> {
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(TrafficError::InvalidMean(mean));
    }
    let dist = Exp::new(1.0 / mean).map_err(|_| TrafficError::InvalidMean(mean))?;
    loop {
        let d: f64 = dist.sample(rng);
        if d > 0.0 {
            return Ok(d);
        }
    }
}

/// Aggregate offered load: user traffic plus broadcast-eligible video.
pub fn aggregate_load(user_mbps: f64, video_mbps: f64) -> f64 {
    user_mbps + video_mbps
}

/// Load over capacity. May exceed 1 under oversubscription.
pub fn utilization(load: f64, capacity: f64) -> Result<f64, TrafficError> {
    if !(capacity > 0.0) {
        return Err(TrafficError::ZeroCapacity);
    }
    Ok(load / capacity)
}

/// Mean sojourn time `1 / (mu - lambda)` of an M/M/1 queue, in the reciprocal
/// of the rate units.
pub fn mm1_latency(lambda: f64, mu: f64) -> Result<f64, TrafficError> {
    if !(lambda >= 0.0) {
        return Err(TrafficError::InvalidRate(lambda));
    }
    if !(mu > 0.0) {
        return Err(TrafficError::ZeroCapacity);
    }
    if lambda >= mu {
        return Err(TrafficError::Saturated { lambda, mu });
    }
    Ok(1.0 / (mu - lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn zero_rate_gives_zero() {
        let mut rng = substream(1, "t");
        for _ in 0..100 {
            assert_eq!(sample_arrivals(0.0, 1.0, &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn negative_rate_rejected() {
        let mut rng = substream(1, "t");
        assert_eq!(
            sample_arrivals(-1.0, 1.0, &mut rng),
            Err(TrafficError::InvalidRate(-1.0))
        );
        assert!(matches!(sample_arrivals(1.0, 0.0, &mut rng), Err(TrafficError::InvalidStep(_))));
    }

    #[test]
    fn poisson_moments() {
        // mean and variance of Poisson(5) are both 5; the standard error of the
        // sample mean is sqrt(5/n), of the sample variance about sqrt(2*25/n + 5/n).
        let n = 100_000;
        let mut rng = substream(42, "poisson");
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_arrivals(5.0, 1.0, &mut rng).unwrap() as f64)
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se_mean = (5.0 / n as f64).sqrt();
        let se_var = ((2.0 * 25.0 + 5.0) / n as f64).sqrt();
        assert!((mean - 5.0).abs() < 3.0 * se_mean, "mean {mean}");
        assert!((var - 5.0).abs() < 3.0 * se_var, "var {var}");
    }

    #[test]
    fn arrivals_are_deterministic() {
        let a: Vec<u64> = {
            let mut r = substream(9, "x");
            (0..50).map(|_| sample_arrivals(5.0, 1.0, &mut r).unwrap()).collect()
        };
        let b: Vec<u64> = {
            let mut r = substream(9, "x");
            (0..50).map(|_| sample_arrivals(5.0, 1.0, &mut r).unwrap()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn exponential_mean_and_memorylessness() {
        let n = 100_000;
        let mean = 180.0;
        let mut rng = substream(3, "exp");
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_session_duration(mean, &mut rng).unwrap())
            .collect();
        assert!(xs.iter().all(|&x| x > 0.0));
        let m = xs.iter().sum::<f64>() / n as f64;
        // sd of Exp(mean) equals the mean
        assert!((m - mean).abs() < 3.0 * mean / (n as f64).sqrt(), "mean {m}");

        // P(X > a + b | X > a) against P(X > b), a = b = mean
        let beyond_a: Vec<f64> = xs.iter().copied().filter(|&x| x > mean).collect();
        let cond = beyond_a.iter().filter(|&&x| x > 2.0 * mean).count() as f64 / beyond_a.len() as f64;
        let uncond = xs.iter().filter(|&&x| x > mean).count() as f64 / n as f64;
        let p = (-1.0f64).exp();
        let se = (p * (1.0 - p) / beyond_a.len() as f64).sqrt()
            + (p * (1.0 - p) / n as f64).sqrt();
        assert!((cond - uncond).abs() < 3.0 * se, "cond {cond} uncond {uncond}");
    }

    #[test]
    fn exponential_rejects_bad_mean_and_is_deterministic() {
        let mut rng = substream(3, "exp");
        assert_eq!(sample_session_duration(0.0, &mut rng), Err(TrafficError::InvalidMean(0.0)));
        let a = sample_session_duration(10.0, &mut substream(5, "e")).unwrap();
        let b = sample_session_duration(10.0, &mut substream(5, "e")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn load_and_utilization() {
        assert_eq!(aggregate_load(0.0, 0.0), 0.0);
        assert_eq!(aggregate_load(30.0, 12.0), 42.0);
        assert_eq!(utilization(50.0, 50.0).unwrap(), 1.0);
        assert!((utilization(56.0, 50.0).unwrap() - 1.12).abs() < 1e-12);
        assert_eq!(utilization(1.0, 0.0), Err(TrafficError::ZeroCapacity));
        let s = LoadSample::new(3.0, 56.0, 50.0).unwrap();
        assert_eq!(s.utilization, 56.0 / 50.0);
    }

    #[test]
    fn mm1() {
        assert_eq!(mm1_latency(0.0, 1.0).unwrap(), 1.0);
        assert!((mm1_latency(0.9, 1.0).unwrap() - 10.0).abs() < 1e-9);
        assert!(matches!(mm1_latency(1.0, 1.0), Err(TrafficError::Saturated { .. })));
    }

    #[test]
    fn schedule_lookup() {
        let s = RateSchedule {
            segments: vec![
                Segment { from_s: 0.0, value: 1.0 },
                Segment { from_s: 10.0, value: 3.0 },
            ],
            period_s: Some(20.0),
        };
        assert_eq!(s.at(0.0), 1.0);
        assert_eq!(s.at(9.99), 1.0);
        assert_eq!(s.at(10.0), 3.0);
        assert_eq!(s.at(25.0), 1.0);
        assert!(s.violations("x").is_empty());
        assert_eq!(s.max_value(), 3.0);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn mm1_monotone(mu in 0.1f64..100.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                prop_assume!(hi - lo > 1e-9 && hi < 0.999);
                prop_assert!(mm1_latency(lo * mu, mu).unwrap() < mm1_latency(hi * mu, mu).unwrap());
            }

            #[test]
            fn utilization_linear(load in 0.0f64..1e4, cap in 0.01f64..1e4, k in 0.0f64..100.0) {
                let lhs = utilization(k * load, cap).unwrap();
                let rhs = k * utilization(load, cap).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
            }

            #[test]
            fn aggregate_is_sum(u in 0.0f64..1e6, v in 0.0f64..1e6) {
                prop_assert_eq!(aggregate_load(u, v), u + v);
            }
        }
    }
}
