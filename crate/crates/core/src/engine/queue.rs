//! Event-level single-server FIFO queue, used to check the closed-form
//! queueing delay the fluid engine relies on.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::traffic::TrafficError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueStats {
    pub customers: u64,
    /// Mean time in system (wait plus service).
    pub mean_sojourn: f64,
    pub mean_wait: f64,
}

/// Simulates `customers` arrivals to an M/M/1 queue with the Lindley
/// recursion `W' = max(0, W + S − A)`. The queue starts empty.
pub fn mm1_des<R: Rng + ?Sized>(
    lambda: f64,
    mu: f64,
    customers: u64,
    rng: &mut R,
) -> Result<QueueStats, TrafficError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(TrafficError::InvalidRate(lambda));
    }
    if !(mu > 0.0) {
        return Err(TrafficError::ZeroCapacity);
    }
    let inter = Exp::new(lambda).map_err(|_| TrafficError::InvalidRate(lambda))?;
    let service = Exp::new(mu).map_err(|_| TrafficError::ZeroCapacity)?;
    let (mut wait, mut total_wait, mut total_sojourn) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..customers {
        let s: f64 = service.sample(rng);
        total_wait += wait;
        total_sojourn += wait + s;
        let a: f64 = inter.sample(rng);
        wait = (wait + s - a).max(0.0);
    }
    let n = customers.max(1) as f64;
    Ok(QueueStats { customers, mean_sojourn: total_sojourn / n, mean_wait: total_wait / n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::traffic::mm1_latency;

    #[test]
    fn light_load_is_service_time() {
        let s = mm1_des(0.001, 1.0, 100_000, &mut substream(1, "q")).unwrap();
        assert!((s.mean_sojourn - 1.0).abs() < 0.02);
    }

    #[test]
    fn matches_closed_form_at_half_load() {
        let s = mm1_des(0.5, 1.0, 400_000, &mut substream(2, "q")).unwrap();
        let expect = mm1_latency(0.5, 1.0).unwrap();
        assert!((s.mean_sojourn / expect - 1.0).abs() < 0.03, "{s:?}");
    }
}
