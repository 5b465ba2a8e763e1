//! Broker layer: failure injection, failover timing, recovery composition and
//! outage buffering.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scenario::{NodeId, Topology};

/// Triangular distribution on `[min, max]` peaking at `mode`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triangular {
    pub min: f64,
    pub mode: f64,
    pub max: f64,
}

impl Triangular {
    /// Symmetric about `mode`, spanning `mode * (1 ± spread)`. Its mean is
    /// `mode`.
    pub fn symmetric(mode: f64, spread: f64) -> Self {
        Self { min: mode * (1.0 - spread), mode, max: mode * (1.0 + spread) }
    }

    pub fn is_valid(&self) -> bool {
        self.min >= 0.0 && self.min <= self.mode && self.mode <= self.max && self.max.is_finite()
    }

    pub fn mean(&self) -> f64 {
        (self.min + self.mode + self.max) / 3.0
    }

    /// Inverse CDF at `u` in [0, 1].
    pub fn quantile(&self, u: f64) -> f64 {
        let (a, c, b) = (self.min, self.mode, self.max);
        if b == a {
            return a;
        }
        let fc = (c - a) / (b - a);
        if u < fc {
            a + (u * (b - a) * (c - a)).sqrt()
        } else {
            b - ((1.0 - u) * (b - a) * (b - c)).sqrt()
        }
    }

    /// Inversion sampling, so paired uniforms give paired draws across
    /// distributions.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    SingleNode,
    MultiNode,
}

/// Recovery-time distributions by failure kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryTable {
    pub single: Triangular,
    pub multi: Triangular,
}

impl RecoveryTable {
    pub fn for_kind(&self, kind: FailureKind) -> &Triangular {
        match kind {
            FailureKind::SingleNode => &self.single,
            FailureKind::MultiNode => &self.multi,
        }
    }

    pub(crate) fn is_valid(&self) -> bool {
        self.single.is_valid() && self.multi.is_valid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailoverMode {
    Centralized,
    DualLayer,
}

fn default_penalty() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrokerCluster {
    /// M.
    pub size: u32,
    pub replication_factor: u32,
    /// Seconds of flow absorbed at the start of each outage.
    pub buffer_s: f64,
    pub failover_mode: FailoverMode,
    pub dual_layer: RecoveryTable,
    pub centralized: RecoveryTable,
    /// Extra failover time, as a fraction, when nothing is replicated.
    #[serde(default = "default_penalty")]
    pub rereplication_penalty: f64,
}

impl Default for BrokerCluster {
    fn default() -> Self {
        Self {
            size: 5,
            replication_factor: 2,
            buffer_s: 4.0,
            failover_mode: FailoverMode::DualLayer,
            dual_layer: RecoveryTable {
                single: Triangular::symmetric(3.0, 0.4),
                multi: Triangular::symmetric(4.5, 0.4),
            },
            centralized: RecoveryTable {
                single: Triangular::symmetric(3.6, 0.4),
                multi: Triangular::symmetric(5.2, 0.4),
            },
            rereplication_penalty: 0.5,
        }
    }
}

impl BrokerCluster {
    pub(crate) fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.size == 0 {
            out.push("broker cluster size must be at least 1".into());
        }
        if self.replication_factor == 0 || self.replication_factor > self.size {
            out.push("replication factor must be between 1 and the cluster size".into());
        }
        if !(self.buffer_s >= 0.0) {
            out.push("buffer seconds must be non-negative".into());
        }
        if !self.dual_layer.is_valid() || !self.centralized.is_valid() {
            out.push("failover distribution must satisfy 0 <= min <= mode <= max".into());
        }
        if !(self.rereplication_penalty >= 0.0) {
            out.push("re-replication penalty must be non-negative".into());
        }
        out
    }

    pub fn table(&self) -> &RecoveryTable {
        match self.failover_mode {
            FailoverMode::DualLayer => &self.dual_layer,
            FailoverMode::Centralized => &self.centralized,
        }
    }

    fn penalty_factor(&self) -> f64 {
        if self.replication_factor == 1 {
            1.0 + self.rereplication_penalty
        } else {
            1.0
        }
    }

    /// Expected failover time for `kind`.
    pub fn mean_failover(&self, kind: FailureKind) -> f64 {
        self.table().for_kind(kind).mean() * self.penalty_factor()
    }
}

fn default_multi_size() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailurePlan {
    /// Failures per run.
    pub count: u32,
    /// Probability that a failure takes down several nodes at once.
    pub multi_node_fraction: f64,
    /// Nodes lost in a multi-node failure.
    #[serde(default = "default_multi_size")]
    pub multi_node_size: usize,
    /// Injection horizon T; defaults to the run duration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_s: Option<f64>,
}

impl Default for FailurePlan {
    fn default() -> Self {
        Self { count: 0, multi_node_fraction: 0.0, multi_node_size: 2, horizon_s: None }
    }
}

impl FailurePlan {
    pub(crate) fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(0.0..=1.0).contains(&self.multi_node_fraction) {
            out.push("multi-node fraction must be in [0, 1]".into());
        }
        if self.multi_node_size < 2 {
            out.push("multi-node failures must involve at least 2 nodes".into());
        }
        if matches!(self.horizon_s, Some(h) if !(h >= 0.0)) {
            out.push("failure horizon must be non-negative".into());
        }
        out
    }
}

/// One injected failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub time: f64,
    pub nodes: Vec<NodeId>,
    pub kind: FailureKind,
}

/// Draws failure instants uniformly on `[0, horizon]` and their targets
/// uniformly from infrastructure nodes (without replacement within an event).
/// Sorted by time.
pub fn inject_failures<R: Rng + ?Sized>(
    plan: &FailurePlan,
    topology: &Topology,
    horizon: f64,
    rng: &mut R,
) -> Vec<Failure> {
    let pool = topology.infrastructure_ids();
    let horizon = plan.horizon_s.unwrap_or(horizon);
    let mut out = Vec::with_capacity(plan.count as usize);
    for _ in 0..plan.count {
        let time = rng.random::<f64>() * horizon;
        let multi = rng.random::<f64>() < plan.multi_node_fraction;
        let (kind, want) = if multi {
            (FailureKind::MultiNode, plan.multi_node_size)
        } else {
            (FailureKind::SingleNode, 1)
        };
        let k = want.min(pool.len());
        let mut nodes: Vec<NodeId> = index::sample(rng, pool.len(), k).into_iter().map(|i| pool[i]).collect();
        nodes.sort_unstable();
        out.push(Failure { time, nodes, kind });
    }
    out.sort_by(|a, b| a.time.total_cmp(&b.time));
    out
}

/// Broker failover time for one failure.
pub fn failover_time<R: Rng + ?Sized>(cluster: &BrokerCluster, kind: FailureKind, rng: &mut R) -> f64 {
    cluster.table().for_kind(kind).sample(rng) * cluster.penalty_factor()
}

pub fn compose_recovery(t_sdwmn: f64, t_kafka: f64) -> f64 {
    t_sdwmn + t_kafka
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryEvent {
    pub time: f64,
    pub nodes: Vec<NodeId>,
    pub failure_kind: FailureKind,
    pub t_sdwmn: f64,
    pub t_kafka: f64,
    pub t_rec: f64,
}

impl RecoveryEvent {
    pub fn new(failure: &Failure, t_sdwmn: f64, t_kafka: f64) -> Self {
        Self {
            time: failure.time,
            nodes: failure.nodes.clone(),
            failure_kind: failure.kind,
            t_sdwmn,
            t_kafka,
            t_rec: compose_recovery(t_sdwmn, t_kafka),
        }
    }
}

/// Loss left after buffering: the first `buffer_s` seconds of an outage are
/// absorbed and the remainder is lost in proportion.
pub fn residual_loss(raw_loss: f64, outage_s: f64, buffer_s: f64) -> f64 {
    if outage_s <= 0.0 {
        return 0.0;
    }
    raw_loss * ((outage_s - buffer_s).max(0.0) / outage_s)
}
