//! Software-defined mesh layer: minimum-hop routing over infrastructure nodes,
//! mean path length ("mesh diameter"), control-plane latency, rerouting and
//! control overhead.
//!
//! The mesh diameter here is the mean shortest-path hop count over connected
//! ordered pairs, not the maximum eccentricity. It varies smoothly as nodes
//! fail and recover, which a max would not.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::broker::{RecoveryTable, Triangular};
use crate::scenario::{NodeId, Topology};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("controller rate must be positive, got {0}")]
    ZeroControllerRate(f64),
}

const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshParams {
    /// Controller processing rate, hops per millisecond.
    pub v_sdn: f64,
    /// Rerouting time with the programmable mesh controller.
    pub assisted_recovery: RecoveryTable,
    /// Restoration time of a conventional network without it.
    pub unassisted_recovery: RecoveryTable,
    /// Control messages per node pair per update.
    pub control_msgs_per_pair: f64,
}

impl Default for MeshParams {
    fn default() -> Self {
        Self {
            v_sdn: 0.05,
            assisted_recovery: RecoveryTable {
                single: Triangular::symmetric(5.1, 0.4),
                multi: Triangular::symmetric(7.2, 0.4),
            },
            unassisted_recovery: RecoveryTable {
                single: Triangular::symmetric(9.0, 0.4),
                multi: Triangular::symmetric(13.2, 0.4),
            },
            control_msgs_per_pair: 1.0,
        }
    }
}

impl MeshParams {
    pub(crate) fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.v_sdn > 0.0) {
            out.push("controller rate v_sdn must be positive".into());
        }
        if !(self.control_msgs_per_pair >= 0.0) {
            out.push("control messages per pair must be non-negative".into());
        }
        if !self.assisted_recovery.is_valid() || !self.unassisted_recovery.is_valid() {
            out.push("mesh recovery distribution must satisfy 0 <= min <= mode <= max".into());
        }
        out
    }
}

/// Nodes and links removed from the graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FailedSet {
    pub nodes: BTreeSet<NodeId>,
    /// Links by ascending endpoint pair.
    pub links: BTreeSet<(NodeId, NodeId)>,
}

impl FailedSet {
    pub fn nodes(ids: impl IntoIterator<Item = NodeId>) -> Self {
        Self { nodes: ids.into_iter().collect(), links: BTreeSet::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.links.is_empty()
    }
}

/// All-pairs minimum-hop routes over the surviving infrastructure graph.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingState {
    ids: Vec<NodeId>,
    index: BTreeMap<NodeId, usize>,
    adj: Vec<Vec<usize>>,
    dist: Vec<u32>,
    next: Vec<u32>,
    /// Mean hop count over connected ordered pairs; 0 when there are none.
    pub d_mesh: f64,
    pub connected_pairs: usize,
    pub disconnected_pairs: usize,
    /// Controller processing rate, hops/ms.
    pub v_sdn: f64,
}

impl RoutingState {
    fn n(&self) -> usize {
        self.ids.len()
    }

    /// Routed node ids, ascending.
    pub fn node_ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn hops(&self, s: NodeId, d: NodeId) -> Option<u32> {
        let (i, j) = (*self.index.get(&s)?, *self.index.get(&d)?);
        let h = self.dist[i * self.n() + j];
        (h != UNREACHABLE).then_some(h)
    }

    pub fn next_hop(&self, s: NodeId, d: NodeId) -> Option<NodeId> {
        let (i, j) = (*self.index.get(&s)?, *self.index.get(&d)?);
        let k = self.next[i * self.n() + j];
        (k != UNREACHABLE).then(|| self.ids[k as usize])
    }

    /// Node sequence from `s` to `d` inclusive, following next hops.
    pub fn path(&self, s: NodeId, d: NodeId) -> Option<Vec<NodeId>> {
        self.hops(s, d)?;
        let mut out = vec![s];
        let mut cur = s;
        while cur != d {
            cur = self.next_hop(cur, d)?;
            out.push(cur);
        }
        Some(out)
    }

    /// Routed neighbours of `id`, ascending.
    pub fn neighbours(&self, id: NodeId) -> Vec<NodeId> {
        self.index
            .get(&id)
            .map(|&i| self.adj[i].iter().map(|&k| self.ids[k]).collect())
            .unwrap_or_default()
    }
}

/// Minimum-hop routes among infrastructure nodes. Ties between equal-hop next
/// hops go to the lowest node id.
pub fn compute_routes(topology: &Topology, v_sdn: f64) -> RoutingState {
    routes_excluding(topology, &FailedSet::default(), v_sdn)
}

fn routes_excluding(topology: &Topology, failed: &FailedSet, v_sdn: f64) -> RoutingState {
    let ids: Vec<NodeId> = topology
        .infrastructure_ids()
        .into_iter()
        .filter(|id| !failed.nodes.contains(id))
        .collect();
    let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let n = ids.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for l in &topology.links {
        if failed.links.contains(&l.key()) {
            continue;
        }
        if let (Some(&i), Some(&j)) = (index.get(&l.a), index.get(&l.b)) {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }

    let mut dist = vec![UNREACHABLE; n * n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if row[v] == UNREACHABLE {
                    row[v] = row[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }

    // Distances are symmetric, so the next hop from s toward d is the
    // lowest-id neighbour one step closer to d.
    let mut next = vec![UNREACHABLE; n * n];
    let (mut total, mut connected, mut disconnected) = (0u64, 0usize, 0usize);
    for s in 0..n {
        for d in 0..n {
            if s == d {
                continue;
            }
            let h = dist[s * n + d];
            if h == UNREACHABLE {
                disconnected += 1;
                continue;
            }
            total += h as u64;
            connected += 1;
            next[s * n + d] = adj[s]
                .iter()
                .copied()
                .find(|&k| dist[k * n + d] == h - 1)
                .map(|k| k as u32)
                .expect("a shortest path has a first hop");
        }
    }
    let d_mesh = if connected == 0 { 0.0 } else { total as f64 / connected as f64 };

    RoutingState {
        ids,
        index,
        adj,
        dist,
        next,
        d_mesh,
        connected_pairs: connected,
        disconnected_pairs: disconnected,
        v_sdn,
    }
}

/// Control-plane latency in ms: `d_mesh / v_sdn`.
pub fn mesh_latency(d_mesh: f64, v_sdn: f64) -> Result<f64, MeshError> {
    if !(v_sdn > 0.0) {
        return Err(MeshError::ZeroControllerRate(v_sdn));
    }
    Ok(d_mesh / v_sdn)
}

/// Routes recomputed on the surviving graph, without a recovery-time draw.
pub fn surviving_routes(state: &RoutingState, topology: &Topology, failed: &FailedSet) -> RoutingState {
    routes_excluding(topology, failed, state.v_sdn)
}

/// Recomputes routes without the failed nodes and links and draws the
/// rerouting time in seconds. An empty failure set costs nothing.
pub fn reroute_on_failure<R: Rng + ?Sized>(
    state: &RoutingState,
    topology: &Topology,
    failed: &FailedSet,
    recovery: &Triangular,
    rng: &mut R,
) -> (RoutingState, f64) {
    if failed.is_empty() {
        return (state.clone(), 0.0);
    }
    (surviving_routes(state, topology, failed), recovery.sample(rng))
}

/// Messages per update for `n` routers: `c * n^2`.
pub fn control_overhead(n: usize, c: f64) -> f64 {
    c * (n as f64) * (n as f64)
}
