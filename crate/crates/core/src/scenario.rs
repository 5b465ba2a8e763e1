//! The simulated world: node inventory, link graph and experiment settings,
//! plus JSON loading, saving and validation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::broker::{BrokerCluster, FailurePlan};
use crate::d2m::SpectrumPlan;
use crate::mesh::MeshParams;
use crate::metrics::KpiParams;
use crate::traffic::TrafficParams;

pub type NodeId = u32;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid scenario: {}", .0.join("; "))]
    Validation(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    MeshRouter,
    Broker,
    EdgeServer,
    D2mTransmitter,
    UserDevice,
}

impl NodeKind {
    pub fn is_infrastructure(self) -> bool {
        self != NodeKind::UserDevice
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaTag {
    Urban,
    Suburban,
    Rural,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub area: AreaTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Medium {
    Wired,
    Wireless,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub a: NodeId,
    pub b: NodeId,
    pub medium: Medium,
    pub capacity_mbps: f64,
    pub delay_ms: f64,
}

impl Link {
    pub fn other(&self, id: NodeId) -> Option<NodeId> {
        if self.a == id {
            Some(self.b)
        } else if self.b == id {
            Some(self.a)
        } else {
            None
        }
    }

    /// Endpoints in ascending order, used as the link's identity.
    pub fn key(&self) -> (NodeId, NodeId) {
        (self.a.min(self.b), self.a.max(self.b))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
}

/// Node counts by kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfraSummary {
    /// N: mesh routers.
    pub mesh_routers: usize,
    /// M: brokers.
    pub brokers: usize,
    /// E_s: edge servers.
    pub edge_servers: usize,
    pub transmitters: usize,
    pub user_devices: usize,
    /// |V|: every node.
    pub nodes: usize,
    /// |E|: every link.
    pub links: usize,
}

impl InfraSummary {
    /// N + M + E_s.
    pub fn core_nodes(&self) -> usize {
        self.mesh_routers + self.brokers + self.edge_servers
    }
}

pub fn infrastructure_summary(topology: &Topology) -> InfraSummary {
    let mut s = InfraSummary {
        mesh_routers: 0,
        brokers: 0,
        edge_servers: 0,
        transmitters: 0,
        user_devices: 0,
        nodes: topology.nodes.len(),
        links: topology.links.len(),
    };
    for n in &topology.nodes {
        match n.kind {
            NodeKind::MeshRouter => s.mesh_routers += 1,
            NodeKind::Broker => s.brokers += 1,
            NodeKind::EdgeServer => s.edge_servers += 1,
            NodeKind::D2mTransmitter => s.transmitters += 1,
            NodeKind::UserDevice => s.user_devices += 1,
        }
    }
    s
}

impl Topology {
    pub fn kind_of(&self, id: NodeId) -> Option<NodeKind> {
        self.nodes.iter().find(|n| n.id == id).map(|n| n.kind)
    }

    pub fn ids_of_kind(&self, kind: NodeKind) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = self.nodes.iter().filter(|n| n.kind == kind).map(|n| n.id).collect();
        ids.sort_unstable();
        ids
    }

    /// Non-user node ids, ascending.
    pub fn infrastructure_ids(&self) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|n| n.kind.is_infrastructure())
            .map(|n| n.id)
            .collect();
        ids.sort_unstable();
        ids
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        if self.nodes.iter().any(|n| !seen.insert(n.id)) {
            out.push("node ids must be unique".to_string());
        }
        let kinds: BTreeMap<NodeId, NodeKind> = self.nodes.iter().map(|n| (n.id, n.kind)).collect();
        if !kinds.values().any(|k| k.is_infrastructure()) {
            out.push("topology must contain at least one infrastructure node".to_string());
        }
        let mut bad_endpoint = false;
        let mut self_loop = false;
        let mut bad_capacity = false;
        let mut bad_delay = false;
        for l in &self.links {
            if !kinds.contains_key(&l.a) || !kinds.contains_key(&l.b) {
                bad_endpoint = true;
            }
            if l.a == l.b {
                self_loop = true;
            }
            if !(l.capacity_mbps > 0.0) {
                bad_capacity = true;
            }
            if !(l.delay_ms >= 0.0) {
                bad_delay = true;
            }
        }
        if bad_endpoint {
            out.push("link endpoints must exist in the topology".to_string());
        }
        if self_loop {
            out.push("link endpoints must be distinct".to_string());
        }
        if bad_capacity {
            out.push("link capacity must be positive".to_string());
        }
        if bad_delay {
            out.push("link propagation delay must be non-negative".to_string());
        }
        if !bad_endpoint && !self.infrastructure_connected(&kinds) {
            out.push("infrastructure subgraph must be connected".to_string());
        }
        out
    }

    fn infrastructure_connected(&self, kinds: &BTreeMap<NodeId, NodeKind>) -> bool {
        let infra: Vec<NodeId> = kinds
            .iter()
            .filter(|(_, k)| k.is_infrastructure())
            .map(|(id, _)| *id)
            .collect();
        let Some(&start) = infra.first() else {
            return true;
        };
        let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for l in &self.links {
            let both = kinds.get(&l.a).is_some_and(|k| k.is_infrastructure())
                && kinds.get(&l.b).is_some_and(|k| k.is_infrastructure());
            if both {
                adj.entry(l.a).or_default().push(l.b);
                adj.entry(l.b).or_default().push(l.a);
            }
        }
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        seen.len() == infra.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Conventional network: static gateway routing, no broadcast offload, no
    /// broker buffering.
    Baseline,
    /// Mesh routing + broadcast offload + broker failover and buffering.
    Proposed,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Baseline => "baseline",
            Mode::Proposed => "proposed",
        })
    }
}

/// Policy weight vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSet {
    /// Composite loss weights on (congestion, deficit, normalized recovery).
    pub gpl: [f64; 3],
    /// Performance index weights on (QoS, coverage, cost efficiency); sum to 1.
    pub gpi: [f64; 3],
    /// Quality score weights on (latency, throughput, fairness).
    pub cqs: [f64; 3],
    /// Policy score weights on (offload, coverage gain, penetration, multiplier).
    pub ps: [f64; 4],
}

impl Default for WeightSet {
    fn default() -> Self {
        Self {
            gpl: [0.4, 0.3, 0.3],
            gpi: [0.4, 0.3, 0.3],
            cqs: [0.4, 0.4, 0.2],
            ps: [0.25; 4],
        }
    }
}

impl WeightSet {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let all = self.gpl.iter().chain(&self.gpi).chain(&self.cqs).chain(&self.ps);
        if all.into_iter().any(|w| !(*w >= 0.0)) {
            out.push("weights must be non-negative".to_string());
        }
        if (self.gpi.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            out.push("gpi weights must sum to 1".to_string());
        }
        if (self.cqs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            out.push("cqs weights must sum to 1".to_string());
        }
        out
    }
}

fn default_interval() -> u64 {
    1
}

fn default_replications() -> u32 {
    10
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    /// Free-form notes on calibration constants.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub duration_s: u64,
    #[serde(default = "default_interval")]
    pub sample_interval_s: u64,
    pub mode: Mode,
    pub topology: Topology,
    pub traffic: TrafficParams,
    pub spectrum: SpectrumPlan,
    #[serde(default)]
    pub mesh: MeshParams,
    pub broker: BrokerCluster,
    pub failure_plan: FailurePlan,
    #[serde(default)]
    pub weights: WeightSet,
    #[serde(default)]
    pub kpi: KpiParams,
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: u32,
}

impl ScenarioConfig {
    /// Applies mode-forced settings: Baseline runs without broadcast spectrum.
    pub fn normalize(&mut self) {
        if self.mode == Mode::Baseline {
            self.spectrum.alpha_s = 0.0;
        }
    }

    /// Copy of `self` in another mode, normalized.
    pub fn with_mode(&self, mode: Mode) -> Self {
        let mut c = self.clone();
        c.mode = mode;
        c.normalize();
        c
    }

    /// Fingerprint of everything except the identity and mode-dependent
    /// fields. Two configs with equal fingerprints differ at most in mode.
    pub fn family_fingerprint(&self) -> String {
        let mut c = self.clone();
        c.name.clear();
        c.notes.clear();
        c.mode = Mode::Proposed;
        c.seed = 0;
        c.replications = 0;
        c.spectrum.alpha_s = 0.0;
        let json = serde_json::to_vec(&c).expect("config serializes");
        Sha256::digest(&json)
            .iter()
            .take(16)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Every violated invariant, in a fixed order. Empty when valid.
pub fn validate(config: &ScenarioConfig) -> Vec<String> {
    let mut out = Vec::new();
    if config.duration_s == 0 {
        out.push("duration must be positive".to_string());
    }
    if config.sample_interval_s == 0 {
        out.push("sample interval must be positive".to_string());
    } else if config.duration_s % config.sample_interval_s != 0 {
        out.push("duration must be divisible by the sample interval".to_string());
    }
    if config.replications == 0 {
        out.push("replications must be at least 1".to_string());
    }
    out.extend(config.topology.violations());
    out.extend(config.traffic.violations());
    out.extend(config.spectrum.violations());
    if config.mode == Mode::Baseline && config.spectrum.alpha_s != 0.0 {
        out.push("baseline mode requires alpha_s = 0".to_string());
    }
    out.extend(config.mesh.violations());
    out.extend(config.broker.violations());
    out.extend(config.failure_plan.violations());
    out.extend(config.weights.violations());
    out.extend(config.kpi.violations());
    out
}

pub fn parse_scenario(text: &str, path: &Path) -> Result<ScenarioConfig, ScenarioError> {
    let mut config: ScenarioConfig = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    config.normalize();
    let violations = validate(&config);
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(ScenarioError::Validation(violations))
    }
}

/// Reads, normalizes and validates a JSON scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, path)
}

pub fn save_scenario(path: impl AsRef<Path>, config: &ScenarioConfig) -> Result<(), ScenarioError> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(config).expect("config serializes");
    fs::write(path, text + "\n").map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: NodeId, kind: NodeKind) -> Node {
        Node { id, kind, area: AreaTag::Urban }
    }

    fn link(a: NodeId, b: NodeId) -> Link {
        Link { a, b, medium: Medium::Wireless, capacity_mbps: 100.0, delay_ms: 1.0 }
    }

    #[test]
    fn single_router_summary() {
        let t = Topology { nodes: vec![node(0, NodeKind::MeshRouter)], links: vec![] };
        let s = infrastructure_summary(&t);
        assert_eq!((s.mesh_routers, s.brokers, s.edge_servers, s.nodes, s.links), (1, 0, 0, 1, 0));
        assert!(t.violations().is_empty());
    }

    #[test]
    fn empty_topology_is_invalid() {
        let t = Topology::default();
        assert_eq!(
            t.violations(),
            vec!["topology must contain at least one infrastructure node".to_string()]
        );
    }

    #[test]
    fn duplicate_ids_flagged() {
        let t = Topology {
            nodes: vec![node(0, NodeKind::MeshRouter), node(0, NodeKind::Broker)],
            links: vec![],
        };
        assert!(t.violations().contains(&"node ids must be unique".to_string()));
    }

    #[test]
    fn link_rules() {
        let mut t = Topology {
            nodes: vec![node(0, NodeKind::MeshRouter), node(1, NodeKind::MeshRouter)],
            links: vec![link(0, 1)],
        };
        assert!(t.violations().is_empty());
        t.links[0].capacity_mbps = 0.0;
        assert!(t.violations().contains(&"link capacity must be positive".to_string()));
        t.links[0] = link(0, 0);
        assert!(t.violations().contains(&"link endpoints must be distinct".to_string()));
        t.links[0] = link(0, 9);
        assert!(t.violations().contains(&"link endpoints must exist in the topology".to_string()));
    }

    #[test]
    fn disconnected_infrastructure_flagged() {
        let t = Topology {
            nodes: vec![
                node(0, NodeKind::MeshRouter),
                node(1, NodeKind::MeshRouter),
                node(2, NodeKind::UserDevice),
            ],
            links: vec![link(0, 2), link(2, 1)],
        };
        // a user device does not bridge the infrastructure
        assert!(t
            .violations()
            .contains(&"infrastructure subgraph must be connected".to_string()));
    }

    #[test]
    fn weight_rules() {
        let mut w = WeightSet::default();
        assert!(w.violations().is_empty());
        w.gpi = [0.3, 0.3, 0.3];
        assert_eq!(w.violations(), vec!["gpi weights must sum to 1".to_string()]);
        // gpl and ps sums are unconstrained
        let w = WeightSet { gpl: [1.0, 1.0, 1.0], ps: [1.0; 4], ..WeightSet::default() };
        assert!(w.violations().is_empty());
    }
}
