use std::path::PathBuf;

use proptest::prelude::*;

use meshwave_core::policy::PolicyConfig;
use meshwave_core::scenario::{
    infrastructure_summary, load_scenario, save_scenario, validate, AreaTag, Link, Medium, Mode, Node, NodeKind,
    ScenarioError, Topology,
};

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn bundled() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(scenarios_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_str().unwrap() != "policy_default.json")
        .collect();
    v.sort();
    v
}

#[test]
fn every_bundled_scenario_validates() {
    let files = bundled();
    assert_eq!(files.len(), 6);
    for f in files {
        let c = load_scenario(&f).unwrap();
        assert!(validate(&c).is_empty(), "{}", f.display());
    }
}

#[test]
fn urban_inventory() {
    let c = load_scenario(scenarios_dir().join("urban_proposed.json")).unwrap();
    let s = infrastructure_summary(&c.topology);
    assert_eq!(
        (s.mesh_routers, s.brokers, s.edge_servers, s.transmitters, s.user_devices),
        (50, 5, 3, 2, 500)
    );
    assert_eq!(s.core_nodes(), 58);
    assert_eq!(s.nodes, c.topology.nodes.len());
    assert_eq!(c.mode, Mode::Proposed);
    assert_eq!(c.spectrum.alpha_s, 0.12);
}

#[test]
fn rural_baseline_forces_alpha_zero() {
    let c = load_scenario(scenarios_dir().join("rural_baseline.json")).unwrap();
    assert_eq!(infrastructure_summary(&c.topology).user_devices, 100);
    assert_eq!(c.mode, Mode::Baseline);
    assert_eq!(c.spectrum.alpha_s, 0.0);
}

#[test]
fn baseline_alpha_is_forced_on_load() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = load_scenario(scenarios_dir().join("urban_proposed.json")).unwrap();
    c.mode = Mode::Baseline;
    let text = serde_json::to_string(&c).unwrap();
    assert!(text.contains("\"alpha_s\":0.12"));
    let p = dir.path().join("b.json");
    std::fs::write(&p, text).unwrap();
    assert_eq!(load_scenario(&p).unwrap().spectrum.alpha_s, 0.0);
}

#[test]
fn paired_fixtures_share_a_family() {
    for area in ["urban", "suburban", "rural"] {
        let b = load_scenario(scenarios_dir().join(format!("{area}_baseline.json"))).unwrap();
        let p = load_scenario(scenarios_dir().join(format!("{area}_proposed.json"))).unwrap();
        assert_eq!(b.family_fingerprint(), p.family_fingerprint(), "{area}");
    }
    let u = load_scenario(scenarios_dir().join("urban_baseline.json")).unwrap();
    let r = load_scenario(scenarios_dir().join("rural_baseline.json")).unwrap();
    assert_ne!(u.family_fingerprint(), r.family_fingerprint());
}

#[test]
fn round_trip_bundled() {
    let dir = tempfile::tempdir().unwrap();
    for f in bundled() {
        let c = load_scenario(&f).unwrap();
        let out = dir.path().join(f.file_name().unwrap());
        save_scenario(&out, &c).unwrap();
        assert_eq!(load_scenario(&out).unwrap(), c);
    }
}

#[test]
fn empty_topology_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = load_scenario(scenarios_dir().join("rural_proposed.json")).unwrap();
    c.topology = Topology::default();
    let p = dir.path().join("empty.json");
    std::fs::write(&p, serde_json::to_string(&c).unwrap()).unwrap();
    match load_scenario(&p) {
        Err(ScenarioError::Validation(v)) => {
            assert!(v.contains(&"topology must contain at least one infrastructure node".to_string()), "{v:?}")
        }
        other => panic!("expected validation error, got {other:?}"),
    }
}

#[test]
fn malformed_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{ not json").unwrap();
    assert!(matches!(load_scenario(&p), Err(ScenarioError::Parse { .. })));
    assert!(matches!(load_scenario(dir.path().join("missing.json")), Err(ScenarioError::Io { .. })));
}

#[test]
fn weight_and_duplicate_violations() {
    let mut c = load_scenario(scenarios_dir().join("rural_proposed.json")).unwrap();
    c.weights.gpi = [0.3, 0.3, 0.3];
    assert_eq!(validate(&c), vec!["gpi weights must sum to 1".to_string()]);
    c.weights.gpi = [0.4, 0.3, 0.3];
    let dup = c.topology.nodes[0].clone();
    c.topology.nodes.push(dup);
    assert!(validate(&c).contains(&"node ids must be unique".to_string()));
}

#[test]
fn policy_fixture_is_the_default() {
    let text = std::fs::read_to_string(scenarios_dir().join("policy_default.json")).unwrap();
    let p: PolicyConfig = serde_json::from_str(&text).unwrap();
    assert!(p.violations().is_empty());
    assert_eq!(p, PolicyConfig::default());
}

fn kind_of(k: u8) -> NodeKind {
    match k % 5 {
        0 => NodeKind::MeshRouter,
        1 => NodeKind::Broker,
        2 => NodeKind::EdgeServer,
        3 => NodeKind::D2mTransmitter,
        _ => NodeKind::UserDevice,
    }
}

fn arb_topology() -> impl Strategy<Value = Topology> {
    (prop::collection::vec(0u8..5, 1..40), prop::collection::vec((0usize..40, 0usize..40), 0..60)).prop_map(
        |(kinds, pairs)| {
            let nodes: Vec<Node> = kinds
                .iter()
                .enumerate()
                .map(|(i, &k)| Node { id: i as u32 * 3, kind: kind_of(k), area: AreaTag::Urban })
                .collect();
            let n = nodes.len();
            let links = pairs
                .into_iter()
                .filter(|(a, b)| a % n != b % n)
                .map(|(a, b)| Link {
                    a: nodes[a % n].id,
                    b: nodes[b % n].id,
                    medium: Medium::Wired,
                    capacity_mbps: 1.0,
                    delay_ms: 0.0,
                })
                .collect();
            Topology { nodes, links }
        },
    )
}

proptest! {
    #[test]
    fn summary_matches_linear_tally(t in arb_topology()) {
        let s = infrastructure_summary(&t);
        let count = |k| t.nodes.iter().filter(|n| n.kind == k).count();
        prop_assert_eq!(s.mesh_routers, count(NodeKind::MeshRouter));
        prop_assert_eq!(s.brokers, count(NodeKind::Broker));
        prop_assert_eq!(s.edge_servers, count(NodeKind::EdgeServer));
        prop_assert_eq!(s.transmitters, count(NodeKind::D2mTransmitter));
        prop_assert_eq!(s.user_devices, count(NodeKind::UserDevice));
        prop_assert_eq!(s.nodes, t.nodes.len());
        prop_assert_eq!(s.links, t.links.len());
    }

    #[test]
    fn summary_is_permutation_invariant(t in arb_topology(), rot in 0usize..40) {
        let mut p = t.clone();
        let k = rot % p.nodes.len();
        p.nodes.rotate_left(k);
        p.nodes.reverse();
        p.links.reverse();
        prop_assert_eq!(infrastructure_summary(&t), infrastructure_summary(&p));
    }
}
