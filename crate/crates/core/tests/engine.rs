use std::path::PathBuf;

use meshwave_core::engine::{
    attribute_components, compare, kpis_from_samples, replicate, run, run_many, write_samples_csv, Aggregate,
    EngineError, RunResult,
};
use meshwave_core::metrics::relative_change;
use meshwave_core::scenario::{load_scenario, AreaTag, Link, Medium, Mode, Node, NodeKind, ScenarioConfig, Topology};
use meshwave_core::traffic::RateSchedule;

fn fixture(name: &str) -> ScenarioConfig {
    load_scenario(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)).unwrap()
}

/// Two busy hours around the urban peak, failures scaled to match.
fn short(name: &str) -> ScenarioConfig {
    let mut c = fixture(name);
    c.duration_s = 2 * 3600;
    c.failure_plan.count /= 12;
    c.traffic.peak_window.start_s = 0.0;
    c.traffic.peak_window.end_s = 3600.0;
    c
}

fn quiet(mut c: ScenarioConfig) -> ScenarioConfig {
    c.duration_s = 10;
    c.traffic.user_rate = RateSchedule::constant(0.0);
    c.traffic.video_rate = RateSchedule::constant(0.0);
    c.failure_plan.count = 0;
    c
}

#[test]
fn quiet_run_is_all_zero() {
    let r = run(&quiet(fixture("urban_proposed.json")), 9).unwrap();
    assert_eq!(r.samples.len(), 10);
    assert!(r.recovery_events.is_empty());
    assert!(r.samples.iter().all(|s| s.lambda_mbps == 0.0 && s.shed_mbps == 0.0 && s.lost_mbps == 0.0));
}

#[test]
fn flow_is_conserved_every_step() {
    for name in ["urban_baseline.json", "urban_proposed.json"] {
        let r = run(&short(name), 4).unwrap();
        assert_eq!(r.samples.len() as u64, r.duration_s / r.sample_interval_s);
        for s in &r.samples {
            let total = s.carried_mbps + s.d2m_mbps + s.shed_mbps;
            assert!((total - s.lambda_mbps).abs() <= 1e-12 * s.lambda_mbps.max(1.0), "{name} t={}: {total} vs {}", s.t, s.lambda_mbps);
        }
    }
}

#[test]
fn kpis_recompute_from_serialized_run() {
    let c = short("urban_proposed.json");
    let r = run(&c, 11).unwrap();
    let back: RunResult = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(kpis_from_samples(&c, back.mode, &back.samples, &back.recovery_events), r.kpis);
    assert_eq!(back, r);
}

#[test]
fn coarser_sampling_keeps_sample_identity() {
    let mut c = short("rural_proposed.json");
    c.sample_interval_s = 60;
    let r = run(&c, 2).unwrap();
    assert_eq!(r.samples.len(), 120);
    assert_eq!(r.samples[1].t, 60);
}

#[test]
fn replicate_uses_xor_seeds_and_intervals() {
    let c = short("rural_proposed.json");
    assert!(matches!(replicate(&c, 1), Err(EngineError::TooFewReplications(1))));
    let rep = replicate(&c, 2).unwrap();
    assert_eq!(rep.aggregate.seeds, vec![c.seed ^ 1, c.seed ^ 2]);
    assert_eq!(rep.aggregate.intervals["latency_p95_ms"].n, 2);
}

#[test]
fn degenerate_runs_have_zero_width_intervals() {
    let c = quiet(fixture("rural_proposed.json"));
    let rep = replicate(&c, 3).unwrap();
    assert!(rep.aggregate.intervals.values().all(|ci| ci.half_width == 0.0));
}

#[test]
fn identical_sides_give_zero_deltas() {
    let c = short("rural_baseline.json");
    let runs = run_many(&c, &[1, 2, 3]).unwrap();
    let a = Aggregate::from_runs(&runs).unwrap();
    let rep = compare(&a, &a).unwrap();
    assert!(rep.deltas.values().all(|d| *d == 0.0));
}

#[test]
fn deltas_match_relative_change() {
    let b = Aggregate::from_runs(&run_many(&short("urban_baseline.json"), &[1, 2]).unwrap()).unwrap();
    let p = Aggregate::from_runs(&run_many(&short("urban_proposed.json"), &[1, 2]).unwrap()).unwrap();
    let rep = compare(&b, &p).unwrap();
    for (k, d) in &rep.deltas {
        assert_eq!(*d, relative_change(b.mean(k), p.mean(k)).unwrap(), "{k}");
    }
    assert!(rep.improvements["latency_p95_ms"] > 0.0);
    assert!(rep.improvements["throughput_mbps"] > 0.0);
    assert!(rep.improvements["t_rec_mean_s"] > 0.0);
}

#[test]
fn different_families_do_not_compare() {
    let u = Aggregate::from_runs(&[run(&quiet(fixture("urban_baseline.json")), 1).unwrap()]).unwrap();
    let r = Aggregate::from_runs(&[run(&quiet(fixture("rural_proposed.json")), 1).unwrap()]).unwrap();
    assert!(matches!(compare(&u, &r), Err(EngineError::MismatchedScenarios)));
    let mixed = [run(&quiet(fixture("urban_baseline.json")), 1).unwrap(), run(&quiet(fixture("urban_proposed.json")), 1).unwrap()];
    assert!(matches!(Aggregate::from_runs(&mixed), Err(EngineError::MismatchedScenarios)));
}

#[test]
fn attribution_without_traffic_is_empty() {
    // One router, one edge server and nothing to offload or fail: no layer
    // can make any metric worse.
    let mut c = quiet(fixture("rural_proposed.json"));
    let node = |id, kind| Node { id, kind, area: AreaTag::Rural };
    let link = |a, b| Link { a, b, medium: Medium::Wired, capacity_mbps: 100.0, delay_ms: 1.0 };
    c.topology = Topology {
        nodes: vec![node(0, NodeKind::MeshRouter), node(1, NodeKind::EdgeServer), node(2, NodeKind::UserDevice)],
        links: vec![link(0, 1), link(2, 0)],
    };
    let a = attribute_components(&c, 1).unwrap();
    assert!(a.shares.is_empty(), "{:?}", a.degradation);
}

#[test]
fn mesh_dominates_latency_attribution() {
    let a = attribute_components(&fixture("urban_proposed.json"), 1).unwrap();
    let lat = &a.shares["latency_p95_ms"];
    assert!(lat["mesh"] > lat["d2m"] && lat["mesh"] > lat["broker"], "{lat:?}");
    for shares in a.shares.values() {
        assert!((shares.values().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn proposed_side_is_ordered_better() {
    let seeds: Vec<u64> = (1..=3).collect();
    let b = Aggregate::from_runs(&run_many(&fixture("urban_baseline.json"), &seeds).unwrap()).unwrap();
    let p = Aggregate::from_runs(&run_many(&fixture("urban_proposed.json"), &seeds).unwrap()).unwrap();
    assert_eq!((b.mode, p.mode), (Mode::Baseline, Mode::Proposed));
    assert!(p.mean("latency_p95_ms") < b.mean("latency_p95_ms"));
    assert!(p.mean("throughput_mbps") > b.mean("throughput_mbps"));
    assert!(p.mean("t_rec_mean_s") < b.mean("t_rec_mean_s"));
}

#[test]
fn samples_csv_layout() {
    let r = run(&quiet(fixture("rural_proposed.json")), 1).unwrap();
    let mut out = Vec::new();
    write_samples_csv(&r, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,lambda_mbps,rho,latency_ms,throughput_mbps,loss,beff,alpha_s");
    assert_eq!(lines.count(), 10);
}
