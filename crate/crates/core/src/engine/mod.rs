//! Time-stepped fluid simulation of the access network.
//!
//! Each 1 s step draws session arrivals, splits the offered load between the
//! broadcast layer and unicast, computes queueing at the unicast bottleneck,
//! applies failures and records latency, throughput and loss. Latency and
//! throughput are probe measurements over every covered user that is not in
//! an outage; sessions only drive the offered load and the loss weighting.
//!
//! A failure takes out the users served by a failed node: those attached to
//! it and those whose traffic endpoint it is. Transit routers are masked by
//! path redundancy and only change the mesh diameter. Affected users lose
//! their traffic from the end of the broker buffer until recovery completes.

mod queue;
mod report;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::broker::{failover_time, inject_failures, BrokerCluster, FailoverMode, FailureKind, RecoveryEvent};
use crate::d2m::{adaptive_alpha, broadcast_carried, d2m_capacity, sinr, split_spectrum};
use crate::mesh::{compute_routes, mesh_latency, reroute_on_failure, surviving_routes, FailedSet, RoutingState};
use crate::metrics::{self, KpiSnapshot, MetricsError};
use crate::rng::substream;
use crate::scenario::{validate, Mode, NodeId, NodeKind, ScenarioConfig, Topology};
use crate::traffic::{mm1_latency, sample_arrivals, sample_session_duration, TrafficError};

pub use queue::{mm1_des, QueueStats};
pub use report::{write_samples_csv, Aggregate, Attribution, ComparisonReport};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid scenario: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("at least two replications are needed, got {0}")]
    TooFewReplications(u32),
    #[error("runs come from different scenarios")]
    MismatchedScenarios,
    #[error("no runs to aggregate")]
    NoRuns,
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Which of the three layers are active. Proposed mode enables all of them,
/// Baseline none; other combinations are counterfactuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Layers {
    /// Controller-computed minimum-hop routing and assisted rerouting.
    /// Without it traffic is hauled through one fixed gateway.
    pub mesh: bool,
    /// Broadcast offload.
    pub d2m: bool,
    /// Broker failover and buffering. Without it recovery is centralized
    /// and nothing is buffered.
    pub broker: bool,
}

impl Layers {
    pub const ALL: Layers = Layers { mesh: true, d2m: true, broker: true };
    pub const NONE: Layers = Layers { mesh: false, d2m: false, broker: false };

    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Proposed => Self::ALL,
            Mode::Baseline => Self::NONE,
        }
    }
}

/// One aggregated sample. Rates are means over the sample interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: u64,
    /// Offered load Λ, Mbps.
    pub lambda_mbps: f64,
    /// Bottleneck utilization: unicast offered over unicast capacity.
    pub rho: f64,
    /// 95th-percentile probe latency, ms.
    pub latency_ms: f64,
    /// Delivered user throughput, Mbps.
    pub throughput_mbps: f64,
    /// Shed plus outage-lost over offered unicast volume within the interval.
    /// Broadcast traffic has no per-packet delivery accounting.
    pub loss: f64,
    /// Broadcast-carried share of the offered load.
    pub beff: f64,
    pub alpha_s: f64,
    pub d2m_mbps: f64,
    /// Unicast load admitted at the bottleneck.
    pub carried_mbps: f64,
    pub shed_mbps: f64,
    pub lost_mbps: f64,
    pub jain: f64,
    pub d_mesh: f64,
    pub delta_r: f64,
    pub active_sessions: f64,
    pub down_users: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub scenario: String,
    /// Fingerprint shared by configs that differ only in mode.
    pub family: String,
    pub mode: Mode,
    pub layers: Layers,
    pub seed: u64,
    pub duration_s: u64,
    pub sample_interval_s: u64,
    pub samples: Vec<Sample>,
    pub recovery_events: Vec<RecoveryEvent>,
    pub kpis: KpiSnapshot,
}

/// A covered user and its static route.
#[derive(Debug, Clone)]
struct UserRoute {
    path: Vec<NodeId>,
    rtt_ms: f64,
    weight: f64,
}

struct World {
    users: Vec<UserRoute>,
    total_users: usize,
    base: RoutingState,
    hub: NodeId,
    transmitters: BTreeSet<NodeId>,
}

fn link_delays(topology: &Topology) -> HashMap<(NodeId, NodeId), f64> {
    let mut m: HashMap<(NodeId, NodeId), f64> = HashMap::new();
    for l in &topology.links {
        let e = m.entry(l.key()).or_insert(f64::INFINITY);
        *e = e.min(l.delay_ms);
    }
    m
}

fn delay(delays: &HashMap<(NodeId, NodeId), f64>, a: NodeId, b: NodeId) -> f64 {
    delays[&(a.min(b), a.max(b))]
}

/// Traffic endpoints: edge servers, else brokers, else the lowest-id
/// infrastructure node.
fn endpoints(topology: &Topology) -> Vec<NodeId> {
    let edge = topology.ids_of_kind(NodeKind::EdgeServer);
    if !edge.is_empty() {
        return edge;
    }
    let brokers = topology.ids_of_kind(NodeKind::Broker);
    if !brokers.is_empty() {
        return brokers;
    }
    topology.infrastructure_ids().into_iter().take(1).collect()
}

fn build_world(config: &ScenarioConfig, layers: Layers) -> World {
    let topo = &config.topology;
    let base = compute_routes(topo, config.mesh.v_sdn);
    let ends = endpoints(topo);
    let hub = ends[0];
    let targets = if layers.mesh { ends } else { vec![hub] };
    let delays = link_delays(topo);
    let kinds: BTreeMap<NodeId, NodeKind> = topo.nodes.iter().map(|n| (n.id, n.kind)).collect();

    let mut attach: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for l in &topo.links {
        for (u, v) in [(l.a, l.b), (l.b, l.a)] {
            if kinds[&u] == NodeKind::UserDevice && kinds[&v].is_infrastructure() {
                attach.entry(u).or_default().insert(v);
            }
        }
    }

    let user_ids = topo.ids_of_kind(NodeKind::UserDevice);
    let mut users = Vec::new();
    for &u in &user_ids {
        let Some(cands) = attach.get(&u) else { continue };
        let base = &base;
        let best = cands
            .iter()
            .flat_map(|&a| targets.iter().filter_map(move |&e| Some((base.hops(a, e)?, a, e))))
            .min();
        let Some((hops, a, e)) = best else { continue };
        let path = base.path(a, e).expect("reachable pair has a path");
        let one_way = delay(&delays, u, a) + path.windows(2).map(|w| delay(&delays, w[0], w[1])).sum::<f64>();
        users.push(UserRoute { path, rtt_ms: 2.0 * one_way, weight: 1.0 / f64::from(hops + 1) });
    }

    World {
        users,
        total_users: user_ids.len(),
        base,
        hub,
        transmitters: topo.ids_of_kind(NodeKind::D2mTransmitter).into_iter().collect(),
    }
}

/// Mean path length when every pair talks through `hub`: over the `m` nodes
/// reachable from the hub with hop counts `r_x`, the ordered-pair mean of
/// `r_s + r_d` is `2 Σ r / m`.
fn hub_d_mesh(state: &RoutingState, hub: NodeId) -> f64 {
    if !state.contains(hub) {
        return state.d_mesh;
    }
    let r: Vec<u32> = state.node_ids().iter().filter_map(|&x| state.hops(x, hub)).collect();
    if r.len() < 2 {
        return 0.0;
    }
    2.0 * r.iter().map(|&h| f64::from(h)).sum::<f64>() / r.len() as f64
}

fn effective_d_mesh(state: &RoutingState, layers: Layers, hub: NodeId) -> f64 {
    if layers.mesh {
        state.d_mesh
    } else {
        hub_d_mesh(state, hub)
    }
}

fn effective_cluster(config: &ScenarioConfig, layers: Layers) -> BrokerCluster {
    let mut c = config.broker.clone();
    if !layers.broker {
        c.failover_mode = FailoverMode::Centralized;
        c.buffer_s = 0.0;
    }
    c
}

struct Outage {
    start: f64,
    end: f64,
    loss_start: f64,
    nodes: Vec<NodeId>,
    users: Vec<usize>,
}

#[derive(Default)]
struct Bucket {
    steps: u64,
    lambda: f64,
    rho: f64,
    latency: f64,
    throughput: f64,
    d2m: f64,
    carried: f64,
    shed: f64,
    lost: f64,
    jain: f64,
    d_mesh: f64,
    delta_r: f64,
    alpha: f64,
    active: f64,
    down: f64,
}

impl Bucket {
    fn flush(&mut self, t: u64) -> Sample {
        let n = self.steps as f64;
        let s = Sample {
            t,
            lambda_mbps: self.lambda / n,
            rho: self.rho / n,
            latency_ms: self.latency / n,
            throughput_mbps: self.throughput / n,
            loss: if self.lambda > self.d2m { (self.shed + self.lost) / (self.lambda - self.d2m) } else { 0.0 },
            beff: if self.lambda > 0.0 { self.d2m / self.lambda } else { 0.0 },
            alpha_s: self.alpha / n,
            d2m_mbps: self.d2m / n,
            carried_mbps: self.carried / n,
            shed_mbps: self.shed / n,
            lost_mbps: self.lost / n,
            jain: self.jain / n,
            d_mesh: self.d_mesh / n,
            delta_r: self.delta_r / n,
            active_sessions: self.active / n,
            down_users: self.down / n,
        };
        *self = Bucket::default();
        s
    }
}

/// Runs the scenario in its own mode.
pub fn run(config: &ScenarioConfig, seed: u64) -> Result<RunResult, EngineError> {
    run_with_layers(config, seed, Layers::for_mode(config.mode))
}

/// Runs the scenario with an explicit layer selection.
pub fn run_with_layers(config: &ScenarioConfig, seed: u64, layers: Layers) -> Result<RunResult, EngineError> {
    let violations = validate(config);
    if !violations.is_empty() {
        return Err(EngineError::Invalid(violations));
    }
    let world = build_world(config, layers);
    let cluster = effective_cluster(config, layers);
    let recovery = if layers.mesh { &config.mesh.assisted_recovery } else { &config.mesh.unassisted_recovery };
    let traffic = &config.traffic;
    let plan = &config.spectrum;
    let cap = config.kpi.latency_cap_ms;
    let v_sdn = config.mesh.v_sdn;

    let mut session_rng = substream(seed, "sessions");
    let mut mesh_rng = substream(seed, "recovery-mesh");
    let mut broker_rng = substream(seed, "recovery-broker");
    let failures = inject_failures(
        &config.failure_plan,
        &config.topology,
        config.duration_s as f64,
        &mut substream(seed, "failures"),
    );

    let n_users = world.users.len();
    let all_w: f64 = world.users.iter().map(|u| u.weight).sum();
    let base_d_mesh = effective_d_mesh(&world.base, layers, world.hub);
    let all_rtt_p95 = {
        let mut v: Vec<f64> = world.users.iter().map(|u| u.rtt_ms).collect();
        v.sort_by(f64::total_cmp);
        (!v.is_empty()).then(|| metrics::nearest_rank_sorted(&v, 0.95))
    };
    let all_w2: f64 = world.users.iter().map(|u| u.weight * u.weight).sum();
    // Users served by each node: access router and endpoint.
    let node_users: HashMap<NodeId, Vec<usize>> = {
        let mut m: HashMap<NodeId, Vec<usize>> = HashMap::new();
        for (i, u) in world.users.iter().enumerate() {
            let (first, last) = (u.path[0], *u.path.last().unwrap());
            m.entry(first).or_default().push(i);
            if last != first {
                m.entry(last).or_default().push(i);
            }
        }
        m
    };

    let mut d_mesh_memo: HashMap<BTreeSet<NodeId>, f64> = HashMap::new();
    let mut active = vec![0u32; n_users];
    let mut n_active: u64 = 0;
    let mut expiries: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    let mut outages: Vec<Outage> = Vec::new();
    let mut events = Vec::with_capacity(failures.len());
    let mut next_failure = 0;
    let mut alpha = if layers.d2m { plan.alpha_s } else { 0.0 };

    let mut down = vec![false; n_users];
    let mut loss_ov = vec![0.0f64; n_users];
    let mut touched: Vec<usize> = Vec::new();
    let mut is_touched = vec![false; n_users];
    let mut scratch: Vec<f64> = Vec::with_capacity(n_users);

    let mut samples = Vec::with_capacity((config.duration_s / config.sample_interval_s) as usize);
    let mut bucket = Bucket::default();

    for step in 0..config.duration_s {
        let t = step as f64;

        // Sessions. Positive finite end times order the same as their bits.
        while let Some(&Reverse((end_bits, u))) = expiries.peek() {
            if f64::from_bits(end_bits) > t {
                break;
            }
            expiries.pop();
            active[u] -= 1;
            n_active -= 1;
        }
        let arrivals = sample_arrivals(traffic.user_rate.at(t), 1.0, &mut session_rng)?;
        if n_users > 0 {
            for _ in 0..arrivals {
                let u = session_rng.random_range(0..n_users);
                let d = sample_session_duration(traffic.mean_session_s, &mut session_rng)?;
                active[u] += 1;
                n_active += 1;
                expiries.push(Reverse(((t + d).to_bits(), u)));
            }
        }

        // Failures starting in this step.
        while next_failure < failures.len() && failures[next_failure].time < t + 1.0 {
            let f = &failures[next_failure];
            next_failure += 1;
            let failed = FailedSet::nodes(f.nodes.iter().copied());
            let (state, t_sdwmn) =
                reroute_on_failure(&world.base, &config.topology, &failed, recovery.for_kind(f.kind), &mut mesh_rng);
            d_mesh_memo
                .entry(failed.nodes.clone())
                .or_insert_with(|| effective_d_mesh(&state, layers, world.hub));
            let t_kafka = failover_time(&cluster, f.kind, &mut broker_rng);
            let ev = RecoveryEvent::new(f, t_sdwmn, t_kafka);
            let mut users: Vec<usize> =
                f.nodes.iter().filter_map(|n| node_users.get(n)).flatten().copied().collect();
            users.sort_unstable();
            users.dedup();
            outages.push(Outage {
                start: ev.time,
                end: ev.time + ev.t_rec,
                loss_start: (ev.time + cluster.buffer_s).min(ev.time + ev.t_rec),
                nodes: f.nodes.clone(),
                users,
            });
            events.push(ev);
        }
        outages.retain(|o| o.end > t);

        // Outage effects on this step.
        let mid = t + 0.5;
        let mut failed_now: BTreeSet<NodeId> = BTreeSet::new();
        for o in &outages {
            if o.start >= t + 1.0 {
                continue;
            }
            failed_now.extend(o.nodes.iter().copied());
            let in_outage = o.start <= mid && mid < o.end;
            let ov = ((t + 1.0).min(o.end) - t.max(o.loss_start)).max(0.0);
            for &u in &o.users {
                if !is_touched[u] {
                    is_touched[u] = true;
                    touched.push(u);
                }
                down[u] |= in_outage;
                loss_ov[u] = loss_ov[u].max(ov);
            }
        }
        let d_mesh = if failed_now.is_empty() {
            base_d_mesh
        } else {
            *d_mesh_memo.entry(failed_now.clone()).or_insert_with(|| {
                let failed = FailedSet::nodes(failed_now.iter().copied());
                effective_d_mesh(&surviving_routes(&world.base, &config.topology, &failed), layers, world.hub)
            })
        };
        let tx_down = failed_now.iter().filter(|n| world.transmitters.contains(n)).count();

        // Load split.
        let lambda_u = n_active as f64 * traffic.per_session_mbps;
        let video = traffic.video_rate.at(t);
        let lambda = lambda_u + video;
        let (c_unic, c_d2m, decodable) = if layers.d2m {
            let p = plan.with_alpha(alpha);
            let (s_d2m, s_unic) = split_spectrum(&p);
            let dec = sinr(&p, s_unic).decodable;
            let tx = world.transmitters.len();
            let c = if dec && tx > 0 {
                d2m_capacity(s_d2m, p.eta_d2m) * (tx - tx_down) as f64 / tx as f64
            } else {
                0.0
            };
            (traffic.total_capacity_mbps * (1.0 - alpha), c, dec)
        } else {
            (traffic.total_capacity_mbps, 0.0, false)
        };
        let t_d2m = broadcast_carried(c_d2m, video);
        let unicast = lambda - t_d2m;
        let carried = unicast.min(c_unic);
        let shed = unicast - carried;
        let rho = unicast / c_unic;
        let queue_ms = if rho < 1.0 {
            let k = 1000.0 / traffic.packet_kbit;
            (mm1_latency(carried * k, c_unic * k)? * 1000.0).min(cap)
        } else {
            cap
        };

        let lost = if n_active > 0 && !touched.is_empty() {
            let w: f64 = touched.iter().map(|&u| active[u] as f64 * loss_ov[u]).sum();
            carried * w / n_active as f64
        } else {
            0.0
        };

        // Probe measurements over covered users outside an outage.
        let control_ms = mesh_latency(d_mesh, v_sdn).expect("validated controller rate");
        let n_down = touched.iter().filter(|&&u| down[u]).count();
        let (up_w, up_w2, rtt_p95) = if n_down == 0 {
            (all_w, all_w2, all_rtt_p95)
        } else {
            scratch.clear();
            let (mut w, mut w2) = (0.0, 0.0);
            for (i, u) in world.users.iter().enumerate() {
                if !down[i] {
                    w += u.weight;
                    w2 += u.weight * u.weight;
                    scratch.push(u.rtt_ms);
                }
            }
            let p = if scratch.is_empty() {
                None
            } else {
                let n = scratch.len();
                let k = ((0.95 * n as f64).ceil() as usize).clamp(1, n) - 1;
                Some(*scratch.select_nth_unstable_by(k, f64::total_cmp).1)
            };
            (w, w2, p)
        };
        let latency = rtt_p95.map_or(cap, |r| r + control_ms + queue_ms);
        let available = (c_unic - (video - t_d2m)).max(0.0);
        let throughput = if all_w > 0.0 { available * up_w / all_w } else { 0.0 };
        let jain = if up_w2 > 0.0 { up_w * up_w / (n_users as f64 * up_w2) } else { 0.0 };
        let delta_r = if world.total_users == 0 {
            0.0
        } else {
            let cov = (n_users - n_down) as f64 / world.total_users as f64;
            (1.0 - cov / config.kpi.coverage_requirement).clamp(0.0, 1.0)
        };

        bucket.steps += 1;
        bucket.lambda += lambda;
        bucket.rho += rho;
        bucket.latency += latency;
        bucket.throughput += throughput;
        bucket.d2m += t_d2m;
        bucket.carried += carried;
        bucket.shed += shed;
        bucket.lost += lost;
        bucket.jain += jain;
        bucket.d_mesh += d_mesh;
        bucket.delta_r += delta_r;
        bucket.alpha += alpha;
        bucket.active += n_active as f64;
        bucket.down += n_down as f64;
        if bucket.steps == config.sample_interval_s {
            samples.push(bucket.flush(step + 1 - config.sample_interval_s));
        }

        for &u in &touched {
            is_touched[u] = false;
            down[u] = false;
            loss_ov[u] = 0.0;
        }
        touched.clear();

        if layers.d2m && plan.adaptive {
            alpha = adaptive_alpha(&plan.beff_curve, alpha, rho < 1.0, decodable, plan.slope_threshold);
        }
    }

    let kpis = kpis_from_samples(config, config.mode, &samples, &events);
    Ok(RunResult {
        scenario: config.name.clone(),
        family: config.family_fingerprint(),
        mode: config.mode,
        layers,
        seed,
        duration_s: config.duration_s,
        sample_interval_s: config.sample_interval_s,
        samples,
        recovery_events: events,
        kpis,
    })
}

fn in_peak(config: &ScenarioConfig, t: u64) -> bool {
    let t = t as f64;
    let t = match config.traffic.user_rate.period_s {
        Some(p) if p > 0.0 => t.rem_euclid(p),
        _ => t,
    };
    config.traffic.peak_window.contains(t)
}

fn mean_of(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// KPIs derived from recorded samples and recovery events.
pub fn kpis_from_samples(
    config: &ScenarioConfig,
    mode: Mode,
    samples: &[Sample],
    events: &[RecoveryEvent],
) -> KpiSnapshot {
    let k = &config.kpi;
    let w = &config.weights;
    let sum = |f: fn(&Sample) -> f64| samples.iter().map(f).sum::<f64>();
    let lambda = sum(|s| s.lambda_mbps);
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let peak: Vec<&Sample> = samples.iter().filter(|s| in_peak(config, s.t)).collect();
    let peak_lambda: f64 = peak.iter().map(|s| s.lambda_mbps).sum();

    let latency = mean_of(samples.iter().map(|s| s.latency_ms));
    let throughput = mean_of(samples.iter().map(|s| s.throughput_mbps));
    let users = config.topology.nodes.iter().filter(|n| n.kind == NodeKind::UserDevice).count();
    let jain = mean_of(samples.iter().map(|s| s.jain));
    let delta_r = mean_of(samples.iter().map(|s| s.delta_r));
    let rho_u = mean_of(peak.iter().map(|s| s.rho));
    let t_rec = |kind: Option<FailureKind>| {
        mean_of(events.iter().filter(|e| kind.is_none_or(|k| e.failure_kind == k)).map(|e| e.t_rec))
    };
    let t_rec_mean = t_rec(None);
    let cqs = metrics::cqs(latency, k.l_max_ms, throughput, k.theta_max_mbps, jain, w.cqs).unwrap_or(0.0);
    let c_eff = match mode {
        Mode::Baseline => k.cost_efficiency_baseline,
        Mode::Proposed => k.cost_efficiency_proposed,
    };
    KpiSnapshot {
        latency_p95_ms: latency,
        throughput_mbps: throughput,
        throughput_per_user_mbps: ratio(throughput, users as f64),
        loss: ratio(sum(|s| s.shed_mbps + s.lost_mbps), lambda - sum(|s| s.d2m_mbps)),
        jain,
        cqs,
        t_rec_mean_s: t_rec_mean,
        t_rec_single_s: t_rec(Some(FailureKind::SingleNode)),
        t_rec_multi_s: t_rec(Some(FailureKind::MultiNode)),
        rho_u,
        delta_r,
        beff_peak: ratio(peak.iter().map(|s| s.d2m_mbps).sum(), peak_lambda),
        beff_mean: ratio(sum(|s| s.d2m_mbps), lambda),
        d_mesh_mean: mean_of(samples.iter().map(|s| s.d_mesh)),
        gpl: metrics::gpl(rho_u, delta_r, t_rec_mean / k.t_norm_s, w.gpl),
        gpi: metrics::gpi(cqs, 1.0 - delta_r, c_eff, w.gpi).unwrap_or(0.0),
    }
}

/// Seeds used by `replicate`: `seed ^ i` for i = 1..=n.
pub fn replication_seeds(seed: u64, n: u32) -> Vec<u64> {
    (1..=u64::from(n)).map(|i| seed ^ i).collect()
}

/// Replicated runs and their aggregate.
#[derive(Debug, Clone)]
pub struct Replication {
    pub runs: Vec<RunResult>,
    pub aggregate: Aggregate,
}

/// Runs `n` replications (in parallel) and aggregates them. Results are in
/// replication order regardless of scheduling.
pub fn replicate(config: &ScenarioConfig, n: u32) -> Result<Replication, EngineError> {
    if n < 2 {
        return Err(EngineError::TooFewReplications(n));
    }
    let runs = run_many(config, &replication_seeds(config.seed, n))?;
    let aggregate = Aggregate::from_runs(&runs)?;
    Ok(Replication { runs, aggregate })
}

/// One run per seed, in seed order.
pub fn run_many(config: &ScenarioConfig, seeds: &[u64]) -> Result<Vec<RunResult>, EngineError> {
    seeds.par_iter().map(|&s| run(config, s)).collect()
}

/// Aggregates, intervals and relative changes between two run sets from the
/// same scenario family.
pub fn compare(baseline: &Aggregate, proposed: &Aggregate) -> Result<ComparisonReport, EngineError> {
    ComparisonReport::new(baseline, proposed)
}

/// Metrics considered for component attribution.
pub const ATTRIBUTION_METRICS: [&str; 5] = ["latency_p95_ms", "throughput_mbps", "loss", "t_rec_mean_s", "jain"];

/// Disables each layer in turn (same seed) and splits each metric's total
/// degradation among the layers.
pub fn attribute_components(config: &ScenarioConfig, seed: u64) -> Result<Attribution, EngineError> {
    let variants = [
        ("mesh", Layers { mesh: false, ..Layers::ALL }),
        ("d2m", Layers { d2m: false, ..Layers::ALL }),
        ("broker", Layers { broker: false, ..Layers::ALL }),
    ];
    let full = run_with_layers(config, seed, Layers::ALL)?;
    let offs: Vec<(&str, RunResult)> = variants
        .par_iter()
        .map(|&(name, l)| run_with_layers(config, seed, l).map(|r| (name, r)))
        .collect::<Result<_, _>>()?;
    Ok(Attribution::from_runs(&full, &offs))
}
