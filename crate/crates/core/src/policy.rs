//! Deployment economics: subsidies and coverage, cost-benefit, device
//! penetration, public-private co-investment, the policy score and grid
//! sweeps over all of them.
//!
//! Subsidy per node is `β · C_node`. A dimensionless `β · δ_r` variant is also
//! exposed ([`subsidy_fraction_of_deficit`]) but only the per-node form
//! matches the reference subsidy values.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{CurveError, PiecewiseLinear};
use crate::d2m::{beff_lookup, BeffCurve, D2mError, DEFAULT_SLOPE_THRESHOLD};

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("subsidy {i_f} exceeds node cost {c_node}")]
    SubsidyExceedsCost { i_f: f64, c_node: f64 },
    #[error("coverage requirement must be positive")]
    ZeroRequirement,
    #[error("government expenditure is zero")]
    ZeroExpenditure,
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    D2m(#[from] D2mError),
    #[error("invalid policy input: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

fn default_rcg_curve() -> PiecewiseLinear {
    PiecewiseLinear::new(vec![(0.0, 0.0), (0.05, 15.0), (0.10, 28.0), (0.15, 30.0), (0.20, 30.5), (0.25, 30.7)])
        .expect("default anchors are valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsidyModel {
    /// Subsidy rate β.
    pub beta: f64,
    /// Cost of one node, €.
    pub c_node: f64,
    pub n_nodes: f64,
    /// Coverage points gained per € of subsidy.
    pub kappa: f64,
    /// Social value of one coverage point, €.
    pub lambda_r: f64,
    /// Coverage gain (points) against β.
    #[serde(default = "default_rcg_curve")]
    pub rcg_curve: PiecewiseLinear,
    /// Field measurements of coverage gain; they take precedence over the
    /// smoothed curve at the same β.
    #[serde(default)]
    pub measured_rcg: Vec<(f64, f64)>,
    /// Coverage deficit before subsidy, fraction.
    pub delta_r_pre: f64,
    /// Coverage before subsidy, percent.
    pub r_cov_pre: f64,
}

impl Default for SubsidyModel {
    fn default() -> Self {
        Self {
            beta: 0.10,
            c_node: 10_000.0,
            n_nodes: 100.0,
            kappa: 0.028,
            lambda_r: 5_000.0,
            rcg_curve: default_rcg_curve(),
            measured_rcg: vec![(0.05, 15.0), (0.10, 28.0), (0.20, 30.0)],
            delta_r_pre: 0.64,
            r_cov_pre: 36.0,
        }
    }
}

impl SubsidyModel {
    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if [self.beta, self.c_node, self.n_nodes, self.kappa, self.lambda_r].iter().any(|v| !(*v >= 0.0)) {
            out.push("subsidy parameters must be non-negative".into());
        }
        if !self.rcg_curve.is_concave() {
            out.push("coverage-gain curve must be concave".into());
        }
        if !(0.0..=1.0).contains(&self.delta_r_pre) || !(0.0..=100.0).contains(&self.r_cov_pre) {
            out.push("pre-subsidy deficit must be in [0, 1] and coverage in [0, 100]".into());
        }
        out
    }

    /// Coverage gain used for benefits: a field measurement when one exists
    /// at `beta`, the curve otherwise.
    pub fn rcg(&self, beta: f64) -> Result<f64, PolicyError> {
        if let Some(&(_, g)) = self.measured_rcg.iter().find(|(b, _)| (b - beta).abs() < 1e-12) {
            return Ok(g);
        }
        rcg_of_beta(self, beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenetrationModel {
    pub p0: f64,
    /// Growth rate per year.
    pub gamma: f64,
    /// A device mandate doubles the growth rate.
    pub mandate: bool,
}

impl Default for PenetrationModel {
    fn default() -> Self {
        Self { p0: 0.10, gamma: 0.208, mandate: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PppModel {
    /// Public funds committed, €.
    pub i_gov: f64,
    /// Private investment per unit of public investment.
    pub m_f: f64,
    /// Plausible range of `m_f`, used for normalization.
    #[serde(default = "default_band")]
    pub m_f_band: (f64, f64),
}

fn default_band() -> (f64, f64) {
    (0.8, 1.2)
}

impl Default for PppModel {
    fn default() -> Self {
        Self { i_gov: 10_000_000.0, m_f: 1.2, m_f_band: default_band() }
    }
}

pub fn subsidy_per_node(beta: f64, c_node: f64) -> f64 {
    beta * c_node
}

/// The non-dimensional `β · δ_r` reading of the subsidy rule.
pub fn subsidy_fraction_of_deficit(beta: f64, delta_r: f64) -> f64 {
    beta * delta_r
}

pub fn effective_node_cost(c_node: f64, i_f: f64) -> Result<f64, PolicyError> {
    if i_f > c_node {
        return Err(PolicyError::SubsidyExceedsCost { i_f, c_node });
    }
    Ok(c_node - i_f)
}

/// Coverage gain in points at `beta`, interpolated along the curve.
pub fn rcg_of_beta(model: &SubsidyModel, beta: f64) -> Result<f64, PolicyError> {
    Ok(model.rcg_curve.eval(beta)?)
}

/// Coverage percent after subsidy, capped at 100.
pub fn coverage_post(r_cov_pre: f64, kappa: f64, i_f: f64) -> f64 {
    (r_cov_pre + kappa * i_f).min(100.0)
}

/// `1 − c_r / c_req`, clamped to [0, 1].
pub fn coverage_deficit(c_r: f64, c_req: f64) -> Result<f64, PolicyError> {
    if !(c_req > 0.0) {
        return Err(PolicyError::ZeroRequirement);
    }
    Ok((1.0 - c_r / c_req).clamp(0.0, 1.0))
}

/// `δ_pre − β · rcg`, clamped to [0, 1].
pub fn post_deficit_eq(delta_pre: f64, beta: f64, rcg: f64) -> f64 {
    (delta_pre - beta * rcg).clamp(0.0, 1.0)
}

/// The coverage gain per unit β (as a fraction of the requirement) for which
/// the deficit equation and the coverage identity agree.
pub fn self_consistent_rcg(model: &SubsidyModel) -> f64 {
    model.kappa * model.c_node / 100.0
}

/// Post-subsidy deficit computed both ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeficitCheck {
    pub beta: f64,
    /// From the deficit equation with the gain taken as a fraction.
    pub from_equation: f64,
    /// From post-subsidy coverage.
    pub from_coverage: f64,
    /// The two differ by more than 0.02.
    pub inconsistent: bool,
}

pub fn deficit_check(model: &SubsidyModel, beta: f64) -> Result<DeficitCheck, PolicyError> {
    let from_equation = post_deficit_eq(model.delta_r_pre, beta, model.rcg(beta)? / 100.0);
    let i_f = subsidy_per_node(beta, model.c_node);
    let from_coverage = coverage_deficit(coverage_post(model.r_cov_pre, model.kappa, i_f), 100.0)?;
    Ok(DeficitCheck {
        beta,
        from_equation,
        from_coverage,
        inconsistent: (from_equation - from_coverage).abs() > 0.02,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBenefit {
    pub beta: f64,
    pub i_f: f64,
    pub rcg: f64,
    pub e_gov: f64,
    pub seb: f64,
    pub nsb: f64,
    /// `None` when nothing is spent.
    pub roi: Option<f64>,
}

pub fn roi(nsb: f64, e_gov: f64) -> Result<f64, PolicyError> {
    if e_gov == 0.0 {
        return Err(PolicyError::ZeroExpenditure);
    }
    Ok(nsb / e_gov)
}

pub fn cost_benefit(model: &SubsidyModel, beta: f64) -> Result<CostBenefit, PolicyError> {
    let i_f = subsidy_per_node(beta, model.c_node);
    let e_gov = model.n_nodes * i_f;
    let rcg = model.rcg(beta)?;
    let seb = model.lambda_r * rcg;
    let nsb = seb - e_gov;
    Ok(CostBenefit { beta, i_f, rcg, e_gov, seb, nsb, roi: roi(nsb, e_gov).ok() })
}

/// `∂RCG/∂β = κ · δ_r`.
pub fn rcg_sensitivity(kappa: f64, delta_r: f64) -> f64 {
    kappa * delta_r
}

/// Finite-difference slope of the gain curve over `[b0, b1]`.
pub fn rcg_slope(model: &SubsidyModel, b0: f64, b1: f64) -> Result<f64, PolicyError> {
    Ok((rcg_of_beta(model, b1)? - rcg_of_beta(model, b0)?) / (b1 - b0))
}

/// `p0 · e^{kγt}` with k = 2 under a mandate, capped at 1.
pub fn penetration(model: &PenetrationModel, t_years: f64) -> f64 {
    let k = if model.mandate { 2.0 } else { 1.0 };
    (model.p0 * (k * model.gamma * t_years).exp()).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PppOutcome {
    pub i_total: f64,
    pub private: f64,
}

pub fn ppp_total(model: &PppModel) -> PppOutcome {
    let private = model.i_gov * model.m_f;
    PppOutcome { i_total: model.i_gov + private, private }
}

/// Weighted sum of normalized offload efficiency, coverage gain, penetration
/// and investment multiplier.
pub fn policy_score(theta: [f64; 4], b_eff: f64, rcg_norm: f64, p_d2m: f64, m_f_norm: f64) -> f64 {
    theta[0] * b_eff + theta[1] * rcg_norm + theta[2] * p_d2m + theta[3] * m_f_norm
}

/// Axes of a policy sweep. Rows are the cartesian product in
/// `betas × alphas × thetas` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub betas: Vec<f64>,
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub thetas: Vec<[f64; 4]>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self { betas: vec![0.05, 0.10, 0.20], alphas: vec![0.08, 0.12, 0.16], thetas: vec![[0.25; 4]] }
    }
}

fn default_horizon() -> f64 {
    5.0
}

fn default_threshold() -> f64 {
    DEFAULT_SLOPE_THRESHOLD
}

/// Everything a policy evaluation needs; the CLI reads this from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub subsidy: SubsidyModel,
    pub penetration: PenetrationModel,
    pub ppp: PppModel,
    /// Policy-score weights.
    pub theta: [f64; 4],
    /// Broadcast share evaluated outside a sweep.
    pub alpha_s: f64,
    #[serde(default)]
    pub beff_curve: BeffCurve,
    #[serde(default = "default_threshold")]
    pub slope_threshold: f64,
    /// Years at which penetration enters the policy score.
    #[serde(default = "default_horizon")]
    pub horizon_years: f64,
    #[serde(default)]
    pub grid: SweepGrid,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            subsidy: SubsidyModel::default(),
            penetration: PenetrationModel::default(),
            ppp: PppModel::default(),
            theta: [0.25; 4],
            alpha_s: 0.12,
            beff_curve: BeffCurve::default(),
            slope_threshold: DEFAULT_SLOPE_THRESHOLD,
            horizon_years: 5.0,
            grid: SweepGrid::default(),
        }
    }
}

impl PolicyConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = self.subsidy.violations();
        if !(self.penetration.p0 > 0.0 && self.penetration.p0 <= 1.0) || !(self.penetration.gamma >= 0.0) {
            out.push("penetration needs p0 in (0, 1] and gamma >= 0".into());
        }
        if !(self.ppp.m_f > 0.0) || !(self.ppp.i_gov >= 0.0) {
            out.push("ppp multiplier must be positive and public funds non-negative".into());
        }
        if !(self.ppp.m_f_band.1 > 0.0 && self.ppp.m_f_band.0 <= self.ppp.m_f_band.1) {
            out.push("multiplier band must be a non-empty positive range".into());
        }
        let thetas = std::iter::once(&self.theta).chain(&self.grid.thetas);
        if thetas.flatten().any(|w| !(*w >= 0.0)) {
            out.push("policy-score weights must be non-negative".into());
        }
        if !(self.horizon_years >= 0.0) {
            out.push("horizon must be non-negative".into());
        }
        out
    }

    /// Coverage gain over the largest curve value.
    pub fn rcg_norm(&self, rcg: f64) -> f64 {
        let max = self.subsidy.rcg_curve.anchors().last().map_or(1.0, |a| a.1);
        if max > 0.0 {
            (rcg / max).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    /// Multiplier over the top of its band.
    pub fn m_f_norm(&self) -> f64 {
        (self.ppp.m_f / self.ppp.m_f_band.1).clamp(0.0, 1.0)
    }
}

/// Full evaluation at one `(β, α_s, θ)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRow {
    pub beta: f64,
    pub alpha_s: f64,
    pub theta: [f64; 4],
    pub i_f: f64,
    pub rcg: f64,
    pub e_gov: f64,
    pub seb: f64,
    pub nsb: f64,
    pub roi: Option<f64>,
    pub delta_r_eq: f64,
    pub delta_r_coverage: f64,
    pub deficit_inconsistent: bool,
    pub b_eff: f64,
    pub p_d2m: f64,
    pub i_total: f64,
    pub ps: f64,
}

pub fn evaluate(config: &PolicyConfig, beta: f64, alpha_s: f64, theta: [f64; 4]) -> Result<PolicyRow, PolicyError> {
    let cb = cost_benefit(&config.subsidy, beta)?;
    let dc = deficit_check(&config.subsidy, beta)?;
    let b_eff = beff_lookup(&config.beff_curve, alpha_s)?;
    let p_d2m = penetration(&config.penetration, config.horizon_years);
    let ppp = ppp_total(&config.ppp);
    let ps = policy_score(theta, b_eff, config.rcg_norm(cb.rcg), p_d2m, config.m_f_norm());
    Ok(PolicyRow {
        beta,
        alpha_s,
        theta,
        i_f: cb.i_f,
        rcg: cb.rcg,
        e_gov: cb.e_gov,
        seb: cb.seb,
        nsb: cb.nsb,
        roi: cb.roi,
        delta_r_eq: dc.from_equation,
        delta_r_coverage: dc.from_coverage,
        deficit_inconsistent: dc.inconsistent,
        b_eff,
        p_d2m,
        i_total: ppp.i_total,
        ps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<PolicyRow>,
    /// Row with the highest policy score (first on ties).
    pub argmax_ps: usize,
    /// Row with the highest net social benefit (first on ties).
    pub argmax_nsb: usize,
    /// Grid share at the knee of the offload curve: the largest grid value
    /// not past the point where extra spectrum stops paying off.
    pub beff_optimal_alpha: Option<f64>,
}

fn argmax_by(rows: &[PolicyRow], key: impl Fn(&PolicyRow) -> f64) -> usize {
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if key(r) > key(&rows[best]) {
            best = i;
        }
    }
    best
}

pub fn policy_sweep(config: &PolicyConfig, grid: &SweepGrid) -> Result<SweepTable, PolicyError> {
    let thetas = if grid.thetas.is_empty() { vec![config.theta] } else { grid.thetas.clone() };
    if grid.betas.is_empty() || grid.alphas.is_empty() {
        return Err(PolicyError::EmptyGrid);
    }
    let mut rows = Vec::with_capacity(grid.betas.len() * grid.alphas.len() * thetas.len());
    for &b in &grid.betas {
        for &a in &grid.alphas {
            for &t in &thetas {
                rows.push(evaluate(config, b, a, t)?);
            }
        }
    }
    let knee = config.beff_curve.knee(config.slope_threshold);
    let beff_optimal_alpha = grid
        .alphas
        .iter()
        .copied()
        .filter(|&a| a <= knee + 1e-12)
        .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a))));
    Ok(SweepTable {
        argmax_ps: argmax_by(&rows, |r| r.ps),
        argmax_nsb: argmax_by(&rows, |r| r.nsb),
        beff_optimal_alpha,
        rows,
    })
}

impl SweepTable {
    /// CSV with a header row; the last columns mark the argmax rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), PolicyError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "beta", "alpha_s", "theta1", "theta2", "theta3", "theta4", "i_f", "rcg", "e_gov", "seb", "nsb", "roi",
            "delta_r_eq", "delta_r_coverage", "deficit_inconsistent", "b_eff", "p_d2m", "i_total", "ps",
            "argmax_ps", "argmax_nsb", "beff_optimal",
        ])?;
        for (i, r) in self.rows.iter().enumerate() {
            let beff_opt = self.beff_optimal_alpha.is_some_and(|a| a == r.alpha_s);
            let mut rec: Vec<String> = vec![r.beta.to_string(), r.alpha_s.to_string()];
            rec.extend(r.theta.iter().map(f64::to_string));
            rec.extend([r.i_f, r.rcg, r.e_gov, r.seb, r.nsb].iter().map(f64::to_string));
            rec.push(r.roi.map(|v| v.to_string()).unwrap_or_default());
            rec.push(r.delta_r_eq.to_string());
            rec.push(r.delta_r_coverage.to_string());
            rec.push(r.deficit_inconsistent.to_string());
            rec.extend([r.b_eff, r.p_d2m, r.i_total, r.ps].iter().map(f64::to_string));
            rec.push((i == self.argmax_ps).to_string());
            rec.push((i == self.argmax_nsb).to_string());
            rec.push(beff_opt.to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}
