//! Broadcast offload layer: spectrum split, broadcast capacity, offloading
//! efficiency, decodability and the spectrum-share controller.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{CurveError, PiecewiseLinear};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum D2mError {
    #[error("no concurrent viewers")]
    NoViewers,
    #[error("total offered load must be positive")]
    ZeroTotalLoad,
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Lowest and highest share the controller will choose.
pub const ALPHA_MIN: f64 = 0.02;
pub const ALPHA_MAX: f64 = 0.16;
pub const ALPHA_STEP: f64 = 0.01;
/// Right-hand curve slope above which another step still pays off.
pub const DEFAULT_SLOPE_THRESHOLD: f64 = 1.0;

/// Offloading efficiency as a function of spectrum share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BeffCurve(pub PiecewiseLinear);

impl Default for BeffCurve {
    fn default() -> Self {
        Self(
            PiecewiseLinear::new(vec![(0.0, 0.0), (0.08, 0.25), (0.12, 0.40), (0.16, 0.42), (0.20, 0.43)])
                .expect("default anchors are valid"),
        )
    }
}

impl BeffCurve {
    /// Concavity over the measured anchors. The origin anchor is excluded:
    /// the first measured point sits below the chord from the origin.
    pub fn is_concave(&self) -> bool {
        let measured: Vec<(f64, f64)> =
            self.0.anchors().iter().copied().filter(|&(x, _)| x > 0.0).collect();
        match PiecewiseLinear::new(measured) {
            Ok(c) => c.is_concave(),
            Err(_) => true,
        }
    }

    /// First anchor whose right-hand slope falls below `slope_threshold`:
    /// the point past which more spectrum buys little offload.
    pub fn knee(&self, slope_threshold: f64) -> f64 {
        let a = self.0.anchors();
        a.iter()
            .zip(self.0.slopes())
            .find(|(_, s)| *s < slope_threshold)
            .map_or(a[a.len() - 1].0, |(p, _)| p.0)
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.0.anchors().iter().any(|&(_, y)| !(0.0..=1.0).contains(&y)) {
            out.push("offloading efficiency anchors must lie in [0, 1]".into());
        }
        if !self.is_concave() {
            out.push("offloading efficiency curve must be concave over measured anchors".into());
        }
        out
    }
}

fn default_slope_threshold() -> f64 {
    DEFAULT_SLOPE_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPlan {
    pub s_total_mhz: f64,
    /// Broadcast share of the spectrum.
    pub alpha_s: f64,
    /// Broadcast spectral efficiency, bits/s/Hz.
    pub eta_d2m: f64,
    /// Nominal broadcast bitrate B, Mbps.
    pub broadcast_bitrate_mbps: f64,
    /// Linear SINR decode threshold.
    pub gamma_th: f64,
    /// Received broadcast power, mW.
    pub p_d2m_mw: f64,
    /// Noise floor, mW.
    pub n0_mw: f64,
    /// Unicast interference per MHz of unicast spectrum, mW/MHz.
    pub i_unic_coeff: f64,
    #[serde(default)]
    pub beff_curve: BeffCurve,
    /// Let the controller move `alpha_s` during the run.
    #[serde(default)]
    pub adaptive: bool,
    #[serde(default = "default_slope_threshold")]
    pub slope_threshold: f64,
}

impl Default for SpectrumPlan {
    fn default() -> Self {
        Self {
            s_total_mhz: 100.0,
            alpha_s: 0.12,
            eta_d2m: 2.1,
            broadcast_bitrate_mbps: 25.0,
            gamma_th: 4.0,
            p_d2m_mw: 41.0,
            n0_mw: 1.0,
            i_unic_coeff: 0.1,
            beff_curve: BeffCurve::default(),
            adaptive: false,
            slope_threshold: DEFAULT_SLOPE_THRESHOLD,
        }
    }
}

impl SpectrumPlan {
    pub(crate) fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(0.0..0.2).contains(&self.alpha_s) {
            out.push("alpha_s must be in [0, 0.2)".into());
        }
        let positive = [self.s_total_mhz, self.eta_d2m, self.gamma_th, self.n0_mw];
        if positive.iter().any(|v| !(*v > 0.0)) {
            out.push("s_total, eta_d2m, gamma_th and n0 must be positive".into());
        }
        if [self.broadcast_bitrate_mbps, self.p_d2m_mw, self.i_unic_coeff].iter().any(|v| !(*v >= 0.0)) {
            out.push("broadcast bitrate, power and interference coefficient must be non-negative".into());
        }
        out.extend(self.beff_curve.violations());
        out
    }

    pub fn with_alpha(&self, alpha_s: f64) -> Self {
        Self { alpha_s, ..self.clone() }
    }
}

/// `(s_d2m, s_unic)` in MHz; the parts always sum to `s_total` exactly.
/// Assumes `alpha_s < 0.5`, so the broadcast part is the finer-grained one.
pub fn split_spectrum(plan: &SpectrumPlan) -> (f64, f64) {
    let total = plan.s_total_mhz;
    let mut s_d2m = plan.alpha_s * total;
    let s_unic = total - s_d2m;
    // Nudge the smaller part by ulps so the float sum reproduces the total.
    while s_d2m + s_unic > total {
        s_d2m = s_d2m.next_down();
    }
    while s_d2m + s_unic < total {
        s_d2m = s_d2m.next_up();
    }
    (s_d2m, s_unic)
}

/// Broadcast capacity in Mbps (MHz times bits/s/Hz).
pub fn d2m_capacity(s_d2m_mhz: f64, eta: f64) -> f64 {
    s_d2m_mhz * eta
}

/// Unicast bandwidth saved per viewer: `B / U`.
pub fn per_user_broadcast_rate(bitrate_mbps: f64, viewers: u64) -> Result<f64, D2mError> {
    if viewers == 0 {
        return Err(D2mError::NoViewers);
    }
    Ok(bitrate_mbps / viewers as f64)
}

/// Broadcast-carried traffic: capacity-limited or demand-limited.
pub fn broadcast_carried(c_d2m: f64, eligible_demand: f64) -> f64 {
    c_d2m.min(eligible_demand).max(0.0)
}

/// Share of the total offered load carried by broadcast, in [0, 1].
pub fn offload_efficiency(c_d2m: f64, eligible_demand: f64, total_load: f64) -> Result<f64, D2mError> {
    if !(total_load > 0.0) {
        return Err(D2mError::ZeroTotalLoad);
    }
    Ok((broadcast_carried(c_d2m, eligible_demand) / total_load).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sinr {
    pub ratio: f64,
    pub decodable: bool,
}

/// Broadcast SINR with interference proportional to unicast spectrum.
pub fn sinr(plan: &SpectrumPlan, s_unic_mhz: f64) -> Sinr {
    let i_unic = plan.i_unic_coeff * s_unic_mhz;
    let ratio = plan.p_d2m_mw / (i_unic + plan.n0_mw);
    Sinr { ratio, decodable: ratio >= plan.gamma_th }
}

pub fn beff_lookup(curve: &BeffCurve, alpha_s: f64) -> Result<f64, D2mError> {
    Ok(curve.0.eval(alpha_s)?)
}

/// One controller step. Raise the share while unicast QoS holds and the curve
/// is still steep; lower it when QoS fails or broadcast cannot be decoded.
/// The result is clamped to [ALPHA_MIN, ALPHA_MAX].
pub fn adaptive_alpha(
    curve: &BeffCurve,
    current: f64,
    unicast_qos_ok: bool,
    decodable: bool,
    slope_threshold: f64,
) -> f64 {
    let step = if !unicast_qos_ok || !decodable {
        -ALPHA_STEP
    } else {
        let (lo, hi) = curve.0.domain();
        let slope = curve.0.right_slope(current.clamp(lo, hi)).unwrap_or(0.0);
        if slope >= slope_threshold {
            ALPHA_STEP
        } else {
            0.0
        }
    };
    // Snap away accumulated float error so repeated steps land on anchors.
    let next = ((current + step) * 1e9).round() / 1e9;
    next.clamp(ALPHA_MIN, ALPHA_MAX)
}
