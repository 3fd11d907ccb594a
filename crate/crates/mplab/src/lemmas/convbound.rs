use serde::{Deserialize, Serialize};

use super::conv::{minimize_in_box, peak_width_in_box};
use super::quad::PeakedIntegral;
use crate::error::{Error, Result};

const TAIL: f64 = 14.0 * std::f64::consts::LN_10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Convex,
    Linear,
    Concave,
}

impl Regime {
    pub fn of(p: f64) -> Self {
        if p > 1.0 {
            Regime::Convex
        } else if p == 1.0 {
            Regime::Linear
        } else {
            Regime::Concave
        }
    }
}

/// `I_{ε,p}(x) = ∫ e^{−ε(|t|^p + |t−x|^p)} dt` against its envelope without the constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvBoundPoint {
    pub x: f64,
    pub log_i: f64,
    pub log_envelope: f64,
    pub log_ratio: f64,
    pub converged: bool,
}

/// Envelope `(1+|x|)^{d(2−p)/2}e^{−ε2^{1−p}|x|^p}`, `(1+|x|)^d e^{−ε|x|}` or `e^{−δ|x|^p}`.
fn log_envelope(eps: f64, p: f64, delta: f64, d: usize, r: f64) -> f64 {
    let d = d as f64;
    match Regime::of(p) {
        Regime::Convex => 0.5 * d * (2.0 - p) * r.ln_1p() - eps * 2f64.powf(1.0 - p) * r.powf(p),
        Regime::Linear => d * r.ln_1p() - eps * r,
        Regime::Concave => -delta * r.powf(p),
    }
}

pub fn check_convbound(eps: f64, p: f64, x: &[f64], delta: f64) -> Result<ConvBoundPoint> {
    let d = x.len();
    if !(1..=2).contains(&d) {
        return Err(Error::Dimension(format!(
            "d = {d}: only d in {{1, 2}} is supported"
        )));
    }
    if !(eps > delta && delta > 0.0 && p > 0.0) {
        return Err(Error::Domain(format!(
            "need eps > delta > 0 and p > 0 (got {eps}, {delta}, {p})"
        )));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut xr = vec![0.0; d];
    xr[0] = r;
    let xe = xr.clone();
    let energy = move |t: &[f64]| {
        let a: f64 = t.iter().map(|v| v * v).sum();
        let b: f64 = t.iter().zip(&xe).map(|(u, w)| (u - w).powi(2)).sum();
        eps * (a.powf(0.5 * p) + b.powf(0.5 * p))
    };
    let half: Vec<f64> = xr.iter().map(|v| 0.5 * v).collect();
    let candidates = vec![vec![0.0; d], xr.clone(), half];
    let e_cand = candidates
        .iter()
        .map(|c| energy(c))
        .fold(f64::INFINITY, f64::min);
    let rad = ((e_cand + TAIL) / eps).powf(1.0 / p);
    let lo: Vec<f64> = (0..d).map(|k| (-rad).max(xr[k] - rad)).collect();
    let hi: Vec<f64> = (0..d).map(|k| rad.min(xr[k] + rad)).collect();
    let c = minimize_in_box(&energy, &candidates, &lo, &hi);
    let width: Vec<f64> = (0..d)
        .map(|k| peak_width_in_box(&energy, &c, k, hi[k] - lo[k]))
        .collect();
    let kinks: Vec<Vec<f64>> = (0..d).map(|k| vec![0.0, 0.5 * xr[k], xr[k]]).collect();
    let q = PeakedIntegral {
        energy: &energy,
        center: c,
        width,
        lo,
        hi,
        kinks,
    }
    .log_integral(if d == 1 { 1e-10 } else { 1e-7 });
    let env = log_envelope(eps, p, delta, d, r);
    Ok(ConvBoundPoint {
        x: r,
        log_i: q.log_value,
        log_envelope: env,
        log_ratio: q.log_value - env,
        converged: q.converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvBoundReport {
    pub eps: f64,
    pub p: f64,
    pub delta: f64,
    pub d: usize,
    pub regime: Regime,
    /// Max ratio over `|x| ≤ x_max/2`.
    pub c_half: f64,
    /// Max ratio over `|x| ≤ x_max`.
    pub c_full: f64,
    pub points: Vec<ConvBoundPoint>,
    pub pass: bool,
}

/// Fits the constant as the max ratio on `|x| ∈ {0, x_max/steps, …, x_max}` and checks that
/// doubling the sweep range changes it by at most a factor 2.
pub fn convbound_sweep(
    eps: f64,
    p: f64,
    delta: f64,
    d: usize,
    x_max: f64,
    steps: usize,
) -> Result<ConvBoundReport> {
    use rayon::prelude::*;
    let points: Vec<ConvBoundPoint> = (0..=steps)
        .into_par_iter()
        .map(|k| {
            let mut x = vec![0.0; d];
            x[0] = x_max * k as f64 / steps as f64;
            check_convbound(eps, p, &x, delta)
        })
        .collect::<Result<_>>()?;
    let max_over = |lim: f64| {
        points
            .iter()
            .filter(|q| q.x <= lim + 1e-12)
            .map(|q| q.log_ratio)
            .fold(f64::NEG_INFINITY, f64::max)
            .exp()
    };
    let (c_half, c_full) = (max_over(0.5 * x_max), max_over(x_max));
    let pass = points
        .iter()
        .all(|q| q.converged && q.log_ratio.is_finite())
        && c_full.is_finite()
        && c_full <= 2.0 * c_half;
    Ok(ConvBoundReport {
        eps,
        p,
        delta,
        d,
        regime: Regime::of(p),
        c_half,
        c_full,
        points,
        pass,
    })
}
