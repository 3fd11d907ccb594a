use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::pairwise_sum;

/// Samples at or below this magnitude are treated as roundoff and ignored.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Fitted envelope `|F(z)| ≈ C e^{−δ|z|^{1/s}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub s: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub delta: f64,
    /// Signed maximum of `log|F| − (log C − δ|z|^{1/s})` over the fitted samples.
    pub residual: f64,
    /// Number of samples above the noise floor.
    pub support: usize,
    pub r_min: f64,
    pub r_max: f64,
    /// Smallest `C` with `|F| ≤ C e^{−δ|z|^{1/s}}` on every fitted sample, at the fitted `δ`.
    pub envelope_c: f64,
}

fn norm(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Least-squares fit of `log|F|` against `log C − δ|z|^{1/s}`.
pub fn fit_decay(samples: &[(Vec<f64>, f64)], s: f64) -> Result<DecayFit> {
    if !(s >= 0.5) {
        return Err(Error::Domain(format!("order s = {s} must be >= 1/2")));
    }
    let pts: Vec<(f64, f64, f64)> = samples
        .iter()
        .filter(|(_, f)| f.is_finite() && *f > NOISE_FLOOR)
        .map(|(z, f)| {
            let r = norm(z);
            (r, r.powf(1.0 / s), f.ln())
        })
        .collect();
    if pts.len() < 10 {
        return Err(Error::Fit(format!(
            "{} samples above the noise floor, at least 10 are needed",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.2).collect();
    let mx = pairwise_sum(&xs) / n;
    let my = pairwise_sum(&ys) / n;
    let sxx = pairwise_sum(&xs.iter().map(|x| (x - mx).powi(2)).collect::<Vec<_>>());
    let sxy = pairwise_sum(
        &xs.iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .collect::<Vec<_>>(),
    );
    if !(sxx > 0.0) {
        return Err(Error::Fit("all fitted samples share one radius".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let delta = -slope;
    let residual = pts
        .iter()
        .map(|p| p.2 - (intercept + slope * p.1))
        .fold(f64::NEG_INFINITY, f64::max);
    let envelope_c = pts
        .iter()
        .map(|p| p.2 + delta * p.1)
        .fold(f64::NEG_INFINITY, f64::max)
        .exp();
    Ok(DecayFit {
        s,
        c: intercept.exp(),
        delta,
        residual,
        support: pts.len(),
        r_min: pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        r_max: pts.iter().map(|p| p.0).fold(0.0, f64::max),
        envelope_c,
    })
}

/// Max-ratio constant `max |F(z)| e^{δ|z|^{1/s}}` over samples above the noise floor.
pub fn envelope_constant(samples: &[(Vec<f64>, f64)], s: f64, delta: f64) -> Result<f64> {
    let m = samples
        .iter()
        .filter(|(_, f)| f.is_finite() && *f > NOISE_FLOOR)
        .map(|(z, f)| f.ln() + delta * norm(z).powf(1.0 / s))
        .fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return Err(Error::Fit("no samples above the noise floor".into()));
    }
    Ok(m.exp())
}
