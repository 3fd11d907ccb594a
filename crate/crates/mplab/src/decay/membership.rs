use serde::{Deserialize, Serialize};

use super::fit::NOISE_FLOOR;
use crate::error::{Error, Result};
use crate::tf::{fourier_transform, SampledField};

/// Samples on the outer ring must stay below this fraction of the peak.
pub const BOUNDARY_FRACTION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Bounded,
    Growing,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideReport {
    pub sup: f64,
    pub inner_max: f64,
    pub outer_max: f64,
    pub radius: f64,
    pub boundary_ratio: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub s: f64,
    pub eps: f64,
    pub sup_space: f64,
    pub sup_freq: f64,
    pub space: SideReport,
    pub freq: SideReport,
    pub verdict: Verdict,
}

fn side(f: &SampledField, s: f64, eps: f64) -> SideReport {
    let g = f.grid();
    let peak = f.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut boundary = 0.0f64;
    let mut weighted: Vec<(f64, f64)> = Vec::new();
    for (k, v) in f.values().iter().enumerate() {
        let idx = g.unravel(k);
        if idx
            .iter()
            .enumerate()
            .any(|(a, &i)| i == 0 || i + 1 == g.n(a))
        {
            boundary = boundary.max(v.norm());
        }
        if v.norm() > NOISE_FLOOR {
            let r = g.point(k).iter().map(|x| x * x).sum::<f64>().sqrt();
            weighted.push((r, (v.norm().ln() + eps * r.powf(1.0 / s)).exp()));
        }
    }
    let radius = weighted.iter().map(|w| w.0).fold(0.0, f64::max);
    let inner_max = weighted
        .iter()
        .filter(|w| w.0 <= radius / 2.0)
        .map(|w| w.1)
        .fold(0.0, f64::max);
    let outer_max = weighted
        .iter()
        .filter(|w| w.0 > radius / 2.0)
        .map(|w| w.1)
        .fold(0.0, f64::max);
    let sup = inner_max.max(outer_max);
    let boundary_ratio = if peak > 0.0 { boundary / peak } else { 0.0 };
    let verdict = if peak == 0.0 || boundary_ratio > BOUNDARY_FRACTION {
        Verdict::Inconclusive
    } else if outer_max > 2.0 * inner_max {
        Verdict::Growing
    } else {
        Verdict::Bounded
    };
    SideReport {
        sup,
        inner_max,
        outer_max,
        radius,
        boundary_ratio,
        verdict,
    }
}

/// Grid estimate of `sup |f(x)|e^{ε|x|^{1/s}}` and `sup |f̂(ξ)|e^{ε|ξ|^{1/s}}` with a shell trend test.
pub fn gs_membership_report(f: &SampledField, s: f64, eps: f64) -> Result<MembershipReport> {
    if !(s >= 0.5) || !(eps > 0.0) {
        return Err(Error::Domain(format!(
            "need s >= 1/2 and eps > 0 (got {s}, {eps})"
        )));
    }
    let space = side(f, s, eps);
    let freq = side(&fourier_transform(f), s, eps);
    let verdict = match (space.verdict, freq.verdict) {
        (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
        (Verdict::Growing, _) | (_, Verdict::Growing) => Verdict::Growing,
        _ => Verdict::Bounded,
    };
    Ok(MembershipReport {
        s,
        eps,
        sup_space: space.sup,
        sup_freq: freq.sup,
        space,
        freq,
        verdict,
    })
}
