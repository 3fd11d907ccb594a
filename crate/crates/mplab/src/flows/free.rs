use nalgebra::DMatrix;

use super::{ScenarioEntry, ScenarioReport};
use crate::error::{Error, Result};
use crate::symplectic::{EulerDecomposition, SymplecticMatrix};

/// `[[I, 2tI], [O, I]]`.
pub fn free_particle_matrix(t: f64, d: usize) -> SymplecticMatrix {
    let mut m = DMatrix::identity(2 * d, 2 * d);
    for k in 0..d {
        m[(k, d + k)] = 2.0 * t;
    }
    SymplecticMatrix::from_trusted(m)
}

/// `σ(t) = √(1+t²) + |t|`.
pub fn free_particle_sigma(t: f64) -> f64 {
    t.hypot(1.0) + t.abs()
}

/// `U_t = (1+σ²)^{-1/2}[[σI, sI], [−sI, σI]]` with `s = sgn t`; `V_t = D⁻¹U_tS_t`.
pub fn free_particle_euler(t: f64, d: usize) -> Result<(EulerDecomposition, ScenarioReport)> {
    if d == 0 || !t.is_finite() {
        return Err(Error::Domain(
            "free particle needs d >= 1 and finite t".into(),
        ));
    }
    let sigma = free_particle_sigma(t);
    let sg = if t < 0.0 { -1.0 } else { 1.0 };
    let n = sigma.hypot(1.0);
    let mut u = DMatrix::zeros(2 * d, 2 * d);
    for k in 0..d {
        u[(k, k)] = sigma / n;
        u[(k, d + k)] = sg / n;
        u[(d + k, k)] = -sg / n;
        u[(d + k, d + k)] = sigma / n;
    }
    let s = free_particle_matrix(t, d);
    let mut dinv = DMatrix::zeros(2 * d, 2 * d);
    for k in 0..d {
        dinv[(k, k)] = 1.0 / sigma;
        dinv[(d + k, d + k)] = sigma;
    }
    let v = dinv * &u * s.matrix();
    let label = if t < 0.0 {
        "free-particle-negative-time"
    } else {
        "free-particle"
    };
    let entry = ScenarioEntry::new(label).with("t", t).with("sigma", sigma);
    Ok((
        EulerDecomposition::new(u, v, vec![sigma; d])?,
        ScenarioReport::single(entry),
    ))
}
