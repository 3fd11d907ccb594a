use nalgebra::{DMatrix, Matrix2};

use super::oscillator::{generic_block, ho_block_matrix};
use super::{quarter_turn, ScenarioEntry, ScenarioReport};
use crate::error::{Error, Result};
use crate::symplectic::{from_blocks, standard_j, EulerDecomposition, SymplecticMatrix};

/// `⊕ [[0, 1], [−1, 0]]` in even dimension `d`.
pub fn rotation_generator(d: usize) -> Result<DMatrix<f64>> {
    if d == 0 || d % 2 != 0 {
        return Err(Error::Domain(format!(
            "magnetic flow needs an even dimension, got {d}"
        )));
    }
    let mut b = DMatrix::zeros(d, d);
    for k in (0..d).step_by(2) {
        b[(k, k + 1)] = 1.0;
        b[(k + 1, k)] = -1.0;
    }
    Ok(b)
}

fn check_b(b: &DMatrix<f64>) -> Result<usize> {
    let d = b.nrows();
    if b.ncols() != d || d == 0 || d % 2 != 0 {
        return Err(Error::Domain(format!(
            "B must be square of even size, got {}x{}",
            b.nrows(),
            b.ncols()
        )));
    }
    let skew = (b.transpose() + b).norm();
    if skew > 1e-12 {
        return Err(Error::Domain(format!(
            "B violates Bᵀ = −B (residual {skew:.3e})"
        )));
    }
    let orth = (b.transpose() * b - DMatrix::identity(d, d)).norm();
    if orth > 1e-12 {
        return Err(Error::Domain(format!(
            "B violates BᵀB = I (residual {orth:.3e})"
        )));
    }
    Ok(d)
}

fn check_params(m: f64, omega: f64) -> Result<()> {
    if !(m > 0.0) {
        return Err(Error::Domain(format!("mass must be positive, got {m}")));
    }
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::Domain(
            "magnetic flow needs a nonzero finite frequency".into(),
        ));
    }
    Ok(())
}

pub fn magnetic_matrix(t: f64, m: f64, omega: f64, b: &DMatrix<f64>) -> Result<SymplecticMatrix> {
    check_params(m, omega)?;
    let d = check_b(b)?;
    let (s, c) = (omega * t).sin_cos();
    let id = DMatrix::<f64>::identity(d, d);
    let p = &id * (c * c) + b * (s * c);
    let q = b * (s * s) + &id * (s * c);
    let mw = m * omega;
    Ok(SymplecticMatrix::from_trusted(from_blocks(
        &p,
        &(&q / mw),
        &(&q * -mw),
        &p,
    )))
}

fn scalar_times_identity(u: &Matrix2<f64>, d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    for k in 0..d {
        m[(k, k)] = u[(0, 0)];
        m[(k, d + k)] = u[(0, 1)];
        m[(d + k, k)] = u[(1, 0)];
        m[(d + k, d + k)] = u[(1, 1)];
    }
    m
}

fn finish(u: DMatrix<f64>, sigma: f64, s: &SymplecticMatrix) -> Result<EulerDecomposition> {
    let d = s.dim();
    let mut dinv = DMatrix::zeros(2 * d, 2 * d);
    for k in 0..d {
        dinv[(k, k)] = 1.0 / sigma;
        dinv[(d + k, d + k)] = sigma;
    }
    let v = dinv * &u * s.matrix();
    EulerDecomposition::new(u, v, vec![sigma; d])
}

pub fn magnetic_euler(
    t: f64,
    m: f64,
    omega: f64,
    b: &DMatrix<f64>,
) -> Result<(EulerDecomposition, ScenarioReport)> {
    let s = magnetic_matrix(t, m, omega, b)?;
    let d = s.dim();
    let mw = m * omega;
    let id = DMatrix::identity(2 * d, 2 * d);
    if (mw.abs() - 1.0).abs() <= 1e-14 {
        let dec = EulerDecomposition::new(id, s.matrix().clone(), vec![1.0; d])?;
        return Ok((
            dec,
            ScenarioReport::single(ScenarioEntry::new("orthogonal").with("m_omega", mw)),
        ));
    }
    let (dec, entry) = match quarter_turn(omega * t) {
        Some(k) if k % 2 == 0 => (finish(id, 1.0, &s)?, ScenarioEntry::new("even-quarter")),
        Some(_) if mw.abs() > 1.0 => (
            finish(standard_j(d).into_matrix(), mw.abs(), &s)?,
            ScenarioEntry::new("odd-quarter-large").with("m_omega", mw),
        ),
        Some(_) => (
            finish(id, 1.0 / mw.abs(), &s)?,
            ScenarioEntry::new("odd-quarter-small").with("m_omega", mw),
        ),
        None => {
            // S Sᵀ has the oscillator entries X, Y, Z times the identity.
            let rep = ho_block_matrix(t, m, omega);
            let (blk, entry) = generic_block(&rep, mw, (omega * t).sin(), "generic");
            (
                finish(scalar_times_identity(&blk.u, d), blk.sigma, &s)?,
                entry,
            )
        }
    };
    Ok((dec, ScenarioReport::single(entry)))
}
