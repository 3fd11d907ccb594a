use nalgebra::Matrix2;

use super::blocks::{assemble_matrix, permutation_assemble, sorting_order, sym2_rows, Block2, J1};
use super::free::free_particle_sigma;
use super::{quarter_turn, ScenarioEntry, ScenarioReport};
use crate::error::{Error, Result};
use crate::symplectic::{EulerDecomposition, SymplecticMatrix};

/// `σ = √(1+β²/2) + β/√2`.
pub fn sigma_from_beta(beta: f64) -> f64 {
    (1.0 + 0.5 * beta * beta).sqrt() + beta * std::f64::consts::FRAC_1_SQRT_2
}

fn check_mass(m: f64) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Domain(format!("mass must be positive, got {m}")));
    }
    Ok(())
}

pub(super) fn ho_block_matrix(t: f64, m: f64, omega: f64) -> Matrix2<f64> {
    if omega == 0.0 {
        return Matrix2::new(1.0, t / m, 0.0, 1.0);
    }
    let (s, c) = (omega * t).sin_cos();
    Matrix2::new(c, s / (m * omega), -m * omega * s, c)
}

pub fn harmonic_oscillator_matrix(t: f64, m: f64, omega: &[f64]) -> Result<SymplecticMatrix> {
    check_mass(m)?;
    if omega.is_empty() {
        return Err(Error::Domain("at least one frequency is required".into()));
    }
    let blocks: Vec<Matrix2<f64>> = omega.iter().map(|&w| ho_block_matrix(t, m, w)).collect();
    Ok(SymplecticMatrix::from_trusted(assemble_matrix(&blocks)))
}

/// Generic quadratic-flow block from the entries `X, Y, Z` of `S Sᵀ`.
pub(super) fn generic_block(
    s: &Matrix2<f64>,
    mw: f64,
    sin: f64,
    label: &str,
) -> (Block2, ScenarioEntry) {
    let sst = s * s.transpose();
    let (x, y, z) = (sst[(0, 0)], sst[(0, 1)], sst[(1, 1)]);
    let beta = ((1.0 / mw - mw) * sin).abs() * std::f64::consts::FRAC_1_SQRT_2;
    let root = beta * (2.0 + beta * beta).sqrt();
    let lp = 1.0 + beta * beta + root;
    let lm = 1.0 / lp;
    let (u, _, np, nm) = sym2_rows(x, y, z);
    let sigma = sigma_from_beta(beta);
    let entry = ScenarioEntry::new(label)
        .with("beta", beta)
        .with("lambda_plus", lp)
        .with("lambda_minus", lm)
        .with("X", x)
        .with("Y", y)
        .with("Z", z)
        .with("n_plus", np)
        .with("n_minus", nm);
    (Block2::from_u(u, sigma, s), entry)
}

pub(super) fn ho_block(t: f64, m: f64, omega: f64) -> (Block2, ScenarioEntry) {
    let s = ho_block_matrix(t, m, omega);
    if omega == 0.0 {
        // Shear [[1, t/m], [0, 1]]: free particle at time t/(2m).
        let tau = t / (2.0 * m);
        let sigma = free_particle_sigma(tau);
        let sg = if tau < 0.0 { -1.0 } else { 1.0 };
        let n = sigma.hypot(1.0);
        let u = Matrix2::new(sigma / n, sg / n, -sg / n, sigma / n);
        return (
            Block2::from_u(u, sigma, &s),
            ScenarioEntry::new("free-shear")
                .with("tau", tau)
                .with("sigma", sigma),
        );
    }
    let mw = m * omega;
    if (mw.abs() - 1.0).abs() <= 1e-14 {
        return (
            Block2 {
                u: Matrix2::identity(),
                sigma: 1.0,
                v: s,
            },
            ScenarioEntry::new("orthogonal").with("m_omega", mw),
        );
    }
    match quarter_turn(omega * t) {
        Some(k) if k % 2 == 0 => {
            // S = ±I
            let sign = if k == 0 { 1.0 } else { -1.0 };
            let u = Matrix2::identity() * sign;
            (
                Block2::from_u(u, 1.0, &s),
                ScenarioEntry::new("multiple-of-pi").with("sign", sign),
            )
        }
        Some(_) => {
            if mw.abs() > 1.0 {
                (
                    Block2::from_u(J1, mw.abs(), &s),
                    ScenarioEntry::new("quarter-period-large").with("m_omega", mw),
                )
            } else {
                (
                    Block2::from_u(Matrix2::identity(), 1.0 / mw.abs(), &s),
                    ScenarioEntry::new("quarter-period-small").with("m_omega", mw),
                )
            }
        }
        None => generic_block(&s, mw, (omega * t).sin(), "generic"),
    }
}

pub fn harmonic_oscillator_euler(
    t: f64,
    m: f64,
    omega: &[f64],
) -> Result<(EulerDecomposition, ScenarioReport)> {
    check_mass(m)?;
    if omega.is_empty() {
        return Err(Error::Domain("at least one frequency is required".into()));
    }
    let (blocks, entries): (Vec<Block2>, Vec<ScenarioEntry>) = omega
        .iter()
        .enumerate()
        .map(|(j, &w)| {
            let (b, e) = ho_block(t, m, w);
            (b, e.at(j))
        })
        .unzip();
    let order = sorting_order(&blocks);
    Ok((
        permutation_assemble(&blocks, &order)?,
        ScenarioReport { entries },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    fn check(t: f64, m: f64, omega: &[f64]) -> EulerDecomposition {
        let (dec, _) = harmonic_oscillator_euler(t, m, omega).unwrap();
        let s = harmonic_oscillator_matrix(t, m, omega).unwrap();
        let r = dec.residuals(s.matrix());
        assert!(
            r.reconstruction < 1e-12 && r.max_factor() < 1e-12,
            "t={t} m={m} w={omega:?} {r:?}"
        );
        dec
    }

    #[test]
    fn matrix_special_values() {
        assert_eq!(
            harmonic_oscillator_matrix(0.0, 2.0, &[1.0, 3.0])
                .unwrap()
                .into_matrix(),
            DMatrix::identity(4, 4)
        );
        let s = harmonic_oscillator_matrix(PI, 1.0, &[1.0])
            .unwrap()
            .into_matrix();
        assert!((s + DMatrix::identity(2, 2)).norm() < 1e-15);
        let s = harmonic_oscillator_matrix(0.4, 1.0, &[1.0])
            .unwrap()
            .into_matrix();
        let (sn, cs) = 0.4f64.sin_cos();
        assert!((s - DMatrix::from_row_slice(2, 2, &[cs, sn, -sn, cs])).norm() < 1e-16);
        let s = harmonic_oscillator_matrix(3.0, 2.0, &[0.0])
            .unwrap()
            .into_matrix();
        assert_eq!(s, DMatrix::from_row_slice(2, 2, &[1.0, 1.5, 0.0, 1.0]));
    }

    #[test]
    fn orthogonal_case() {
        let (dec, rep) = harmonic_oscillator_euler(0.8, 0.5, &[2.0]).unwrap();
        assert_eq!(rep.labels(), vec!["orthogonal"]);
        assert_eq!(dec.sigma, vec![1.0]);
        assert_eq!(dec.u, DMatrix::identity(2, 2));
        let s = harmonic_oscillator_matrix(0.8, 0.5, &[2.0])
            .unwrap()
            .into_matrix();
        assert_eq!(dec.v, s);
    }

    #[test]
    fn quarter_period_with_m_omega_two() {
        let dec = check(PI / 2.0, 2.0, &[1.0]);
        assert!((dec.sigma[0] - 2.0).abs() < 1e-15);
        assert_eq!(dec.u, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        let (_, rep) = harmonic_oscillator_euler(PI / 2.0, 2.0, &[1.0]).unwrap();
        assert_eq!(rep.labels(), vec!["quarter-period-large"]);
        // Same family at three quarters of a period: sin = −1.
        check(3.0 * PI / 2.0, 2.0, &[1.0]);
        check(PI / 2.0, 0.25, &[1.0]);
        check(3.0 * PI / 2.0, 0.25, &[1.0]);
    }

    #[test]
    fn multiples_of_pi() {
        for k in 0..4 {
            let t = k as f64 * PI / 1.3;
            let (dec, rep) = harmonic_oscillator_euler(t, 0.7, &[1.3]).unwrap();
            assert_eq!(rep.labels(), vec!["multiple-of-pi"]);
            assert_eq!(dec.sigma, vec![1.0]);
        }
    }

    #[test]
    fn generic_matches_stated_u() {
        let (t, m, w) = (0.37, 1.7, 0.9);
        let (dec, rep) = harmonic_oscillator_euler(t, m, &[w]).unwrap();
        let e = &rep.entries[0];
        let (x, y, lp, lm) = (
            e.get("X").unwrap(),
            e.get("Y").unwrap(),
            e.get("lambda_plus").unwrap(),
            e.get("lambda_minus").unwrap(),
        );
        assert!((lp * lm - 1.0).abs() < 1e-12);
        let np = (y * y + (lp - x).powi(2)).sqrt();
        let nm = (y * y + (lm - x).powi(2)).sqrt();
        let stated = DMatrix::from_row_slice(
            2,
            2,
            &[
                y / np,
                (lp - x) / np,
                -y.abs() / nm,
                -y.signum() * (lm - x) / nm,
            ],
        );
        assert!((&dec.u - stated).norm() < 1e-12);
        check(t, m, &[w]);
    }

    #[test]
    fn zero_frequency_is_a_shear() {
        let dec = check(2.0, 0.5, &[0.0]);
        assert!((dec.sigma[0] - free_particle_sigma(2.0)).abs() < 1e-14);
    }

    #[test]
    fn multi_coordinate_sorting() {
        let dec = check(0.9, 1.1, &[0.4, 2.5, 0.0]);
        assert!(dec.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn near_special_angles_stay_accurate() {
        for &eps in &[2e-9, 1e-7, 1e-5] {
            for &m in &[0.05, 20.0] {
                check(PI / 2.0 + eps, m, &[1.0]);
                check(PI + eps, m, &[1.0]);
            }
        }
    }
}
