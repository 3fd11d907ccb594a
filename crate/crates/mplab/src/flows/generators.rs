use nalgebra::{DMatrix, Matrix2, SymmetricEigen};

use super::blocks::{permutation_assemble, sorting_order, sym2_rows, Block2, J1};
use super::{ScenarioEntry, ScenarioReport};
use crate::error::{Error, Result};
use crate::symplectic::{diag_sum, from_blocks, standard_j, EulerDecomposition, SymplecticMatrix};

#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    J(usize),
    /// `𝒟_E = E⁻¹ ⊕ Eᵀ`.
    Dilation(DMatrix<f64>),
    /// `V_Q = [[I, O], [Q, I]]`.
    Chirp(DMatrix<f64>),
    /// `Π_𝒥` for a 0-based index set.
    PartialFourier {
        d: usize,
        set: Vec<usize>,
    },
    /// `Π_R = 𝒟_R Π_𝒥 𝒟_{Rᵀ}` with `𝒥 = {0, …, rank−1}`.
    PartialFourierRotated {
        r: DMatrix<f64>,
        rank: usize,
    },
}

fn indicator(d: usize, set: &[usize]) -> Result<DMatrix<f64>> {
    let mut ij = DMatrix::zeros(d, d);
    for &k in set {
        if k >= d {
            return Err(Error::Domain(format!("index {} outside 1..={d}", k + 1)));
        }
        if ij[(k, k)] != 0.0 {
            return Err(Error::Domain(format!("index {} repeated", k + 1)));
        }
        ij[(k, k)] = 1.0;
    }
    Ok(ij)
}

fn partial_fourier(d: usize, set: &[usize]) -> Result<DMatrix<f64>> {
    let ij = indicator(d, set)?;
    let rest = DMatrix::identity(d, d) - &ij;
    Ok(from_blocks(&rest, &ij, &(-&ij), &rest))
}

fn check_orthogonal(r: &DMatrix<f64>) -> Result<()> {
    let n = r.nrows();
    if r.ncols() != n || (r.transpose() * r - DMatrix::identity(n, n)).norm() > 1e-12 {
        return Err(Error::Domain("R must be orthogonal".into()));
    }
    Ok(())
}

fn check_symmetric(q: &DMatrix<f64>) -> Result<()> {
    if q.nrows() != q.ncols() || q.nrows() == 0 {
        return Err(Error::Domain("Q must be square".into()));
    }
    let asym = (q - q.transpose()).norm();
    if asym > 1e-12 * q.norm().max(1.0) {
        return Err(Error::Domain(format!(
            "Q must be symmetric (asymmetry {asym:.3e})"
        )));
    }
    Ok(())
}

fn check_invertible(e: &DMatrix<f64>) -> Result<()> {
    if e.nrows() != e.ncols() || e.nrows() == 0 {
        return Err(Error::Domain("E must be square".into()));
    }
    let sv = e.clone().svd(false, false).singular_values;
    let (lo, hi) = (sv.min(), sv.max());
    if !(lo > 1e-14 * hi) {
        return Err(Error::Domain(format!(
            "E is singular (smallest singular value {lo:.3e})"
        )));
    }
    Ok(())
}

fn rot2(r: &DMatrix<f64>) -> DMatrix<f64> {
    diag_sum(r, r)
}

pub fn generator_matrix(g: &Generator) -> Result<SymplecticMatrix> {
    let m = match g {
        Generator::J(d) => {
            if *d == 0 {
                return Err(Error::Domain("d must be positive".into()));
            }
            standard_j(*d).into_matrix()
        }
        Generator::Dilation(e) => {
            check_invertible(e)?;
            let inv = e.clone().try_inverse().expect("checked invertible");
            diag_sum(&inv, &e.transpose())
        }
        Generator::Chirp(q) => {
            check_symmetric(q)?;
            let d = q.nrows();
            let id = DMatrix::identity(d, d);
            from_blocks(&id, &DMatrix::zeros(d, d), q, &id)
        }
        Generator::PartialFourier { d, set } => partial_fourier(*d, set)?,
        Generator::PartialFourierRotated { r, rank } => {
            check_orthogonal(r)?;
            let d = r.nrows();
            if *rank > d {
                return Err(Error::Domain(format!("rank {rank} exceeds dimension {d}")));
            }
            let pi = partial_fourier(d, &(0..*rank).collect::<Vec<_>>())?;
            let rt = r.transpose();
            rot2(&rt) * pi * rot2(r)
        }
    };
    Ok(SymplecticMatrix::from_trusted(m))
}

fn vmu_block(mu: f64) -> (Block2, ScenarioEntry) {
    let s = Matrix2::new(1.0, 0.0, mu, 1.0);
    let sigma = (1.0 + 0.25 * mu * mu).sqrt() + 0.5 * mu.abs();
    let lp = 1.0 + 0.5 * mu * mu + (0.25 * mu.powi(4) + mu * mu).sqrt();
    let mut entry = ScenarioEntry::new(if mu == 0.0 { "chirp-trivial" } else { "chirp" })
        .with("mu", mu)
        .with("sigma_plus", sigma)
        .with("sigma_minus", 1.0 / sigma)
        .with("lambda_plus", lp)
        .with("lambda_minus", 1.0 / lp);
    if mu == 0.0 {
        return (Block2::identity(), entry);
    }
    let (u, _, np, nm) = sym2_rows(1.0, mu, 1.0 + mu * mu);
    entry = entry.with("rho_plus", np).with("rho_minus", nm);
    (Block2::from_u(u, sigma, &s), entry)
}

pub fn generator_euler(g: &Generator) -> Result<(EulerDecomposition, ScenarioReport)> {
    let s = generator_matrix(g)?;
    let d = s.dim();
    let id = DMatrix::identity(2 * d, 2 * d);
    let one = vec![1.0; d];
    Ok(match g {
        Generator::J(_) => (
            EulerDecomposition::new(s.matrix().transpose(), id, one)?,
            ScenarioReport::single(ScenarioEntry::new("J")),
        ),
        Generator::PartialFourier { .. } => (
            EulerDecomposition::new(s.matrix().transpose(), id, one)?,
            ScenarioReport::single(ScenarioEntry::new("partial-fourier")),
        ),
        Generator::PartialFourierRotated { r, rank } => {
            let pi = partial_fourier(d, &(0..*rank).collect::<Vec<_>>())?;
            let v = rot2(r);
            (
                EulerDecomposition::new(pi.transpose() * &v, v, one)?,
                ScenarioReport::single(ScenarioEntry::new("partial-fourier-rotated")),
            )
        }
        Generator::Dilation(e) => {
            // E = W Σ Xᵀ, so 𝒟_E = (X⊕X)(Σ⁻¹⊕Σ)(Wᵀ⊕Wᵀ).
            let svd = e.clone().svd(true, true);
            let w = svd.u.expect("requested");
            let xt = svd.v_t.expect("requested");
            let mut entries = Vec::with_capacity(d);
            let blocks: Vec<Block2> = svd
                .singular_values
                .iter()
                .enumerate()
                .map(|(j, &ej)| {
                    entries.push(
                        ScenarioEntry::new("dilation")
                            .with("singular_value", ej)
                            .at(j),
                    );
                    if ej <= 1.0 {
                        Block2 {
                            u: Matrix2::identity(),
                            sigma: 1.0 / ej,
                            v: Matrix2::identity(),
                        }
                    } else {
                        Block2 {
                            u: J1,
                            sigma: ej,
                            v: J1,
                        }
                    }
                })
                .collect();
            let mid = permutation_assemble(&blocks, &sorting_order(&blocks))?;
            let u = mid.u * rot2(&xt);
            let v = mid.v * rot2(&w.transpose());
            (
                EulerDecomposition::new(u, v, mid.sigma)?,
                ScenarioReport { entries },
            )
        }
        Generator::Chirp(q) => {
            // Q = Θᵀ Δ Θ with Θ = Wᵀ.
            let sym = (q + q.transpose()) * 0.5;
            let eig = SymmetricEigen::new(sym);
            let theta = eig.eigenvectors.transpose();
            let (blocks, entries): (Vec<Block2>, Vec<ScenarioEntry>) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .map(|(j, &mu)| {
                    let (b, e) = vmu_block(mu);
                    (b, e.at(j))
                })
                .unzip();
            let mid = permutation_assemble(&blocks, &sorting_order(&blocks))?;
            let t2 = rot2(&theta);
            let u = mid.u * &t2;
            let v = mid.v * &t2;
            (
                EulerDecomposition::new(u, v, mid.sigma)?,
                ScenarioReport { entries },
            )
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn valid(g: &Generator, tol: f64) {
        let s = generator_matrix(g).unwrap();
        let (dec, _) = generator_euler(g).unwrap();
        let r = dec.residuals(s.matrix());
        assert!(
            r.reconstruction < tol && r.max_factor() < tol,
            "{g:?} {r:?}"
        );
    }

    #[test]
    fn partial_fourier_extremes() {
        assert_eq!(
            generator_matrix(&Generator::PartialFourier {
                d: 3,
                set: vec![0, 1, 2]
            })
            .unwrap(),
            standard_j(3)
        );
        assert_eq!(
            generator_matrix(&Generator::PartialFourier { d: 2, set: vec![] })
                .unwrap()
                .into_matrix(),
            DMatrix::identity(4, 4)
        );
        assert!(generator_matrix(&Generator::PartialFourier { d: 2, set: vec![2] }).is_err());
        assert!(generator_matrix(&Generator::PartialFourier {
            d: 2,
            set: vec![1, 1]
        })
        .is_err());
    }

    #[test]
    fn dilation_example() {
        let e = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        let m = generator_matrix(&Generator::Dilation(e.clone()))
            .unwrap()
            .into_matrix();
        assert_eq!(
            m,
            DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 1.0, 2.0, 1.0]))
        );
        let (dec, _) = generator_euler(&Generator::Dilation(e)).unwrap();
        assert_eq!(dec.sigma, vec![2.0, 1.0]);
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(generator_matrix(&Generator::Dilation(singular)).is_err());
    }

    #[test]
    fn chirp_scalar_example() {
        let q = DMatrix::from_element(1, 1, 1.5);
        let (dec, rep) = generator_euler(&Generator::Chirp(q.clone())).unwrap();
        assert!((dec.sigma[0] - 2.0).abs() < 1e-15);
        let e = &rep.entries[0];
        assert!((e.get("sigma_minus").unwrap() - 0.5).abs() < 1e-15);
        assert!(
            (e.get("lambda_plus").unwrap() * e.get("lambda_minus").unwrap() - 1.0).abs() < 1e-12
        );
        valid(&Generator::Chirp(q), 1e-14);
        let (dec, _) = generator_euler(&Generator::Chirp(DMatrix::zeros(2, 2))).unwrap();
        assert_eq!(dec.sigma, vec![1.0, 1.0]);
        assert_eq!(dec.u, DMatrix::identity(4, 4));
        assert!(generator_matrix(&Generator::Chirp(DMatrix::from_row_slice(
            2,
            2,
            &[0.0, 1.0, 0.0, 0.0]
        )))
        .is_err());
    }

    #[test]
    fn chirp_eigenvector_norms() {
        // ρ± are the norms of (μ, λ± − 1).
        let mu = 1.5f64;
        let (_, rep) = generator_euler(&Generator::Chirp(DMatrix::from_element(1, 1, mu))).unwrap();
        let e = &rep.entries[0];
        let lp = e.get("lambda_plus").unwrap();
        let lm = e.get("lambda_minus").unwrap();
        assert!((e.get("rho_plus").unwrap() - mu.hypot(lp - 1.0)).abs() < 1e-14);
        assert!((e.get("rho_minus").unwrap() - mu.hypot(lm - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn all_kinds_decompose() {
        let th = 0.4f64;
        let r = DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        valid(&Generator::J(3), 1e-15);
        valid(&Generator::PartialFourier { d: 3, set: vec![1] }, 1e-15);
        valid(&Generator::PartialFourierRotated { r, rank: 1 }, 1e-14);
        valid(
            &Generator::Dilation(DMatrix::from_row_slice(2, 2, &[0.3, 1.2, -0.7, 2.0])),
            1e-13,
        );
        valid(
            &Generator::Chirp(DMatrix::from_row_slice(2, 2, &[0.5, -2.0, -2.0, 1.0])),
            1e-13,
        );
    }
}
