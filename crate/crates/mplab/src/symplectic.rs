//! Symplectic matrices and their Euler decomposition `S = Uᵀ D V`.
//!
//! `U` and `V` are orthogonal and symplectic, `D = Σ ⊕ Σ⁻¹` with
//! `σ₁ ≥ … ≥ σ_d ≥ 1`. The factor `U` is built from eigenvectors of `S Sᵀ`
//! for the large eigenvalues; the lower rows come from the pairing
//! `v ↦ Jᵀv`, which maps the `λ`-eigenspace onto the `λ⁻¹`-eigenspace.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Eigenvalues of `S Sᵀ` closer than this (relative) are treated as one cluster.
const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    dim: usize,
    entries: DMatrix<f64>,
}

impl SymplecticMatrix {
    /// Validates `‖SᵀJS − J‖_F ≤ tol·‖S‖_F²`.
    pub fn new(entries: DMatrix<f64>, tol: f64) -> Result<Self> {
        let d = half_side(&entries)?;
        let res = symplectic_residual(&entries);
        let scale = entries.norm_squared().max(1.0);
        if !(res <= tol * scale) {
            return Err(Error::NotSymplectic {
                residual: res,
                tol: tol * scale,
            });
        }
        Ok(Self { dim: d, entries })
    }

    /// Skips validation; for matrices symplectic by construction.
    pub fn from_trusted(entries: DMatrix<f64>) -> Self {
        let dim = entries.nrows() / 2;
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn block_a(&self) -> DMatrix<f64> {
        self.entries.view((0, 0), (self.dim, self.dim)).into_owned()
    }

    pub fn block_b(&self) -> DMatrix<f64> {
        self.entries
            .view((0, self.dim), (self.dim, self.dim))
            .into_owned()
    }

    pub fn block_c(&self) -> DMatrix<f64> {
        self.entries
            .view((self.dim, 0), (self.dim, self.dim))
            .into_owned()
    }

    pub fn block_d(&self) -> DMatrix<f64> {
        self.entries
            .view((self.dim, self.dim), (self.dim, self.dim))
            .into_owned()
    }

    pub fn compose(&self, other: &SymplecticMatrix) -> SymplecticMatrix {
        SymplecticMatrix::from_trusted(&self.entries * &other.entries)
    }

    /// `S⁻¹ = −J Sᵀ J`.
    pub fn inverse(&self) -> SymplecticMatrix {
        let j = standard_j(self.dim).into_matrix();
        SymplecticMatrix::from_trusted(-(&j * self.entries.transpose() * &j))
    }

    pub fn residual(&self) -> f64 {
        symplectic_residual(&self.entries)
    }
}

fn half_side(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 || m.nrows() % 2 != 0 {
        return Err(Error::Dimension(format!(
            "side {} is not a positive even number",
            m.nrows()
        )));
    }
    Ok(m.nrows() / 2)
}

pub fn standard_j(d: usize) -> SymplecticMatrix {
    let mut j = DMatrix::zeros(2 * d, 2 * d);
    for k in 0..d {
        j[(k, d + k)] = 1.0;
        j[(d + k, k)] = -1.0;
    }
    SymplecticMatrix { dim: d, entries: j }
}

fn symplectic_residual(m: &DMatrix<f64>) -> f64 {
    let d = m.nrows() / 2;
    let j = standard_j(d).entries;
    (m.transpose() * &j * m - j).norm()
}

/// Returns whether `‖MᵀJM − J‖_F ≤ tol` together with the residual.
pub fn symplectic_check(m: &DMatrix<f64>, tol: f64) -> Result<(bool, f64)> {
    half_side(m)?;
    let res = symplectic_residual(m);
    Ok((res <= tol, res))
}

pub fn orthogonality_residual(m: &DMatrix<f64>) -> f64 {
    (m * m.transpose() - DMatrix::identity(m.nrows(), m.ncols())).norm()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagonals {
    pub d: DMatrix<f64>,
    pub d_prime: DMatrix<f64>,
    pub d_second: DMatrix<f64>,
}

/// `D = Σ⊕Σ⁻¹`, `D′ = Σ⁻¹⊕I`, `D″ = I⊕Σ⁻¹`.
pub fn derived_diagonals(sigma: &[f64]) -> Result<Diagonals> {
    if let Some(bad) = sigma.iter().find(|&&s| !(s >= 1.0) || !s.is_finite()) {
        return Err(Error::Domain(format!(
            "singular value {bad} is not a finite number >= 1"
        )));
    }
    if sigma.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Domain(
            "singular values must be sorted descending".into(),
        ));
    }
    let d = sigma.len();
    let mut dd = DVector::zeros(2 * d);
    let mut dp = DVector::zeros(2 * d);
    let mut ds = DVector::zeros(2 * d);
    for (k, &s) in sigma.iter().enumerate() {
        dd[k] = s;
        dd[d + k] = 1.0 / s;
        dp[k] = 1.0 / s;
        dp[d + k] = 1.0;
        ds[k] = 1.0;
        ds[d + k] = 1.0 / s;
    }
    Ok(Diagonals {
        d: DMatrix::from_diagonal(&dd),
        d_prime: DMatrix::from_diagonal(&dp),
        d_second: DMatrix::from_diagonal(&ds),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerDecomposition {
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub sigma: Vec<f64>,
}

impl EulerDecomposition {
    /// Assembles a decomposition from factors, checking only the ordering of `sigma`.
    pub fn new(u: DMatrix<f64>, v: DMatrix<f64>, sigma: Vec<f64>) -> Result<Self> {
        derived_diagonals(&sigma)?;
        if u.nrows() != 2 * sigma.len() || v.nrows() != 2 * sigma.len() {
            return Err(Error::Dimension(
                "factor size does not match the number of singular values".into(),
            ));
        }
        Ok(Self { u, v, sigma })
    }

    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn diagonals(&self) -> Diagonals {
        derived_diagonals(&self.sigma).expect("sigma validated at construction")
    }

    pub fn d(&self) -> DMatrix<f64> {
        self.diagonals().d
    }

    pub fn sigma_min(&self) -> f64 {
        1.0 / self.sigma[0]
    }

    pub fn det_sigma(&self) -> f64 {
        self.sigma.iter().product()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.u.transpose() * self.d() * &self.v
    }

    pub fn residuals(&self, s: &DMatrix<f64>) -> FactorResiduals {
        FactorResiduals {
            reconstruction: (s - self.reconstruct()).norm() / s.norm(),
            u_orthogonal: orthogonality_residual(&self.u),
            u_symplectic: symplectic_residual(&self.u),
            v_orthogonal: orthogonality_residual(&self.v),
            v_symplectic: symplectic_residual(&self.v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorResiduals {
    pub reconstruction: f64,
    pub u_orthogonal: f64,
    pub u_symplectic: f64,
    pub v_orthogonal: f64,
    pub v_symplectic: f64,
}

impl FactorResiduals {
    pub fn max_factor(&self) -> f64 {
        self.u_orthogonal
            .max(self.u_symplectic)
            .max(self.v_orthogonal)
            .max(self.v_symplectic)
    }
}

/// `D′U`.
pub fn spreading_matrix(dec: &EulerDecomposition) -> DMatrix<f64> {
    dec.diagonals().d_prime * &dec.u
}

/// Euler decomposition of a symplectic matrix.
pub fn euler_decompose(s: &SymplecticMatrix, tol: f64) -> Result<EulerDecomposition> {
    let m = s.matrix();
    let d = s.dim();
    let res = symplectic_residual(m);
    let scale = m.norm_squared().max(1.0);
    if !(res <= tol * scale) {
        return Err(Error::NotSymplectic {
            residual: res,
            tol: tol * scale,
        });
    }

    let sst = m * m.transpose();
    let sst = (&sst + sst.transpose()) * 0.5;
    if (&sst - DMatrix::identity(2 * d, 2 * d)).norm() <= tol * scale {
        // Orthogonal S: Σ = I, U = Sᵀ, V = I.
        let dec = EulerDecomposition {
            u: m.transpose(),
            v: DMatrix::identity(2 * d, 2 * d),
            sigma: vec![1.0; d],
        };
        return Ok(dec);
    }
    let eig = SymmetricEigen::new(sst.clone());

    let mut order: Vec<usize> = (0..2 * d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let j = standard_j(d).into_matrix();

    // Greedy symplectic Gram-Schmidt: within a cluster of nearly equal
    // eigenvalues take the candidate with the largest component outside
    // span{u_k, J u_k} of the rows already chosen.
    let mut chosen: Vec<DVector<f64>> = Vec::with_capacity(d);
    let mut used = vec![false; 2 * d];
    while chosen.len() < d {
        let lead = match order.iter().find(|&&k| !used[k]) {
            Some(&k) => k,
            None => break,
        };
        let lead_val = eig.eigenvalues[lead];
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for &k in order.iter().filter(|&&k| !used[k]) {
            let val = eig.eigenvalues[k];
            if (lead_val - val).abs() > CLUSTER_TOL * lead_val.abs().max(1.0) {
                break;
            }
            let mut w = eig.eigenvectors.column(k).into_owned();
            project_out(&mut w, &chosen, &j);
            project_out(&mut w, &chosen, &j);
            let n = w.norm();
            if best.as_ref().map_or(true, |b| n > b.2 + 1e-12) {
                best = Some((k, w, n));
            }
        }
        let (k, w, n) = best.expect("cluster is never empty");
        used[k] = true;
        if n < 0.5 {
            // Lies in the J-image of vectors already taken.
            continue;
        }
        let mut w = w / n;
        let rq = w.dot(&(&sst * &w));
        if rq < 1.0 {
            w = &j * &w;
        }
        chosen.push(w);
    }
    if chosen.len() < d {
        return Err(Error::Decomposition(format!(
            "only {} of {} symplectic eigenvectors of S Sᵀ could be isolated",
            chosen.len(),
            d
        )));
    }

    let mut rq: Vec<(usize, f64)> = chosen
        .iter()
        .enumerate()
        .map(|(k, w)| (k, w.dot(&(&sst * w)).max(1.0)))
        .collect();
    rq.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite Rayleigh quotients"));

    let mut u = DMatrix::zeros(2 * d, 2 * d);
    let mut sigma = Vec::with_capacity(d);
    for (row, &(k, lambda)) in rq.iter().enumerate() {
        let top = &chosen[k];
        let bottom = j.transpose() * top;
        u.set_row(row, &top.transpose());
        u.set_row(d + row, &bottom.transpose());
        sigma.push(lambda.sqrt());
    }

    let diag = derived_diagonals(&sigma)?;
    let d_inv = DMatrix::from_diagonal(&diag.d.diagonal().map(|x| 1.0 / x));
    let v = d_inv * &u * m;
    let dec = EulerDecomposition { u, v, sigma };

    let r = dec.residuals(m);
    let factor_tol = tol.max(1e-10) * 10.0;
    if r.u_orthogonal > factor_tol || r.u_symplectic > factor_tol {
        return Err(Error::Decomposition(format!(
            "U not orthogonal-symplectic: orthogonality {:.3e}, symplecticity {:.3e}",
            r.u_orthogonal, r.u_symplectic
        )));
    }
    if r.reconstruction > tol.max(1e-12) * 10.0 {
        return Err(Error::Decomposition(format!(
            "reconstruction residual {:.3e}",
            r.reconstruction
        )));
    }
    Ok(dec)
}

fn project_out(w: &mut DVector<f64>, basis: &[DVector<f64>], j: &DMatrix<f64>) {
    for b in basis {
        let c = b.dot(w);
        w.axpy(-c, b, 1.0);
        let jb = j * b;
        let c = jb.dot(w);
        w.axpy(-c, &jb, 1.0);
    }
}

/// Block-diagonal embedding `A ⊕ A` of a d×d matrix.
pub fn diag_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (p, q) = (a.nrows(), b.nrows());
    let mut m = DMatrix::zeros(p + q, p + q);
    m.view_mut((0, 0), (p, p)).copy_from(a);
    m.view_mut((p, p), (q, q)).copy_from(b);
    m
}

/// Builds a 2d×2d matrix from four d×d blocks.
pub fn from_blocks(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    dd: &DMatrix<f64>,
) -> DMatrix<f64> {
    let d = a.nrows();
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    m.view_mut((0, 0), (d, d)).copy_from(a);
    m.view_mut((0, d), (d, d)).copy_from(b);
    m.view_mut((d, 0), (d, d)).copy_from(c);
    m.view_mut((d, d), (d, d)).copy_from(dd);
    m
}
