//! 2×2 Euler blocks and their assembly into a global decomposition.

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};
use crate::symplectic::EulerDecomposition;

/// One coordinate pair `(x_j, ξ_j)`: `S_j = uᵀ diag(σ, σ⁻¹) v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block2 {
    pub u: Matrix2<f64>,
    pub sigma: f64,
    pub v: Matrix2<f64>,
}

impl Block2 {
    pub fn identity() -> Self {
        Self {
            u: Matrix2::identity(),
            sigma: 1.0,
            v: Matrix2::identity(),
        }
    }

    /// Completes `(u, σ)` with `v = diag(σ, σ⁻¹)⁻¹ u s`.
    pub fn from_u(u: Matrix2<f64>, sigma: f64, s: &Matrix2<f64>) -> Self {
        let dinv = Matrix2::new(1.0 / sigma, 0.0, 0.0, sigma);
        Self {
            u,
            sigma,
            v: dinv * u * s,
        }
    }

    pub fn reconstruct(&self) -> Matrix2<f64> {
        self.u.transpose() * Matrix2::new(self.sigma, 0.0, 0.0, 1.0 / self.sigma) * self.v
    }
}

pub const J1: Matrix2<f64> = Matrix2::new(0.0, 1.0, -1.0, 0.0);

/// Rows of an orthogonal symplectic `U` diagonalizing the symmetric
/// positive matrix `[[x, y], [y, z]]` with determinant one, plus `λ₊`.
///
/// First row `(y, λ₊ − x)/n₊`, second row `−sgn(y)(y, λ₋ − x)/n₋`; the
/// differences `λ± − x` are formed without cancellation.
pub fn sym2_rows(x: f64, y: f64, z: f64) -> (Matrix2<f64>, f64, f64, f64) {
    let h = 0.5 * (x - z);
    let r = h.hypot(y);
    let lp = 0.5 * (x + z) + r;
    if y == 0.0 {
        return if x >= z {
            (Matrix2::identity(), lp, 1.0, 1.0)
        } else {
            (J1, lp, 1.0, 1.0)
        };
    }
    let (ap, am) = if h >= 0.0 {
        (y * y / (r + h), -(r + h))
    } else {
        (r - h, -(y * y) / (r - h))
    };
    let np = y.hypot(ap);
    let nm = y.hypot(am);
    let sg = y.signum();
    let u = Matrix2::new(y / np, ap / np, -y.abs() / nm, -sg * am / nm);
    (u, lp, np, nm)
}

/// Stable descending order of block singular values.
pub fn sorting_order(blocks: &[Block2]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..blocks.len()).collect();
    order.sort_by(|&a, &b| {
        blocks[b]
            .sigma
            .partial_cmp(&blocks[a].sigma)
            .expect("finite singular values")
    });
    order
}

/// Places block `order[k]` in slot `k`: entries of block `j` map to rows
/// `k, d+k` and columns `j, d+j`.
pub fn permutation_assemble(blocks: &[Block2], order: &[usize]) -> Result<EulerDecomposition> {
    let d = blocks.len();
    if order.len() != d {
        return Err(Error::Dimension(format!(
            "order has {} entries for {} blocks",
            order.len(),
            d
        )));
    }
    let mut seen = vec![false; d];
    for &j in order {
        if j >= d || seen[j] {
            return Err(Error::Domain("order is not a permutation".into()));
        }
        seen[j] = true;
    }
    let sigma: Vec<f64> = order.iter().map(|&j| blocks[j].sigma).collect();
    assert!(
        sigma.windows(2).all(|w| w[0] >= w[1]),
        "assembled singular values are not sorted"
    );
    let mut u = DMatrix::zeros(2 * d, 2 * d);
    let mut v = DMatrix::zeros(2 * d, 2 * d);
    for (k, &j) in order.iter().enumerate() {
        let b = &blocks[j];
        for (p, q) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            u[(k + p * d, j + q * d)] = b.u[(p, q)];
            v[(k + p * d, j + q * d)] = b.v[(p, q)];
        }
    }
    EulerDecomposition::new(u, v, sigma)
}

/// `⊕_j S_j` in the block layout `[[A, B], [C, D]]`.
pub fn assemble_matrix(blocks: &[Matrix2<f64>]) -> DMatrix<f64> {
    let d = blocks.len();
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    for (j, b) in blocks.iter().enumerate() {
        for (p, q) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            m[(j + p * d, j + q * d)] = b[(p, q)];
        }
    }
    m
}
