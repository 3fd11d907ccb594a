use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::fourier::{fourier_transform, inverse_fourier_transform, BandLimited};
use super::grid::{Grid, SampledField};
use crate::error::{Error, Result};
use crate::flows::FlowSpec;
use crate::symplectic::SymplecticMatrix;

/// Relative size of `σ_min(ℬ)` below which the upper-right block counts as singular.
const SINGULAR_B: f64 = 1e-8;
const UNSUPPORTED_B: f64 = 1e-12;

#[derive(Debug, Clone)]
enum Path {
    Identity,
    /// `[[I, B], [O, I]]`: Fourier multiplier `e^{−iπ ξ·Bξ}`.
    Shear(DMatrix<f64>),
    /// `[[A, O], [C, A⁻ᵀ]]`: `|det A|^{−1/2} e^{iπ x·Px} f(A⁻¹x)` with `P = CA⁻¹`.
    Lower {
        a_inv: DMatrix<f64>,
        det_a: f64,
        p: DMatrix<f64>,
    },
    /// `[[I, O], [CA⁻¹, I]] (A ⊕ A⁻ᵀ) [[I, A⁻¹B], [O, I]]`: the multiplier, then the substitution.
    Factored {
        k: DMatrix<f64>,
        a_inv: DMatrix<f64>,
        det_a: f64,
        p: DMatrix<f64>,
    },
    /// `V_{𝒟ℬ⁻¹} 𝒟_{ℬ⁻¹} J V_{ℬ⁻¹𝒜}`, after an optional partial Fourier transform on `pre`.
    General {
        pre: Vec<usize>,
        p1: DMatrix<f64>,
        e: DMatrix<f64>,
        p2: DMatrix<f64>,
    },
}

/// Discretised metaplectic operator for a fixed symplectic matrix and grid.
#[derive(Debug, Clone)]
pub struct MetaplecticPlan {
    grid: Grid,
    path: Path,
    /// Dense kernel `e^{−2πi (Ex_j)·x_k}` for one-axis grids, zero where `Ex_j` leaves the band.
    kernel: Option<Vec<Complex64>>,
}

fn blocks(s: &DMatrix<f64>) -> [DMatrix<f64>; 4] {
    let d = s.nrows() / 2;
    [
        s.view((0, 0), (d, d)).into_owned(),
        s.view((0, d), (d, d)).into_owned(),
        s.view((d, 0), (d, d)).into_owned(),
        s.view((d, d), (d, d)).into_owned(),
    ]
}

fn sigma_min(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.min()
}

fn partial_fourier_t(d: usize, set: &[usize]) -> DMatrix<f64> {
    // Π_𝒥ᵀ
    let mut p = DMatrix::identity(2 * d, 2 * d);
    for &k in set {
        p[(k, k)] = 0.0;
        p[(d + k, d + k)] = 0.0;
        p[(k, d + k)] = -1.0;
        p[(d + k, k)] = 1.0;
    }
    p
}

fn subsets(d: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << d).map(move |mask| (0..d).filter(|k| mask >> k & 1 == 1).collect())
}

fn chirp(x: &[f64], p: &DMatrix<f64>) -> Complex64 {
    let mut q = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            q += x[i] * p[(i, j)] * x[j];
        }
    }
    Complex64::from_polar(1.0, PI * q)
}

fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..x.len()).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// The route through `A⁻¹`, when its chirps are milder than those through `ℬ⁻¹`.
fn factored(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    dd: &DMatrix<f64>,
) -> Option<Path> {
    let a_inv = a.clone().try_inverse()?;
    let (k, p) = (&a_inv * b, c * &a_inv);
    let mild = k.norm().max(p.norm());
    let through_b = match b.clone().try_inverse() {
        Some(e) => (&e * a).norm().max((dd * &e).norm()),
        None => f64::INFINITY,
    };
    (mild < through_b).then(|| Path::Factored {
        k: sym(&k),
        det_a: a.determinant(),
        a_inv,
        p: sym(&p),
    })
}

fn near(a: &DMatrix<f64>, b: &DMatrix<f64>, scale: f64) -> bool {
    (a - b).norm() <= 1e-13 * scale
}

impl MetaplecticPlan {
    pub fn new(s: &SymplecticMatrix, grid: &Grid) -> Result<Self> {
        let d = s.dim();
        if d != grid.dim() {
            return Err(Error::Dimension(format!(
                "matrix acts on {d} coordinates but the grid has {}",
                grid.dim()
            )));
        }
        let m = s.matrix();
        let scale = m.norm().max(1.0);
        let id = DMatrix::identity(d, d);
        let [a, b, c, dd] = blocks(m);
        let zero = DMatrix::zeros(d, d);
        let path = if near(m, &DMatrix::identity(2 * d, 2 * d), scale) {
            Path::Identity
        } else if near(&a, &id, scale) && near(&dd, &id, scale) && near(&c, &zero, scale) {
            Path::Shear((&b + b.transpose()) * 0.5)
        } else if b.norm() <= 1e-13 * scale {
            let a_inv = a
                .clone()
                .try_inverse()
                .ok_or(Error::UnsupportedFactorization { sigma_min: 0.0 })?;
            let p = &c * &a_inv;
            Path::Lower {
                det_a: a.determinant(),
                a_inv,
                p: (&p + p.transpose()) * 0.5,
            }
        } else if let Some(f) = factored(&a, &b, &c, &dd) {
            f
        } else {
            let mut best = (sigma_min(&b), Vec::new(), m.clone());
            if best.0 < SINGULAR_B * scale {
                for set in subsets(d).skip(1) {
                    let sp = m * partial_fourier_t(d, &set);
                    let sv = sigma_min(&blocks(&sp)[1]);
                    if sv > best.0 {
                        best = (sv, set, sp);
                    }
                }
            }
            if best.0 < UNSUPPORTED_B * scale {
                return Err(Error::UnsupportedFactorization { sigma_min: best.0 });
            }
            let [a, b, _, dd] = blocks(&best.2);
            let e = b
                .try_inverse()
                .ok_or(Error::UnsupportedFactorization { sigma_min: best.0 })?;
            let p1 = &e * &a;
            let p2 = &dd * &e;
            Path::General {
                pre: best.1,
                p1: (&p1 + p1.transpose()) * 0.5,
                e,
                p2: (&p2 + p2.transpose()) * 0.5,
            }
        };
        let kernel = match (&path, grid.dim()) {
            (Path::General { e, .. }, 1) => Some(line_kernel(grid, e[(0, 0)])),
            _ => None,
        };
        Ok(Self {
            grid: grid.clone(),
            path,
            kernel,
        })
    }

    pub fn from_flow(spec: &FlowSpec, grid: &Grid) -> Result<Self> {
        Self::new(&spec.matrix()?, grid)
    }

    /// Name of the factorization route, for reports.
    pub fn route(&self) -> &'static str {
        match (&self.path, self.pre()) {
            (Path::Identity, _) => "identity",
            (Path::Shear(_), _) => "fourier-multiplier",
            (Path::Lower { .. }, _) => "substitution",
            (Path::Factored { .. }, _) => "multiplier-then-substitution",
            (Path::General { .. }, true) => "partial-fourier-then-general",
            (Path::General { .. }, false) => "general",
        }
    }

    fn pre(&self) -> bool {
        matches!(&self.path, Path::General { pre, .. } if !pre.is_empty())
    }

    pub fn apply(&self, f: &SampledField) -> Result<SampledField> {
        if f.grid() != &self.grid {
            return Err(Error::Dimension(
                "field grid differs from the plan grid".into(),
            ));
        }
        let grid = &self.grid;
        Ok(match &self.path {
            Path::Identity => f.clone(),
            Path::Shear(b) => shear(f, b),
            Path::Lower { a_inv, det_a, p } => substitute(f, a_inv, *det_a, p),
            Path::Factored { k, a_inv, det_a, p } => substitute(&shear(f, k), a_inv, *det_a, p),
            Path::General { pre, p1, e, p2 } => {
                let mut h = f.clone();
                for &axis in pre {
                    h = grid_fourier_axis(&h, axis);
                }
                let h = h.map(|x, v| v * chirp(x, p1));
                let norm = e.determinant().abs().sqrt() * grid.cell();
                let band = grid.dual();
                let values: Vec<Complex64> = match &self.kernel {
                    Some(kern) => {
                        let n = grid.n(0);
                        (0..n)
                            .into_par_iter()
                            .map(|j| {
                                let row = &kern[j * n..(j + 1) * n];
                                let s: Complex64 =
                                    row.iter().zip(h.values()).map(|(k, v)| k * v).sum();
                                s * norm * chirp(&[grid.coord(0, j)], p2)
                            })
                            .collect()
                    }
                    None => (0..grid.len())
                        .into_par_iter()
                        .map(|k| {
                            let x = grid.point(k);
                            let eta = mat_vec(e, &x);
                            if !band.contains(&eta) {
                                return Complex64::new(0.0, 0.0);
                            }
                            super::fourier::exp_sum(grid, h.values(), &eta, -1.0)
                                * norm
                                * chirp(&x, p2)
                        })
                        .collect(),
                };
                SampledField::from_parts(grid.clone(), values)
            }
        })
    }
}

fn shear(f: &SampledField, b: &DMatrix<f64>) -> SampledField {
    let fh = fourier_transform(f).map(|xi, v| v * chirp(xi, &(-b)));
    SampledField::from_parts(
        f.grid().clone(),
        inverse_fourier_transform(&fh).into_values(),
    )
}

fn substitute(
    f: &SampledField,
    a_inv: &DMatrix<f64>,
    det_a: f64,
    p: &DMatrix<f64>,
) -> SampledField {
    let grid = f.grid();
    let norm = det_a.abs().powf(-0.5);
    let bl = BandLimited::new(f);
    let values = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let x = grid.point(k);
            let y = mat_vec(a_inv, &x);
            chirp(&x, p) * bl.eval(&y) * norm
        })
        .collect();
    SampledField::from_parts(grid.clone(), values)
}

fn line_kernel(grid: &Grid, e: f64) -> Vec<Complex64> {
    let n = grid.n(0);
    let band = grid.dual();
    let x = grid.coords(0);
    let mut k = vec![Complex64::new(0.0, 0.0); n * n];
    k.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        let eta = e * x[j];
        if band.contains(&[eta]) {
            for (slot, &xk) in row.iter_mut().zip(&x) {
                *slot = Complex64::from_polar(1.0, -2.0 * PI * eta * xk);
            }
        }
    });
    k
}

/// One-axis Fourier transform whose output is sampled back on the spatial grid.
fn grid_fourier_axis(f: &SampledField, axis: usize) -> SampledField {
    let grid = f.grid();
    let x = grid.coords(axis);
    let band = grid.dual();
    let dx = grid.spacing(axis);
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (k, slot) in out.iter_mut().enumerate() {
        let idx = grid.unravel(k);
        let eta = x[idx[axis]];
        if eta < -0.5 * band.extent(axis) || eta >= 0.5 * band.extent(axis) {
            continue;
        }
        let mut src = idx.clone();
        let mut s = Complex64::new(0.0, 0.0);
        for (m, &xm) in x.iter().enumerate() {
            src[axis] = m;
            s += f.values()[grid.ravel(&src)] * Complex64::from_polar(1.0, -2.0 * PI * eta * xm);
        }
        *slot = s * dx;
    }
    SampledField::from_parts(grid.clone(), out)
}

/// Samples of `Ŝf` on the input grid, up to a unimodular constant.
pub fn apply_metaplectic(spec: &FlowSpec, f: &SampledField) -> Result<SampledField> {
    MetaplecticPlan::from_flow(spec, f.grid())?.apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{FlowKind, FlowSpec};
    use crate::tf::grid::GaussianChirp;

    /// Distance modulo a global phase.
    fn phase_distance(a: &SampledField, b: &SampledField) -> f64 {
        let ip = a.inner(b).unwrap();
        let ph = if ip.norm() > 0.0 {
            ip / ip.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y * ph).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn free_particle_time_zero_is_identity() {
        let g = Grid::line(12.0, 256).unwrap();
        let f = GaussianChirp::new(1.0, 0.2).unwrap().sample(&g);
        assert_eq!(
            apply_metaplectic(&FlowSpec::free_particle(0.0, 1), &f).unwrap(),
            f
        );
    }

    #[test]
    fn chirp_generator_produces_chirped_gaussian() {
        let g = Grid::line(12.0, 256).unwrap();
        let a = 1.3;
        let f = GaussianChirp::new(a, 0.0).unwrap().sample(&g);
        let spec = FlowSpec {
            q: Some(vec![vec![1.0]]),
            ..FlowSpec::new(FlowKind::GeneratorChirp)
        };
        let out = apply_metaplectic(&spec, &f).unwrap();
        assert!(out.max_abs_diff(&GaussianChirp::new(a, 1.0).unwrap().sample(&g)) < 1e-14);
    }

    #[test]
    fn quarter_period_oscillator_fixes_the_gaussian() {
        let g = Grid::line(12.0, 256).unwrap();
        let f = GaussianChirp::standard().sample(&g);
        let spec = FlowSpec::harmonic_oscillator(std::f64::consts::FRAC_PI_2, 1.0, vec![1.0]);
        let out = apply_metaplectic(&spec, &f).unwrap();
        assert!(phase_distance(&out, &f) < 1e-10);
    }

    #[test]
    fn general_route_matches_multiplier() {
        let g = Grid::line(16.0, 256).unwrap();
        let f = GaussianChirp::new(2.0, 0.3).unwrap().sample(&g);
        let spec = FlowSpec::free_particle(0.4, 1);
        let direct = apply_metaplectic(&spec, &f).unwrap();
        // Free particle = J · (J⁻¹ S): compose through a general-route matrix.
        let s = spec.matrix().unwrap();
        let jinv = crate::symplectic::standard_j(1).inverse();
        let t = jinv.compose(&s);
        let step = MetaplecticPlan::new(&t, &g).unwrap();
        assert_eq!(step.route(), "general");
        let j = MetaplecticPlan::new(&crate::symplectic::standard_j(1), &g).unwrap();
        let out = j.apply(&step.apply(&f).unwrap()).unwrap();
        assert!(phase_distance(&out, &direct) < 1e-9);
        assert!((out.norm() - f.norm()).abs() < 1e-9);
    }

    #[test]
    fn short_time_oscillator_takes_the_factored_route() {
        let g = Grid::line(16.0, 256).unwrap();
        let f = GaussianChirp::new(2.0, 0.3).unwrap().sample(&g);
        let s = FlowSpec::harmonic_oscillator(0.3, 1.0, vec![1.0])
            .matrix()
            .unwrap();
        let plan = MetaplecticPlan::new(&s, &g).unwrap();
        assert_eq!(plan.route(), "multiplier-then-substitution");
        let direct = plan.apply(&f).unwrap();
        let step =
            MetaplecticPlan::new(&crate::symplectic::standard_j(1).inverse().compose(&s), &g)
                .unwrap();
        assert_eq!(step.route(), "general");
        let j = MetaplecticPlan::new(&crate::symplectic::standard_j(1), &g).unwrap();
        let out = j.apply(&step.apply(&f).unwrap()).unwrap();
        assert!(phase_distance(&out, &direct) < 1e-9);
    }

    #[test]
    fn singular_block_uses_partial_fourier() {
        let g = Grid::square(8.0, 64).unwrap();
        let spec = FlowSpec {
            d: Some(2),
            j_set: Some(vec![1]),
            ..FlowSpec::new(FlowKind::PartialFourier)
        };
        let plan = MetaplecticPlan::from_flow(&spec, &g).unwrap();
        assert_eq!(plan.route(), "partial-fourier-then-general");
        let f = SampledField::from_fn(g, |x| {
            GaussianChirp::new(2.0, 0.0)
                .unwrap()
                .eval(&[x[0] - 0.5, x[1]])
        });
        let out = plan.apply(&f).unwrap();
        assert!((out.norm() - f.norm()).abs() < 1e-9);
    }
}
