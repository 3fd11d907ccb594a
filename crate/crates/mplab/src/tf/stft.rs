use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::fourier::{centered_axis, exp_sum, fourier_transform, spectral_shift, Sign};
use super::grid::{Grid, SampledField};
use crate::error::{Error, Result};

/// Phase-space samples on `(x_j, ξ_l)`, row-major in `j`; one-axis grids only.
#[derive(Debug, Clone, PartialEq)]
pub struct TfArray {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl TfArray {
    pub fn n(&self) -> usize {
        self.grid.n(0)
    }

    pub fn x(&self, j: usize) -> f64 {
        self.grid.coord(0, j)
    }

    pub fn xi(&self, l: usize) -> f64 {
        self.grid.dual().coord(0, l)
    }

    pub fn at(&self, j: usize, l: usize) -> Complex64 {
        self.values[j * self.n() + l]
    }
}

fn require_line(grid: &Grid, what: &str) -> Result<()> {
    if grid.dim() != 1 {
        return Err(Error::Dimension(format!(
            "{what} is implemented for one-axis grids"
        )));
    }
    Ok(())
}

fn circular_shift(f: &SampledField, offsets: &[i64]) -> SampledField {
    let g = f.grid();
    let mut out = f.values().to_vec();
    for (k, slot) in out.iter_mut().enumerate() {
        let src: Vec<usize> = g
            .unravel(k)
            .iter()
            .enumerate()
            .map(|(a, &i)| (i as i64 - offsets[a]).rem_euclid(g.n(a) as i64) as usize)
            .collect();
        *slot = f.values()[g.ravel(&src)];
    }
    SampledField::from_parts(g.clone(), out)
}

/// `f(· − x₀)`: periodic index shift for on-grid `x₀`, band-limited interpolation otherwise.
pub fn translate(f: &SampledField, x0: &[f64]) -> SampledField {
    let g = f.grid();
    let offsets: Option<Vec<i64>> = (0..g.dim()).map(|a| g.offset_of(a, x0[a])).collect();
    match offsets {
        Some(o) if o.iter().all(|&k| k == 0) => f.clone(),
        Some(o) => circular_shift(f, &o),
        None => spectral_shift(f, x0),
    }
}

fn check_point(grid: &Grid, z: &[f64]) -> Result<()> {
    if z.len() != 2 * grid.dim() {
        return Err(Error::Dimension(format!(
            "phase-space point has {} coordinates, expected {}",
            z.len(),
            2 * grid.dim()
        )));
    }
    Ok(())
}

/// `π(z)f(y) = e^{2πiξ·y} f(y − x)` for `z = (x, ξ)`.
pub fn tf_shift(f: &SampledField, z: &[f64]) -> Result<SampledField> {
    let d = f.grid().dim();
    check_point(f.grid(), z)?;
    let (x0, xi0) = z.split_at(d);
    let shifted = translate(f, x0);
    if xi0.iter().all(|&v| v == 0.0) {
        return Ok(shifted);
    }
    Ok(shifted.map(|y, v| {
        let ph: f64 = y.iter().zip(xi0).map(|(a, b)| a * b).sum();
        v * Complex64::from_polar(1.0, 2.0 * PI * ph)
    }))
}

fn check_window(f: &SampledField, g: &SampledField) -> Result<()> {
    f.same_grid(g)?;
    if g.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
        return Err(Error::Domain("window must be nonzero".into()));
    }
    Ok(())
}

/// `f · conj g(· − x₀)`. Window samples whose argument leaves the fundamental domain are
/// dropped rather than wrapped, so periodic images of `g` do not leak into the transform.
fn windowed(f: &SampledField, g: &SampledField, x0: &[f64]) -> SampledField {
    let tg = translate(g, x0);
    let grid = f.grid();
    let half: Vec<f64> = (0..grid.dim())
        .map(|a| 0.5 * grid.spacing(a) * grid.n(a) as f64)
        .collect();
    let tol: Vec<f64> = (0..grid.dim()).map(|a| 1e-9 * grid.spacing(a)).collect();
    let inside = |y: &[f64]| {
        (0..y.len()).all(|a| {
            let u = y[a] - x0[a];
            u >= -half[a] - tol[a] && u < half[a] - tol[a]
        })
    };
    let values = f
        .values()
        .iter()
        .zip(tg.values())
        .enumerate()
        .map(|(k, (a, b))| {
            let y: Vec<f64> = grid
                .unravel(k)
                .iter()
                .enumerate()
                .map(|(ax, &i)| grid.coord(ax, i))
                .collect();
            if inside(&y) {
                a * b.conj()
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    SampledField::from_parts(grid.clone(), values)
}

/// `V_g f(x, ξ) = ⟨f, π(x, ξ)g⟩` at arbitrary phase-space points.
pub fn stft(f: &SampledField, g: &SampledField, points: &[Vec<f64>]) -> Result<Vec<Complex64>> {
    check_window(f, g)?;
    let grid = f.grid();
    let d = grid.dim();
    for z in points {
        check_point(grid, z)?;
    }
    let mut groups: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    for (i, z) in points.iter().enumerate() {
        groups
            .entry(z[..d].iter().map(|v| v.to_bits()).collect())
            .or_default()
            .push(i);
    }
    let dual = grid.dual();
    let groups: Vec<Vec<usize>> = groups.into_values().collect();
    let parts: Vec<Vec<(usize, Complex64)>> = groups
        .par_iter()
        .map(|idx| {
            let x0 = &points[idx[0]][..d];
            let h = windowed(f, g, x0);
            let on_grid: Option<Vec<usize>> = idx
                .iter()
                .map(|&i| {
                    let xi = &points[i][d..];
                    let k: Option<Vec<usize>> = (0..d).map(|a| dual.index_of(a, xi[a])).collect();
                    k.map(|k| dual.ravel(&k))
                })
                .collect();
            match on_grid {
                Some(ks) if idx.len() > 8 => {
                    let hh = fourier_transform(&h);
                    idx.iter()
                        .zip(ks)
                        .map(|(&i, k)| (i, hh.values()[k]))
                        .collect()
                }
                _ => idx
                    .iter()
                    .map(|&i| {
                        (
                            i,
                            exp_sum(grid, h.values(), &points[i][d..], -1.0) * grid.cell(),
                        )
                    })
                    .collect(),
            }
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); points.len()];
    for (i, v) in parts.into_iter().flatten() {
        out[i] = v;
    }
    Ok(out)
}

/// `V_g f` on every `(x_j, ξ_l)` of the grid and its dual.
pub fn stft_full(f: &SampledField, g: &SampledField) -> Result<TfArray> {
    check_window(f, g)?;
    require_line(f.grid(), "the full-grid STFT")?;
    let n = f.grid().n(0);
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let h = windowed(f, g, &[f.grid().coord(0, j)]);
            fourier_transform(&h).into_values()
        })
        .collect();
    Ok(TfArray {
        grid: f.grid().clone(),
        values: rows.concat(),
    })
}

/// Largest discrepancy of `V_g f(x, ξ) = e^{−2πixξ} V_ĝ f̂(ξ, −x)` on the central quarter,
/// relative to `max |V_g f|`.
pub fn stft_fundamental_identity_check(f: &SampledField, g: &SampledField) -> Result<f64> {
    let lhs = stft_full(f, g)?;
    let rhs = stft_full(&fourier_transform(f), &fourier_transform(g))?;
    let n = lhs.n();
    let scale = lhs.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let c = f.grid().central(0);
    let mut worst = 0.0f64;
    for j in c.clone() {
        for l in c.clone() {
            let r = Complex64::from_polar(1.0, -2.0 * PI * lhs.x(j) * lhs.xi(l))
                * rhs.at(l, (n - j) % n);
            worst = worst.max((lhs.at(j, l) - r).norm());
        }
    }
    Ok(worst / scale)
}

/// Two-dimensional transform of `V_g f` compared with `e^{2πiω·η} f(−η) conj(ĝ(ω))`;
/// returns the largest absolute discrepancy on the central quarter.
pub fn stft_fourier_transform_identity_check(f: &SampledField, g: &SampledField) -> Result<f64> {
    let mut v = stft_full(f, g)?;
    let grid = f.grid().clone();
    let n = grid.n(0);
    let dual = grid.dual();
    centered_axis(&mut v.values, &[n, n], 0, grid.spacing(0), Sign::Forward);
    centered_axis(&mut v.values, &[n, n], 1, dual.spacing(0), Sign::Forward);
    let gh = fourier_transform(g);
    let c = grid.central(0);
    let mut worst = 0.0f64;
    for a in c.clone() {
        let omega = dual.coord(0, a);
        for b in c.clone() {
            let eta = grid.coord(0, b);
            let r = Complex64::from_polar(1.0, 2.0 * PI * omega * eta)
                * f.values()[(n - b) % n]
                * gh.values()[a].conj();
            worst = worst.max((v.values[a * n + b] - r).norm());
        }
    }
    Ok(worst)
}

/// `|V_f f(x, ξ)|` for `f = e^{(iπc − a)|x|²}`: `(2a/π)^{−d/2} e^{−(a/2)|x|²} e^{−(π²/2a)|ξ − cx|²}`.
pub fn gaussian_stft_magnitude(a: f64, c: f64, x: &[f64], xi: &[f64]) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!(
            "Gaussian rate a = {a} must be positive"
        )));
    }
    if x.len() != xi.len() {
        return Err(Error::Dimension("x and ξ must have the same length".into()));
    }
    let d = x.len() as f64;
    let x2: f64 = x.iter().map(|v| v * v).sum();
    let r2: f64 = x.iter().zip(xi).map(|(&p, &q)| (q - c * p).powi(2)).sum();
    Ok((2.0 * a / PI).powf(-0.5 * d) * (-0.5 * a * x2 - PI * PI / (2.0 * a) * r2).exp())
}
