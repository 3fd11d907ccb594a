use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use std::f64::consts::PI;

use super::fourier::{fourier_transform, half_sample};
use super::grid::SampledField;
use super::stft::{stft, TfArray};
use crate::error::{Error, Result};

fn interleave(f: &SampledField) -> Vec<Complex64> {
    let half = half_sample(f);
    f.values()
        .iter()
        .zip(&half)
        .flat_map(|(&a, &b)| [a, b])
        .collect()
}

/// Cross-Wigner distribution `W(f, g)(x_j, ξ_l)` with `t = mΔx`, `m ∈ [−n, n)`.
///
/// The samples `f(x_j + t/2)` and `g(x_j − t/2)` sit on the half-spaced grid, filled in by
/// band-limited interpolation. Products reaching outside the domain are dropped, so the
/// periodic images of `f` do not interfere with it. Because `ξ_l t` has period `L` in `t`,
/// the correlation is folded modulo `n` before one FFT per row.
pub fn wigner(f: &SampledField, g: &SampledField) -> Result<TfArray> {
    f.same_grid(g)?;
    if f.grid().dim() != 1 {
        return Err(Error::Dimension(
            "the Wigner distribution is implemented for one-axis grids".into(),
        ));
    }
    let grid = f.grid().clone();
    let n = grid.n(0);
    let dx = grid.spacing(0);
    let fh = interleave(f);
    let gh = interleave(g);
    let fft = FftPlanner::new().plan_fft_forward(n);
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut c = vec![Complex64::new(0.0, 0.0); n];
            let two_n = 2 * n as i64;
            for m in -(n as i64)..(n as i64) {
                let (p, q) = (2 * j as i64 + m, 2 * j as i64 - m);
                if p < 0 || q < 0 || p >= two_n || q >= two_n {
                    continue;
                }
                c[m.rem_euclid(n as i64) as usize] += fh[p as usize] * gh[q as usize].conj();
            }
            for (m, v) in c.iter_mut().enumerate() {
                if m % 2 == 1 {
                    *v = -*v;
                }
            }
            fft.process(&mut c);
            c.into_iter().map(|v| v * dx).collect()
        })
        .collect();
    Ok(TfArray {
        grid,
        values: rows.concat(),
    })
}

/// Largest discrepancy of `W(f, g)(x, ξ) = 2 e^{4πixξ} V_{ℐg} f(2x, 2ξ)` on the central quarter,
/// relative to `max |W(f, g)|`.
pub fn wigner_stft_identity_check(f: &SampledField, g: &SampledField) -> Result<f64> {
    let w = wigner(f, g)?;
    let c = f.grid().central(0);
    let points: Vec<Vec<f64>> = c
        .clone()
        .flat_map(|j| c.clone().map(move |l| (j, l)))
        .map(|(j, l)| vec![2.0 * w.x(j), 2.0 * w.xi(l)])
        .collect();
    let v = stft(f, &g.flip(), &points)?;
    let scale = w.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let worst = points
        .iter()
        .zip(&v)
        .zip(c.clone().flat_map(|j| c.clone().map(move |l| (j, l))))
        .map(|((z, vz), (j, l))| {
            let r = 2.0 * Complex64::from_polar(1.0, PI * z[0] * z[1]) * vz;
            (w.at(j, l) - r).norm()
        })
        .fold(0.0, f64::max);
    Ok(worst / scale)
}

/// Largest discrepancies of the two marginals `∫ W dξ = f conj(g)` and `∫ W dx = f̂ conj(ĝ)`
/// on the central quarter.
pub fn wigner_marginal_checks(f: &SampledField, g: &SampledField) -> Result<(f64, f64)> {
    let w = wigner(f, g)?;
    let grid = f.grid();
    let n = grid.n(0);
    let (dx, dxi) = (grid.spacing(0), grid.dual().spacing(0));
    let (fh, gh) = (fourier_transform(f), fourier_transform(g));
    let (mut m1, mut m2) = (0.0f64, 0.0f64);
    for k in grid.central(0) {
        let sx: Complex64 =
            crate::util::pairwise_sum_c(&(0..n).map(|l| w.at(k, l)).collect::<Vec<_>>()) * dxi;
        let sxi: Complex64 =
            crate::util::pairwise_sum_c(&(0..n).map(|j| w.at(j, k)).collect::<Vec<_>>()) * dx;
        m1 = m1.max((sx - f.values()[k] * g.values()[k].conj()).norm());
        m2 = m2.max((sxi - fh.values()[k] * gh.values()[k].conj()).norm());
    }
    Ok((m1, m2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tf::grid::{GaussianChirp, Grid};

    #[test]
    fn standard_gaussian_closed_form() {
        let g = Grid::line(12.0, 256).unwrap();
        let f = GaussianChirp::standard().sample(&g);
        let w = wigner(&f, &f).unwrap();
        let mut worst = 0.0f64;
        for j in g.central(0) {
            for l in g.central(0) {
                let (x, xi) = (w.x(j), w.xi(l));
                let exact = 2f64.sqrt() * (-2.0 * PI * (x * x + xi * xi)).exp();
                worst = worst.max((w.at(j, l) - exact).norm());
            }
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn first_marginal() {
        let g = Grid::line(12.0, 256).unwrap();
        let f = GaussianChirp::new(1.1, 0.6).unwrap().sample(&g);
        let w = wigner(&f, &f).unwrap();
        let dxi = g.dual().spacing(0);
        for j in g.central(0) {
            let s: Complex64 = (0..256).map(|l| w.at(j, l)).sum::<Complex64>() * dxi;
            assert!((s - f.values()[j].norm_sqr()).norm() < 1e-8);
        }
    }

    #[test]
    fn stft_link_and_marginals_for_a_cross_pair() {
        let g = Grid::line(12.0, 256).unwrap();
        let f = GaussianChirp::new(0.9, 0.4).unwrap().sample(&g);
        let h = GaussianChirp::new(2.0, -0.3)
            .unwrap()
            .sample(&g)
            .map(|x, v| v * Complex64::from_polar(1.0, 2.0 * PI * 0.5 * x[0]));
        assert!(wigner_stft_identity_check(&f, &h).unwrap() < 1e-8);
        let (a, b) = wigner_marginal_checks(&f, &h).unwrap();
        assert!(a < 1e-8 && b < 1e-8, "{a} {b}");
    }
}
