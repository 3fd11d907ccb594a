use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::{Grid, SampledField};

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Sign {
    Forward,
    Inverse,
}

/// `out_l = δ (−1)^l Σ_k (−1)^k v_k e^{∓2πilk/n}` along one axis: the Riemann sum of a
/// continuous transform between centered grids (`n/4` integer makes the global phase 1).
pub(crate) fn centered_axis(
    values: &mut [Complex64],
    shape: &[usize],
    axis: usize,
    delta: f64,
    sign: Sign,
) {
    let n = shape[axis];
    let mut planner = FftPlanner::new();
    let fft = match sign {
        Sign::Forward => planner.plan_fft_forward(n),
        Sign::Inverse => planner.plan_fft_inverse(n),
    };
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * n * stride + s;
            for (k, slot) in line.iter_mut().enumerate() {
                let v = values[base + k * stride];
                *slot = if k % 2 == 0 { v } else { -v };
            }
            fft.process(&mut line);
            for (l, v) in line.iter().enumerate() {
                let w = if l % 2 == 0 { *v } else { -*v };
                values[base + l * stride] = w * delta;
            }
        }
    }
}

fn transform(f: &SampledField, sign: Sign) -> SampledField {
    let grid = f.grid();
    let mut values = f.values().to_vec();
    for a in 0..grid.dim() {
        centered_axis(&mut values, grid.shape(), a, grid.spacing(a), sign);
    }
    SampledField::from_parts(grid.dual(), values)
}

/// Samples of `f̂(ξ) = ∫ f(x) e^{−2πiξ·x} dx` on the dual grid.
pub fn fourier_transform(f: &SampledField) -> SampledField {
    transform(f, Sign::Forward)
}

/// Inverse of [`fourier_transform`]: maps dual-grid samples back onto the spatial grid.
pub fn inverse_fourier_transform(fhat: &SampledField) -> SampledField {
    transform(fhat, Sign::Inverse)
}

/// Band-limited translation `f(· − x₀)`, exact in the spectral domain.
pub fn spectral_shift(f: &SampledField, x0: &[f64]) -> SampledField {
    let shifted = fourier_transform(f).map(|xi, v| {
        let ph: f64 = xi.iter().zip(x0).map(|(a, b)| a * b).sum();
        v * Complex64::from_polar(1.0, -2.0 * PI * ph)
    });
    SampledField::from_parts(
        f.grid().clone(),
        inverse_fourier_transform(&shifted).into_values(),
    )
}

/// Values at `x_k + Δx/2` (one-axis grids).
pub(crate) fn half_sample(f: &SampledField) -> Vec<Complex64> {
    let dx = f.grid().spacing(0);
    spectral_shift(f, &[-0.5 * dx]).into_values()
}

fn axis_phases(grid: &Grid, axis: usize, y: f64, sign: f64) -> Vec<Complex64> {
    (0..grid.n(axis))
        .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * y * grid.coord(axis, k)))
        .collect()
}

/// `Σ_k v_k Π_a e^{±2πi y_a x_{k,a}}`, separable in the axes.
pub(crate) fn exp_sum(grid: &Grid, values: &[Complex64], y: &[f64], sign: f64) -> Complex64 {
    match grid.dim() {
        1 => {
            let e = axis_phases(grid, 0, y[0], sign);
            values.iter().zip(&e).map(|(v, p)| v * p).sum()
        }
        _ => {
            let e0 = axis_phases(grid, 0, y[0], sign);
            let e1 = axis_phases(grid, 1, y[1], sign);
            let n1 = grid.n(1);
            e0.iter()
                .enumerate()
                .map(|(i, p0)| {
                    let row: Complex64 = values[i * n1..(i + 1) * n1]
                        .iter()
                        .zip(&e1)
                        .map(|(v, p)| v * p)
                        .sum();
                    row * p0
                })
                .sum()
        }
    }
}

/// `f̂(η)` by direct summation at an arbitrary frequency.
pub fn fourier_at(f: &SampledField, eta: &[f64]) -> Complex64 {
    exp_sum(f.grid(), f.values(), eta, -1.0) * f.grid().cell()
}

/// Trigonometric interpolant of the samples at arbitrary points, zero outside the box.
pub struct BandLimited {
    spectrum: SampledField,
}

impl BandLimited {
    pub fn new(f: &SampledField) -> Self {
        Self {
            spectrum: fourier_transform(f),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        if !self.spectrum.grid().dual().contains(x) {
            return Complex64::new(0.0, 0.0);
        }
        exp_sum(self.spectrum.grid(), self.spectrum.values(), x, 1.0) * self.spectrum.grid().cell()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tf::grid::GaussianChirp;

    #[test]
    fn gaussian_is_a_fixed_point() {
        let g = Grid::line(12.0, 256).unwrap();
        let f = GaussianChirp::standard().sample(&g);
        let fh = fourier_transform(&f);
        let exact = GaussianChirp::standard().sample(fh.grid());
        assert!(fh.max_abs_diff(&exact) < 1e-10);
        let back = inverse_fourier_transform(&fh);
        assert!(back.max_abs_diff(&f) < 1e-13);
    }

    #[test]
    fn parseval_two_axes() {
        let g = Grid::new(vec![10.0, 12.0], vec![64, 128]).unwrap();
        let f = GaussianChirp::new(2.0, 0.5).unwrap().sample(&g);
        let fh = fourier_transform(&f);
        assert!((f.norm() - fh.norm()).abs() < 1e-12);
        let exact = SampledField::from_fn(fh.grid().clone(), |xi| {
            GaussianChirp::new(2.0, 0.5).unwrap().fourier(xi)
        });
        assert!(fh.max_abs_diff(&exact) < 1e-10);
    }

    #[test]
    fn direct_sum_matches_fft_on_grid() {
        let g = Grid::line(8.0, 64).unwrap();
        let f = GaussianChirp::new(1.0, 0.3).unwrap().sample(&g);
        let fh = fourier_transform(&f);
        for l in [0usize, 5, 31, 40] {
            let xi = fh.grid().coord(0, l);
            assert!((fourier_at(&f, &[xi]) - fh.values()[l]).norm() < 1e-12);
        }
    }

    #[test]
    fn band_limited_shift_and_eval() {
        let g = Grid::line(12.0, 128).unwrap();
        let gc = GaussianChirp::new(2.0, 0.0).unwrap();
        let f = gc.sample(&g);
        let s = spectral_shift(&f, &[0.3]);
        let exact = SampledField::from_fn(g.clone(), |x| gc.eval(&[x[0] - 0.3]));
        assert!(s.max_abs_diff(&exact) < 1e-12);
        let bl = BandLimited::new(&f);
        assert!((bl.eval(&[0.123]) - gc.eval(&[0.123])).norm() < 1e-12);
        assert_eq!(bl.eval(&[7.0]), Complex64::new(0.0, 0.0));
    }
}
