#![allow(dead_code)]

use mplab::flows::{generator_matrix, Generator};
use mplab::symplectic::SymplecticMatrix;
use nalgebra::DMatrix;
use rand::Rng;

pub fn symmetric(rng: &mut impl Rng, d: usize, scale: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-scale..scale));
    (&a + a.transpose()) * 0.5
}

/// Invertible `E` with singular values in `[1/2, 2]`.
pub fn well_conditioned(rng: &mut impl Rng, d: usize) -> DMatrix<f64> {
    let q = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0))
        .qr()
        .q();
    let r = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0))
        .qr()
        .q();
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |_, _| {
        2f64.powf(rng.gen_range(-1.0..1.0))
    }));
    q * s * r
}

pub fn random_generator(rng: &mut impl Rng, d: usize) -> Generator {
    match rng.gen_range(0..3) {
        0 => Generator::J(d),
        1 => Generator::Dilation(well_conditioned(rng, d)),
        _ => Generator::Chirp(symmetric(rng, d, 1.0)),
    }
}

/// Product of `1..=max_factors` random generators in dimension `d`.
pub fn random_symplectic(rng: &mut impl Rng, d: usize, max_factors: usize) -> SymplecticMatrix {
    let k = rng.gen_range(1..=max_factors);
    let mut s = generator_matrix(&random_generator(rng, d)).unwrap();
    for _ in 1..k {
        s = s.compose(&generator_matrix(&random_generator(rng, d)).unwrap());
    }
    s
}

/// Singular values of a dense matrix, largest first.
pub fn dense_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// `σ₁ ≥ … ≥ σ_d ≥ 1` followed by their reciprocals, in the order a dense SVD lists them.
pub fn paired_spectrum(sigma: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = sigma
        .iter()
        .copied()
        .chain(sigma.iter().map(|s| 1.0 / s))
        .collect();
    all.sort_by(|a, b| b.total_cmp(a));
    all
}

pub fn rel_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

/// Sum of a few Gaussian wave packets with random centres, modulations and widths.
pub fn random_packets(
    rng: &mut impl Rng,
    grid: &mplab::tf::Grid,
    count: usize,
) -> mplab::tf::SampledField {
    use num_complex::Complex64;
    let packets: Vec<(f64, f64, f64, Complex64)> = (0..count)
        .map(|_| {
            let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(2.0..6.0),
                amp,
            )
        })
        .collect();
    mplab::tf::SampledField::from_fn(grid.clone(), |x| {
        packets
            .iter()
            .map(|&(x0, xi0, a, c)| {
                let y = x[0] - x0;
                c * Complex64::new(-a * y * y, 2.0 * std::f64::consts::PI * xi0 * x[0]).exp()
            })
            .sum()
    })
}
