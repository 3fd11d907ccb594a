mod common;

use common::random_packets;
use mplab::flows::{FlowSpec, Generator};
use mplab::tf::{
    apply_metaplectic, fourier_transform, stft_full, tf_shift, wigner, wigner_marginal_checks,
    wigner_stft_identity_check, GaussianChirp, Grid, SampledField,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field(seed: u64, l: f64, n: usize) -> SampledField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_packets(&mut rng, &Grid::line(l, n).unwrap(), 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn stft_magnitude_follows_time_frequency_shifts(seed in any::<u64>(), a in -8i64..8, b in -8i64..8) {
        let f = field(seed, 12.0, 128);
        let g = GaussianChirp::new(4.0, 0.0).unwrap().sample(f.grid());
        let grid = f.grid().clone();
        let (dx, dxi) = (grid.spacing(0), grid.dual().spacing(0));
        let z = [a as f64 * dx * 4.0, b as f64 * dxi * 4.0];
        let shifted = tf_shift(&f, &z).unwrap();
        let v0 = stft_full(&f, &g).unwrap();
        let v1 = stft_full(&shifted, &g).unwrap();
        let n = grid.n(0) as i64;
        let scale = v0.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for j in grid.central(0) {
            for l in grid.central(0) {
                let (jj, ll) = ((j as i64 - 4 * a).rem_euclid(n) as usize, (l as i64 - 4 * b).rem_euclid(n) as usize);
                prop_assert!((v1.at(j, l).norm() - v0.at(jj, ll).norm()).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn wigner_links_and_marginals(seed in any::<u64>()) {
        let f = field(seed, 12.0, 256);
        let g = field(seed ^ 0x5eed, 12.0, 256);
        prop_assert!(wigner_stft_identity_check(&f, &g).unwrap() <= 1e-8);
        let (m1, m2) = wigner_marginal_checks(&f, &g).unwrap();
        prop_assert!(m1 <= 1e-8 && m2 <= 1e-8, "{m1} {m2}");
    }

    #[test]
    fn metaplectic_operators_are_unitary(seed in any::<u64>(), t in -2.0f64..2.0, q in -1.5f64..1.5, e in 0.6f64..1.6) {
        let f = field(seed, 16.0, 256);
        let specs = [
            FlowSpec::free_particle(t, 1),
            FlowSpec::harmonic_oscillator(t, 1.3, vec![0.8]),
            FlowSpec::generator(&Generator::Chirp(DMatrix::from_element(1, 1, q))),
            FlowSpec::generator(&Generator::Dilation(DMatrix::from_element(1, 1, e))),
            FlowSpec::generator(&Generator::J(1)),
        ];
        for spec in &specs {
            let out = apply_metaplectic(spec, &f).unwrap();
            prop_assert!((out.norm() - f.norm()).abs() <= 1e-9 * f.norm(), "{:?}", spec.kind);
        }
    }
}

/// `max |W(Ŝf, Ŝg)(z) − W(f, g)(S⁻¹z)|` over the central quarter, with `S⁻¹z` on the grid.
fn covariance_defect(
    spec: &FlowSpec,
    f: &SampledField,
    g: &SampledField,
    inverse: impl Fn(i64, i64) -> (i64, i64),
) -> f64 {
    let w0 = wigner(f, g).unwrap();
    let w1 = wigner(
        &apply_metaplectic(spec, f).unwrap(),
        &apply_metaplectic(spec, g).unwrap(),
    )
    .unwrap();
    let grid = f.grid();
    let n = grid.n(0) as i64;
    let mut worst = 0.0f64;
    for j in grid.central(0) {
        for l in grid.central(0) {
            let (jj, ll) = inverse(j as i64 - n / 2, l as i64 - n / 2);
            let (jj, ll) = ((jj + n / 2) as usize, (ll + n / 2) as usize);
            worst = worst.max((w1.at(j, l) - w0.at(jj, ll)).norm());
        }
    }
    worst
}

#[test]
fn wigner_is_symplectically_covariant() {
    // L = 16 with n = 256 gives Δx = Δξ, so J and a unit chirp map grid points to grid points.
    let grid = Grid::line(16.0, 256).unwrap();
    let f = GaussianChirp::new(2.5, 0.3).unwrap().sample(&grid);
    let g = GaussianChirp::new(4.0, -0.2)
        .unwrap()
        .sample(&grid)
        .map(|x, v| v * Complex64::from_polar(1.0, 1.2 * x[0]));
    let j = FlowSpec::generator(&Generator::J(1));
    assert!(covariance_defect(&j, &f, &g, |a, b| (-b, a)) < 1e-6);
    let chirp = FlowSpec::generator(&Generator::Chirp(DMatrix::from_element(1, 1, 1.0)));
    assert!(covariance_defect(&chirp, &f, &g, |a, b| (a, b - a)) < 1e-6);
}

#[test]
fn plancherel_and_stft_energy() {
    let f = field(11, 12.0, 256);
    let g = GaussianChirp::standard().sample(f.grid());
    let fh = fourier_transform(&f);
    assert!((fh.norm() - f.norm()).abs() < 1e-10 * f.norm());
    let v = stft_full(&f, &g).unwrap();
    let cell = f.grid().spacing(0) * f.grid().dual().spacing(0);
    let energy: f64 = v.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell;
    let expected = (f.norm() * g.norm()).powi(2);
    assert!(
        (energy - expected).abs() < 1e-10 * expected,
        "{energy} {expected}"
    );
}
