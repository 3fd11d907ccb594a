//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero when any criterion fails.

mod common;

use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;

use common::{
    dense_singular_values, paired_spectrum, random_packets, random_symplectic, symmetric,
};
use mplab::decay::{
    confinement_epsilon, corollary_epsilon, counterexample_report, delta_sd, gabor_matrix,
    phase_lattice, verify_spreading_bound, verify_spreading_bound_with_delta,
};
use mplab::flows::{rotation_generator, FlowSpec, Generator};
use mplab::lemmas::{check_conv_lemma_2d_assembled, run_sweep, Lemma, SweepConfig};
use mplab::plot::{spreading_frames, BOUNDARY_POINTS};
use mplab::symplectic::{euler_decompose, orthogonality_residual, symplectic_check, DEFAULT_TOL};
use mplab::tf::{
    fourier_transform, stft_fourier_transform_identity_check, stft_full,
    stft_fundamental_identity_check, wigner_marginal_checks, wigner_stft_identity_check,
    GaussianChirp, Grid, SampledField,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn euler_engine() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut rec, mut fac, mut sv, mut pair) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..1000 {
        let d = 1 + k % 4;
        let s = random_symplectic(&mut rng, d, 10);
        let dec = euler_decompose(&s, DEFAULT_TOL).expect("decomposition");
        let r = dec.residuals(s.matrix());
        rec = rec.max(r.reconstruction);
        fac = fac.max(r.max_factor());
        let dense = dense_singular_values(s.matrix());
        for (a, b) in paired_spectrum(&dec.sigma).iter().zip(&dense) {
            sv = sv.max((a - b).abs() / dense[0]);
        }
        for j in 0..d {
            pair = pair.max((dense[j] * dense[2 * d - 1 - j] - 1.0).abs() / (dense[0] * dense[0]));
        }
    }
    outcome(
        rec <= 1e-9 && fac <= 1e-10 && sv <= 1e-10 && pair <= 1e-10,
        format!("1000 products: reconstruction {rec:.2e}, factors {fac:.2e}, singular values {sv:.2e}, pairing {pair:.2e}"),
    )
}

fn random_orthogonal(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
        .qr()
        .q()
}

fn closed_form_flows() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut sv, mut period) = (0.0f64, 0.0f64);
    let compare = |spec: &FlowSpec| -> f64 {
        let (dec, _) = spec.euler().expect("closed form");
        let dense = dense_singular_values(spec.matrix().expect("flow").matrix());
        paired_spectrum(&dec.sigma)
            .iter()
            .zip(&dense)
            .map(|(a, b)| (a - b).abs() / dense[0])
            .fold(0.0, f64::max)
    };
    for _ in 0..200 {
        let t = rng.gen_range(-10.0..10.0);
        let m = rng.gen_range(0.2..5.0);
        let omega = rng.gen_range(0.1..4.0);
        let d = rng.gen_range(1..=3usize);
        let omegas: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..4.0)).collect();
        sv = sv.max(compare(&FlowSpec::free_particle(t, d)));

        let ho = FlowSpec::harmonic_oscillator(t, m, omegas.clone());
        sv = sv.max(compare(&ho));
        let single = |t| {
            FlowSpec::harmonic_oscillator(t, m, vec![omega])
                .euler()
                .expect("oscillator")
                .0
                .sigma[0]
        };
        period = period.max((single(t) - single(t + PI / omega)).abs());

        let n = 2 * rng.gen_range(1..=2usize);
        let r = random_orthogonal(&mut rng, n);
        let b = &r * rotation_generator(n).expect("even") * r.transpose();
        let mag = FlowSpec::magnetic(t, m, omega, &b);
        sv = sv.max(compare(&mag));
        let sig = |t| {
            FlowSpec::magnetic(t, m, omega, &b)
                .euler()
                .expect("magnetic")
                .0
                .sigma[0]
        };
        period = period.max((sig(t) - sig(t + PI / omega)).abs());
    }
    let one = FlowSpec::free_particle(1.0, 1)
        .euler()
        .expect("free particle")
        .0
        .sigma[0];
    let exact = (one - (1.0 + SQRT_2)).abs();
    outcome(
        sv <= 1e-10 && period <= 1e-10 && exact <= 1e-12,
        format!("200 draws per flow: singular values {sv:.2e}, period {period:.2e}, sigma(1) error {exact:.2e}"),
    )
}

fn generator_catalogue() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut sv = 0.0f64;
    for k in 0..200 {
        let d = 1 + k % 3;
        let q = symmetric(&mut rng, d, 3.0);
        let (dec, _) = FlowSpec::generator(&Generator::Chirp(q.clone()))
            .euler()
            .expect("chirp");
        // Θ-conjugation to the diagonal chirp: σ(μ) = √(1 + μ²/4) + |μ|/2 per eigenvalue μ of Q.
        let mut expected: Vec<f64> = q
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|mu| (1.0 + mu * mu / 4.0).sqrt() + (mu / 2.0).abs())
            .collect();
        expected.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in dec.sigma.iter().zip(&expected) {
            sv = sv.max((a - b).abs());
        }
    }
    let mut so = 0.0f64;
    for d in 1..=3usize {
        for mask in 0u32..1 << d {
            let set: Vec<usize> = (0..d).filter(|k| mask >> k & 1 == 1).collect();
            let m = FlowSpec::generator(&Generator::PartialFourier { d, set })
                .matrix()
                .expect("partial Fourier");
            so = so
                .max(orthogonality_residual(m.matrix()))
                .max(symplectic_check(m.matrix(), 1.0).expect("square").1);
        }
        for rank in 0..=d {
            let r = random_orthogonal(&mut rng, d);
            let m = FlowSpec::generator(&Generator::PartialFourierRotated { r, rank })
                .matrix()
                .expect("rotated");
            so = so
                .max(orthogonality_residual(m.matrix()))
                .max(symplectic_check(m.matrix(), 1.0).expect("square").1);
        }
    }
    outcome(
        sv <= 1e-10 && so <= 1e-12,
        format!("200 chirps: singular values {sv:.2e}; partial Fourier residual {so:.2e}"),
    )
}

fn transform_identities() -> Outcome {
    let grid = Grid::line(12.0, 256).expect("grid");
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut fields: Vec<SampledField> = vec![
        GaussianChirp::standard().sample(&grid),
        GaussianChirp::new(1.7, 0.4).expect("rate").sample(&grid),
    ];
    fields.extend((0..4).map(|_| random_packets(&mut rng, &grid, 3)));
    let (mut ed, mut ft, mut ws, mut marg, mut parseval) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for f in &fields {
        for g in &fields[..2] {
            ed = ed.max(stft_fundamental_identity_check(f, g).expect("grid"));
            ft = ft.max(stft_fourier_transform_identity_check(f, g).expect("grid"));
            ws = ws.max(wigner_stft_identity_check(f, g).expect("grid"));
            let (a, b) = wigner_marginal_checks(f, g).expect("grid");
            marg = marg.max(a).max(b);
            let v = stft_full(f, g).expect("grid");
            let cell = grid.spacing(0) * grid.dual().spacing(0);
            let energy: f64 = v.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell;
            let expected = (f.norm() * g.norm()).powi(2);
            parseval = parseval.max((energy / expected - 1.0).abs());
        }
        parseval = parseval.max((fourier_transform(f).norm() / f.norm() - 1.0).abs());
    }
    let worst = ed.max(ft).max(ws).max(marg);
    outcome(
        worst <= 1e-6 && parseval <= 1e-10,
        format!(
            "{} fields: fundamental {ed:.2e}, fourier {ft:.2e}, wigner-stft {ws:.2e}, marginals {marg:.2e}, parseval {parseval:.2e}",
            fields.len()
        ),
    )
}

fn gaussian_closed_forms() -> Outcome {
    let grid = Grid::line(12.0, 256).expect("grid");
    let mut worst = 0.0f64;
    for a in [PI / 2.0, PI, 2.0 * PI] {
        let f = GaussianChirp::new(a, 0.0).expect("rate").sample(&grid);
        let v = stft_full(&f, &f).expect("grid");
        for j in 0..v.n() {
            for l in 0..v.n() {
                let (x, xi) = (v.x(j), v.xi(l));
                let exact = (2.0 * a / PI).powf(-0.5)
                    * (-(a / 2.0) * x * x - (PI * PI / (2.0 * a)) * xi * xi).exp();
                if exact > 1e-10 {
                    worst = worst.max((v.at(j, l).norm() - exact).abs() / exact);
                }
            }
        }
    }
    outcome(
        worst <= 1e-6,
        format!("a in {{pi/2, pi, 2pi}}: worst relative error {worst:.2e}"),
    )
}

fn spreading_flows() -> Vec<(&'static str, FlowSpec)> {
    vec![
        ("free t=0.5", FlowSpec::free_particle(0.5, 1)),
        ("free t=1", FlowSpec::free_particle(1.0, 1)),
        ("free t=2", FlowSpec::free_particle(2.0, 1)),
        (
            "HO m=w=1 t=0.6",
            FlowSpec::harmonic_oscillator(0.6, 1.0, vec![1.0]),
        ),
        (
            "HO m=1.7939 w=1.7762 t=0.6",
            FlowSpec::harmonic_oscillator(0.6, 1.7939, vec![1.7762]),
        ),
    ]
}

fn spreading_bound() -> Outcome {
    let (eps, s, half) = (PI, 0.5, 2.0);
    let lattice = phase_lattice(half, 0.125);
    let delta = delta_sd(s, eps, 1).expect("rate");
    let mut pass = delta.attained && delta.value == eps;
    let mut lines = Vec::new();
    for (name, spec) in spreading_flows() {
        // Smallest box holding every image S z three units clear of the edge, at spacing 1/32.
        let m = spec.matrix().expect("flow").matrix().clone();
        let reach = half * (m[(0, 0)].abs() + m[(0, 1)].abs()).max(1.0);
        let l = [16.0, 32.0, 64.0]
            .into_iter()
            .find(|&l| reach + 3.0 <= 0.5 * l)
            .expect("box");
        let n = (32.0 * l) as usize;
        let base = GaussianChirp::standard().sample(&Grid::line(l, n).expect("grid"));
        let fine = GaussianChirp::standard().sample(&Grid::line(l, 2 * n).expect("grid"));
        let gms = [
            gabor_matrix(&spec, &base, &base, &lattice, &lattice).expect("gabor matrix"),
            gabor_matrix(&spec, &fine, &fine, &lattice, &lattice).expect("gabor matrix"),
        ];
        let dec = gms[0].decomposition.clone();
        let r = verify_spreading_bound(&gms, &dec, s, eps).expect("fit");
        let half = verify_spreading_bound_with_delta(&gms, &dec, s, eps, eps / 2.0).expect("fit");
        pass &= r.pass;
        lines.push(format!(
            "{name} (L={l}, n={n}): C {:.3e} refined {:.3e} C/C_core {:.2} stable {} bounded {}; at delta=eps/2 pass {}",
            r.c,
            r.c_refined[0],
            r.c / r.c_core,
            r.stable,
            r.bounded,
            half.pass
        ));
    }
    outcome(
        pass,
        format!(
            "33x33 lattice, delta = {}:\n      {}",
            delta.value,
            lines.join("\n      ")
        ),
    )
}

fn confinement_table() -> Outcome {
    let cbrt2 = 2f64.powf(1.0 / 3.0);
    // (s, eps, sigma_min, d, expected eps', attained, branch); values written out by hand.
    let table: [(f64, f64, f64, usize, f64, bool, &str); 9] = [
        (0.5, 1.0, 0.5, 1, 0.5, true, "gaussian-contracted"),
        (0.5, 2.0, 0.9, 1, 2.0, true, "gaussian-unchanged"),
        (0.5, 3.0, 0.6, 1, 2.16, true, "gaussian-contracted"),
        (0.5, 1.0, 0.5, 2, 0.25, true, "gaussian-dimensional"),
        (0.5, 3.0, 1.0, 3, 2.0, true, "gaussian-dimensional"),
        (
            0.75,
            1.0,
            0.5,
            1,
            1.0 / (cbrt2 * cbrt2 * cbrt2 * cbrt2 * cbrt2),
            false,
            "convex-contracted",
        ),
        (0.75, 1.0, 0.8, 1, 1.0, true, "convex-unchanged"),
        (1.0, 1.0, 0.5, 1, 1.0 / 16.0, false, "concave"),
        (
            2.0,
            4.0,
            0.25,
            2,
            1.0 / (8.0 * 2f64.powf(0.25)),
            false,
            "concave",
        ),
    ];
    let mut worst = 0.0f64;
    let mut pass = true;
    for &(s, eps, sigma, d, value, attained, branch) in &table {
        let c = confinement_epsilon(s, eps, sigma, d).expect("valid input");
        worst = worst.max((c.eps_prime - value).abs() / value);
        pass &= c.attained == attained && c.branch == branch;
    }
    // ε(t) = 2^{−1+1/s} δ(s,d) σ_min^{1/s}.
    let corollary: [(f64, f64, f64, usize, f64, bool); 3] = [
        (0.5, 1.0, 0.5, 1, 0.5, true),
        (
            0.75,
            1.0,
            0.5,
            2,
            cbrt2 * 2f64.powf(-2.0 / 3.0) * 2f64.powf(2.0 / 3.0) * 0.5f64.powf(4.0 / 3.0),
            false,
        ),
        (
            1.5,
            2.0,
            0.7,
            3,
            2f64.powf(-1.0 / 3.0)
                * 3f64.powf(-0.5)
                * 2f64.powf(-3.5 + 1.0 / 3.0)
                * 2.0
                * 0.7f64.powf(2.0 / 3.0),
            false,
        ),
    ];
    for &(s, eps, sigma, d, value, attained) in &corollary {
        let c = corollary_epsilon(s, eps, sigma, d).expect("valid input");
        worst = worst.max((c.value - value).abs() / value);
        pass &= c.attained == attained;
    }
    outcome(
        pass && worst <= 4.0 * f64::EPSILON,
        format!("12 cases: worst relative deviation {worst:.2e}"),
    )
}

fn lemma_sweeps() -> Outcome {
    let cfg = SweepConfig::default();
    let lemmas = [
        Lemma::Sequences,
        Lemma::ConvLemma1,
        Lemma::ConvLemma2,
        Lemma::ConvLemma2d { d: 1 },
        Lemma::ConvLemma2d { d: 2 },
        Lemma::Uc,
        Lemma::ConvBound,
        Lemma::CEpsS,
        Lemma::Angular,
    ];
    let mut pass = true;
    let mut lines = Vec::new();
    for lemma in lemmas {
        let start = Instant::now();
        let r = run_sweep(lemma, &cfg).expect("sweep");
        pass &= r.violations == 0 && r.inconclusive == 0;
        let mut line = format!(
            "{}: {} trials, {} violations, {} inconclusive, worst margin {:.3e} ({:.1}s)",
            r.lemma,
            r.trials,
            r.violations,
            r.inconclusive,
            r.worst_margin,
            start.elapsed().as_secs_f64()
        );
        if let Lemma::ConvLemma2d { d } = lemma {
            if !r.failures.is_empty() {
                let held = r
                    .failures
                    .iter()
                    .filter(|f| {
                        let x = &f.params;
                        check_conv_lemma_2d_assembled(x[0], x[1], &x[2..2 + d], &x[2 + d..])
                            .map(|c| c.pass())
                            .unwrap_or(false)
                    })
                    .count();
                line.push_str(&format!(
                    "; assembled bound holds on {held}/{} of them",
                    r.failures.len()
                ));
            }
        }
        lines.push(line);
    }
    outcome(
        pass,
        format!("seed {}:\n      {}", cfg.seed, lines.join("\n      ")),
    )
}

fn counterexample() -> Outcome {
    let r = counterexample_report(PI).expect("report");
    let on_diagonal = r.witness.x == r.witness.xi;
    outcome(
        r.conjectured_violated && r.quarter_holds && on_diagonal,
        format!(
            "witness ({}, {}) excess {:.3e}; quarter bound worst ratio {:.3e} on {} points",
            r.witness.x, r.witness.xi, r.witness.excess, r.quarter_worst, r.points
        ),
    )
}

fn figure_reproduction() -> Outcome {
    let (m, omega) = (1.7939, 1.7762);
    let alphas = [0.0, 0.3, 0.6, 0.8, 1.0, 1.3];
    let times: Vec<f64> = alphas.iter().map(|a| a * PI / omega).collect();
    let ho = spreading_frames(&FlowSpec::harmonic_oscillator(0.0, m, vec![omega]), &times)
        .expect("frames");
    let full = ho[4].distance_to_unit_polygon();

    let times: Vec<f64> = (0..=24).map(|k| 0.25 * k as f64).collect();
    let free = spreading_frames(&FlowSpec::free_particle(0.0, 1), &times).expect("frames");
    let mut ratio = 0.0f64;
    let mut major = 0.0f64;
    let mut monotone = true;
    for (k, f) in free.iter().enumerate() {
        ratio = ratio.max((f.major / f.minor - f.sigma).abs());
        major = major.max((f.major - 1.0).abs());
        if k > 0 {
            monotone &= f.major / f.minor > free[k - 1].major / free[k - 1].minor;
        }
    }
    outcome(
        full <= 1e-9 && ratio <= 1e-9 && major <= 1e-9 && monotone && ho[4].vertices.len() == BOUNDARY_POINTS,
        format!(
            "HO alpha=1 vertex distance {full:.2e}; free particle axis ratio vs sigma {ratio:.2e}, major axis - 1 {major:.2e}, ratio increasing {monotone}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Euler engine", euler_engine),
        ("closed-form flows", closed_form_flows),
        ("generator catalogue", generator_catalogue),
        ("transform identities", transform_identities),
        ("Gaussian closed forms", gaussian_closed_forms),
        ("spreading bound", spreading_bound),
        ("confinement constants", confinement_table),
        ("lemma sweeps", lemma_sweeps),
        ("counterexample", counterexample),
        ("figure reproduction", figure_reproduction),
    ];
    let total = Instant::now();
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} criterion {} ({name}) [{:.1}s]: {}",
            k + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed.push(k + 1);
        }
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.len() - failed.len(),
        criteria.len(),
        total.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
