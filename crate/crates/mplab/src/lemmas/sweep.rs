use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::conv::{
    c_eps_s, c_eps_s_quadrature, check_conv_lemma_1, check_conv_lemma_2, check_conv_lemma_2d,
    CheckVerdict,
};
use super::convbound::convbound_sweep;
use super::pointwise::{check_sequence_inequalities, check_uc_inequality};
use crate::decay::angular_min_max;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    Sequences,
    ConvLemma1,
    ConvLemma2,
    ConvLemma2d {
        d: usize,
    },
    Uc,
    CEpsS,
    /// Three regimes `p ∈ {3/2, 1, 1/2}` of the convolution bound on `|x| ≤ 50`.
    ConvBound,
    /// Angular grid search for `min max(|cos θ|^p, |sin θ|^p) = 2^{−p/2}`, `p ∈ {1/2, 1, 3/2, 2}`.
    Angular,
}

impl Lemma {
    pub fn name(&self) -> String {
        match self {
            Lemma::Sequences => "sequence-inequalities".into(),
            Lemma::ConvLemma1 => "conv-lemma-1".into(),
            Lemma::ConvLemma2 => "conv-lemma-2".into(),
            Lemma::ConvLemma2d { d } => format!("conv-lemma-2d-d{d}"),
            Lemma::Uc => "uc-inequality".into(),
            Lemma::CEpsS => "c-eps-s".into(),
            Lemma::ConvBound => "convbound".into(),
            Lemma::Angular => "angular-min-max".into(),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "sequence-inequalities" => Lemma::Sequences,
            "conv-lemma-1" => Lemma::ConvLemma1,
            "conv-lemma-2" => Lemma::ConvLemma2,
            "conv-lemma-2d-d1" => Lemma::ConvLemma2d { d: 1 },
            "conv-lemma-2d-d2" => Lemma::ConvLemma2d { d: 2 },
            "conv-lemma-2d-d3" => Lemma::ConvLemma2d { d: 3 },
            "uc-inequality" => Lemma::Uc,
            "c-eps-s" => Lemma::CEpsS,
            "convbound" => Lemma::ConvBound,
            "angular-min-max" => Lemma::Angular,
            _ => {
                return Err(Error::Parse {
                    field: "lemma".into(),
                    msg: format!("unknown lemma {name:?}"),
                })
            }
        })
    }

    pub fn all() -> Vec<Lemma> {
        vec![
            Lemma::Sequences,
            Lemma::ConvLemma1,
            Lemma::ConvLemma2,
            Lemma::ConvLemma2d { d: 1 },
            Lemma::ConvLemma2d { d: 2 },
            Lemma::Uc,
            Lemma::CEpsS,
            Lemma::ConvBound,
            Lemma::Angular,
        ]
    }

    pub fn default_trials(&self) -> usize {
        match self {
            Lemma::Sequences => 10_000,
            Lemma::Uc => 100_000,
            Lemma::ConvLemma2d { d } if *d >= 2 => 200,
            Lemma::ConvBound => 50,
            Lemma::Angular => 100_000,
            _ => 1000,
        }
    }
}

/// Parameter ranges of a randomized sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub trials: usize,
    pub seed: u64,
    pub s: (f64, f64),
    pub eps: (f64, f64),
    pub sigma: (f64, f64),
    pub ab: (f64, f64),
    pub v: (f64, f64),
    pub p: (f64, f64),
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            trials: 0,
            seed: 20240601,
            s: (0.5, 3.0),
            eps: (0.01, 5.0),
            sigma: (1.0, 10.0),
            ab: (0.0, 5.0),
            v: (-10.0, 10.0),
            p: (0.0, 2.0),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| {
            Err(Error::Domain(format!(
                "sweep range {what} violates the lemma hypotheses"
            )))
        };
        if self.s.0 < 0.5 || self.s.1 < self.s.0 {
            return bad("s");
        }
        if self.eps.0 <= 0.0 || self.eps.1 < self.eps.0 {
            return bad("eps");
        }
        if self.sigma.0 < 1.0 || self.sigma.1 < self.sigma.0 {
            return bad("sigma");
        }
        if self.ab.0 < 0.0 || self.ab.1 < self.ab.0 || self.v.1 < self.v.0 {
            return bad("a, b or v");
        }
        if self.p.0 < 0.0 || self.p.1 < self.p.0 {
            return bad("p");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub params: Vec<f64>,
    pub margin: f64,
    pub verdict: CheckVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub lemma: String,
    pub trials: usize,
    pub violations: usize,
    pub inconclusive: usize,
    pub worst_margin: f64,
    /// Parameters of the draw with the smallest margin.
    pub worst_params: Vec<f64>,
    pub seed: u64,
    pub failures: Vec<Failure>,
}

fn uni(rng: &mut ChaCha8Rng, r: (f64, f64)) -> f64 {
    if r.1 > r.0 {
        rng.gen_range(r.0..r.1)
    } else {
        r.0
    }
}

fn draw(lemma: Lemma, cfg: &SweepConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match lemma {
        Lemma::Sequences => {
            let n = rng.gen_range(1..=16usize);
            let mut v = vec![uni(rng, cfg.p), n as f64];
            for _ in 0..2 * n {
                v.push(uni(rng, cfg.v));
            }
            v
        }
        Lemma::ConvLemma1 | Lemma::ConvLemma2 => {
            vec![
                uni(rng, cfg.s),
                uni(rng, cfg.ab),
                uni(rng, cfg.ab),
                uni(rng, cfg.sigma),
                uni(rng, cfg.v),
                uni(rng, cfg.eps),
            ]
        }
        Lemma::ConvLemma2d { d } => {
            let mut v = vec![uni(rng, cfg.s), uni(rng, cfg.eps)];
            let mut sig: Vec<f64> = (0..d).map(|_| uni(rng, cfg.sigma)).collect();
            sig.sort_by(|a, b| b.total_cmp(a));
            v.extend(sig);
            v.extend((0..2 * d).map(|_| uni(rng, cfg.v)));
            v
        }
        Lemma::Uc => {
            let d = rng.gen_range(1..=3usize);
            let p = rng.gen_range(1.0..2.0f64).max(f64::MIN_POSITIVE + 1.0);
            let mut v = vec![p, d as f64];
            v.extend((0..2 * d).map(|_| uni(rng, cfg.v)));
            v
        }
        Lemma::CEpsS => vec![uni(rng, cfg.eps), uni(rng, cfg.s)],
        Lemma::ConvBound | Lemma::Angular => vec![],
    }
}

/// `(margin, verdict)` of one draw; margins are relative or logarithmic, negative on violation.
fn evaluate(lemma: Lemma, x: &[f64]) -> Result<(f64, CheckVerdict)> {
    let from = |pass: bool| {
        if pass {
            CheckVerdict::Pass
        } else {
            CheckVerdict::Violation
        }
    };
    Ok(match lemma {
        Lemma::Sequences => {
            let n = x[1] as usize;
            let a: Vec<Complex64> = (0..n)
                .map(|k| Complex64::new(x[2 + 2 * k], x[3 + 2 * k]))
                .collect();
            let r = check_sequence_inequalities(&a, x[0])?;
            (r.margins[0].min(r.margins[1]), from(r.pass))
        }
        Lemma::ConvLemma1 => {
            let r = check_conv_lemma_1(x[0], x[1], x[2], x[3], x[4], x[5])?;
            (r.margin, r.verdict)
        }
        Lemma::ConvLemma2 => {
            let r = check_conv_lemma_2(x[0], x[1], x[2], x[3], x[4], x[5])?;
            (r.margin, r.verdict)
        }
        Lemma::ConvLemma2d { d } => {
            let r = check_conv_lemma_2d(x[0], x[1], &x[2..2 + d], &x[2 + d..])?;
            (r.margin, r.verdict)
        }
        Lemma::Uc => {
            let d = x[1] as usize;
            let r = check_uc_inequality(x[0], &x[2..2 + d], &x[2 + d..])?;
            (r.margin, from(r.pass))
        }
        Lemma::CEpsS => {
            let q = c_eps_s_quadrature(x[0], x[1])?;
            let rel = (q.log_value - c_eps_s(x[0], x[1])?.ln()).exp_m1().abs();
            let v = if !q.converged {
                CheckVerdict::Inconclusive
            } else {
                from(rel <= 1e-9)
            };
            (1e-9 - rel, v)
        }
        Lemma::ConvBound | Lemma::Angular => unreachable!("deterministic checks"),
    })
}

/// Regime sweeps: margin `log(2 C_half / C_full)`; params `(p, ε, δ, C_half, C_full)`.
fn convbound_report(steps: usize, seed: u64) -> Result<SweepReport> {
    let (eps, x_max) = (1.0, 50.0);
    let mut rows = Vec::new();
    for &p in &[1.5, 1.0, 0.5] {
        let delta = 0.9 * eps;
        let r = convbound_sweep(eps, p, delta, 1, x_max, steps)?;
        let converged = r.points.iter().all(|q| q.converged);
        let margin = (2.0 * r.c_half / r.c_full).ln();
        let v = if !converged {
            CheckVerdict::Inconclusive
        } else if r.pass {
            CheckVerdict::Pass
        } else {
            CheckVerdict::Violation
        };
        rows.push((vec![p, eps, delta, r.c_half, r.c_full], margin, v));
    }
    Ok(summarize(Lemma::ConvBound, 3 * (steps + 1), seed, rows))
}

/// Margin `10⁻³ − |min max − 2^{−p/2}|`; params `(p, min max)`.
fn angular_report(samples: usize, seed: u64) -> SweepReport {
    let rows = [0.5, 1.0, 1.5, 2.0]
        .iter()
        .map(|&p| {
            let m = angular_min_max(p, samples);
            let margin = 1e-3 - (m - 2f64.powf(-0.5 * p)).abs();
            (
                vec![p, m],
                margin,
                if margin >= 0.0 {
                    CheckVerdict::Pass
                } else {
                    CheckVerdict::Violation
                },
            )
        })
        .collect();
    summarize(Lemma::Angular, 4, seed, rows)
}

fn summarize(
    lemma: Lemma,
    trials: usize,
    seed: u64,
    rows: Vec<(Vec<f64>, f64, CheckVerdict)>,
) -> SweepReport {
    let mut worst = (f64::INFINITY, Vec::new());
    let mut failures = Vec::new();
    let (mut violations, mut inconclusive) = (0, 0);
    for (x, m, v) in rows {
        if m < worst.0 {
            worst = (m, x.clone());
        }
        match v {
            CheckVerdict::Pass => {}
            CheckVerdict::Violation => violations += 1,
            CheckVerdict::Inconclusive => inconclusive += 1,
        }
        if v != CheckVerdict::Pass {
            failures.push(Failure {
                params: x,
                margin: m,
                verdict: v,
            });
        }
    }
    SweepReport {
        lemma: lemma.name(),
        trials,
        violations,
        inconclusive,
        worst_margin: worst.0,
        worst_params: worst.1,
        seed,
        failures,
    }
}

/// Seeded sweep; draws are generated sequentially and evaluated in parallel.
pub fn run_sweep(lemma: Lemma, cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let trials = if cfg.trials == 0 {
        lemma.default_trials()
    } else {
        cfg.trials
    };
    match lemma {
        Lemma::ConvBound => return convbound_report(trials, cfg.seed),
        Lemma::Angular => return Ok(angular_report(trials, cfg.seed)),
        _ => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let draws: Vec<Vec<f64>> = (0..trials).map(|_| draw(lemma, cfg, &mut rng)).collect();
    let results: Vec<(f64, CheckVerdict)> = draws
        .par_iter()
        .map(|x| evaluate(lemma, x))
        .collect::<Result<_>>()?;
    let rows = draws
        .into_iter()
        .zip(results)
        .map(|(x, (m, v))| (x, m, v))
        .collect();
    Ok(summarize(lemma, trials, cfg.seed, rows))
}
