use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::quad::{LogQuad, PeakedIntegral};
use crate::decay::psi_s;
use crate::error::{Error, Result};

/// Relative slack of every pass criterion.
pub const SLACK: f64 = 1e-8;
/// Integrands are truncated where they fall below `e^{−TAIL}` of their peak.
const TAIL: f64 = 14.0 * std::f64::consts::LN_10;

fn check_params(eps: f64, s: f64) -> Result<()> {
    if !(eps > 0.0) || !(s > 0.0) || !eps.is_finite() || !s.is_finite() {
        return Err(Error::Domain(format!(
            "need eps > 0 and s > 0 (got eps = {eps}, s = {s})"
        )));
    }
    Ok(())
}

/// `C(ε, s) = ∫ e^{−(ε/2)|u|^{1/s}} du = 2s(2/ε)^s Γ(s)`.
pub fn c_eps_s(eps: f64, s: f64) -> Result<f64> {
    check_params(eps, s)?;
    Ok(2.0 * s * (2.0 / eps).powf(s) * gamma(s))
}

/// `C(ε, s)` by adaptive quadrature.
pub fn c_eps_s_quadrature(eps: f64, s: f64) -> Result<LogQuad> {
    check_params(eps, s)?;
    let p = 1.0 / s;
    let energy = move |u: &[f64]| 0.5 * eps * u[0].abs().powf(p);
    let r = (2.0 * TAIL / eps).powf(s);
    let q = PeakedIntegral {
        energy: &energy,
        center: vec![0.0],
        width: vec![(2.0 / eps).powf(s)],
        lo: vec![-r],
        hi: vec![r],
        kinks: vec![vec![]],
    }
    .log_integral(1e-13);
    Ok(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckVerdict {
    Pass,
    Violation,
    Inconclusive,
}

/// Outcome of one `LHS ≤ RHS` comparison, carried in the log domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub verdict: CheckVerdict,
    pub log_lhs: f64,
    pub log_rhs: f64,
    /// `log RHS − log LHS`; negative on a violation.
    pub margin: f64,
    pub rel_error: f64,
}

impl LemmaCheck {
    pub fn pass(&self) -> bool {
        self.verdict == CheckVerdict::Pass
    }

    pub fn lhs(&self) -> f64 {
        self.log_lhs.exp()
    }

    pub fn rhs(&self) -> f64 {
        self.log_rhs.exp()
    }
}

fn decide(q: LogQuad, log_rhs: f64) -> Option<CheckVerdict> {
    let margin = log_rhs + SLACK.ln_1p() - q.log_value;
    let err = 2.0 * q.rel_error;
    if !q.converged || !q.log_value.is_finite() {
        None
    } else if margin >= err {
        Some(CheckVerdict::Pass)
    } else if margin < -err {
        Some(CheckVerdict::Violation)
    } else {
        None
    }
}

/// Brackets `LHS` with successively tighter quadrature until the verdict is decided.
fn compare(mut lhs: impl FnMut(f64) -> LogQuad, log_rhs: f64, tols: &[f64]) -> LemmaCheck {
    let mut last = None;
    for &t in tols {
        let q = lhs(t);
        let v = decide(q, log_rhs);
        last = Some((q, v));
        if v.is_some() {
            break;
        }
    }
    let (q, v) = last.expect("at least one tolerance");
    let v = v.unwrap_or(if !q.converged || !q.log_value.is_finite() {
        CheckVerdict::Inconclusive
    } else if q.log_value <= log_rhs + SLACK.ln_1p() {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Violation
    });
    LemmaCheck {
        verdict: v,
        log_lhs: q.log_value,
        log_rhs,
        margin: log_rhs - q.log_value,
        rel_error: q.rel_error,
    }
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Coordinate-wise golden-section descent inside a box, started from the best candidate.
pub(crate) fn minimize_in_box(
    energy: &dyn Fn(&[f64]) -> f64,
    candidates: &[Vec<f64>],
    lo: &[f64],
    hi: &[f64],
) -> Vec<f64> {
    let mut best = candidates
        .iter()
        .min_by(|a, b| energy(a).total_cmp(&energy(b)))
        .expect("non-empty candidates")
        .clone();
    let n = best.len();
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..8 {
        for k in 0..n {
            let (mut a, mut b) = (lo[k], hi[k]);
            let mut w = best.clone();
            let mut f = |x: f64| {
                w[k] = x;
                energy(&w)
            };
            let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
            let (mut fc, mut fd) = (f(c), f(d));
            for _ in 0..100 {
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - g * (b - a);
                    fc = f(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + g * (b - a);
                    fd = f(d);
                }
                if (b - a).abs() <= 1e-13 * (1.0 + a.abs() + b.abs()) {
                    break;
                }
            }
            let x = 0.5 * (a + b);
            let mut trial = best.clone();
            trial[k] = x;
            if energy(&trial) < energy(&best) {
                best = trial;
            }
        }
    }
    best
}

/// Distance from `c` along axis `k` at which the energy has risen by one unit (smaller side).
pub(crate) fn peak_width_in_box(
    energy: &dyn Fn(&[f64]) -> f64,
    c: &[f64],
    k: usize,
    span: f64,
) -> f64 {
    let e0 = energy(c);
    let side = |dir: f64| {
        let mut w = c.to_vec();
        let mut h = 1e-8 * (1.0 + span);
        while h < span {
            w[k] = c[k] + dir * h;
            if energy(&w) - e0 >= 1.0 {
                return h;
            }
            h *= 2.0;
        }
        span
    };
    side(1.0).min(side(-1.0)).max(1e-10)
}

struct Problem<'a> {
    energy: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    candidates: Vec<Vec<f64>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    kinks: Vec<Vec<f64>>,
}

impl Problem<'_> {
    fn integral(&self, tol: f64) -> LogQuad {
        let c = minimize_in_box(self.energy, &self.candidates, &self.lo, &self.hi);
        let width: Vec<f64> = (0..c.len())
            .map(|k| peak_width_in_box(self.energy, &c, k, self.hi[k] - self.lo[k]))
            .collect();
        PeakedIntegral {
            energy: self.energy,
            center: c,
            width,
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            kinks: self.kinks.clone(),
        }
        .log_integral(tol)
    }
}

fn check_lemma_params(s: f64, a: f64, b: f64, sigma: f64, eps: f64) -> Result<()> {
    if !(s >= 0.5) || !(a >= 0.0) || !(b >= 0.0) || !(sigma >= 1.0) || !(eps > 0.0) {
        return Err(Error::Domain(format!(
            "lemma hypotheses need s >= 1/2, a, b >= 0, sigma >= 1, eps > 0 (got s={s}, a={a}, b={b}, sigma={sigma}, eps={eps})"
        )));
    }
    Ok(())
}

/// `∫ e^{−ε(a+|σ⁻¹u−v|)^{1/s}} e^{−ε(b+|u|)^{1/s}} du` against its two-term bound.
pub fn check_conv_lemma_1(
    s: f64,
    a: f64,
    b: f64,
    sigma: f64,
    v: f64,
    eps: f64,
) -> Result<LemmaCheck> {
    check_lemma_params(s, a, b, sigma, eps)?;
    let p = 1.0 / s;
    let energy =
        move |u: &[f64]| eps * ((a + (u[0] / sigma - v).abs()).powf(p) + (b + u[0].abs()).powf(p));
    let kinks = vec![0.0, sigma * v];
    let e_cand = energy(&[0.0]).min(energy(&[sigma * v]));
    let r = (e_cand / eps + TAIL / eps).powf(s);
    let lo = (-(r - b).max(0.0)).max(sigma * (v - (r - a).max(0.0)));
    let hi = (r - b).max(0.0).min(sigma * (v + (r - a).max(0.0)));
    let prob = Problem {
        energy: &energy,
        candidates: vec![vec![0.0], vec![sigma * v]],
        lo: vec![lo],
        hi: vec![hi],
        kinks: vec![kinks],
    };
    let c = c_eps_s(eps, s)?.ln();
    let t1 = -eps * 2f64.powf(-p) * (a + v.abs()).powf(p) - 0.5 * eps * b.powf(p);
    let t2 = -eps * 2f64.powf(-(p + 1.0)) * (b + v.abs()).powf(p) - eps * a.powf(p);
    Ok(compare(
        |t| prob.integral(t),
        c + log_sum_exp(t1, t2),
        &[1e-11],
    ))
}

/// `∫ e^{−ε(a+|u−v|)^{1/s}} e^{−ε(b+σ⁻¹|u|)^{1/s}} du` against its two-term bound.
pub fn check_conv_lemma_2(
    s: f64,
    a: f64,
    b: f64,
    sigma: f64,
    v: f64,
    eps: f64,
) -> Result<LemmaCheck> {
    check_lemma_params(s, a, b, sigma, eps)?;
    let p = 1.0 / s;
    let energy =
        move |u: &[f64]| eps * ((a + (u[0] - v).abs()).powf(p) + (b + u[0].abs() / sigma).powf(p));
    let e_cand = energy(&[0.0]).min(energy(&[v]));
    let r = (e_cand / eps + TAIL / eps).powf(s);
    let lo = (-sigma * (r - b).max(0.0)).max(v - (r - a).max(0.0));
    let hi = (sigma * (r - b).max(0.0)).min(v + (r - a).max(0.0));
    let prob = Problem {
        energy: &energy,
        candidates: vec![vec![0.0], vec![v]],
        lo: vec![lo],
        hi: vec![hi],
        kinks: vec![vec![0.0, v]],
    };
    let c = c_eps_s(eps, s)?.ln();
    let t1 = -eps * 2f64.powf(-(p + 1.0)) * (a + v.abs()).powf(p) - 0.5 * eps * b.powf(p);
    let t2 = -eps * 2f64.powf(-p) * (b + v.abs() / sigma).powf(p) - 0.5 * eps * a.powf(p);
    Ok(compare(
        |t| prob.integral(t),
        c + log_sum_exp(t1, t2),
        &[1e-11],
    ))
}

fn d_second(sigma: &[f64], v: &[f64]) -> f64 {
    let d = sigma.len();
    (0..d)
        .map(|j| v[j].powi(2) + (v[d + j] / sigma[j]).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `log((2/d)^d C(ε,s)^{2d} e^{−ψ_s(ε)|D″v|^{1/s}})`.
pub fn lemma_2d_log_rhs(s: f64, eps: f64, sigma: &[f64], v: &[f64]) -> Result<f64> {
    let d = sigma.len();
    let df = d as f64;
    Ok(df * (2.0 / df).ln() + 2.0 * df * c_eps_s(eps, s)?.ln()
        - psi_s(eps, s, d)? * d_second(sigma, v).powf(1.0 / s))
}

/// Product of the one-axis corollary bounds `2C(ε_j, s) e^{−ε_j 2^{−(1/s+1)}|(D″v)_j|^{1/s}}`,
/// with `ε_j` the per-axis rate after the norm comparisons, collapsed to `|D″v|`.
pub fn lemma_2d_assembled_log_rhs(s: f64, eps: f64, sigma: &[f64], v: &[f64]) -> Result<f64> {
    check_params(eps, s)?;
    let d = sigma.len();
    let (p, n) = (1.0 / s, 2.0 * d as f64);
    let (eps_axis, psi) = if s < 1.0 {
        let e = eps * n.powf(-0.5 * p);
        (e, e * 2f64.powf(-(p + 1.0)) * n.powf(1.0 - p))
    } else {
        let e = eps * n.powf(0.5 * p - 1.0);
        (e, e * 2f64.powf(-(p + 1.0)))
    };
    Ok(n * (2.0 * c_eps_s(eps_axis, s)?).ln() - psi * d_second(sigma, v).powf(p))
}

fn lemma_2d_problem(
    s: f64,
    eps: f64,
    sigma: &[f64],
    v: &[f64],
) -> Result<(impl Fn(&[f64]) -> f64 + Sync, Vec<f64>, f64)> {
    let d = sigma.len();
    if d == 0 || v.len() != 2 * d {
        return Err(Error::Dimension(format!(
            "need v of length 2d = {} (got {})",
            2 * d,
            v.len()
        )));
    }
    if !(s >= 0.5) || !(eps > 0.0) || sigma.iter().any(|&x| !(x >= 1.0)) {
        return Err(Error::Domain(
            "need s >= 1/2, eps > 0 and every sigma_j >= 1".into(),
        ));
    }
    let p = 1.0 / s;
    // w = D″u turns the integral into det Σ ∫ e^{−ε(|Mw − v|^p + |w|^p)} dw with M = Σ⁻¹ ⊕ Σ.
    let m: Vec<f64> = (0..2 * d)
        .map(|k| if k < d { 1.0 / sigma[k] } else { sigma[k - d] })
        .collect();
    let vv = v.to_vec();
    let mm = m.clone();
    let energy = move |w: &[f64]| {
        let a: f64 = w
            .iter()
            .zip(&mm)
            .zip(&vv)
            .map(|((x, mk), vk)| (mk * x - vk).powi(2))
            .sum();
        let b: f64 = w.iter().map(|x| x * x).sum();
        eps * (a.powf(0.5 * p) + b.powf(0.5 * p))
    };
    let log_det: f64 = sigma.iter().map(|x| x.ln()).sum();
    Ok((energy, m, log_det))
}

fn lemma_2d_lhs(s: f64, eps: f64, sigma: &[f64], v: &[f64]) -> Result<impl FnMut(f64) -> LogQuad> {
    let (energy, m, log_det) = lemma_2d_problem(s, eps, sigma, v)?;
    let n = v.len();
    let kink: Vec<f64> = (0..n).map(|k| v[k] / m[k]).collect();
    let e_cand = energy(&vec![0.0; n]).min(energy(&kink));
    let r = (e_cand / eps + TAIL / eps).powf(s);
    let lo: Vec<f64> = (0..n).map(|k| (-r).max((v[k] - r) / m[k])).collect();
    let hi: Vec<f64> = (0..n).map(|k| r.min((v[k] + r) / m[k])).collect();
    let kinks: Vec<Vec<f64>> = (0..n).map(|k| vec![0.0, kink[k]]).collect();
    let candidates = vec![vec![0.0; n], kink];
    let f = move |t: f64| {
        let prob = Problem {
            energy: &energy,
            candidates: candidates.clone(),
            lo: lo.clone(),
            hi: hi.clone(),
            kinks: kinks.clone(),
        };
        let mut q = prob.integral(t);
        q.log_value += log_det;
        q
    };
    Ok(f)
}

/// `∫_{ℝ^{2d}} e^{−ε|D′u−v|^{1/s}} e^{−ε|D″u|^{1/s}} du` against the stated bound; `d ≤ 2` by
/// nested quadrature, larger `d` by Monte Carlo (see [`check_conv_lemma_2d_monte_carlo`]).
pub fn check_conv_lemma_2d(s: f64, eps: f64, sigma: &[f64], v: &[f64]) -> Result<LemmaCheck> {
    let log_rhs = lemma_2d_log_rhs(s, eps, sigma, v)?;
    check_lemma_2d_against(s, eps, sigma, v, log_rhs)
}

/// The same integral against [`lemma_2d_assembled_log_rhs`].
pub fn check_conv_lemma_2d_assembled(
    s: f64,
    eps: f64,
    sigma: &[f64],
    v: &[f64],
) -> Result<LemmaCheck> {
    let log_rhs = lemma_2d_assembled_log_rhs(s, eps, sigma, v)?;
    check_lemma_2d_against(s, eps, sigma, v, log_rhs)
}

fn check_lemma_2d_against(
    s: f64,
    eps: f64,
    sigma: &[f64],
    v: &[f64],
    log_rhs: f64,
) -> Result<LemmaCheck> {
    if sigma.len() > 2 {
        let mc = check_conv_lemma_2d_monte_carlo(s, eps, sigma, v, 200_000, 7)?;
        let verdict = if mc.log_ci.1 <= log_rhs + SLACK.ln_1p() {
            CheckVerdict::Pass
        } else if mc.log_ci.0 > log_rhs + SLACK.ln_1p() {
            CheckVerdict::Violation
        } else {
            CheckVerdict::Inconclusive
        };
        return Ok(LemmaCheck {
            verdict,
            log_lhs: mc.log_estimate,
            log_rhs,
            margin: log_rhs - mc.log_estimate,
            rel_error: mc.log_ci.1 - mc.log_estimate,
        });
    }
    let lhs = lemma_2d_lhs(s, eps, sigma, v)?;
    let tols: &[f64] = if sigma.len() == 1 {
        &[1e-2, 1e-10]
    } else {
        &[0.5, 1e-3, 1e-8]
    };
    Ok(compare(lhs, log_rhs, tols))
}

/// Monte Carlo estimate of the two-block integral with a 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub log_estimate: f64,
    pub log_ci: (f64, f64),
    pub samples: usize,
    pub seed: u64,
}

pub fn check_conv_lemma_2d_monte_carlo(
    s: f64,
    eps: f64,
    sigma: &[f64],
    v: &[f64],
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    use rand::{Rng, SeedableRng};
    let (energy, m, log_det) = lemma_2d_problem(s, eps, sigma, v)?;
    let n = v.len();
    let kink: Vec<f64> = (0..n).map(|k| v[k] / m[k]).collect();
    let e_cand = energy(&vec![0.0; n]).min(energy(&kink));
    let r = (e_cand / eps + TAIL / eps).powf(s);
    let lo: Vec<f64> = (0..n).map(|k| (-r).max((v[k] - r) / m[k])).collect();
    let hi: Vec<f64> = (0..n).map(|k| r.min((v[k] + r) / m[k])).collect();
    let c = minimize_in_box(&energy, &[vec![0.0; n], kink], &lo, &hi);
    let shift = energy(&c);
    let log_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| (b - a).ln()).sum();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![0.0; n];
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..samples {
        for k in 0..n {
            w[k] = rng.gen_range(lo[k]..hi[k]);
        }
        let f = (shift - energy(&w)).exp();
        sum += f;
        sum2 += f * f;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let se = ((sum2 / nf - mean * mean).max(0.0) / nf).sqrt();
    let base = log_det + log_vol - shift;
    let lower = if mean > 1.96 * se {
        (mean - 1.96 * se).ln() + base
    } else {
        f64::NEG_INFINITY
    };
    Ok(MonteCarloEstimate {
        log_estimate: mean.ln() + base,
        log_ci: (lower, (mean + 1.96 * se).ln() + base),
        samples,
        seed,
    })
}
