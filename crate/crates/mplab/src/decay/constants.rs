use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of an open supremum used when a bound is exercised numerically.
pub const OPEN_FRACTION: f64 = 0.99;

/// Order `s` and rate `ε` of a Gelfand–Shilov class `𝒮^s_{s,ε}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GSClass {
    pub s: f64,
    pub eps: f64,
}

impl GSClass {
    pub fn new(s: f64, eps: f64) -> Result<Self> {
        check_s(s)?;
        check_eps(eps)?;
        Ok(Self { s, eps })
    }

    /// Gaussian regime below the critical rate `π`.
    pub fn subcritical(&self) -> bool {
        self.s == 0.5 && self.eps < std::f64::consts::PI
    }
}

/// A rate bound: `attained` means the value itself is allowed, otherwise it is an open supremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    pub attained: bool,
}

impl Threshold {
    fn closed(value: f64) -> Self {
        Self {
            value,
            attained: true,
        }
    }

    fn open(value: f64) -> Self {
        Self {
            value,
            attained: false,
        }
    }

    /// The value to test with: the bound itself, or `0.99` of an open supremum.
    pub fn usable(&self) -> f64 {
        if self.attained {
            self.value
        } else {
            OPEN_FRACTION * self.value
        }
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(s >= 0.5) || !s.is_finite() {
        return Err(Error::Domain(format!("order s = {s} must be >= 1/2")));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("rate eps = {eps} must be positive")));
    }
    Ok(())
}

fn check_d(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::Domain("dimension d must be >= 1".into()));
    }
    Ok(())
}

fn check_sigma_min(sigma_min: f64) -> Result<()> {
    if !(sigma_min > 0.0 && sigma_min <= 1.0) {
        return Err(Error::Domain(format!(
            "sigma_min = {sigma_min} must lie in (0, 1]"
        )));
    }
    Ok(())
}

/// Admissible STFT decay rate `δ` for windows and signals in `𝒮^s_{s,ε}`.
pub fn delta_threshold_stft(s: f64, eps: f64) -> Result<Threshold> {
    check_s(s)?;
    check_eps(eps)?;
    Ok(if s == 0.5 {
        Threshold::closed(eps / 4.0)
    } else if s < 1.0 {
        Threshold::open(2f64.powf(1.0 - 1.5 / s) * eps)
    } else {
        Threshold::open(2f64.powf(-0.5 / s) * eps)
    })
}

/// Rate `δ(s, d)` of the Gabor-matrix spreading envelope.
pub fn delta_sd(s: f64, eps: f64, d: usize) -> Result<Threshold> {
    check_s(s)?;
    check_eps(eps)?;
    check_d(d)?;
    let d = d as f64;
    Ok(if s == 0.5 {
        Threshold::closed(eps / d)
    } else if s < 1.0 {
        Threshold::open(d.powf(-0.5 / s) * 2f64.powf(2.0 - 1.0 / s) * eps)
    } else {
        Threshold::open(d.powf(-0.5) * 2f64.powf(-3.5 + 0.5 / s) * eps)
    })
}

/// Exponent `ψ_s(ε)` of the two-block convolution bound, as stated.
pub fn psi_s(eps: f64, s: f64, d: usize) -> Result<f64> {
    check_s(s)?;
    check_eps(eps)?;
    check_d(d)?;
    let two_d = 2.0 * d as f64;
    Ok(if s < 1.0 {
        4.0 * eps / two_d.powf(0.5 / s)
    } else {
        eps / (4.0 * two_d.sqrt())
    })
}

/// Evolved rate `ε′` together with the branch it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Confinement {
    pub s: f64,
    pub eps: f64,
    pub sigma_min: f64,
    pub d: usize,
    pub eps_prime: f64,
    pub attained: bool,
    pub branch: String,
}

impl Confinement {
    fn new(s: f64, eps: f64, sigma_min: f64, d: usize, t: Threshold, branch: &str) -> Self {
        Self {
            s,
            eps,
            sigma_min,
            d,
            eps_prime: t.value,
            attained: t.attained,
            branch: branch.into(),
        }
    }

    pub fn threshold(&self) -> Threshold {
        Threshold {
            value: self.eps_prime,
            attained: self.attained,
        }
    }
}

fn s_ge_one_rate(s: f64, eps: f64, sigma_min: f64, d: f64) -> f64 {
    (4.0 * sigma_min).powf(1.0 / s) * 2f64.powf(-0.5 / s) * eps / (16.0 * (2.0 * d).sqrt())
}

/// Rate `ε′` with `û₀ ∈ 𝒮^s_{s,ε} ⇒ Ŝu₀ ∈ 𝒮^s_{s,ε′}`, by the case analysis on `s` and `σ_min`.
pub fn confinement_epsilon(s: f64, eps: f64, sigma_min: f64, d: usize) -> Result<Confinement> {
    check_s(s)?;
    check_eps(eps)?;
    check_d(d)?;
    check_sigma_min(sigma_min)?;
    let df = d as f64;
    let c = |t, b| Confinement::new(s, eps, sigma_min, d, t, b);
    Ok(if s == 0.5 {
        if d >= 2 {
            c(
                Threshold::closed(2.0 / df * sigma_min * sigma_min * eps),
                "gaussian-dimensional",
            )
        } else if sigma_min <= std::f64::consts::FRAC_1_SQRT_2 {
            c(
                Threshold::closed(2.0 * sigma_min * sigma_min * eps),
                "gaussian-contracted",
            )
        } else {
            c(Threshold::closed(eps), "gaussian-unchanged")
        }
    } else if s < 1.0 {
        if sigma_min <= 2f64.powf(-s) * df.sqrt() {
            let v = df.powf(-0.5 / s) * 2f64.powf(1.0 - 1.0 / s) * sigma_min.powf(1.0 / s) * eps;
            c(Threshold::open(v), "convex-contracted")
        } else {
            c(Threshold::closed(eps), "convex-unchanged")
        }
    } else {
        c(
            Threshold::open(s_ge_one_rate(s, eps, sigma_min, df)),
            "concave",
        )
    })
}

/// `ε(t) = 2^{−1+1/s} δ(s, d) σ_min^{1/s}` with the same strictness as `δ(s, d)`.
pub fn corollary_epsilon(s: f64, eps: f64, sigma_min: f64, d: usize) -> Result<Threshold> {
    check_sigma_min(sigma_min)?;
    let delta = delta_sd(s, eps, d)?;
    Ok(Threshold {
        value: 2f64.powf(-1.0 + 1.0 / s) * delta.value * sigma_min.powf(1.0 / s),
        attained: delta.attained,
    })
}

/// Gelfand–Shilov rate of `V_g(Ŝf)` on the doubled phase space.
pub fn stft_class_report(s: f64, eps: f64, sigma_min: f64, d: usize) -> Result<Confinement> {
    check_s(s)?;
    check_eps(eps)?;
    check_d(d)?;
    check_sigma_min(sigma_min)?;
    let df = d as f64;
    let c = |t, b| Confinement::new(s, eps, sigma_min, d, t, b);
    Ok(if s == 0.5 {
        c(
            Threshold::closed(eps * sigma_min * sigma_min / df),
            "gaussian",
        )
    } else if s < 1.0 {
        if sigma_min <= 2f64.powf(1.0 - 2.0 * s) * df.sqrt() {
            let v = df.powf(-0.5 / s) * 2f64.powf(1.0 - 1.0 / s) * sigma_min.powf(1.0 / s) * eps;
            c(Threshold::open(v), "convex-contracted")
        } else {
            c(Threshold::closed(eps), "convex-unchanged")
        }
    } else {
        c(
            Threshold::open(s_ge_one_rate(s, eps, sigma_min, df)),
            "concave",
        )
    })
}

/// Largest `b` with `k·max(|x|^p, |y|^p) ≥ b·(x² + y²)^{p/2}`: `b = 2^{−p/2} k`.
pub fn combine_bounds(k: f64, m: f64, p: f64) -> Result<f64> {
    if !(k > 0.0) || !(m >= 0.0) || !(p > 0.0) {
        return Err(Error::Domain(format!(
            "combine_bounds needs k > 0, m >= 0, p > 0 (got {k}, {m}, {p})"
        )));
    }
    Ok(2f64.powf(-0.5 * p) * k)
}

/// `min_θ max(|cos θ|^p, |sin θ|^p)` on `samples` equispaced angles of the first quadrant.
pub fn angular_min_max(p: f64, samples: usize) -> f64 {
    (0..=samples)
        .map(|k| {
            let th = std::f64::consts::FRAC_PI_2 * k as f64 / samples as f64;
            th.cos().abs().powf(p).max(th.sin().abs().powf(p))
        })
        .fold(f64::INFINITY, f64::min)
}
