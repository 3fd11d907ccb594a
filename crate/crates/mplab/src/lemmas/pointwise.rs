use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Both power-mean comparisons for `|a_k|` in the regime selected by `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceCheck {
    pub p: f64,
    pub n: usize,
    /// `RHS − LHS` of each inequality, normalised by the larger side.
    pub margins: [f64; 2],
    pub pass: bool,
}

/// `p ≥ 1`: `(Σ|a|)^p ≤ n^{p−1}Σ|a|^p` and `Σ|a|^p ≤ (Σ|a|)^p`;
/// `0 ≤ p < 1`: `Σ|a|^p ≤ n^{1−p}(Σ|a|)^p` and `(Σ|a|)^p ≤ Σ|a|^p`.
pub fn check_sequence_inequalities(a: &[Complex64], p: f64) -> Result<SequenceCheck> {
    if a.is_empty() || !(p >= 0.0) || !p.is_finite() {
        return Err(Error::Domain(format!(
            "need a non-empty sequence and p >= 0 (got n = {}, p = {p})",
            a.len()
        )));
    }
    let n = a.len() as f64;
    let sum: f64 = a.iter().map(|z| z.norm()).sum();
    let sum_p: f64 = a.iter().map(|z| z.norm().powf(p)).sum();
    let pow_sum = sum.powf(p);
    let pairs = if p >= 1.0 {
        [(pow_sum, n.powf(p - 1.0) * sum_p), (sum_p, pow_sum)]
    } else {
        [(sum_p, n.powf(1.0 - p) * pow_sum), (pow_sum, sum_p)]
    };
    let margins = pairs.map(|(l, r)| {
        let scale = l.abs().max(r.abs());
        if scale == 0.0 {
            0.0
        } else {
            (r - l) / scale
        }
    });
    Ok(SequenceCheck {
        p,
        n: a.len(),
        margins,
        pass: margins.iter().all(|&m| m >= -1e-12),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcCheck {
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `|w+z|^p + |w−z|^p − 2|w|^p ≥ p(p−1)|z|²(|w|+|z|)^{p−2}` for `1 < p < 2`; equality at `p = 2`,
/// nonnegativity at `p = 1`.
pub fn check_uc_inequality(p: f64, w: &[f64], z: &[f64]) -> Result<UcCheck> {
    if w.len() != z.len() {
        return Err(Error::Dimension("w and z must have the same length".into()));
    }
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} lies outside [1, 2]")));
    }
    let plus: Vec<f64> = w.iter().zip(z).map(|(a, b)| a + b).collect();
    let minus: Vec<f64> = w.iter().zip(z).map(|(a, b)| a - b).collect();
    let (nw, nz) = (norm(w), norm(z));
    let terms = [norm(&plus).powf(p), norm(&minus).powf(p), 2.0 * nw.powf(p)];
    let lhs = terms[0] + terms[1] - terms[2];
    let rhs = if p == 1.0 || nz == 0.0 {
        0.0
    } else {
        p * (p - 1.0) * nz * nz * (nw + nz).powf(p - 2.0)
    };
    let slack = 1e-8 * rhs.abs() + 64.0 * f64::EPSILON * (terms.iter().sum::<f64>() + rhs.abs());
    let margin = lhs - rhs;
    let pass = if p == 2.0 {
        margin.abs() <= slack
    } else {
        margin >= -slack
    };
    Ok(UcCheck {
        p,
        lhs,
        rhs,
        margin,
        pass,
    })
}
