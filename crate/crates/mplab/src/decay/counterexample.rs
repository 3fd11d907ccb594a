use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tf::{fourier_transform, gaussian_stft_magnitude, stft, GaussianChirp, Grid};

/// Sampling grid of the report: witnesses are sought up to `L/4`.
const EXTENT: f64 = 24.0;
const POINTS: usize = 512;
/// Calibration region for the constants.
const CALIBRATION_RADIUS: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub xi: f64,
    /// Exact `|V_f f|` at the witness.
    pub value: f64,
    /// Numerical `|V_f f|` at the witness, from the sampled field.
    pub numeric: f64,
    /// `|V_f f| / (C e^{−(a/2)x² − (b/2)ξ²})` with the calibrated `C`.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub a: f64,
    /// Decay rate of `|f̂|`.
    pub b: f64,
    /// `π²/(a² + π²)`, the commonly stated rate for this chirp; equal to `b` only at `a = 1`.
    pub b_stated: f64,
    /// Max relative deviation of the numerical `|f̂|` from the closed form where it exceeds `1e−10`.
    pub fourier_residual: f64,
    /// Calibrated constant of the conjectured `(a/2, b/2)` bound.
    pub conjectured_c: f64,
    pub witness: Witness,
    pub conjectured_violated: bool,
    /// Calibrated constant of the `(a/4, b/4)` bound.
    pub quarter_c: f64,
    /// Max over the whole grid of `|V_f f| / (C e^{−(a/4)x² − (b/4)ξ²})`.
    pub quarter_worst: f64,
    pub quarter_holds: bool,
    pub extent: f64,
    pub points: usize,
}

/// `log |V_f f| − log e^{−p x² − q ξ²}` for the chirped Gaussian with `c = 1`.
fn log_ratio(a: f64, x: f64, xi: f64, p: f64, q: f64) -> f64 {
    let v = gaussian_stft_magnitude(a, 1.0, &[x], &[xi]).expect("a > 0");
    v.ln() + p * x * x + q * xi * xi
}

/// Exact moduli and STFT of `e^{iπ|x|²}e^{−a|x|²}`, tested against the `(a/2, b/2)` and `(a/4, b/4)` envelopes.
pub fn counterexample_report(a: f64) -> Result<CounterexampleReport> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!(
            "Gaussian rate a = {a} must be positive"
        )));
    }
    let chirp = GaussianChirp::new(a, 1.0)?;
    let b = chirp.spectral_rate();
    let grid = Grid::line(EXTENT, POINTS)?;
    let f = chirp.sample(&grid);
    let fh = fourier_transform(&f);
    let dual = fh.grid().clone();
    let mut fourier_residual = 0.0f64;
    for (k, v) in fh.values().iter().enumerate() {
        let exact = chirp.fourier_magnitude(&dual.point(k));
        if exact > 1e-10 {
            fourier_residual = fourier_residual.max((v.norm() - exact).abs() / exact);
        }
    }
    let xs = grid.coords(0);
    let xis = dual.coords(0);
    let calib = |p: f64, q: f64| {
        let mut m = f64::NEG_INFINITY;
        for &x in &xs {
            for &xi in &xis {
                if (x * x + xi * xi).sqrt() <= CALIBRATION_RADIUS {
                    m = m.max(log_ratio(a, x, xi, p, q));
                }
            }
        }
        m
    };
    let (p2, q2) = (a / 2.0, b / 2.0);
    let log_c2 = calib(p2, q2);
    let step = grid.spacing(0).max(dual.spacing(0));
    let lattice = (EXTENT / 4.0 / step).floor() as i64;
    let mut best: Option<(f64, f64)> = None;
    for k in -lattice..=lattice {
        let x = k as f64 * step;
        let r = (2.0f64).sqrt() * x.abs();
        if r <= CALIBRATION_RADIUS
            || r > EXTENT / 4.0
            || grid.index_of(0, x).is_none()
            || dual.index_of(0, x).is_none()
        {
            continue;
        }
        let e = log_ratio(a, x, x, p2, q2) - log_c2;
        if best.map_or(true, |(_, be)| e > be) {
            best = Some((x, e));
        }
    }
    let (wx, we) =
        best.ok_or_else(|| Error::Domain("no on-grid witness candidate on the diagonal".into()))?;
    let numeric = stft(&f, &f, &[vec![wx, wx]])?[0].norm();
    let witness = Witness {
        x: wx,
        xi: wx,
        value: gaussian_stft_magnitude(a, 1.0, &[wx], &[wx])?,
        numeric,
        excess: we.exp(),
    };
    let (p4, q4) = (a / 4.0, b / 4.0);
    let log_c4 = calib(p4, q4);
    let mut worst4 = f64::NEG_INFINITY;
    for &x in &xs {
        for &xi in &xis {
            worst4 = worst4.max(log_ratio(a, x, xi, p4, q4) - log_c4);
        }
    }
    Ok(CounterexampleReport {
        a,
        b,
        b_stated: PI * PI / (a * a + PI * PI),
        fourier_residual,
        conjectured_c: log_c2.exp(),
        witness,
        conjectured_violated: we > 0.0,
        quarter_c: log_c4.exp(),
        quarter_worst: worst4.exp(),
        quarter_holds: worst4 <= 1e-12,
        extent: EXTENT,
        points: POINTS,
    })
}
