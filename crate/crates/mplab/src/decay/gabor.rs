use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::constants::delta_sd;
use super::fit::NOISE_FLOOR;
use crate::error::{Error, Result};
use crate::flows::FlowSpec;
use crate::symplectic::{spreading_matrix, EulerDecomposition, SymplecticMatrix};
use crate::tf::{stft, tf_shift, Grid, MetaplecticPlan, SampledField};
use crate::util::fmt_g17;

/// `⟨Ŝπ(z_i)g, π(w_j)γ⟩`, row-major in `i`.
#[derive(Debug, Clone)]
pub struct GaborMatrixGrid {
    pub zgrid: Vec<Vec<f64>>,
    pub wgrid: Vec<Vec<f64>>,
    pub values: Vec<Complex64>,
    pub spec: FlowSpec,
    pub symplectic: SymplecticMatrix,
    pub decomposition: EulerDecomposition,
    pub route: String,
    pub window_norms: (f64, f64),
}

impl GaborMatrixGrid {
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.wgrid.len() + j]
    }

    /// Row `i` maximiser of `|values|` over `w`.
    pub fn peak(&self, i: usize) -> &[f64] {
        let nw = self.wgrid.len();
        let row = &self.values[i * nw..(i + 1) * nw];
        let j = (0..nw)
            .max_by(|&a, &b| row[a].norm().total_cmp(&row[b].norm()))
            .expect("non-empty w grid");
        &self.wgrid[j]
    }

    /// `|values|` as a `z × w` CSV matrix.
    pub fn write_magnitude_csv(&self, w: &mut impl Write) -> Result<()> {
        let nw = self.wgrid.len();
        for row in self.values.chunks(nw) {
            let line: Vec<String> = row.iter().map(|v| fmt_g17(v.norm())).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Square lattice `{(x, ξ)}` in `d = 1` with `2·half/step + 1` points per axis.
pub fn phase_lattice(half: f64, step: f64) -> Vec<Vec<f64>> {
    let m = (half / step).round() as i64;
    let mut out = Vec::new();
    for i in -m..=m {
        for j in -m..=m {
            out.push(vec![i as f64 * step, j as f64 * step]);
        }
    }
    out
}

/// Clearance kept between a packet centre and the edge of the sampled phase-space box.
const PACKET_CLEARANCE: f64 = 3.0;

fn check_inside(grid: &Grid, p: &[f64]) -> Result<()> {
    let d = grid.dim();
    if p.len() != 2 * d {
        return Err(Error::Dimension(format!(
            "phase-space point has {} coordinates, expected {}",
            p.len(),
            2 * d
        )));
    }
    for a in 0..d {
        let half_x = 0.5 * grid.spacing(a) * grid.n(a) as f64;
        let half_xi = 0.5 / grid.spacing(a);
        if p[a].abs() + PACKET_CLEARANCE > half_x || p[d + a].abs() + PACKET_CLEARANCE > half_xi {
            return Err(Error::Domain(format!(
                "packet centre {p:?} is within {PACKET_CLEARANCE} of the edge of the box \
                 |x| < {half_x}, |xi| < {half_xi}; enlarge L or n"
            )));
        }
    }
    Ok(())
}

pub fn gabor_matrix(
    spec: &FlowSpec,
    g: &SampledField,
    gamma: &SampledField,
    zgrid: &[Vec<f64>],
    wgrid: &[Vec<f64>],
) -> Result<GaborMatrixGrid> {
    g.same_grid(gamma)?;
    let (ng, nga) = (g.norm(), gamma.norm());
    if ng == 0.0 || nga == 0.0 {
        return Err(Error::Domain("windows must be nonzero".into()));
    }
    let symplectic = spec.matrix()?;
    if symplectic.dim() != g.grid().dim() {
        return Err(Error::Dimension(
            "flow dimension differs from the grid dimension".into(),
        ));
    }
    let (decomposition, _) = spec.euler()?;
    for z in zgrid {
        check_inside(g.grid(), z)?;
    }
    for z in zgrid {
        let sz = symplectic.matrix() * DVector::from_column_slice(z);
        check_inside(g.grid(), sz.as_slice())?;
    }
    for w in wgrid {
        check_inside(g.grid(), w)?;
    }
    let plan = MetaplecticPlan::from_flow(spec, g.grid())?;
    let rows: Vec<Vec<Complex64>> = zgrid
        .par_iter()
        .map(|z| {
            let packet = plan.apply(&tf_shift(g, z)?)?;
            stft(&packet, gamma, wgrid)
        })
        .collect::<Result<_>>()?;
    Ok(GaborMatrixGrid {
        zgrid: zgrid.to_vec(),
        wgrid: wgrid.to_vec(),
        values: rows.into_iter().flatten().collect(),
        spec: spec.clone(),
        symplectic,
        decomposition,
        route: plan.route().into(),
        window_norms: (ng, nga),
    })
}

/// One Gabor-matrix entry measured against the spreading envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginCell {
    pub i: usize,
    pub j: usize,
    pub r: f64,
    /// `log(|v| det(Σ)^{1/2} e^{δ r^{1/s}})`.
    pub log_ratio: f64,
}

/// `r_ij = |D′U(w_j − S z_i)|` and the log envelope ratio, for entries above the noise floor.
pub fn spreading_cells(
    gm: &GaborMatrixGrid,
    dec: &EulerDecomposition,
    s: f64,
    delta: f64,
) -> Vec<MarginCell> {
    let m = spreading_matrix(dec);
    let sm = gm.symplectic.matrix();
    let half_log_det = 0.5 * dec.det_sigma().ln();
    let n = sm.nrows();
    let sz: Vec<DVector<f64>> = gm
        .zgrid
        .iter()
        .map(|z| sm * DVector::from_column_slice(z))
        .collect();
    let mut out = Vec::new();
    for (i, szi) in sz.iter().enumerate() {
        for (j, w) in gm.wgrid.iter().enumerate() {
            let v = gm.at(i, j).norm();
            if !(v > NOISE_FLOOR) {
                continue;
            }
            let u = DVector::from_iterator(n, (0..n).map(|k| w[k] - szi[k]));
            let r = (&m * u).norm();
            out.push(MarginCell {
                i,
                j,
                r,
                log_ratio: v.ln() + half_log_det + delta * r.powf(1.0 / s),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadingReport {
    pub s: f64,
    pub eps: f64,
    pub delta: f64,
    /// Max-ratio constant on the base grid.
    #[serde(rename = "C")]
    pub c: f64,
    /// Max-ratio constants on each refined grid.
    pub c_refined: Vec<f64>,
    /// Max-ratio constant over the inner half of the sampled `r` range, base grid.
    pub c_core: f64,
    /// `min log(C_core e^{−δ r^{1/s}} det(Σ)^{−1/2} / |v|)` over all base cells.
    #[serde(rename = "residual")]
    pub worst_margin: f64,
    pub samples: usize,
    pub stable: bool,
    pub bounded: bool,
    pub branch: String,
    pub pass: bool,
}

struct Fitted {
    c: f64,
    c_core: f64,
    worst_margin: f64,
    samples: usize,
}

fn fit(cells: &[MarginCell]) -> Fitted {
    let r_max = cells.iter().map(|c| c.r).fold(0.0, f64::max);
    let log_c = cells
        .iter()
        .map(|c| c.log_ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    let log_core = cells
        .iter()
        .filter(|c| c.r <= 0.5 * r_max)
        .map(|c| c.log_ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    let worst_margin = cells
        .iter()
        .map(|c| log_core - c.log_ratio)
        .fold(f64::INFINITY, f64::min);
    Fitted {
        c: log_c.exp(),
        c_core: log_core.exp(),
        worst_margin,
        samples: cells.len(),
    }
}

/// Checks `|v_ij| ≤ C det(Σ)^{−1/2} e^{−δ(s,d) r_ij^{1/s}}` with `δ(s,d)` at its usable value.
///
/// `gms[0]` is the base grid and the rest are refinements of it. The check passes when every
/// fitted `C` is finite, each refinement stays within a factor 2 of the base, and the constant over
/// all cells exceeds the one fitted on the inner half of the `r` range by at most a factor 2.
pub fn verify_spreading_bound(
    gms: &[GaborMatrixGrid],
    dec: &EulerDecomposition,
    s: f64,
    eps: f64,
) -> Result<SpreadingReport> {
    let delta = delta_sd(s, eps, dec.dim())?.usable();
    verify_spreading_bound_with_delta(gms, dec, s, eps, delta)
}

pub fn verify_spreading_bound_with_delta(
    gms: &[GaborMatrixGrid],
    dec: &EulerDecomposition,
    s: f64,
    eps: f64,
    delta: f64,
) -> Result<SpreadingReport> {
    let base = gms
        .first()
        .ok_or_else(|| Error::Domain("no Gabor matrix given".into()))?;
    let fits: Vec<Fitted> = gms
        .iter()
        .map(|gm| fit(&spreading_cells(gm, dec, s, delta)))
        .collect();
    if fits.iter().any(|f| f.samples == 0) {
        return Err(Error::Fit(
            "a Gabor matrix has no entries above the noise floor".into(),
        ));
    }
    let b = &fits[0];
    let finite = fits.iter().all(|f| f.c.is_finite() && f.c > 0.0);
    let stable = fits.iter().all(|f| (0.5..=2.0).contains(&(f.c / b.c)));
    let bounded = fits.iter().all(|f| f.c <= 2.0 * f.c_core);
    Ok(SpreadingReport {
        s,
        eps,
        delta,
        c: b.c,
        c_refined: fits[1..].iter().map(|f| f.c).collect(),
        c_core: b.c_core,
        worst_margin: b.worst_margin,
        samples: b.samples,
        stable,
        bounded,
        branch: base.route.clone(),
        pass: finite && stable && bounded,
    })
}

/// Per-cell margins `log(C_core envelope / |v|)` as CSV with columns `i,j,r,log_ratio,margin`.
pub fn write_margin_csv(
    gm: &GaborMatrixGrid,
    dec: &EulerDecomposition,
    s: f64,
    delta: f64,
    w: &mut impl Write,
) -> Result<()> {
    let cells = spreading_cells(gm, dec, s, delta);
    let f = fit(&cells);
    writeln!(w, "i,j,r,log_ratio,margin")?;
    for c in &cells {
        writeln!(
            w,
            "{},{},{},{},{}",
            c.i,
            c.j,
            fmt_g17(c.r),
            fmt_g17(c.log_ratio),
            fmt_g17(f.c_core.ln() - c.log_ratio)
        )?;
    }
    Ok(())
}

/// Semi-axes of the ellipse `{u : |D′U u| = 1}`, largest first.
pub fn level_set_axes(dec: &EulerDecomposition) -> Vec<f64> {
    let m: DMatrix<f64> = spreading_matrix(dec);
    let mut ax: Vec<f64> = m
        .svd(false, false)
        .singular_values
        .iter()
        .map(|v| 1.0 / v)
        .collect();
    ax.sort_by(|a, b| b.total_cmp(a));
    ax
}
