//! Images of the unit disk of the `(x₁, ξ₁)` plane under spreading matrices, rendered as SVG.

use std::fmt::Write as _;

use nalgebra::{DMatrix, Matrix2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flows::FlowSpec;
use crate::symplectic::spreading_matrix;

pub const BOUNDARY_POINTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadingFrame {
    pub t: f64,
    pub sigma: f64,
    /// `D′U` restricted to the `(x₁, ξ₁)` plane, row-major.
    pub map: [[f64; 2]; 2],
    pub major: f64,
    pub minor: f64,
    #[serde(skip)]
    pub vertices: Vec<[f64; 2]>,
}

impl SpreadingFrame {
    /// Largest distance from an image vertex to the nearest vertex of the unit circle polygon.
    pub fn distance_to_unit_polygon(&self) -> f64 {
        let circle = unit_circle(self.vertices.len());
        self.vertices
            .iter()
            .map(|v| {
                circle
                    .iter()
                    .map(|c| (v[0] - c[0]).hypot(v[1] - c[1]))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
}

pub fn unit_circle(points: usize) -> Vec<[f64; 2]> {
    (0..points)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / points as f64;
            [th.cos(), th.sin()]
        })
        .collect()
}

fn plane(m: &DMatrix<f64>) -> Matrix2<f64> {
    let d = m.nrows() / 2;
    Matrix2::new(m[(0, 0)], m[(0, d)], m[(d, 0)], m[(d, d)])
}

pub fn disk_image(m: &Matrix2<f64>, points: usize) -> Vec<[f64; 2]> {
    unit_circle(points)
        .into_iter()
        .map(|[x, y]| [m[(0, 0)] * x + m[(0, 1)] * y, m[(1, 0)] * x + m[(1, 1)] * y])
        .collect()
}

/// One frame per time, from the closed-form decomposition of the flow.
pub fn spreading_frames(flow: &FlowSpec, times: &[f64]) -> Result<Vec<SpreadingFrame>> {
    if times.is_empty() {
        return Err(Error::Domain("at least one time is required".into()));
    }
    times
        .iter()
        .map(|&t| {
            let spec = FlowSpec { t, ..flow.clone() };
            let (dec, _) = spec.euler()?;
            let m = plane(&spreading_matrix(&dec));
            let sv = m.singular_values();
            Ok(SpreadingFrame {
                t,
                sigma: dec.sigma[0],
                map: [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]],
                major: sv.max(),
                minor: sv.min(),
                vertices: disk_image(&m, BOUNDARY_POINTS),
            })
        })
        .collect()
}

const PALETTE: [&str; 8] = [
    "#000000", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
];

/// Deterministic SVG; only the leading comment line carries build information.
pub fn render_svg(frames: &[SpreadingFrame], title: &str) -> String {
    let size = 480.0;
    let extent = frames
        .iter()
        .flat_map(|f| f.vertices.iter())
        .map(|v| v[0].abs().max(v[1].abs()))
        .fold(1.0, f64::max)
        * 1.1;
    let scale = 0.5 * size / extent;
    let px = |v: f64| 0.5 * size + v * scale;
    let py = |v: f64| 0.5 * size - v * scale;
    let mut s = String::new();
    let _ = writeln!(s, "<!-- mplab {} -->", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = size + 160.0,
        h = size
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r##"<line x1="0" y1="{c}" x2="{size}" y2="{c}" stroke="#bbbbbb"/><line x1="{c}" y1="0" x2="{c}" y2="{size}" stroke="#bbbbbb"/>"##,
        c = 0.5 * size
    );
    for (k, f) in frames.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = f
            .vertices
            .iter()
            .map(|v| format!("{:.6},{:.6}", px(v[0]), py(v[1])))
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="13" fill="{color}">t = {t:.4}</text>"#,
            x = size + 16.0,
            y = 24.0 + 20.0 * k as f64,
            t = f.t
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
