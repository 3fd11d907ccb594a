//! Closed-form symplectic flows of quadratic Hamiltonians and the
//! generators of the symplectic group, with case-by-case Euler forms.

mod blocks;
mod free;
mod generators;
mod magnetic;
mod oscillator;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::{EulerDecomposition, SymplecticMatrix};

pub use blocks::{assemble_matrix, permutation_assemble, sorting_order, sym2_rows, Block2};
pub use free::{free_particle_euler, free_particle_matrix, free_particle_sigma};
pub use generators::{generator_euler, generator_matrix, Generator};
pub use magnetic::{magnetic_euler, magnetic_matrix, rotation_generator};
pub use oscillator::{harmonic_oscillator_euler, harmonic_oscillator_matrix, sigma_from_beta};

/// Special angles are matched within this absolute tolerance after reduction mod 2π.
pub const ANGLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ScenarioEntry {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coordinate: Option<usize>,
    pub values: BTreeMap<String, f64>,
}

impl ScenarioEntry {
    pub fn new(label: &str) -> Self {
        Self {
            label: label.into(),
            coordinate: None,
            values: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.into(), v);
        self
    }

    pub fn at(mut self, j: usize) -> Self {
        self.coordinate = Some(j);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ScenarioReport {
    pub entries: Vec<ScenarioEntry>,
}

impl ScenarioReport {
    pub fn single(e: ScenarioEntry) -> Self {
        Self { entries: vec![e] }
    }

    pub fn labels(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.label.as_str()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowKind {
    #[serde(alias = "FreeParticle", alias = "free_particle")]
    FreeParticle,
    #[serde(
        alias = "HarmonicOscillator",
        alias = "ho",
        alias = "harmonic_oscillator"
    )]
    HarmonicOscillator,
    #[serde(alias = "Magnetic")]
    Magnetic,
    #[serde(alias = "GeneratorJ", alias = "J")]
    GeneratorJ,
    #[serde(alias = "GeneratorDilation", alias = "dilation")]
    GeneratorDilation,
    #[serde(alias = "GeneratorChirp", alias = "chirp")]
    GeneratorChirp,
    #[serde(alias = "PartialFourier")]
    PartialFourier,
    #[serde(alias = "PartialFourierRotated")]
    PartialFourierRotated,
}

fn one() -> f64 {
    1.0
}

/// Parameters of a flow or generator, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub kind: FlowKind,
    #[serde(default = "one")]
    pub m: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub omega: Vec<f64>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<Vec<f64>>>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Vec<f64>>>,
    #[serde(rename = "J_set", default, skip_serializing_if = "Option::is_none")]
    pub j_set: Option<Vec<usize>>,
    /// Number of rotated coordinates for the rotated partial Fourier transform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default)]
    pub t: f64,
}

pub fn matrix_from_rows(rows: &[Vec<f64>], field: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse {
            field: field.into(),
            msg: "expected a non-empty square nested array".into(),
        });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn rows_from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl FlowSpec {
    pub fn new(kind: FlowKind) -> Self {
        Self {
            kind,
            m: 1.0,
            omega: vec![],
            b: None,
            q: None,
            e: None,
            r: None,
            j_set: None,
            rank: None,
            d: None,
            t: 0.0,
        }
    }

    pub fn free_particle(t: f64, d: usize) -> Self {
        Self {
            t,
            d: Some(d),
            ..Self::new(FlowKind::FreeParticle)
        }
    }

    pub fn harmonic_oscillator(t: f64, m: f64, omega: Vec<f64>) -> Self {
        Self {
            t,
            m,
            omega,
            ..Self::new(FlowKind::HarmonicOscillator)
        }
    }

    pub fn magnetic(t: f64, m: f64, omega: f64, b: &DMatrix<f64>) -> Self {
        Self {
            t,
            m,
            omega: vec![omega],
            b: Some(rows_from_matrix(b)),
            ..Self::new(FlowKind::Magnetic)
        }
    }

    pub fn generator(g: &Generator) -> Self {
        match g {
            Generator::J(d) => Self {
                d: Some(*d),
                ..Self::new(FlowKind::GeneratorJ)
            },
            Generator::Dilation(e) => Self {
                e: Some(rows_from_matrix(e)),
                ..Self::new(FlowKind::GeneratorDilation)
            },
            Generator::Chirp(q) => Self {
                q: Some(rows_from_matrix(q)),
                ..Self::new(FlowKind::GeneratorChirp)
            },
            Generator::PartialFourier { d, set } => Self {
                d: Some(*d),
                j_set: Some(set.iter().map(|k| k + 1).collect()),
                ..Self::new(FlowKind::PartialFourier)
            },
            Generator::PartialFourierRotated { r, rank } => Self {
                r: Some(rows_from_matrix(r)),
                rank: Some(*rank),
                ..Self::new(FlowKind::PartialFourierRotated)
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn dim_hint(&self) -> Result<usize> {
        self.d.ok_or_else(|| Error::Parse {
            field: "d".into(),
            msg: "dimension required for this kind".into(),
        })
    }

    /// Generator described by this spec, if it is one.
    pub fn as_generator(&self) -> Result<Option<Generator>> {
        Ok(Some(match self.kind {
            FlowKind::GeneratorJ => Generator::J(self.dim_hint()?),
            FlowKind::GeneratorDilation => {
                Generator::Dilation(matrix_from_rows(self.e.as_deref().unwrap_or(&[]), "E")?)
            }
            FlowKind::GeneratorChirp => {
                Generator::Chirp(matrix_from_rows(self.q.as_deref().unwrap_or(&[]), "Q")?)
            }
            FlowKind::PartialFourier => {
                let d = self.dim_hint()?;
                let set = self.j_set.clone().unwrap_or_default();
                if set.iter().any(|&k| k == 0 || k > d) {
                    return Err(Error::Domain(format!("J_set entries must lie in 1..={d}")));
                }
                Generator::PartialFourier {
                    d,
                    set: set.into_iter().map(|k| k - 1).collect(),
                }
            }
            FlowKind::PartialFourierRotated => Generator::PartialFourierRotated {
                r: matrix_from_rows(self.r.as_deref().unwrap_or(&[]), "R")?,
                rank: self.rank.unwrap_or(1),
            },
            _ => return Ok(None),
        }))
    }

    fn magnetic_parts(&self) -> Result<(f64, DMatrix<f64>)> {
        let omega = *self.omega.first().ok_or_else(|| Error::Parse {
            field: "omega".into(),
            msg: "missing".into(),
        })?;
        let b = match &self.b {
            Some(rows) => matrix_from_rows(rows, "B")?,
            None => rotation_generator(self.d.unwrap_or(2))?,
        };
        Ok((omega, b))
    }

    pub fn dim(&self) -> Result<usize> {
        Ok(self.matrix()?.dim())
    }

    pub fn matrix(&self) -> Result<SymplecticMatrix> {
        match self.kind {
            FlowKind::FreeParticle => Ok(free_particle_matrix(self.t, self.dim_hint()?)),
            FlowKind::HarmonicOscillator => harmonic_oscillator_matrix(self.t, self.m, &self.omega),
            FlowKind::Magnetic => {
                let (omega, b) = self.magnetic_parts()?;
                magnetic_matrix(self.t, self.m, omega, &b)
            }
            _ => generator_matrix(&self.as_generator()?.expect("generator kinds")),
        }
    }

    /// Closed-form decomposition following the case analysis of each flow.
    pub fn euler(&self) -> Result<(EulerDecomposition, ScenarioReport)> {
        match self.kind {
            FlowKind::FreeParticle => free_particle_euler(self.t, self.dim_hint()?),
            FlowKind::HarmonicOscillator => harmonic_oscillator_euler(self.t, self.m, &self.omega),
            FlowKind::Magnetic => {
                let (omega, b) = self.magnetic_parts()?;
                magnetic_euler(self.t, self.m, omega, &b)
            }
            _ => generator_euler(&self.as_generator()?.expect("generator kinds")),
        }
    }
}

/// Reduces `θ` to `[0, 2π)` and reports the nearest multiple of π/2 within tolerance.
pub(crate) fn quarter_turn(theta: f64) -> Option<u8> {
    let tau = 2.0 * std::f64::consts::PI;
    let r = theta.rem_euclid(tau);
    for k in 0..=4u8 {
        if (r - f64::from(k) * std::f64::consts::FRAC_PI_2).abs() <= ANGLE_TOL {
            return Some(k % 4);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parses_from_json() {
        let s = FlowSpec::from_json(
            r#"{"kind":"harmonic-oscillator","m":2.0,"omega":[1.0,0.5],"t":0.3}"#,
        )
        .unwrap();
        assert_eq!(s.kind, FlowKind::HarmonicOscillator);
        assert_eq!(s.matrix().unwrap().dim(), 2);
        let s = FlowSpec::from_json(r#"{"kind":"partial-fourier","d":3,"J_set":[1,3]}"#).unwrap();
        match s.as_generator().unwrap() {
            Some(Generator::PartialFourier { set, .. }) => assert_eq!(set, vec![0, 2]),
            other => panic!("{other:?}"),
        }
        assert!(
            FlowSpec::from_json(r#"{"kind":"partial-fourier","d":2,"J_set":[0]}"#)
                .unwrap()
                .matrix()
                .is_err()
        );
    }

    #[test]
    fn spec_round_trips() {
        let s = FlowSpec::magnetic(0.4, 1.3, 0.7, &rotation_generator(2).unwrap());
        let back = FlowSpec::from_json(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn quarter_turns() {
        use std::f64::consts::PI;
        assert_eq!(quarter_turn(0.0), Some(0));
        assert_eq!(quarter_turn(PI / 2.0 + 1e-10), Some(1));
        assert_eq!(quarter_turn(-PI / 2.0), Some(3));
        assert_eq!(quarter_turn(2.0 * PI - 1e-12), Some(0));
        assert_eq!(quarter_turn(7.0 * PI), Some(2));
        assert_eq!(quarter_turn(0.3), None);
    }
}
