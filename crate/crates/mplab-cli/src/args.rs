use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "mplab", version, about = "Euler decompositions, metaplectic flows, Gabor matrices and decay checks")]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON config; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Validate inputs without computing.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Euler decomposition of a symplectic matrix file.
    Euler(EulerArgs),
    /// Flow or generator matrix with its closed-form decomposition.
    Flow(FlowCmd),
    /// Full-grid STFT of a field.
    Stft(FieldArgs),
    /// Cross-Wigner distribution of a field with itself.
    Wigner(FieldArgs),
    /// Gabor matrix of a flow and the spreading-envelope check.
    Gabor(GaborArgs),
    /// Envelope fit of decay samples.
    DecayFit(DecayFitArgs),
    /// Evolved Gelfand-Shilov rate after a flow.
    Confine(ConfineArgs),
    /// Randomized lemma sweeps.
    Verify(VerifyArgs),
    /// Decay thresholds and constants.
    Constants(ConstantsArgs),
    /// SVG of unit-disk images under the spreading matrix.
    SpreadingPlot(PlotArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Euler(_) => "euler",
            Command::Flow(_) => "flow",
            Command::Stft(_) => "stft",
            Command::Wigner(_) => "wigner",
            Command::Gabor(_) => "gabor",
            Command::DecayFit(_) => "decay-fit",
            Command::Confine(_) => "confine",
            Command::Verify(_) => "verify",
            Command::Constants(_) => "constants",
            Command::SpreadingPlot(_) => "spreading-plot",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EulerArgs {
    /// Matrix file, `.json` ({"dim", "entries"}) or `.csv`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct FlowArgs {
    /// FlowSpec JSON file; the flags below override its fields.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// free-particle | harmonic-oscillator (ho) | magnetic | generator-j | generator-dilation | generator-chirp | partial-fourier | partial-fourier-rotated
    #[arg(long)]
    pub flow: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    /// Comma-separated frequencies.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// Nested JSON array.
    #[arg(long = "B")]
    #[serde(rename = "B")]
    pub b: Option<String>,
    #[arg(long = "Q")]
    #[serde(rename = "Q")]
    pub q: Option<String>,
    #[arg(long = "E")]
    #[serde(rename = "E")]
    pub e: Option<String>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub r: Option<String>,
    /// Comma-separated 1-based indices.
    #[arg(long = "J-set")]
    #[serde(rename = "J_set")]
    pub j_set: Option<String>,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FlowCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub flow: FlowArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FieldArgs {
    /// Field file (CSV with a `# grid` header, or the binary format).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Synthesize `e^{(iπc − a)x²}` from "a" or "a,c" instead of reading a file.
    #[arg(long)]
    pub gaussian: Option<String>,
    /// Rate `a` of the Gaussian window `e^{−a x²}`; defaults to π.
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GaborArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub flow: FlowArgs,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Half-width of the square z/w lattice.
    #[arg(long)]
    pub half: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Use this δ instead of the usable `δ(s, d)`.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DecayFitArgs {
    /// CSV rows `z_1,…,z_k,value`; a non-numeric first line is skipped as a header.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub s: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ConfineArgs {
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub sigma_min: Option<f64>,
    /// Take `σ_min` and `d` from a flow instead.
    #[command(flatten)]
    #[serde(flatten)]
    pub flow: FlowArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Lemma name or `all`.
    #[arg(long)]
    pub lemma: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Exponent for `combine_bounds` and the angular search.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    /// Gaussian rate for the chirped-Gaussian counterexample report.
    #[arg(long)]
    pub counterexample: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PlotArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub flow: FlowArgs,
    /// Comma-separated times.
    #[arg(long, allow_hyphen_values = true)]
    pub times: Option<String>,
    /// Comma-separated `α` with `t = απ/ω`.
    #[arg(long, allow_hyphen_values = true)]
    pub times_alpha: Option<String>,
}
