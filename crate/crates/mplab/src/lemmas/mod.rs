//! Numerical checks of the convolution and pointwise inequalities behind the decay bounds.

mod conv;
mod convbound;
mod pointwise;
pub mod quad;
mod sweep;

pub use conv::{
    c_eps_s, c_eps_s_quadrature, check_conv_lemma_1, check_conv_lemma_2, check_conv_lemma_2d,
    check_conv_lemma_2d_assembled, check_conv_lemma_2d_monte_carlo, lemma_2d_assembled_log_rhs,
    lemma_2d_log_rhs, CheckVerdict, LemmaCheck, MonteCarloEstimate, SLACK,
};
pub use convbound::{check_convbound, convbound_sweep, ConvBoundPoint, ConvBoundReport, Regime};
pub use pointwise::{check_sequence_inequalities, check_uc_inequality, SequenceCheck, UcCheck};
pub use sweep::{run_sweep, Lemma, SweepConfig, SweepReport};
