//! Decay rates, confinement constants and Gabor-matrix envelope checks.

mod constants;
mod counterexample;
mod fit;
mod gabor;
mod membership;

pub use constants::{
    angular_min_max, combine_bounds, confinement_epsilon, corollary_epsilon, delta_sd,
    delta_threshold_stft, psi_s, stft_class_report, Confinement, GSClass, Threshold, OPEN_FRACTION,
};
pub use counterexample::{counterexample_report, CounterexampleReport, Witness};
pub use fit::{envelope_constant, fit_decay, DecayFit, NOISE_FLOOR};
pub use gabor::{
    gabor_matrix, level_set_axes, phase_lattice, spreading_cells, verify_spreading_bound,
    verify_spreading_bound_with_delta, write_margin_csv, GaborMatrixGrid, MarginCell,
    SpreadingReport,
};
pub use membership::{
    gs_membership_report, MembershipReport, SideReport, Verdict, BOUNDARY_FRACTION,
};
