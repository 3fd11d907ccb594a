//! Sampled fields on centered grids and the discrete Fourier, STFT, Wigner and
//! metaplectic transforms built on them.

mod fourier;
mod grid;
mod metaplectic;
mod stft;
mod wigner;

pub use fourier::{
    fourier_at, fourier_transform, inverse_fourier_transform, spectral_shift, BandLimited,
};
pub use grid::{GaussianChirp, Grid, SampledField};
pub use metaplectic::{apply_metaplectic, MetaplecticPlan};
pub use stft::{
    gaussian_stft_magnitude, stft, stft_fourier_transform_identity_check, stft_full,
    stft_fundamental_identity_check, tf_shift, translate, TfArray,
};
pub use wigner::{wigner, wigner_marginal_checks, wigner_stft_identity_check};
