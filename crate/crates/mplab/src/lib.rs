//! Euler decompositions of symplectic matrices, closed-form quadratic
//! flows, discrete time-frequency transforms and numerical checks of
//! Gelfand–Shilov decay bounds.

pub mod decay;
pub mod error;
pub mod flows;
pub mod io;
pub mod lemmas;
pub mod plot;
pub mod symplectic;
pub mod tf;
pub mod util;

pub use error::{Error, Result};
