use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not symplectic (residual {residual:.3e}, tolerance {tol:.3e})")]
    NotSymplectic { residual: f64, tol: f64 },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("unsupported factorization: smallest singular value of the upper-right block is {sigma_min:.3e}")]
    UnsupportedFactorization { sigma_min: f64 },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("parse error in {field}: {msg}")]
    Parse { field: String, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            field: "json".into(),
            msg: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
