use std::path::PathBuf;
use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum SicError {
    #[error("dimension must be at least 1 (got {0})")]
    InvalidDimension(usize),

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(usize, usize),

    #[error("matrix is not (anti)symplectic mod {modulus}: det = {det}")]
    NotSymplectic { det: usize, modulus: usize },

    #[error("symmetry {name} is unavailable in dimension {d}: requires {requirement}")]
    SymmetryUnavailable {
        name: &'static str,
        d: usize,
        requirement: &'static str,
    },

    #[error("vector is not a fiducial at tolerance {tol:e} (max overlap deviation {deviation:e})")]
    NotFiducial { deviation: f64, tol: f64 },

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("factors {0} and {1} are not coprime")]
    NotCoprime(usize, usize),

    #[error("dimension {d} exceeds the exhaustive-enumeration cutoff {cutoff}")]
    ExhaustiveCutoff { d: usize, cutoff: usize },

    #[error("census is ill-posed in dimension 3 (continuous solution family)")]
    ContinuousFamily,

    #[error("census exceeds the desk-scale dimension bound (d = {0} > 10)")]
    CensusTooLarge(usize),

    #[error("non-integral SIC count {num}/{den}: inconsistent stabilizer orders")]
    NonIntegralCount { num: u128, den: u128 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Format {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("unsupported catalog schema version {0}")]
    UnknownSchema(u32),

    #[error("density matrix is not a state: {0}")]
    NotDensityMatrix(&'static str),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, SicError>;
