use thiserror::Error;

use crate::levels::{BoundKind, MonotoneViolation};

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("probability `{name}` = {value} lies outside [0, 1]")]
    Probability { name: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not monotone: {0}")]
    NotMonotone(MonotoneViolation),

    #[error("expected an exact (level-based) matrix, got {0:?}")]
    NotExact(BoundKind),

    #[error(
        "no available norm certifies ||W^t|| -> 0 \
         (inf-row {inf_row:.6}, inf-col {inf_col:.6}, spectral {spectral:.6})"
    )]
    NormNotCertified {
        inf_row: f64,
        inf_col: f64,
        spectral: f64,
    },

    #[error("closed form and iteration disagree by {discrepancy:e} at t = {t}")]
    ClosedFormMismatch { t: u64, discrepancy: f64 },

    #[error("associated chain needs every level set A_0..A_m to be non-empty; empty: {0:?}")]
    EmptyLevels(Vec<usize>),

    #[error("transition ({row}, {col}) of the associated chain is negative: {value:e}")]
    NegativeTransition { row: usize, col: usize, value: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Probability { name, value })
    }
}
