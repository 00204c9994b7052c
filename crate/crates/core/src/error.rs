use serde::Serialize;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "kind")]
pub enum Error {
    #[error("no Fock state with N={n}, K={k} fits under k_max={kmax}")]
    EmptyBasis { n: usize, k: i64, kmax: usize },

    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error("state vectors live on different bases")]
    BasisMismatch,

    #[error("expected {expected} entries, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("iteration did not converge after {iterations} steps (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("conditional wave function vanishes on the whole grid")]
    DegenerateConditional,

    #[error("center-of-mass direction undefined (magnitude {magnitude:e})")]
    UndefinedDirection { magnitude: f64 },

    #[error("configuration sits on a node of the wave function (|psi|^2 = {density:e})")]
    NearNode { density: f64 },

    #[error("integration step underflow at t = {time}")]
    StepUnderflow { time: f64 },

    #[error("profile is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("no solution: {detail}")]
    NoSolution { detail: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            detail: detail.into(),
        }
    }
}
