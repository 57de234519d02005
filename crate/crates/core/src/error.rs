use thiserror::Error;

use crate::game::Deviation;
use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("lambda for pair ({x}, {y}) is {value}, expected a value in (0, 1)")]
    LambdaOutOfRange {
        x: String,
        y: String,
        value: Rational,
    },

    #[error("mass of type {id} is {value}, expected a positive value")]
    NonpositiveMass { id: String, value: Rational },

    #[error("output {value} at {location} is not positive")]
    NonpositiveOutput { location: String, value: Rational },

    #[error("coefficient {name} for pair ({x}, {y}) is {value}, expected a positive value")]
    NonpositiveCoefficient {
        name: &'static str,
        x: String,
        y: String,
        value: Rational,
    },

    #[error("tax rate for pair ({x}, {y}) is {value}, expected a value in [0, 1)")]
    TaxOutOfRange {
        x: String,
        y: String,
        value: Rational,
    },

    #[error("invalid arrangement {index}: {reason}")]
    InvalidArrangement { index: usize, reason: String },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("degenerate outcome: {0}")]
    DegenerateOutcome(&'static str),

    #[error("profile is not an equilibrium: {0}")]
    NotAnEquilibrium(Box<Deviation>),

    #[error("equilibrium value {0} is zero")]
    ZeroValue(&'static str),

    #[error("Lemke-Howson ended on a ray after {} pivots (labels entered: {trace:?})", trace.len())]
    RayTermination { trace: Vec<usize> },

    #[error("Lemke-Howson exceeded the pivot limit of {0}")]
    IterationLimit(usize),

    #[error("support enumeration needs {needed} systems, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("problem of size {workers}x{jobs} exceeds the oracle caps")]
    CapExceeded { workers: usize, jobs: usize },

    #[error("the problem does not have the TU property")]
    NotTu,

    #[error("cross ratio equals 1 at the requested quadruple")]
    IsTu,

    #[error("subproblem has an empty {0} set")]
    EmptyTypeSet(&'static str),

    #[error("outcome {0} is not stable")]
    InputNotStable(&'static str),

    #[error("index {index} out of range for {what} of size {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("internal invariant breached: {0}")]
    Internal(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
