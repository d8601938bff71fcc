use thiserror::Error;

use crate::local::Side;
use crate::panel::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: missing column `{column}`")]
    Schema { column: String },

    #[error("parse error on row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("domain error on row {row}: {message}")]
    Domain { row: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid panel: {}", .0.summary())]
    InvalidPanel(Box<ValidationReport>),

    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),

    #[error("insufficient data on the {side} side: need {needed} effective observations, found {found}")]
    InsufficientData {
        side: Side,
        needed: usize,
        found: usize,
    },

    #[error("singular design on the {side} side (rank-deficient weighted regression)")]
    Singular { side: Side },

    #[error("singular pooled design (rank-deficient interaction regression)")]
    SingularPooled,

    #[error("no bandwidth in the candidate grid yields a feasible fit on both sides")]
    NoFeasibleBandwidth,

    #[error("inference infeasible: {0}")]
    InferenceInfeasible(String),

    #[error("all {reps} Monte Carlo replications failed; first failure: {first}")]
    AllReplicationsFailed { reps: usize, first: Box<Error> },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the estimation step itself, as opposed to bad
    /// input data or arguments.
    pub fn is_estimation_failure(&self) -> bool {
        matches!(
            self,
            Error::InsufficientData { .. }
                | Error::Singular { .. }
                | Error::SingularPooled
                | Error::NoFeasibleBandwidth
                | Error::InferenceInfeasible(_)
                | Error::AllReplicationsFailed { .. }
        )
    }
}
