use thiserror::Error;

use crate::model::JobId;

/// Errors surfaced by the bound computations and schedule constructions.
///
/// Instance-validation findings are *not* errors; see
/// [`model::validate_instance`](crate::model::validate_instance).
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("alpha must exceed 1 (got {0})")]
    BadAlpha(f64),
    #[error("instance kind mismatch: operation requires {expected} jobs")]
    KindMismatch { expected: &'static str },
    #[error("invalid weighted program: {0}")]
    BadProgram(String),
    #[error("bisection failed to converge")]
    NoConvergence,
    #[error("non-identical works: job {job} has per-processor work {got}, expected {want}")]
    NonIdenticalWorks { job: JobId, got: f64, want: f64 },
    #[error("non-agreeable instance: job {smaller} has less work than job {larger} but a larger cap")]
    NonAgreeable { smaller: JobId, larger: JobId },
    #[error("not a two-processor dedicated instance: {0}")]
    NotTwoProcessor(String),
    #[error("width {width} exceeds processor count {m}")]
    WidthExceedsM { width: usize, m: usize },
    #[error("job {0} has no pieces in the schedule")]
    MissingPieces(JobId),
    #[error("instance too large for exhaustive search: {n} jobs > {max}")]
    TooLarge { n: usize, max: usize },
    #[error("invalid gadget: {0}")]
    Gadget(String),
    #[error("invalid permutation: {0}")]
    BadPermutation(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
