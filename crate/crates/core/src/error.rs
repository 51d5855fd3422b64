use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the analysis pipeline can report.
///
/// The variants fall in three groups, used by the CLI to pick an exit
/// code: hypothesis failures (the theorems do not apply), numerical
/// failures (an iteration or a certificate broke down) and input errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("monotone inversion of y = {y} did not converge within {iterations} iterations")]
    NonConvergence { y: f64, iterations: usize },

    #[error("parabolic candidate near x = {location} unresolved (|f^q - id| = {residual:e})")]
    UnresolvedTangency { location: f64, residual: f64 },

    #[error("f^{period} - id vanishes on the whole scan grid; every point is periodic")]
    ContinuumOfFixedPoints { period: u32 },

    #[error("no periodic points of period {period}")]
    NoPeriodicPoints { period: u32 },

    #[error(
        "derivative range [{measured_min}, {measured_max}] escapes envelope [{lower}, {upper}]"
    )]
    EnvelopeViolation {
        lower: f64,
        upper: f64,
        measured_min: f64,
        measured_max: f64,
    },

    #[error("f0 and f1 share the fixed point x = {location}")]
    CommonFixedPoint { location: f64 },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("interval [{a}, {b}] matches both {first} and {second} within margins")]
    AmbiguousKind {
        a: f64,
        b: f64,
        first: String,
        second: String,
    },

    #[error("basins of attraction miss x = {location}")]
    NoCoveringBasins { location: f64 },

    #[error("cycle order violated at k = {k}: {inequality}")]
    OrderViolation { k: usize, inequality: String },

    #[error("overlap condition fails: f0(K) and f1(K) are disjoint")]
    OverlapEmpty,

    #[error("stage {stage}: c = {c} escapes ({lower}, {upper}]")]
    StageOrderViolation {
        stage: usize,
        c: f64,
        lower: f64,
        upper: f64,
    },

    #[error("analytic expansion bound {bound} does not exceed 1 although the hypothesis holds")]
    BoundNotExceeded { bound: f64 },

    #[error("hypothesis failure: {}", .0.join("; "))]
    HypothesisFailure(Vec<String>),

    #[error("search budget of {budget} steps exhausted")]
    BudgetExhausted { budget: usize },

    #[error("report has no `{0}` section")]
    MissingSection(String),

    #[error("invalid scenario: {}", .0.join("; "))]
    ScenarioInvalid(Vec<String>),

    #[error("{0}")]
    Io(String),
}

impl Error {
    /// The theorems' hypotheses are not met (exit code 2).
    pub fn is_hypothesis_failure(&self) -> bool {
        matches!(
            self,
            Error::HypothesisFailure(_) | Error::CommonFixedPoint { .. } | Error::NoPeriodicPoints { .. }
        )
    }

    /// A numerical routine or certificate broke down (exit code 3).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::UnresolvedTangency { .. }
                | Error::ContinuumOfFixedPoints { .. }
                | Error::EnvelopeViolation { .. }
                | Error::AmbiguousKind { .. }
                | Error::NoCoveringBasins { .. }
                | Error::OrderViolation { .. }
                | Error::OverlapEmpty
                | Error::StageOrderViolation { .. }
                | Error::BoundNotExceeded { .. }
                | Error::BudgetExhausted { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
