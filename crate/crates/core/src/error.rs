use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {evaluations} evaluations ({context})")]
    Quadrature {
        estimate: f64,
        error: f64,
        evaluations: usize,
        context: String,
    },

    #[error("time stepping failed at t = {t:e} (step {step:e}): {detail}")]
    StepFailure { t: f64, step: f64, detail: String },

    #[error("grid is not symmetric about the junction: {0}")]
    AsymmetricGrid(String),

    #[error("degenerate ball: {nodes} grid nodes for {constraints} constraints")]
    DegenerateBall { nodes: usize, constraints: usize },

    #[error("points too close to the diagonal: |x - y| = {separation:e} < {minimum:e}")]
    NearDiagonal { separation: f64, minimum: f64 },

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("refinement did not converge: {0}")]
    Refinement(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
