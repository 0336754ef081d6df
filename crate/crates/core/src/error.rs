use thiserror::Error;

/// Errors raised by the solvers, the analysis routines and scenario handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("singular point: {0}")]
    Singularity(String),

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {error:.3e} after {evaluations} evaluations")]
    Quadrature {
        a: f64,
        b: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical divergence at t = {time}: {detail} (last finite state at t = {last_good})")]
    Divergence {
        time: f64,
        last_good: f64,
        detail: String,
    },

    #[error("pulse is not contained in the integration window: edge/peak = {edge_ratio:.3e}")]
    Containment { edge_ratio: f64 },

    #[error("runs cannot be compared: {0}")]
    Comparison(String),

    #[error("scenario fails the regime checks:\n{0}")]
    Validation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Scenario(_)
            | Error::Parameter(_)
            | Error::Grid(_)
            | Error::Io(_)
            | Error::Csv(_) => 2,
            Error::Validation(_)
            | Error::Containment { .. }
            | Error::Comparison(_)
            | Error::Degenerate(_) => 3,
            Error::Divergence { .. } | Error::Singularity(_) | Error::Quadrature { .. } => 4,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
