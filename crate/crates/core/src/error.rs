use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("coefficients are not Hermitian-symmetric (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("field is not divergence-free (relative divergence {divergence:.3e})")]
    NotSolenoidal { divergence: f64 },

    #[error("field has nonzero mean ({mean:.3e})")]
    NonzeroMean { mean: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    PicardNotConverged { iterations: usize, residual: f64 },

    #[error("time step failed at t = {time}: {source}")]
    StepFailure {
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("quadrature did not reach tolerance on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
