use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("system at kappa = {kappa} is badly conditioned (estimate {estimate:.3e}); perturb kappa slightly")]
    IllConditioned { kappa: f64, estimate: f64 },

    #[error("solver failed at kappa = {kappa}: {message}")]
    Solver { kappa: f64, message: String },

    #[error("synthesis: {0}")]
    Synthesis(String),

    #[error("low-frequency data not in the Rayleigh regime (kappa^2 fit residual {residual:.3}); lower the first grid frequency")]
    RayleighFit { residual: f64 },

    #[error("echo analysis: {0}")]
    Echo(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
