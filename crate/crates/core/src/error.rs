use thiserror::Error;

/// Errors raised by the model, the solvers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("reflection model is not finite at theta = {theta} rad, f = {freq_hz} Hz")]
    ModelEvaluation { theta: f64, freq_hz: f64 },

    #[error("passivity violated: amplitude {amplitude} at theta = {theta} rad, f = {freq_hz} Hz")]
    PassivityViolation {
        theta: f64,
        freq_hz: f64,
        amplitude: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("line search stalled: no exponent up to {max_exponent} met the decrease condition (merit {merit:e})")]
    StalledLineSearch { max_exponent: u32, merit: f64 },

    #[error("objective moved the wrong way during {stage}: {before:e} -> {after:e}")]
    Monotonicity {
        stage: &'static str,
        before: f64,
        after: f64,
    },

    #[error("infeasible decision variables: {}", .0.join("; "))]
    Infeasible(Vec<String>),

    #[error("outer iteration {iteration}: {source}")]
    Outer {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
