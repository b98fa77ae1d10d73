use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid range: {0}")]
    Range(String),

    #[error("state diverged (non-finite value) at t = {t}")]
    Divergence { t: f64 },

    #[error("branch residual {residual:e} exceeds {limit:e}; not a stationary point")]
    NotStationary { residual: f64, limit: f64 },

    #[error("eigenvalue iteration did not converge for matrix {matrix}")]
    EigenNonConvergence { matrix: String },

    #[error("no sign change of the stability margin on [{lo}, {hi}] (values {f_lo:e}, {f_hi:e})")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("could not write output: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, Error>;
