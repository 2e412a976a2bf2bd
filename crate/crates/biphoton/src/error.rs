use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config parse error on line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error("transverse basis is degenerate at theta={theta}, phi={phi} (propagation along +/-y); use the x/z basis there")]
    DegenerateBasis { theta: f64, phi: f64 },

    #[error("invalid detection direction theta={theta}, phi={phi}: {msg}")]
    InvalidDirection { theta: f64, phi: f64, msg: String },

    #[error("no separation in ({lo}, {hi}] reproduces the target coupling {target} at alpha_dw={alpha_dw}")]
    NoRoot {
        target: f64,
        alpha_dw: f64,
        lo: f64,
        hi: f64,
    },

    #[error("relative phase undefined: amplitude magnitude below {0:e}")]
    UndefinedPhase(f64),

    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    QuadratureNotConverged { achieved: f64, requested: f64 },

    #[error("density matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("eigenvalue decomposition failed to converge")]
    EigenFailed,

    #[error("Monte-Carlo standard error {std_error:e} exceeds 5% of the estimate {value:e}; increase the sample count")]
    MonteCarloHighVariance { value: f64, std_error: f64 },

    #[error("step size underflow at t={t} in the time-domain integrator")]
    StepSizeUnderflow { t: f64 },
}
