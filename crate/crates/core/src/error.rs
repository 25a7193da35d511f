//! Error type shared across the engine.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Root bracketing for the characteristic equation found no sign change.
    #[error("no sign change bracketing mode {index} in kappa*L interval [{lo}, {hi}]")]
    BracketingFailure { index: usize, lo: f64, hi: f64 },

    /// A root was located but its characteristic residual misses the target.
    #[error("mode {index} root residual {residual:e} exceeds {target:e}")]
    RootTolerance {
        index: usize,
        residual: f64,
        target: f64,
    },

    /// A numeric evaluation produced NaN or infinity outside time stepping.
    #[error("non-finite value while {context}")]
    NonFinite { context: String },

    /// A sampled integrand was non-finite at a quadrature node.
    #[error("non-finite sample at node x = {x}")]
    NonFiniteSample { x: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mode index {index} out of range for basis of {n_modes} modes")]
    ModeIndexOutOfRange { index: usize, n_modes: usize },

    /// `sin(kL) + sinh(kL)` vanished; `k` does not solve the characteristic
    /// equation (cannot occur for valid roots, guards corrupt input).
    #[error("degenerate shape coefficients: |sin + sinh| < 1e-14 at kappa*L = {kappa_l}")]
    DegenerateShapeCoefficients { kappa_l: f64 },

    /// Cholesky hit a non-positive pivot. The mass matrix is `I + Gram`,
    /// so this indicates corrupted tensors rather than a bad state.
    #[error("mass matrix factorization failed: pivot {min_pivot:e} at column {column}")]
    FactorizationFailure { column: usize, min_pivot: f64 },

    #[error("linear solve failed: singular Jacobian at column {column}")]
    SingularMatrix { column: usize },

    /// The implicit step was rejected: Newton did not reach the residual
    /// tolerance within the configured iteration budget.
    #[error("Newton did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDidNotConverge { iterations: usize, residual: f64 },

    /// Blow-up signal from a single step: an iterate or stage went non-finite.
    #[error("state became non-finite at t = {t} ({detail})")]
    NonFiniteState { t: f64, detail: String },

    /// Decay-rate fit had no usable samples after window/floor filtering.
    #[error("decay fit window [{t_start}, {t_end}] is empty after floor filtering")]
    EmptyWindow { t_start: f64, t_end: f64 },

    #[error("invalid series for fitting: {0}")]
    InvalidSeries(String),
}
