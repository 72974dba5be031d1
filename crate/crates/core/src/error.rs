//! Error type shared by all operations in this crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The Cauchy kernel was requested at a point on the real axis.
    #[error("evaluation point z = {re} + {im}i lies on the real axis")]
    PoleOnAxis { re: f64, im: f64 },

    /// The kernel power is too small for the integrability margin of a
    /// polynomially growing density atom.
    #[error("kernel power {power} insufficient: need power - growth_degree >= {margin} (growth_degree = {growth_degree})")]
    InsufficientPower {
        power: u32,
        growth_degree: u32,
        margin: u32,
    },

    /// Adaptive quadrature could not reach the requested tolerance within
    /// its evaluation budget.
    #[error("quadrature failed: {context} (error estimate {estimate:.3e} > target {target:.3e} after {evals} evaluations)")]
    QuadratureFailure {
        context: String,
        estimate: f64,
        target: f64,
        evals: usize,
    },

    /// Plemelj residuals are implemented for m in {0, 1} only.
    #[error("unsupported derivative order m = {m} (supported: 0, 1)")]
    UnsupportedOrder { m: u32 },

    /// The distribution does not satisfy a pipeline precondition.
    #[error("unsupported distribution: {reason}")]
    UnsupportedDistribution { reason: String },

    /// Strict characteristic-function mode requires f(0) = 1.
    #[error("normalization failure: f(0) = {value:.12e}, expected 1 within {tolerance:.1e}")]
    NormalizationError { value: f64, tolerance: f64 },

    /// Finite-difference monotonicity tests require a uniform sample grid.
    #[error("sample grid is not uniform: spacing {found:.6e} deviates from {expected:.6e}")]
    NonUniformGrid { expected: f64, found: f64 },

    /// An atom has no symbolic Fourier transform in the built-in catalog.
    #[error("atom outside the Fourier catalog: {reason}")]
    UnsupportedAtom { reason: String },

    /// A domain type failed its construction invariants.
    #[error("invalid distribution: {reason}")]
    InvalidDistribution { reason: String },

    /// A configuration value failed its construction invariants.
    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
