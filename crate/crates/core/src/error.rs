use thiserror::Error;

/// Every failure mode the library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function has a pole at x = {0}")]
    GammaPole(f64),

    #[error("zero raised to the non-positive power {0}")]
    ZeroToNonPositivePower(f64),

    #[error("{what}: no convergence within {terms} terms")]
    NonConvergence { what: &'static str, terms: usize },

    #[error("invalid `{name}` = {value}: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("nu = D/n = {nu} is outside the supported regime 0 < nu < 1")]
    Regime { nu: f64 },

    #[error("{what}: peak term magnitude {peak:e} exceeds {limit:e}")]
    Overflow {
        what: &'static str,
        peak: f64,
        limit: f64,
    },

    #[error("no negative-axis pole exists for coupling constant B = {0}")]
    NoPole(f64),

    #[error("quadrature did not reach tolerance: error estimate {abs_err:e} after {intervals} subintervals")]
    Quadrature { abs_err: f64, intervals: usize },

    #[error("bath grid with {requested} modes exceeds the limit of {max}")]
    Dimension { requested: usize, max: usize },

    #[error("time step {dt} is too coarse: dt * kernel scale = {product:.3} > 0.1")]
    StepSize { dt: f64, product: f64 },

    #[error("coupling is zero, so the Zeno time is infinite")]
    ZeroCoupling,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        reason,
    }
}
