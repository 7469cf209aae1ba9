use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid task profile: {0}")]
    InvalidProfile(String),

    #[error("plan has {plan} segments but profile has {profile}")]
    SegmentMismatch { plan: usize, profile: usize },

    #[error("density vanishes at {0}")]
    ZeroDensity(f64),

    #[error("virtual value decreases near {at}; ironing is not supported")]
    NonMonotoneVirtualValue { at: f64 },

    #[error("type {0} is excluded (nonpositive virtual value)")]
    Excluded(f64),

    #[error("search bracket exceeded {bound} while solving {context}")]
    BracketOverflow { bound: f64, context: &'static str },

    #[error("{context}: no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        context: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("quadrature tolerance {tol:e} not met within panel budget (estimate {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("buyer problem is unbounded: {0}")]
    Unbounded(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_finite_nonneg(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(invalid(name, format!("must be finite, got {v}")));
    }
    if v < 0.0 {
        return Err(invalid(name, format!("must be nonnegative, got {v}")));
    }
    Ok(())
}

pub(crate) fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(invalid(name, format!("must be positive and finite, got {v}")));
    }
    Ok(())
}
