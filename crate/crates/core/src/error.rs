use thiserror::Error;

/// Errors raised by the pricing engines.
///
/// Variants split into two families: input problems (bad parameters, bad
/// contracts, queries outside a solved domain) and numerical failures. The
/// CLI maps the first family to exit status 1 and the second to 2.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("invalid contract: {0}")]
    InvalidContract(String),

    #[error("moment of order {order} overflows the floating-point range")]
    MomentOverflow { order: u32 },

    #[error("variance {variance:e} is negative beyond rounding (second moment {second_moment:e})")]
    NumericalInconsistency { variance: f64, second_moment: f64 },

    #[error("Newton iteration for the free boundary did not converge at step {step} (residual {residual:e})")]
    NewtonDivergence { step: usize, residual: f64 },

    #[error("unstable solution at step {step}: {reason}")]
    UnstableSolution { step: usize, reason: String },

    #[error("point outside the solved domain: {0}")]
    OutOfDomain(String),

    #[error("exercise boundary does not span [0, T]: {0}")]
    BoundaryMismatch(String),

    #[error("mean {0:e} is not positive")]
    DegenerateMean(f64),

    #[error("risk-adjusted price {0:e} is not positive")]
    NegativePrice(f64),

    #[error("target price {target:e} outside the invertible range [{low:e}, {high:e}]")]
    OutOfBracket { target: f64, low: f64, high: f64 },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::MomentOverflow { .. }
                | Error::NumericalInconsistency { .. }
                | Error::NewtonDivergence { .. }
                | Error::UnstableSolution { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Non-fatal diagnostics attached to results computed outside the parameter
/// region the formulas were exercised on.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// `2r / sigma^2 - 1 < 0` in the down-and-out formulas.
    NegativeBarrierExponent { exponent: f64 },
    /// Risk-aversion coefficient outside `|q| <= 0.1`.
    LargeRiskAversion { q: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::NegativeBarrierExponent { exponent } => write!(
                f,
                "barrier exponent 2r/sigma^2 - 1 = {exponent} is negative (2r < sigma^2); formulas evaluated as written"
            ),
            Warning::LargeRiskAversion { q } => {
                write!(
                    f,
                    "risk-aversion coefficient q = {q} is outside the typical range |q| <= 0.1"
                )
            }
        }
    }
}
