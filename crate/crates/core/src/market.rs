//! Shared model state and contract descriptions.
//!
//! Every engine takes a [`MarketParams`] and (usually) an [`OptionSpec`].
//! Validation lives here so the engines can assume their inputs are inside
//! the region where their formulas were derived.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lognormal model state: risk-free rate, volatility and spot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Continuously compounded risk-free rate, per year.
    pub r: f64,
    /// Volatility, per square-root year.
    pub sigma: f64,
    /// Current price of the underlying.
    pub s0: f64,
}

impl MarketParams {
    pub fn new(r: f64, sigma: f64, s0: f64) -> Result<Self> {
        let m = Self { r, sigma, s0 };
        validate_market(&m)?;
        Ok(m)
    }

    /// Same market, different spot.
    pub fn with_spot(&self, s0: f64) -> Self {
        Self { s0, ..*self }
    }

    /// sigma * sqrt(T).
    pub fn vol_sqrt_t(&self, expiry: f64) -> f64 {
        self.sigma * expiry.sqrt()
    }

    pub fn discount(&self, expiry: f64) -> f64 {
        (-self.r * expiry).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

impl std::str::FromStr for OptionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "call" | "c" => Ok(OptionKind::Call),
            "put" | "p" => Ok(OptionKind::Put),
            other => Err(Error::invalid("kind", format!("unknown option kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for OptionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExerciseStyle {
    European,
    American,
}

/// A single-asset option contract.
///
/// The only barrier contract supported is the down-and-out European put,
/// with knock-out level `barrier`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub kind: OptionKind,
    pub strike: f64,
    pub expiry: f64,
    pub style: ExerciseStyle,
    pub barrier: Option<f64>,
}

impl OptionSpec {
    pub fn european(kind: OptionKind, strike: f64, expiry: f64) -> Self {
        Self {
            kind,
            strike,
            expiry,
            style: ExerciseStyle::European,
            barrier: None,
        }
    }

    pub fn american_put(strike: f64, expiry: f64) -> Self {
        Self {
            kind: OptionKind::Put,
            strike,
            expiry,
            style: ExerciseStyle::American,
            barrier: None,
        }
    }

    pub fn down_and_out_put(strike: f64, expiry: f64, barrier: f64) -> Self {
        Self {
            kind: OptionKind::Put,
            strike,
            expiry,
            style: ExerciseStyle::European,
            barrier: Some(barrier),
        }
    }

    pub fn is_vanilla_european(&self) -> bool {
        self.style == ExerciseStyle::European && self.barrier.is_none()
    }
}

/// Distribution summary of the discounted option payoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub sd: f64,
    /// Probability of expiring worthless.
    pub pew: f64,
}

/// Relative threshold below which a negative variance is treated as rounding.
pub const VARIANCE_CLAMP: f64 = 1e-12;

impl MomentSet {
    /// Assembles a moment set with `variance = second_moment - mean^2`.
    ///
    /// Negative variances within `VARIANCE_CLAMP * second_moment` of zero are
    /// clamped; anything more negative is reported as an inconsistency.
    pub fn from_moments(mean: f64, second_moment: f64, pew: f64) -> Result<Self> {
        let variance = second_moment - mean * mean;
        Self::with_variance(mean, second_moment, variance, pew)
    }

    /// Like [`MomentSet::from_moments`] but with a variance computed by a
    /// separate (better conditioned) route.
    pub fn with_variance(mean: f64, second_moment: f64, variance: f64, pew: f64) -> Result<Self> {
        let variance = clamp_variance(variance, second_moment)?;
        Ok(Self {
            mean,
            second_moment,
            variance,
            sd: variance.sqrt(),
            pew: pew.clamp(0.0, 1.0),
        })
    }

    pub fn zero_worthless() -> Self {
        Self {
            mean: 0.0,
            second_moment: 0.0,
            variance: 0.0,
            sd: 0.0,
            pew: 1.0,
        }
    }
}

pub(crate) fn clamp_variance(variance: f64, second_moment: f64) -> Result<f64> {
    if variance.is_nan() {
        return Err(Error::NumericalInconsistency {
            variance,
            second_moment,
        });
    }
    if variance >= 0.0 {
        Ok(variance)
    } else if variance >= -VARIANCE_CLAMP * second_moment.abs() {
        Ok(0.0)
    } else {
        Err(Error::NumericalInconsistency {
            variance,
            second_moment,
        })
    }
}

/// Checks the `MarketParams` invariants.
///
/// Negative rates are rejected. A zero rate passes here; engines whose
/// derivation needs `r > 0` (barrier, American) reject it in
/// [`validate_spec`].
pub fn validate_market(m: &MarketParams) -> Result<()> {
    if !m.r.is_finite() {
        return Err(Error::invalid("r", "must be finite"));
    }
    if m.r < 0.0 {
        return Err(Error::invalid("r", format!("negative rate {} is not supported", m.r)));
    }
    if !(m.sigma.is_finite() && m.sigma > 0.0) {
        return Err(Error::invalid(
            "sigma",
            format!("must be positive and finite, got {}", m.sigma),
        ));
    }
    if !(m.s0.is_finite() && m.s0 > 0.0) {
        return Err(Error::invalid(
            "s0",
            format!("must be positive and finite, got {}", m.s0),
        ));
    }
    Ok(())
}

/// Checks the `OptionSpec` invariants against a validated market.
pub fn validate_spec(m: &MarketParams, o: &OptionSpec) -> Result<()> {
    validate_market(m)?;
    if !(o.strike.is_finite() && o.strike > 0.0) {
        return Err(Error::invalid(
            "strike",
            format!("must be positive and finite, got {}", o.strike),
        ));
    }
    if !(o.expiry.is_finite() && o.expiry > 0.0) {
        return Err(Error::invalid(
            "expiry",
            format!("must be positive and finite, got {}", o.expiry),
        ));
    }
    if o.style == ExerciseStyle::American && o.kind == OptionKind::Call {
        return Err(Error::InvalidContract(
            "American calls are not supported (early exercise adds nothing without dividends)".into(),
        ));
    }
    if let Some(b) = o.barrier {
        if o.kind != OptionKind::Put || o.style != ExerciseStyle::European {
            return Err(Error::InvalidContract(
                "a barrier is only supported on a European put (down-and-out)".into(),
            ));
        }
        // B == s0 is accepted: the contract is knocked out and every
        // closed form collapses to the worthless profile.
        if !(b.is_finite() && b > 0.0 && b < o.strike && b <= m.s0) {
            return Err(Error::InvalidContract(format!(
                "barrier {b} must satisfy 0 < B < min(K, s0) = {}",
                o.strike.min(m.s0)
            )));
        }
    }
    if !o.is_vanilla_european() && m.r == 0.0 {
        return Err(Error::invalid(
            "r",
            "a zero rate is only supported for vanilla European contracts",
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn market(r: f64, sigma: f64, s0: f64) -> MarketParams {
        MarketParams { r, sigma, s0 }
    }

    #[test]
    fn accepts_figure_markets() {
        assert!(validate_market(&market(0.1, 0.15, 1.0)).is_ok());
        assert!(validate_market(&market(0.02, 0.25, 25.0)).is_ok());
    }

    #[test]
    fn rejects_zero_volatility() {
        let err = validate_market(&market(0.1, 0.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "sigma", .. }));
    }

    #[test]
    fn rejects_negative_rate_and_spot() {
        assert!(matches!(
            validate_market(&market(-0.01, 0.2, 1.0)),
            Err(Error::InvalidParameter { field: "r", .. })
        ));
        assert!(matches!(
            validate_market(&market(0.01, 0.2, 0.0)),
            Err(Error::InvalidParameter { field: "s0", .. })
        ));
        assert!(matches!(
            validate_market(&market(f64::NAN, 0.2, 1.0)),
            Err(Error::InvalidParameter { field: "r", .. })
        ));
    }

    #[test]
    fn barrier_contracts() {
        let m = market(0.1, 0.15, 1.0);
        assert!(validate_spec(&m, &OptionSpec::down_and_out_put(1.0, 1.0, 0.5)).is_ok());
        assert!(matches!(
            validate_spec(&m, &OptionSpec::down_and_out_put(1.0, 1.0, 1.5)),
            Err(Error::InvalidContract(_))
        ));
        // B must also sit below the spot
        assert!(validate_spec(&market(0.1, 0.15, 0.4), &OptionSpec::down_and_out_put(1.0, 1.0, 0.5)).is_err());
        let mut call = OptionSpec::european(OptionKind::Call, 1.0, 1.0);
        call.barrier = Some(0.5);
        assert!(matches!(validate_spec(&m, &call), Err(Error::InvalidContract(_))));
    }

    #[test]
    fn american_call_rejected() {
        let m = market(0.1, 0.15, 1.0);
        let mut spec = OptionSpec::american_put(1.0, 1.0);
        assert!(validate_spec(&m, &spec).is_ok());
        spec.kind = OptionKind::Call;
        assert!(matches!(validate_spec(&m, &spec), Err(Error::InvalidContract(_))));
    }

    #[test]
    fn zero_rate_only_for_vanilla() {
        let m = market(0.0, 0.2, 1.0);
        assert!(validate_spec(&m, &OptionSpec::european(OptionKind::Put, 1.0, 1.0)).is_ok());
        assert!(validate_spec(&m, &OptionSpec::american_put(1.0, 1.0)).is_err());
        assert!(validate_spec(&m, &OptionSpec::down_and_out_put(1.0, 1.0, 0.5)).is_err());
    }

    #[test]
    fn variance_clamp() {
        let ms = MomentSet::from_moments(1.0, 1.0 - 1e-14, 0.5).unwrap();
        assert_eq!(ms.variance, 0.0);
        assert!(matches!(
            MomentSet::from_moments(1.0, 0.9, 0.5),
            Err(Error::NumericalInconsistency { .. })
        ));
    }
}
