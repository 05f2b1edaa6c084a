//! Investment metrics built on the moments, and the mean-minus-deviation
//! pricing rule with its effective (implied) volatilities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning};
use crate::european;
use crate::market::{validate_market, MarketParams, MomentSet, OptionKind, OptionSpec};
use crate::output::{Cell, Table};

/// Volatility search interval for [`effective_volatility`].
pub const SIGMA_MIN: f64 = 1e-6;
pub const SIGMA_MAX: f64 = 5.0;

/// Bracket width at which bisection hands over to Newton.
const BISECTION_WIDTH: f64 = 1e-3;

/// Risk-aversion coefficient `q`: positive for averse buyers, negative for
/// risk seekers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskAdjustment {
    pub q: f64,
}

impl RiskAdjustment {
    pub fn new(q: f64) -> Result<Self> {
        if !q.is_finite() {
            return Err(Error::invalid("q", format!("must be finite, got {q}")));
        }
        Ok(Self { q })
    }

    pub fn warnings(&self) -> Vec<Warning> {
        if self.q.abs() > 0.1 {
            vec![Warning::LargeRiskAversion { q: self.q }]
        } else {
            Vec::new()
        }
    }
}

fn positive_mean(p: &MomentSet) -> Result<f64> {
    if p.mean > 0.0 {
        Ok(p.mean)
    } else {
        Err(Error::DegenerateMean(p.mean))
    }
}

/// Standard deviation per unit price, `sd / mean`.
pub fn risk_ratio(p: &MomentSet) -> Result<f64> {
    Ok(p.sd / positive_mean(p)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevCheck {
    /// `(sd / mean)^2`, an upper bound on the PEW.
    pub bound: f64,
    pub holds: bool,
}

/// Chebyshev's inequality applied to `P(payoff = 0) <= P(|X - E X| >= E X)`.
pub fn chebyshev_check(p: &MomentSet) -> Result<ChebyshevCheck> {
    let ratio = risk_ratio(p)?;
    let bound = ratio * ratio;
    Ok(ChebyshevCheck {
        bound,
        holds: p.pew <= bound,
    })
}

fn raw_adjusted_price(p: &MomentSet, adj: RiskAdjustment) -> f64 {
    p.mean - adj.q * p.sd
}

/// `mean - q sd`.
pub fn adjusted_price(p: &MomentSet, adj: RiskAdjustment) -> Result<f64> {
    let price = raw_adjusted_price(p, adj);
    if price > 0.0 {
        Ok(price)
    } else {
        Err(Error::NegativePrice(price))
    }
}

/// Volatility at which the Black-Scholes price of `spec` equals `target`.
///
/// Bisection on `[SIGMA_MIN, SIGMA_MAX]` down to a `1e-3` bracket, then
/// Newton with the analytic vega, kept inside the bracket.
pub fn effective_volatility(m: &MarketParams, spec: &OptionSpec, target: f64) -> Result<f64> {
    if !spec.is_vanilla_european() {
        return Err(Error::InvalidContract(
            "effective volatility needs a vanilla European contract".into(),
        ));
    }
    if !target.is_finite() {
        return Err(Error::invalid("target_price", "must be finite"));
    }
    let price = |s: f64| european::bs_price(m, spec, s);
    let low = price(SIGMA_MIN)?;
    let high = price(SIGMA_MAX)?;
    if !(target > low && target < high) {
        return Err(Error::OutOfBracket { target, low, high });
    }
    let tol = 1e-12 * target.max(1.0);

    let (mut lo, mut hi) = (SIGMA_MIN, SIGMA_MAX);
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        let f = price(mid)? - target;
        if f == 0.0 {
            return Ok(mid);
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut sigma = 0.5 * (lo + hi);
    let mut best = (f64::INFINITY, sigma);
    for _ in 0..100 {
        let f = price(sigma)? - target;
        if f.abs() < best.0 {
            best = (f.abs(), sigma);
        }
        if f.abs() < tol {
            return Ok(sigma);
        }
        if f < 0.0 {
            lo = sigma;
        } else {
            hi = sigma;
        }
        let step = sigma - f / european::vega(m, spec, sigma)?;
        sigma = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    // the price is flat to rounding across the remaining bracket
    Ok(best.1)
}

/// Why a smile point has no effective volatility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InversionFailure {
    /// Adjusted price at or below the zero-volatility price.
    BelowIntrinsic,
    /// Adjusted price at or above the price at `SIGMA_MAX`.
    AboveMaxVol,
    /// `mean - q sd <= 0`.
    NegativePrice,
}

impl InversionFailure {
    pub fn as_str(self) -> &'static str {
        match self {
            InversionFailure::BelowIntrinsic => "below-intrinsic",
            InversionFailure::AboveMaxVol => "above-max-vol",
            InversionFailure::NegativePrice => "negative-price",
        }
    }
}

impl std::fmt::Display for InversionFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmilePoint {
    pub strike: f64,
    pub bs_price: f64,
    /// `mean - q sd`, also when it is not positive.
    pub adjusted_price: f64,
    pub effective_vol: Option<f64>,
    pub failure: Option<InversionFailure>,
}

fn smile_point(m: &MarketParams, spec: &OptionSpec, adj: RiskAdjustment) -> Result<SmilePoint> {
    let profile = european::risk_profile(m, spec)?;
    let raw = raw_adjusted_price(&profile, adj);
    let mut point = SmilePoint {
        strike: spec.strike,
        bs_price: profile.mean,
        adjusted_price: raw,
        effective_vol: None,
        failure: None,
    };
    match adjusted_price(&profile, adj).and_then(|p| effective_volatility(m, spec, p)) {
        Ok(vol) => point.effective_vol = Some(vol),
        Err(Error::NegativePrice(_)) => point.failure = Some(InversionFailure::NegativePrice),
        Err(Error::OutOfBracket { target, low, .. }) => {
            point.failure = Some(if target <= low {
                InversionFailure::BelowIntrinsic
            } else {
                InversionFailure::AboveMaxVol
            })
        }
        Err(e) => return Err(e),
    }
    Ok(point)
}

/// Effective volatilities of the risk-adjusted prices over a strike grid,
/// sorted by strike. Inversion failures are recorded per point.
pub fn smile_curve(
    m: &MarketParams,
    expiry: f64,
    kind: OptionKind,
    adj: RiskAdjustment,
    strikes: &[f64],
) -> Result<Vec<SmilePoint>> {
    validate_market(m)?;
    if strikes.is_empty() {
        return Err(Error::invalid("strikes", "grid is empty"));
    }
    if let Some(k) = strikes.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
        return Err(Error::invalid("strikes", format!("strike {k} is not positive")));
    }
    let mut sorted = strikes.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .par_iter()
        .map(|&k| smile_point(m, &OptionSpec::european(kind, k, expiry), adj))
        .collect()
}

/// The smile CSV layout: `strike, bs_price, adjusted_price, effective_vol,
/// failure_reason`.
pub fn smile_table(points: &[SmilePoint]) -> Table {
    let mut t = Table::new([
        "strike",
        "bs_price",
        "adjusted_price",
        "effective_vol",
        "failure_reason",
    ]);
    for p in points {
        t.push(vec![
            p.strike.into(),
            p.bs_price.into(),
            p.adjusted_price.into(),
            p.effective_vol.into(),
            p.failure.map_or(Cell::Empty, |f| f.as_str().into()),
        ]);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SmileShape {
    /// Both wings above the at-the-money value.
    Smile,
    /// Both wings below.
    Frown,
    /// Every inverted point within the tolerance of the at-the-money value.
    Flat,
    /// None of the above, or too few inverted points.
    Mixed,
}

/// Classifies a curve by comparing its outermost inverted points on each
/// side of `atm_strike` with the inverted point nearest to it.
pub fn smile_shape(points: &[SmilePoint], atm_strike: f64, flat_tol: f64) -> SmileShape {
    let inverted: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.effective_vol.map(|v| (p.strike, v)))
        .collect();
    let Some(&(_, atm)) = inverted
        .iter()
        .min_by(|a, b| (a.0 - atm_strike).abs().total_cmp(&(b.0 - atm_strike).abs()))
    else {
        return SmileShape::Mixed;
    };
    if inverted.iter().all(|(_, v)| (v - atm).abs() <= flat_tol) {
        return SmileShape::Flat;
    }
    let left = inverted.iter().find(|(k, _)| *k < atm_strike);
    let right = inverted.iter().rev().find(|(k, _)| *k > atm_strike);
    match (left, right) {
        (Some(&(_, l)), Some(&(_, r))) if l > atm && r > atm => SmileShape::Smile,
        (Some(&(_, l)), Some(&(_, r))) if l < atm && r < atm => SmileShape::Frown,
        _ => SmileShape::Mixed,
    }
}
