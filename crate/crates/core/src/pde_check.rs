//! Finite-difference residuals of the discounted Black-Scholes operator.
//!
//! A quantity `f(s0, T)` that is the expectation of the n-th power of a
//! discounted payoff solves
//!
//! ```text
//! f_T = 1/2 sigma^2 s0^2 f_ss + r s0 f_s - kappa r f
//! ```
//!
//! with `kappa = n` (0 for the probability of expiring worthless). The
//! helpers here measure how well a closed form satisfies that equation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which closed-form quantity a residual is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentField {
    Mean,
    SecondMoment,
    Pew,
}

impl MomentField {
    /// Coefficient of the discount term in the PDE this field satisfies.
    pub fn kappa(self) -> f64 {
        match self {
            MomentField::Mean => 1.0,
            MomentField::SecondMoment => 2.0,
            MomentField::Pew => 0.0,
        }
    }

    pub const ALL: [MomentField; 3] = [MomentField::Mean, MomentField::SecondMoment, MomentField::Pew];
}

impl std::fmt::Display for MomentField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MomentField::Mean => "mean",
            MomentField::SecondMoment => "second_moment",
            MomentField::Pew => "pew",
        })
    }
}

/// Central-difference step sizes in spot and expiry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizes {
    pub ds: f64,
    pub dt: f64,
}

impl StepSizes {
    pub fn uniform(h: f64) -> Self {
        Self { ds: h, dt: h }
    }
}

impl Default for StepSizes {
    fn default() -> Self {
        Self::uniform(1e-4)
    }
}

/// `|f_T - 1/2 sigma^2 s0^2 f_ss - r s0 f_s + kappa r f|` by central differences.
pub(crate) fn black_scholes_residual<F>(
    f: F,
    s0: f64,
    expiry: f64,
    r: f64,
    sigma: f64,
    kappa: f64,
    steps: StepSizes,
) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let StepSizes { ds, dt } = steps;
    if !(ds > 0.0 && ds < s0) {
        return Err(Error::invalid("ds", format!("spot step {ds} must lie in (0, s0)")));
    }
    if !(dt > 0.0 && dt < expiry) {
        return Err(Error::invalid("dt", format!("time step {dt} must lie in (0, T)")));
    }
    let centre = f(s0, expiry)?;
    let up = f(s0 + ds, expiry)?;
    let down = f(s0 - ds, expiry)?;
    let later = f(s0, expiry + dt)?;
    let earlier = f(s0, expiry - dt)?;

    let f_t = (later - earlier) / (2.0 * dt);
    let f_s = (up - down) / (2.0 * ds);
    let f_ss = (up - 2.0 * centre + down) / (ds * ds);

    let rhs = 0.5 * sigma * sigma * s0 * s0 * f_ss + r * s0 * f_s - kappa * r * centre;
    Ok((f_t - rhs).abs())
}
