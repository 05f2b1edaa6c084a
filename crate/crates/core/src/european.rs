//! Closed-form moments and probability of expiring worthless for vanilla
//! European calls and puts under a lognormal underlying.
//!
//! With `Z` standard normal the discounted payoffs are
//!
//! ```text
//! C = e^{-rT} (S0 e^{(r - sigma^2/2) T + sigma sqrt(T) Z} - K)_+
//! P = e^{-rT} (K - S0 e^{(r - sigma^2/2) T + sigma sqrt(T) Z})_+
//! ```
//!
//! and the call finishes in the money exactly when `Z > d`. Every moment is a
//! finite sum of terms `S0^j e^{j(j-1) sigma^2 T / 2} (K e^{-rT})^{n-j}`
//! weighted by `Phi(+-d + j sigma sqrt(T))`.

use crate::error::{Error, Result};
use crate::market::{validate_spec, MarketParams, MomentSet, OptionKind, OptionSpec};
use crate::normal;
use crate::pde_check::{black_scholes_residual, MomentField, StepSizes};

/// Highest moment order supported by [`nth_moment`].
pub const MAX_MOMENT_ORDER: u32 = 20;

/// Terms larger than this are accumulated in log space.
const LOG_SPACE_THRESHOLD: f64 = 1e300;

/// The moneyness parameter
/// `d = ln(K e^{-rT} / S0) / (sigma sqrt(T)) + sigma sqrt(T) / 2`.
///
/// The call expires worthless with probability `Phi(d)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DParameter(pub f64);

impl DParameter {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn d_value(m: &MarketParams, strike: f64, expiry: f64) -> Result<DParameter> {
    validate_spec(m, &OptionSpec::european(OptionKind::Put, strike, expiry))?;
    Ok(DParameter(Kernel::new(m, strike, expiry).d))
}

/// Precomputed quantities shared by every formula.
#[derive(Debug, Clone, Copy)]
struct Kernel {
    kind: OptionKind,
    s0: f64,
    /// K e^{-rT}
    kd: f64,
    /// sigma sqrt(T)
    v: f64,
    /// sigma^2 T
    var_t: f64,
    d: f64,
}

impl Kernel {
    fn new(m: &MarketParams, strike: f64, expiry: f64) -> Self {
        let v = m.sigma * expiry.sqrt();
        let kd = strike * (-m.r * expiry).exp();
        Self {
            kind: OptionKind::Put,
            s0: m.s0,
            kd,
            v,
            var_t: m.sigma * m.sigma * expiry,
            d: (kd / m.s0).ln() / v + 0.5 * v,
        }
    }

    fn for_spec(m: &MarketParams, spec: &OptionSpec) -> Result<Self> {
        validate_spec(m, spec)?;
        if !spec.is_vanilla_european() {
            return Err(Error::InvalidContract(
                "closed-form vanilla analytics need a European contract without barrier".into(),
            ));
        }
        Ok(Self {
            kind: spec.kind,
            ..Self::new(m, spec.strike, spec.expiry)
        })
    }

    /// Argument of Phi for the j-th term.
    fn arg(&self, j: u32) -> f64 {
        match self.kind {
            OptionKind::Call => -self.d + j as f64 * self.v,
            OptionKind::Put => self.d - j as f64 * self.v,
        }
    }

    /// Probability the option finishes in the money.
    fn exercise_probability(&self) -> f64 {
        normal::cdf(self.arg(0))
    }

    fn mean(&self) -> f64 {
        let raw = match self.kind {
            OptionKind::Call => self.s0 * normal::cdf(-self.d + self.v) - self.kd * normal::cdf(-self.d),
            OptionKind::Put => self.kd * normal::cdf(self.d) - self.s0 * normal::cdf(self.d - self.v),
        };
        raw.max(0.0)
    }

    fn second_moment(&self) -> f64 {
        let (kd, s0) = (self.kd, self.s0);
        let raw = match self.kind {
            OptionKind::Call => {
                kd * kd * normal::cdf(-self.d) - 2.0 * kd * s0 * normal::cdf(-self.d + self.v)
                    + s0 * s0 * self.var_t.exp() * normal::cdf(-self.d + 2.0 * self.v)
            }
            OptionKind::Put => {
                kd * kd * normal::cdf(self.d) - 2.0 * kd * s0 * normal::cdf(self.d - self.v)
                    + s0 * s0 * self.var_t.exp() * normal::cdf(self.d - 2.0 * self.v)
            }
        };
        raw.max(0.0)
    }

    fn pew(&self) -> f64 {
        match self.kind {
            OptionKind::Call => normal::cdf(self.d),
            OptionKind::Put => normal::cdf(-self.d),
        }
    }

    /// Sign of the j-th term of the n-th moment.
    fn sign(&self, n: u32, j: u32) -> f64 {
        let odd = match self.kind {
            OptionKind::Call => (n - j) % 2 == 1,
            OptionKind::Put => j % 2 == 1,
        };
        if odd {
            -1.0
        } else {
            1.0
        }
    }

    fn nth_moment(&self, n: u32) -> Result<f64> {
        if n == 0 || n > MAX_MOMENT_ORDER {
            return Err(Error::invalid(
                "n",
                format!("moment order must be in 1..={MAX_MOMENT_ORDER}, got {n}"),
            ));
        }
        let log_threshold = LOG_SPACE_THRESHOLD.ln();
        let mut logs = Vec::with_capacity(n as usize + 1);
        let mut needs_log_space = false;
        for j in 0..=n {
            let phi = normal::cdf(self.arg(j));
            let log_mag = if phi > 0.0 {
                binomial(n, j).ln()
                    + (n - j) as f64 * self.kd.ln()
                    + j as f64 * self.s0.ln()
                    + growth_exponent(j) * self.var_t
                    + phi.ln()
            } else {
                f64::NEG_INFINITY
            };
            needs_log_space |= log_mag > log_threshold;
            logs.push((phi, log_mag));
        }

        if !needs_log_space {
            // Same evaluation order as `mean` and `second_moment`, so n = 1, 2
            // reproduce them bit for bit.
            let mut sum = 0.0;
            for (j, &(phi, _)) in (0..=n).zip(&logs) {
                let term = binomial(n, j)
                    * ipow(self.kd, n - j)
                    * ipow(self.s0, j)
                    * (growth_exponent(j) * self.var_t).exp()
                    * phi;
                sum += self.sign(n, j) * term;
            }
            // an intermediate power can still overflow even though the term fits
            if sum.is_finite() {
                return Ok(sum.max(0.0));
            }
        }
        let peak = logs.iter().map(|&(_, l)| l).fold(f64::NEG_INFINITY, f64::max);
        let scaled: f64 = (0..=n)
            .zip(&logs)
            .map(|(j, &(_, l))| self.sign(n, j) * (l - peak).exp())
            .sum();
        let value = scaled * peak.exp();
        if !value.is_finite() {
            return Err(Error::MomentOverflow { order: n });
        }
        Ok(value.max(0.0))
    }

    /// Variance through the split on the exercise event `A`:
    /// `Var = p Var(X | A) + (1 - p) E[P]^2 / p` with `X` the discounted
    /// terminal stock. Avoids the cancellation in `E[P^2] - E[P]^2` when
    /// `K >> S0`.
    fn variance(&self, mean: f64) -> f64 {
        let p = self.exercise_probability();
        if p <= 0.0 {
            return 0.0;
        }
        let m1 = self.s0 * normal::cdf(self.arg(1));
        let m2 = self.s0 * self.s0 * self.var_t.exp() * normal::cdf(self.arg(2));
        let conditional = (m2 - m1 * m1 / p).max(0.0);
        conditional + (1.0 - p) / p * mean * mean
    }
}

fn growth_exponent(j: u32) -> f64 {
    0.5 * (j * j.saturating_sub(1)) as f64
}

fn ipow(x: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..k {
        acc *= x;
    }
    acc
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0_f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Expected discounted payoff, i.e. the Black-Scholes price.
pub fn mean(m: &MarketParams, spec: &OptionSpec) -> Result<f64> {
    Ok(Kernel::for_spec(m, spec)?.mean())
}

/// `E[C^2]` or `E[P^2]` of the discounted payoff.
pub fn second_moment(m: &MarketParams, spec: &OptionSpec) -> Result<f64> {
    Ok(Kernel::for_spec(m, spec)?.second_moment())
}

/// n-th raw moment of the discounted payoff, `1 <= n <= MAX_MOMENT_ORDER`.
pub fn nth_moment(m: &MarketParams, spec: &OptionSpec, n: u32) -> Result<f64> {
    Kernel::for_spec(m, spec)?.nth_moment(n)
}

/// Probability of expiring worthless: `Phi(d)` for calls, `Phi(-d)` for puts.
pub fn pew(m: &MarketParams, spec: &OptionSpec) -> Result<f64> {
    Ok(Kernel::for_spec(m, spec)?.pew())
}

pub fn risk_profile(m: &MarketParams, spec: &OptionSpec) -> Result<MomentSet> {
    let k = Kernel::for_spec(m, spec)?;
    let mean = k.mean();
    let second = k.second_moment();
    // the direct difference must agree with the split form up to rounding
    crate::market::clamp_variance(second - mean * mean, second)?;
    MomentSet::with_variance(mean, second, k.variance(mean), k.pew())
}

/// Black-Scholes price of a vanilla European option at volatility `sigma`.
pub fn bs_price(m: &MarketParams, spec: &OptionSpec, sigma: f64) -> Result<f64> {
    mean(&MarketParams { sigma, ..*m }, spec)
}

/// Derivative of [`bs_price`] with respect to volatility.
pub fn vega(m: &MarketParams, spec: &OptionSpec, sigma: f64) -> Result<f64> {
    let k = Kernel::for_spec(&MarketParams { sigma, ..*m }, spec)?;
    Ok(m.s0 * normal::pdf(k.v - k.d) * spec.expiry.sqrt())
}

fn field_value(field: MomentField, m: &MarketParams, spec: &OptionSpec) -> Result<f64> {
    match field {
        MomentField::Mean => mean(m, spec),
        MomentField::SecondMoment => second_moment(m, spec),
        MomentField::Pew => pew(m, spec),
    }
}

/// Residual of the field's own PDE (`kappa` = 1, 2, 0 for mean, second
/// moment, PEW) at `(m.s0, spec.expiry)`.
pub fn pde_residual(field: MomentField, m: &MarketParams, spec: &OptionSpec, steps: StepSizes) -> Result<f64> {
    pde_residual_with_kappa(field, field.kappa(), m, spec, steps)
}

/// As [`pde_residual`] with an explicit discount coefficient, so the wrong
/// PDE can be tested against a field.
pub fn pde_residual_with_kappa(
    field: MomentField,
    kappa: f64,
    m: &MarketParams,
    spec: &OptionSpec,
    steps: StepSizes,
) -> Result<f64> {
    Kernel::for_spec(m, spec)?;
    black_scholes_residual(
        |s0, expiry| field_value(field, &m.with_spot(s0), &OptionSpec { expiry, ..*spec }),
        m.s0,
        spec.expiry,
        m.r,
        m.sigma,
        kappa,
        steps,
    )
}
