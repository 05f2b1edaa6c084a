//! Down-and-out European put: closed-form PEW, mean and second moment.
//!
//! Writing the terminal price as `S0 e^{sigma Y(T)}` with `Y` a Brownian
//! motion with drift `b = r/sigma - sigma/2`, the option survives iff
//! `min Y >= a = ln(B/S0)/sigma` and pays iff `Y(T) <= ln(K/S0)/sigma`. The
//! joint law of `(min Y, Y(T))` reduces every moment to Gaussian integrals,
//! giving the twelve `Q` arguments below.

use std::f64::consts::PI;

use crate::error::{Error, Result, Warning};
use crate::european;
use crate::market::{validate_spec, MarketParams, MomentSet, OptionKind, OptionSpec};
use crate::normal;
use crate::pde_check::{black_scholes_residual, MomentField, StepSizes};

/// Density of `Y(T)` at `x` jointly with `min Y <= a`, for a drifted
/// Brownian motion `Y(t) = W(t) + b t` started at 0.
///
/// The correction factor `A` equals 1 when the minimum condition is
/// automatic (`a >= x` or `a >= 0`) and `exp(2a(x - a)/T)` otherwise; it
/// does not depend on the drift.
pub fn drifted_min_density(x: f64, a: f64, b: f64, expiry: f64) -> f64 {
    let correction = if a >= x || a >= 0.0 {
        1.0
    } else {
        (2.0 * a * (x - a) / expiry).exp()
    };
    let z = x - b * expiry;
    correction * (-z * z / (2.0 * expiry)).exp() / (2.0 * PI * expiry).sqrt()
}

/// Residual of the forward Kolmogorov equation
/// `f_T = 1/2 f_xx - b f_x` for [`drifted_min_density`], central differences.
pub fn kolmogorov_residual(x: f64, a: f64, b: f64, expiry: f64, steps: StepSizes) -> Result<f64> {
    let StepSizes { ds: dx, dt } = steps;
    if !(expiry > dt && dt > 0.0 && dx > 0.0) {
        return Err(Error::invalid("steps", "need 0 < dt < T and dx > 0"));
    }
    if (x - a).abs() <= dx && a < 0.0 {
        return Err(Error::invalid("x", "stencil straddles the branch point x = a"));
    }
    let f = |x: f64, t: f64| drifted_min_density(x, a, b, t);
    let centre = f(x, expiry);
    let f_t = (f(x, expiry + dt) - f(x, expiry - dt)) / (2.0 * dt);
    let f_x = (f(x + dx, expiry) - f(x - dx, expiry)) / (2.0 * dx);
    let f_xx = (f(x + dx, expiry) - 2.0 * centre + f(x - dx, expiry)) / (dx * dx);
    Ok((f_t - 0.5 * f_xx + b * f_x).abs())
}

/// Log-barrier distance, drift, and the twelve `Q` arguments.
///
/// `q[4..8]` and `q[8..12]` repeat `q[0..4]` with `r - sigma^2/2` replaced
/// by `r + sigma^2/2` and `r + 3 sigma^2/2` respectively.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierCoefficients {
    pub a: f64,
    pub b: f64,
    pub q: [f64; 12],
}

impl BarrierCoefficients {
    pub fn new(m: &MarketParams, strike: f64, expiry: f64, barrier: f64) -> Self {
        let (r, sigma, s0) = (m.r, m.sigma, m.s0);
        let v = sigma * expiry.sqrt();
        // written as sums of logs so that s0 == B makes the pairs
        // (q0, q3) and (q1, q2) coincide exactly
        let logs = [
            (s0 / barrier).ln(),
            (s0 / strike).ln(),
            (barrier / s0).ln() + (barrier / strike).ln(),
            (barrier / s0).ln(),
        ];
        let mut q = [0.0; 12];
        for (block, shift) in [-0.5, 0.5, 1.5].into_iter().enumerate() {
            let drift = (r + shift * sigma * sigma) * expiry;
            for (i, l) in logs.iter().enumerate() {
                q[4 * block + i] = (l + drift) / v;
            }
        }
        Self {
            a: (barrier / s0).ln() / sigma,
            b: r / sigma - sigma / 2.0,
            q,
        }
    }

    /// `Phi(q_i) - Phi(q_i+1) + ratio^power (Phi(q_i+2) - Phi(q_i+3))` for block `k`.
    fn bracket(&self, block: usize, ratio: f64, power: f64) -> f64 {
        let q = &self.q[4 * block..4 * block + 4];
        let phi = |x: f64| normal::cdf(x);
        phi(q[0]) - phi(q[1]) + ratio.powf(power) * (phi(q[2]) - phi(q[3]))
    }
}

#[derive(Debug, Clone, Copy)]
struct DaoInputs {
    m: MarketParams,
    strike: f64,
    expiry: f64,
    barrier: f64,
}

impl DaoInputs {
    fn new(m: &MarketParams, strike: f64, expiry: f64, barrier: f64) -> Result<Self> {
        validate_spec(m, &OptionSpec::down_and_out_put(strike, expiry, barrier))?;
        Ok(Self {
            m: *m,
            strike,
            expiry,
            barrier,
        })
    }

    fn coefficients(&self) -> BarrierCoefficients {
        BarrierCoefficients::new(&self.m, self.strike, self.expiry, self.barrier)
    }

    /// `2r / sigma^2`
    fn alpha(&self) -> f64 {
        2.0 * self.m.r / (self.m.sigma * self.m.sigma)
    }

    fn ratio(&self) -> f64 {
        self.barrier / self.m.s0
    }

    fn brackets(&self) -> [f64; 3] {
        let c = self.coefficients();
        let alpha = self.alpha();
        [
            c.bracket(0, self.ratio(), alpha - 1.0),
            c.bracket(1, self.ratio(), alpha + 1.0),
            c.bracket(2, self.ratio(), alpha + 3.0),
        ]
    }

    fn pew(&self) -> f64 {
        (1.0 - self.brackets()[0]).clamp(0.0, 1.0)
    }

    fn mean(&self) -> f64 {
        let [b0, b1, _] = self.brackets();
        let kd = self.strike * self.m.discount(self.expiry);
        (kd * b0 - self.m.s0 * b1).max(0.0)
    }

    fn second_moment(&self) -> f64 {
        let [b0, b1, b2] = self.brackets();
        let (k, s0) = (self.strike, self.m.s0);
        let disc = self.m.discount(self.expiry);
        let growth = (self.m.sigma * self.m.sigma * self.expiry).exp();
        (k * k * disc * disc * b0 - 2.0 * k * s0 * disc * b1 + s0 * s0 * growth * b2).max(0.0)
    }
}

/// Probability the down-and-out put expires worthless (knocked out or out of
/// the money at expiry).
pub fn dao_put_pew(m: &MarketParams, strike: f64, expiry: f64, barrier: f64) -> Result<f64> {
    Ok(DaoInputs::new(m, strike, expiry, barrier)?.pew())
}

pub fn dao_put_mean(m: &MarketParams, strike: f64, expiry: f64, barrier: f64) -> Result<f64> {
    Ok(DaoInputs::new(m, strike, expiry, barrier)?.mean())
}

pub fn dao_put_second_moment(m: &MarketParams, strike: f64, expiry: f64, barrier: f64) -> Result<f64> {
    Ok(DaoInputs::new(m, strike, expiry, barrier)?.second_moment())
}

pub fn dao_put_profile(m: &MarketParams, strike: f64, expiry: f64, barrier: f64) -> Result<MomentSet> {
    let inputs = DaoInputs::new(m, strike, expiry, barrier)?;
    MomentSet::from_moments(inputs.mean(), inputs.second_moment(), inputs.pew())
}

/// Diagnostics for evaluating the down-and-out formulas in this market.
pub fn diagnostics(m: &MarketParams) -> Vec<Warning> {
    let exponent = 2.0 * m.r / (m.sigma * m.sigma) - 1.0;
    if exponent < 0.0 {
        vec![Warning::NegativeBarrierExponent { exponent }]
    } else {
        Vec::new()
    }
}

fn field_value(field: MomentField, m: &MarketParams, strike: f64, expiry: f64, barrier: f64) -> Result<f64> {
    let inputs = DaoInputs::new(m, strike, expiry, barrier)?;
    Ok(match field {
        MomentField::Mean => inputs.mean(),
        MomentField::SecondMoment => inputs.second_moment(),
        MomentField::Pew => inputs.pew(),
    })
}

/// Residual of the field's own Black-Scholes-type PDE at `(m.s0, expiry)`.
pub fn dao_pde_residual(
    field: MomentField,
    m: &MarketParams,
    strike: f64,
    expiry: f64,
    barrier: f64,
    steps: StepSizes,
) -> Result<f64> {
    dao_pde_residual_with_kappa(field, field.kappa(), m, strike, expiry, barrier, steps)
}

pub fn dao_pde_residual_with_kappa(
    field: MomentField,
    kappa: f64,
    m: &MarketParams,
    strike: f64,
    expiry: f64,
    barrier: f64,
    steps: StepSizes,
) -> Result<f64> {
    DaoInputs::new(m, strike, expiry, barrier)?;
    if m.s0 - steps.ds <= barrier {
        return Err(Error::invalid("ds", "stencil reaches the barrier"));
    }
    black_scholes_residual(
        |s0, t| field_value(field, &m.with_spot(s0), strike, t, barrier),
        m.s0,
        expiry,
        m.r,
        m.sigma,
        kappa,
        steps,
    )
}

/// Vanilla put profile with the same strike and expiry, for comparisons.
pub fn vanilla_put_profile(m: &MarketParams, strike: f64, expiry: f64) -> Result<MomentSet> {
    european::risk_profile(m, &OptionSpec::european(OptionKind::Put, strike, expiry))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn barrier_market(s0: f64) -> MarketParams {
        MarketParams {
            r: 0.1,
            sigma: 0.15,
            s0,
        }
    }

    // 40-digit quadrature of the survival-weighted payoff integrals at
    // r = 0.1, sigma = 0.15, K = 1, B = 0.5, s0 = 0.8, T = 1.
    const PEW_08: f64 = 0.185_370_822_272_755_35;
    const MEAN_08: f64 = 0.119_491_245_001_674_37;
    const SECOND_08: f64 = 0.023_393_396_097_263_448;

    #[test]
    fn frozen_quadrature_values() {
        let m = barrier_market(0.8);
        assert!((dao_put_pew(&m, 1.0, 1.0, 0.5).unwrap() - PEW_08).abs() < 1e-14);
        assert!((dao_put_mean(&m, 1.0, 1.0, 0.5).unwrap() - MEAN_08).abs() < 1e-14);
        assert!((dao_put_second_moment(&m, 1.0, 1.0, 0.5).unwrap() - SECOND_08).abs() < 1e-14);
    }

    #[test]
    fn q_shift_structure() {
        let m = barrier_market(0.8);
        let c = BarrierCoefficients::new(&m, 1.0, 2.0, 0.5);
        let v = 0.15 * 2f64.sqrt();
        for i in 0..4 {
            assert!((c.q[4 + i] - c.q[i] - v).abs() < 1e-13);
            assert!((c.q[8 + i] - c.q[i] - 2.0 * v).abs() < 1e-13);
        }
        assert!(c.a < 0.0);
        assert!((c.b - (0.1 / 0.15 - 0.075)).abs() < 1e-15);
    }

    #[test]
    fn density_branches() {
        // a >= 0: plain N(bT, T) density
        for x in [-2.0, -0.3, 0.0, 0.7, 3.0] {
            let plain = (-(x - 0.6f64).powi(2) / 4.0).exp() / (4.0 * PI).sqrt();
            assert!((drifted_min_density(x, 0.2, 0.3, 2.0) - plain).abs() < 1e-16);
        }
        // continuity at x = a
        let at = drifted_min_density(-1.0, -1.0, 0.3, 1.0);
        let just_above = drifted_min_density(-1.0 + 1e-12, -1.0, 0.3, 1.0);
        assert!((at - just_above).abs() < 1e-11);
    }

    #[test]
    fn kolmogorov_examples() {
        let steps = StepSizes::uniform(1e-4);
        assert!(kolmogorov_residual(0.5, -1.0, 0.3, 1.0, steps).unwrap() < 1e-6);
        assert!(kolmogorov_residual(-1.5, -1.0, 0.3, 1.0, steps).unwrap() < 1e-6);
        assert!(kolmogorov_residual(0.5, -1.0, 0.0, 1.0, steps).unwrap() < 1e-6);
        assert!(kolmogorov_residual(-1.0, -1.0, 0.3, 1.0, steps).is_err());
    }

    #[test]
    fn at_the_barrier_everything_collapses() {
        let m = barrier_market(0.5);
        let p = dao_put_profile(&m, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(p, MomentSet::zero_worthless());
        let near = barrier_market(0.5 * (1.0 + 1e-12));
        assert!((dao_put_pew(&near, 1.0, 1.0, 0.5).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn boundary_collapse_is_monotone() {
        let mut prev = [f64::INFINITY; 3];
        for eps in [1e-3, 1e-6, 1e-9] {
            let m = barrier_market(0.5 * (1.0 + eps));
            let p = dao_put_profile(&m, 1.0, 1.0, 0.5).unwrap();
            let cur = [p.mean, p.second_moment, 1.0 - p.pew];
            for i in 0..3 {
                assert!(cur[i] < prev[i], "eps {eps} index {i}: {} !< {}", cur[i], prev[i]);
            }
            prev = cur;
        }
        assert!(prev.iter().all(|v| *v < 1e-7));
    }

    #[test]
    fn vanishing_barrier_recovers_vanilla() {
        let m = barrier_market(0.9);
        let dao = dao_put_profile(&m, 1.0, 1.0, 0.9e-8).unwrap();
        let van = vanilla_put_profile(&m, 1.0, 1.0).unwrap();
        assert!((dao.mean - van.mean).abs() < 1e-10);
        assert!((dao.second_moment - van.second_moment).abs() < 1e-10);
        assert!((dao.pew - van.pew).abs() < 1e-10);
    }

    #[test]
    fn far_barrier_matches_vanilla_relatively() {
        let m = barrier_market(50.0);
        let dao = dao_put_profile(&m, 45.0, 1.0, 0.5).unwrap();
        let van = vanilla_put_profile(&m, 45.0, 1.0).unwrap();
        for (a, b) in [(dao.mean, van.mean), (dao.variance, van.variance), (dao.pew, van.pew)] {
            assert!((a - b).abs() <= 1e-6 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn residuals() {
        let m = barrier_market(0.8);
        let steps = StepSizes::uniform(1e-4);
        for field in MomentField::ALL {
            let res = dao_pde_residual(field, &m, 1.0, 1.0, 0.5, steps).unwrap();
            assert!(res < 1e-6, "{field}: {res}");
        }
        let wrong = dao_pde_residual_with_kappa(MomentField::SecondMoment, 1.0, &m, 1.0, 1.0, 0.5, steps).unwrap();
        assert!(wrong > 1e-3, "{wrong}");
    }

    #[test]
    fn rejects_bad_barriers() {
        let m = barrier_market(1.0);
        assert!(matches!(
            dao_put_mean(&m, 1.0, 1.0, 1.5),
            Err(Error::InvalidContract(_))
        ));
        assert!(matches!(
            dao_put_mean(&m, 1.0, 1.0, 1.0),
            Err(Error::InvalidContract(_))
        ));
        assert!(dao_put_mean(&barrier_market(0.4), 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn low_rate_warning() {
        assert!(diagnostics(&barrier_market(1.0)).is_empty());
        let m = MarketParams {
            r: 0.01,
            sigma: 0.3,
            s0: 1.0,
        };
        assert!(matches!(diagnostics(&m)[..], [Warning::NegativeBarrierExponent { .. }]));
    }
}
