//! Shared helpers for the integration tests: an adaptive Gauss-Kronrod
//! integrator and the integral forms of the moments it is applied to.

#![allow(dead_code, clippy::excessive_precision)]

use optrisk::{MarketParams, OptionKind};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// (Kronrod estimate, |Kronrod - Gauss|) on one interval.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let pair = f(c - x) + f(c + x);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    // rounding caps the attainable accuracy at a few ulps of the value
    if err <= tol.max(1e-15 * value.abs()) || depth == 0 {
        return value;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// Adaptive G7-K15 quadrature of `f` over `[a, b]`, pre-split into unit
/// pieces so narrow peaks on long intervals are not missed.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let pieces = (b - a).ceil().max(1.0) as usize;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| adapt(&f, a + i as f64 * h, a + (i + 1) as f64 * h, tol / pieces as f64, 30))
        .sum()
}

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `E[(e^{-rT} payoff)^n]` by integrating over the standard normal driver.
pub fn european_moment(m: &MarketParams, kind: OptionKind, strike: f64, expiry: f64, n: i32) -> f64 {
    let vol = m.sigma * expiry.sqrt();
    let drift = (m.r - 0.5 * m.sigma * m.sigma) * expiry;
    let disc = (-m.r * expiry).exp();
    let kink = ((strike / m.s0).ln() - drift) / vol;
    let payoff = move |z: f64| {
        let s = m.s0 * (drift + vol * z).exp();
        let x = match kind {
            OptionKind::Call => s - strike,
            OptionKind::Put => strike - s,
        };
        (disc * x.max(0.0)).powi(n) * phi(z)
    };
    match kind {
        OptionKind::Call => integrate(payoff, kink, kink.max(0.0) + 40.0, 1e-14),
        OptionKind::Put => integrate(payoff, kink.min(0.0) - 40.0, kink, 1e-14),
    }
}

/// `E[(e^{-rT} payoff)^n]` of the down-and-out put, using the density of the
/// log-price on paths whose running minimum stays above the barrier.
///
/// With `Y = ln(S/S0)/sigma`, a Brownian motion with drift
/// `mu = r/sigma - sigma/2`, the reflection principle gives the surviving
/// density `p(x) = phi_T(x - mu T) - e^{2 mu a} phi_T(x - 2a - mu T)` for
/// `x > a = ln(B/S0)/sigma`.
pub fn dao_moment(m: &MarketParams, strike: f64, expiry: f64, barrier: f64, n: i32) -> f64 {
    let sigma = m.sigma;
    let a = (barrier / m.s0).ln() / sigma;
    let k = (strike / m.s0).ln() / sigma;
    let mu = m.r / sigma - 0.5 * sigma;
    let sd = expiry.sqrt();
    let disc = (-m.r * expiry).exp();
    let image = (2.0 * mu * a).exp();
    let density = move |x: f64| (phi((x - mu * expiry) / sd) - image * phi((x - 2.0 * a - mu * expiry) / sd)) / sd;
    let integrand = move |x: f64| (disc * (strike - m.s0 * (sigma * x).exp())).powi(n) * density(x);
    integrate(integrand, a, k, 1e-14)
}

/// Survival-and-in-the-money probability of the down-and-out put; its
/// complement is the PEW.
pub fn dao_paying_probability(m: &MarketParams, strike: f64, expiry: f64, barrier: f64) -> f64 {
    // the zeroth moment, undiscounted
    dao_moment(m, strike, expiry, barrier, 0)
}

/// One contract of the closed-form comparison grid:
/// `(r, sigma, s0, strike, expiry, barrier)`.
pub type GridPoint = (f64, f64, f64, f64, f64, f64);

/// Twenty parameter sets, the first two being the reference markets
/// (ATM at `s0 = 1` and the barrier case at `s0 = 0.8`, `B = 0.5`).
pub const PARAMETER_GRID: [GridPoint; 20] = [
    (0.1, 0.15, 1.0, 1.0, 1.0, 0.5),
    (0.1, 0.15, 0.8, 1.0, 1.0, 0.5),
    (0.1, 0.15, 0.6, 1.0, 1.0, 0.5),
    (0.1, 0.15, 1.2, 1.0, 0.5, 0.7),
    (0.05, 0.2, 1.0, 0.9, 1.0, 0.6),
    (0.05, 0.2, 1.0, 1.1, 2.0, 0.8),
    (0.05, 0.3, 1.5, 1.0, 1.0, 0.9),
    (0.02, 0.25, 25.0, 25.0, 0.5, 20.0),
    (0.02, 0.25, 25.0, 20.0, 0.5, 15.0),
    (0.02, 0.25, 25.0, 30.0, 1.0, 18.0),
    (0.1, 0.4, 1.0, 1.0, 1.0, 0.5),
    (0.08, 0.35, 0.9, 1.2, 1.5, 0.4),
    (0.03, 0.1, 1.0, 1.05, 0.25, 0.95),
    (0.06, 0.5, 2.0, 1.5, 2.0, 1.0),
    (0.1, 0.15, 1.0, 0.8, 1.0, 0.75),
    (0.04, 0.18, 0.7, 0.75, 0.75, 0.65),
    (0.09, 0.22, 1.3, 1.4, 0.1, 1.2),
    (0.01, 0.3, 1.0, 1.0, 3.0, 0.3),
    (0.07, 0.12, 1.1, 1.0, 0.6, 0.9),
    (0.1, 0.15, 0.55, 1.0, 2.0, 0.5),
];

pub fn market(p: &GridPoint) -> MarketParams {
    MarketParams {
        r: p.0,
        sigma: p.1,
        s0: p.2,
    }
}
