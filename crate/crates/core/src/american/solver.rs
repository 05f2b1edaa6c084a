//! Time march for the front-fixed American put system.
//!
//! In `y = ln(s / b(t))`, `tau = sigma^2 (T - t) / 2` and with `alpha = 2r / sigma^2`
//! the price `U`, second moment `V` and PEW `W` all solve
//!
//! ```text
//! X_tau = X_yy + (alpha - 1 + B'/B) X_y - kappa alpha X,   kappa = 1, 2, 0
//! ```
//!
//! on `y > 0`. Each step picks `B(tau_{k+1})` so that the Crank-Nicolson
//! solution for `U` satisfies `U_y(0) = -B`, then advances `V` and `W` with
//! the same drift.

use super::tridiag::Tridiagonal;
use super::{FrontFixedGrid, SolverConfig};
use crate::error::{Error, Result};
use crate::market::{validate_spec, MarketParams, OptionSpec};

/// One theta-scheme step for `X_tau = X_yy + drift X_y - reaction X` on a
/// uniform grid with Dirichlet values at both ends.
struct Stepper {
    h: f64,
    dtau: f64,
    system: Tridiagonal,
}

impl Stepper {
    fn new(n_y: usize, h: f64, dtau: f64) -> Self {
        Self {
            h,
            dtau,
            system: Tridiagonal::with_len(n_y - 2),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn advance(
        &mut self,
        prev: &[f64],
        next: &mut [f64],
        drift: f64,
        reaction: f64,
        left: f64,
        right: f64,
        theta: f64,
    ) {
        let n = prev.len();
        let inv_h2 = 1.0 / (self.h * self.h);
        let adv = drift / (2.0 * self.h);
        let lo = inv_h2 - adv;
        let mid = -2.0 * inv_h2 - reaction;
        let up = inv_h2 + adv;
        let imp = theta * self.dtau;
        let exp = (1.0 - theta) * self.dtau;

        next[0] = left;
        next[n - 1] = right;
        let rhs = &mut next[1..n - 1];
        for i in 1..n - 1 {
            let k = i - 1;
            self.system.lower[k] = -imp * lo;
            self.system.diag[k] = 1.0 - imp * mid;
            self.system.upper[k] = -imp * up;
            rhs[k] = prev[i] + exp * (lo * prev[i - 1] + mid * prev[i] + up * prev[i + 1]);
        }
        rhs[0] += imp * lo * left;
        rhs[n - 3] += imp * up * right;
        self.system.solve(rhs);
    }
}

/// Three-point one-sided derivative at `y = 0`.
fn slope_at_boundary(row: &[f64], h: f64) -> f64 {
    (-3.0 * row[0] + 4.0 * row[1] - row[2]) / (2.0 * h)
}

fn non_finite(k: usize, b: f64) -> Error {
    Error::UnstableSolution {
        step: k + 1,
        reason: format!("non-finite Neumann residual at B = {b}"),
    }
}

pub(super) fn solve(m: &MarketParams, strike: f64, expiry: f64, cfg: &SolverConfig) -> Result<FrontFixedGrid> {
    validate_spec(m, &OptionSpec::american_put(strike, expiry))?;
    cfg.validate()?;

    let n_y = cfg.n_y;
    let n_tau = cfg.n_tau;
    let y_max = cfg.y_max_for(m.sigma, expiry);
    let tau_max = 0.5 * m.sigma * m.sigma * expiry;
    let h = y_max / (n_y - 1) as f64;
    let dtau = tau_max / n_tau as f64;
    let alpha = 2.0 * m.r / (m.sigma * m.sigma);

    let mut u = vec![0.0; (n_tau + 1) * n_y];
    let mut v = vec![0.0; (n_tau + 1) * n_y];
    let mut w = vec![0.0; (n_tau + 1) * n_y];
    // terminal data holds for y > 0 only; the corner takes the boundary value
    w[1..n_y].fill(1.0);
    let mut boundary = vec![1.0_f64; n_tau + 1];
    let mut neumann = vec![0.0; n_tau + 1];

    let mut stepper = Stepper::new(n_y, h, dtau);
    let mut trial = vec![0.0; n_y];

    for k in 0..n_tau {
        let theta = if k < cfg.rannacher_steps { 1.0 } else { 0.5 };
        let b_prev = boundary[k];
        // backward difference for B'(tau_{k+1}) / B(tau_{k+1}), used in both halves
        let drift_for = |b: f64| alpha - 1.0 + (b - b_prev) / (dtau * b);

        let (before, after) = u.split_at_mut((k + 1) * n_y);
        let u_prev = &before[k * n_y..];
        let u_next = &mut after[..n_y];

        let residual = |b: f64, out: &mut [f64], st: &mut Stepper| -> f64 {
            st.advance(u_prev, out, drift_for(b), alpha, 1.0 - b, 0.0, theta);
            slope_at_boundary(out, h) + b
        };

        // g(B) = U_y(0; B) + B. The root wanted is the one nearest B_k: step
        // down from B_k until g changes sign, then polish inside the bracket.
        let floor = 0.5 * b_prev;
        let g_top = residual(b_prev, &mut trial, &mut stepper);
        let mut found = None;
        let mut last = g_top;
        if !g_top.is_finite() {
            return Err(non_finite(k, b_prev));
        }
        if g_top.abs() < cfg.newton_tol {
            found = Some((b_prev, g_top));
        }
        let mut bracket = None;
        if found.is_none() {
            let mut delta = if k == 0 {
                1e-2 * dtau.sqrt() * b_prev
            } else {
                (0.5 * (boundary[k - 1] - b_prev)).max(1e-9 * b_prev)
            };
            let mut upper = (b_prev, g_top);
            loop {
                let b = (b_prev - delta).max(floor);
                let g = residual(b, &mut trial, &mut stepper);
                if !g.is_finite() {
                    return Err(non_finite(k, b));
                }
                last = g;
                if g.abs() < cfg.newton_tol {
                    found = Some((b, g));
                    break;
                }
                if g.signum() != g_top.signum() {
                    bracket = Some(((b, g), upper));
                    break;
                }
                if b <= floor {
                    break;
                }
                upper = (b, g);
                delta *= 2.0;
            }
        }
        if let Some(((mut lo, g_lo), (mut hi, _))) = bracket {
            let mut b = 0.5 * (lo + hi);
            for _ in 0..cfg.newton_max_iter {
                let g = residual(b, &mut trial, &mut stepper);
                if !g.is_finite() {
                    return Err(non_finite(k, b));
                }
                last = g;
                if g.abs() < cfg.newton_tol {
                    found = Some((b, g));
                    break;
                }
                if g.signum() == g_lo.signum() {
                    lo = b;
                } else {
                    hi = b;
                }
                let delta = 1e-7 * b;
                let g_up = residual(b + delta, u_next, &mut stepper);
                let g_down = residual(b - delta, u_next, &mut stepper);
                let newton = b - 2.0 * delta * g / (g_up - g_down);
                let (a, c) = if lo < hi { (lo, hi) } else { (hi, lo) };
                b = if newton.is_finite() && newton > a && newton < c {
                    newton
                } else {
                    0.5 * (a + c)
                };
            }
        }
        let (b_next, g) = found.ok_or(Error::NewtonDivergence {
            step: k + 1,
            residual: last,
        })?;
        if !(b_next > 0.0 && b_next <= b_prev) {
            return Err(Error::UnstableSolution {
                step: k + 1,
                reason: format!("free boundary left (0, B_k]: {b_next}"),
            });
        }
        u_next.copy_from_slice(&trial);
        boundary[k + 1] = b_next;
        neumann[k + 1] = g.abs();

        let drift = drift_for(b_next);
        let exercise = 1.0 - b_next;
        {
            let (before, after) = v.split_at_mut((k + 1) * n_y);
            stepper.advance(
                &before[k * n_y..],
                &mut after[..n_y],
                drift,
                2.0 * alpha,
                exercise * exercise,
                0.0,
                theta,
            );
        }
        {
            let (before, after) = w.split_at_mut((k + 1) * n_y);
            stepper.advance(&before[k * n_y..], &mut after[..n_y], drift, 0.0, 0.0, 1.0, theta);
        }
    }

    Ok(FrontFixedGrid {
        r: m.r,
        sigma: m.sigma,
        expiry,
        y_nodes: (0..n_y).map(|j| j as f64 * h).collect(),
        tau_nodes: (0..=n_tau).map(|k| k as f64 * dtau).collect(),
        u,
        v,
        w,
        boundary,
        neumann_residuals: neumann,
    })
}
