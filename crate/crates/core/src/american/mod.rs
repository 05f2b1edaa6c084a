//! American put: price, second moment and PEW by front fixing.
//!
//! The free boundary `b(t)` (the early exercise price) is mapped to `y = 0`
//! by `y = ln(s / b(t))`, and time is rescaled to `tau = sigma^2 (T - t) / 2`.
//! With `u = K U`, `v = K^2 V`, `w = W`, `b = K B` the three quantities live
//! on a fixed rectangle and are marched together; see [`solver`] for the
//! scheme.
//!
//! Below the boundary the put is exercised immediately, so the price is
//! `K - s` with zero variance and zero PEW there.

mod solver;
pub(crate) mod tridiag;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{MarketParams, OptionKind, OptionSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Grid points in `y`, including both ends.
    pub n_y: usize,
    /// Time steps.
    pub n_tau: usize,
    /// Far-field truncation; `None` means `max(4, 8 sigma sqrt(T))`.
    pub y_max: Option<f64>,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Leading steps taken fully implicit instead of Crank-Nicolson.
    /// Zero (the default) is plain Crank-Nicolson throughout.
    pub rannacher_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_y: 400,
            n_tau: 400,
            y_max: None,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            rannacher_steps: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_grid(n_y: usize, n_tau: usize) -> Self {
        Self {
            n_y,
            n_tau,
            ..Self::default()
        }
    }

    pub fn y_max_for(&self, sigma: f64, expiry: f64) -> f64 {
        self.y_max.unwrap_or_else(|| (8.0 * sigma * expiry.sqrt()).max(4.0))
    }

    fn validate(&self) -> Result<()> {
        if self.n_y < 3 {
            return Err(Error::invalid(
                "n_y",
                format!("need at least 3 grid points, got {}", self.n_y),
            ));
        }
        if self.n_tau < 1 {
            return Err(Error::invalid("n_tau", "need at least one time step"));
        }
        if let Some(y) = self.y_max {
            if !(y.is_finite() && y > 0.0) {
                return Err(Error::invalid("y_max", format!("must be positive, got {y}")));
            }
        }
        // negated so NaN is rejected too
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.newton_tol > 0.0) {
            return Err(Error::invalid("newton_tol", "must be positive"));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::invalid("newton_max_iter", "must be positive"));
        }
        Ok(())
    }
}

/// Solution of the front-fixed system.
///
/// Values are dimensionless (`U = u/K`, `V = v/K^2`, `W = w`, `B = b/K`) and
/// depend only on `r`, `sigma` and `T`; any strike can be read off the same
/// grid. Arrays are row-major in `tau`: entry `k * n_y + j` is node
/// `(y_j, tau_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontFixedGrid {
    pub r: f64,
    pub sigma: f64,
    pub expiry: f64,
    pub y_nodes: Vec<f64>,
    pub tau_nodes: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    /// `B(tau_k)`, starting at 1.
    pub boundary: Vec<f64>,
    /// `|U_y(0, tau_k) + B(tau_k)|` after the Newton solve (0 at `tau = 0`).
    pub neumann_residuals: Vec<f64>,
}

/// Dimensionless field stored on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GridField {
    U,
    V,
    W,
}

impl std::str::FromStr for GridField {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "U" | "u" | "price" => Ok(GridField::U),
            "V" | "v" | "second_moment" => Ok(GridField::V),
            "W" | "w" | "pew" => Ok(GridField::W),
            other => Err(Error::invalid("field", format!("unknown grid field `{other}`"))),
        }
    }
}

impl FrontFixedGrid {
    pub fn n_y(&self) -> usize {
        self.y_nodes.len()
    }

    pub fn n_tau(&self) -> usize {
        self.tau_nodes.len() - 1
    }

    pub fn y_max(&self) -> f64 {
        *self.y_nodes.last().expect("grid has nodes")
    }

    pub fn tau_max(&self) -> f64 {
        *self.tau_nodes.last().expect("grid has nodes")
    }

    pub fn field(&self, field: GridField) -> &[f64] {
        match field {
            GridField::U => &self.u,
            GridField::V => &self.v,
            GridField::W => &self.w,
        }
    }

    pub fn row(&self, field: GridField, k: usize) -> &[f64] {
        let n = self.n_y();
        &self.field(field)[k * n..(k + 1) * n]
    }

    pub fn at(&self, field: GridField, k: usize, j: usize) -> f64 {
        self.field(field)[k * self.n_y() + j]
    }

    fn tau_of(&self, t: f64) -> f64 {
        0.5 * self.sigma * self.sigma * (self.expiry - t)
    }

    /// Locates `tau` between rows: returns `(k, weight of row k+1)`.
    fn tau_cell(&self, tau: f64) -> (usize, f64) {
        let dtau = self.tau_nodes[1] - self.tau_nodes[0];
        let n = self.n_tau();
        let pos = (tau / dtau).clamp(0.0, n as f64);
        let k = (pos.floor() as usize).min(n - 1);
        (k, pos - k as f64)
    }

    /// Free boundary `B(tau)` by linear interpolation in `tau`.
    pub fn boundary_at(&self, tau: f64) -> f64 {
        let (k, frac) = self.tau_cell(tau);
        self.boundary[k] * (1.0 - frac) + self.boundary[k + 1] * frac
    }

    /// Bilinear interpolation of a field at `(y, tau)`.
    pub fn interpolate(&self, field: GridField, y: f64, tau: f64) -> Result<f64> {
        if !(0.0..=self.y_max()).contains(&y) {
            return Err(Error::OutOfDomain(format!("y = {y} outside [0, {}]", self.y_max())));
        }
        let h = self.y_nodes[1] - self.y_nodes[0];
        let last = self.n_y() - 1;
        let pos = (y / h).min(last as f64);
        let j = (pos.floor() as usize).min(last - 1);
        let fy = pos - j as f64;
        let (k, ft) = self.tau_cell(tau);
        let lerp = |k: usize| self.at(field, k, j) * (1.0 - fy) + self.at(field, k, j + 1) * fy;
        Ok(lerp(k) * (1.0 - ft) + lerp(k + 1) * ft)
    }

    fn check_market(&self, m: &MarketParams, expiry: f64) -> Result<()> {
        if m.r != self.r || m.sigma != self.sigma || expiry != self.expiry {
            return Err(Error::invalid("grid", "grid was solved for a different (r, sigma, T)"));
        }
        Ok(())
    }

    /// Writes the solution as CSV with columns `tau,y,U,V,W`.
    pub fn write_fields_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["tau", "y", "U", "V", "W"])?;
        for (k, tau) in self.tau_nodes.iter().enumerate() {
            for (j, y) in self.y_nodes.iter().enumerate() {
                wtr.write_record([
                    crate::output::format_f64(*tau),
                    crate::output::format_f64(*y),
                    crate::output::format_f64(self.at(GridField::U, k, j)),
                    crate::output::format_f64(self.at(GridField::V, k, j)),
                    crate::output::format_f64(self.at(GridField::W, k, j)),
                ])?;
            }
        }
        wtr.flush()
    }

    /// Writes the free boundary as CSV with columns `tau,B`.
    pub fn write_boundary_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["tau", "B"])?;
        for (tau, b) in self.tau_nodes.iter().zip(&self.boundary) {
            wtr.write_record([crate::output::format_f64(*tau), crate::output::format_f64(*b)])?;
        }
        wtr.flush()
    }
}

/// Risk profile of the American put at one `(s, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmericanProfile {
    pub price: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub pew: f64,
    /// `b(t)`, the early exercise price at the query time.
    pub early_exercise_price: f64,
}

impl AmericanProfile {
    pub fn sd(&self) -> f64 {
        self.variance.max(0.0).sqrt()
    }
}

/// Solves the coupled front-fixed system for an American put.
pub fn solve(m: &MarketParams, strike: f64, expiry: f64, cfg: &SolverConfig) -> Result<FrontFixedGrid> {
    solver::solve(m, strike, expiry, cfg)
}

/// Reads the profile at spot `s` and calendar time `t` off a solved grid.
pub fn evaluate(
    grid: &FrontFixedGrid,
    m: &MarketParams,
    strike: f64,
    expiry: f64,
    s: f64,
    t: f64,
) -> Result<AmericanProfile> {
    grid.check_market(m, expiry)?;
    if !(strike.is_finite() && strike > 0.0) {
        return Err(Error::invalid("strike", "must be positive"));
    }
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::invalid("s", format!("must be positive, got {s}")));
    }
    if !(0.0..=expiry).contains(&t) {
        return Err(Error::OutOfDomain(format!("t = {t} outside [0, {expiry}]")));
    }
    let tau = grid.tau_of(t);
    let b = strike * grid.boundary_at(tau);
    if s <= b {
        let intrinsic = strike - s;
        return Ok(AmericanProfile {
            price: intrinsic,
            second_moment: intrinsic * intrinsic,
            variance: 0.0,
            pew: 0.0,
            early_exercise_price: b,
        });
    }
    let y = (s / b).ln();
    if y > grid.y_max() {
        return Err(Error::OutOfDomain(format!(
            "s = {s} maps to y = {y} beyond y_max = {}",
            grid.y_max()
        )));
    }
    let price = strike * grid.interpolate(GridField::U, y, tau)?;
    let second_moment = strike * strike * grid.interpolate(GridField::V, y, tau)?;
    Ok(AmericanProfile {
        price,
        second_moment,
        variance: second_moment - price * price,
        pew: grid.interpolate(GridField::W, y, tau)?,
        early_exercise_price: b,
    })
}

/// The early exercise price `b(t) = K B(tau(t))` at every grid time, in
/// increasing `t`; the last entry is `(T, K)`.
pub fn early_exercise_curve(grid: &FrontFixedGrid, strike: f64, expiry: f64) -> Vec<(f64, f64)> {
    let n = grid.n_tau();
    grid.boundary
        .iter()
        .enumerate()
        .rev()
        .map(|(k, b)| (expiry * (n - k) as f64 / n as f64, strike * b))
        .collect()
}

/// Observed convergence order of a field at a fixed `(y, tau_max)` probe.
///
/// `refinements` must be at least three configurations with a common
/// refinement ratio (taken from consecutive `n_y - 1`). The order is
/// estimated from the last three levels as
/// `ln(|f1 - f0| / |f2 - f1|) / ln(ratio)`.
pub fn convergence_order(
    field: GridField,
    m: &MarketParams,
    strike: f64,
    expiry: f64,
    refinements: &[SolverConfig],
    probe_y: f64,
) -> Result<f64> {
    Ok(convergence_study(field, m, strike, expiry, refinements, probe_y)?.order)
}

/// Values and order from [`convergence_order`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub values: Vec<f64>,
    pub order: f64,
}

pub fn convergence_study(
    field: GridField,
    m: &MarketParams,
    strike: f64,
    expiry: f64,
    refinements: &[SolverConfig],
    probe_y: f64,
) -> Result<ConvergenceStudy> {
    if refinements.len() < 3 {
        return Err(Error::invalid("refinements", "need at least three grid levels"));
    }
    let values = refinements
        .iter()
        .map(|cfg| {
            let grid = solve(m, strike, expiry, cfg)?;
            grid.interpolate(field, probe_y, grid.tau_max())
        })
        .collect::<Result<Vec<_>>>()?;
    let n = refinements.len();
    let ratio = (refinements[n - 1].n_y - 1) as f64 / (refinements[n - 2].n_y - 1) as f64;
    let coarse = (values[n - 2] - values[n - 3]).abs();
    let fine = (values[n - 1] - values[n - 2]).abs();
    Ok(ConvergenceStudy {
        order: (coarse / fine).ln() / ratio.ln(),
        values,
    })
}

/// Whether a spec describes a contract this module prices.
pub fn supports(spec: &OptionSpec) -> bool {
    spec.kind == OptionKind::Put && spec.barrier.is_none()
}
