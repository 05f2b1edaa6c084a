//! C ABI over the `optrisk` engines.
//!
//! Every fallible function returns an [`OptriskStatus`] and writes its result
//! through an out-pointer, which is left untouched on failure. The message of
//! the last failure on the calling thread is available from
//! [`optrisk_last_error_message`]. American solutions live behind the opaque
//! [`OptriskAmericanGrid`] handle, released with [`optrisk_american_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{self, AssertUnwindSafe};

use optrisk::american::{self, FrontFixedGrid, SolverConfig};
use optrisk::monte_carlo::{self, ContinuityCorrection, McConfig, McEstimate};
use optrisk::risk::{self, RiskAdjustment};
use optrisk::{barrier, european, Error, MarketParams, MomentSet, OptionKind, OptionSpec};

/// Vanilla call, for the `kind` arguments.
pub const OPTRISK_CALL: u32 = 0;
/// Vanilla put, for the `kind` arguments.
pub const OPTRISK_PUT: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptriskStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    InvalidContract = 3,
    OutOfDomain = 4,
    BoundaryMismatch = 5,
    DegenerateMean = 6,
    NegativePrice = 7,
    OutOfBracket = 8,
    MomentOverflow = 9,
    NumericalInconsistency = 10,
    NewtonDivergence = 11,
    UnstableSolution = 12,
    /// A Rust panic was caught at the boundary.
    Internal = 13,
}

impl From<&Error> for OptriskStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter { .. } => OptriskStatus::InvalidParameter,
            Error::InvalidContract(_) => OptriskStatus::InvalidContract,
            Error::MomentOverflow { .. } => OptriskStatus::MomentOverflow,
            Error::NumericalInconsistency { .. } => OptriskStatus::NumericalInconsistency,
            Error::NewtonDivergence { .. } => OptriskStatus::NewtonDivergence,
            Error::UnstableSolution { .. } => OptriskStatus::UnstableSolution,
            Error::OutOfDomain(_) => OptriskStatus::OutOfDomain,
            Error::BoundaryMismatch(_) => OptriskStatus::BoundaryMismatch,
            Error::DegenerateMean(_) => OptriskStatus::DegenerateMean,
            Error::NegativePrice(_) => OptriskStatus::NegativePrice,
            Error::OutOfBracket { .. } => OptriskStatus::OutOfBracket,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptriskMarket {
    pub r: f64,
    pub sigma: f64,
    pub s0: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OptriskMomentSet {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub sd: f64,
    /// Probability of expiring worthless.
    pub pew: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OptriskMcEstimate {
    pub mean: f64,
    pub variance: f64,
    pub pew: f64,
    pub stderr_mean: f64,
    pub stderr_variance: f64,
    pub n_paths: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OptriskAmericanProfile {
    pub price: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub pew: f64,
    pub early_exercise_price: f64,
}

/// Grid settings of the American solver. A non-positive `y_max` selects the
/// default truncation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptriskSolverConfig {
    pub n_y: usize,
    pub n_tau: usize,
    pub y_max: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub rannacher_steps: usize,
}

/// Solved American put together with the contract it was solved for.
pub struct OptriskAmericanGrid {
    grid: FrontFixedGrid,
    market: MarketParams,
    strike: f64,
    expiry: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, translating errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), OptriskStatus>>(f: F) -> OptriskStatus {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            OptriskStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => {
            set_last_error("internal error: panic caught at the C boundary");
            OptriskStatus::Internal
        }
    }
}

fn fail(e: Error) -> OptriskStatus {
    set_last_error(&e.to_string());
    OptriskStatus::from(&e)
}

fn null(what: &str) -> OptriskStatus {
    set_last_error(&format!("null pointer: {what}"));
    OptriskStatus::NullPointer
}

unsafe fn read<'a, T>(p: *const T, what: &str) -> Result<&'a T, OptriskStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), OptriskStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

fn market_of(m: &OptriskMarket) -> MarketParams {
    MarketParams {
        r: m.r,
        sigma: m.sigma,
        s0: m.s0,
    }
}

fn kind_of(kind: u32) -> Result<OptionKind, OptriskStatus> {
    match kind {
        OPTRISK_CALL => Ok(OptionKind::Call),
        OPTRISK_PUT => Ok(OptionKind::Put),
        other => {
            set_last_error(&format!("invalid parameter `kind`: unknown option kind {other}"));
            Err(OptriskStatus::InvalidParameter)
        }
    }
}

fn moments_out(p: MomentSet) -> OptriskMomentSet {
    OptriskMomentSet {
        mean: p.mean,
        second_moment: p.second_moment,
        variance: p.variance,
        sd: p.sd,
        pew: p.pew,
    }
}

fn mc_out(e: McEstimate) -> OptriskMcEstimate {
    OptriskMcEstimate {
        mean: e.mean,
        variance: e.variance,
        pew: e.pew,
        stderr_mean: e.stderr_mean,
        stderr_variance: e.stderr_variance,
        n_paths: e.n_paths,
    }
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next `optrisk_*` call on the same thread.
#[no_mangle]
pub extern "C" fn optrisk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn optrisk_status_name(status: OptriskStatus) -> *const c_char {
    let name: &'static [u8] = match status {
        OptriskStatus::Ok => b"ok\0",
        OptriskStatus::NullPointer => b"null-pointer\0",
        OptriskStatus::InvalidParameter => b"invalid-parameter\0",
        OptriskStatus::InvalidContract => b"invalid-contract\0",
        OptriskStatus::OutOfDomain => b"out-of-domain\0",
        OptriskStatus::BoundaryMismatch => b"boundary-mismatch\0",
        OptriskStatus::DegenerateMean => b"degenerate-mean\0",
        OptriskStatus::NegativePrice => b"negative-price\0",
        OptriskStatus::OutOfBracket => b"out-of-bracket\0",
        OptriskStatus::MomentOverflow => b"moment-overflow\0",
        OptriskStatus::NumericalInconsistency => b"numerical-inconsistency\0",
        OptriskStatus::NewtonDivergence => b"newton-divergence\0",
        OptriskStatus::UnstableSolution => b"unstable-solution\0",
        OptriskStatus::Internal => b"internal\0",
    };
    name.as_ptr().cast()
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn optrisk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Mean, second moment, variance and PEW of a vanilla European option.
///
/// # Safety
/// `market` and `out` must be valid pointers (or null, which is reported).
#[no_mangle]
pub unsafe extern "C" fn optrisk_european_profile(
    market: *const OptriskMarket,
    kind: u32,
    strike: f64,
    expiry: f64,
    out: *mut OptriskMomentSet,
) -> OptriskStatus {
    guard(|| {
        let m = market_of(read(market, "market")?);
        let spec = OptionSpec::european(kind_of(kind)?, strike, expiry);
        let p = european::risk_profile(&m, &spec).map_err(fail)?;
        write(out, moments_out(p), "out")
    })
}

/// Raw moment `E[(discounted payoff)^n]` of a vanilla European option.
///
/// # Safety
/// `market` and `out` must be valid pointers (or null, which is reported).
#[no_mangle]
pub unsafe extern "C" fn optrisk_european_moment(
    market: *const OptriskMarket,
    kind: u32,
    strike: f64,
    expiry: f64,
    n: u32,
    out: *mut f64,
) -> OptriskStatus {
    guard(|| {
        let m = market_of(read(market, "market")?);
        let spec = OptionSpec::european(kind_of(kind)?, strike, expiry);
        let v = european::nth_moment(&m, &spec, n).map_err(fail)?;
        write(out, v, "out")
    })
}

/// Profile of a continuously monitored down-and-out put.
///
/// # Safety
/// `market` and `out` must be valid pointers (or null, which is reported).
#[no_mangle]
pub unsafe extern "C" fn optrisk_dao_put_profile(
    market: *const OptriskMarket,
    strike: f64,
    expiry: f64,
    barrier: f64,
    out: *mut OptriskMomentSet,
) -> OptriskStatus {
    guard(|| {
        let m = market_of(read(market, "market")?);
        let p = barrier::dao_put_profile(&m, strike, expiry, barrier).map_err(fail)?;
        write(out, moments_out(p), "out")
    })
}

/// Risk-adjusted price `mean - q sd`; fails when it is not positive.
///
/// # Safety
/// `profile` and `out` must be valid pointers (or null, which is reported).
#[no_mangle]
pub unsafe extern "C" fn optrisk_adjusted_price(
    profile: *const OptriskMomentSet,
    q: f64,
    out: *mut f64,
) -> OptriskStatus {
    guard(|| {
        let p = read(profile, "profile")?;
        let set = MomentSet {
            mean: p.mean,
            second_moment: p.second_moment,
            variance: p.variance,
            sd: p.sd,
            pew: p.pew,
        };
        let adj = RiskAdjustment::new(q).map_err(fail)?;
        let v = risk::adjusted_price(&set, adj).map_err(fail)?;
        write(out, v, "out")
    })
}

/// Black-Scholes volatility that reproduces `target_price`.
///
/// # Safety
/// `market` and `out` must be valid pointers (or null, which is reported).
#[no_mangle]
pub unsafe extern "C" fn optrisk_effective_volatility(
    market: *const OptriskMarket,
    kind: u32,
    strike: f64,
    expiry: f64,
    target_price: f64,
    out: *mut f64,
) -> OptriskStatus {
    guard(|| {
        let m = market_of(read(market, "market")?);
        let spec = OptionSpec::european(kind_of(kind)?, strike, expiry);
        let v = risk::effective_volatility(&m, &spec, target_price).map_err(fail)?;
        write(out, v, "out")
    })
}

/// Discretely monitored down-and-out put by simulation. With
/// `continuity_correction` set, the monitored barrier is shifted to emulate
/// continuous monitoring.
///
/// # Safety
/// `market` and `out` must be valid pointers (or null, which is reported).
#[no_mangle]
pub unsafe extern "C" fn optrisk_mc_dao_put(
    market: *const OptriskMarket,
    strike: f64,
    expiry: f64,
    barrier: f64,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
    continuity_correction: bool,
    out: *mut OptriskMcEstimate,
) -> OptriskStatus {
    guard(|| {
        let m = market_of(read(market, "market")?);
        let cfg = McConfig { n_paths, n_steps, seed };
        let correction = if continuity_correction {
            ContinuityCorrection::Shifted
        } else {
            ContinuityCorrection::Off
        };
        let e = monte_carlo::simulate_dao_put_with(&m, strike, expiry, barrier, &cfg, correction).map_err(fail)?;
        write(out, mc_out(e), "out")
    })
}

/// The default solver grid (400 x 400).
#[no_mangle]
pub extern "C" fn optrisk_solver_config_default() -> OptriskSolverConfig {
    let d = SolverConfig::default();
    OptriskSolverConfig {
        n_y: d.n_y,
        n_tau: d.n_tau,
        y_max: 0.0,
        newton_tol: d.newton_tol,
        newton_max_iter: d.newton_max_iter,
        rannacher_steps: d.rannacher_steps,
    }
}

/// Solves the American put. `config` may be null for the default grid. On
/// success `*out` owns a new handle.
///
/// # Safety
/// `market` and `out` must be valid pointers; `config` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn optrisk_american_solve(
    market: *const OptriskMarket,
    strike: f64,
    expiry: f64,
    config: *const OptriskSolverConfig,
    out: *mut *mut OptriskAmericanGrid,
) -> OptriskStatus {
    guard(|| {
        let m = market_of(read(market, "market")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = match config.as_ref() {
            None => SolverConfig::default(),
            Some(c) => SolverConfig {
                n_y: c.n_y,
                n_tau: c.n_tau,
                y_max: (c.y_max > 0.0).then_some(c.y_max),
                newton_tol: c.newton_tol,
                newton_max_iter: c.newton_max_iter,
                rannacher_steps: c.rannacher_steps,
            },
        };
        let grid = american::solve(&m, strike, expiry, &cfg).map_err(fail)?;
        let handle = Box::new(OptriskAmericanGrid {
            grid,
            market: m,
            strike,
            expiry,
        });
        out.write(Box::into_raw(handle));
        Ok(())
    })
}

/// Profile at spot `s` and calendar time `t` in `[0, T]`.
///
/// # Safety
/// `grid` must come from [`optrisk_american_solve`] and not be freed; `out`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn optrisk_american_evaluate(
    grid: *const OptriskAmericanGrid,
    s: f64,
    t: f64,
    out: *mut OptriskAmericanProfile,
) -> OptriskStatus {
    guard(|| {
        let g = read(grid, "grid")?;
        let p = american::evaluate(&g.grid, &g.market, g.strike, g.expiry, s, t).map_err(fail)?;
        let value = OptriskAmericanProfile {
            price: p.price,
            second_moment: p.second_moment,
            variance: p.variance,
            pew: p.pew,
            early_exercise_price: p.early_exercise_price,
        };
        write(out, value, "out")
    })
}

/// Number of points on the early exercise curve (0 for a null handle).
///
/// # Safety
/// `grid` must come from [`optrisk_american_solve`] or be null.
#[no_mangle]
pub unsafe extern "C" fn optrisk_american_boundary_len(grid: *const OptriskAmericanGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.grid.boundary.len())
}

/// Copies the early exercise curve `(t, b(t))`, increasing in `t`, into two
/// caller-owned arrays of length `len`, which must equal
/// [`optrisk_american_boundary_len`].
///
/// # Safety
/// `t_out` and `b_out` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn optrisk_american_boundary(
    grid: *const OptriskAmericanGrid,
    t_out: *mut f64,
    b_out: *mut f64,
    len: usize,
) -> OptriskStatus {
    guard(|| {
        let g = read(grid, "grid")?;
        if t_out.is_null() || b_out.is_null() {
            return Err(null("t_out/b_out"));
        }
        let curve = american::early_exercise_curve(&g.grid, g.strike, g.expiry);
        if len != curve.len() {
            set_last_error(&format!(
                "invalid parameter `len`: curve has {} points, got {len}",
                curve.len()
            ));
            return Err(OptriskStatus::InvalidParameter);
        }
        let ts = std::slice::from_raw_parts_mut(t_out, len);
        let bs = std::slice::from_raw_parts_mut(b_out, len);
        for (i, (t, b)) in curve.into_iter().enumerate() {
            ts[i] = t;
            bs[i] = b;
        }
        Ok(())
    })
}

/// Releases a grid handle. Null is ignored.
///
/// # Safety
/// `grid` must come from [`optrisk_american_solve`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn optrisk_american_free(grid: *mut OptriskAmericanGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}
