//! Self-checks behind `optrisk verify`: PDE residuals of the closed forms,
//! parity and complementarity, Chebyshev's bound, barrier limits and the
//! American grid invariants.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::american::{self, GridField, SolverConfig};
use crate::barrier;
use crate::error::Result;
use crate::european;
use crate::market::{MarketParams, OptionKind, OptionSpec};
use crate::output::Table;
use crate::pde_check::{MomentField, StepSizes};
use crate::risk;

/// Outcome of one property suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Largest violation measured (or smallest margin for lower bounds).
    pub worst: f64,
    pub limit: f64,
    pub cases: usize,
}

/// One random vanilla contract.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterDraw {
    pub market: MarketParams,
    pub strike: f64,
    pub expiry: f64,
}

/// Uniform draws over `r in [0.01, 0.1]`, `sigma in [0.1, 0.5]`,
/// `s0, K in [0.5, 2]`, `T in [0.1, 2]`.
pub fn parameter_draws(seed: u64, n: usize) -> Vec<ParameterDraw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = |lo: f64, hi: f64| lo + (hi - lo) * ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64);
    (0..n)
        .map(|_| {
            let r = uniform(0.01, 0.1);
            let sigma = uniform(0.1, 0.5);
            let s0 = uniform(0.5, 2.0);
            ParameterDraw {
                market: MarketParams { r, sigma, s0 },
                strike: uniform(0.5, 2.0),
                expiry: uniform(0.1, 2.0),
            }
        })
        .collect()
}

struct Tally {
    worst: f64,
    cases: usize,
}

impl Tally {
    fn new() -> Self {
        Self { worst: 0.0, cases: 0 }
    }

    fn add(&mut self, x: f64) {
        self.cases += 1;
        if x.is_nan() || x > self.worst {
            self.worst = x;
        }
    }

    fn below(self, name: &str, limit: f64) -> CheckResult {
        CheckResult {
            name: name.into(),
            passed: self.worst < limit,
            worst: self.worst,
            limit,
            cases: self.cases,
        }
    }
}

const PDE_LIMIT: f64 = 1e-6;
const WRONG_KAPPA_LIMIT: f64 = 1e-3;

fn probe_markets() -> Vec<(MarketParams, f64, f64)> {
    vec![
        (
            MarketParams {
                r: 0.1,
                sigma: 0.15,
                s0: 1.0,
            },
            1.0,
            1.0,
        ),
        (
            MarketParams {
                r: 0.1,
                sigma: 0.15,
                s0: 0.9,
            },
            1.0,
            0.5,
        ),
        (
            MarketParams {
                r: 0.05,
                sigma: 0.3,
                s0: 1.2,
            },
            1.0,
            2.0,
        ),
        // the smile market rescaled to K = 1; moments scale as K^n
        (
            MarketParams {
                r: 0.02,
                sigma: 0.25,
                s0: 1.0,
            },
            1.0,
            0.5,
        ),
    ]
}

fn european_residuals() -> Result<Vec<CheckResult>> {
    let mut own = Tally::new();
    let mut wrong = f64::INFINITY;
    let mut wrong_cases = 0;
    for (m, k, t) in probe_markets() {
        let h = StepSizes::uniform(1e-4);
        for kind in [OptionKind::Call, OptionKind::Put] {
            let spec = OptionSpec::european(kind, k, t);
            for field in MomentField::ALL {
                own.add(european::pde_residual(field, &m, &spec, h)?);
            }
        }
    }
    // second moment against the mean's PDE: the residual is r times the
    // second moment, so the probes are calls with a sizeable second moment
    for (m, k, t) in [probe_markets()[0], probe_markets()[2]] {
        let call = OptionSpec::european(OptionKind::Call, k, t);
        wrong = wrong.min(european::pde_residual_with_kappa(
            MomentField::SecondMoment,
            1.0,
            &m,
            &call,
            StepSizes::uniform(1e-4),
        )?);
        wrong_cases += 1;
    }
    Ok(vec![
        own.below("vanilla PDE residuals", PDE_LIMIT),
        CheckResult {
            name: "vanilla wrong-kappa residual".into(),
            passed: wrong > WRONG_KAPPA_LIMIT,
            worst: wrong,
            limit: WRONG_KAPPA_LIMIT,
            cases: wrong_cases,
        },
    ])
}

fn barrier_residuals() -> Result<Vec<CheckResult>> {
    let mut own = Tally::new();
    let mut wrong = f64::INFINITY;
    let cases = [(0.8, 1.0, 0.5, 1.0), (0.6, 1.0, 0.5, 0.5), (1.0, 1.1, 0.7, 2.0)];
    for (s0, k, b, t) in cases {
        let m = MarketParams {
            r: 0.1,
            sigma: 0.15,
            s0,
        };
        let h = StepSizes::uniform(1e-4);
        for field in MomentField::ALL {
            own.add(barrier::dao_pde_residual(field, &m, k, t, b, h)?);
        }
        let r = barrier::dao_pde_residual_with_kappa(MomentField::Mean, 2.0, &m, k, t, b, h)?;
        wrong = wrong.min(r);
    }
    Ok(vec![
        own.below("barrier PDE residuals", PDE_LIMIT),
        CheckResult {
            name: "barrier wrong-kappa residual".into(),
            passed: wrong > WRONG_KAPPA_LIMIT,
            worst: wrong,
            limit: WRONG_KAPPA_LIMIT,
            cases: cases.len(),
        },
    ])
}

fn parity(draws: &[ParameterDraw]) -> Result<Vec<CheckResult>> {
    let mut parity = Tally::new();
    let mut complement = Tally::new();
    for d in draws {
        let call = OptionSpec::european(OptionKind::Call, d.strike, d.expiry);
        let put = OptionSpec::european(OptionKind::Put, d.strike, d.expiry);
        let c = european::mean(&d.market, &call)?;
        let p = european::mean(&d.market, &put)?;
        let forward = d.market.s0 - d.strike * d.market.discount(d.expiry);
        parity.add((c - p - forward).abs() / d.market.s0.max(d.strike));
        complement.add((european::pew(&d.market, &call)? + european::pew(&d.market, &put)? - 1.0).abs());
    }
    Ok(vec![
        parity.below("put-call parity (relative)", 1e-12),
        complement.below("PEW(call) + PEW(put) = 1", 1e-14),
    ])
}

fn chebyshev(draws: &[ParameterDraw]) -> Result<CheckResult> {
    let mut violations = 0usize;
    let mut cases = 0usize;
    for d in draws {
        for kind in [OptionKind::Call, OptionKind::Put] {
            let p = european::risk_profile(&d.market, &OptionSpec::european(kind, d.strike, d.expiry))?;
            if p.mean <= 0.0 {
                continue;
            }
            cases += 1;
            if !risk::chebyshev_check(&p)?.holds {
                violations += 1;
            }
        }
    }
    Ok(CheckResult {
        name: "Chebyshev PEW bound violations".into(),
        passed: violations == 0,
        worst: violations as f64,
        limit: 0.0,
        cases,
    })
}

fn barrier_limits() -> Result<Vec<CheckResult>> {
    let m = MarketParams {
        r: 0.1,
        sigma: 0.15,
        s0: 0.8,
    };
    let mut vanish = Tally::new();
    let vanilla = barrier::vanilla_put_profile(&m, 1.0, 1.0)?;
    let far = barrier::dao_put_profile(&m, 1.0, 1.0, 1e-6)?;
    for (a, b) in [
        (far.mean, vanilla.mean),
        (far.second_moment, vanilla.second_moment),
        (far.pew, vanilla.pew),
    ] {
        vanish.add((a - b).abs());
    }
    let mut knocked = Tally::new();
    let at = barrier::dao_put_profile(&m, 1.0, 1.0, 0.8)?;
    for x in [at.mean, at.second_moment, at.variance, 1.0 - at.pew] {
        knocked.add(x.abs());
    }
    Ok(vec![
        vanish.below("barrier -> 0 matches vanilla", 1e-10),
        knocked.below("spot at barrier is knocked out", 1e-15),
    ])
}

fn american_invariants() -> Result<Vec<CheckResult>> {
    let m = MarketParams {
        r: 0.1,
        sigma: 0.15,
        s0: 1.0,
    };
    let cfg = SolverConfig::default();
    let grid = american::solve(&m, 1.0, 1.0, &cfg)?;
    let mut order = Tally::new();
    for k in 0..=grid.n_tau() {
        for j in 0..grid.n_y() {
            let (u, v, w) = (
                grid.at(GridField::U, k, j),
                grid.at(GridField::V, k, j),
                grid.at(GridField::W, k, j),
            );
            order.add((-u).max(0.0).max((-v).max(0.0)).max((-w).max(w - 1.0)).max(u * u - v));
        }
    }
    let mut neumann = Tally::new();
    grid.neumann_residuals.iter().for_each(|r| neumann.add(*r));
    let mut monotone = Tally::new();
    for pair in grid.boundary.windows(2) {
        monotone.add((pair[1] - pair[0]).max(0.0));
    }
    Ok(vec![
        order.below("American grid ordering (0 <= W <= 1, U, V >= 0, V >= U^2)", 1e-8),
        neumann.below("American Neumann residual", cfg.newton_tol),
        CheckResult {
            passed: monotone.worst == 0.0,
            ..monotone.below("American boundary nonincreasing in tau", f64::MIN_POSITIVE)
        },
    ])
}

/// Runs every suite. `seed` drives the random parameter draws.
pub fn run_all(seed: u64) -> Result<Vec<CheckResult>> {
    let draws = parameter_draws(seed, 1000);
    let mut out = european_residuals()?;
    out.extend(barrier_residuals()?);
    out.extend(parity(&draws)?);
    out.push(chebyshev(&draws)?);
    out.extend(barrier_limits()?);
    out.extend(american_invariants()?);
    Ok(out)
}

pub fn results_table(results: &[CheckResult]) -> Table {
    let mut t = Table::new(["check", "status", "worst", "limit", "cases"]);
    for r in results {
        t.push(vec![
            r.name.as_str().into(),
            if r.passed { "pass" } else { "FAIL" }.into(),
            r.worst.into(),
            r.limit.into(),
            r.cases.into(),
        ]);
    }
    t
}
