//! Simulation and lattice oracles, independent of the closed forms and the
//! PDE solver they are used to check.
//!
//! Every path draws from its own ChaCha stream (`seed`, stream = path index)
//! and paths are reduced in fixed-size chunks merged in index order, so an
//! estimate depends only on its inputs and seed, never on the thread count.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{validate_spec, MarketParams, OptionKind, OptionSpec};
use crate::normal;

/// Continuity-correction constant `zeta(1/2) / sqrt(2 pi)`, to four decimals.
pub const BETA: f64 = 0.5826;

const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_paths: usize,
    /// Monitoring dates per path.
    pub n_steps: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            n_steps: 250,
            seed: 0x5eed,
        }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.n_paths < 100 {
            return Err(Error::invalid(
                "n_paths",
                format!("need at least 100 paths, got {}", self.n_paths),
            ));
        }
        if self.n_steps < 1 {
            return Err(Error::invalid("n_steps", "need at least one step"));
        }
        Ok(())
    }
}

/// Sample statistics of the discounted payoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Fraction of paths with zero payoff.
    pub pew: f64,
    pub stderr_mean: f64,
    /// Delta-method standard error of the sample variance, from the fourth
    /// central moment.
    pub stderr_variance: f64,
    pub n_paths: usize,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors of the sample mean.
    pub fn mean_within(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr_mean
    }

    pub fn variance_within(&self, value: f64, k: f64) -> bool {
        (self.variance - value).abs() <= k * self.stderr_variance
    }
}

/// Whether the discrete-monitoring barrier is shifted to emulate continuous
/// monitoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContinuityCorrection {
    /// Shift the barrier by `exp(BETA sigma sqrt(dt))` toward the spot.
    Shifted,
    /// Monitor the raw barrier.
    Off,
}

/// Barrier level to monitor discretely so that the result approximates a
/// continuously monitored down barrier at `barrier`.
///
/// Discrete monitoring of a level `H` behaves like continuous monitoring of
/// `H exp(-BETA sigma sqrt(dt))`, so the monitored level is raised by the
/// inverse factor.
pub fn corrected_barrier(barrier: f64, sigma: f64, dt: f64) -> f64 {
    barrier * (BETA * sigma * dt.sqrt()).exp()
}

/// Streaming central moments (count, mean, M2, M3, M4) with exact merging.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
    zeros: u64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        if x == 0.0 {
            self.zeros += 1;
        }
        let n1 = self.n;
        self.n += 1.0;
        let n = self.n;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2 - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    fn merge(self, b: Moments) -> Moments {
        if self.n == 0.0 {
            return b;
        }
        if b.n == 0.0 {
            return self;
        }
        let a = self;
        let n = a.n + b.n;
        let delta = b.mean - a.mean;
        let d2 = delta * delta;
        let d3 = d2 * delta;
        let d4 = d2 * d2;
        let mean = a.mean + delta * b.n / n;
        let m2 = a.m2 + b.m2 + d2 * a.n * b.n / n;
        let m3 = a.m3 + b.m3 + d3 * a.n * b.n * (a.n - b.n) / (n * n) + 3.0 * delta * (a.n * b.m2 - b.n * a.m2) / n;
        let m4 = a.m4
            + b.m4
            + d4 * a.n * b.n * (a.n * a.n - a.n * b.n + b.n * b.n) / (n * n * n)
            + 6.0 * d2 * (a.n * a.n * b.m2 + b.n * b.n * a.m2) / (n * n)
            + 4.0 * delta * (a.n * b.m3 - b.n * a.m3) / n;
        Moments {
            n,
            mean,
            m2,
            m3,
            m4,
            zeros: a.zeros + b.zeros,
        }
    }

    fn estimate(&self) -> McEstimate {
        let n = self.n;
        let variance = self.m2 / (n - 1.0);
        let mu4 = self.m4 / n;
        let var_of_var = (mu4 - variance * variance * (n - 3.0) / (n - 1.0)) / n;
        McEstimate {
            mean: self.mean,
            variance,
            pew: self.zeros as f64 / n,
            stderr_mean: (variance / n).sqrt(),
            stderr_variance: var_of_var.max(0.0).sqrt(),
            n_paths: n as usize,
        }
    }
}

/// Normal draws from one path's stream, by inverse CDF.
struct PathRng(ChaCha8Rng);

impl PathRng {
    fn new(seed: u64, path: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);
        Self(rng)
    }

    fn uniform(&mut self) -> f64 {
        // 53 random bits, centred in their cell: strictly inside (0, 1)
        ((self.0.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    fn normal(&mut self) -> f64 {
        normal::inverse_cdf(self.uniform())
    }
}

/// Runs `payoff(path_index, rng)` over all paths and reduces deterministically.
fn run<F>(cfg: &McConfig, payoff: F) -> McEstimate
where
    F: Fn(&mut PathRng) -> f64 + Sync,
{
    let chunks = cfg.n_paths.div_ceil(CHUNK);
    let partials: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Moments::default();
            let end = ((c + 1) * CHUNK).min(cfg.n_paths);
            for path in c * CHUNK..end {
                let mut rng = PathRng::new(cfg.seed, path as u64);
                acc.push(payoff(&mut rng));
            }
            acc
        })
        .collect();
    partials.into_iter().fold(Moments::default(), Moments::merge).estimate()
}

/// Exact single-step lognormal sampling of a vanilla European payoff.
pub fn simulate_european(m: &MarketParams, spec: &OptionSpec, cfg: &McConfig) -> Result<McEstimate> {
    validate_spec(m, spec)?;
    cfg.validate()?;
    if !spec.is_vanilla_european() {
        return Err(Error::InvalidContract(
            "simulate_european needs a vanilla European contract".into(),
        ));
    }
    let t = spec.expiry;
    let drift = (m.r - 0.5 * m.sigma * m.sigma) * t;
    let vol = m.sigma * t.sqrt();
    let disc = m.discount(t);
    let (s0, k, kind) = (m.s0, spec.strike, spec.kind);
    Ok(run(cfg, |rng| {
        let st = s0 * (drift + vol * rng.normal()).exp();
        let intrinsic = match kind {
            OptionKind::Call => st - k,
            OptionKind::Put => k - st,
        };
        disc * intrinsic.max(0.0)
    }))
}

/// Down-and-out put with `n_steps` discrete monitoring dates and the
/// continuity-corrected barrier.
pub fn simulate_dao_put(
    m: &MarketParams,
    strike: f64,
    expiry: f64,
    barrier: f64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    simulate_dao_put_with(m, strike, expiry, barrier, cfg, ContinuityCorrection::Shifted)
}

pub fn simulate_dao_put_with(
    m: &MarketParams,
    strike: f64,
    expiry: f64,
    barrier: f64,
    cfg: &McConfig,
    correction: ContinuityCorrection,
) -> Result<McEstimate> {
    validate_spec(m, &OptionSpec::down_and_out_put(strike, expiry, barrier))?;
    cfg.validate()?;
    let dt = expiry / cfg.n_steps as f64;
    let level = match correction {
        ContinuityCorrection::Shifted => corrected_barrier(barrier, m.sigma, dt),
        ContinuityCorrection::Off => barrier,
    };
    let knock = (level / m.s0).ln();
    let step_drift = (m.r - 0.5 * m.sigma * m.sigma) * dt;
    let step_vol = m.sigma * dt.sqrt();
    let disc = m.discount(expiry);
    let (s0, n_steps) = (m.s0, cfg.n_steps);
    let at_barrier = s0 <= barrier;
    Ok(run(cfg, |rng| {
        if at_barrier {
            return 0.0;
        }
        let mut x = 0.0;
        for _ in 0..n_steps {
            x += step_drift + step_vol * rng.normal();
            if x <= knock {
                return 0.0;
            }
        }
        disc * (strike - s0 * x.exp()).max(0.0)
    }))
}

/// Piecewise-linear exercise curve `t -> b(t)` sorted by time.
#[derive(Debug, Clone)]
struct Curve {
    points: Vec<(f64, f64)>,
}

impl Curve {
    fn new(points: &[(f64, f64)], expiry: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::BoundaryMismatch("need at least two points".into()));
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let tol = 1e-9 * expiry.max(1.0);
        let (first, last) = (pts[0].0, pts[pts.len() - 1].0);
        if first > tol || last < expiry - tol {
            return Err(Error::BoundaryMismatch(format!(
                "curve covers [{first}, {last}], expected [0, {expiry}]"
            )));
        }
        if pts.iter().any(|(t, b)| !t.is_finite() || !b.is_finite() || *b < 0.0) {
            return Err(Error::BoundaryMismatch("non-finite or negative entries".into()));
        }
        Ok(Self { points: pts })
    }

    fn at(&self, t: f64) -> f64 {
        let pts = &self.points;
        let i = pts.partition_point(|p| p.0 <= t);
        if i == 0 {
            return pts[0].1;
        }
        if i == pts.len() {
            return pts[i - 1].1;
        }
        let (t0, b0) = pts[i - 1];
        let (t1, b1) = pts[i];
        if t1 == t0 {
            return b1;
        }
        b0 + (b1 - b0) * (t - t0) / (t1 - t0)
    }
}

/// American put with a known exercise curve: each path is exercised at the
/// first monitoring date where the stock is at or below the (continuity
/// corrected) curve, paying `K - S` discounted from that date; surviving
/// paths pay the discounted European payoff.
pub fn simulate_american_given_boundary(
    m: &MarketParams,
    strike: f64,
    expiry: f64,
    boundary: &[(f64, f64)],
    cfg: &McConfig,
) -> Result<McEstimate> {
    validate_spec(m, &OptionSpec::american_put(strike, expiry))?;
    cfg.validate()?;
    let curve = Curve::new(boundary, expiry)?;
    let n_steps = cfg.n_steps;
    let dt = expiry / n_steps as f64;
    let shift = corrected_barrier(1.0, m.sigma, dt);
    // exercise levels at t_0 .. t_{n-1}; at expiry the payoff is European
    let levels: Vec<f64> = (0..n_steps).map(|i| shift * curve.at(i as f64 * dt)).collect();
    let discounts: Vec<f64> = (0..=n_steps).map(|i| m.discount(i as f64 * dt)).collect();
    let step_drift = (m.r - 0.5 * m.sigma * m.sigma) * dt;
    let step_vol = m.sigma * dt.sqrt();
    let s0 = m.s0;
    Ok(run(cfg, |rng| {
        let mut s = s0;
        for i in 0..n_steps {
            if s <= levels[i] {
                return discounts[i] * (strike - s).max(0.0);
            }
            s *= (step_drift + step_vol * rng.normal()).exp();
        }
        discounts[n_steps] * (strike - s).max(0.0)
    }))
}

/// Cox-Ross-Rubinstein lattice price of an American put.
pub fn binomial_american_put(m: &MarketParams, strike: f64, expiry: f64, steps: usize) -> Result<f64> {
    Ok(binomial_american_put_with_boundary(m, strike, expiry, steps)?.0)
}

/// Lattice price together with the lattice estimate of the exercise
/// boundary: for each time level, the highest node at which exercising is
/// optimal (`(t, 0)` where no node exercises).
pub fn binomial_american_put_with_boundary(
    m: &MarketParams,
    strike: f64,
    expiry: f64,
    steps: usize,
) -> Result<(f64, Vec<(f64, f64)>)> {
    validate_spec(m, &OptionSpec::american_put(strike, expiry))?;
    if steps < 10 {
        return Err(Error::invalid(
            "steps",
            format!("need at least 10 lattice steps, got {steps}"),
        ));
    }
    let dt = expiry / steps as f64;
    let up = (m.sigma * dt.sqrt()).exp();
    let down = 1.0 / up;
    let growth = (m.r * dt).exp();
    let p = (growth - down) / (up - down);
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(
            "steps",
            "lattice probability outside [0, 1]; refine the lattice",
        ));
    }
    let disc = 1.0 / growth;
    let (pu, pd) = (disc * p, disc * (1.0 - p));

    // node (i, j) sits at s0 * up^(2j - i)
    let powers: Vec<f64> = (0..=2 * steps)
        .map(|k| m.s0 * up.powi(k as i32 - steps as i32))
        .collect();
    let price_at = |i: usize, j: usize| powers[steps + 2 * j - i];

    let mut values: Vec<f64> = (0..=steps).map(|j| (strike - price_at(steps, j)).max(0.0)).collect();
    let mut boundary = Vec::with_capacity(steps + 1);
    boundary.push((expiry, strike));
    for i in (0..steps).rev() {
        let mut highest_exercise = 0.0_f64;
        for j in 0..=i {
            let cont = pu * values[j + 1] + pd * values[j];
            let exercise = strike - price_at(i, j);
            if exercise > cont {
                values[j] = exercise;
                highest_exercise = highest_exercise.max(price_at(i, j));
            } else {
                values[j] = cont;
            }
        }
        boundary.push((i as f64 * dt, highest_exercise));
    }
    boundary.reverse();
    Ok((values[0], boundary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::european;

    fn atm_market() -> MarketParams {
        MarketParams {
            r: 0.1,
            sigma: 0.15,
            s0: 1.0,
        }
    }

    #[test]
    fn moment_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..5000).map(|i| ((i * 7919) % 1000) as f64 / 37.0).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|x| whole.push(*x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..1234].iter().for_each(|x| a.push(*x));
        xs[1234..].iter().for_each(|x| b.push(*x));
        let merged = a.merge(b);
        for (u, v) in [
            (whole.mean, merged.mean),
            (whole.m2, merged.m2),
            (whole.m3, merged.m3),
            (whole.m4, merged.m4),
        ] {
            assert!((u - v).abs() <= 1e-9 * u.abs().max(1.0), "{u} vs {v}");
        }
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let cfg = McConfig {
            n_paths: 5000,
            n_steps: 1,
            seed: 42,
        };
        let spec = OptionSpec::european(OptionKind::Put, 1.0, 1.0);
        let a = simulate_european(&atm_market(), &spec, &cfg).unwrap();
        let b = simulate_european(&atm_market(), &spec, &cfg).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| simulate_european(&atm_market(), &spec, &cfg).unwrap());
        assert_eq!(a, c);
        let other = simulate_european(&atm_market(), &spec, &McConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.mean, other.mean);
    }

    #[test]
    fn european_matches_closed_form() {
        let cfg = McConfig {
            n_paths: 200_000,
            n_steps: 1,
            seed: 7,
        };
        for kind in [OptionKind::Put, OptionKind::Call] {
            let spec = OptionSpec::european(kind, 1.0, 1.0);
            let est = simulate_european(&atm_market(), &spec, &cfg).unwrap();
            let exact = european::risk_profile(&atm_market(), &spec).unwrap();
            assert!(est.mean_within(exact.mean, 3.0), "{kind}: {est:?} vs {exact:?}");
            assert!(est.variance_within(exact.variance, 3.0), "{kind}: {est:?} vs {exact:?}");
            let se_pew = (exact.pew * (1.0 - exact.pew) / cfg.n_paths as f64).sqrt();
            assert!((est.pew - exact.pew).abs() < 3.0 * se_pew);
        }
    }

    #[test]
    fn corrected_barrier_moves_toward_spot() {
        for dt in [1e-4, 0.004, 0.02, 1.0] {
            assert!(corrected_barrier(0.5, 0.15, dt) > 0.5);
        }
    }

    #[test]
    fn lattice_limits() {
        let m = MarketParams {
            r: 0.1,
            sigma: 0.15,
            s0: 0.9,
        };
        let p = binomial_american_put(&m, 1.0, 1e-8, 100).unwrap();
        assert!((p - 0.1).abs() < 1e-6);
        let deep = MarketParams { s0: 0.01, ..m };
        let p = binomial_american_put(&deep, 1.0, 1.0, 500).unwrap();
        assert!((p - 0.99).abs() < 1e-12);
        assert!(binomial_american_put(&m, 1.0, 1.0, 9).is_err());
    }

    #[test]
    fn lattice_boundary_is_monotone() {
        let (_, curve) = binomial_american_put_with_boundary(&atm_market(), 1.0, 1.0, 2000).unwrap();
        assert_eq!(*curve.last().unwrap(), (1.0, 1.0));
        // the lattice resolves the boundary only to one node spacing
        let node_gap = (2.0 * 0.15 * (1.0_f64 / 2000.0).sqrt()).exp();
        for pair in curve.windows(2) {
            assert!(pair[0].1 <= pair[1].1 * node_gap, "{pair:?}");
        }
        assert!(curve[0].1 < curve[1000].1 && curve[1000].1 < curve[1999].1);
    }

    #[test]
    fn boundary_must_span_expiry() {
        let cfg = McConfig {
            n_paths: 100,
            n_steps: 10,
            seed: 1,
        };
        let short = [(0.0, 0.8), (0.5, 0.9)];
        assert!(matches!(
            simulate_american_given_boundary(&atm_market(), 1.0, 1.0, &short, &cfg),
            Err(Error::BoundaryMismatch(_))
        ));
    }

    #[test]
    fn config_validation() {
        let spec = OptionSpec::european(OptionKind::Put, 1.0, 1.0);
        let cfg = McConfig {
            n_paths: 99,
            n_steps: 1,
            seed: 0,
        };
        assert!(simulate_european(&atm_market(), &spec, &cfg).is_err());
    }
}
