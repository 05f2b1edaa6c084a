//! The `optrisk` command line.
//!
//! Exit status: 0 on success, 1 for invalid input (including unparsable
//! arguments), 2 for numerical failures and failed `verify` checks.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::american::{self, SolverConfig};
use crate::barrier;
use crate::error::{Error, Warning};
use crate::european;
use crate::market::{MarketParams, OptionKind, OptionSpec};
use crate::monte_carlo::{self, ContinuityCorrection, McConfig, McEstimate};
use crate::output::{Cell, Table};
use crate::risk::{self, RiskAdjustment};
use crate::verify;

const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser, Debug)]
#[command(
    name = "optrisk",
    version,
    about = "Risk profiles of European, barrier and American options"
)]
pub struct Cli {
    /// Output encoding.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the table to FILE instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Seed for simulations and random property draws.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Moments, variance and PEW of a vanilla European option.
    European(EuropeanArgs),
    /// Profile of a down-and-out European put.
    Barrier(BarrierArgs),
    /// American put by the front-fixed PDE solver.
    American(AmericanArgs),
    /// Monte Carlo and lattice oracle estimates.
    Mc(McArgs),
    /// Effective volatilities of risk-adjusted prices over a strike grid.
    Smile(SmileArgs),
    /// Run an engine over a range of one parameter.
    Sweep(SweepArgs),
    /// Run the built-in property checks and report pass/fail.
    Verify,
}

#[derive(Args, Debug, Clone)]
struct MarketArgs {
    /// Risk-free rate (continuous, per year).
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.1)]
    r: f64,
    /// Volatility (per square-root year).
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.15)]
    sigma: f64,
    /// Spot price.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    s0: f64,
}

impl MarketArgs {
    fn market(&self) -> Result<MarketParams, Error> {
        MarketParams::new(self.r, self.sigma, self.s0)
    }
}

#[derive(Args, Debug, Clone)]
struct EuropeanArgs {
    #[command(flatten)]
    market: MarketArgs,
    #[arg(long, value_enum, default_value_t = KindArg::Put)]
    kind: KindArg,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0, visible_alias = "k")]
    strike: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0, visible_alias = "t")]
    expiry: f64,
    /// Risk-aversion coefficient; adds the adjusted price and its effective volatility.
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    /// Also report raw moments of order 3..=N.
    #[arg(long, value_name = "N")]
    moments: Option<u32>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum KindArg {
    Call,
    Put,
}

impl From<KindArg> for OptionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Call => OptionKind::Call,
            KindArg::Put => OptionKind::Put,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct BarrierArgs {
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.1)]
    r: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.15)]
    sigma: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.8)]
    s0: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0, visible_alias = "k")]
    strike: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0, visible_alias = "t")]
    expiry: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.5)]
    barrier: f64,
}

impl BarrierArgs {
    fn market(&self) -> Result<MarketParams, Error> {
        MarketParams::new(self.r, self.sigma, self.s0)
    }
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = 400)]
    n_y: usize,
    #[arg(long, default_value_t = 400)]
    n_tau: usize,
    /// Far-field truncation in y; default max(4, 8 sigma sqrt(T)).
    #[arg(long)]
    y_max: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    newton_tol: f64,
    #[arg(long, default_value_t = 50)]
    newton_max_iter: usize,
    /// Fully implicit start-up steps (0 = plain Crank-Nicolson).
    #[arg(long, default_value_t = 0)]
    rannacher_steps: usize,
}

impl GridArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            n_y: self.n_y,
            n_tau: self.n_tau,
            y_max: self.y_max,
            newton_tol: self.newton_tol,
            newton_max_iter: self.newton_max_iter,
            rannacher_steps: self.rannacher_steps,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct AmericanArgs {
    #[command(flatten)]
    market: MarketArgs,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0, visible_alias = "k")]
    strike: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    expiry: f64,
    /// Calendar time of the query, in [0, T].
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    t: f64,
    /// Comma-separated spots to evaluate (default: --s0).
    #[arg(long, value_delimiter = ',')]
    spots: Vec<f64>,
    /// Emit the early exercise curve (t, b) instead of profiles.
    #[arg(long)]
    curve: bool,
    /// Also write the solved fields as CSV (tau, y, U, V, W).
    #[arg(long, value_name = "FILE")]
    grid_out: Option<PathBuf>,
    /// Also write the free boundary as CSV (tau, B).
    #[arg(long, value_name = "FILE")]
    boundary_out: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct McArgs {
    #[arg(long, default_value_t = 100_000, global = true)]
    paths: usize,
    #[arg(long, default_value_t = 250, global = true)]
    steps: usize,
    #[command(subcommand)]
    engine: McEngine,
}

#[derive(Subcommand, Debug)]
enum McEngine {
    /// Exact terminal sampling of a vanilla payoff.
    European(EuropeanArgs),
    /// Discretely monitored down-and-out put.
    Barrier {
        #[command(flatten)]
        args: BarrierArgs,
        /// Monitor the raw barrier instead of the corrected one.
        #[arg(long)]
        no_correction: bool,
    },
    /// American put exercised on the PDE boundary.
    American(AmericanArgs),
    /// Cox-Ross-Rubinstein lattice price of the American put.
    Binomial {
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0, visible_alias = "k")]
        strike: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0, visible_alias = "t")]
        expiry: f64,
        #[arg(long, default_value_t = 10_000)]
        tree_steps: usize,
    },
}

#[derive(Args, Debug)]
struct SmileArgs {
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.02)]
    r: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.25)]
    sigma: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 25.0)]
    s0: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.5, visible_alias = "t")]
    expiry: f64,
    #[arg(long, value_enum, default_value_t = KindArg::Put)]
    kind: KindArg,
    #[arg(long, allow_negative_numbers = true, default_value_t = -0.01)]
    q: f64,
    #[arg(long, default_value_t = 15.0, visible_alias = "kmin")]
    k_min: f64,
    #[arg(long, default_value_t = 35.0, visible_alias = "kmax")]
    k_max: f64,
    #[arg(long, default_value_t = 41)]
    points: usize,
    /// Explicit comma-separated strikes (overrides the range).
    #[arg(long, value_delimiter = ',')]
    strikes: Vec<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    S0,
    Strike,
    Expiry,
    Barrier,
    Q,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_enum)]
    axis: Axis,
    #[arg(long, allow_negative_numbers = true)]
    start: f64,
    #[arg(long, allow_negative_numbers = true)]
    stop: f64,
    #[arg(long)]
    points: usize,
    #[command(subcommand)]
    engine: SweepEngine,
}

#[derive(Subcommand, Debug)]
enum SweepEngine {
    European(EuropeanArgs),
    Barrier(BarrierArgs),
    American(AmericanArgs),
}

/// What a command produced: one table plus any diagnostics.
struct Report {
    table: Table,
    warnings: Vec<Warning>,
    failed: bool,
}

impl From<Table> for Report {
    fn from(table: Table) -> Self {
        Self {
            table,
            warnings: Vec::new(),
            failed: false,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Engine(Error),
    Io(std::io::Error),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Engine(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Engine(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Engine(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Usage(s) => f.write_str(s),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn european_table(a: &EuropeanArgs) -> CliResult<Report> {
    let m = a.market.market()?;
    let kind = OptionKind::from(a.kind);
    let spec = OptionSpec::european(kind, a.strike, a.expiry);
    let p = european::risk_profile(&m, &spec)?;
    let mut columns: Vec<String> = [
        "kind",
        "s0",
        "strike",
        "expiry",
        "mean",
        "second_moment",
        "variance",
        "sd",
        "pew",
        "risk_ratio",
        "chebyshev_bound",
    ]
    .map(String::from)
    .to_vec();
    let ratio = risk::risk_ratio(&p).ok();
    let mut row: Vec<Cell> = vec![
        kind.to_string().into(),
        m.s0.into(),
        a.strike.into(),
        a.expiry.into(),
        p.mean.into(),
        p.second_moment.into(),
        p.variance.into(),
        p.sd.into(),
        p.pew.into(),
        ratio.into(),
        ratio.map(|x| x * x).into(),
    ];
    let mut warnings = Vec::new();
    if let Some(q) = a.q {
        let adj = RiskAdjustment::new(q)?;
        warnings.extend(adj.warnings());
        let point = risk::smile_curve(&m, a.expiry, kind, adj, &[a.strike])?[0];
        columns.extend(["q", "adjusted_price", "effective_vol", "failure_reason"].map(String::from));
        row.extend([
            q.into(),
            point.adjusted_price.into(),
            point.effective_vol.into(),
            point.failure.map_or(Cell::Empty, |f| f.as_str().into()),
        ]);
    }
    if let Some(n) = a.moments {
        for order in 3..=n {
            columns.push(format!("moment_{order}"));
            row.push(european::nth_moment(&m, &spec, order)?.into());
        }
    }
    let mut table = Table::new(columns);
    table.push(row);
    Ok(Report {
        table,
        warnings,
        failed: false,
    })
}

fn barrier_table(a: &BarrierArgs) -> CliResult<Report> {
    let m = a.market()?;
    let p = barrier::dao_put_profile(&m, a.strike, a.expiry, a.barrier)?;
    let mut table = Table::new([
        "s0",
        "strike",
        "expiry",
        "barrier",
        "mean",
        "second_moment",
        "variance",
        "sd",
        "pew",
        "risk_ratio",
    ]);
    table.push(vec![
        m.s0.into(),
        a.strike.into(),
        a.expiry.into(),
        a.barrier.into(),
        p.mean.into(),
        p.second_moment.into(),
        p.variance.into(),
        p.sd.into(),
        p.pew.into(),
        risk::risk_ratio(&p).ok().into(),
    ]);
    Ok(Report {
        table,
        warnings: barrier::diagnostics(&m),
        failed: false,
    })
}

const AMERICAN_COLUMNS: [&str; 10] = [
    "s0",
    "strike",
    "expiry",
    "t",
    "price",
    "second_moment",
    "variance",
    "sd",
    "pew",
    "early_exercise_price",
];

fn american_rows(
    grid: &american::FrontFixedGrid,
    m: &MarketParams,
    a: &AmericanArgs,
    spots: &[f64],
    table: &mut Table,
) -> CliResult<()> {
    for &s in spots {
        let p = american::evaluate(grid, m, a.strike, a.expiry, s, a.t)?;
        table.push(vec![
            s.into(),
            a.strike.into(),
            a.expiry.into(),
            a.t.into(),
            p.price.into(),
            p.second_moment.into(),
            p.variance.into(),
            p.sd().into(),
            p.pew.into(),
            p.early_exercise_price.into(),
        ]);
    }
    Ok(())
}

fn write_side_files(a: &AmericanArgs, grid: &american::FrontFixedGrid) -> CliResult<()> {
    if let Some(path) = &a.grid_out {
        grid.write_fields_csv(BufWriter::new(File::create(path)?))?;
    }
    if let Some(path) = &a.boundary_out {
        grid.write_boundary_csv(BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

fn curve_table(curve: &[(f64, f64)]) -> Table {
    let mut t = Table::new(["t", "b"]);
    for (time, b) in curve {
        t.push(vec![(*time).into(), (*b).into()]);
    }
    t
}

fn american_table(a: &AmericanArgs) -> CliResult<Report> {
    let m = a.market.market()?;
    let grid = american::solve(&m, a.strike, a.expiry, &a.grid.config())?;
    write_side_files(a, &grid)?;
    if a.curve {
        return Ok(curve_table(&american::early_exercise_curve(&grid, a.strike, a.expiry)).into());
    }
    let spots = if a.spots.is_empty() {
        vec![m.s0]
    } else {
        a.spots.clone()
    };
    let mut table = Table::new(AMERICAN_COLUMNS);
    american_rows(&grid, &m, a, &spots, &mut table)?;
    Ok(table.into())
}

fn estimate_table(engine: &str, cfg: &McConfig, est: &McEstimate, reference: (Option<f64>, Option<f64>)) -> Table {
    let mut t = Table::new([
        "engine",
        "mean",
        "variance",
        "pew",
        "stderr_mean",
        "stderr_variance",
        "n_paths",
        "n_steps",
        "seed",
        "reference_mean",
        "reference_variance",
    ]);
    t.push(vec![
        engine.into(),
        est.mean.into(),
        est.variance.into(),
        est.pew.into(),
        est.stderr_mean.into(),
        est.stderr_variance.into(),
        est.n_paths.into(),
        cfg.n_steps.into(),
        Cell::Int(cfg.seed),
        reference.0.into(),
        reference.1.into(),
    ]);
    t
}

fn mc_table(a: &McArgs, seed: u64) -> CliResult<Report> {
    let cfg = McConfig {
        n_paths: a.paths,
        n_steps: a.steps,
        seed,
    };
    let report = match &a.engine {
        McEngine::European(e) => {
            let m = e.market.market()?;
            let spec = OptionSpec::european(e.kind.into(), e.strike, e.expiry);
            let est = monte_carlo::simulate_european(&m, &spec, &McConfig { n_steps: 1, ..cfg })?;
            let exact = european::risk_profile(&m, &spec)?;
            estimate_table(
                "european",
                &McConfig { n_steps: 1, ..cfg },
                &est,
                (Some(exact.mean), Some(exact.variance)),
            )
            .into()
        }
        McEngine::Barrier { args, no_correction } => {
            let m = args.market()?;
            let correction = if *no_correction {
                ContinuityCorrection::Off
            } else {
                ContinuityCorrection::Shifted
            };
            let est = monte_carlo::simulate_dao_put_with(&m, args.strike, args.expiry, args.barrier, &cfg, correction)?;
            let exact = barrier::dao_put_profile(&m, args.strike, args.expiry, args.barrier)?;
            let name = if *no_correction {
                "barrier-uncorrected"
            } else {
                "barrier"
            };
            estimate_table(name, &cfg, &est, (Some(exact.mean), Some(exact.variance))).into()
        }
        McEngine::American(e) => {
            let m = e.market.market()?;
            let grid = american::solve(&m, e.strike, e.expiry, &e.grid.config())?;
            write_side_files(e, &grid)?;
            let curve = american::early_exercise_curve(&grid, e.strike, e.expiry);
            let est = monte_carlo::simulate_american_given_boundary(&m, e.strike, e.expiry, &curve, &cfg)?;
            let pde = american::evaluate(&grid, &m, e.strike, e.expiry, m.s0, 0.0)?;
            estimate_table("american", &cfg, &est, (Some(pde.price), Some(pde.variance))).into()
        }
        McEngine::Binomial {
            market,
            strike,
            expiry,
            tree_steps,
        } => {
            let m = market.market()?;
            let price = monte_carlo::binomial_american_put(&m, *strike, *expiry, *tree_steps)?;
            let mut t = Table::new(["s0", "strike", "expiry", "tree_steps", "price"]);
            t.push(vec![
                m.s0.into(),
                (*strike).into(),
                (*expiry).into(),
                (*tree_steps).into(),
                price.into(),
            ]);
            t.into()
        }
    };
    Ok(report)
}

fn smile_table(a: &SmileArgs) -> CliResult<Report> {
    let m = MarketParams::new(a.r, a.sigma, a.s0)?;
    let adj = RiskAdjustment::new(a.q)?;
    let strikes = if a.strikes.is_empty() {
        linspace(a.k_min, a.k_max, a.points)?
    } else {
        a.strikes.clone()
    };
    let points = risk::smile_curve(&m, a.expiry, a.kind.into(), adj, &strikes)?;
    Ok(Report {
        table: risk::smile_table(&points),
        warnings: adj.warnings(),
        failed: false,
    })
}

fn linspace(start: f64, stop: f64, points: usize) -> CliResult<Vec<f64>> {
    if points < 2 {
        return Err(CliError::Usage(format!("need at least 2 points, got {points}")));
    }
    if !(start.is_finite() && stop.is_finite() && start < stop) {
        return Err(CliError::Usage(format!("need start < stop, got {start} and {stop}")));
    }
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                stop
            } else {
                start + (stop - start) * i as f64 / (points - 1) as f64
            }
        })
        .collect())
}

fn sweep_table(a: &SweepArgs) -> CliResult<Report> {
    let values = linspace(a.start, a.stop, a.points)?;
    let invalid = |engine: &str| {
        Err(CliError::Usage(format!(
            "axis `{}` is not valid for the {engine} engine",
            a.axis.to_possible_value().expect("no skipped variants").get_name()
        )))
    };
    let mut out = Report::from(Table::default());
    let absorb = |r: Report, out: &mut Report| {
        out.table.extend(r.table);
        for w in r.warnings {
            if !out.warnings.contains(&w) {
                out.warnings.push(w);
            }
        }
    };
    match &a.engine {
        SweepEngine::European(base) => {
            if a.axis == Axis::Barrier {
                return invalid("european");
            }
            for &x in &values {
                let mut e = base.clone();
                match a.axis {
                    Axis::S0 => e.market.s0 = x,
                    Axis::Strike => e.strike = x,
                    Axis::Expiry => e.expiry = x,
                    Axis::Q => e.q = Some(x),
                    Axis::Barrier => unreachable!(),
                }
                absorb(european_table(&e)?, &mut out);
            }
        }
        SweepEngine::Barrier(base) => {
            if a.axis == Axis::Q {
                return invalid("barrier");
            }
            for &x in &values {
                let mut b = base.clone();
                match a.axis {
                    Axis::S0 => b.s0 = x,
                    Axis::Strike => b.strike = x,
                    Axis::Expiry => b.expiry = x,
                    Axis::Barrier => b.barrier = x,
                    Axis::Q => unreachable!(),
                }
                absorb(barrier_table(&b)?, &mut out);
            }
        }
        SweepEngine::American(base) => {
            let m = base.market.market()?;
            let mut table = Table::new(AMERICAN_COLUMNS);
            match a.axis {
                Axis::S0 | Axis::Strike => {
                    // the dimensionless grid depends only on (r, sigma, T)
                    let grid = american::solve(&m, base.strike, base.expiry, &base.grid.config())?;
                    for &x in &values {
                        let mut e = base.clone();
                        let spot = if a.axis == Axis::S0 { x } else { m.s0 };
                        if a.axis == Axis::Strike {
                            e.strike = x;
                        }
                        american_rows(&grid, &m, &e, &[spot], &mut table)?;
                    }
                }
                Axis::Expiry => {
                    for &x in &values {
                        let e = AmericanArgs {
                            expiry: x,
                            ..base.clone()
                        };
                        let grid = american::solve(&m, e.strike, x, &e.grid.config())?;
                        american_rows(&grid, &m, &e, &[m.s0], &mut table)?;
                    }
                }
                Axis::Barrier | Axis::Q => return invalid("american"),
            }
            absorb(table.into(), &mut out);
        }
    }
    Ok(out)
}

fn verify_table(seed: u64) -> CliResult<Report> {
    let results = verify::run_all(seed)?;
    Ok(Report {
        table: verify::results_table(&results),
        warnings: Vec::new(),
        failed: results.iter().any(|r| !r.passed),
    })
}

fn write_report(cli: &Cli, report: &Report, stdout: &mut dyn Write) -> CliResult<()> {
    let write = |out: &mut dyn Write| -> std::io::Result<()> {
        match cli.format {
            Format::Csv => report.table.write_csv(out),
            Format::Json => report.table.write_json(out),
        }
    };
    match &cli.out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            write(&mut f)?;
            f.flush()?;
        }
        None => write(stdout)?,
    }
    Ok(())
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> CliResult<Report> {
    let report = match &cli.command {
        Command::European(a) => european_table(a)?,
        Command::Barrier(a) => barrier_table(a)?,
        Command::American(a) => american_table(a)?,
        Command::Mc(a) => mc_table(a, cli.seed)?,
        Command::Smile(a) => smile_table(a)?,
        Command::Sweep(a) => sweep_table(a)?,
        Command::Verify => verify_table(cli.seed)?,
    };
    write_report(cli, &report, stdout)?;
    Ok(report)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(report) => {
            for w in &report.warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            if report.failed {
                let _ = writeln!(stderr, "error: some checks failed");
                2
            } else {
                0
            }
        }
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code()
        }
    }
}
