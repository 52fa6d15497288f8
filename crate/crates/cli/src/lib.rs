//! Experiment runner behind the `qnt` binary.
//!
//! Every command renders a complete report as JSON (with a top-level
//! `"schema": 1`) or as a one-row CSV table; `sweep` renders one CSV row per
//! configuration. Output is assembled in memory and only emitted on success.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qnt_core::counting::{self, CountEstimate, CountSetup};
use qnt_core::mainloop::{self, ErrorBudget};
use qnt_core::statevec::{sample_from, stream_rng};
use qnt_core::{hl, ntcore, pnt, primality};
use qnt_core::{
    HlConfig, HlReport, PntConfig, PntReport, PrimalityConfig, PrimalityOutcome, QntError,
    RegisterLayout, SPrime, STilde, StateDump, MAX_DIM_CEILING,
};

mod sweep;
#[cfg(test)]
mod tests;

pub use sweep::{SweepArgs, SweepKind};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable overriding the state dimension cap.
pub const MAX_DIM_ENV: &str = "QNT_MAX_DIM";

#[derive(Debug, Parser)]
#[command(
    name = "qnt",
    version,
    about = "Quantum counting experiments on primes, with exact simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Include pre-measurement amplitudes with |amp|^2 above this value.
    #[arg(long, global = true)]
    pub dump_state_threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Witness count and strong liars of k.
    Witness {
        #[arg(long)]
        k: u64,
    },
    /// Quantum counting of a marked set in a domain of size N.
    Count {
        #[arg(long)]
        n: usize,
        /// Mark x < t; without it the primes below N are marked.
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, default_value_t = 8)]
        p: usize,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Primality test of k with R ancillas of dimension P.
    Primality {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 8)]
        p: usize,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Count of the primes below N.
    Pnt(PntArgs),
    /// Count of ordered prime pairs summing to 2N.
    Hl(HlArgs),
    /// One row per point of a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PntArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 8)]
    pub p: usize,
    #[arg(long, default_value_t = 16)]
    pub q: usize,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
}

#[derive(Debug, Clone, Args)]
pub struct HlArgs {
    #[arg(long = "two-n")]
    pub two_n: usize,
    #[arg(long, default_value_t = 8)]
    pub p: usize,
    #[arg(long, default_value_t = 16)]
    pub q: usize,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub nu: f64,
    #[arg(long, default_value_t = 2.0)]
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Capacity(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Capacity(m) => write!(f, "simulation cap exceeded: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<QntError> for CliError {
    fn from(e: QntError) -> Self {
        if e.is_capacity() {
            CliError::Capacity(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Dimension cap from the environment value, clamped to the hard ceiling.
pub fn max_dim_from_env(value: Option<&str>) -> CliResult<usize> {
    match value {
        None => Ok(MAX_DIM_CEILING),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(d) if d >= 1 => Ok(d.min(MAX_DIM_CEILING)),
            _ => Err(CliError::Config(format!(
                "{MAX_DIM_ENV} must be a positive integer, got `{v}`"
            ))),
        },
    }
}

/// Runs the command and writes the report to `--out` or stdout.
pub fn run(cli: &Cli, max_dim_env: Option<&str>) -> CliResult<()> {
    use std::io::Write;
    let text = execute(cli, max_dim_from_env(max_dim_env)?)?;
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(io),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(io),
    }
}

/// Runs the parsed command and returns the rendered report.
pub fn execute(cli: &Cli, max_dim: usize) -> CliResult<String> {
    if let Some(t) = cli.dump_state_threshold {
        if !t.is_finite() || t < 0.0 {
            return Err(CliError::Config(format!(
                "dump-state-threshold must be finite and >= 0, got {t}"
            )));
        }
    }
    let dump = cli.dump_state_threshold;
    match &cli.command {
        Command::Witness { k } => render(cli.format, "witness", &witness_report(*k)?, None),
        Command::Count { n, t, p, r, seed } => {
            let (report, state) = count_report(*n, *t, *p, *r, *seed, max_dim, dump)?;
            render(cli.format, "count", &report, state.as_ref())
        }
        Command::Primality { k, p, r, seed } => {
            let config = PrimalityConfig {
                max_dim,
                ..PrimalityConfig::new(*k, *p, *r, *seed)
            };
            let (report, state) = primality_report(&config, dump)?;
            render(cli.format, "primality", &report, state.as_ref())
        }
        Command::Pnt(a) => {
            let config = pnt_config(a, max_dim);
            let report = pnt::run_pnt(&config)?;
            let state = dump.map(|t| pnt_state(&config, t)).transpose()?;
            render(cli.format, "pnt", &report, state.as_ref())
        }
        Command::Hl(a) => {
            let config = hl_config(a, max_dim);
            let report = hl::run_hl(&config)?;
            let state = dump.map(|t| hl_state(&config, t)).transpose()?;
            render(cli.format, "hl", &report, state.as_ref())
        }
        Command::Sweep(args) => sweep::run(args, cli.format, max_dim),
    }
}

pub fn pnt_config(a: &PntArgs, max_dim: usize) -> PntConfig {
    PntConfig {
        n: a.n,
        p: a.p,
        q: a.q,
        repetitions: a.reps,
        seed: a.seed,
        delta: a.delta,
        max_dim,
    }
}

pub fn hl_config(a: &HlArgs, max_dim: usize) -> HlConfig {
    HlConfig {
        two_n: a.two_n,
        p: a.p,
        q: a.q,
        repetitions: a.reps,
        seed: a.seed,
        nu: a.nu,
        mu: a.mu,
        max_dim,
    }
}

// ---- reports ------------------------------------------------------------

/// A report that can also be flattened into one CSV row.
pub trait Row: Serialize {
    fn columns() -> &'static [&'static str];
    fn values(&self) -> Vec<String>;
}

fn s<T: ToString>(v: T) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(s).unwrap_or_default()
}

fn verdict_name<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub k: u64,
    /// `k - 1 = 2^h l`.
    pub h: u32,
    pub l: u64,
    pub witnesses: u64,
    pub liars: Vec<u64>,
    pub prime: bool,
    /// `3 (k - 1) / 4`: the witness floor for odd composites.
    pub composite_floor: f64,
}

pub fn witness_report(k: u64) -> CliResult<WitnessReport> {
    if k < 2 {
        return Err(CliError::Config(format!("k must be at least 2, got {k}")));
    }
    let d = ntcore::decompose_odd(k - 1).unwrap_or(ntcore::OddDecomposition { h: 0, l: 0 });
    let witnesses = ntcore::count_witnesses(k)?;
    Ok(WitnessReport {
        k,
        h: d.h,
        l: d.l,
        witnesses,
        liars: ntcore::liars(k)?,
        prime: ntcore::Sieve::new(k as usize + 1).is_prime(k as usize),
        composite_floor: 0.75 * (k - 1) as f64,
    })
}

impl Row for WitnessReport {
    fn columns() -> &'static [&'static str] {
        &["k", "witnesses", "liars", "prime", "composite_floor"]
    }
    fn values(&self) -> Vec<String> {
        let liars = self
            .liars
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        vec![
            s(self.k),
            s(self.witnesses),
            liars,
            s(self.prime),
            s(self.composite_floor),
        ]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub n: usize,
    pub p: usize,
    pub r: usize,
    pub seed: u64,
    /// Marked states; `x < t` or the primes below `N`.
    pub marking: String,
    pub t_true: usize,
    pub f: f64,
    pub distribution: Vec<f64>,
    pub analytic_distribution: Vec<f64>,
    pub max_abs_diff: f64,
    pub outcomes: Vec<usize>,
    pub estimates: Vec<CountEstimate>,
    pub majority: CountEstimate,
    /// `|t~ - t| <= pi N / P (pi / P + 2 sqrt(t / N))` with the true `t`.
    pub error_bound: f64,
    pub within_bound: bool,
}

impl Row for CountReport {
    fn columns() -> &'static [&'static str] {
        &[
            "n",
            "p",
            "r",
            "seed",
            "t_true",
            "f",
            "t_estimate",
            "error_bound",
            "within_bound",
            "max_abs_diff",
        ]
    }
    fn values(&self) -> Vec<String> {
        vec![
            s(self.n),
            s(self.p),
            s(self.r),
            s(self.seed),
            s(self.t_true),
            s(self.f),
            s(self.majority.t),
            s(self.error_bound),
            s(self.within_bound),
            s(self.max_abs_diff),
        ]
    }
}

pub fn count_report(
    n: usize,
    t: Option<usize>,
    p: usize,
    r: usize,
    seed: u64,
    max_dim: usize,
    dump: Option<f64>,
) -> CliResult<(CountReport, Option<StateDump>)> {
    if let Some(t) = t {
        if t > n {
            return Err(CliError::Config(format!("t={t} exceeds N={n}")));
        }
    }
    let sieve = ntcore::Sieve::new(n);
    let setup = match t {
        Some(t) => CountSetup::new(n, p, r, |x| x < t)?,
        None => CountSetup::new(n, p, r, |x| sieve.is_prime(x))?,
    };
    let dims: Vec<usize> = std::iter::repeat_n(p, r).chain([n]).collect();
    let total = RegisterLayout::product(dims);
    if total > max_dim as u128 {
        return Err(QntError::DimensionCap {
            requested: total,
            cap: max_dim,
        }
        .into());
    }
    let state = setup.run()?;
    let t_true = setup.marked_count();
    let distribution = setup.ancilla_distribution(&state);
    let analytic_distribution = counting::predict_distribution(n, t_true, p, r)?;
    let max_abs_diff = distribution
        .iter()
        .zip(&analytic_distribution)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let joint = sample_from(&distribution, &mut stream_rng(seed, 0));
    let outcomes: Vec<usize> = (0..r)
        .map(|i| (joint / p.pow((r - 1 - i) as u32)) % p)
        .collect();
    let estimates = outcomes
        .iter()
        .map(|&l| counting::estimate_from_outcome(l, p, n))
        .collect::<qnt_core::Result<Vec<_>>>()?;
    let majority = counting::majority_estimate(&estimates)?;
    let error_bound = counting::error_bound(n, p, t_true as f64);
    let report = CountReport {
        n,
        p,
        r,
        seed,
        marking: match t {
            Some(t) => format!("x < {t}"),
            None => "prime".to_string(),
        },
        t_true,
        f: counting::phase_fraction(t_true, n, p),
        distribution,
        analytic_distribution,
        max_abs_diff,
        outcomes,
        estimates,
        within_bound: (majority.t - t_true as f64).abs() <= error_bound,
        majority,
        error_bound,
    };
    Ok((report, dump.map(|th| state.dump(th))))
}

#[derive(Debug, Clone, Serialize)]
pub struct PrimalityReport {
    pub config: PrimalityConfig,
    #[serde(flatten)]
    pub outcome: PrimalityOutcome,
    /// `alpha_k^(2R)`.
    pub analytic_zero_probability: f64,
    /// `f_k >= P/3`.
    pub threshold_met: bool,
    pub within_bound: bool,
}

pub fn primality_report(
    config: &PrimalityConfig,
    dump: Option<f64>,
) -> CliResult<(PrimalityReport, Option<StateDump>)> {
    config.validate()?;
    let outcome = primality::run_primality(config)?;
    let state = match dump {
        Some(th) => {
            let k = config.k as u64;
            let setup = CountSetup::new(config.k, config.p, config.r, |a| {
                ntcore::is_witness_extended(k, a as u64)
            })?;
            Some(setup.run()?.dump(th))
        }
        None => None,
    };
    let report = PrimalityReport {
        config: config.clone(),
        analytic_zero_probability: primality::analytic_zero_probability(
            config.k, config.p, config.r,
        )?,
        threshold_met: outcome.f >= config.p as f64 / 3.0,
        within_bound: outcome.witnesses == 0
            || outcome.zero_probability <= outcome.error_probability_bound,
        outcome,
    };
    Ok((report, state))
}

impl Row for PrimalityReport {
    fn columns() -> &'static [&'static str] {
        &[
            "k",
            "p",
            "r",
            "seed",
            "verdict",
            "outcomes",
            "witnesses",
            "f",
            "zero_probability",
            "analytic_zero_probability",
            "error_probability_bound",
            "threshold_met",
            "within_bound",
        ]
    }
    fn values(&self) -> Vec<String> {
        let o = &self.outcome;
        vec![
            s(self.config.k),
            s(self.config.p),
            s(self.config.r),
            s(self.config.seed),
            verdict_name(&o.verdict),
            o.outcomes
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(" "),
            s(o.witnesses),
            s(o.f),
            s(o.zero_probability),
            s(self.analytic_zero_probability),
            s(o.error_probability_bound),
            s(self.threshold_met),
            s(self.within_bound),
        ]
    }
}

fn pnt_state(config: &PntConfig, threshold: f64) -> CliResult<StateDump> {
    let oracle = STilde::strong(config.n, config.p)?;
    Ok(mainloop::counting_state(&oracle, config.q, config.max_dim)?.dump(threshold))
}

fn hl_state(config: &HlConfig, threshold: f64) -> CliResult<StateDump> {
    let oracle = SPrime::strong(config.two_n, config.p)?;
    Ok(mainloop::counting_state(&oracle, config.q, config.max_dim)?.dump(threshold))
}

impl Row for PntReport {
    fn columns() -> &'static [&'static str] {
        &[
            "n",
            "p",
            "q",
            "repetitions",
            "seed",
            "delta",
            "t_estimate",
            "t_rounded",
            "t_true",
            "n_over_ln_n",
            "delta_t_exp",
            "delta_t_bound",
            "delta_t_th",
            "f_q",
            "beta_effective",
            "gamma_effective",
            "e_norm_sq",
            "e_bound",
            "modal_mass",
            "w_err",
            "w_err_bound",
            "success_ok",
            "verdict",
        ]
    }
    fn values(&self) -> Vec<String> {
        let (c, k) = (&self.config, &self.check);
        vec![
            s(c.n),
            s(c.p),
            s(c.q),
            s(c.repetitions),
            s(c.seed),
            s(c.delta),
            s(k.t_estimate),
            s(k.t_estimate_rounded),
            s(k.t_true),
            s(k.n_over_ln_n),
            s(k.delta_t_exp),
            s(k.delta_t_bound),
            s(k.delta_t_th),
            s(k.f_q),
            s(k.beta_effective),
            s(self.gamma_effective),
            s(self.budget.e_norm_sq),
            s(self.budget.e_bound),
            s(self.statistics.modal_mass),
            opt(self.budget.w_err),
            opt(self.budget.w_err_bound),
            s(self.success_ok),
            verdict_name(&k.verdict),
        ]
    }
}

impl Row for HlReport {
    fn columns() -> &'static [&'static str] {
        &[
            "two_n",
            "p",
            "q",
            "repetitions",
            "seed",
            "nu",
            "mu",
            "r2_estimate",
            "r2_rounded",
            "r2_true",
            "delta_r_exp",
            "delta_r_bound",
            "delta_r_th",
            "conjecture_ratio_estimate",
            "conjecture_ratio_true",
            "rho_effective",
            "sigma_effective",
            "e_norm_sq",
            "e_bound",
            "modal_mass",
            "w_err",
            "w_err_bound",
            "success_ok",
            "verdict",
        ]
    }
    fn values(&self) -> Vec<String> {
        let c = &self.config;
        vec![
            s(c.two_n),
            s(c.p),
            s(c.q),
            s(c.repetitions),
            s(c.seed),
            s(c.nu),
            s(c.mu),
            s(self.estimate.t),
            s(self.r2_estimate_rounded),
            s(self.r2_true),
            s(self.delta_r_exp),
            s(self.delta_r_bound),
            s(self.delta_r_th),
            s(self.conjecture_ratio_estimate),
            s(self.conjecture_ratio_true),
            s(self.rho_effective),
            s(self.sigma_effective),
            s(self.budget.e_norm_sq),
            s(self.budget.e_bound),
            s(self.statistics.modal_mass),
            opt(self.budget.w_err),
            opt(self.budget.w_err_bound),
            s(self.success_ok),
            verdict_name(&self.verdict),
        ]
    }
}

/// Residual norm of one oracle application, tagged with its parameters.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    /// `N` for the prime oracle, `2N` for the pair oracle.
    pub domain: usize,
    pub p: usize,
    #[serde(flatten)]
    pub budget: ErrorBudget,
}

impl Row for ResidualReport {
    fn columns() -> &'static [&'static str] {
        &[
            "domain",
            "p",
            "e_norm_sq",
            "e_norm_sq_analytic",
            "e_bound",
            "within_bound",
        ]
    }
    fn values(&self) -> Vec<String> {
        let b = &self.budget;
        vec![
            s(self.domain),
            s(self.p),
            s(b.e_norm_sq),
            s(b.e_norm_sq_analytic),
            s(b.e_bound),
            s(b.e_within_bound),
        ]
    }
}

// ---- rendering ----------------------------------------------------------

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    command: &'a str,
    report: &'a T,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<&'a StateDump>,
}

fn render<T: Row>(
    format: Format,
    command: &str,
    report: &T,
    state: Option<&StateDump>,
) -> CliResult<String> {
    match format {
        Format::Json => {
            let env = Envelope {
                schema: SCHEMA_VERSION,
                command,
                report,
                state,
            };
            let mut text =
                serde_json::to_string_pretty(&env).map_err(|e| CliError::Io(e.to_string()))?;
            text.push('\n');
            Ok(text)
        }
        Format::Csv => csv_table(T::columns(), std::slice::from_ref(&report.values())),
    }
}

pub(crate) fn csv_table(columns: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(columns).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}
