//! Command-line front end: honest sessions, attack experiments, parameter
//! sweeps and the channel practicality check.
//!
//! Exit codes: 0 on success, 1 when a formula-backed estimate falls outside
//! tolerance, 2 on usage or configuration errors.

mod config;
mod report;

use std::f64::consts::FRAC_PI_8;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qbc_core::adversary::{practicality_check, run_trial, Strategy, StrategyConfig, DEFAULT_MARGIN};
use qbc_core::analysis::{estimate, half_open_grid, sweep, Metric, SweepParam, TrialStats};
use qbc_core::codes::LinearCode;
use qbc_core::protocol::{ChannelParams, VerifyPolicy};
use qbc_core::rng::stream;

use crate::report::{Report, ResolvedConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qbc",
    version,
    about = "Simulate cheat-sensitive quantum bit commitment and its attacks",
    long_about = "Simulate cheat-sensitive quantum bit commitment and its attacks.\n\n\
        A flat key=value file given with --config supplies defaults for any flag \
        (keys are flag names without dashes); flags on the command line win.",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run noiseless (or noisy) honest sessions and report acceptance.
    Honest(HonestArgs),
    /// Run a cheating strategy and compare its rates with the closed forms.
    Attack(AttackArgs),
    /// Sweep one parameter of a strategy over a half-open grid [from, to).
    Sweep(SweepArgs),
    /// Check eta_m/2 + eta_l + eta_e against d/(2n).
    Practicality(PracticalityArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Built-in code (hamming74, hamming84, hamming1511, rep<n>, spc<n>, id<k>) or generator file.
    #[arg(long, default_value = "hamming74")]
    code: String,
    /// Number of protocol runs (per grid point for sweeps).
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// RNG seed; generated and reported when absent.
    #[arg(long, env = "QBC_SEED")]
    seed: Option<u64>,
    /// Report file; the report goes to stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Maximum worker threads for trial execution.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct ChannelArgs {
    /// Multi-photon rate.
    #[arg(long, default_value_t = 0.0)]
    eta_m: f64,
    /// Loss rate.
    #[arg(long, default_value_t = 0.0)]
    eta_l: f64,
    /// Announcement error rate.
    #[arg(long, default_value_t = 0.0)]
    eta_e: f64,
}

impl ChannelArgs {
    fn params(&self) -> anyhow::Result<ChannelParams> {
        Ok(ChannelParams::new(self.eta_m, self.eta_l, self.eta_e)?)
    }
}

#[derive(Debug, Args)]
struct HonestArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    channel: ChannelArgs,
    /// Committed bit.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    bit: u8,
    /// Announcement/preparation mismatches Bob tolerates as noise.
    #[arg(long, default_value_t = 0)]
    tolerance: usize,
    /// Also write every transcript as one JSON object per line.
    #[arg(long)]
    transcripts: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyName {
    ThetaAlice,
    SlyAlice,
    MultiphotonAlice,
    CuriousBob,
    EntanglingBob,
}

#[derive(Debug, Args)]
struct StrategyArgs {
    /// Rotated measurement angle in radians (theta-alice).
    #[arg(long, default_value_t = FRAC_PI_8)]
    theta: f64,
    /// Positions Alice needs to change; defaults to ceil(d/2).
    #[arg(long)]
    flips: Option<usize>,
    /// Counted metric; defaults to every metric with a closed form.
    #[arg(long)]
    metric: Option<String>,
}

#[derive(Debug, Args)]
struct AttackArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, value_enum)]
    strategy: StrategyName,
    #[command(flatten)]
    strategy_args: StrategyArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    channel: ChannelArgs,
    /// theta, m, n_minus_d or eta_m.
    #[arg(long)]
    param: String,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long)]
    points: usize,
    /// Strategy to sweep; each parameter has a default.
    #[arg(long, value_enum)]
    strategy: Option<StrategyName>,
    #[command(flatten)]
    strategy_args: StrategyArgs,
}

#[derive(Debug, Args)]
struct PracticalityArgs {
    #[arg(long, default_value = "hamming74")]
    code: String,
    #[command(flatten)]
    channel: ChannelArgs,
    /// Pass when lhs <= margin * rhs.
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Human-readable output goes to `out`, errors to `err`.
pub fn run<W: Write, E: Write>(argv: Vec<String>, out: &mut W, err: &mut E) -> i32 {
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn dispatch<W: Write>(cli: Cli, out: &mut W) -> anyhow::Result<i32> {
    let (common, (report, rows)) = match &cli.command {
        Command::Honest(a) => (&a.common, with_workers(a.common.workers, || honest(a))?),
        Command::Attack(a) => (&a.common, with_workers(a.common.workers, || attack(a))?),
        Command::Sweep(a) => (&a.common, with_workers(a.common.workers, || run_sweep(a))?),
        Command::Practicality(a) => return practicality(a, out),
    };
    report.emit(common.output.as_deref(), common.format, out)?;
    Ok(exit_code(&rows))
}

fn with_workers<T>(workers: Option<usize>, f: impl FnOnce() -> anyhow::Result<T> + Send) -> anyhow::Result<T>
where
    T: Send,
{
    match workers {
        None => f(),
        Some(0) => bail!("--workers must be at least 1"),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().context("building worker pool")?;
            pool.install(f)
        }
    }
}

fn load_code(source: &str) -> anyhow::Result<LinearCode> {
    LinearCode::resolve(source).with_context(|| format!("loading code '{source}'"))
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn default_flips(code: &LinearCode) -> usize {
    code.d().div_ceil(2)
}

fn build_strategy(name: StrategyName, args: &StrategyArgs, code: &LinearCode) -> Strategy {
    let flips = args.flips.unwrap_or_else(|| default_flips(code));
    match name {
        StrategyName::ThetaAlice => Strategy::ThetaAlice { theta: args.theta, flips },
        StrategyName::SlyAlice => Strategy::SlyAlice,
        StrategyName::MultiphotonAlice => Strategy::MultiPhotonAlice { flips },
        StrategyName::CuriousBob => Strategy::CuriousBob,
        StrategyName::EntanglingBob => Strategy::EntanglingBob,
    }
}

/// Metrics reported by default for each strategy.
fn default_metrics(strategy: &Strategy) -> Vec<Metric> {
    match strategy {
        Strategy::Honest { .. } => vec![Metric::Accepted],
        Strategy::ThetaAlice { .. } => vec![Metric::Detected, Metric::PhotonDetected, Metric::PhotonGuess],
        Strategy::SlyAlice => vec![Metric::Detected, Metric::PhotonDetected],
        Strategy::MultiPhotonAlice { .. } => vec![Metric::CheatSucceeded, Metric::FreePulse, Metric::Detected],
        Strategy::CuriousBob | Strategy::EntanglingBob => {
            vec![Metric::PhotonGuess, Metric::CheatSucceeded, Metric::SealingWindow, Metric::BitGuess]
        }
    }
}

fn parse_metric(name: &Option<String>) -> anyhow::Result<Option<Metric>> {
    Ok(match name {
        Some(m) => Some(m.parse::<Metric>()?),
        None => None,
    })
}

fn exit_code(rows: &[TrialStats]) -> i32 {
    if rows.iter().any(|r| r.within_tolerance == Some(false)) {
        EXIT_TOLERANCE
    } else {
        EXIT_OK
    }
}

fn honest(a: &HonestArgs) -> anyhow::Result<(Report, Vec<TrialStats>)> {
    let code = load_code(&a.common.code)?;
    let seed = resolve_seed(a.common.seed);
    let mut config = StrategyConfig::new(Strategy::Honest { bit: a.bit }, code, a.common.trials, seed)
        .with_channel(a.channel.params()?);
    config.policy = VerifyPolicy { tolerated_mismatches: a.tolerance };
    let rows = vec![estimate(&config, Metric::Accepted)?];
    if let Some(path) = &a.transcripts {
        write_transcripts(&config, path)?;
    }
    let mut resolved = ResolvedConfig::new("honest", &config);
    resolved.tolerance = Some(a.tolerance);
    resolved.metrics = vec![Metric::Accepted];
    Ok((Report::stats(resolved, rows.clone()), rows))
}

/// Replays the trials of `config` (same per-trial streams as the estimate)
/// and writes their transcripts as JSON lines.
fn write_transcripts(config: &StrategyConfig, path: &std::path::Path) -> anyhow::Result<()> {
    let mut buf = String::new();
    for i in 0..config.trials as u64 {
        let outcome = run_trial(config, &mut stream(config.seed, i))?;
        if let Some(t) = outcome.transcript {
            buf.push_str(&t.to_json());
            buf.push('\n');
        }
    }
    std::fs::write(path, buf).with_context(|| format!("writing {}", path.display()))
}

fn attack(a: &AttackArgs) -> anyhow::Result<(Report, Vec<TrialStats>)> {
    let code = load_code(&a.common.code)?;
    let seed = resolve_seed(a.common.seed);
    let strategy = build_strategy(a.strategy, &a.strategy_args, &code);
    let config = StrategyConfig::new(strategy, code, a.common.trials, seed).with_channel(a.channel.params()?);
    let metrics = match parse_metric(&a.strategy_args.metric)? {
        Some(m) => vec![m],
        None => default_metrics(&strategy),
    };
    let rows = metrics.iter().map(|&m| estimate(&config, m)).collect::<Result<Vec<_>, _>>()?;
    let mut resolved = ResolvedConfig::new("attack", &config);
    resolved.metrics = metrics;
    Ok((Report::stats(resolved, rows.clone()), rows))
}

fn run_sweep(a: &SweepArgs) -> anyhow::Result<(Report, Vec<TrialStats>)> {
    let param: SweepParam = a.param.parse()?;
    if a.points == 0 {
        bail!("--points must be at least 1");
    }
    let code = load_code(&a.common.code)?;
    let seed = resolve_seed(a.common.seed);
    let strategy = match a.strategy {
        Some(name) => build_strategy(name, &a.strategy_args, &code),
        None => match param.default_strategy() {
            Strategy::ThetaAlice { theta, flips } => Strategy::ThetaAlice {
                theta: if param == SweepParam::Theta { theta } else { a.strategy_args.theta },
                flips: a.strategy_args.flips.unwrap_or(flips),
            },
            Strategy::MultiPhotonAlice { .. } => {
                Strategy::MultiPhotonAlice { flips: a.strategy_args.flips.unwrap_or_else(|| default_flips(&code)) }
            }
            other => other,
        },
    };
    let base = StrategyConfig::new(strategy, code, a.common.trials, seed).with_channel(a.channel.params()?);
    let metric = parse_metric(&a.strategy_args.metric)?.unwrap_or_else(|| param.default_metric(&strategy));
    let grid = half_open_grid(a.from, a.to, a.points);
    let rows = sweep(param, &grid, &base, metric)?;
    let mut resolved = ResolvedConfig::new("sweep", &base);
    resolved.metrics = vec![metric];
    resolved.param = Some(param.as_str().to_string());
    resolved.grid = Some(grid);
    Ok((Report::stats(resolved, rows.clone()), rows))
}

fn practicality<W: Write>(a: &PracticalityArgs, out: &mut W) -> anyhow::Result<i32> {
    let code = load_code(&a.code)?;
    let channel = a.channel.params()?;
    let result = practicality_check(&code, &channel, a.margin)?;
    Report::practicality(&code, channel, result).emit(a.output.as_deref(), a.format, out)?;
    Ok(EXIT_OK)
}
