//! `fairalloc`: fair rate allocation for Gaussian multiple-access and
//! broadcast channels.

mod check;
mod output;
mod spec;
mod sweep;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairalloc::bc::{self, BcError};
use fairalloc::mac::{self, Disagreement, MacCriterion, MacError, ModeChoice};
use fairalloc::maxmin::MaxMinError;
use serde_json::json;
use thiserror::Error;

use crate::output::ResultDocument;
use crate::spec::{Channel, ChannelFlags, ChannelSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Input(_) => "input",
            CliError::Solver(_) => "solver",
            CliError::Io(_) => "io",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<MacError> for CliError {
    fn from(e: MacError) -> Self {
        match e {
            MacError::Solver(MaxMinError::SetFn(_)) | MacError::SetFn(_) => CliError::Input(e.to_string()),
            MacError::InvalidChannel(_) | MacError::Unsupported(_) | MacError::NegativeArgument(_) => {
                CliError::Input(e.to_string())
            }
            MacError::Solver(_) | MacError::Factorization(_) => CliError::Solver(e.to_string()),
        }
    }
}

impl From<BcError> for CliError {
    fn from(e: BcError) -> Self {
        match e {
            BcError::InfeasibleDisagreement { .. } | BcError::NoRoot { .. } => CliError::Solver(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fairalloc", version, about = "Fair rate allocation for Gaussian MAC and BC channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a fair operating point.
    Solve {
        #[command(subcommand)]
        channel: SolveChannel,
    },
    /// Run a randomized property suite.
    Check(CheckArgs),
    /// Tabulate capacities over a parameter range as CSV.
    Sweep {
        #[command(subcommand)]
        kind: SweepKind,
    },
}

#[derive(Debug, Subcommand)]
enum SolveChannel {
    /// Gaussian multiple-access channel (scalar, or vector with --signatures).
    Mac(SolveArgs),
    /// Degraded Gaussian broadcast channel.
    Bc(SolveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CriterionArg {
    Symmetric,
    Maxmin,
    Pf,
    Nbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Auto,
    Exhaustive,
    Ordered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Transmit powers, comma separated (mac).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    powers: Option<Vec<f64>>,
    /// Noise power (mac) or per-user noise powers (bc), comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    noise: Option<Vec<f64>>,
    /// Total power budget (bc).
    #[arg(long, allow_negative_numbers = true)]
    total_power: Option<f64>,
    /// Whitespace-separated L x K matrix whose columns are unit signatures.
    #[arg(long)]
    signatures: Option<PathBuf>,
    /// JSON channel description; explicit flags take precedence.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = CriterionArg::Maxmin)]
    criterion: CriterionArg,
    /// `canonical` or a comma-separated point, for --criterion nbs.
    #[arg(long, allow_negative_numbers = true)]
    disagreement: Option<String>,
    /// Search strategy for MAC solvers.
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Omit `generated_at` so output is byte-for-byte reproducible.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long, value_enum)]
    suite: check::Suite,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Debug, Args)]
struct RangeArgs {
    #[arg(long, allow_negative_numbers = true)]
    from: f64,
    #[arg(long, allow_negative_numbers = true)]
    to: f64,
    #[arg(long, default_value_t = 25)]
    points: usize,
    #[arg(long, value_enum, default_value_t = sweep::Scale::Log)]
    scale: sweep::Scale,
}

#[derive(Debug, Subcommand)]
enum SweepKind {
    /// Vary the BC power budget.
    /// Columns: total_power,c_sym,c_pf,c_sum,eta_sym,eta_pf.
    BcEfficiency {
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        noise: Vec<f64>,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Vary one user's power on a scalar MAC.
    /// Columns: user_power,c_sym,c_sum,eta_sym.
    MacSymmetric {
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        powers: Vec<f64>,
        #[arg(long, allow_negative_numbers = true)]
        noise: f64,
        /// 1-based index of the varied user.
        #[arg(long)]
        user: usize,
        #[command(flatten)]
        range: RangeArgs,
    },
}

fn parse_point(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Input(format!("bad disagreement entry {t:?}"))))
        .collect()
}

fn timestamp(disabled: bool) -> Option<u64> {
    (!disabled).then(output::unix_now)
}

fn solve(args: SolveArgs, is_bc: bool, out: &mut impl Write) -> Result<(), CliError> {
    let spec = args.spec.as_deref().map(ChannelSpec::load).transpose()?;
    let signatures = args.signatures.as_deref().map(spec::read_signature_file).transpose()?;
    let flags = ChannelFlags { powers: args.powers, noise: args.noise, total_power: args.total_power, signatures };
    let (channel, echo) = spec::resolve(is_bc, flags, spec)?;
    if args.criterion != CriterionArg::Nbs && args.disagreement.is_some() {
        return Err(CliError::Input("--disagreement applies to --criterion nbs only".into()));
    }
    let criterion_name = match args.criterion {
        CriterionArg::Symmetric => "symmetric",
        CriterionArg::Maxmin => "maxmin",
        CriterionArg::Pf => "pf",
        CriterionArg::Nbs => "nbs",
    };
    let ts = timestamp(args.no_timestamp);
    let doc = match channel {
        Channel::Mac(ch) => {
            let criterion = match args.criterion {
                CriterionArg::Symmetric => MacCriterion::Symmetric,
                // On a polymatroid the max-min point is also proportional fair.
                CriterionArg::Maxmin | CriterionArg::Pf => MacCriterion::MaxMinPf,
                CriterionArg::Nbs => match args.disagreement.as_deref() {
                    None | Some("canonical") => MacCriterion::Nbs(Disagreement::Canonical),
                    Some(text) => MacCriterion::Nbs(Disagreement::Point(parse_point(text)?)),
                },
            };
            let mode = match args.mode {
                ModeArg::Auto => ModeChoice::Auto,
                ModeArg::Exhaustive => ModeChoice::Exhaustive,
                ModeArg::Ordered => ModeChoice::Ordered,
            };
            let sol = mac::solve(&ch, &criterion, mode)?;
            ResultDocument::from_mac(echo, criterion_name, &sol, &ch.rank(), ts)
        }
        Channel::Bc(ch) => {
            if args.mode != ModeArg::Auto {
                log::warn!("--mode has no effect on broadcast channels");
            }
            let (alloc, d) = match args.criterion {
                // The max-min point of the BC region is its symmetric point.
                CriterionArg::Symmetric | CriterionArg::Maxmin => (bc::symmetric_allocate(&ch), None),
                CriterionArg::Pf => (bc::pf_allocate(&ch)?, None),
                CriterionArg::Nbs => {
                    let text = args.disagreement.as_deref().ok_or_else(|| {
                        CliError::Input("bc nbs needs an explicit --disagreement point".into())
                    })?;
                    if text == "canonical" {
                        return Err(CliError::Input("broadcast channels have no canonical disagreement point".into()));
                    }
                    let d = parse_point(text)?;
                    (bc::nbs_allocate(&ch, &d)?, Some(d))
                }
            };
            ResultDocument::from_bc(echo, criterion_name, d.as_deref(), &ch, &alloc, ts)
        }
    };
    match args.format {
        Format::Json => doc.write_json(out),
        Format::Csv => doc.write_csv(out),
    }
}

/// Runs a suite; `Ok(false)` means a property failed.
fn run_check(args: CheckArgs, out: &mut impl Write) -> Result<bool, CliError> {
    let report = check::run(args.suite, args.seed, args.trials, timestamp(args.no_timestamp))?;
    match args.format {
        Format::Json => report.write_json(out)?,
        Format::Csv => report.write_csv(out)?,
    }
    Ok(report.passed)
}

fn run_sweep(kind: SweepKind, out: &mut impl Write) -> Result<(), CliError> {
    match kind {
        SweepKind::BcEfficiency { noise, range } => {
            let values = sweep::grid(range.from, range.to, range.points, range.scale)?;
            sweep::bc_efficiency(&noise, &values, out)
        }
        SweepKind::MacSymmetric { powers, noise, user, range } => {
            if user == 0 {
                return Err(CliError::Input("--user is 1-based".into()));
            }
            let values = sweep::grid(range.from, range.to, range.points, range.scale)?;
            sweep::mac_symmetric(&powers, noise, user - 1, &values, out)
        }
    }
}

fn report(err: &CliError) -> ExitCode {
    let body = json!({ "error": { "kind": err.kind(), "message": err.to_string() } });
    eprintln!("{body}");
    ExitCode::from(err.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FAIRALLOC_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return report(&CliError::Input(e.to_string().trim_end().to_owned())),
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Solve { channel: SolveChannel::Mac(a) } => solve(a, false, &mut out),
        Command::Solve { channel: SolveChannel::Bc(a) } => solve(a, true, &mut out),
        Command::Sweep { kind } => run_sweep(kind, &mut out),
        Command::Check(a) => match run_check(a, &mut out) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
