//! `pcsamp`: sampling patterns, localization and minimax estimates for
//! piecewise constant signals described by a JSON scenario.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid scenario or
//! arguments, 3 inconsistent observations.

mod commands;
mod output;
mod scenario;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::VerifyOptions;
use output::{Format, Output, Style};
use pcsamp_core::rational::int;
use scenario::{load_scenario, Scenario};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn inconsistent(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pcsamp",
    version,
    about = "Sampling patterns, discontinuity localization and minimax estimates for piecewise constant signals"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,

    /// Print decimals with 12 significant digits instead of exact rationals.
    #[arg(long, global = true)]
    float: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ObservationArg {
    /// `all` for every achievable pattern, or a JSON file with a list of
    /// count vectors. Defaults to the scenario's own `observations`.
    #[arg(long, value_name = "all|FILE")]
    observations: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a scenario and list its regions.
    Validate { scenario: PathBuf },
    /// List every achievable sampling pattern with its offset interval.
    Patterns { scenario: PathBuf },
    /// Localize every discontinuity relative to a reference index.
    Infer {
        scenario: PathBuf,
        #[arg(long = "ref", value_name = "L")]
        reference: usize,
        #[command(flatten)]
        obs: ObservationArg,
    },
    /// Build the minimax estimate for one reference, or sweep all of them.
    Estimate {
        scenario: PathBuf,
        #[arg(
            long = "ref",
            value_name = "L",
            required_unless_present = "sweep",
            conflicts_with = "sweep"
        )]
        reference: Option<usize>,
        /// Closed-form energy for every reference index.
        #[arg(long)]
        sweep: bool,
        #[command(flatten)]
        obs: ObservationArg,
    },
    /// Same as `estimate --sweep`.
    SweepRef {
        scenario: PathBuf,
        #[command(flatten)]
        obs: ObservationArg,
    },
    /// Run the property suite against brute-force oracles.
    Verify {
        /// Optional scenario checked alongside the bundled ones.
        scenario: Option<PathBuf>,
        /// Oracle grid points per T.
        #[arg(long, default_value_t = 12)]
        grid: u32,
        /// Random specs in the consistency sweep.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, env = "PCSAMP_SEED", default_value_t = 7)]
        seed: u64,
        /// Offsets tested per spec in the count check.
        #[arg(long, default_value_t = 1000)]
        delta_grid: u32,
        /// Replace every midpoint cell by its left amplitude (mutation test).
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Built-in worked examples.
    Demo {
        #[arg(value_parser = ["example6"])]
        name: String,
    },
}

fn style_for(scenario: Option<&Scenario>, float: bool) -> Style {
    Style {
        float,
        t: scenario.map_or_else(|| int(1), |s| s.spec.grid_interval().clone()),
    }
}

fn run(cli: Cli) -> Result<(Output, bool), CliError> {
    let float = cli.float;
    let single = |out: Output| Ok((out, true));
    match cli.command {
        Command::Validate { scenario } => {
            let s = load_scenario(&scenario)?;
            single(commands::validate(&s, &style_for(Some(&s), float))?)
        }
        Command::Patterns { scenario } => {
            let s = load_scenario(&scenario)?;
            single(commands::patterns(&s, &style_for(Some(&s), float))?)
        }
        Command::Infer {
            scenario,
            reference,
            obs,
        } => {
            let s = load_scenario(&scenario)?;
            let style = style_for(Some(&s), float);
            single(commands::infer_cmd(
                &s,
                reference,
                obs.observations.as_deref(),
                &style,
            )?)
        }
        Command::Estimate {
            scenario,
            reference,
            sweep,
            obs,
        } => {
            let s = load_scenario(&scenario)?;
            let style = style_for(Some(&s), float);
            let choice = obs.observations.as_deref();
            match (sweep, reference) {
                (true, _) | (false, None) => single(commands::sweep(&s, choice, &style)?),
                (false, Some(l)) => single(commands::estimate(&s, l, choice, &style)?),
            }
        }
        Command::SweepRef { scenario, obs } => {
            let s = load_scenario(&scenario)?;
            let style = style_for(Some(&s), float);
            single(commands::sweep(&s, obs.observations.as_deref(), &style)?)
        }
        Command::Verify {
            scenario,
            grid,
            trials,
            seed,
            delta_grid,
            inject_fault,
        } => {
            let s = scenario.as_deref().map(load_scenario).transpose()?;
            let opts = VerifyOptions {
                grid,
                trials,
                seed,
                delta_grid,
                inject_fault,
            };
            commands::verify(s.as_ref(), &opts)
        }
        Command::Demo { .. } => single(commands::demo_example6()?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli) {
        Ok((out, passed)) => {
            let mut stdout = std::io::stdout().lock();
            // a closed pipe is not an error worth reporting
            let _ = stdout.write_all(out.render(format).as_bytes());
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("pcsamp: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
