//! `solk`: axiom checks, K-theory reports, Perron data, states, Smale-space
//! checks and brute-force oracles for one-dimensional solenoid presentations.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{OracleParams, OracleSubject, Outcome};
use config::{parse_precision, Failure, Output, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "solk",
    version,
    about = "K-theory of one-dimensional generalized solenoids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Enclosure width for eigen-data, e.g. 1e-30, 0.001 or 1/1000.
    #[arg(long, global = true, env = "SOLK_PRECISION", default_value = "1e-30")]
    precision: String,
    /// Smale sequence depth; stable filtration length for `ktheory`; tree depth for `oracle bracket`.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Seed for all sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Iteration bound: nonfolding scan for check/ktheory/smale, positivity search for state/oracle.
    #[arg(long, global = true)]
    bound: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the axioms; exit 2 when one fails. A directory runs every `.sol` file in it.
    Check { file: PathBuf },
    /// Full K-theory report. A directory runs every `.sol` file in it.
    Ktheory { file: PathBuf },
    /// Certified Perron eigenvalue and eigenvectors.
    Perron { file: PathBuf },
    /// State of the dimension-group element `(vector, stage)`.
    State {
        file: PathBuf,
        /// Integer vector such as `1,0`.
        #[arg(allow_hyphen_values = true)]
        element: String,
        #[arg(long, default_value_t = 0)]
        stage: usize,
    },
    /// Sampled bracket, shift and contraction identities.
    Smale {
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Independent brute-force cross-check of one main-path computation.
    Oracle {
        #[arg(value_enum)]
        subject: OracleSubject,
        /// Presentation file, or an inline matrix such as `[[2,1],[1,1]]`.
        target: Option<String>,
        /// Number of random cases (snf 100, positivity 1000, bracket 50).
        #[arg(long)]
        count: Option<usize>,
        /// Largest random matrix size for snf.
        #[arg(long, default_value_t = 3)]
        size: usize,
        /// Random entries are drawn from `[-entries, entries]`.
        #[arg(long, default_value_t = 9)]
        entries: i64,
    },
}

fn resolve(global: &GlobalArgs, command: &Command) -> Result<RunConfig, Failure> {
    let mut config = RunConfig {
        precision: parse_precision(&global.precision)?,
        output: if global.json {
            Output::Json
        } else {
            Output::Text
        },
        seed: global.seed,
        ..RunConfig::default()
    };
    if let Some(b) = global.bound {
        match command {
            Command::State { .. } | Command::Oracle { .. } => config.positivity_bound = b,
            _ => config.nonfolding_bound = b,
        }
    }
    if let (Some(d), Command::Smale { .. }) = (global.depth, command) {
        config.smale_depth = d;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let config = resolve(&cli.global, &cli.command)?;
    match &cli.command {
        Command::Check { file } => commands::cmd_check(file, &config),
        Command::Ktheory { file } => commands::cmd_ktheory(file, &config, cli.global.depth),
        Command::Perron { file } => commands::cmd_perron(file, &config),
        Command::State {
            file,
            element,
            stage,
        } => commands::cmd_state(file, element, *stage, &config),
        Command::Smale { file, samples } => commands::cmd_smale(file, &config, *samples),
        Command::Oracle {
            subject,
            target,
            count,
            size,
            entries,
        } => {
            let params = OracleParams {
                target: target.clone(),
                count: *count,
                size: *size,
                entries: *entries,
                depth: cli.global.depth,
            };
            commands::cmd_oracle(*subject, &params, &config)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            let _ = std::io::stdout().flush();
            for line in &out.stderr {
                eprintln!("solk: {line}");
            }
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("solk: {f}");
            ExitCode::from(f.code())
        }
    }
}
