use std::process::ExitCode;

use chowkit_cli::{describe, load_config, run, OutputFormat, RunConfig, RunOptions, Task, DEFAULT_FUZZ_CASES};
use clap::{Args, Parser, Subcommand};

/// Verify Chow–Künneth decompositions and Murre's conjectures on
/// combinatorial Chow ring data.
#[derive(Parser)]
#[command(name = "chowkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file, or inline config text such as
    /// "variety = projective_space(2); tasks = [verify-ck]".
    config: String,
    /// Output format; overrides `format` in the config.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the configured variety and print its basis and projectors.
    Describe(Common),
    /// Run the configured tasks.
    Run {
        #[command(flatten)]
        common: Common,
        /// Record wall-clock time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Fuzz composition against the oracle on the configured variety.
    Fuzz {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_FUZZ_CASES)]
        cases: usize,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        timing: bool,
    },
}

fn load(common: &Common) -> Result<(RunConfig, OutputFormat), ExitCode> {
    match load_config(&common.config) {
        Ok(cfg) => {
            let format = common.format.unwrap_or(cfg.output_format);
            Ok((cfg, format))
        }
        Err(e) => {
            eprintln!("error: {e}");
            Err(ExitCode::from(2))
        }
    }
}

fn verdict(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Describe(common) => load(&common).map(|(cfg, format)| {
            let d = describe(&cfg);
            print!("{}", d.render(format));
            verdict(d.error.is_none())
        }),
        Command::Run { common, timing } => load(&common).map(|(cfg, format)| {
            let report = run(&cfg, &RunOptions { timing, ..RunOptions::default() });
            print!("{}", report.render(format));
            verdict(report.passed())
        }),
        Command::Fuzz {
            common,
            cases,
            seed,
            timing,
        } => load(&common).map(|(mut cfg, format)| {
            cfg.tasks = vec![Task::OracleFuzz];
            cfg.seed = seed.unwrap_or(cfg.seed);
            let report = run(&cfg, &RunOptions { timing, fuzz_cases: cases });
            print!("{}", report.render(format));
            verdict(report.passed())
        }),
    };
    result.unwrap_or_else(|code| code)
}
