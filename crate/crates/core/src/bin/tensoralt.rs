use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tensoralt::cli::{self, Format, Options};

#[derive(Parser)]
#[command(name = "tensoralt", version, about = "Alternative theorems and exact SOS relaxations for even-degree polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report which polynomials have the essentially-nonpositive coefficient pattern
    Classify(Common),
    /// Decide whether the objective is a sum of squares
    Sos(Common),
    /// Run the alternative theorem on the objective and constraint forms
    Alt(Common),
    /// Solve the exact SOS relaxation and validate it against the oracle
    Solve(Common),
    /// Run the local multi-start oracle only
    Oracle(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    /// Problem file (text, or JSON with a .json extension)
    file: PathBuf,
    /// Decision tolerance (SDP tolerance for `solve`)
    #[arg(long)]
    tol: Option<f64>,
    /// Interior-point iteration limit
    #[arg(long)]
    max_iter: Option<usize>,
    /// Random starts for the witness search and the oracle
    #[arg(long, default_value_t = 64)]
    starts: usize,
    /// RNG seed; TENSORALT_SEED takes precedence
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Grid spacing for the oracle's initial scan (n <= 3)
    #[arg(long)]
    grid: Option<f64>,
    /// Write the assembled SDP to this file
    #[arg(long)]
    dump_sdp: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { cli::EXIT_PARSE as u8 } else { 0 });
        }
    };
    let (name, common) = match parsed.command {
        Command::Classify(c) => ("classify", c),
        Command::Sos(c) => ("sos", c),
        Command::Alt(c) => ("alt", c),
        Command::Solve(c) => ("solve", c),
        Command::Oracle(c) => ("oracle", c),
    };
    let opts = Options {
        tol: common.tol,
        max_iter: common.max_iter,
        starts: common.starts,
        seed: cli::effective_seed(common.seed),
        grid: common.grid,
        dump_sdp: common.dump_sdp,
    };
    let format = match common.format {
        OutputFormat::Text => Format::Text,
        OutputFormat::Json => Format::Json,
    };
    let outcome = cli::run(name, &common.file, &opts);
    print!("{}", outcome.render(format));
    ExitCode::from(outcome.exit_code as u8)
}
