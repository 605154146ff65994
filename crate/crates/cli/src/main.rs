use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mplab_core::lab::{self, Command, Format, RunConfig};

/// Generalized principal eigenvalues and maximum-principle tests for
/// degenerate elliptic operators.
#[derive(Parser, Debug)]
#[command(name = "mplab", version)]
struct Cli {
    /// validate | eigen | mu1 | lambda-star | mp | certify | fichera | barrier | paper
    command: String,
    /// TOML config (JSON when the extension is .json); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json", value_parser = ["csv", "json"])]
    format: String,
    /// RNG seed, overriding `rng_seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn fail(e: &mplab_core::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(lab::error_exit_code(e) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command: Command = match cli.command.parse() {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let format: Format = cli.format.parse().expect("clap restricts the values");
    let mut cfg = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => return fail(&e),
        },
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.rng_seed = seed;
    }
    if let Some(dir) = cli.out {
        cfg.output.dir = dir;
    }
    let report = match lab::run(&cfg, command) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    print!("{}", report.render());
    match report.emit(format, &cfg.output.dir, &cfg.output.stem) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}
