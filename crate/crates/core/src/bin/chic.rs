use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use chic::commands::{exit_code, load_config, run_command, Command};
use clap::Parser;

/// Spectral laboratory for the nonisothermal viscous Cahn-Hilliard system.
#[derive(Parser, Debug)]
#[command(name = "chic", version)]
struct Cli {
    /// One of simulate, equilibria, decompose, verify, fit-decay.
    #[arg(value_parser = ["simulate", "equilibria", "decompose", "verify", "fit-decay"])]
    command: String,
    /// Config file (INI-style text, or JSON when the extension is .json).
    #[arg(long)]
    config: PathBuf,
    /// `section.key=value`, applied in order after the file.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = cli
        .command
        .parse::<Command>()
        .and_then(|cmd| {
            let cfg = load_config(&cli.config, &cli.overrides, cli.seed, cli.out.as_deref())?;
            run_command(cmd, &cfg)
        });
    match outcome {
        Ok(out) => {
            // A closed pipe (e.g. `| head`) must not turn a finished run into a panic.
            let mut so = std::io::stdout().lock();
            for line in &out.lines {
                let _ = writeln!(so, "{line}");
            }
            for f in &out.files {
                let _ = writeln!(so, "wrote {}", f.display());
            }
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("chic: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
