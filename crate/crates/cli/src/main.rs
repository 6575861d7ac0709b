use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qcc_cli::{Command, Format, Invocation, EXIT_INVALID};

#[derive(Parser, Debug)]
#[command(name = "qcc", version)]
#[command(about = "Exponent tables, diagrams, sharpness witnesses and the acceptance suite")]
struct Args {
    /// Command to run. Optional with --spec, which names its own command.
    command: Option<Command>,

    /// JSON run spec
    #[arg(long)]
    spec: Option<PathBuf>,

    /// Output file; stdout if omitted
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Seed for the stochastic estimators
    #[arg(long)]
    seed: Option<u64>,

    /// Relative tolerance for quadrature comparisons
    #[arg(long)]
    tolerance: Option<f64>,
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("QCC_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("QCC_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("qcc: {e}");
        return ExitCode::from(EXIT_INVALID);
    }
    let inv = Invocation {
        command: args.command,
        spec: args.spec,
        out: args.out,
        format: args.format,
        seed: args.seed,
        tolerance: args.tolerance,
    };
    match qcc_cli::run(&inv) {
        Ok(status) => ExitCode::from(status.exit_code()),
        Err(e) => {
            eprintln!("qcc: {e}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
