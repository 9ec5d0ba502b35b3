use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qsl_core::cli::{
    cmd_direct, cmd_isofamily, cmd_reconstruct, cmd_roundtrip, cmd_spectrum, ExperimentConfig,
    ResultBundle,
};
use qsl_core::QslError;

/// Direct and inverse spectral problems on the geometric lattice.
#[derive(Parser)]
#[command(name = "qsl", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues and norming constants of the configured problem
    Spectrum(RunArgs),
    /// Initial-value solutions at the configured lambda values
    Direct(RunArgs),
    /// Gelfand-Levitan reconstruction from coefficients or target data
    Reconstruct(RunArgs),
    /// Uniqueness round-trip and monotone-norming reports
    Roundtrip(RunArgs),
    /// Isospectral family sweep over a coefficient grid
    Isofamily(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// experiment config (JSON)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// also write the JSON bundle to this path
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// write the command's table as CSV next to --out
    #[arg(long, requires = "out")]
    csv: bool,
    /// override tolerances.seed from the config
    #[arg(long, value_name = "TOL")]
    seed_tolerance: Option<f64>,
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qsl: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run() -> Result<(), QslError> {
    if let Ok(threads) = std::env::var("QSL_THREADS") {
        let count: usize = threads.parse().map_err(|_| QslError::Config {
            reason: format!("QSL_THREADS must be a positive integer, got {threads:?}"),
        })?;
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build_global();
    }

    let cli = Cli::parse();
    let (args, runner): (&RunArgs, fn(&ExperimentConfig) -> qsl_core::Result<ResultBundle>) =
        match &cli.command {
            Command::Spectrum(a) => (a, cmd_spectrum),
            Command::Direct(a) => (a, cmd_direct),
            Command::Reconstruct(a) => (a, cmd_reconstruct),
            Command::Roundtrip(a) => (a, cmd_roundtrip),
            Command::Isofamily(a) => (a, cmd_isofamily),
        };

    let text = std::fs::read_to_string(&args.config).map_err(|e| QslError::Config {
        reason: format!("{}: {e}", args.config.display()),
    })?;
    let mut config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| QslError::Config {
            reason: e.to_string(),
        })?;
    if let Some(tol) = args.seed_tolerance {
        config.tolerances.seed = tol;
    }

    let bundle = runner(&config)?;
    let rendered = bundle.json.render();
    // Tolerate a closed stdout (for example `qsl ... | head`).
    let _ = writeln!(std::io::stdout(), "{rendered}");

    if let Some(out) = &args.out {
        let mut with_newline = rendered;
        with_newline.push('\n');
        std::fs::write(out, with_newline).map_err(|e| QslError::Config {
            reason: format!("{}: {e}", out.display()),
        })?;
        if args.csv {
            let csv_path = out.with_extension("csv");
            let csv = bundle.csv.unwrap_or_default();
            std::fs::write(&csv_path, csv).map_err(|e| QslError::Config {
                reason: format!("{}: {e}", csv_path.display()),
            })?;
        }
    }
    Ok(())
}
