use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracg_cli::error::exit;
use fracg_cli::{run, CliError, Mode, RunConfig};

/// Output directory used when neither `--out` nor the config names one.
const OUT_ENV: &str = "FRACG_OUT";
const DEFAULT_OUT: &str = "fracg-out";

#[derive(Parser)]
#[command(
    name = "fracg",
    version,
    about = "Solve fractional G-Laplacian Dirichlet problems and check a priori estimates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solve and oracle stages.
    Solve(RunArgs),
    /// Run the verify stages, solving first when needed.
    Verify(RunArgs),
    /// Run the sweep stages, solving first when needed.
    Sweep(RunArgs),
    /// Run every stage in order.
    Run(RunArgs),
    /// Print the configuration JSON schema.
    Schema,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's `output_dir`, then $FRACG_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and pair sums.
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides the solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

fn load(args: &RunArgs) -> Result<(RunConfig, PathBuf), CliError> {
    let text =
        std::fs::read_to_string(&args.config).map_err(|e| CliError::io(format!("{}: {e}", args.config.display())))?;
    let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::schema(e.to_string()))?;
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    if let Some(tol) = args.tol {
        cfg.tolerances.insert("solve".into(), tol);
    }
    cfg.validate()?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    Ok((cfg, out))
}

fn execute(args: &RunArgs, mode: Mode) -> i32 {
    if let Some(jobs) = args.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("fracg: {e}");
            return exit::SCHEMA;
        }
    }
    let (cfg, out) = match load(args) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("fracg: {e}");
            return e.exit_code();
        }
    };
    let summary = run(&cfg, mode, &out);
    for line in &summary.lines {
        println!("{line}");
    }
    summary.exit
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Solve(a) => execute(a, Mode::Solve),
        Command::Verify(a) => execute(a, Mode::Verify),
        Command::Sweep(a) => execute(a, Mode::Sweep),
        Command::Run(a) => execute(a, Mode::Run),
        Command::Schema => {
            println!("{}", serde_json::to_string_pretty(&fracg_cli::schema::schema()).expect("schema serializes"));
            exit::OK
        }
    };
    ExitCode::from(code as u8)
}
