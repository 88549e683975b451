use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use wigner_kg_cli::config::Format;
use wigner_kg_cli::{run, CliError, Command, RunConfig};

#[derive(Parser)]
#[command(
    name = "wigner-kg",
    version,
    about = "Phase-space and field solvers for the variable-mass Klein-Gordon equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for the solvers.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format (overrides `output.formats`).
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Transform the initial field and write its phase-space densities.
    Wigner,
    /// Evolve the phase-space densities.
    EvolveWigner,
    /// Evolve the field equation; snapshots are transformed for output.
    EvolveKg,
    /// Advect the forward/backward action densities.
    EvolveSwl,
    /// Run field and phase-space solvers side by side and record their difference.
    Compare,
    /// Write the closed-form two-plane-wave densities.
    CaseTwoWave,
}

#[derive(ValueEnum, Clone, Copy)]
enum FormatArg {
    Csv,
    Bin,
    Both,
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::config("--config", "a configuration file is required"))?;
    let cfg = RunConfig::load(path)?;
    let out = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let formats = match cli.format {
        Some(FormatArg::Csv) => vec![Format::Csv],
        Some(FormatArg::Bin) => vec![Format::Bin],
        Some(FormatArg::Both) => vec![Format::Csv, Format::Bin],
        None => cfg.output.formats.clone(),
    };
    let command = match cli.command {
        Cmd::Wigner => Command::Wigner,
        Cmd::EvolveWigner => Command::EvolveWigner,
        Cmd::EvolveKg => Command::EvolveKg,
        Cmd::EvolveSwl => Command::EvolveSwl,
        Cmd::Compare => Command::Compare,
        Cmd::CaseTwoWave => Command::CaseTwoWave,
    };
    let threads = match cli.threads {
        Some(0) => return Err(CliError::config("--threads", "must be at least 1")),
        Some(n) => n,
        None => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config("--threads", e.to_string()))?;
    let summary = pool.install(|| run(&cfg, command, &out, &formats))?;
    eprintln!(
        "wrote {} files ({} snapshots{}) to {}",
        summary.files.len(),
        summary.snapshots,
        summary.dt.map(|d| format!(", dt = {d}")).unwrap_or_default(),
        out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
