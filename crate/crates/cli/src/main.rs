//! `mzsim`: batch runner for the which-way interferometer simulator.
//!
//! Exit codes: 0 on success, 2 for configuration problems, 3 for numeric
//! or engine failures.

mod config;
mod runner;
mod svg;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentSpec, parse_config};
use runner::RunSettings;

#[derive(Parser)]
#[command(name = "mzsim", version, about = "Which-way Mach-Zehnder interferometer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the *.config.json experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = automatic); MZSIM_THREADS is honored as well.
    #[arg(long)]
    threads: Option<usize>,
    /// Comma-separated output formats: csv,json,svg.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a configuration, then exit.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the experiment named in the configuration.
    Run(CommonArgs),
    /// Run a sweep experiment (a measurement-rate grid must be configured).
    Sweep(CommonArgs),
    /// Run the frequency-alignment loop (kind = "align").
    Align(CommonArgs),
    /// Run the monitored-qubit trajectory demo (kind = "sme_demo").
    DemoSme(CommonArgs),
}

const EXIT_CONFIG: u8 = 2;
const EXIT_ENGINE: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Engine(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ENGINE)
        }
    }
}

enum Failure {
    Config(String),
    Engine(String),
}

fn load(path: &PathBuf) -> Result<config::ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("reading {path:?}: {e}")))?;
    parse_config(&text).map_err(|e| Failure::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = load(&config)?;
            println!(
                "ok: {} experiment, seed {}, config sha256 {}",
                experiment_name(&cfg.experiment),
                cfg.seed,
                runner::config_hash(&cfg)
            );
            Ok(())
        }
        Command::Run(args) => execute(args, None),
        Command::Sweep(args) => execute(args, Some(Gate::Sweep)),
        Command::Align(args) => execute(args, Some(Gate::Align)),
        Command::DemoSme(args) => execute(args, Some(Gate::DemoSme)),
    }
}

enum Gate {
    Sweep,
    Align,
    DemoSme,
}

fn experiment_name(spec: &ExperimentSpec) -> &'static str {
    match spec {
        ExperimentSpec::Mz4 { .. } => "mz4",
        ExperimentSpec::Mz4Tomo { .. } => "mz4_tomo",
        ExperimentSpec::Mz12 { .. } => "mz12",
        ExperimentSpec::ZenoSweep { .. } => "zeno_sweep",
        ExperimentSpec::Align { .. } => "align",
        ExperimentSpec::SmeDemo { .. } => "sme_demo",
        ExperimentSpec::Custom { .. } => "custom",
    }
}

fn execute(args: CommonArgs, gate: Option<Gate>) -> Result<(), Failure> {
    let cfg = load(&args.config)?;
    if let Some(gate) = gate {
        let ok = match (&gate, &cfg.experiment) {
            (Gate::Sweep, ExperimentSpec::ZenoSweep { .. }) => true,
            (Gate::Sweep, ExperimentSpec::Mz4Tomo { .. }) => true,
            (Gate::Sweep, ExperimentSpec::Mz4 { gamma_sweep_hz, .. }) => !gamma_sweep_hz.is_empty(),
            (Gate::Sweep, ExperimentSpec::Mz12 { gamma_sweep_hz, .. }) => {
                !gamma_sweep_hz.is_empty()
            }
            (Gate::Align, ExperimentSpec::Align { .. }) => true,
            (Gate::DemoSme, ExperimentSpec::SmeDemo { .. }) => true,
            _ => false,
        };
        if !ok {
            let need = match gate {
                Gate::Sweep => "a sweep grid (zeno_sweep, mz4_tomo, or a gamma_sweep_hz list)",
                Gate::Align => "kind = \"align\"",
                Gate::DemoSme => "kind = \"sme_demo\"",
            };
            return Err(Failure::Config(format!(
                "the '{}' experiment does not fit this subcommand; it needs {need}",
                experiment_name(&cfg.experiment)
            )));
        }
    }

    let settings = RunSettings::from_config(
        cfg,
        args.seed,
        args.out.as_deref(),
        args.format.as_deref(),
        args.threads,
    )
    .map_err(|e| Failure::Config(e.to_string()))?;
    let files =
        runner::execute(&settings).map_err(|e| Failure::Engine(format!("{e:#}")))?;
    println!(
        "wrote {} files to {}",
        files.len(),
        settings.out_dir.display()
    );
    for f in files {
        println!("  {f}");
    }
    Ok(())
}
