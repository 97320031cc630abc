//! `qumech` command line: run coherence sweeps and derive circuit couplings.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qumech::sweep::{
    self, load_circuit, load_scenario, preset, run_scenario, Backend, ScenarioConfig, SweepResult,
    PRESET_NAMES,
};

#[derive(Parser)]
#[command(name = "qumech", version, about = "Qubit-mechanical coherence simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write peak/trajectory data files.
    Simulate(SimulateArgs),
    /// Derive coupling rates from circuit constants.
    Derive(DeriveArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Sweep scenario file (TOML). May be combined with --preset to override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named scenario preset (fig2a .. figA2).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "qumech-out")]
    out: PathBuf,
    /// Trajectory file format; peaks are always JSON.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Override the evolution backend.
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Worker count (defaults to QUMECH_WORKERS, then all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Override the evolution horizon ω_m t_max.
    #[arg(long)]
    tmax: Option<f64>,
    /// Override the number of stored samples.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct DeriveArgs {
    /// Circuit constants file (TOML, SI-suffixed keys).
    #[arg(long)]
    config: PathBuf,
    /// Write the report as JSON instead of printing a table.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Unitary,
    Lindblad,
}

fn build_scenario(args: &SimulateArgs) -> Result<ScenarioConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (None, None) => bail!("one of --config or --preset is required"),
        (Some(path), None) => load_scenario(path)?,
        (None, Some(name)) => preset(name)
            .with_context(|| format!("known presets: {}", PRESET_NAMES.join(", ")))?,
        (Some(path), Some(name)) => bail!(
            "--config and --preset are mutually exclusive; run `--preset {name}` alone \
             or edit a copy of the scenario file {}",
            path.display()
        ),
    };
    if let Some(backend) = args.backend {
        cfg.backend = match backend {
            BackendArg::Unitary => Backend::Unitary,
            BackendArg::Lindblad => Backend::Lindblad,
        };
    }
    if let Some(tmax) = args.tmax {
        cfg.horizon = tmax;
    }
    if let Some(samples) = args.samples {
        cfg.samples = samples;
    }
    Ok(cfg)
}

fn print_summary(result: &SweepResult) {
    println!(
        "{:>14}  {:>12} {:>10}  {:>12} {:>10}  status",
        "axis value", "cq_max", "cq_time", "cm_max", "cm_time"
    );
    for p in &result.points {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
        println!(
            "{:>14.6}  {:>12} {:>10}  {:>12} {:>10}  {}",
            p.axis_value,
            fmt(p.cq_max),
            fmt(p.cq_time),
            fmt(p.cm_max),
            fmt(p.cm_time),
            p.status
        );
    }
}

fn simulate(args: &SimulateArgs) -> Result<u8> {
    let cfg = build_scenario(args)?;
    if args.workers.map_or(false, |w| w > 1) && !cfg!(feature = "parallel") {
        eprintln!("note: built without the `parallel` feature; running sequentially");
    }
    let result = run_scenario(&cfg, args.workers)?;
    print_summary(&result);
    let written = result.write_outputs(&args.out, matches!(args.format, FormatArg::Json))?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(if result.any_failures() { 2 } else { 0 })
}

fn derive(args: &DeriveArgs) -> Result<u8> {
    let circuit = load_circuit(&args.config)?;
    let report = sweep::derive_report(&circuit).map_err(anyhow::Error::msg)?;
    let c = &report.couplings;
    println!("{:<10} {:>16}  unit", "quantity", "value");
    println!("{:<10} {:>16.9e}  rad/s", "g0", c.g0);
    println!("{:<10} {:>16.9}  rad", "theta0", c.theta0);
    println!("{:<10} {:>16.9}  rad", "theta", c.theta);
    println!("{:<10} {:>16.9e}  rad/s", "g_x", c.g_x);
    println!("{:<10} {:>16.9e}  rad/s", "g_z", c.g_z);
    println!("{:<10} {:>16.9e}  rad/s", "g_m", c.g_m);
    println!("{:<10} {:>16.9e}  rad/s", "omega_q", c.omega_q);
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report)?;
        std::fs::write(path, json.as_bytes())
            .with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Derive(args) => derive(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
