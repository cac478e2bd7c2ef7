//! Command-line front end: run scenarios, export presets, validate
//! configuration files and run the invariant suites.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hydrosem::scenario::{
    export_preset, load_config, preset, run_scenario, FormulationChoice, RunOptions, RunReport, ScenarioConfig,
};
use hydrosem::{verify, Error};

#[derive(Parser)]
#[command(name = "hydrosem", version, about = "Spectral-element simulator for a stratified free-surface ocean")]
struct Cli {
    /// Caps the worker pool used by assembly and the solvers.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs a scenario file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Runs a built-in scenario, or prints it with `--export`.
    Preset {
        name: String,
        /// Print the scenario as a configuration file instead of running it.
        #[arg(long)]
        export: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Checks a scenario file and reports every problem found.
    Validate { config: PathBuf },
    /// Runs the invariant suites on small meshes.
    Verify,
}

#[derive(Args)]
struct Overrides {
    /// Time step in seconds (default: the stable step of the mesh).
    #[arg(long)]
    dt: Option<f64>,
    /// Number of steps (default: enough to cover the scenario duration).
    #[arg(long)]
    steps: Option<usize>,
    /// Output directory (default: runs/<scenario name>).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Seed of the noise source.
    #[arg(long)]
    seed: Option<u64>,
    /// velocity, potential or both.
    #[arg(long, value_parser = parse_formulation)]
    formulation: Option<FormulationChoice>,
}

fn parse_formulation(s: &str) -> Result<FormulationChoice, String> {
    FormulationChoice::parse(s).ok_or_else(|| format!("unknown formulation {s:?} (velocity, potential, both)"))
}

const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_DIVERGENCE: u8 = 3;
const EXIT_IO: u8 = 4;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Divergence { .. } | Error::Numeric(_) => EXIT_DIVERGENCE,
        Error::Io { .. } => EXIT_IO,
        Error::Config(_)
        | Error::Precondition(_)
        | Error::UnstableStratification { .. }
        | Error::OutOfRange(_)
        | Error::Parse { .. } => EXIT_CONFIG,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let result = match cli.command {
        Command::Run { config, overrides } => load_config(&config).and_then(|cfg| run(cfg, &overrides)),
        Command::Preset { name, export: true, .. } => export_preset(&name).map(|text| print!("{text}")),
        Command::Preset { name, overrides, .. } => preset(&name).and_then(|cfg| run(cfg, &overrides)),
        Command::Validate { config } => validate(&config),
        Command::Verify => return run_verify(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(mut cfg: ScenarioConfig, o: &Overrides) -> Result<(), Error> {
    if let Some(dt) = o.dt {
        cfg.run.dt = Some(dt);
    }
    if let Some(seed) = o.seed {
        cfg.run.seed = seed;
    }
    if let Some(f) = o.formulation {
        cfg.run.formulation = f;
    }
    let out_dir = o.out_dir.clone().unwrap_or_else(|| Path::new("runs").join(&cfg.name));
    eprintln!("running {} into {}", cfg.name, out_dir.display());
    let report = run_scenario(&cfg, &RunOptions { out_dir: Some(out_dir), steps: o.steps })?;
    summarize(&report);
    Ok(())
}

fn summarize(report: &RunReport) {
    println!(
        "{}: {} nodes, dt = {:.4e} s, {} steps",
        report.config.name,
        report.mesh.num_nodes(),
        report.dt,
        report.steps
    );
    for r in &report.runs {
        println!(
            "  {:<9} {} DoFs, assembly {:.2} s, time loop {:.2} s",
            r.formulation.name(),
            r.dofs,
            r.assembly_seconds,
            r.loop_seconds
        );
        for (id, m) in &r.bandwidths {
            match m.value() {
                Some(df) => println!("    {id}: measured bandwidth {df:.3} Hz"),
                None => println!("    {id}: bandwidth not measured"),
            }
        }
    }
    for c in &report.comparison {
        println!("  x = {} m: max |Δη| = {:.3e} m ({:.2e} of peak)", c.x, c.max_abs_diff, c.relative);
    }
}

fn validate(path: &Path) -> Result<(), Error> {
    let cfg = load_config(path)?;
    println!(
        "{}: valid ({} × {} elements, orders {}/{}, {} formulation, T = {} s)",
        cfg.name,
        cfg.discretization.nx,
        cfg.discretization.nz,
        cfg.discretization.px,
        cfg.discretization.pz,
        cfg.run.formulation.name(),
        cfg.run.t_end
    );
    Ok(())
}

fn run_verify() -> ExitCode {
    let start = std::time::Instant::now();
    let outcomes = verify::run_all(|o| {
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("{status} {:<32} {:>7.2} s  {}", o.name, o.seconds, o.detail);
    });
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "{} of {} checks passed in {:.1} s",
        outcomes.len() - failed,
        outcomes.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED_CHECK)
    }
}
