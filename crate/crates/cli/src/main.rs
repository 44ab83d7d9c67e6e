use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use riis_core::bench::{convergence_study, output, run_simulation, SimConfig};
use riis_core::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Annulus,
    Channel,
}

/// Runs the contracting-annulus or closed-channel valve benchmark and
/// writes diagnostics, timings and VTK snapshots.
#[derive(Debug, Parser)]
#[command(name = "riis-bench", version)]
struct Args {
    /// TOML run configuration; without it the `--preset` scenario is used.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Built-in scenario used when no `--config` is given.
    #[arg(long, value_enum, default_value = "annulus")]
    preset: Preset,

    /// Directory for diagnostics, timings, snapshots and the manifest.
    #[arg(long, value_name = "PATH")]
    output_dir: Option<PathBuf>,

    /// Disable the valve attachment load on the solid.
    #[arg(long)]
    no_attachment_force: bool,

    /// Time step [s].
    #[arg(long, value_name = "SECONDS")]
    dt: Option<f64>,

    /// Final time [s].
    #[arg(long, value_name = "SECONDS")]
    final_time: Option<f64>,

    /// Repeat the run for every time step in `convergence_dts`.
    #[arg(long)]
    convergence_study: bool,

    /// Write VTK snapshots every N steps; 0 disables them.
    #[arg(long, value_name = "N")]
    snapshot_every: Option<usize>,

    /// Print the effective configuration as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e.category() {
        "config" => 2,
        "mesh" => 3,
        "geometry" => 4,
        "valve" => 5,
        "solver" => 6,
        "io" => 7,
        _ => 1,
    }
}

fn effective_config(args: &Args) -> Result<SimConfig, Error> {
    let mut config = match &args.config {
        Some(path) => SimConfig::load(path)?,
        None => match args.preset {
            Preset::Annulus => SimConfig::annulus_benchmark(),
            Preset::Channel => SimConfig::channel_benchmark(),
        },
    };
    if let Some(dir) = &args.output_dir {
        config.output.directory = dir.clone();
    }
    if args.no_attachment_force {
        config.attachment_force = false;
    }
    if let Some(dt) = args.dt {
        config.dt = dt;
    }
    if let Some(t) = args.final_time {
        config.final_time = t;
    }
    if let Some(n) = args.snapshot_every {
        config.output.snapshot_every = n;
    }
    config.validate()?;
    Ok(config)
}

fn run(args: &Args) -> Result<(), Error> {
    let config = effective_config(args)?;
    if args.print_config {
        print!("{}", config.to_toml()?);
        return Ok(());
    }
    if args.convergence_study {
        let study = convergence_study(&config, &config.convergence_dts, true)?;
        println!("dt,com_drift");
        for (dt, drift) in study.dts.iter().zip(&study.drifts) {
            println!("{dt:e},{drift:e}");
        }
        println!("order {:.3}", study.order);
        return Ok(());
    }

    let traj = run_simulation(&config)?;
    output::write_outputs(&traj, &config)?;
    let totals = traj.total_timings();
    println!("output: {}", config.output.directory.display());
    println!("steps: {}/{}", traj.timings.len(), config.steps());
    if let Some(drift) = traj.com_drift() {
        println!("center-of-mass drift: {drift:e} m");
    }
    let total = totals.total.as_secs_f64();
    if total > 0.0 {
        println!(
            "wall time: {total:.2} s (valve forces {:.1}%)",
            100.0 * totals.compute_g.as_secs_f64() / total
        );
    }
    match traj.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            ExitCode::from(exit_code(&e))
        }
    }
}
