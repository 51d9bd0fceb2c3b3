use clap::{Parser, Subcommand};
use oddwave::runner::{self, SweepAxis, SweepOptions, Termination};
use oddwave::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "oddwave", version, about = "Capillary-gravity waves with odd viscosity")]
struct Cli {
    /// Directory under which run and sweep directories are created.
    #[arg(long, global = true, env = "ODDWAVE_OUTPUT_ROOT", default_value = "runs")]
    output_root: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration.
    Run { config: PathBuf },
    /// Run a configuration over a parameter grid.
    Sweep {
        config: PathBuf,
        /// `name=v1,v2,...` with name one of epsilon, alpha_o, beta, mu, amplitude.
        #[arg(long = "axis")]
        axes: Vec<SweepAxis>,
        #[arg(long, env = "ODDWAVE_WORKERS", default_value_t = default_workers())]
        workers: usize,
        #[arg(long, default_value_t = SweepOptions::default().max_points)]
        max_points: usize,
    },
    /// Draw profile and derivative-norm plots for a run directory.
    Plot { run_dir: PathBuf },
    /// Compare the power-series solution with Runge-Kutta.
    CkCompare {
        config: PathBuf,
        #[arg(long, default_value_t = 12)]
        orders: usize,
        /// Comparison time; defaults to 0.05 of the existence time.
        #[arg(long)]
        time: Option<f64>,
    },
    /// Run the built-in invariant suite.
    Selftest,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 4,
        e if e.is_integration_failure() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn execute(cli: Cli) -> oddwave::Result<u8> {
    match cli.command {
        Command::Run { config } => {
            let config = runner::load_config(&config)?;
            let dir = cli.output_root.join(&config.run_id);
            let manifest = runner::run_simulation(&config, &dir)?;
            println!(
                "{}: {:?} at t = {} ({} steps, {:.2} s) -> {}",
                manifest.run_id,
                manifest.termination,
                manifest.final_time,
                manifest.accepted_steps,
                manifest.wall_time_s,
                dir.display()
            );
            if let Some(msg) = &manifest.message {
                eprintln!("{msg}");
            }
            Ok(if manifest.termination == Termination::Completed { 0 } else { 3 })
        }
        Command::Sweep {
            config,
            axes,
            workers,
            max_points,
        } => {
            let config = runner::load_config(&config)?;
            let dir = cli.output_root.join(&config.run_id);
            let index = runner::run_sweep(&config, &axes, &dir, &SweepOptions { workers, max_points })?;
            for p in &index.points {
                let params: Vec<String> = p.parameters.iter().map(|(n, v)| format!("{n}={v}")).collect();
                println!("{} [{}] {:?}{}", p.directory, params.join(" "), p.status, if p.resumed { " (resumed)" } else { "" });
            }
            let all_ok = index
                .points
                .iter()
                .all(|p| p.status == runner::sweep::PointStatus::Completed);
            Ok(if all_ok { 0 } else { 3 })
        }
        Command::Plot { run_dir } => {
            for path in runner::emit_plots(&run_dir)? {
                println!("{}", path.display());
            }
            Ok(0)
        }
        Command::CkCompare { config, orders, time } => {
            let config = runner::load_config(&config)?;
            let report = runner::ck_compare(&config, orders, time)?;
            println!("t = {:e} (existence time {:e}, {} quadrature intervals)", report.time, report.existence_time, report.mesh_intervals);
            println!("order  max|f - f_rk|  max|f_t - f_t,rk|");
            for d in &report.distances {
                println!("{:5}  {:13.3e}  {:17.3e}", d.order, d.f, d.f_t);
            }
            println!(
                "majorant ledger: {} (worst B/C t^l = {:.3e})",
                if report.ledger_holds { "holds" } else { "VIOLATED" },
                report.worst_majorant_ratio
            );
            Ok(if report.ledger_holds { 0 } else { 3 })
        }
        Command::Selftest => {
            let checks = runner::selftest::selftest()?;
            let mut ok = true;
            for c in &checks {
                ok &= c.passed;
                println!(
                    "{} {} ({:.3e} < {:.0e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance
                );
            }
            Ok(if ok { 0 } else { 3 })
        }
    }
}
