use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use rigidlid::config::{parse_config, ResolvedConfig};
use rigidlid::convergence::{space_study, time_study};
use rigidlid::coupling::CoupledState;
use rigidlid::output::{convergence_table, write_convergence_csv, write_diagnostics_csv, write_field_csv, write_text};
use rigidlid::run::integrate;
use rigidlid::tableau::{tableau, NAMES};
use rigidlid::Error;

#[derive(Parser)]
#[command(name = "rigidlid", version, about = "Coupled two-domain compressible Navier-Stokes solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a case and write fields and diagnostics.
    Run {
        config: PathBuf,
        /// Override a config key, e.g. --set scheme.dt=0.01
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        set: Vec<String>,
    },
    /// Convergence study in space or time.
    Converge {
        config: PathBuf,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = Axis::Space)]
        axis: Axis,
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        set: Vec<String>,
    },
    /// Check every registered tableau against its order conditions.
    ValidateTableaus,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Space,
    Time,
}

fn load(path: &Path, set: &[String]) -> Result<(ResolvedConfig, String), Error> {
    let (cfg, text) = parse_config(path, set)?;
    let resolved = cfg.resolve()?;
    Ok((resolved, text))
}

fn echo_config(dir: &Path, text: &str, resolved: &ResolvedConfig) -> Result<(), Error> {
    write_text(&dir.join("config.input.toml"), text)?;
    let echo = resolved.to_run_config().to_toml_string()?;
    write_text(&dir.join("config.resolved.toml"), &echo)
}

fn write_snapshot(dir: &Path, step: usize, st: &CoupledState) -> Result<(), Error> {
    write_field_csv(&dir.join(format!("field_d1_{step:07}.csv")), &st.q1)?;
    if let Some(q2) = &st.q2 {
        write_field_csv(&dir.join(format!("field_d2_{step:07}.csv")), q2)?;
    }
    Ok(())
}

fn cmd_run(path: &Path, set: &[String]) -> Result<(), Error> {
    let (cfg, text) = load(path, set)?;
    let dir = cfg.output_dir.clone();
    echo_config(&dir, &text, &cfg)?;
    let tab = tableau(&cfg.coupling.scheme)?;
    let sys = cfg.case.system(cfg.grid, cfg.coupling.operator, cfg.coupling.krylov_tol, cfg.coupling.gmres())?;
    let init = cfg.case.init(cfg.grid)?;
    write_snapshot(&dir, 0, &init)?;
    info!("{} on {} to t = {}", cfg.method_name()?, cfg.case.name(), cfg.t_end);
    let every = cfg.snapshot_every;
    let out = integrate(&sys, init, &cfg.coupling, &tab, cfg.t_end, |k, st| {
        if every > 0 && k % every == 0 {
            write_snapshot(&dir, k, st)?;
        }
        Ok(())
    })?;
    if every == 0 || out.steps % every != 0 {
        write_snapshot(&dir, out.steps, &out.state)?;
    }
    write_diagnostics_csv(&dir.join("diagnostics.csv"), &out.rows)?;
    let last = out.rows.last().expect("initial row");
    println!(
        "{} {}: {} steps to t = {:.6e}, mass loss {:.3e}, energy loss {:.3e}, Cr = ({:.2}, {:.2}), max Krylov iterations {}",
        cfg.case.name(),
        cfg.method_name()?,
        out.steps,
        out.state.time,
        last.mass_loss,
        last.energy_loss,
        last.cr1,
        last.cr2,
        out.max_krylov_iterations
    );
    Ok(())
}

fn cmd_converge(path: &Path, levels: usize, axis: Axis, set: &[String]) -> Result<(), Error> {
    let (cfg, text) = load(path, set)?;
    echo_config(&cfg.output_dir, &text, &cfg)?;
    let rows = match axis {
        Axis::Space => space_study(&cfg, levels)?,
        Axis::Time => time_study(&cfg, levels)?,
    };
    write_convergence_csv(&cfg.output_dir.join("convergence.csv"), &rows)?;
    print!("{}", convergence_table(&rows));
    Ok(())
}

fn cmd_validate() -> Result<(), Error> {
    let mut failed = None;
    for name in NAMES {
        match tableau(name) {
            Ok(t) => println!("{:<5} ok  (stages {}, order {}, dense order {})", name, t.s, t.order, t.dense_order),
            Err(e) => {
                println!("{name:<5} FAILED: {e}");
                failed.get_or_insert(e);
            }
        }
    }
    failed.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run { config, set } => cmd_run(&config, &set),
        Command::Converge { config, levels, axis, set } => cmd_converge(&config, levels, axis, &set),
        Command::ValidateTableaus => cmd_validate(),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_solver_failure() {
                ExitCode::from(3)
            } else if matches!(e, Error::Config(_) | Error::Parameter(_)) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
