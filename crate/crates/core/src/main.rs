use clap::{Parser, Subcommand};
use natom::analytic::compare_analytic_numeric;
use natom::config::RunConfig;
use natom::dynamics::{evolve, residual, steady_state_evolve, steady_state_linear};
use natom::observables::{dressed_basis, dressed_basis_numeric};
use natom::output::{
    compare_table, dressed_table, evolve_table, steady_table, sweep_gnuplot_matrix, sweep_table,
    Table,
};
use natom::sweep::{Axis, SweepSpec};
use natom::{Error, SystemParams};
use std::path::PathBuf;

/// Four-level N-type atom simulator: master-equation dynamics, steady
/// states, and entanglement analysis. All rates in units of gamma.
#[derive(Parser)]
#[command(name = "natom", version, about)]
struct Cli {
    /// Flat key-value config file (keys = RunConfig field names)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output path (default: config `out`, else stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// Worker threads for sweeps (default: available parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Reserved; all computation is currently deterministic
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the master equation and tabulate the trajectory
    Evolve,
    /// Solve for the steady state (linear route, integration fallback)
    Steady,
    /// Steady-state DEM map over an (omega, delta) grid
    Sweep,
    /// Report the dressed basis for a symmetric drive
    Dressed {
        /// Omega31 = Omega32 (default: rabi_31 from config)
        omega3: Option<f64>,
        /// Omega41 (default: rabi_41 from config)
        omega41: Option<f64>,
    },
    /// Closed-form vs numeric steady-state DEM over the omega axis
    Compare,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> natom::Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::parse(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    if let Some(fmt) = &cli.format {
        cfg.format = fmt.parse()?;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.display().to_string());
    }
    if let Some(n) = cli.threads {
        configure_threads(n)?;
    }

    match cli.command {
        Command::Evolve => cmd_evolve(&cfg),
        Command::Steady => cmd_steady(&cfg),
        Command::Sweep => cmd_sweep(&cfg),
        Command::Dressed { omega3, omega41 } => cmd_dressed(&cfg, omega3, omega41),
        Command::Compare => cmd_compare(&cfg),
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(n: usize) -> natom::Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidConfig(format!("cannot size thread pool: {e}")))
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_n: usize) -> natom::Result<()> {
    Ok(())
}

fn emit(cfg: &RunConfig, table: &Table) -> natom::Result<()> {
    let text = table.render(cfg.format);
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_evolve(cfg: &RunConfig) -> natom::Result<()> {
    let params = cfg.system_params();
    let rho0 = cfg.initial_state.density_matrix()?;
    let traj = evolve(&params, &rho0, &cfg.integrator_config()?)?;
    emit(cfg, &evolve_table(cfg, &traj)?)
}

fn cmd_steady(cfg: &RunConfig) -> natom::Result<()> {
    let params = cfg.system_params();
    let (rho, route) = match steady_state_linear(&params) {
        Ok(rho) => (rho, "linear"),
        Err(Error::DegenerateSteadyState { .. }) => {
            let rho0 = cfg.initial_state.density_matrix()?;
            (steady_state_evolve(&params, &rho0, cfg.steady_tol)?, "evolve")
        }
        Err(e) => return Err(e),
    };
    let r = residual(&params, &rho);
    emit(cfg, &steady_table(cfg, &rho, r, route)?)
}

fn axis_from(lo: f64, hi: f64, step: f64) -> natom::Result<Axis> {
    let n = ((hi - lo) / step).round() as usize + 1;
    Axis::linspace(lo, lo + step * (n - 1) as f64, n)
}

fn cmd_sweep(cfg: &RunConfig) -> natom::Result<()> {
    let spec = SweepSpec {
        omega_axis: axis_from(cfg.omega_min, cfg.omega_max, cfg.omega_step)?,
        delta_axis: axis_from(cfg.delta_min, cfg.delta_max, cfg.delta_step)?,
    };
    let grid = natom::sweep::run(&spec);
    emit(cfg, &sweep_table(cfg, &grid))?;
    if let Some(path) = &cfg.out {
        std::fs::write(format!("{path}.matrix"), sweep_gnuplot_matrix(&grid))?;
    }
    Ok(())
}

fn cmd_dressed(cfg: &RunConfig, omega3: Option<f64>, omega41: Option<f64>) -> natom::Result<()> {
    let o3 = omega3.unwrap_or(cfg.rabi_31);
    let o41 = omega41.unwrap_or(cfg.rabi_41);
    let db = if omega3.is_none() && cfg.rabi_31 != cfg.rabi_32 {
        dressed_basis_numeric(&SystemParams::resonant(cfg.rabi_31, cfg.rabi_32, o41))?
    } else {
        dressed_basis(o3, o41)?
    };
    emit(cfg, &dressed_table(&db))
}

fn cmd_compare(cfg: &RunConfig) -> natom::Result<()> {
    for (name, g) in [
        ("gamma_32", cfg.gamma_32),
        ("gamma_41", cfg.gamma_41),
        ("gamma_42", cfg.gamma_42),
    ] {
        if g != cfg.gamma_31 {
            return Err(Error::InvalidConfig(format!(
                "compare assumes equal decay rates, but {name} = {g} differs from gamma_31 = {}",
                cfg.gamma_31
            )));
        }
    }
    let omegas = axis_from(cfg.omega_min, cfg.omega_max, cfg.omega_step)?.values;
    let rows = compare_analytic_numeric(&omegas, cfg.gamma_31)?;
    emit(cfg, &compare_table(&rows))
}
