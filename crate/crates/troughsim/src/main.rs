//! Command-line driver: simulate, stationary, verify, check-assumptions.
//!
//! Exit codes: 0 success, 1 solver failure (vacuum/non-convergence),
//! 2 config/schema error, 3 assumption-check failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use troughsim::config::{parse_config, RunConfig};
use troughsim::diagnostics::distance_to_stationary;
use troughsim::model::{validate_admissibility_default, Grid};
use troughsim::output::{
    write_diagnostics_csv, write_distances_csv, write_stationary_csv, write_trajectory_csv,
};
use troughsim::preset::preset_noor_like;
use troughsim::stationary::{solve_stationary, StationaryProblem};
use troughsim::transient::run_transient;

const EXIT_SOLVER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_ASSUMPTIONS: u8 = 3;

#[derive(Parser)]
#[command(
    name = "troughsim",
    about = "Transient and stationary thermo-fluid simulation of a heated collector pipe"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file (see the book's file-format chapter).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Built-in preset to start from (`noor-like`).
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Output directory (overrides `run.output`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Override `grid.n_cells`.
    #[arg(long, global = true, value_name = "N")]
    cells: Option<usize>,

    /// Override `solver.epsilon`.
    #[arg(long, global = true, value_name = "X")]
    epsilon: Option<f64>,

    /// Override `solver.t_end`.
    #[arg(long = "t-end", global = true, value_name = "T")]
    t_end: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the transient solver and write trajectory.csv.
    Simulate,
    /// Solve the stationary problem and write stationary.csv plus a summary.
    Stationary,
    /// Run the transient, solve the stationary problem, and write
    /// diagnostics.csv and distances.csv.
    Verify,
    /// Validate admissibility and reproduce the collector power budget.
    CheckAssumptions,
}

fn load_config(cli: &Cli) -> Result<RunConfig, (u8, String)> {
    let mut config = match (&cli.config, &cli.preset) {
        (Some(_), Some(_)) => {
            return Err((
                EXIT_CONFIG,
                "pass either --config or --preset, not both".into(),
            ))
        }
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| (EXIT_CONFIG, format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| (EXIT_CONFIG, e.to_string()))?
        }
        (None, Some(name)) => match name.as_str() {
            "noor-like" => preset_noor_like().0,
            other => return Err((EXIT_CONFIG, format!("unknown preset `{other}`"))),
        },
        (None, None) => {
            return Err((
                EXIT_CONFIG,
                "no configuration: pass --config PATH or --preset NAME".into(),
            ))
        }
    };

    if let Some(n) = cli.cells {
        let grid = Grid::new(n).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
        config.scenario.grid = grid;
    }
    if let Some(eps) = cli.epsilon {
        config.solver.epsilon = eps;
    }
    if let Some(t_end) = cli.t_end {
        config.solver.t_end = t_end;
    }
    if let Some(out) = &cli.out {
        config.output_path = out.clone();
    }
    config
        .solver
        .validate()
        .map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), (u8, String)> {
    let config = load_config(cli)?;
    let out_dir = &config.output_path;
    fs::create_dir_all(out_dir)
        .map_err(|e| (EXIT_SOLVER, format!("cannot create {}: {e}", out_dir.display())))?;
    let grid = config.scenario.grid;

    match cli.command {
        Command::Simulate => {
            let trajectory = match run_transient(&config.scenario, &config.params, &config.solver)
            {
                Ok(t) => t,
                Err(aborted) => {
                    // Preserve whatever was computed before the failure.
                    let _ = write_trajectory_csv(
                        &aborted.partial,
                        &grid,
                        &config.params,
                        out_dir,
                    );
                    return Err((EXIT_SOLVER, aborted.to_string()));
                }
            };
            let path = write_trajectory_csv(&trajectory, &grid, &config.params, out_dir)
                .map_err(|e| (EXIT_SOLVER, e.to_string()))?;
            println!(
                "simulate: {} frames to t = {} -> {}",
                trajectory.frames.len(),
                trajectory.terminal().map_or(0.0, |f| f.t),
                path.display()
            );
        }
        Command::Stationary => {
            let problem = StationaryProblem::from_scenario_at(
                &config.scenario,
                &config.params,
                config.solver.t_end,
            )
            .map_err(|e| (EXIT_SOLVER, e.to_string()))?;
            let profile = solve_stationary(&problem, &grid, config.solver.tol_elliptic)
                .map_err(|e| (EXIT_SOLVER, e.to_string()))?;
            let (csv, summary) = write_stationary_csv(&profile, &grid, out_dir)
                .map_err(|e| (EXIT_SOLVER, e.to_string()))?;
            println!(
                "stationary: j = {}, p_diff = {} -> {}, {}",
                profile.flux,
                profile.p_diff_achieved,
                csv.display(),
                summary.display()
            );
        }
        Command::Verify => {
            let trajectory = run_transient(&config.scenario, &config.params, &config.solver)
                .map_err(|aborted| (EXIT_SOLVER, aborted.to_string()))?;
            let problem = StationaryProblem::from_scenario_at(
                &config.scenario,
                &config.params,
                config.solver.t_end,
            )
            .map_err(|e| (EXIT_SOLVER, e.to_string()))?;
            let target = solve_stationary(&problem, &grid, config.solver.tol_elliptic)
                .map_err(|e| (EXIT_SOLVER, e.to_string()))?;
            let times: Vec<f64> = trajectory.frames.iter().map(|f| f.t).collect();
            let mut distances = Vec::with_capacity(trajectory.frames.len());
            for frame in &trajectory.frames {
                distances.push(
                    distance_to_stationary(frame, &target)
                        .map_err(|e| (EXIT_SOLVER, e.to_string()))?,
                );
            }
            let d_path = write_diagnostics_csv(&times, &trajectory.diagnostics, out_dir)
                .map_err(|e| (EXIT_SOLVER, e.to_string()))?;
            let x_path = write_distances_csv(&times, &distances, out_dir)
                .map_err(|e| (EXIT_SOLVER, e.to_string()))?;
            let terminal = distances.last().expect("at least the initial frame");
            println!(
                "verify: terminal L1(rho) distance {} -> {}, {}",
                terminal.rho.l1,
                d_path.display(),
                x_path.display()
            );
        }
        Command::CheckAssumptions => {
            let report = validate_admissibility_default(&config.scenario, &config.params);
            println!("{report}");
            let (_, check) = preset_noor_like();
            println!(
                "appendix check (NOOR-like): source {} W/m, convective margin {} W/m, radiative margin {} W/m",
                check.source_w_per_m, check.conv_margin_w_per_m, check.rad_margin_w_per_m
            );
            println!(
                "appendix inequality: {} < {} + {} = {}: {}",
                check.source_w_per_m,
                check.conv_margin_w_per_m,
                check.rad_margin_w_per_m,
                check.margin_total_w_per_m(),
                if check.inequality_holds() { "PASS" } else { "FAIL" }
            );
            if !report.passed() || !check.inequality_holds() {
                return Err((EXIT_ASSUMPTIONS, "assumption check failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
