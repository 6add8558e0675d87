//! CSV and summary emission.
//!
//! All floating-point values are written with Rust's shortest round-trip
//! decimal formatting, so reading a file back reproduces the numbers
//! bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::diagnostics::{DiagnosticsReport, StationaryDistances};
use crate::model::{temperature_from_density, Grid, PlantParams};
use crate::stationary::StationaryProfile;
use crate::transient::Trajectory;

/// Header of `trajectory.csv`.
pub const TRAJECTORY_HEADER: &str = "t,x,rho,u,p,T";
/// Header of `stationary.csv`.
pub const STATIONARY_HEADER: &str = "x,rho,u,p,T";
/// Header of `diagnostics.csv`.
pub const DIAGNOSTICS_HEADER: &str =
    "t,rho_min,rho_max,tv_rho,p_grad_norm,u_max,entropy_residual_max,mass_total";
/// Header of `distances.csv`.
pub const DISTANCES_HEADER: &str =
    "t,rho_l1,rho_l2,rho_linf,u_l1,u_l2,u_linf,p_l1,p_l2,p_linf";

/// Writes `trajectory.csv`: one row per cell per stored frame.
pub fn write_trajectory_csv(
    trajectory: &Trajectory,
    grid: &Grid,
    params: &PlantParams,
    dir: &Path,
) -> io::Result<PathBuf> {
    let mut text = String::from(TRAJECTORY_HEADER);
    text.push('\n');
    for frame in &trajectory.frames {
        for i in 0..grid.n_cells() {
            let rho = frame.rho[i];
            let _ = writeln!(
                text,
                "{},{},{},{},{},{}",
                frame.t,
                grid.cell_center(i),
                rho,
                frame.elliptic.velocity[i],
                frame.elliptic.pressure[i],
                temperature_from_density(rho, params),
            );
        }
    }
    let path = dir.join("trajectory.csv");
    fs::write(&path, text)?;
    Ok(path)
}

/// Writes `stationary.csv` plus the `stationary_summary.txt` sidecar with
/// the flux, achieved pressure drop, and residuals as `key = value` lines.
pub fn write_stationary_csv(
    profile: &StationaryProfile,
    grid: &Grid,
    dir: &Path,
) -> io::Result<(PathBuf, PathBuf)> {
    let mut text = String::from(STATIONARY_HEADER);
    text.push('\n');
    for i in 0..grid.n_cells() {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            grid.cell_center(i),
            profile.rho[i],
            profile.velocity[i],
            profile.pressure[i],
            profile.temperature[i],
        );
    }
    let csv_path = dir.join("stationary.csv");
    fs::write(&csv_path, text)?;

    let mut summary = String::new();
    let _ = writeln!(summary, "j = {}", profile.flux);
    let _ = writeln!(summary, "p_diff_achieved = {}", profile.p_diff_achieved);
    let _ = writeln!(summary, "ode_residual = {}", profile.ode_residual);
    if let Some(compatible) = profile.zero_flux_compatible {
        let _ = writeln!(summary, "zero_flux_compatible = {compatible}");
    }
    let summary_path = dir.join("stationary_summary.txt");
    fs::write(&summary_path, summary)?;
    Ok((csv_path, summary_path))
}

/// Writes `diagnostics.csv`: one row of monitors per stored frame.
pub fn write_diagnostics_csv(
    times: &[f64],
    reports: &[DiagnosticsReport],
    dir: &Path,
) -> io::Result<PathBuf> {
    let mut text = String::from(DIAGNOSTICS_HEADER);
    text.push('\n');
    for (t, d) in times.iter().zip(reports) {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{}",
            t,
            d.rho_min,
            d.rho_max,
            d.tv_rho,
            d.p_grad_norm,
            d.u_max,
            d.entropy_residual_max,
            d.mass_total,
        );
    }
    let path = dir.join("diagnostics.csv");
    fs::write(&path, text)?;
    Ok(path)
}

/// Writes `distances.csv`: per-frame norms of the gap to a stationary
/// profile.
pub fn write_distances_csv(
    times: &[f64],
    distances: &[StationaryDistances],
    dir: &Path,
) -> io::Result<PathBuf> {
    let mut text = String::from(DISTANCES_HEADER);
    text.push('\n');
    for (t, d) in times.iter().zip(distances) {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{}",
            t,
            d.rho.l1,
            d.rho.l2,
            d.rho.linf,
            d.u.l1,
            d.u.l2,
            d.u.linf,
            d.p.l1,
            d.p.l2,
            d.p.linf,
        );
    }
    let path = dir.join("distances.csv");
    fs::write(&path, text)?;
    Ok(path)
}
