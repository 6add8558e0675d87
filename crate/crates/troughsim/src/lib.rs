//! Thermo-fluid simulation of a single heated collector pipe.
//!
//! The model tracks cross-section averaged density, velocity, pressure, and
//! temperature of a heat transfer fluid driven through a pipe by a boundary
//! pressure drop while absorbing concentrated radiative power. Density obeys
//! a transport equation; velocity and pressure are slaved to it through a
//! scalar monotone equation at each instant; temperature is an affine
//! function of density.
//!
//! The crate provides:
//!
//! - [`transient`]: a viscous-regularized upwind scheme for the coupled
//!   system, with a discrete maximum principle under admissible data;
//! - [`stationary`]: the unique steady profile via bisection on the strictly
//!   decreasing pressure-drop/flux relation;
//! - [`diagnostics`]: bound, variation, entropy, and convergence monitors;
//! - [`config`], [`preset`], [`output`]: the plain-text run configuration,
//!   a reference scenario, and CSV emission used by the `troughsim` binary.
//!
//! The `book/` directory of the repository walks through the model and the
//! numerics; its code snippets compile against this crate as doc-tests (see
//! [`guide`]).

pub mod config;
pub mod diagnostics;
pub mod elliptic;
pub mod guide;
pub mod model;
pub mod output;
pub mod preset;
pub mod quadrature;
pub mod stationary;
pub mod transient;

pub use config::{parse_config, Mode, RunConfig};
pub use diagnostics::{
    compute_monitors, distance_to_stationary, entropy_residual, DiagnosticsReport,
    EntropyCheckConfig, StationaryDistances,
};
pub use elliptic::{
    cumulative_source, reconstruct_fields, solve_elliptic, solve_velocity_offset,
    EllipticSolution,
};
pub use model::{
    combined_forcing, friction_inverse, friction_law, temperature_from_density,
    validate_admissibility, validate_admissibility_default, velocity_gradient, Field, Grid,
    PiecewiseLinear, PlantParams, Scenario, SourceTerm,
};
pub use preset::{preset_noor_like, AppendixCheck};
pub use stationary::{
    integrate_density_ode, pressure_drop_of_flux, solve_flux, solve_stationary,
    solve_zero_flux_profile, StationaryProblem, StationaryProfile,
};
pub use transient::{
    advance_density, run_transient, stable_timestep, SolverConfig, Trajectory, TransientState,
};
