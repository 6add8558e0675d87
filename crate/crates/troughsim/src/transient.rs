//! Time integration of the regularized density equation.
//!
//! Each step is explicit Euler on the conservative form
//!
//! ```text
//! rho_i' = rho_i - dt/dx (flux_{i+1/2} - flux_{i-1/2})
//!        + eps dt/dx^2 (rho_{i+1} - 2 rho_i + rho_{i-1})
//! ```
//!
//! with donor-cell upwind fluxes `flux = u_face * rho_upwind`, face
//! velocities averaged from the elliptic reconstruction, and Dirichlet
//! ghost values equal to the boundary traces at both ends. The elliptic
//! sub-problem is re-solved once per step, lagged within the step.
//!
//! Under the CFL bound and admissible data the update is a convex
//! combination of values in `[gamma_star, gamma]`, which is the discrete
//! maximum principle the diagnostics pin down.

use thiserror::Error;

use crate::diagnostics::{compute_monitors, entropy_residual, DiagnosticsReport, EntropyCheckConfig};
use crate::elliptic::{solve_elliptic, EllipticError, EllipticSolution};
use crate::model::{
    validate_admissibility_default, AdmissibilityReport, Field, Grid, ModelError, PlantParams,
    Scenario,
};

/// Guard against division by zero in the CFL formula.
const VELOCITY_GUARD: f64 = 1e-14;

/// Numerical configuration for a transient run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Artificial viscosity (>= 0). The default ties it to the grid,
    /// `epsilon = dx`, so refining the grid also sharpens the regularization.
    pub epsilon: f64,
    /// Courant factor in (0, 1).
    pub cfl: f64,
    /// Final time (>= 0).
    pub t_end: f64,
    /// Absolute tolerance on the elliptic root objective.
    pub tol_elliptic: f64,
    /// Steps between stored frames.
    pub output_stride: usize,
    /// Vacuum guard; a step producing any density below this aborts the run.
    pub rho_floor: f64,
    /// Run even if the admissibility validation fails.
    pub allow_inadmissible: bool,
}

impl SolverConfig {
    /// Defaults: `epsilon = dx`, `cfl = 0.4`, `t_end = 1`, elliptic
    /// tolerance `1e-12`, stride 10, `rho_floor = gamma_star / 10`.
    pub fn defaults_for(grid: &Grid, params: &PlantParams) -> Self {
        Self {
            epsilon: grid.dx(),
            cfl: 0.4,
            t_end: 1.0,
            tol_elliptic: 1e-12,
            output_stride: 10,
            rho_floor: params.gamma_star() / 10.0,
            allow_inadmissible: false,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let check = |name: &'static str, ok: bool, requirement: &'static str, value: f64| {
            if ok {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter {
                    name,
                    requirement,
                    value,
                })
            }
        };
        check("epsilon", self.epsilon >= 0.0 && self.epsilon.is_finite(), "nonnegative", self.epsilon)?;
        check("cfl", self.cfl > 0.0 && self.cfl < 1.0, "in (0, 1)", self.cfl)?;
        check("t_end", self.t_end >= 0.0 && self.t_end.is_finite(), "nonnegative", self.t_end)?;
        check("tol_elliptic", self.tol_elliptic > 0.0, "strictly positive", self.tol_elliptic)?;
        check(
            "output_stride",
            self.output_stride >= 1,
            "a positive integer",
            self.output_stride as f64,
        )?;
        check("rho_floor", self.rho_floor >= 0.0, "nonnegative", self.rho_floor)
    }
}

/// One time level: density plus its elliptic reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct TransientState {
    pub t: f64,
    pub rho: Field,
    pub elliptic: EllipticSolution,
    pub step_count: usize,
}

/// Stored frames of a run, with per-frame diagnostics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub frames: Vec<TransientState>,
    pub diagnostics: Vec<DiagnosticsReport>,
}

impl Trajectory {
    pub fn terminal(&self) -> Option<&TransientState> {
        self.frames.last()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error("vacuum guard tripped at cell {cell} (x = {x}): density {value} below floor {floor}")]
    VacuumGuard {
        cell: usize,
        x: f64,
        value: f64,
        floor: f64,
    },
    #[error("scenario failed admissibility validation; set allow_inadmissible to run anyway\n{report}")]
    Inadmissible { report: AdmissibilityReport },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A failed run, with whatever frames were completed before the abort.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("transient run aborted at step {step} (t = {t}): {error}")]
pub struct RunAborted {
    pub error: RunError,
    pub step: usize,
    pub t: f64,
    pub partial: Trajectory,
}

/// Largest stable explicit step for the current state:
/// `dt = cfl * min(dx / max|u|, dx^2 / (2 eps))`, guarded against zero
/// velocity and zero viscosity, and capped by the time remaining to
/// `t_end`.
///
/// The endgame splits the last two steps evenly instead of leaving a
/// round-off-sized crumb for the final step: quotients by `dt` appear in
/// the per-step diagnostics and must not amplify noise.
pub fn stable_timestep(state: &TransientState, config: &SolverConfig) -> f64 {
    let n = state.rho.len();
    let dx = 1.0 / n as f64;
    let u = &state.elliptic.velocity;
    let mut u_max = u.max_abs();
    for trace in [u.left_trace(), u.right_trace()].into_iter().flatten() {
        u_max = u_max.max(trace.abs());
    }
    let advective = dx / u_max.max(VELOCITY_GUARD);
    let diffusive = dx * dx / (2.0 * config.epsilon).max(VELOCITY_GUARD);
    let dt = config.cfl * advective.min(diffusive);
    let remaining = config.t_end - state.t;
    if remaining <= 0.0 {
        dt
    } else if remaining <= dt {
        remaining
    } else if remaining <= 2.0 * dt {
        0.5 * remaining
    } else {
        dt
    }
}

/// One conservative upwind/diffusion update of the density. Returns the new
/// cell values with traces advanced to `t + dt`.
///
/// Expects `dt` at or below [`stable_timestep`] and the elliptic solution in
/// `state` current for `state.rho`.
pub fn advance_density(
    state: &TransientState,
    dt: f64,
    scenario: &Scenario,
    _params: &PlantParams,
    config: &SolverConfig,
) -> Result<Field, RunError> {
    let n = state.rho.len();
    let dx = 1.0 / n as f64;
    let rho = &state.rho;
    let u = &state.elliptic.velocity;
    let t = state.t;

    let ghost_left = scenario.rho_left.eval(t);
    let ghost_right = scenario.rho_right.eval(t);
    let u_left = u.left_trace().unwrap_or(u[0]);
    let u_right = u.right_trace().unwrap_or(u[n - 1]);

    // Donor-cell flux at a face: the density comes from the side the
    // velocity points away from.
    let upwind = |u_face: f64, left: f64, right: f64| {
        if u_face >= 0.0 {
            u_face * left
        } else {
            u_face * right
        }
    };

    // Faces 0..=n: face i sits between cell i-1 and cell i, with ghost
    // values beyond the ends.
    let mut fluxes = Vec::with_capacity(n + 1);
    fluxes.push(upwind(u_left, ghost_left, rho[0]));
    for i in 0..n - 1 {
        let u_face = 0.5 * (u[i] + u[i + 1]);
        fluxes.push(upwind(u_face, rho[i], rho[i + 1]));
    }
    fluxes.push(upwind(u_right, rho[n - 1], ghost_right));

    let lam = dt / dx;
    let mu = config.epsilon * dt / (dx * dx);
    let at = |i: isize| -> f64 {
        if i < 0 {
            ghost_left
        } else if i as usize >= n {
            ghost_right
        } else {
            rho[i as usize]
        }
    };
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let advect = lam * (fluxes[i + 1] - fluxes[i]);
        let diffuse = mu * (at(i as isize + 1) - 2.0 * rho[i] + at(i as isize - 1));
        let next = rho[i] - advect + diffuse;
        if next < config.rho_floor {
            return Err(RunError::VacuumGuard {
                cell: i,
                x: (i as f64 + 0.5) * dx,
                value: next,
                floor: config.rho_floor,
            });
        }
        values.push(next);
    }

    let t_next = t + dt;
    Ok(Field::from_values(values).with_traces(
        scenario.rho_left.eval(t_next),
        scenario.rho_right.eval(t_next),
    ))
}

/// Runs the coupled system to `t_end`: elliptic solve, stable step, density
/// update, repeat. Frames are stored every `output_stride` steps plus the
/// initial and final levels; each stored frame carries monitors, with the
/// entropy residual aggregated over the steps since the previous stored
/// frame.
///
/// Refuses inadmissible scenarios unless `config.allow_inadmissible`; on an
/// abort (vacuum, elliptic failure) the partial trajectory is preserved in
/// the error.
pub fn run_transient(
    scenario: &Scenario,
    params: &PlantParams,
    config: &SolverConfig,
) -> Result<Trajectory, Box<RunAborted>> {
    let mut trajectory = Trajectory::default();
    let abort = |error: RunError, step: usize, t: f64, partial: Trajectory| {
        Box::new(RunAborted {
            error,
            step,
            t,
            partial,
        })
    };

    if let Err(e) = config.validate() {
        return Err(abort(RunError::Model(e), 0, 0.0, trajectory));
    }
    if !config.allow_inadmissible {
        let report = validate_admissibility_default(scenario, params);
        if !report.passed() {
            return Err(abort(RunError::Inadmissible { report }, 0, 0.0, trajectory));
        }
    }

    let grid = scenario.grid;
    let entropy_config = EntropyCheckConfig::lattice_for(params, &grid, config);
    let solve_at = |rho: &Field, t: f64| -> Result<EllipticSolution, RunError> {
        let forcing = scenario.forcing_at(t, params)?;
        Ok(solve_elliptic(
            rho,
            &forcing,
            scenario.p_left.eval(t),
            scenario.p_right.eval(t),
            params,
            config.tol_elliptic,
        )?)
    };

    let rho0 = scenario.initial_density();
    let elliptic0 = match solve_at(&rho0, 0.0) {
        Ok(sol) => sol,
        Err(e) => return Err(abort(e, 0, 0.0, trajectory)),
    };
    let mut state = TransientState {
        t: 0.0,
        rho: rho0,
        elliptic: elliptic0,
        step_count: 0,
    };
    trajectory.diagnostics.push(compute_monitors(&state, &grid));
    trajectory.frames.push(state.clone());

    let mut entropy_since_last_frame = 0.0f64;
    while state.t < config.t_end {
        let dt = stable_timestep(&state, config);
        if dt <= 0.0 {
            break;
        }
        let rho_next = match advance_density(&state, dt, scenario, params, config) {
            Ok(r) => r,
            Err(e) => return Err(abort(e, state.step_count, state.t, trajectory)),
        };
        let t_next = state.t + dt;
        let elliptic_next = match solve_at(&rho_next, t_next) {
            Ok(sol) => sol,
            Err(e) => return Err(abort(e, state.step_count, state.t, trajectory)),
        };
        let next = TransientState {
            t: t_next,
            rho: rho_next,
            elliptic: elliptic_next,
            step_count: state.step_count + 1,
        };
        entropy_since_last_frame =
            entropy_since_last_frame.max(entropy_residual(&state, &next, dt, &entropy_config));
        state = next;

        let at_end = state.t >= config.t_end;
        if state.step_count.is_multiple_of(config.output_stride) || at_end {
            let mut report = compute_monitors(&state, &grid);
            report.entropy_residual_max = entropy_since_last_frame;
            trajectory.diagnostics.push(report);
            trajectory.frames.push(state.clone());
            entropy_since_last_frame = 0.0;
        }
    }

    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PiecewiseLinear, SourceTerm};

    fn params() -> PlantParams {
        PlantParams::new(1.0, 1.0, 1.0, 1.0, 0.2).unwrap()
    }

    /// Scenario whose forcing balances the losses at `rho_bar` everywhere:
    /// the exact solution is constant in space and time.
    fn equilibrium_scenario(n: usize, rho_bar: f64, p: &PlantParams) -> Scenario {
        let y = p.gamma() - rho_bar;
        Scenario {
            grid: Grid::new(n).unwrap(),
            source: SourceTerm::constant(0.0),
            t_out: PiecewiseLinear::constant(y),
            t_sky: PiecewiseLinear::constant(y),
            rho_left: PiecewiseLinear::constant(rho_bar),
            rho_right: PiecewiseLinear::constant(rho_bar),
            p_left: PiecewiseLinear::constant(0.5),
            p_right: PiecewiseLinear::constant(0.5),
            rho0: PiecewiseLinear::constant(rho_bar),
        }
    }

    fn heated_scenario(n: usize) -> Scenario {
        Scenario {
            grid: Grid::new(n).unwrap(),
            source: SourceTerm::constant(0.45),
            t_out: PiecewiseLinear::constant(0.25),
            t_sky: PiecewiseLinear::constant(0.2),
            rho_left: PiecewiseLinear::constant(0.75),
            rho_right: PiecewiseLinear::constant(0.5),
            p_left: PiecewiseLinear::constant(1.0),
            p_right: PiecewiseLinear::constant(0.0),
            rho0: PiecewiseLinear::from_knots(vec![(0.0, 0.75), (1.0, 0.5)]).unwrap(),
        }
    }

    fn heated_params() -> PlantParams {
        PlantParams::new(1.0, 1.0, 0.5, 1.0, 0.05).unwrap()
    }

    fn initial_state(scenario: &Scenario, p: &PlantParams, config: &SolverConfig) -> TransientState {
        let rho = scenario.initial_density();
        let forcing = scenario.forcing_at(0.0, p).unwrap();
        let elliptic = solve_elliptic(
            &rho,
            &forcing,
            scenario.p_left.eval(0.0),
            scenario.p_right.eval(0.0),
            p,
            config.tol_elliptic,
        )
        .unwrap();
        TransientState {
            t: 0.0,
            rho,
            elliptic,
            step_count: 0,
        }
    }

    #[test]
    fn timestep_guard_path_capped_by_remaining_time() {
        let p = params();
        let scenario = equilibrium_scenario(10, 0.6, &p);
        let mut config = SolverConfig::defaults_for(&scenario.grid, &p);
        config.epsilon = 0.0;
        config.t_end = 3.0;
        let state = initial_state(&scenario, &p, &config);
        // u is zero at equilibrium, so the formula hits the guard and the
        // remaining-time cap takes over.
        let dt = stable_timestep(&state, &config);
        assert_eq!(dt, 3.0);
    }

    #[test]
    fn timestep_advective_branch() {
        // max|u| = 1, eps = 0, dx = 0.01, cfl = 0.4 gives dt = 0.004.
        let p = params();
        let scenario = equilibrium_scenario(100, 0.6, &p);
        let mut config = SolverConfig::defaults_for(&scenario.grid, &p);
        config.epsilon = 0.0;
        config.cfl = 0.4;
        config.t_end = 1e9;
        let mut state = initial_state(&scenario, &p, &config);
        let n = state.rho.len();
        let u = Field::constant(n, 1.0).with_traces(1.0, 1.0);
        state.elliptic.velocity = u;
        let dt = stable_timestep(&state, &config);
        assert!((dt - 0.004).abs() < 1e-15, "dt = {dt}");
    }

    #[test]
    fn timestep_diffusive_branch() {
        // max|u| = 1, eps = 0.01, dx = 0.01: dt = cfl * min(0.01, 0.005).
        let p = params();
        let scenario = equilibrium_scenario(100, 0.6, &p);
        let mut config = SolverConfig::defaults_for(&scenario.grid, &p);
        config.epsilon = 0.01;
        config.cfl = 0.4;
        config.t_end = 1e9;
        let mut state = initial_state(&scenario, &p, &config);
        let n = state.rho.len();
        state.elliptic.velocity = Field::constant(n, 1.0).with_traces(1.0, 1.0);
        let dt = stable_timestep(&state, &config);
        assert!((dt - 0.4 * 0.005).abs() < 1e-15, "dt = {dt}");
    }

    #[test]
    fn equilibrium_is_a_fixed_point_of_one_step() {
        let p = params();
        let rho_bar = 0.6;
        let scenario = equilibrium_scenario(50, rho_bar, &p);
        let config = SolverConfig::defaults_for(&scenario.grid, &p);
        let state = initial_state(&scenario, &p, &config);
        let next = advance_density(&state, 1e-3, &scenario, &p, &config).unwrap();
        for i in 0..next.len() {
            assert!(
                (next[i] - rho_bar).abs() < 1e-13,
                "cell {i} drifted to {}",
                next[i]
            );
        }
    }

    #[test]
    fn pure_diffusion_relaxes_to_discrete_steady_profile() {
        // Negligible losses and zero source/drop: the scheme degenerates to
        // explicit diffusion with Dirichlet ghosts. Oracle: the exact
        // steady state of that discretization is linear in the cell index,
        // rho_i = rho_l + (i + 1)(rho_r - rho_l)/(n + 1).
        let p = PlantParams::new(1.0, 1e-30, 1e-30, 1.0, 0.2).unwrap();
        let n = 50;
        let scenario = Scenario {
            grid: Grid::new(n).unwrap(),
            source: SourceTerm::constant(0.0),
            t_out: PiecewiseLinear::constant(0.0),
            t_sky: PiecewiseLinear::constant(0.0),
            rho_left: PiecewiseLinear::constant(0.4),
            rho_right: PiecewiseLinear::constant(0.8),
            p_left: PiecewiseLinear::constant(0.0),
            p_right: PiecewiseLinear::constant(0.0),
            rho0: PiecewiseLinear::constant(0.6),
        };
        let mut config = SolverConfig::defaults_for(&scenario.grid, &p);
        config.epsilon = 0.05;
        config.t_end = 30.0;
        config.output_stride = 10_000;
        let trajectory = run_transient(&scenario, &p, &config).unwrap();
        let terminal = trajectory.terminal().unwrap();
        for i in 0..n {
            let expected = 0.4 + (i as f64 + 1.0) * (0.8 - 0.4) / (n as f64 + 1.0);
            assert!(
                (terminal.rho[i] - expected).abs() <= 1e-6,
                "cell {i}: {} vs steady {expected}",
                terminal.rho[i]
            );
        }
    }

    #[test]
    fn admissible_run_respects_maximum_principle() {
        let p = heated_params();
        let scenario = heated_scenario(80);
        let mut config = SolverConfig::defaults_for(&scenario.grid, &p);
        config.t_end = 2.0;
        config.output_stride = 5;
        let trajectory = run_transient(&scenario, &p, &config).unwrap();
        assert!(trajectory.frames.len() > 2);
        for w in trajectory.frames.windows(2) {
            assert!(w[1].t > w[0].t, "frame times not strictly increasing");
        }
        for (frame, report) in trajectory.frames.iter().zip(&trajectory.diagnostics) {
            assert!(
                report.rho_min >= p.gamma_star() - 1e-12,
                "min {} below barrier at t = {}",
                report.rho_min,
                frame.t
            );
            assert!(
                report.rho_max <= p.gamma() + 1e-12,
                "max {} above barrier at t = {}",
                report.rho_max,
                frame.t
            );
        }
    }

    #[test]
    fn zero_final_time_returns_initial_frame_only() {
        let p = params();
        let scenario = equilibrium_scenario(20, 0.6, &p);
        let mut config = SolverConfig::defaults_for(&scenario.grid, &p);
        config.t_end = 0.0;
        let trajectory = run_transient(&scenario, &p, &config).unwrap();
        assert_eq!(trajectory.frames.len(), 1);
        assert_eq!(trajectory.frames[0].t, 0.0);
    }

    #[test]
    fn equilibrium_run_stays_at_initial_frame() {
        let p = params();
        let rho_bar = 0.55;
        let scenario = equilibrium_scenario(40, rho_bar, &p);
        let mut config = SolverConfig::defaults_for(&scenario.grid, &p);
        config.t_end = 1.0;
        config.output_stride = 25;
        let trajectory = run_transient(&scenario, &p, &config).unwrap();
        for frame in &trajectory.frames {
            for i in 0..frame.rho.len() {
                assert!(
                    (frame.rho[i] - rho_bar).abs() < 1e-12,
                    "t = {}: cell {i} = {}",
                    frame.t,
                    frame.rho[i]
                );
            }
        }
    }

    #[test]
    fn inadmissible_scenario_is_refused_unless_overridden() {
        let p = params();
        let mut scenario = equilibrium_scenario(20, 0.6, &p);
        scenario.rho0 = PiecewiseLinear::constant(p.gamma() + 0.1);
        let config = SolverConfig::defaults_for(&scenario.grid, &p);
        let err = run_transient(&scenario, &p, &config).unwrap_err();
        assert!(matches!(err.error, RunError::Inadmissible { .. }));

        let mut forced = config;
        forced.allow_inadmissible = true;
        forced.t_end = 0.01;
        assert!(run_transient(&scenario, &p, &forced).is_ok());
    }

    #[test]
    fn vacuum_guard_aborts_with_partial_trajectory() {
        // An absurd floor makes the very first step trip the guard.
        let p = heated_params();
        let scenario = heated_scenario(30);
        let mut config = SolverConfig::defaults_for(&scenario.grid, &p);
        config.rho_floor = 0.9;
        config.t_end = 1.0;
        let err = run_transient(&scenario, &p, &config).unwrap_err();
        assert!(matches!(err.error, RunError::VacuumGuard { .. }));
        assert_eq!(err.partial.frames.len(), 1, "initial frame preserved");
    }

    #[test]
    fn per_step_mass_balance_is_conservative() {
        let p = heated_params();
        let scenario = heated_scenario(60);
        let config = SolverConfig::defaults_for(&scenario.grid, &p);
        let state = initial_state(&scenario, &p, &config);
        let dt = stable_timestep(&state, &config);
        let next = advance_density(&state, dt, &scenario, &p, &config).unwrap();

        let n = state.rho.len();
        let dx = 1.0 / n as f64;
        let rho = &state.rho;
        let u = &state.elliptic.velocity;
        let ghost_l = scenario.rho_left.eval(0.0);
        let ghost_r = scenario.rho_right.eval(0.0);
        let upwind = |uf: f64, l: f64, r: f64| if uf >= 0.0 { uf * l } else { uf * r };
        let flux_in = upwind(u.left_trace().unwrap(), ghost_l, rho[0]);
        let flux_out = upwind(u.right_trace().unwrap(), rho[n - 1], ghost_r);
        let diff_bc = config.epsilon / dx * ((ghost_r - rho[n - 1]) - (rho[0] - ghost_l));

        let mass_change: f64 = (0..n).map(|i| next[i] - rho[i]).sum::<f64>() * dx;
        let expected = dt * (flux_in - flux_out) + dt * diff_bc;
        assert!(
            (mass_change - expected).abs() < 1e-14,
            "mass change {mass_change} vs boundary bookkeeping {expected}"
        );
    }

    #[test]
    fn runs_are_deterministic() {
        let p = heated_params();
        let scenario = heated_scenario(40);
        let mut config = SolverConfig::defaults_for(&scenario.grid, &p);
        config.t_end = 0.3;
        let a = run_transient(&scenario, &p, &config).unwrap();
        let b = run_transient(&scenario, &p, &config).unwrap();
        assert_eq!(a.frames.len(), b.frames.len());
        for (fa, fb) in a.frames.iter().zip(&b.frames) {
            assert_eq!(fa.t.to_bits(), fb.t.to_bits());
            for i in 0..fa.rho.len() {
                assert_eq!(fa.rho[i].to_bits(), fb.rho[i].to_bits());
            }
        }
    }

    #[test]
    fn terminal_state_self_converges_under_refinement() {
        // Fixed viscosity, halving dx: terminal L1 difference against a
        // fine-grid reference drops with order >= 0.8.
        let p = heated_params();
        let mut scenarios = Vec::new();
        for n in [40usize, 80, 320] {
            scenarios.push(heated_scenario(n));
        }
        let run = |scenario: &Scenario| {
            let mut config = SolverConfig::defaults_for(&scenario.grid, &p);
            config.epsilon = 0.02;
            config.t_end = 0.5;
            config.output_stride = 100_000;
            run_transient(scenario, &p, &config)
                .unwrap()
                .terminal()
                .unwrap()
                .rho
                .clone()
        };
        let coarse = run(&scenarios[0]);
        let medium = run(&scenarios[1]);
        let reference = run(&scenarios[2]);

        // L1 difference against the reference, sampled by averaging the
        // reference cells that tile each coarse cell.
        let l1_vs_ref = |field: &Field| {
            let n = field.len();
            let ratio = reference.len() / n;
            let dx = 1.0 / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                let avg: f64 = (0..ratio)
                    .map(|k| reference[i * ratio + k])
                    .sum::<f64>()
                    / ratio as f64;
                acc += (field[i] - avg).abs() * dx;
            }
            acc
        };
        let e_coarse = l1_vs_ref(&coarse);
        let e_medium = l1_vs_ref(&medium);
        let order = (e_coarse / e_medium).log2();
        assert!(
            order >= 0.8,
            "observed order {order} (errors {e_coarse} vs {e_medium})"
        );
    }
}
