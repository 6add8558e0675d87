//! Physical parameters, closure functions, the forcing term, and
//! admissibility validation shared by every solver.
//!
//! The model works in dimensionless units on the unit interval. Density,
//! velocity, pressure, and temperature are cross-section averages; the
//! temperature closure is the affine relation `T = gamma - rho`, so the
//! density carries the whole thermal state.

use thiserror::Error;

/// Errors raised by the model layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter `{name}` must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("source term must be nonnegative, got {value}")]
    NegativeSource { value: f64 },
    #[error("density must be strictly positive, got {value}")]
    VacuumDensity { value: f64 },
    #[error("table abscissae must be strictly increasing (violated at entry {index})")]
    UnorderedTable { index: usize },
    #[error("table must contain at least one entry")]
    EmptyTable,
}

/// Dimensionless plant constants: friction, loss coefficients, and the
/// density-temperature closure offset.
///
/// `gamma` is the density of the cold fluid (temperature zero) and the upper
/// density barrier; `gamma_star` is the lower barrier below which the model
/// loses validity (it corresponds to an unphysically hot fluid).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantParams {
    alpha: f64,
    beta1: f64,
    beta2: f64,
    gamma: f64,
    gamma_star: f64,
}

impl PlantParams {
    /// Validates positivity of all five constants and `gamma_star < gamma`.
    pub fn new(
        alpha: f64,
        beta1: f64,
        beta2: f64,
        gamma: f64,
        gamma_star: f64,
    ) -> Result<Self, ModelError> {
        let positive = |name: &'static str, value: f64| -> Result<(), ModelError> {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter {
                    name,
                    requirement: "strictly positive",
                    value,
                })
            }
        };
        positive("alpha", alpha)?;
        positive("beta1", beta1)?;
        positive("beta2", beta2)?;
        positive("gamma", gamma)?;
        positive("gamma_star", gamma_star)?;
        if gamma_star >= gamma {
            return Err(ModelError::InvalidParameter {
                name: "gamma_star",
                requirement: "strictly below gamma",
                value: gamma_star,
            });
        }
        Ok(Self {
            alpha,
            beta1,
            beta2,
            gamma,
            gamma_star,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn beta2(&self) -> f64 {
        self.beta2
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn gamma_star(&self) -> f64 {
        self.gamma_star
    }

    /// Upper admissibility bound for the forcing:
    /// `beta1 (gamma - gamma_star) + beta2 (gamma - gamma_star)^4`.
    pub fn forcing_bound(&self) -> f64 {
        let y = self.gamma - self.gamma_star;
        self.beta1 * y + self.beta2 * y.powi(4)
    }
}

/// Uniform cell-centered grid on the unit interval.
///
/// Cell centers sit at `x_i = (i + 1/2) dx` with `dx = 1 / n_cells`, so all
/// centers are strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n_cells: usize,
}

impl Grid {
    pub fn new(n_cells: usize) -> Result<Self, ModelError> {
        if n_cells == 0 {
            return Err(ModelError::InvalidParameter {
                name: "n_cells",
                requirement: "a positive integer",
                value: 0.0,
            });
        }
        Ok(Self { n_cells })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(move |i| self.cell_center(i))
    }
}

/// A scalar field sampled at cell centers, with two optional boundary trace
/// slots at `x = 0` and `x = 1`.
///
/// Traces are populated by whichever solver defines them (boundary data for
/// the density, reconstructed endpoint values for velocity and pressure).
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
    left: Option<f64>,
    right: Option<f64>,
}

impl Field {
    pub fn from_values(values: Vec<f64>) -> Self {
        Self {
            values,
            left: None,
            right: None,
        }
    }

    pub fn constant(n_cells: usize, value: f64) -> Self {
        Self::from_values(vec![value; n_cells])
    }

    /// Samples `f` at the cell centers of `grid`.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_values(grid.centers().map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn with_traces(mut self, left: f64, right: f64) -> Self {
        self.left = Some(left);
        self.right = Some(right);
        self
    }

    pub fn set_traces(&mut self, left: f64, right: f64) {
        self.left = Some(left);
        self.right = Some(right);
    }

    pub fn left_trace(&self) -> Option<f64> {
        self.left
    }

    pub fn right_trace(&self) -> Option<f64> {
        self.right
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Max-norm of the values (traces excluded).
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<usize> for Field {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Piecewise-linear scalar map, used for both time tables and spatial
/// profiles. Evaluation clamps to the end values outside the knot range, and
/// a single knot represents a constant.
///
/// Linear interpolation keeps tabulated data Lipschitz, which is the
/// regularity the admissibility assumptions ask of boundary and source data.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn constant(value: f64) -> Self {
        Self {
            knots: vec![(0.0, value)],
        }
    }

    /// Knot abscissae must be strictly increasing.
    pub fn from_knots(knots: Vec<(f64, f64)>) -> Result<Self, ModelError> {
        if knots.is_empty() {
            return Err(ModelError::EmptyTable);
        }
        for i in 1..knots.len() {
            if knots[i].0 <= knots[i - 1].0 {
                return Err(ModelError::UnorderedTable { index: i });
            }
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn is_constant(&self) -> bool {
        self.knots.len() == 1
    }

    pub fn eval(&self, s: f64) -> f64 {
        let k = &self.knots;
        if s <= k[0].0 {
            return k[0].1;
        }
        if s >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        // k is strictly increasing, so the partition point is well defined.
        let hi = k.partition_point(|&(a, _)| a < s);
        let (x0, v0) = k[hi - 1];
        let (x1, v1) = k[hi];
        let w = (s - x0) / (x1 - x0);
        v0 + w * (v1 - v0)
    }

    /// Minimum over the knot values. For a piecewise-linear map this is the
    /// global minimum of the clamped extension.
    pub fn min_value(&self) -> f64 {
        self.knots.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.knots
            .iter()
            .map(|&(_, v)| v)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Knot abscissae.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.iter().map(|&(a, _)| a)
    }
}

/// Radiative source `q(t, x)`: a time table optionally modulated by a
/// piecewise-linear spatial profile.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTerm {
    pub time: PiecewiseLinear,
    pub profile: Option<PiecewiseLinear>,
}

impl SourceTerm {
    pub fn constant(value: f64) -> Self {
        Self {
            time: PiecewiseLinear::constant(value),
            profile: None,
        }
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        let base = self.time.eval(t);
        match &self.profile {
            Some(p) => base * p.eval(x),
            None => base,
        }
    }
}

/// A complete problem setup: grid, source field, ambient data, boundary
/// traces, and the initial density profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub grid: Grid,
    /// Radiative source `q(t, x) >= 0`.
    pub source: SourceTerm,
    /// Ambient temperature (map of `t`).
    pub t_out: PiecewiseLinear,
    /// Sky temperature (map of `t`).
    pub t_sky: PiecewiseLinear,
    /// Density trace at `x = 0` (map of `t`), expected within the barriers.
    pub rho_left: PiecewiseLinear,
    /// Density trace at `x = 1` (map of `t`).
    pub rho_right: PiecewiseLinear,
    /// Pressure trace at `x = 0` (map of `t`).
    pub p_left: PiecewiseLinear,
    /// Pressure trace at `x = 1` (map of `t`).
    pub p_right: PiecewiseLinear,
    /// Initial density profile (map of `x`).
    pub rho0: PiecewiseLinear,
}

impl Scenario {
    /// Initial density sampled at cell centers, with the `t = 0` boundary
    /// traces attached.
    pub fn initial_density(&self) -> Field {
        let mut rho = Field::from_fn(&self.grid, |x| self.rho0.eval(x));
        rho.set_traces(self.rho_left.eval(0.0), self.rho_right.eval(0.0));
        rho
    }

    /// Combined forcing `f(t, x) = q + beta1 T_out + beta2 T_sky^4` sampled
    /// at cell centers, with endpoint traces.
    pub fn forcing_at(&self, t: f64, params: &PlantParams) -> Result<Field, ModelError> {
        let t_out = self.t_out.eval(t);
        let t_sky = self.t_sky.eval(t);
        let mut values = Vec::with_capacity(self.grid.n_cells());
        for x in self.grid.centers() {
            values.push(combined_forcing(self.source.eval(t, x), t_out, t_sky, params)?);
        }
        let left = combined_forcing(self.source.eval(t, 0.0), t_out, t_sky, params)?;
        let right = combined_forcing(self.source.eval(t, 1.0), t_out, t_sky, params)?;
        Ok(Field::from_values(values).with_traces(left, right))
    }

    /// Union of the knot times of all time-dependent data (always contains
    /// `t = 0`). This is the default time sampling for admissibility checks:
    /// piecewise-linear data attains its extremes at knots.
    pub fn time_knots(&self) -> Vec<f64> {
        let mut times = vec![0.0];
        let tables = [
            &self.source.time,
            &self.t_out,
            &self.t_sky,
            &self.rho_left,
            &self.rho_right,
        ];
        for table in tables {
            times.extend(table.breakpoints());
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        times
    }
}

/// Friction response `G(xi) = xi |xi|` (odd, strictly increasing).
pub fn friction_law(xi: f64) -> f64 {
    xi * xi.abs()
}

/// Inverse friction response `g(xi) = sign(xi) sqrt(|xi|)`, with
/// `sign(0) = 0` so the map stays odd and total.
pub fn friction_inverse(xi: f64) -> f64 {
    if xi == 0.0 {
        0.0
    } else {
        xi.signum() * xi.abs().sqrt()
    }
}

/// Combined forcing `f = q + beta1 T_out + beta2 T_sky^4`.
///
/// Rejects negative `q`: the radiative source is a concentrated power input
/// and must be nonnegative.
pub fn combined_forcing(
    q_val: f64,
    t_out: f64,
    t_sky: f64,
    params: &PlantParams,
) -> Result<f64, ModelError> {
    if q_val < 0.0 {
        return Err(ModelError::NegativeSource { value: q_val });
    }
    Ok(q_val + params.beta1() * t_out + params.beta2() * t_sky.powi(4))
}

/// Velocity gradient `F(f, rho) = (f - beta1 (gamma - rho) - beta2 (gamma - rho)^4) / rho^2`.
///
/// This is the right-hand side of the velocity equation `du/dx = F`; it
/// balances the absorbed power against convective and radiative losses.
pub fn velocity_gradient(f_val: f64, rho: f64, params: &PlantParams) -> Result<f64, ModelError> {
    if rho <= 0.0 {
        return Err(ModelError::VacuumDensity { value: rho });
    }
    let y = params.gamma() - rho;
    Ok((f_val - params.beta1() * y - params.beta2() * y.powi(4)) / (rho * rho))
}

/// Temperature closure `T = gamma - rho`.
pub fn temperature_from_density(rho: f64, params: &PlantParams) -> f64 {
    params.gamma() - rho
}

/// Which admissibility condition a sample violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// `f(t, x) < 0`.
    ForcingNegative,
    /// `f(t, x)` above `beta1 (gamma - gamma_star) + beta2 (gamma - gamma_star)^4`.
    ForcingAboveBound,
    /// Initial density outside `[gamma_star, gamma]`.
    InitialDensity,
    /// Left density trace outside `[gamma_star, gamma]`.
    LeftTrace,
    /// Right density trace outside `[gamma_star, gamma]`.
    RightTrace,
}

/// One offending sample point.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityViolation {
    pub kind: ViolationKind,
    pub t: f64,
    /// Spatial coordinate; `None` for trace conditions.
    pub x: Option<f64>,
    pub value: f64,
}

/// Outcome of [`validate_admissibility`]: failures are data, not errors.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    /// `0 <= f <= beta1 (gamma - gamma_star) + beta2 (gamma - gamma_star)^4`
    /// held at every sample.
    pub forcing_ok: bool,
    /// Initial and boundary densities stayed within `[gamma_star, gamma]`.
    pub density_ok: bool,
    pub violations: Vec<AdmissibilityViolation>,
    pub t_samples: usize,
    pub x_samples: usize,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.forcing_ok && self.density_ok
    }
}

impl std::fmt::Display for AdmissibilityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.passed() {
            return write!(
                f,
                "admissibility: PASS ({} time samples x {} space samples)",
                self.t_samples, self.x_samples
            );
        }
        writeln!(
            f,
            "admissibility: FAIL ({} violations over {} time samples x {} space samples)",
            self.violations.len(),
            self.t_samples,
            self.x_samples
        )?;
        for v in self.violations.iter().take(10) {
            match v.x {
                Some(x) => writeln!(
                    f,
                    "  {:?} at t = {}, x = {}: value {}",
                    v.kind, v.t, x, v.value
                )?,
                None => writeln!(f, "  {:?} at t = {}: value {}", v.kind, v.t, v.value)?,
            }
        }
        if self.violations.len() > 10 {
            writeln!(f, "  ... and {} more", self.violations.len() - 10)?;
        }
        Ok(())
    }
}

/// Checks the barrier assumptions on a sampling set: the forcing bound
/// `0 <= f <= beta1 (gamma - gamma_star) + beta2 (gamma - gamma_star)^4` at
/// every `(t, x)` sample, and `gamma_star <= rho0, rho_left, rho_right <=
/// gamma` at every relevant sample.
///
/// These are exactly the sub/supersolution conditions that confine the
/// density between the barriers, so a passing report is the precondition for
/// the maximum principle of the transient solver.
///
/// Sampling sets must be nonempty; the default choice is all cell centers
/// and all stored time knots ([`Scenario::time_knots`]).
pub fn validate_admissibility(
    scenario: &Scenario,
    params: &PlantParams,
    t_samples: &[f64],
    x_samples: &[f64],
) -> AdmissibilityReport {
    assert!(
        !t_samples.is_empty() && !x_samples.is_empty(),
        "admissibility sampling sets must be nonempty"
    );
    let bound = params.forcing_bound();
    let lo = params.gamma_star();
    let hi = params.gamma();
    let mut violations = Vec::new();
    let mut forcing_ok = true;
    let mut density_ok = true;

    for &t in t_samples {
        let t_out = scenario.t_out.eval(t);
        let t_sky = scenario.t_sky.eval(t);
        for &x in x_samples {
            let q = scenario.source.eval(t, x);
            let f_val = q + params.beta1() * t_out + params.beta2() * t_sky.powi(4);
            if f_val < 0.0 {
                forcing_ok = false;
                violations.push(AdmissibilityViolation {
                    kind: ViolationKind::ForcingNegative,
                    t,
                    x: Some(x),
                    value: f_val,
                });
            } else if f_val > bound {
                forcing_ok = false;
                violations.push(AdmissibilityViolation {
                    kind: ViolationKind::ForcingAboveBound,
                    t,
                    x: Some(x),
                    value: f_val,
                });
            }
        }
        for (kind, table) in [
            (ViolationKind::LeftTrace, &scenario.rho_left),
            (ViolationKind::RightTrace, &scenario.rho_right),
        ] {
            let v = table.eval(t);
            if !(lo..=hi).contains(&v) {
                density_ok = false;
                violations.push(AdmissibilityViolation {
                    kind,
                    t,
                    x: None,
                    value: v,
                });
            }
        }
    }
    for &x in x_samples {
        let v = scenario.rho0.eval(x);
        if !(lo..=hi).contains(&v) {
            density_ok = false;
            violations.push(AdmissibilityViolation {
                kind: ViolationKind::InitialDensity,
                t: 0.0,
                x: Some(x),
                value: v,
            });
        }
    }

    AdmissibilityReport {
        forcing_ok,
        density_ok,
        violations,
        t_samples: t_samples.len(),
        x_samples: x_samples.len(),
    }
}

/// [`validate_admissibility`] with the default sampling: all cell centers
/// (plus the endpoints) and all stored time knots.
pub fn validate_admissibility_default(
    scenario: &Scenario,
    params: &PlantParams,
) -> AdmissibilityReport {
    let t_samples = scenario.time_knots();
    let mut x_samples: Vec<f64> = vec![0.0];
    x_samples.extend(scenario.grid.centers());
    x_samples.push(1.0);
    validate_admissibility(scenario, params, &t_samples, &x_samples)
}
