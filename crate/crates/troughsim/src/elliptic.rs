//! Velocity and pressure reconstruction at a frozen time level.
//!
//! The momentum and velocity equations reduce to a one-parameter family:
//! with `K(x)` the cumulative velocity-gradient source, every solution has
//! `u = K - a` for a scalar offset `a`, and the pressure follows by
//! integrating the friction law. The offset is pinned by the boundary
//! pressures through the strictly increasing map
//!
//! ```text
//! a  ->  alpha * integral_0^1 rho(y) G(a - K(y)) dy  =  p_right - p_left
//! ```
//!
//! so the whole elliptic sub-problem is a monotone scalar root find. The
//! sign convention is `u = -(a - K)`, i.e. `u(0) = -a`.

use thiserror::Error;

use crate::model::{friction_inverse, friction_law, velocity_gradient, Field, ModelError, PlantParams};
use crate::quadrature;

/// Bisect until the bracket is this wide, then switch to safeguarded secant.
const SECANT_SWITCH_WIDTH: f64 = 1e-3;
const MAX_ROOT_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EllipticError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("root bracket [{lo}, {hi}] does not straddle the target (objective {obj_lo}..{obj_hi})")]
    BracketFailure {
        lo: f64,
        hi: f64,
        obj_lo: f64,
        obj_hi: f64,
    },
    #[error("offset solve stalled after {iterations} iterations (residual {residual})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
}

/// Velocity, pressure, and the data that produced them at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticSolution {
    /// Velocity offset `a`; `u(0) = -a`.
    pub offset: f64,
    /// Velocity `u = K - a`, endpoint traces populated.
    pub velocity: Field,
    /// Pressure, `p(0) = p_left` exact, `p(1)` from the full quadrature.
    pub pressure: Field,
    /// Cumulative source `K(x) = integral_0^x F`, traces `K(0) = 0`, `K(1)`.
    pub cumulative_source: Field,
    /// Pointwise velocity-gradient source `F` at cell centers.
    pub velocity_gradient: Field,
    /// Max-norm of the discrete momentum identity `dp/dx + alpha rho u |u|`
    /// at interior faces.
    pub residual_momentum: f64,
    /// Max-norm of the discrete velocity identity `du/dx - F` at interior
    /// faces.
    pub residual_velocity: f64,
    /// `|p(1) - p_right|`.
    pub residual_bc: f64,
}

/// Cumulative source `K(x_i) = integral_0^{x_i} F(z, rho(z)) dz` with the
/// configured quadrature; `K` carries traces `K(0) = 0` and `K(1)`.
pub fn cumulative_source(
    rho: &Field,
    forcing: &Field,
    params: &PlantParams,
) -> Result<Field, ModelError> {
    let n = rho.len();
    debug_assert_eq!(forcing.len(), n);
    let dx = 1.0 / n as f64;
    let mut f_vals = Vec::with_capacity(n);
    for i in 0..n {
        f_vals.push(velocity_gradient(forcing[i], rho[i], params)?);
    }
    let partials = quadrature::cumulative_at_centers(&f_vals, dx);
    let total = quadrature::integrate(&f_vals, dx);
    Ok(Field::from_values(partials).with_traces(0.0, total))
}

fn objective(a: f64, rho: &Field, k: &Field, params: &PlantParams) -> f64 {
    let n = rho.len();
    let dx = 1.0 / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        acc += rho[i] * friction_law(a - k[i]);
    }
    params.alpha() * acc * dx
}

/// Solves `alpha * integral rho G(a - K) = p_right - p_left` for the unique
/// offset `a`.
///
/// The objective is strictly increasing in `a` (positive density times a
/// strictly increasing friction law), so a bracket plus bisection is
/// unconditionally safe; once the bracket is narrow a safeguarded secant
/// finishes the job. `tol` is an absolute tolerance on the objective.
///
/// The initial bracket comes from the velocity bounds: with `T` the target
/// pressure difference, the root satisfies
/// `min(g(T/(alpha gamma)), g(T/(alpha gamma_star))) - ||K|| <= a <=
///  max(g(T/(alpha gamma)), g(T/(alpha gamma_star))) + ||K||`.
pub fn solve_velocity_offset(
    rho: &Field,
    k: &Field,
    p_left: f64,
    p_right: f64,
    params: &PlantParams,
    tol: f64,
) -> Result<f64, EllipticError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(EllipticError::InvalidTolerance(tol));
    }
    let target = p_right - p_left;
    let k_max = k.max_abs().max(k.right_trace().map_or(0.0, f64::abs));
    let c1 = friction_inverse(target / (params.alpha() * params.gamma()));
    let c2 = friction_inverse(target / (params.alpha() * params.gamma_star()));
    let mut lo = c1.min(c2) - k_max;
    let mut hi = c1.max(c2) + k_max;

    let f = |a: f64| objective(a, rho, k, params) - target;
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    // The analytic bracket can graze the root at round-off; widen a little
    // before reporting failure.
    let mut widen = (hi - lo).max(1.0);
    for _ in 0..8 {
        if f_lo <= 0.0 && f_hi >= 0.0 {
            break;
        }
        lo -= widen;
        hi += widen;
        widen *= 2.0;
        f_lo = f(lo);
        f_hi = f(hi);
    }
    if !(f_lo <= 0.0 && f_hi >= 0.0) {
        return Err(EllipticError::BracketFailure {
            lo,
            hi,
            obj_lo: f_lo + target,
            obj_hi: f_hi + target,
        });
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }

    let mut a = 0.5 * (lo + hi);
    let mut f_a = f(a);
    for _ in 0..MAX_ROOT_ITERATIONS {
        if f_a.abs() <= tol {
            return Ok(a);
        }
        if f_a > 0.0 {
            hi = a;
            f_hi = f_a;
        } else {
            lo = a;
            f_lo = f_a;
        }
        let a_prev = a;
        if hi - lo > SECANT_SWITCH_WIDTH {
            a = 0.5 * (lo + hi);
        } else {
            // Secant step from the bracket endpoints, clamped back to
            // bisection whenever it leaves or stalls.
            let denom = f_hi - f_lo;
            let secant = if denom != 0.0 {
                hi - f_hi * (hi - lo) / denom
            } else {
                0.5 * (lo + hi)
            };
            a = if secant.is_finite() && secant > lo && secant < hi {
                secant
            } else {
                0.5 * (lo + hi)
            };
            if a == a_prev {
                a = 0.5 * (lo + hi);
            }
        }
        f_a = f(a);
        if hi - lo < f64::EPSILON * (1.0 + a.abs()) && f_a.abs() > tol {
            // Bracket exhausted at machine resolution.
            break;
        }
    }
    if f_a.abs() <= tol {
        Ok(a)
    } else {
        Err(EllipticError::NonConvergence {
            iterations: MAX_ROOT_ITERATIONS,
            residual: f_a.abs(),
        })
    }
}

/// Rebuilds velocity and pressure from a solved offset:
/// `u = K - a` and `p(x) = p_left + alpha * integral_0^x rho G(a - K)`.
///
/// Expects `offset` produced by [`solve_velocity_offset`] for the same
/// inputs; all three residual diagnostics are populated.
pub fn reconstruct_fields(
    rho: &Field,
    offset: f64,
    k: &Field,
    forcing: &Field,
    p_left: f64,
    p_right: f64,
    params: &PlantParams,
) -> Result<EllipticSolution, ModelError> {
    let n = rho.len();
    let dx = 1.0 / n as f64;
    let alpha = params.alpha();

    let mut u_vals = Vec::with_capacity(n);
    let mut w_vals = Vec::with_capacity(n);
    let mut f_vals = Vec::with_capacity(n);
    for i in 0..n {
        u_vals.push(k[i] - offset);
        w_vals.push(rho[i] * friction_law(offset - k[i]));
        f_vals.push(velocity_gradient(forcing[i], rho[i], params)?);
    }
    let k_right = k.right_trace().unwrap_or(k[n - 1]);
    let velocity = Field::from_values(u_vals).with_traces(-offset, k_right - offset);

    let p_partials = quadrature::cumulative_at_centers(&w_vals, dx);
    let p_vals: Vec<f64> = p_partials.iter().map(|c| p_left + alpha * c).collect();
    let p_total = p_left + alpha * quadrature::integrate(&w_vals, dx);
    let pressure = Field::from_values(p_vals).with_traces(p_left, p_total);

    // Face-centered residuals: both identities hold to second order on
    // smooth data, which is what the refinement tests pin down.
    let mut residual_momentum = 0.0f64;
    let mut residual_velocity = 0.0f64;
    for i in 0..n.saturating_sub(1) {
        let rho_face = 0.5 * (rho[i] + rho[i + 1]);
        let u_face = 0.5 * (velocity[i] + velocity[i + 1]);
        let dp = (pressure[i + 1] - pressure[i]) / dx;
        residual_momentum =
            residual_momentum.max((dp + alpha * rho_face * friction_law(u_face)).abs());
        let f_face = 0.5 * (forcing[i] + forcing[i + 1]);
        let grad_face = velocity_gradient(f_face, rho_face, params)?;
        let du = (velocity[i + 1] - velocity[i]) / dx;
        residual_velocity = residual_velocity.max((du - grad_face).abs());
    }

    Ok(EllipticSolution {
        offset,
        velocity,
        pressure,
        cumulative_source: k.clone(),
        velocity_gradient: Field::from_values(f_vals),
        residual_momentum,
        residual_velocity,
        residual_bc: (p_total - p_right).abs(),
    })
}

/// One full elliptic solve: cumulative source, offset root find, field
/// reconstruction.
pub fn solve_elliptic(
    rho: &Field,
    forcing: &Field,
    p_left: f64,
    p_right: f64,
    params: &PlantParams,
    tol: f64,
) -> Result<EllipticSolution, EllipticError> {
    let k = cumulative_source(rho, forcing, params)?;
    let offset = solve_velocity_offset(rho, &k, p_left, p_right, params, tol)?;
    Ok(reconstruct_fields(
        rho, offset, &k, forcing, p_left, p_right, params,
    )?)
}
