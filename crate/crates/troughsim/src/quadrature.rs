//! The one quadrature rule used throughout: composite trapezoid between
//! cell centers with constant extension on the two boundary half-cells.
//!
//! For the full interval the rule collapses to the midpoint sum
//! `dx * sum(values)`, which is second order for smooth integrands and,
//! crucially, preserves monotonicity of integrands in a parameter (the root
//! objectives built on it stay strictly monotone).

/// Integral over `[0, 1]` of a field sampled at cell centers.
pub fn integrate(values: &[f64], dx: f64) -> f64 {
    values.iter().sum::<f64>() * dx
}

/// Cumulative integrals `c_i = integral from 0 to x_i`, where `x_i` are the
/// cell centers. The first half-cell contributes `values[0] * dx / 2`; each
/// subsequent center adds a trapezoid between neighbors.
pub fn cumulative_at_centers(values: &[f64], dx: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    if values.is_empty() {
        return out;
    }
    let mut acc = 0.5 * dx * values[0];
    out.push(acc);
    for i in 1..values.len() {
        acc += 0.5 * dx * (values[i - 1] + values[i]);
        out.push(acc);
    }
    out
}
