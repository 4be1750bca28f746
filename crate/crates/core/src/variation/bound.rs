use serde::Serialize;

use super::bv_norm;
use crate::error::Result;
use crate::fracint::{rl_integral, FracOrder};
use crate::funcspace::SampledFunction;
use crate::special::gamma;

/// Measured BV norms of `f` and `I_a^α f` against the operator bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorBoundReport {
    pub alpha: f64,
    pub interval: (f64, f64),
    pub f_bv: f64,
    pub image_bv: f64,
    pub constant: f64,
    /// `image_bv / (constant · f_bv)`, 0 for the zero function.
    pub ratio: f64,
    pub epsilon: f64,
    pub within_bound: bool,
    /// `Some(false)` when the sample came from a catalog function with a discontinuity.
    pub continuous: Option<bool>,
}

/// `2 max{V(g), (b-a)^α} / Γ(α+1)` with `g(x) = (x-a)^α`; since `g` increases from 0,
/// `V(g) = (b-a)^α` and the constant is `2 (b-a)^α / Γ(α+1)`.
pub fn bound_constant(a: f64, b: f64, order: FracOrder) -> f64 {
    let alpha = order.alpha();
    let span = (b - a).powf(alpha);
    let var_g = span - 0.0;
    2.0 * var_g.max(span) / gamma(alpha + 1.0)
}

/// Slack `1e-6 + 10 h^min(α,1) ‖f‖_BV` for quadrature error in the image variation.
pub fn bound_epsilon(h: f64, order: FracOrder, f_bv: f64) -> f64 {
    1e-6 + 10.0 * h.powf(order.alpha().min(1.0)) * f_bv
}

pub fn operator_bound_check(f: &SampledFunction, order: FracOrder) -> Result<OperatorBoundReport> {
    let grid = f.grid();
    let f_bv = bv_norm(f);
    let image_bv = bv_norm(&rl_integral(f, order)?);
    let constant = bound_constant(grid.a(), grid.b(), order);
    let ratio = if f_bv == 0.0 { 0.0 } else { image_bv / (constant * f_bv) };
    let epsilon = bound_epsilon(grid.h(), order, f_bv);
    Ok(OperatorBoundReport {
        alpha: order.alpha(),
        interval: (grid.a(), grid.b()),
        f_bv,
        image_bv,
        constant,
        ratio,
        epsilon,
        within_bound: ratio <= 1.0 + epsilon,
        continuous: f.source().map(|s| s.is_continuous()),
    })
}
