//! Total variation, BV norm, Jordan decomposition, unbounded-variation-point detection
//! and the operator-norm bound for the fractional integral.
//!
//! Discrete total variation over a grid is the variation of the piecewise-linear
//! interpolant, which is the supremum over partitions drawn from the grid nodes. For a
//! general continuous function it is a lower bound of the true variation; it is exact for
//! piecewise-linear inputs whose breakpoints are nodes.

mod bound;
mod jordan;
mod profile;

pub use bound::{bound_constant, bound_epsilon, operator_bound_check, OperatorBoundReport};
pub use jordan::jordan_decompose;
pub use profile::{
    detect_uvp, tv_on_nodes, tv_window, variation_profile, Classification, DetectOptions, ProfileLevel,
    Thresholds, UvpDetection, VariationReport, WindowTv,
};

use crate::error::{Error, Result};
use crate::funcspace::SampledFunction;
use crate::special::CompensatedSum;

/// `Σ_{i=lo+1}^{hi} |f_i - f_{i-1}|`.
pub fn discrete_tv(f: &SampledFunction, i_lo: usize, i_hi: usize) -> Result<f64> {
    let n = f.grid().n();
    if i_lo > i_hi {
        return Err(Error::IndexOrder { lo: i_lo, hi: i_hi });
    }
    if i_hi > n {
        return Err(Error::IndexOutOfRange { index: i_hi, max: n });
    }
    Ok(abs_increments(&f.values()[i_lo..=i_hi]))
}

pub(crate) fn abs_increments(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).collect::<CompensatedSum>().value()
}

/// `|f(a)| + V(f, [a, b])` on the grid.
pub fn bv_norm(f: &SampledFunction) -> f64 {
    f.values()[0].abs() + abs_increments(f.values())
}
