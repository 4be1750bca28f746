//! Riemann–Liouville fractional integral on uniform grids.
//!
//! The integral `(1/Γ(α)) ∫_a^x (x-t)^(α-1) f(t) dt` is evaluated by product quadrature:
//! the kernel is integrated exactly against the piecewise-linear interpolant of the
//! samples. With `p = α + 1` and `C = h^α / Γ(α+2)` the weights for target node `i` are
//!
//! ```text
//! w_{i,0} = C · [(i-1)^p - (i-1-α) i^α]
//! w_{i,j} = C · [(k+1)^p - 2 k^p + (k-1)^p],   k = i - j,  0 < j < i
//! w_{i,i} = C
//! ```
//!
//! Both brackets are second-order remainders of a binomial expansion and are evaluated
//! through [`pow1p_tail2`] so they keep full precision for large indices.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcspace::{sample, FunctionHandle, Grid, SampledFunction};
use crate::special::{gamma, pow1p_tail2, CompensatedSum};

/// Order of the fractional integral, `α > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidOrder(alpha))
        }
    }

    pub fn alpha(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FracOrder {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

/// Quadrature weights for one target node.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightRow {
    pub target_index: usize,
    /// `weights[j]` multiplies the sample at node `j`, `j = 0..=target_index`.
    pub weights: Vec<f64>,
}

impl WeightRow {
    pub fn apply(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).collect::<CompensatedSum>().value()
    }
}

fn interior_coef(p: f64, k: usize) -> f64 {
    let kf = k as f64;
    let x = kf.recip();
    kf.powf(p) * (pow1p_tail2(p, x) + pow1p_tail2(p, -x))
}

fn first_coef(p: f64, i: usize) -> f64 {
    let fi = i as f64;
    fi.powf(p) * pow1p_tail2(p, -fi.recip())
}

fn weight_scale(grid: &Grid, order: FracOrder) -> f64 {
    let alpha = order.alpha();
    grid.h().powf(alpha) / gamma(alpha + 2.0)
}

/// Weights of node `i`, computed directly.
pub fn rl_weights(grid: &Grid, order: FracOrder, i: usize) -> Result<WeightRow> {
    if i > grid.n() {
        return Err(Error::IndexOutOfRange { index: i, max: grid.n() });
    }
    if i == 0 {
        return Ok(WeightRow { target_index: 0, weights: vec![0.0] });
    }
    let p = order.alpha() + 1.0;
    let scale = weight_scale(grid, order);
    let mut weights = Vec::with_capacity(i + 1);
    weights.push(scale * first_coef(p, i));
    weights.extend((1..i).map(|j| scale * interior_coef(p, i - j)));
    weights.push(scale);
    Ok(WeightRow { target_index: i, weights })
}

/// Weights for every node of a grid in `O(n)` memory.
///
/// Interior weights depend only on `i - j`, so one vector indexed by that distance plus
/// one vector of first-node weights covers the whole lower-triangular table.
#[derive(Debug, Clone)]
pub struct KernelWeights {
    grid: Grid,
    order: FracOrder,
    scale: f64,
    first: Vec<f64>,
    interior: Vec<f64>,
}

impl KernelWeights {
    pub fn new(grid: &Grid, order: FracOrder) -> Self {
        let n = grid.n();
        let p = order.alpha() + 1.0;
        let scale = weight_scale(grid, order);
        let mut first = vec![0.0; n + 1];
        let mut interior = vec![0.0; n + 1];
        first[1..].par_iter_mut().enumerate().for_each(|(i, w)| *w = scale * first_coef(p, i + 1));
        interior[1..].par_iter_mut().enumerate().for_each(|(k, w)| *w = scale * interior_coef(p, k + 1));
        Self { grid: *grid, order, scale, first, interior }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn order(&self) -> FracOrder {
        self.order
    }

    /// Same numbers as [`rl_weights`] for node `i`.
    pub fn row(&self, i: usize) -> WeightRow {
        if i == 0 {
            return WeightRow { target_index: 0, weights: vec![0.0] };
        }
        let mut weights = Vec::with_capacity(i + 1);
        weights.push(self.first[i]);
        weights.extend((1..i).map(|j| self.interior[i - j]));
        weights.push(self.scale);
        WeightRow { target_index: i, weights }
    }

    /// Weighted sum for node `i`; sequential compensated summation in index order.
    pub fn apply(&self, values: &[f64], i: usize) -> f64 {
        if i == 0 {
            return 0.0;
        }
        let mut acc = CompensatedSum::new();
        acc.add(self.first[i] * values[0]);
        for j in 1..i {
            acc.add(self.interior[i - j] * values[j]);
        }
        acc.add(self.scale * values[i]);
        acc.value()
    }
}

/// Precomputed full weight table; `O(n^2)` memory for repeated queries on small grids.
#[derive(Debug, Clone)]
pub struct WeightTable {
    rows: Vec<WeightRow>,
}

impl WeightTable {
    pub fn precompute(grid: &Grid, order: FracOrder) -> Self {
        let kw = KernelWeights::new(grid, order);
        Self { rows: (0..=grid.n()).map(|i| kw.row(i)).collect() }
    }

    pub fn row(&self, i: usize) -> Option<&WeightRow> {
        self.rows.get(i)
    }

    pub fn apply(&self, f: &SampledFunction) -> Vec<f64> {
        self.rows.iter().map(|r| r.apply(f.values())).collect()
    }
}

fn check_finite(f: &SampledFunction) -> Result<()> {
    match f.first_non_finite() {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// `I_a^α f` at every node of `f`'s grid, with `a` the left end of the grid.
///
/// Node 0 is exactly zero. Nodes are evaluated in parallel; each node sums sequentially,
/// so results do not depend on the worker count.
pub fn rl_integral(f: &SampledFunction, order: FracOrder) -> Result<SampledFunction> {
    check_finite(f)?;
    let weights = KernelWeights::new(f.grid(), order);
    let values = f.values();
    let out: Vec<f64> = (0..=f.grid().n()).into_par_iter().map(|i| weights.apply(values, i)).collect();
    SampledFunction::new(*f.grid(), out)
}

/// `I_a^α f(x)` on a dedicated `n`-cell grid over `[a, x]`.
pub fn rl_integral_at(f: &FunctionHandle, order: FracOrder, a: f64, x: f64, n: usize) -> Result<f64> {
    if !(x >= a) {
        return Err(Error::Precondition(format!("need x >= a, got x = {x}, a = {a}")));
    }
    if n == 0 {
        return Err(Error::InvalidGrid("need at least one subinterval".into()));
    }
    if x == a {
        return Ok(0.0);
    }
    let grid = Grid::new(a, x, n)?;
    let samples = sample(f, &grid)?;
    check_finite(&samples)?;
    let row = rl_weights(&grid, order, n)?;
    Ok(row.apply(samples.values()))
}

/// `max_i |I^α(I^β f)(x_i) - I^(α+β) f(x_i)|` with the inner integral kept as samples.
pub fn semigroup_residual(f: &FunctionHandle, alpha: FracOrder, beta: FracOrder, grid: &Grid) -> Result<f64> {
    semigroup_residual_sampled(&sample(f, grid)?, alpha, beta)
}

pub fn semigroup_residual_sampled(f: &SampledFunction, alpha: FracOrder, beta: FracOrder) -> Result<f64> {
    let inner = rl_integral(f, beta)?;
    let chained = rl_integral(&inner, alpha)?;
    let direct = rl_integral(f, FracOrder::new(alpha.alpha() + beta.alpha())?)?;
    Ok(chained
        .values()
        .iter()
        .zip(direct.values())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
}

/// Outcome of checking that the image of a non-negative, non-decreasing sample is
/// non-decreasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneImageCheck {
    pub passed: bool,
    /// First pair `(i, i+1)` whose increment falls below `-tolerance`.
    pub witness: Option<(usize, usize)>,
    pub min_increment: f64,
    pub tolerance: f64,
}

/// Tolerance `h^2 (1 + ‖g‖_∞) · 10` used by [`monotone_image_check`].
pub fn monotone_tolerance(g: &SampledFunction) -> f64 {
    let h = g.grid().h();
    h * h * (1.0 + g.sup_norm()) * 10.0
}

pub fn monotone_image_check(g: &SampledFunction, order: FracOrder) -> Result<MonotoneImageCheck> {
    let v = g.values();
    if v[0] < 0.0 {
        return Err(Error::Precondition(format!("g(a) = {} is negative", v[0])));
    }
    if let Some(i) = v.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::Precondition(format!("g decreases between nodes {i} and {}", i + 1)));
    }
    let image = rl_integral(g, order)?;
    let tolerance = monotone_tolerance(g);
    let mut min_increment = f64::INFINITY;
    let mut witness = None;
    for (i, w) in image.values().windows(2).enumerate() {
        let d = w[1] - w[0];
        min_increment = min_increment.min(d);
        if witness.is_none() && d < -tolerance {
            witness = Some((i, i + 1));
        }
    }
    Ok(MonotoneImageCheck { passed: witness.is_none(), witness, min_increment, tolerance })
}

/// The image `I_a^α f` on an `n`-cell grid over the handle's domain, re-interpolated as a
/// piecewise-linear handle. Singular points of `f` carry over as candidate hints.
pub fn image_handle(f: &FunctionHandle, order: FracOrder, n: usize) -> Result<FunctionHandle> {
    let (a, b) = f.domain();
    let grid = Grid::new(a, b, n)?;
    let image = rl_integral(&sample(f, &grid)?, order)?;
    let name = format!("I^{}[{}]", order.alpha(), f.describe());
    Ok(FunctionHandle::tabulated(name, image, f.singular_points()))
}
