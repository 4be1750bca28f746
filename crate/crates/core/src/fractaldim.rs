//! Box-counting dimension of the graph of a sampled function.
//!
//! The graph is first mapped affinely onto the unit square. At level `j` the square is
//! cut into `2^j × 2^j` boxes; in each of the `2^j` columns the boxes between the column's
//! smallest and largest sample are counted. Columns share their boundary samples, so for a
//! piecewise-linear graph the count is exact. The dimension estimate is the least-squares
//! slope of `log N(δ)` against `log(1/δ)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcspace::SampledFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleCount {
    pub j: u32,
    /// Box side in the original abscissa units, `(b - a) 2^-j`.
    pub delta: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxDimEstimate {
    pub scales: Vec<ScaleCount>,
    /// Levels that entered the regression.
    pub fit_levels: (u32, u32),
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDimOptions {
    /// Coarsest levels left out of the fit.
    pub skip_coarse: u32,
}

impl Default for BoxDimOptions {
    fn default() -> Self {
        Self { skip_coarse: 2 }
    }
}

pub fn box_counts(f: &SampledFunction, j_min: u32, j_max: u32) -> Result<Vec<ScaleCount>> {
    if j_min > j_max {
        return Err(Error::Precondition(format!("j_min = {j_min} exceeds j_max = {j_max}")));
    }
    if j_max > 40 {
        return Err(Error::InsufficientResolution(format!("j_max = {j_max} is beyond any grid")));
    }
    let grid = f.grid();
    let n = grid.n();
    let columns_max = 1usize << j_max;
    if n < 4 * columns_max {
        return Err(Error::InsufficientResolution(format!(
            "n = {n} gives fewer than 4 samples per column at level {j_max}; need n >= {}",
            4 * columns_max
        )));
    }
    if n % columns_max != 0 {
        return Err(Error::InsufficientResolution(format!("n = {n} is not divisible by 2^{j_max}")));
    }

    let v = f.values();
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    let range = hi - lo;
    let unit: Vec<f64> = if range > 0.0 { v.iter().map(|x| (x - lo) / range).collect() } else { vec![0.0; v.len()] };

    let span = grid.b() - grid.a();
    let mut out = Vec::with_capacity((j_max - j_min + 1) as usize);
    for j in j_min..=j_max {
        let cols = 1usize << j;
        let per = n / cols;
        let boxes = cols as f64;
        let top = (cols - 1) as f64;
        let mut count = 0u64;
        for c in 0..cols {
            let seg = &unit[c * per..=(c + 1) * per];
            let (mn, mx) = seg.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
            let b_lo = (mn * boxes).floor().min(top);
            let b_hi = (mx * boxes).floor().min(top);
            count += (b_hi - b_lo) as u64 + 1;
        }
        out.push(ScaleCount { j, delta: span * 0.5f64.powi(j as i32), count });
    }
    Ok(out)
}

pub fn box_dimension(f: &SampledFunction, j_min: u32, j_max: u32) -> Result<BoxDimEstimate> {
    box_dimension_with(f, j_min, j_max, &BoxDimOptions::default())
}

pub fn box_dimension_with(f: &SampledFunction, j_min: u32, j_max: u32, opts: &BoxDimOptions) -> Result<BoxDimEstimate> {
    let scales = box_counts(f, j_min, j_max)?;
    let first = j_min + opts.skip_coarse;
    let fit: Vec<(f64, f64)> = scales
        .iter()
        .filter(|s| s.j >= first)
        .map(|s| (s.j as f64 * std::f64::consts::LN_2, (s.count as f64).ln()))
        .collect();
    if fit.len() < 3 {
        return Err(Error::DegenerateRegression(format!(
            "{} levels in the fit after skipping {} coarse ones; need at least 3",
            fit.len(),
            opts.skip_coarse
        )));
    }
    let (slope, intercept, r_squared) = least_squares(&fit);
    Ok(BoxDimEstimate { scales, fit_levels: (first, j_max), slope, intercept, r_squared })
}

/// Ordinary least squares `y = slope x + intercept`; returns `(slope, intercept, r²)`.
fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    (slope, intercept, r_squared)
}

/// CSV scale table with columns `j,delta,count`.
pub fn scale_table_csv(scales: &[ScaleCount]) -> String {
    let mut out = String::from("j,delta,count\n");
    for s in scales {
        out.push_str(&format!("{},{:.16e},{}\n", s.j, s.delta, s.count));
    }
    out
}
