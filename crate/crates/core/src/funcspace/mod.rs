//! Grids, the function catalog and sampling.

mod catalog;
mod grid;

pub use catalog::{catalog_lookup, parse_function_spec, FunctionHandle, Params, CATALOG_NAMES};
pub use grid::Grid;

use crate::error::{Error, Result};

/// Convenience constructor mirroring [`Grid::new`].
pub fn make_grid(a: f64, b: f64, n: usize) -> Result<Grid> {
    Grid::new(a, b, n)
}

/// Values of a function at every node of a grid.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<f64>,
    source: Option<FunctionHandle>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values for n = {}, got {}",
                grid.len(),
                grid.n(),
                values.len()
            )));
        }
        Ok(Self { grid, values, source: None })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> Option<&FunctionHandle> {
        self.source.as_ref()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Re-sample the source on another grid (typically a refinement).
    pub fn resample(&self, grid: &Grid) -> Option<Result<SampledFunction>> {
        self.source.as_ref().map(|h| sample(h, grid))
    }

    /// Largest absolute sample.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Index of the first non-finite sample, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    /// Pointwise `lambda * self + mu * other` on the same grid. The result has no source.
    pub fn combine(&self, lambda: f64, other: &SampledFunction, mu: f64) -> Result<SampledFunction> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("combining samples on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| lambda * x + mu * y).collect();
        SampledFunction::new(self.grid, values)
    }
}

/// Evaluate `handle` at every node of `grid`.
pub fn sample(handle: &FunctionHandle, grid: &Grid) -> Result<SampledFunction> {
    let (a, b) = handle.domain();
    if grid.a() < a || grid.b() > b {
        return Err(Error::OutsideDomain { lo: grid.a(), hi: grid.b(), a, b });
    }
    let values = grid.nodes().map(|x| handle.eval(x)).collect();
    Ok(SampledFunction { grid: *grid, values, source: Some(handle.clone()) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sample() {
        let f = parse_function_spec("constant:c=3").unwrap();
        let s = sample(&f, &make_grid(0.0, 1.0, 7).unwrap()).unwrap();
        assert!(s.values().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn linear_sample() {
        let f = parse_function_spec("linear").unwrap();
        let s = sample(&f, &make_grid(0.0, 1.0, 2).unwrap()).unwrap();
        assert_eq!(s.values(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn sin_recip_sample() {
        let f = parse_function_spec("sin_recip").unwrap();
        let s = sample(&f, &make_grid(0.0, 1.0, 4).unwrap()).unwrap();
        let want = [0.0, 4f64.sin(), 2f64.sin(), (4.0f64 / 3.0).sin(), 1f64.sin()];
        for (got, want) in s.values().iter().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn outside_domain_is_rejected() {
        let f = parse_function_spec("linear:a=0,b=1").unwrap();
        let g = make_grid(-0.5, 1.0, 4).unwrap();
        assert!(matches!(sample(&f, &g), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn resampling_refined_grid_matches_shared_nodes() {
        for spec in ["sin_recip", "weierstrass", "piecewise_linear_random:k=8,seed=3", "power:beta=0.5"] {
            let f = parse_function_spec(spec).unwrap();
            let coarse = sample(&f, &make_grid(0.0, 1.0, 24).unwrap()).unwrap();
            let fine = coarse.resample(&coarse.grid().refine().refine()).unwrap().unwrap();
            for (i, v) in coarse.values().iter().enumerate() {
                assert_eq!(fine.values()[4 * i], *v, "{spec} node {i}");
            }
        }
    }

    #[test]
    fn grid_aligned_breakpoints_are_nodes() {
        let f = parse_function_spec("piecewise_linear_random:k=8,seed=9").unwrap();
        let coarse = sample(&f, &make_grid(0.0, 1.0, 8).unwrap()).unwrap();
        let fine = sample(&f, &make_grid(0.0, 1.0, 64).unwrap()).unwrap();
        // between shared breakpoints the fine samples are collinear
        for cell in 0..8 {
            let (l, r) = (coarse.values()[cell], coarse.values()[cell + 1]);
            for j in 0..=8 {
                let want = l + (j as f64 / 8.0) * (r - l);
                assert!((fine.values()[8 * cell + j] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn tabulated_handle_reproduces_nodes() {
        let f = parse_function_spec("sin_recip").unwrap();
        let g = make_grid(0.0, 1.0, 37).unwrap();
        let s = sample(&f, &g).unwrap();
        let t = FunctionHandle::tabulated("tab", s.clone(), vec![0.0]);
        for (i, x) in g.nodes().enumerate() {
            assert_eq!(t.eval(x), s.values()[i]);
        }
        assert_eq!(t.singular_points(), vec![0.0]);
        let mid = 0.5 * (g.node(3) + g.node(4));
        assert!((t.eval(mid) - 0.5 * (s.values()[3] + s.values()[4])).abs() < 1e-15);
    }
}
