use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform partition of `[a, b]` into `n` subintervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidGrid(format!("non-finite endpoint [{a}, {b}]")));
        }
        if a >= b {
            return Err(Error::InvalidGrid(format!("need a < b, got [{a}, {b}]")));
        }
        if n == 0 {
            return Err(Error::InvalidGrid("need at least one subinterval".into()));
        }
        let h = (b - a) / n as f64;
        if h <= 0.0 {
            return Err(Error::InvalidGrid(format!("spacing underflows for n = {n}")));
        }
        Ok(Self { a, b, n, h })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node `i`; the last node is `b` itself.
    ///
    /// Nodes are `a + i*h`; since halving `h` is exact, node `2i` of the refined grid is
    /// bit-identical to node `i` here.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n);
        if i == self.n {
            self.b
        } else {
            self.a + i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |i| self.node(i))
    }

    /// Dyadic refinement: same interval, twice the subintervals.
    pub fn refine(&self) -> Self {
        Self {
            a: self.a,
            b: self.b,
            n: 2 * self.n,
            h: (self.b - self.a) / (2 * self.n) as f64,
        }
    }

    /// Index of the cell containing `x`, clamped to `0..n`.
    pub(crate) fn cell_of(&self, x: f64) -> usize {
        let raw = ((x - self.a) / self.h).floor();
        let mut i = if raw <= 0.0 {
            0
        } else {
            (raw as usize).min(self.n - 1)
        };
        if i + 1 < self.n && x >= self.node(i + 1) {
            i += 1;
        }
        while i > 0 && x < self.node(i) {
            i -= 1;
        }
        i
    }
}
