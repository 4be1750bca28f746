//! Analytic test functions addressable by name.
//!
//! The catalog vocabulary (`constant`, `linear`, `power`, `sin_recip`,
//! `piecewise_linear_random`, `weierstrass`, `takagi`) is also what the command line
//! accepts after `--function`. Every entry takes the shared parameters `a`, `b` (domain,
//! default `[0, 1]`) and `scale` (output multiplier, default 1).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Grid, SampledFunction};
use crate::error::{Error, Result};

pub type Params = BTreeMap<String, f64>;

pub const CATALOG_NAMES: [&str; 7] = [
    "constant",
    "linear",
    "power",
    "sin_recip",
    "piecewise_linear_random",
    "weierstrass",
    "takagi",
];

#[derive(Debug, Clone)]
enum Kind {
    Constant(f64),
    Linear { slope: f64, intercept: f64 },
    Power { beta: f64 },
    SinRecip,
    PiecewiseLinear { knots: Grid, values: Arc<Vec<f64>> },
    Weierstrass { hurst: f64, lambda: f64, terms: u32 },
    Takagi { w: f64, terms: u32 },
    Tabulated { sample: Arc<SampledFunction>, singular: Arc<Vec<f64>> },
}

/// A named, deterministic function on a closed interval.
#[derive(Debug, Clone)]
pub struct FunctionHandle {
    name: String,
    params: Params,
    domain: (f64, f64),
    scale: f64,
    kind: Kind,
}

impl PartialEq for FunctionHandle {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.params == other.params && self.domain == other.domain
    }
}

struct ParamReader<'a> {
    function: &'a str,
    given: &'a Params,
    allowed: Vec<&'static str>,
}

impl<'a> ParamReader<'a> {
    fn new(function: &'a str, given: &'a Params, allowed: &[&'static str]) -> Result<Self> {
        let mut all = vec!["a", "b", "scale"];
        all.extend_from_slice(allowed);
        for key in given.keys() {
            if !all.contains(&key.as_str()) {
                return Err(invalid(function, format!("unknown parameter `{key}`")));
            }
        }
        for (key, v) in given {
            if !v.is_finite() {
                return Err(invalid(function, format!("parameter `{key}` is not finite")));
            }
        }
        Ok(Self { function, given, allowed: all })
    }

    fn real(&self, key: &str, default: f64) -> f64 {
        debug_assert!(self.allowed.contains(&key));
        self.given.get(key).copied().unwrap_or(default)
    }

    fn count(&self, key: &str, default: u64) -> Result<u64> {
        match self.given.get(key) {
            None => Ok(default),
            Some(&v) if v >= 0.0 && v == v.trunc() && v <= 9.007_199_254_740_992e15 => Ok(v as u64),
            Some(&v) => Err(invalid(self.function, format!("`{key}` must be a non-negative integer, got {v}"))),
        }
    }
}

fn invalid(function: &str, message: String) -> Error {
    Error::InvalidParam { function: function.to_string(), message }
}

/// Look up a catalog function by name.
pub fn catalog_lookup(name: &str, params: &Params) -> Result<FunctionHandle> {
    let (kind, reader) = match name {
        "constant" => {
            let r = ParamReader::new(name, params, &["c"])?;
            (Kind::Constant(r.real("c", 1.0)), r)
        }
        "linear" => {
            let r = ParamReader::new(name, params, &["slope", "intercept"])?;
            (Kind::Linear { slope: r.real("slope", 1.0), intercept: r.real("intercept", 0.0) }, r)
        }
        "power" => {
            let r = ParamReader::new(name, params, &["beta"])?;
            let beta = r.real("beta", 1.0);
            if beta <= -1.0 {
                return Err(invalid(name, format!("beta must exceed -1, got {beta}")));
            }
            (Kind::Power { beta }, r)
        }
        "sin_recip" => {
            let r = ParamReader::new(name, params, &[])?;
            (Kind::SinRecip, r)
        }
        "piecewise_linear_random" => {
            let r = ParamReader::new(name, params, &["k", "seed"])?;
            let k = r.count("k", 8)?;
            if k == 0 || k > 1 << 24 {
                return Err(invalid(name, format!("k must lie in 1..=2^24, got {k}")));
            }
            let seed = r.count("seed", 0)?;
            let (a, b) = (r.real("a", 0.0), r.real("b", 1.0));
            let pieces = (k as usize).next_power_of_two();
            let knots = Grid::new(a, b, pieces)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values: Vec<f64> = (0..=pieces).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (Kind::PiecewiseLinear { knots, values: Arc::new(values) }, r)
        }
        "weierstrass" => {
            let r = ParamReader::new(name, params, &["H", "lambda", "terms"])?;
            let hurst = r.real("H", 0.5);
            let lambda = r.real("lambda", 2.0);
            let terms = r.count("terms", 24)?;
            if !(hurst > 0.0 && hurst < 1.0) {
                return Err(invalid(name, format!("H must lie in (0, 1), got {hurst}")));
            }
            if lambda <= 1.0 {
                return Err(invalid(name, format!("lambda must exceed 1, got {lambda}")));
            }
            if terms == 0 || terms > 64 {
                return Err(invalid(name, format!("terms must lie in 1..=64, got {terms}")));
            }
            (Kind::Weierstrass { hurst, lambda, terms: terms as u32 }, r)
        }
        "takagi" => {
            let r = ParamReader::new(name, params, &["w", "terms"])?;
            let w = r.real("w", 0.5);
            let terms = r.count("terms", 24)?;
            if !(w > 0.0 && w <= 1.0) {
                return Err(invalid(name, format!("w must lie in (0, 1], got {w}")));
            }
            if terms == 0 || terms > 52 {
                return Err(invalid(name, format!("terms must lie in 1..=52, got {terms}")));
            }
            (Kind::Takagi { w, terms: terms as u32 }, r)
        }
        other => return Err(Error::UnknownFunction(other.to_string())),
    };

    let a = reader.real("a", 0.0);
    let b = reader.real("b", 1.0);
    if a >= b {
        return Err(invalid(name, format!("domain needs a < b, got [{a}, {b}]")));
    }
    if let Kind::Power { beta } = kind {
        if a < 0.0 {
            return Err(invalid(name, "power is defined on x >= 0 only".into()));
        }
        if beta < 0.0 && a <= 0.0 {
            return Err(invalid(name, "negative beta needs a domain with a > 0".into()));
        }
    }
    let scale = reader.real("scale", 1.0);
    let mut stored = params.clone();
    stored.remove("a");
    stored.remove("b");
    Ok(FunctionHandle { name: name.to_string(), params: stored, domain: (a, b), scale, kind })
}

/// Parse `name` or `name:key=value,key=value` and look it up.
pub fn parse_function_spec(spec: &str) -> Result<FunctionHandle> {
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n.trim(), r.trim()),
        None => (spec.trim(), ""),
    };
    let mut params = Params::new();
    for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| invalid(name, format!("expected key=value, got `{item}`")))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| invalid(name, format!("`{}` is not a number", v.trim())))?;
        if params.insert(k.trim().to_string(), value).is_some() {
            return Err(invalid(name, format!("parameter `{}` given twice", k.trim())));
        }
    }
    catalog_lookup(name, &params)
}

impl FunctionHandle {
    /// Wrap a sampled function as a handle evaluating its piecewise-linear interpolant.
    ///
    /// `singular` lists candidate points inherited from the source so that detectors scan
    /// the same points on a function and on its image.
    pub fn tabulated(name: impl Into<String>, sample: SampledFunction, singular: Vec<f64>) -> Self {
        let grid = *sample.grid();
        Self {
            name: name.into(),
            params: Params::new(),
            domain: (grid.a(), grid.b()),
            scale: 1.0,
            kind: Kind::Tabulated { sample: Arc::new(sample), singular: Arc::new(singular) },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Evaluate at `x`. Pure: the same handle and `x` always give the same value.
    pub fn eval(&self, x: f64) -> f64 {
        self.scale * self.eval_unscaled(x)
    }

    fn eval_unscaled(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Constant(c) => *c,
            Kind::Linear { slope, intercept } => slope * x + intercept,
            Kind::Power { beta } => {
                if *beta == 0.0 {
                    1.0
                } else {
                    x.powf(*beta)
                }
            }
            Kind::SinRecip => {
                if x == 0.0 {
                    0.0
                } else {
                    x.recip().sin()
                }
            }
            Kind::PiecewiseLinear { knots, values } => interpolate(knots, values, x),
            Kind::Weierstrass { hurst, lambda, terms } => {
                let mut acc = 0.0;
                let mut freq = 1.0;
                let decay = lambda.powf(-hurst);
                let mut amp = 1.0;
                for _ in 0..*terms {
                    // reduce the phase first so large frequencies keep their precision
                    let phase = (freq * x).rem_euclid(1.0);
                    acc += amp * (2.0 * PI * phase).cos();
                    freq *= lambda;
                    amp *= decay;
                }
                acc
            }
            Kind::Takagi { w, terms } => {
                let mut acc = 0.0;
                let mut amp = 1.0;
                let mut y = x;
                for _ in 0..*terms {
                    let frac = y.rem_euclid(1.0);
                    acc += amp * frac.min(1.0 - frac);
                    y *= 2.0;
                    amp *= w;
                }
                acc
            }
            Kind::Tabulated { sample, .. } => interpolate(sample.grid(), sample.values(), x),
        }
    }

    /// Whether the function is continuous on its whole domain.
    pub fn is_continuous(&self) -> bool {
        match self.kind {
            Kind::SinRecip => !(self.domain.0 <= 0.0 && 0.0 <= self.domain.1),
            _ => true,
        }
    }

    /// Points of the domain the function itself flags as singular.
    pub fn singular_points(&self) -> Vec<f64> {
        match &self.kind {
            Kind::SinRecip if self.domain.0 <= 0.0 && 0.0 <= self.domain.1 => vec![0.0],
            Kind::Tabulated { singular, .. } => singular.as_ref().clone(),
            _ => Vec::new(),
        }
    }

    /// Whether [`extrema`](Self::extrema) returns anything for this handle.
    pub fn has_extrema(&self) -> bool {
        matches!(self.kind, Kind::SinRecip)
    }

    /// Known local extrema in `[lo, hi]` whose distance to the neighbouring extremum is at
    /// least `min_separation`.
    ///
    /// Only `sin_recip` declares extrema: `t_k = ±2/((2k+1)π)`. A positive separation caps
    /// the otherwise infinite set near the origin.
    pub fn extrema(&self, lo: f64, hi: f64, min_separation: f64) -> Vec<f64> {
        if !self.has_extrema() || lo > hi {
            return Vec::new();
        }
        let mut out = Vec::new();
        if hi > 0.0 {
            out.extend(sin_recip_extrema(lo.max(0.0), hi, min_separation));
        }
        if lo < 0.0 {
            let mut neg: Vec<f64> = sin_recip_extrema((-hi).max(0.0), -lo, min_separation)
                .into_iter()
                .map(|t| -t)
                .collect();
            neg.reverse();
            out.splice(0..0, neg);
        }
        out
    }

    /// `name:key=value,...` with the domain appended; stable across runs.
    pub fn describe(&self) -> String {
        let mut s = self.name.clone();
        let mut sep = ':';
        for (k, v) in &self.params {
            s.push(sep);
            s.push_str(&format!("{k}={v}"));
            sep = ',';
        }
        s.push(sep);
        s.push_str(&format!("a={},b={}", self.domain.0, self.domain.1));
        s
    }
}

impl fmt::Display for FunctionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Positive extrema of sin(1/x) in [lo, hi] (lo >= 0) in increasing order.
fn sin_recip_extrema(lo: f64, hi: f64, min_separation: f64) -> Vec<f64> {
    const CAP: f64 = 1e7;
    if hi <= 0.0 {
        return Vec::new();
    }
    // t_k <= hi  <=>  k >= (2/(pi*hi) - 1)/2
    let k_lo = ((2.0 / (PI * hi) - 1.0) / 2.0).ceil().max(0.0);
    // t_k >= lo
    let mut k_hi = if lo > 0.0 { ((2.0 / (PI * lo) - 1.0) / 2.0).floor() } else { f64::INFINITY };
    // t_k - t_{k+1} = 4 / (pi (2k+1)(2k+3)) >= s
    if min_separation > 0.0 {
        let bound = 4.0 / (PI * min_separation);
        let k_sep = ((bound.sqrt() - 2.0) / 2.0).floor();
        k_hi = k_hi.min(k_sep.max(-1.0));
    }
    let k_hi = k_hi.min(k_lo + CAP);
    if k_hi < k_lo {
        return Vec::new();
    }
    let mut out: Vec<f64> = ((k_lo as u64)..=(k_hi as u64))
        .map(|k| 2.0 / ((2 * k + 1) as f64 * PI))
        .filter(|&t| t >= lo && t <= hi)
        .filter(|&t| {
            if min_separation <= 0.0 {
                return true;
            }
            let k = (2.0 / (PI * t) - 1.0) / 2.0;
            let next = 2.0 / ((2.0 * k + 3.0) * PI);
            t - next >= min_separation
        })
        .collect();
    out.reverse();
    out
}

fn interpolate(grid: &Grid, values: &[f64], x: f64) -> f64 {
    let i = grid.cell_of(x);
    let (x0, x1) = (grid.node(i), grid.node(i + 1));
    if x <= x0 {
        return values[i];
    }
    if x >= x1 {
        return values[i + 1];
    }
    let t = (x - x0) / (x1 - x0);
    values[i] + t * (values[i + 1] - values[i])
}
