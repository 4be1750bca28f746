//! Local variation profiles and the unbounded-variation-point detector.
//!
//! Around a point `x0` the profile shrinks a window `[x0-δ_k, x0+δ_k]` by half per level
//! while the sampling spacing drops by a factor four. At every level the window is also
//! measured at the previous level's spacing; the ratio of the two totals is the growth
//! ratio. Where the function has bounded variation the ratio settles at 1; near a point
//! of unbounded variation every refinement uncovers more oscillation and the ratio stays
//! well above 1 (about 2 per level for `sin(1/x)` at the origin).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{FunctionHandle, Grid};
use crate::special::CompensatedSum;

/// Threshold rule for classifying a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Growth ratio every one of the last `m` levels must exceed for `unbounded`.
    pub rho: f64,
    pub m: usize,
    /// The final total variation must also exceed `floor_factor · ‖f‖_∞`.
    pub floor_factor: f64,
    /// Growth ratio every one of the last `m` levels must stay below for `bounded`.
    pub bounded_ratio: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { rho: 1.5, m: 3, floor_factor: 10.0, bounded_ratio: 1.05 }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::Config(format!("rho must be positive, got {}", self.rho)));
        }
        if self.m == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        if !(self.floor_factor.is_finite() && self.floor_factor >= 0.0) {
            return Err(Error::Config(format!("floor must be non-negative, got {}", self.floor_factor)));
        }
        if !(self.bounded_ratio.is_finite() && self.bounded_ratio > 1.0) {
            return Err(Error::Config(format!("bounded ratio must exceed 1, got {}", self.bounded_ratio)));
        }
        Ok(())
    }

    /// With `rho` at or below the bounded cutoff the two classes overlap and the rule can
    /// no longer tell them apart; every profile is then inconclusive.
    pub fn is_degenerate(&self) -> bool {
        self.rho <= self.bounded_ratio
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Bounded,
    Unbounded,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileLevel {
    pub delta: f64,
    pub lo: f64,
    pub hi: f64,
    /// Number of evaluation points (grid nodes plus declared extrema).
    pub n: usize,
    pub spacing: f64,
    pub tv: f64,
    /// Same window at the previous level's spacing.
    pub tv_coarse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationReport {
    pub center: f64,
    pub levels: Vec<ProfileLevel>,
    pub classification: Classification,
    pub growth_ratios: Vec<f64>,
    /// Largest `|f|` seen across all windows.
    pub sup_abs: f64,
}

impl VariationReport {
    pub fn final_tv(&self) -> f64 {
        self.levels.last().map_or(0.0, |l| l.tv)
    }
}

/// Total variation over an explicit, increasing node list.
pub fn tv_on_nodes(f: &FunctionHandle, nodes: &[f64]) -> f64 {
    let vals: Vec<f64> = nodes.iter().map(|&x| f.eval(x)).collect();
    super::abs_increments(&vals)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowTv {
    pub tv: f64,
    pub nodes: usize,
    pub sup_abs: f64,
}

/// Discrete variation of `f` on `[lo, hi]` sampled at roughly `spacing`, augmented with
/// the handle's declared extrema that are at least `spacing` apart.
pub fn tv_window(f: &FunctionHandle, lo: f64, hi: f64, spacing: f64) -> Result<WindowTv> {
    const MAX_CELLS: f64 = (1u64 << 26) as f64;
    let cells = ((hi - lo) / spacing).ceil().clamp(1.0, MAX_CELLS) as usize;
    let grid = Grid::new(lo, hi, cells)?;
    let extrema: Vec<f64> = f.extrema(lo, hi, spacing).into_iter().filter(|&t| t > lo && t < hi).collect();

    let mut acc = CompensatedSum::new();
    let mut sup = 0.0f64;
    let mut prev: Option<f64> = None;
    let mut count = 0usize;
    let mut visit = |x: f64| {
        let v = f.eval(x);
        sup = sup.max(v.abs());
        if let Some(p) = prev {
            acc.add((v - p).abs());
        }
        prev = Some(v);
        count += 1;
    };
    // merge the two sorted sequences
    let mut ext = extrema.iter().peekable();
    for x in grid.nodes() {
        while let Some(&&t) = ext.peek() {
            if t < x {
                visit(t);
                ext.next();
            } else {
                if t == x {
                    ext.next();
                }
                break;
            }
        }
        visit(x);
    }
    Ok(WindowTv { tv: acc.value(), nodes: count, sup_abs: sup })
}

fn growth_ratio(fine: f64, coarse: f64) -> f64 {
    if coarse == 0.0 {
        if fine == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        fine / coarse
    }
}

fn classify(levels: &[ProfileLevel], ratios: &[f64], sup_abs: f64, th: &Thresholds) -> Classification {
    if th.is_degenerate() || ratios.len() < th.m {
        return Classification::Inconclusive;
    }
    let last = &ratios[ratios.len() - th.m..];
    let final_tv = levels.last().map_or(0.0, |l| l.tv);
    if last.iter().all(|&r| r > th.rho) && final_tv > th.floor_factor * sup_abs {
        Classification::Unbounded
    } else if last.iter().all(|&r| r < th.bounded_ratio) {
        Classification::Bounded
    } else {
        Classification::Inconclusive
    }
}

/// Variation profile of `f` around `x0`.
///
/// Level `k` uses the window half-width `base_delta · 2^-k` (clipped to the domain) and
/// the spacing `2 · base_delta / (n_per_level · 4^k)`, i.e. `n_per_level · 2^k` cells across
/// an unclipped window.
pub fn variation_profile(
    f: &FunctionHandle,
    x0: f64,
    base_delta: f64,
    levels: usize,
    n_per_level: usize,
    thresholds: &Thresholds,
) -> Result<VariationReport> {
    let (a, b) = f.domain();
    if !(x0 >= a && x0 <= b) {
        return Err(Error::Precondition(format!("x0 = {x0} outside the domain [{a}, {b}]")));
    }
    if levels < 2 {
        return Err(Error::Precondition(format!("need at least 2 levels, got {levels}")));
    }
    if n_per_level == 0 || !(base_delta.is_finite() && base_delta > 0.0) {
        return Err(Error::EmptyWindow(x0));
    }
    let spacing = |k: usize| 2.0 * base_delta / (n_per_level as f64 * 4f64.powi(k as i32));

    let mut out = Vec::with_capacity(levels);
    let mut ratios = Vec::with_capacity(levels - 1);
    let mut sup = 0.0f64;
    for k in 0..levels {
        let delta = base_delta * 0.5f64.powi(k as i32);
        let (lo, hi) = ((x0 - delta).max(a), (x0 + delta).min(b));
        if !(hi > lo) {
            return Err(Error::EmptyWindow(x0));
        }
        let fine = tv_window(f, lo, hi, spacing(k))?;
        sup = sup.max(fine.sup_abs);
        let tv_coarse = if k > 0 {
            let coarse = tv_window(f, lo, hi, spacing(k - 1))?;
            sup = sup.max(coarse.sup_abs);
            ratios.push(growth_ratio(fine.tv, coarse.tv));
            Some(coarse.tv)
        } else {
            None
        };
        out.push(ProfileLevel { delta, lo, hi, n: fine.nodes, spacing: spacing(k), tv: fine.tv, tv_coarse });
    }
    let classification = classify(&out, &ratios, sup, thresholds);
    Ok(VariationReport { center: x0, levels: out, classification, growth_ratios: ratios, sup_abs: sup })
}

/// Settings for [`detect_uvp`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectOptions {
    /// Every `stride`-th grid node is a candidate.
    pub stride: usize,
    pub levels: usize,
    pub n_per_level: usize,
    /// Defaults to the candidate spacing `stride · h`.
    pub base_delta: Option<f64>,
    pub thresholds: Thresholds,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self { stride: 1, levels: 6, n_per_level: 8192, base_delta: None, thresholds: Thresholds::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UvpDetection {
    pub candidates: Vec<f64>,
    pub unbounded: Vec<f64>,
    pub inconclusive: Vec<f64>,
    pub reports: Vec<VariationReport>,
}

impl UvpDetection {
    pub fn is_clean(&self) -> bool {
        self.unbounded.is_empty() && self.inconclusive.is_empty()
    }
}

/// Scan candidate points (every `stride`-th grid node plus the handle's singular points)
/// and report those whose profile classifies as unbounded.
///
/// Completeness is relative to the candidate set. Inconclusive points are listed apart.
pub fn detect_uvp(f: &FunctionHandle, grid: &Grid, opts: &DetectOptions) -> Result<UvpDetection> {
    opts.thresholds.validate()?;
    if opts.stride == 0 {
        return Err(Error::Config("stride must be at least 1".into()));
    }
    let (a, b) = f.domain();
    if grid.a() < a || grid.b() > b {
        return Err(Error::OutsideDomain { lo: grid.a(), hi: grid.b(), a, b });
    }
    let mut candidates: Vec<f64> = (0..=grid.n()).step_by(opts.stride).map(|i| grid.node(i)).collect();
    if grid.n() % opts.stride != 0 {
        candidates.push(grid.b());
    }
    candidates.extend(f.singular_points().into_iter().filter(|&x| x >= grid.a() && x <= grid.b()));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let base = opts.base_delta.unwrap_or(opts.stride as f64 * grid.h());
    let reports = candidates
        .par_iter()
        .map(|&x0| variation_profile(f, x0, base, opts.levels, opts.n_per_level, &opts.thresholds))
        .collect::<Result<Vec<_>>>()?;

    let pick = |c: Classification| reports.iter().filter(|r| r.classification == c).map(|r| r.center).collect();
    Ok(UvpDetection {
        unbounded: pick(Classification::Unbounded),
        inconclusive: pick(Classification::Inconclusive),
        candidates,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracint::{image_handle, FracOrder};
    use crate::funcspace::{make_grid, parse_function_spec};

    fn quick() -> DetectOptions {
        DetectOptions { n_per_level: 1024, ..DetectOptions::default() }
    }

    /// Oracle: ∫|f'| for f = sin(1/x), f'(x) = -cos(1/x)/x², by composite Simpson on a
    /// dense grid.
    fn sin_recip_tv_by_derivative(lo: f64, hi: f64) -> f64 {
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        let d = |x: f64| ((1.0 / x).cos() / (x * x)).abs();
        let mut acc = d(lo) + d(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * d(lo + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn linear_profile_is_bounded() {
        let f = parse_function_spec("linear").unwrap();
        for x0 in [0.0, 0.3, 1.0] {
            let r = variation_profile(&f, x0, 0.25, 6, 64, &Thresholds::default()).unwrap();
            assert_eq!(r.classification, Classification::Bounded);
            for l in &r.levels {
                assert!((l.tv - (l.hi - l.lo)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sin_recip_profile_at_origin_diverges() {
        let f = parse_function_spec("sin_recip").unwrap();
        let r = variation_profile(&f, 0.0, 1.0 / 16.0, 6, 1024, &Thresholds::default()).unwrap();
        assert_eq!(r.classification, Classification::Unbounded, "{:?}", r.growth_ratios);
        for w in r.levels.windows(2) {
            assert!(w[1].tv > w[0].tv);
        }
    }

    #[test]
    fn sin_recip_profile_away_from_origin_is_bounded() {
        let f = parse_function_spec("sin_recip").unwrap();
        let r = variation_profile(&f, 0.5, 0.25, 6, 1024, &Thresholds::default()).unwrap();
        assert_eq!(r.classification, Classification::Bounded);
        let first = &r.levels[0];
        let oracle = sin_recip_tv_by_derivative(first.lo, first.hi);
        assert!((first.tv - oracle).abs() < 1e-9 * oracle, "{} vs {oracle}", first.tv);
    }

    #[test]
    fn profile_errors() {
        let f = parse_function_spec("linear").unwrap();
        let th = Thresholds::default();
        assert!(variation_profile(&f, 1.5, 0.25, 6, 64, &th).is_err());
        assert!(variation_profile(&f, 0.5, 0.25, 1, 64, &th).is_err());
        assert!(matches!(variation_profile(&f, 0.5, 0.0, 6, 64, &th), Err(Error::EmptyWindow(_))));
    }

    #[test]
    fn degenerate_threshold_is_always_inconclusive() {
        let f = parse_function_spec("sin_recip").unwrap();
        let th = Thresholds { rho: 1.0, ..Thresholds::default() };
        assert!(th.is_degenerate());
        let r = variation_profile(&f, 0.0, 1.0 / 16.0, 6, 256, &th).unwrap();
        assert_eq!(r.classification, Classification::Inconclusive);
    }

    #[test]
    fn polynomials_have_no_uvp() {
        let grid = make_grid(0.0, 1.0, 8).unwrap();
        for spec in ["constant:c=2", "linear:slope=-3", "power:beta=2", "power:beta=3"] {
            let f = parse_function_spec(spec).unwrap();
            let d = detect_uvp(&f, &grid, &quick()).unwrap();
            assert!(d.is_clean(), "{spec}: {:?} {:?}", d.unbounded, d.inconclusive);
            assert_eq!(d.candidates.len(), 9);
        }
    }

    #[test]
    fn sin_recip_has_single_uvp_at_origin() {
        let grid = make_grid(0.0, 1.0, 16).unwrap();
        let f = parse_function_spec("sin_recip").unwrap();
        let d = detect_uvp(&f, &grid, &quick()).unwrap();
        assert_eq!(d.unbounded, vec![0.0]);
        assert!(d.inconclusive.is_empty(), "{:?}", d.inconclusive);
    }

    #[test]
    fn integrated_sin_recip_has_no_uvp() {
        let grid = make_grid(0.0, 1.0, 16).unwrap();
        let f = parse_function_spec("sin_recip").unwrap();
        let img = image_handle(&f, FracOrder::new(1.0).unwrap(), 1 << 12).unwrap();
        let d = detect_uvp(&img, &grid, &DetectOptions::default()).unwrap();
        assert!(d.unbounded.is_empty());
        assert!(d.inconclusive.is_empty(), "{:?}", d.reports.iter().map(|r| &r.growth_ratios).collect::<Vec<_>>());
    }

    #[test]
    fn stride_and_singular_candidates() {
        let grid = make_grid(0.0, 1.0, 10).unwrap();
        let f = parse_function_spec("sin_recip:a=-1,b=1").unwrap();
        let g2 = make_grid(-0.9, 1.0, 10).unwrap();
        let opts = DetectOptions { stride: 3, n_per_level: 64, levels: 3, ..DetectOptions::default() };
        let d = detect_uvp(&f, &g2, &opts).unwrap();
        assert!(d.candidates.contains(&0.0));
        assert!(d.candidates.contains(&1.0));
        assert!(detect_uvp(&parse_function_spec("linear:a=0.5").unwrap(), &grid, &opts).is_err());
    }
}
