use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::checks::{detect_on, preservation_from, uvp_count_from, CheckVerdict};
use super::{combine, Evidence, RowResult, SuiteConfig, Verdict};
use crate::error::{Error, Result};
use crate::fracint::{image_handle, monotone_image_check, rl_integral, semigroup_residual, FracOrder};
use crate::fractaldim::box_dimension;
use crate::funcspace::{make_grid, parse_function_spec, sample, FunctionHandle, SampledFunction};
use crate::variation::{discrete_tv, jordan_decompose, operator_bound_check};

pub(super) fn run_row(id: &str, stream: u64, cfg: &SuiteConfig) -> RowResult {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    match id {
        "T2.2-jordan" => jordan(&mut rng),
        "L2.5-normalization" => normalization(&mut rng),
        "T2.6-preservation" => preservation(&mut rng, cfg),
        "T2.6-monotone-image" => monotone_image(&mut rng, cfg),
        "T2.7-bound" => bound(&mut rng, cfg),
        "T2.7-linearity" => linearity(&mut rng, cfg),
        "semigroup" => semigroup(),
        "T-final-uvp-count" => uvp_count(&mut rng, cfg, &cfg.alphas),
        "T-final-alpha-ge-1" => {
            let mut alphas: Vec<f64> = cfg.alphas.iter().copied().filter(|&a| a >= 1.0).collect();
            if !alphas.contains(&1.0) {
                alphas.insert(0, 1.0);
            }
            uvp_count(&mut rng, cfg, &alphas)
        }
        "E2.9-example" => example_sin_recip(cfg),
        "dim-1-claims" => dimension(&mut rng, cfg),
        other => Err(Error::Config(format!("unknown theorem id `{other}`"))),
    }
}

fn spec(s: &str) -> Result<FunctionHandle> {
    parse_function_spec(s)
}

fn on_unit(s: &str, n: usize) -> Result<SampledFunction> {
    sample(&spec(s)?, &make_grid(0.0, 1.0, n)?)
}

fn random_sample(rng: &mut ChaCha8Rng, len: usize, first: Option<f64>) -> Result<SampledFunction> {
    let mut v: Vec<f64> = (0..len).map(|_| rng.gen_range(-10.0..10.0)).collect();
    if let Some(x) = first {
        v[0] = x;
    }
    SampledFunction::new(make_grid(0.0, 1.0, len - 1)?, v)
}

fn orders(alphas: &[f64]) -> Result<Vec<FracOrder>> {
    alphas.iter().map(|&a| FracOrder::new(a)).collect()
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn to_verdict(v: CheckVerdict) -> Verdict {
    match v {
        CheckVerdict::Pass | CheckVerdict::NotApplicable => Verdict::Pass,
        CheckVerdict::Fail => Verdict::Fail,
        CheckVerdict::Inconclusive => Verdict::Inconclusive,
    }
}

struct JordanStats {
    monotone_violations: usize,
    /// Worst `|g - h - f| / (ε max(|g|, |h|))`.
    max_reconstruction_eps: f64,
    max_split_rel: f64,
}

fn jordan_stats(f: &SampledFunction, stats: &mut JordanStats) -> Result<(f64, f64)> {
    let (g, h) = jordan_decompose(f)?;
    let (fv, gv, hv) = (f.values(), g.values(), h.values());
    if !gv.windows(2).all(|w| w[1] >= w[0]) || !hv.windows(2).all(|w| w[1] >= w[0]) {
        stats.monotone_violations += 1;
    }
    for ((f, g), h) in fv.iter().zip(gv).zip(hv) {
        let scale = g.abs().max(h.abs());
        if scale > 0.0 {
            stats.max_reconstruction_eps = stats.max_reconstruction_eps.max((g - h - f).abs() / (f64::EPSILON * scale));
        }
    }
    let n = fv.len() - 1;
    let tv = discrete_tv(f, 0, n)?;
    let split = (gv[n] - gv[0]) + (hv[n] - hv[0]);
    if tv > 0.0 {
        stats.max_split_rel = stats.max_split_rel.max((tv - split).abs() / tv);
    }
    Ok((gv[0], hv[0]))
}

fn jordan(rng: &mut ChaCha8Rng) -> RowResult {
    let mut cases: Vec<SampledFunction> = Vec::new();
    for _ in 0..50 {
        let len = rng.gen_range(2..=513);
        cases.push(random_sample(rng, len, None)?);
    }
    let pl = format!("piecewise_linear_random:k=16,seed={}", rng.gen::<u32>());
    for s in ["sin_recip", "weierstrass", "takagi", "power:beta=0.5", pl.as_str()] {
        cases.push(on_unit(s, 4096)?);
    }
    let mut stats = JordanStats { monotone_violations: 0, max_reconstruction_eps: 0.0, max_split_rel: 0.0 };
    for f in &cases {
        jordan_stats(f, &mut stats)?;
    }
    let ok = stats.monotone_violations == 0 && stats.max_reconstruction_eps <= 2.0 && stats.max_split_rel <= 1e-12;
    let mut e = Evidence::new();
    e.insert("cases".into(), json!(cases.len()));
    e.insert("monotone_violations".into(), json!(stats.monotone_violations));
    e.insert("max_reconstruction_error_eps".into(), json!(stats.max_reconstruction_eps));
    e.insert("max_tv_split_relative_error".into(), json!(stats.max_split_rel));
    Ok((pass_if(ok), e))
}

fn normalization(rng: &mut ChaCha8Rng) -> RowResult {
    let (mut pos, mut zero, mut neg, mut violations) = (0usize, 0usize, 0usize, 0usize);
    let mut stats = JordanStats { monotone_violations: 0, max_reconstruction_eps: 0.0, max_split_rel: 0.0 };
    for i in 0..60 {
        let first = match i % 3 {
            0 => rng.gen_range(0.0..10.0),
            1 => 0.0,
            _ => -rng.gen_range(f64::MIN_POSITIVE..10.0),
        };
        let len = rng.gen_range(2..=257);
        let f = random_sample(rng, len, Some(first))?;
        let (g0, h0) = jordan_stats(&f, &mut stats)?;
        let ok = if first >= 0.0 { g0 >= 0.0 && h0 == 0.0 } else { g0 == 0.0 && h0 > 0.0 };
        if !ok {
            violations += 1;
        }
        match i % 3 {
            0 => pos += 1,
            1 => zero += 1,
            _ => neg += 1,
        }
    }
    let ok = violations == 0 && stats.monotone_violations == 0 && stats.max_reconstruction_eps <= 2.0;
    let mut e = Evidence::new();
    e.insert("positive_start_cases".into(), json!(pos));
    e.insert("zero_start_cases".into(), json!(zero));
    e.insert("negative_start_cases".into(), json!(neg));
    e.insert("normalization_violations".into(), json!(violations));
    e.insert("monotone_violations".into(), json!(stats.monotone_violations));
    Ok((pass_if(ok), e))
}

/// Catalog inputs for the classifier rows; every one has finitely many candidate UVPs.
fn uvp_catalog(rng: &mut ChaCha8Rng) -> Result<Vec<FunctionHandle>> {
    let pl = format!("piecewise_linear_random:k=8,seed={}", rng.gen::<u32>());
    ["sin_recip", "linear:slope=2,intercept=-1", "power:beta=2", "power:beta=0.5", pl.as_str()]
        .iter()
        .map(|s| spec(s))
        .collect()
}

fn preservation(rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> RowResult {
    let settings = cfg.check_settings();
    let windows = [(0.0, 1.0), (0.25, 0.75), (0.5, 1.0), (0.0, 0.25)];
    let mut verdicts = Vec::new();
    let mut cases = Vec::new();
    let (mut applicable, mut not_applicable) = (0usize, 0usize);
    for f in uvp_catalog(rng)? {
        let f_dets = windows
            .iter()
            .map(|&(c, d)| detect_on(&f, c, d, &settings))
            .collect::<Result<Vec<_>>>()?;
        let needs_image = f_dets.iter().any(|d| d.is_clean());
        for order in orders(&cfg.alphas)? {
            let image = if needs_image { Some(image_handle(&f, order, settings.image_n)?) } else { None };
            for (w, f_det) in windows.iter().zip(&f_dets) {
                let out = preservation_from(&f, order, *w, f_det, image.as_ref(), &settings)?;
                if out.verdict == CheckVerdict::NotApplicable {
                    not_applicable += 1;
                } else {
                    applicable += 1;
                }
                verdicts.push(to_verdict(out.verdict));
                cases.push(json!({
                    "function": out.function,
                    "alpha": out.alpha,
                    "window": [out.window.0, out.window.1],
                    "verdict": out.verdict,
                }));
            }
        }
    }
    let verdict = if applicable == 0 { Verdict::Inconclusive } else { combine(verdicts) };
    let mut e = Evidence::new();
    e.insert("applicable".into(), json!(applicable));
    e.insert("not_applicable".into(), json!(not_applicable));
    e.insert("cases".into(), json!(cases));
    Ok((verdict, e))
}

fn monotone_image(rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> RowResult {
    let n = 512;
    let grid = make_grid(0.0, 1.0, n)?;
    let orders = orders(&cfg.alphas)?;
    let (mut cases, mut failures) = (0usize, 0usize);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..cfg.monotone_samples {
        let mut v = Vec::with_capacity(n + 1);
        let mut acc = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..2.0) };
        v.push(acc);
        for _ in 0..n {
            let r: f64 = rng.gen();
            acc += if r < 0.3 {
                0.0
            } else if r < 0.35 {
                rng.gen_range(0.0..5.0)
            } else {
                rng.gen_range(0.0..0.01)
            };
            v.push(acc);
        }
        let g = SampledFunction::new(grid, v)?;
        for &order in &orders {
            let r = monotone_image_check(&g, order)?;
            cases += 1;
            if !r.passed {
                failures += 1;
            }
            worst = worst.max(-r.min_increment / r.tolerance);
        }
    }
    let mut e = Evidence::new();
    e.insert("cases".into(), json!(cases));
    e.insert("failures".into(), json!(failures));
    e.insert("worst_decrease_over_tolerance".into(), json!(worst));
    Ok((pass_if(failures == 0), e))
}

fn bound(rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> RowResult {
    let grid = make_grid(0.0, 1.0, 512)?;
    let orders = orders(&cfg.alphas)?;
    let (mut cases, mut violations) = (0usize, 0usize);
    let mut max_ratio = 0.0f64;
    let mut max_case = String::new();
    for _ in 0..cfg.bound_samples {
        let k = 1u32 << rng.gen_range(1..=6);
        let s = format!("piecewise_linear_random:k={k},seed={}", rng.gen::<u32>());
        let f = sample(&spec(&s)?, &grid)?;
        for &order in &orders {
            let r = operator_bound_check(&f, order)?;
            cases += 1;
            if !r.within_bound {
                violations += 1;
            }
            if r.ratio > max_ratio {
                max_ratio = r.ratio;
                max_case = format!("{s} alpha={}", order.alpha());
            }
        }
    }
    let mut e = Evidence::new();
    e.insert("cases".into(), json!(cases));
    e.insert("violations".into(), json!(violations));
    e.insert("max_ratio".into(), json!(max_ratio));
    e.insert("max_ratio_case".into(), json!(max_case));
    Ok((pass_if(violations == 0), e))
}

fn linearity(rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> RowResult {
    let n = 1024;
    let orders = orders(&cfg.alphas)?;
    let mut inputs = vec![(on_unit("sin_recip", n)?, on_unit("weierstrass", n)?)];
    for _ in 0..20 {
        let pl = format!("piecewise_linear_random:k=32,seed={}", rng.gen::<u32>());
        inputs.push((on_unit(&pl, n)?, random_sample(rng, n + 1, None)?));
    }
    let mut worst = 0.0f64;
    let mut cases = 0usize;
    for (f, g) in &inputs {
        let lambda = rng.gen_range(-5.0..5.0);
        let mu = rng.gen_range(-5.0..5.0);
        let mix = f.combine(lambda, g, mu)?;
        for &order in &orders {
            let (if_, ig, imix) = (rl_integral(f, order)?, rl_integral(g, order)?, rl_integral(&mix, order)?);
            let scale = f64::max(lambda.abs() * if_.sup_norm() + mu.abs() * ig.sup_norm(), f64::MIN_POSITIVE);
            let err = imix
                .values()
                .iter()
                .zip(if_.values().iter().zip(ig.values()))
                .fold(0.0f64, |m, (z, (x, y))| m.max((z - (lambda * x + mu * y)).abs()));
            worst = worst.max(err / scale);
            cases += 1;
        }
    }
    let mut e = Evidence::new();
    e.insert("cases".into(), json!(cases));
    e.insert("max_relative_error".into(), json!(worst));
    e.insert("tolerance".into(), json!(1e-12));
    Ok((pass_if(worst <= 1e-12), e))
}

fn semigroup() -> RowResult {
    let half = FracOrder::new(0.5)?;
    let sizes = [512usize, 1024, 2048];
    let mut ok = true;
    let mut per = serde_json::Map::new();
    for s in ["constant", "linear", "sin_recip"] {
        let f = spec(s)?;
        let res = sizes
            .iter()
            .map(|&n| semigroup_residual(&f, half, half, &make_grid(0.0, 1.0, n)?))
            .collect::<Result<Vec<f64>>>()?;
        let decreasing = res.windows(2).all(|w| w[1] < w[0]);
        let last = res[res.len() - 1];
        ok &= decreasing && last <= 1e-3;
        per.insert(s.into(), json!({ "n": sizes, "residual": res, "strictly_decreasing": decreasing }));
    }
    // I^½ I^½ 1 = x exactly
    let one = on_unit("constant", 2048)?;
    let twice = rl_integral(&rl_integral(&one, half)?, half)?;
    let identity_err = twice.grid().nodes().zip(twice.values()).fold(0.0f64, |m, (x, v)| m.max((v - x).abs()));
    ok &= identity_err <= 1e-3;
    let mut e = Evidence::new();
    e.insert("residuals".into(), serde_json::Value::Object(per));
    e.insert("constant_identity_error".into(), json!(identity_err));
    Ok((pass_if(ok), e))
}

fn uvp_count(rng: &mut ChaCha8Rng, cfg: &SuiteConfig, alphas: &[f64]) -> RowResult {
    let settings = cfg.check_settings();
    let mut verdicts = Vec::new();
    let mut cases = Vec::new();
    for f in uvp_catalog(rng)? {
        let (a, b) = f.domain();
        let f_det = detect_on(&f, a, b, &settings)?;
        for order in orders(alphas)? {
            let image = image_handle(&f, order, settings.image_n)?;
            let img_det = detect_on(&image, a, b, &settings)?;
            let out = uvp_count_from(&f, order, &f_det, &img_det);
            verdicts.push(to_verdict(out.verdict));
            cases.push(json!({
                "function": out.function,
                "alpha": out.alpha,
                "f_unbounded": out.f.unbounded,
                "f_inconclusive": out.f.inconclusive.len(),
                "image_unbounded": out.image.unbounded,
                "image_inconclusive": out.image.inconclusive.len(),
                "verdict": out.verdict,
            }));
        }
    }
    let mut e = Evidence::new();
    e.insert("cases".into(), json!(cases));
    Ok((combine(verdicts), e))
}

fn example_sin_recip(cfg: &SuiteConfig) -> RowResult {
    let settings = cfg.check_settings();
    let f = spec("sin_recip")?;
    let f_det = detect_on(&f, 0.0, 1.0, &settings)?;
    let one = image_handle(&f, FracOrder::new(1.0)?, settings.image_n)?;
    let one_det = detect_on(&one, 0.0, 1.0, &settings)?;
    let half = image_handle(&f, FracOrder::new(0.5)?, settings.image_n)?;
    let half_det = detect_on(&half, 0.0, 1.0, &settings)?;

    let source_exact = f_det.unbounded == [0.0] && f_det.inconclusive.is_empty();
    let source_wrong = f_det.unbounded.iter().any(|&x| x != 0.0)
        || (!f_det.unbounded.contains(&0.0) && !f_det.inconclusive.contains(&0.0));
    let one_clean = one_det.is_clean();
    let half_pess = half_det.unbounded.len() + half_det.inconclusive.len();
    let verdict = if source_wrong || !one_det.unbounded.is_empty() || half_det.unbounded.len() > 1 {
        Verdict::Fail
    } else if source_exact && one_clean && half_pess <= 1 {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    let mut e = Evidence::new();
    e.insert("f_unbounded".into(), json!(f_det.unbounded));
    e.insert("f_inconclusive".into(), json!(f_det.inconclusive));
    e.insert("alpha_1_unbounded".into(), json!(one_det.unbounded));
    e.insert("alpha_1_inconclusive".into(), json!(one_det.inconclusive));
    e.insert("alpha_0.5_unbounded".into(), json!(half_det.unbounded));
    e.insert("alpha_0.5_inconclusive".into(), json!(half_det.inconclusive));
    Ok((verdict, e))
}

fn dimension(rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> RowResult {
    let half = FracOrder::new(0.5)?;
    let pl = format!("piecewise_linear_random:k=16,seed={}", rng.gen::<u32>());
    let mut ok = true;
    let mut images = serde_json::Map::new();
    for s in [pl.as_str(), "power:beta=0.5", "sin_recip"] {
        let img = rl_integral(&on_unit(s, cfg.image_n)?, half)?;
        let est = box_dimension(&img, 2, cfg.dim_j_max)?;
        let good = (0.95..=1.1).contains(&est.slope) && est.r_squared >= 0.98;
        ok &= good;
        images.insert(
            s.into(),
            json!({ "slope": est.slope, "r_squared": est.r_squared, "fit_levels": [est.fit_levels.0, est.fit_levels.1] }),
        );
    }
    // the source sin(1/x) on the same grid, as a cross-check only
    let direct = box_dimension(&on_unit("sin_recip", cfg.image_n)?, 2, cfg.dim_j_max)?;

    let w = box_dimension(&on_unit("weierstrass:H=0.5", cfg.calibration_n)?, 2, cfg.calibration_j_max)?;
    let calibrated = (w.slope - 1.5).abs() <= 0.1;
    ok &= calibrated;

    let mut e = Evidence::new();
    e.insert("half_order_images".into(), serde_json::Value::Object(images));
    e.insert("sin_recip_direct_slope".into(), json!(direct.slope));
    e.insert(
        "weierstrass_calibration".into(),
        json!({ "n": cfg.calibration_n, "slope": w.slope, "r_squared": w.r_squared, "expected": 1.5 }),
    );
    Ok((pass_if(ok), e))
}
