//! Acceptance gate. Each test prints one `criterion N: PASS|FAIL ...` line.

use std::process::Command;
use std::time::Instant;

use fracvar::fracint::{image_handle, monotone_image_check, rl_integral, semigroup_residual, FracOrder};
use fracvar::fractaldim::box_dimension;
use fracvar::funcspace::{make_grid, parse_function_spec, sample, SampledFunction};
use fracvar::variation::{detect_uvp, operator_bound_check, DetectOptions};
use fracvar::verify::{preservation_check_with, CheckSettings, CheckVerdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ALPHAS: [f64; 5] = [0.25, 0.5, 0.75, 1.0, 1.5];

fn report(k: u32, ok: bool, detail: String) {
    println!("criterion {k}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {k} failed: {detail}");
}

fn order(a: f64) -> FracOrder {
    FracOrder::new(a).unwrap()
}

fn on_unit(spec: &str, n: usize) -> SampledFunction {
    sample(&parse_function_spec(spec).unwrap(), &make_grid(0.0, 1.0, n).unwrap()).unwrap()
}

/// Γ by upward recurrence to z >= 20 and the Stirling series; independent of the library.
fn gamma_oracle(x: f64) -> f64 {
    let mut z = x;
    let mut prod = 1.0;
    while z < 20.0 {
        prod *= z;
        z += 1.0;
    }
    let z2 = z * z;
    let series = 1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2)
        - 1.0 / (1680.0 * z * z2 * z2 * z2)
        + 1.0 / (1188.0 * z * z2 * z2 * z2 * z2);
    let ln = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series;
    ln.exp() / prod
}

/// Worst relative error of I^α t^β at x in {1/4, 1/2, 1} on an n-cell grid.
fn power_rule_error(alpha: f64, beta: f64, n: usize) -> f64 {
    let img = rl_integral(&on_unit(&format!("power:beta={beta}"), n), order(alpha)).unwrap();
    [n / 4, n / 2, n]
        .iter()
        .map(|&i| {
            let x = i as f64 / n as f64;
            let exact = gamma_oracle(beta + 1.0) / gamma_oracle(alpha + beta + 1.0) * x.powf(alpha + beta);
            ((img.values()[i] - exact) / exact).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn criterion_1_quadrature() {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut min_ratio = f64::INFINITY;
    let mut exact_cases = 0;
    for beta in [0.0, 0.5, 1.0, 2.0] {
        for alpha in ALPHAS {
            let e4096 = power_rule_error(alpha, beta, 4096);
            worst = worst.max(e4096);
            if beta >= 1.0 {
                let e2048 = power_rule_error(alpha, beta, 2048);
                // piecewise-linear data is integrated exactly; nothing left to converge
                if e2048 <= 1e-12 {
                    exact_cases += 1;
                } else {
                    min_ratio = min_ratio.min(e2048 / e4096);
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let ok = worst <= 1e-4 && min_ratio >= 1.8 && secs < 10.0;
    report(
        1,
        ok,
        format!("max rel err {worst:.3e}, min ratio {min_ratio:.3} ({exact_cases} cases exact to roundoff), {secs:.2}s"),
    );
}

#[test]
fn criterion_2_semigroup() {
    let half = order(0.5);
    let mut ok = true;
    let mut detail = Vec::new();
    for s in ["constant", "linear", "sin_recip"] {
        let f = parse_function_spec(s).unwrap();
        let r: Vec<f64> = [512, 1024, 2048]
            .iter()
            .map(|&n| semigroup_residual(&f, half, half, &make_grid(0.0, 1.0, n).unwrap()).unwrap())
            .collect();
        ok &= r[2] <= 1e-3 && r[1] < r[0] && r[2] < r[1];
        detail.push(format!("{s} {:.2e}/{:.2e}/{:.2e}", r[0], r[1], r[2]));
    }
    // I^½ I^½ 1 = x
    let twice = rl_integral(&rl_integral(&on_unit("constant", 2048), half).unwrap(), half).unwrap();
    let err = twice.grid().nodes().zip(twice.values()).fold(0.0f64, |m, (x, v)| m.max((v - x).abs()));
    ok &= err <= 1e-3;
    detail.push(format!("identity err {err:.2e}"));
    report(2, ok, detail.join(", "));
}

fn bv_norm_oracle(v: &[f64]) -> f64 {
    v[0].abs() + v.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>()
}

#[test]
fn criterion_3_operator_bound_and_linearity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = make_grid(0.0, 1.0, 512).unwrap();
    let (mut violations, mut cases) = (0, 0);
    let mut max_ratio = 0.0f64;
    for _ in 0..100 {
        let k = 1u32 << rng.gen_range(1..=6);
        let spec = format!("piecewise_linear_random:k={k},seed={}", rng.gen::<u32>());
        let f = sample(&parse_function_spec(&spec).unwrap(), &grid).unwrap();
        for alpha in ALPHAS {
            let r = operator_bound_check(&f, order(alpha)).unwrap();
            let img = rl_integral(&f, order(alpha)).unwrap();
            let constant = 2.0 / gamma_oracle(alpha + 1.0);
            let f_bv = bv_norm_oracle(f.values());
            let eps = 1e-6 + 10.0 * grid.h().powf(alpha.min(1.0)) * f_bv;
            let ratio = bv_norm_oracle(img.values()) / (constant * f_bv);
            if ratio > 1.0 + eps || !r.within_bound {
                violations += 1;
            }
            max_ratio = max_ratio.max(ratio);
            cases += 1;
        }
    }
    let mut lin = 0.0f64;
    for _ in 0..20 {
        let f = on_unit(&format!("piecewise_linear_random:k=32,seed={}", rng.gen::<u32>()), 1024);
        let g = on_unit("sin_recip", 1024);
        let (l, m) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let mix = f.combine(l, &g, m).unwrap();
        for alpha in ALPHAS {
            let (a, b, c) = (
                rl_integral(&f, order(alpha)).unwrap(),
                rl_integral(&g, order(alpha)).unwrap(),
                rl_integral(&mix, order(alpha)).unwrap(),
            );
            let scale = l.abs() * a.sup_norm() + m.abs() * b.sup_norm();
            for i in 0..=1024 {
                let want = l * a.values()[i] + m * b.values()[i];
                lin = lin.max((c.values()[i] - want).abs() / scale);
            }
        }
    }
    let ok = violations == 0 && lin <= 1e-12;
    report(3, ok, format!("{violations} violations in {cases} cases, max ratio {max_ratio:.4}, linearity {lin:.2e}"));
}

#[test]
fn criterion_4_monotone_image_and_preservation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let grid = make_grid(0.0, 1.0, 512).unwrap();
    let mut failures = 0;
    for _ in 0..50 {
        let mut acc = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..2.0) };
        let mut v = vec![acc];
        for _ in 0..512 {
            acc += if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..0.05) };
            v.push(acc);
        }
        let g = SampledFunction::new(grid, v).unwrap();
        for alpha in ALPHAS {
            if !monotone_image_check(&g, order(alpha)).unwrap().passed {
                failures += 1;
            }
        }
    }

    let settings = CheckSettings {
        detect: DetectOptions { n_per_level: 2048, ..DetectOptions::default() },
        candidate_cells: 8,
        image_n: 1 << 12,
    };
    let (mut applicable, mut bad) = (0, Vec::new());
    for spec in ["linear:slope=2,intercept=-1", "power:beta=2", "power:beta=0.5", "sin_recip", "piecewise_linear_random:k=8,seed=11"] {
        let f = parse_function_spec(spec).unwrap();
        for window in [(0.0, 1.0), (0.25, 0.75), (0.5, 1.0)] {
            for alpha in [0.25, 0.5, 1.0, 1.5] {
                let r = preservation_check_with(&f, order(alpha), window, &settings).unwrap();
                match r.verdict {
                    CheckVerdict::NotApplicable => {}
                    CheckVerdict::Pass => applicable += 1,
                    _ => bad.push(format!("{spec} {window:?} {alpha}")),
                }
            }
        }
    }
    let ok = failures == 0 && bad.is_empty() && applicable > 0;
    report(4, ok, format!("{failures} monotone failures in 250, preservation {applicable} pass, non-pass {bad:?}"));
}

#[test]
fn criterion_5_uvp_detection() {
    let grid = make_grid(0.0, 1.0, 16).unwrap();
    let opts = DetectOptions::default();
    let f = parse_function_spec("sin_recip").unwrap();
    let d = detect_uvp(&f, &grid, &opts).unwrap();
    let one = detect_uvp(&image_handle(&f, order(1.0), 1 << 14).unwrap(), &grid, &opts).unwrap();
    let half = detect_uvp(&image_handle(&f, order(0.5), 1 << 14).unwrap(), &grid, &opts).unwrap();
    let mut ok = d.unbounded == [0.0] && d.inconclusive.is_empty();
    ok &= one.unbounded.is_empty() && one.inconclusive.is_empty();
    ok &= half.unbounded.len() + half.inconclusive.len() <= 1;
    let mut controls = 0;
    for spec in ["constant:c=2", "linear:slope=-3", "power:beta=2", "power:beta=3"] {
        if detect_uvp(&parse_function_spec(spec).unwrap(), &grid, &opts).unwrap().is_clean() {
            controls += 1;
        }
    }
    ok &= controls == 4;
    report(
        5,
        ok,
        format!(
            "UVP(f) = {:?}, UVP(I^1 f) = {:?}, |UVP(I^0.5 f)| <= {}, clean controls {controls}/4",
            d.unbounded,
            one.unbounded,
            half.unbounded.len() + half.inconclusive.len()
        ),
    );
}

#[test]
fn criterion_6_dimension() {
    let t = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for spec in ["piecewise_linear_random:k=16,seed=3", "power:beta=0.5", "sin_recip"] {
        let img = rl_integral(&on_unit(spec, 1 << 14), order(0.5)).unwrap();
        let e = box_dimension(&img, 2, 12).unwrap();
        ok &= (0.95..=1.1).contains(&e.slope) && e.r_squared >= 0.98;
        detail.push(format!("I^0.5 {spec}: {:.4} (r2 {:.5})", e.slope, e.r_squared));
    }
    let w = box_dimension(&on_unit("weierstrass:H=0.5", 1 << 18), 2, 11).unwrap();
    ok &= (w.slope - 1.5).abs() <= 0.1;
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 180.0;
    detail.push(format!("weierstrass: {:.4}, {secs:.1}s", w.slope));
    report(6, ok, detail.join(", "));
}

#[test]
fn criterion_7_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_fracvar"))
            .args(["verify", "--seed", "42", "--format", "json", "--output"])
            .arg(&path)
            .status()
            .unwrap();
        (status.code(), std::fs::read(&path).unwrap())
    };
    let (c1, a) = run("a.json");
    let (c2, b) = run("b.json");
    let strip = |bytes: &[u8]| {
        let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
        v.as_object_mut().unwrap().remove("meta");
        v
    };
    let ok = a == b && strip(&a) == strip(&b) && c1 == Some(0) && c2 == Some(0);
    report(7, ok, format!("{} bytes, identical {}, exit codes {c1:?}/{c2:?}", a.len(), a == b));
}
