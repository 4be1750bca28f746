use crate::error::Result;
use crate::funcspace::SampledFunction;

/// Split `f` into non-decreasing `g` and `h` with `f = g - h` on the grid.
///
/// On a rising step `h` is held and `g` is recomputed as `f + h`; on a falling step `g` is
/// held and `h = g - f`. Each step re-anchors on the part that stays put, so the pointwise
/// reconstruction error stays within a couple of ulps of `max(|g|, |h|)` instead of
/// drifting along the grid. Endpoint normalization: if `f(a) >= 0` then `g(a) = f(a)` and
/// `h(a) = 0`; if `f(a) < 0` then `g(a) = 0` and `h(a) = -f(a) > 0`.
pub fn jordan_decompose(f: &SampledFunction) -> Result<(SampledFunction, SampledFunction)> {
    let v = f.values();
    let mut g = Vec::with_capacity(v.len());
    let mut h = Vec::with_capacity(v.len());
    let (mut gi, mut hi) = if v[0] >= 0.0 { (v[0], 0.0) } else { (0.0, -v[0]) };
    g.push(gi);
    h.push(hi);
    for w in v.windows(2) {
        // the max guards against rounding taking a hair off the held-over value
        if w[1] >= w[0] {
            gi = gi.max(w[1] + hi);
        } else {
            hi = hi.max(gi - w[1]);
        }
        g.push(gi);
        h.push(hi);
    }
    Ok((SampledFunction::new(*f.grid(), g)?, SampledFunction::new(*f.grid(), h)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{make_grid, parse_function_spec, sample, Grid};
    use crate::variation::discrete_tv;
    use proptest::prelude::*;

    fn reconstruction_ok(f: &[f64], g: &[f64], h: &[f64]) -> bool {
        f.iter().zip(g).zip(h).all(|((f, g), h)| (g - h - f).abs() <= 2.0 * f64::EPSILON * g.abs().max(h.abs()))
    }

    fn non_decreasing(v: &[f64]) -> bool {
        v.windows(2).all(|w| w[1] >= w[0])
    }

    #[test]
    fn identity_is_its_own_positive_part() {
        let f = sample(&parse_function_spec("linear").unwrap(), &make_grid(0.0, 1.0, 16).unwrap()).unwrap();
        let (g, h) = jordan_decompose(&f).unwrap();
        assert_eq!(g.values(), f.values());
        assert!(h.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn negative_start_moves_offset_to_h() {
        let f = sample(&parse_function_spec("linear:intercept=-1").unwrap(), &make_grid(0.0, 1.0, 16).unwrap()).unwrap();
        let (g, h) = jordan_decompose(&f).unwrap();
        assert_eq!(g.values()[0], 0.0);
        assert_eq!(h.values()[0], 1.0);
        assert!(h.values().iter().all(|&v| v == 1.0));
        for (x, gv) in f.grid().nodes().zip(g.values()) {
            assert!((gv - x).abs() < 1e-15);
        }
        assert!(reconstruction_ok(f.values(), g.values(), h.values()));
    }

    #[test]
    fn tent_matches_running_variation_oracle() {
        let grid = make_grid(0.0, 1.0, 8).unwrap();
        let f: Vec<f64> = grid.nodes().map(|x| (x - 0.5f64).abs()).collect();
        let fs = SampledFunction::new(grid, f.clone()).unwrap();
        let (g, h) = jordan_decompose(&fs).unwrap();
        // oracle: g = f(0) + cumulative rises, h = cumulative falls
        let mut rise = f[0];
        let mut fall = 0.0;
        for i in 0..f.len() {
            if i > 0 {
                let d = f[i] - f[i - 1];
                rise += d.max(0.0);
                fall += (-d).max(0.0);
            }
            assert_eq!(g.values()[i], rise, "g at {i}");
            assert_eq!(h.values()[i], fall, "h at {i}");
        }
        assert_eq!(g.values()[0], 0.5);
        assert_eq!(h.values()[0], 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn decomposition_properties(vals in prop::collection::vec(-100.0f64..100.0, 2..200)) {
            let grid = Grid::new(0.0, 1.0, vals.len() - 1).unwrap();
            let f = SampledFunction::new(grid, vals).unwrap();
            let (g, h) = jordan_decompose(&f).unwrap();
            let (gv, hv, fv) = (g.values(), h.values(), f.values());
            prop_assert!(non_decreasing(gv));
            prop_assert!(non_decreasing(hv));
            prop_assert!(reconstruction_ok(fv, gv, hv));
            if fv[0] >= 0.0 {
                prop_assert!(gv[0] >= 0.0 && hv[0] == 0.0);
            } else {
                prop_assert!(gv[0] == 0.0 && hv[0] > 0.0);
            }
            let n = fv.len() - 1;
            let tv = discrete_tv(&f, 0, n).unwrap();
            let split = (gv[n] - gv[0]) + (hv[n] - hv[0]);
            prop_assert!((tv - split).abs() <= 4.0 * f64::EPSILON * (n as f64) * gv[n].max(hv[n]).max(1.0));
        }
    }
}
