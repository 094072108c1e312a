use proptest::prelude::*;

use bilateral::grandnorm::grand_norm;
use bilateral::indices::IndexReport;
use bilateral::measure::{integral_product, MeasureSpace, SampledFunction};
use bilateral::psi::PsiFunction;
use bilateral::search::SearchOptions;
use bilateral::smallnorm::{exponent_grid, sl_norm_dual, sl_norm_primal, DualOptions, PrimalOptions};

fn zeta_strategy() -> impl Strategy<Value = PsiFunction<f64>> {
    (1.0f64..2.0, 0.5f64..4.0, 0.25f64..2.0, 0.25f64..2.0)
        .prop_map(|(a, gap, al, be)| PsiFunction::zeta(a, a + gap, al, be).unwrap())
}

fn instance(len: std::ops::Range<usize>) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    len.prop_flat_map(|n| {
        (
            prop::collection::vec(0.05f64..3.0, n),
            prop::collection::vec(-3.0f64..3.0, n),
            prop::collection::vec(-3.0f64..3.0, n),
        )
    })
}

fn norm(f: &[f64], psi: &PsiFunction<f64>, space: &MeasureSpace<f64>) -> f64 {
    grand_norm(&SampledFunction::new(f.to_vec()).unwrap(), psi, space, SearchOptions::default())
        .unwrap()
        .value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grand_norm_is_homogeneous((w, f, _) in instance(1..6), psi in zeta_strategy(), lambda in -50.0f64..50.0) {
        let space = MeasureSpace::atomic(w).unwrap();
        let base = norm(&f, &psi, &space);
        let scaled: Vec<f64> = f.iter().map(|v| v * lambda).collect();
        let s = norm(&scaled, &psi, &space);
        prop_assert!((s - lambda.abs() * base).abs() <= 1e-9 * (1.0 + lambda.abs() * base));
    }

    #[test]
    fn grand_norm_triangle((w, f, g) in instance(1..6), psi in zeta_strategy()) {
        let space = MeasureSpace::atomic(w).unwrap();
        let sum: Vec<f64> = f.iter().zip(&g).map(|(x, y)| x + y).collect();
        let lhs = norm(&sum, &psi, &space);
        let rhs = norm(&f, &psi, &space) + norm(&g, &psi, &space);
        prop_assert!(lhs <= rhs * (1.0 + 1e-9));
    }

    #[test]
    fn grand_norm_dominates_dense_scan((w, f, _) in instance(1..6), psi in zeta_strategy()) {
        let space = MeasureSpace::atomic(w).unwrap();
        let sf = SampledFunction::new(f.clone()).unwrap();
        let v = norm(&f, &psi, &space);
        let (a, b) = (psi.a, psi.b);
        let scan = (1..4000)
            .map(|i| a + (b - a) * i as f64 / 4000.0)
            .map(|p| (sf.ln_norm(p, &space).unwrap() - psi.ln_eval(p)).exp())
            .fold(0.0f64, f64::max);
        prop_assert!(v >= scan * (1.0 - 1e-9), "norm {} below scan {}", v, scan);
    }

    #[test]
    fn weak_duality_and_holder((w, f, g) in instance(2..5), psi in zeta_strategy()) {
        let space = MeasureSpace::atomic(w).unwrap();
        let g = SampledFunction::new(g).unwrap();
        let grid = exponent_grid(&psi, 24);
        let primal = sl_norm_primal(&g, &psi, &space, &grid, PrimalOptions::default()).unwrap().value;
        let dual = sl_norm_dual(&g, &psi, &space, &grid, DualOptions::default()).unwrap().value;
        prop_assert!(primal <= dual * (1.0 + 1e-7), "primal {} dual {}", primal, dual);
        // the dual decomposition bounds the whole-interval norm from above
        let f = SampledFunction::new(f).unwrap();
        let lhs = integral_product(&f, &g, &space).unwrap().abs();
        let rhs = grand_norm(&f, &psi, &space, SearchOptions::default()).unwrap().value * dual;
        prop_assert!(lhs <= rhs * (1.0 + 1e-9));
    }

    #[test]
    fn small_norm_is_homogeneous((w, _, g) in instance(2..5), psi in zeta_strategy(), lambda in 0.01f64..100.0) {
        let space = MeasureSpace::atomic(w).unwrap();
        let grid = exponent_grid(&psi, 24);
        let g = SampledFunction::new(g).unwrap();
        let d = |h: &SampledFunction<f64>| sl_norm_dual(h, &psi, &space, &grid, DualOptions::default()).unwrap().value;
        let base = d(&g);
        let scaled = d(&g.scaled(-lambda));
        prop_assert!((scaled - lambda * base).abs() <= 1e-6 * lambda * base.max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn indices_ignore_constant_factors(psi in zeta_strategy(), c in 0.01f64..100.0) {
        let r = IndexReport::compute(&psi);
        let s = IndexReport::compute(&psi.scaled(c));
        for (x, y) in [
            (r.grand.gamma1.value, s.grand.gamma1.value),
            (r.grand.gamma2.value, s.grand.gamma2.value),
            (r.small.gamma1.value, s.small.gamma1.value),
            (r.small.gamma2.value, s.small.gamma2.value),
        ] {
            prop_assert!((x - y).abs() < 1e-9, "{} vs {}", x, y);
        }
        prop_assert!(r.ordered(0.02));
    }
}
