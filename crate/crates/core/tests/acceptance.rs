//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bilateral::catalog::{self, CatalogEntry};
use bilateral::chiest::{chi_distance, chi_integral_simple, example_step, Chi, SimpleFunction};
use bilateral::fundamental::{log_grid, phi_grand_closed, phi_grand_ln, phi_small, small_delta_asymptote, P2Reading};
use bilateral::grandnorm::{holder_check, Certificate};
use bilateral::indices::IndexReport;
use bilateral::measure::{MeasureSpace, SampledFunction};
use bilateral::psi::PsiFunction;
use bilateral::smallnorm::{
    acn_check, exponent_grid, primal_feasible, sharpness_witness, sl_norm_both, sl_norm_primal, sl_upper_single, AcnMethod,
    PrimalOptions, GRID_SIZE,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn zeta(a: f64, b: f64, alpha: f64, beta: f64) -> PsiFunction<f64> {
    PsiFunction::zeta(a, b, alpha, beta).unwrap()
}

fn random_zeta(rng: &mut ChaCha8Rng) -> PsiFunction<f64> {
    let a = rng.gen_range(1.0..2.0);
    let b = a + rng.gen_range(1.0..4.0);
    zeta(a, b, rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0))
}

fn random_space(rng: &mut ChaCha8Rng, n: usize) -> MeasureSpace<f64> {
    MeasureSpace::atomic((0..n).map(|_| rng.gen_range(0.1..2.0)).collect()).unwrap()
}

fn c1_closed_form() -> Outcome {
    let start = Instant::now();
    let deltas = log_grid(1e-8, 1e8, 33);
    let mut worst = 0.0f64;
    let mut diagnostics = 0;
    for (a, b, al, be) in [(1.0, 2.0, 1.0, 1.0), (1.5, 4.0, 1.0, 2.0), (1.0, f64::INFINITY, 1.0, -1.0)] {
        for d in &deltas {
            let c = phi_grand_closed(a, b, al, be, *d, P2Reading::Stationary).map_err(|e| e.to_string())?;
            worst = worst.max((c.value - c.numeric).abs() / c.numeric);
            diagnostics += c.diagnostic.len();
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-4, format!("max relative deviation {worst:.3e}"))?;
    check(diagnostics == 0, format!("{diagnostics} discrepancy entries"))?;
    check(secs < 5.0, format!("runtime {secs:.2} s"))?;
    Ok(format!("max rel deviation {worst:.2e} over {} points, runtime {secs:.2} s", 3 * deltas.len()))
}

fn c2_asymptotics() -> Outcome {
    let psi = zeta(1.0, 2.0, 1.0, 1.0);
    let ratio = |d: f64| phi_grand_ln(&psi, d.ln()).phi() / small_delta_asymptote(2.0, 1.0, d).unwrap();
    let r = ratio(1e-12);
    check((0.9..=1.1).contains(&r), format!("ratio {r} at 1e-12"))?;
    // last two decades, walking towards 0
    let mut grid = log_grid(1e-12, 1e-10, 33);
    grid.reverse();
    let dev: Vec<f64> = grid.iter().map(|d| (ratio(*d) - 1.0).abs()).collect();
    let bad = dev.windows(2).filter(|w| w[1] > w[0] * (1.0 + 1e-9)).count();
    check(bad == 0, format!("{bad} increases of |ratio - 1|"))?;
    Ok(format!("ratio at 1e-12 = {r:.6}, |ratio-1| nonincreasing over [1e-12, 1e-10]"))
}

fn c3_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let n = [2, 3, 4][i % 3];
        let space = random_space(&mut rng, n);
        let signed = i % 2 == 0;
        let g = SampledFunction::new(
            (0..n).map(|_| if signed { rng.gen_range(-2.0..2.0) } else { rng.gen_range(0.05..2.0) }).collect(),
        )
        .unwrap();
        let psi = random_zeta(&mut rng);
        let grid = exponent_grid(&psi, GRID_SIZE);
        let r = sl_norm_both(&g, &psi, &space, &grid).map_err(|e| format!("instance {i}: {e}"))?;
        worst = worst.max(r.gap.abs());
        check(r.gap.abs() <= 1e-3, format!("instance {i}: gap {:.3e}", r.gap))?;
        match &r.primal.certificate {
            Certificate::FeasiblePoint(f) => {
                let ok = primal_feasible(f, &psi, &space, &grid, 1e-6).unwrap();
                check(ok, format!("instance {i}: primal certificate infeasible"))?;
                let pairing: f64 = f.iter().zip(g.values()).zip(space.weights()).map(|((f, g), w)| f * g * w).sum();
                check(
                    (pairing - r.primal.value).abs() <= 1e-9 * r.primal.value.abs().max(1e-300),
                    format!("instance {i}: primal pairing {pairing} vs value {}", r.primal.value),
                )?;
            }
            _ => return Err(format!("instance {i}: missing primal certificate")),
        }
        match &r.dual.certificate {
            Certificate::Decomposition(d) => {
                d.verify(&g, &psi, &space).map_err(|e| format!("instance {i}: {e}"))?;
                let cost: f64 = d
                    .components
                    .iter()
                    .map(|c| bilateral::smallnorm::component_cost(c.q, &c.values, &psi, &space).unwrap())
                    .sum();
                check(
                    (cost - r.dual.value).abs() <= 1e-9 * r.dual.value,
                    format!("instance {i}: recomputed cost {cost} vs {}", r.dual.value),
                )?;
            }
            _ => return Err(format!("instance {i}: missing decomposition")),
        }
    }
    Ok(format!("200 instances, max relative gap {worst:.2e}, all certificates verified"))
}

fn c4_indicators() -> Outcome {
    let psi = zeta(1.5, 4.0, 1.0, 2.0);
    let grid = exponent_grid(&psi, GRID_SIZE);
    let mut worst = 0.0f64;
    for d in log_grid(1e-4, 1e2, 3).into_iter().take(20) {
        let space = MeasureSpace::atomic(vec![d, 1.0]).unwrap();
        let g = SampledFunction::new(vec![1.0, 0.0]).unwrap();
        let chi = phi_small(&psi, d).unwrap();
        let opts = PrimalOptions { refine: true, ..Default::default() };
        let p = sl_norm_primal(&g, &psi, &space, &grid, opts).map_err(|e| e.to_string())?.value;
        let single = sl_upper_single(&g, &psi, &space, &[]).map_err(|e| e.to_string())?.value;
        let rel = (p - chi).abs() / chi;
        worst = worst.max(rel);
        check(rel <= 1e-3, format!("delta {d}: primal {p} vs chi {chi}"))?;
        check(single >= chi * (1.0 - 1e-12), format!("delta {d}: single bound {single} below chi {chi}"))?;
    }
    Ok(format!("20 deltas, max relative error {worst:.2e}, single-exponent bound >= chi throughout"))
}

fn c5_step_example() -> Outcome {
    let chi = Chi::power(0.5);
    let mut worst = 0.0f64;
    for n in [2u32, 10, 1000] {
        let v = chi_integral_simple(&example_step::<f64>(n), &chi);
        worst = worst.max((v - 0.5f64.sqrt() * (2.0 + 1.0 / n as f64)).abs());
    }
    check(worst <= 1e-12, format!("step values off by {worst:e}"))?;
    let far = chi_integral_simple(&example_step::<f64>(1_000_000_000), &chi);
    check((far - 2f64.sqrt()).abs() < 1e-9, format!("limit value {far}"))?;
    let one = SimpleFunction::on_intervals(vec![(1.0, vec![(0.0, 1.0)])]).unwrap();
    let v1 = chi_integral_simple(&one, &chi);
    check((v1 - 1.0).abs() <= 1e-12, format!("|||1||| = {v1}"))?;
    // f_n - 1 = (1/n) I((1/2, 1)): uniformly small, small in the χ-distance, yet |||f_n||| stays near √2
    for n in [2u32, 10, 1000] {
        let diff = SimpleFunction::on_intervals(vec![(1.0 / n as f64, vec![(0.5, 1.0)])]).unwrap();
        let d = chi_integral_simple(&diff, &chi);
        check((d - 0.5f64.sqrt() / n as f64).abs() <= 1e-12, format!("distance at n={n}: {d}"))?;
    }
    // same distance on an atomic discretization through chi_distance
    let space = MeasureSpace::atomic(vec![0.5, 0.5]).unwrap();
    let f = SampledFunction::new(vec![1.0, 1.001]).unwrap();
    let d = chi_distance(&f, &SampledFunction::new(vec![1.0, 1.0]).unwrap(), &space, &chi, 16).unwrap();
    check((d - 0.5f64.sqrt() / 1000.0).abs() <= 1e-12, format!("chi_distance {d}"))?;
    Ok(format!("|||f_n||| exact to {worst:.1e}; limit sqrt 2 vs |||1||| = 1"))
}

fn c6_domination() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = f64::INFINITY;
    for i in 0..100 {
        let n = rng.gen_range(2..=5);
        let space = random_space(&mut rng, n);
        let levels = [-1.5, -0.5, 0.5, 1.0, 2.0];
        let f = SampledFunction::new((0..n).map(|_| levels[rng.gen_range(0..levels.len())]).collect()).unwrap();
        let psi = random_zeta(&mut rng);
        let chi = Chi::from_psi(&psi);
        let simple = SimpleFunction::from_sampled(&space, &f).map_err(|e| e.to_string())?;
        let triple = chi_integral_simple(&simple, &chi);
        let grid = exponent_grid(&psi, GRID_SIZE);
        let opts = PrimalOptions { refine: true, ..Default::default() };
        let p = sl_norm_primal(&f, &psi, &space, &grid, opts).map_err(|e| e.to_string())?.value;
        worst = worst.min(triple - p);
        check(triple >= p - 1e-6, format!("function {i}: |||f||| = {triple} < primal {p}"))?;
    }
    Ok(format!("100 simple functions, min(|||f||| - primal) = {worst:.3e}"))
}

fn c7_holder() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut min_slack = f64::INFINITY;
    let mut violations = 0;
    let psis: Vec<PsiFunction<f64>> = (0..20).map(|_| random_zeta(&mut rng)).collect();
    for i in 0..10_000 {
        let n = rng.gen_range(2..=5);
        let space = random_space(&mut rng, n);
        let f = SampledFunction::new((0..n).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
        let g = SampledFunction::new((0..n).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
        let psi = &psis[i % psis.len()];
        let upper = sl_upper_single(&g, psi, &space, &[]).map_err(|e| e.to_string())?.value;
        let r = holder_check(&f, &g, psi, &space, upper, 1e-9).map_err(|e| e.to_string())?;
        if !r.holds {
            violations += 1;
        }
        if r.rhs > 0.0 {
            min_slack = min_slack.min(r.slack / r.rhs);
        }
    }
    check(violations == 0, format!("{violations} violations"))?;
    Ok(format!("10000 pairs, zero violations, min relative slack {min_slack:.3e}"))
}

fn unimodal(profile: &[f64]) -> bool {
    let peak = profile.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, v)| if *v > b.1 { (i, *v) } else { b }).0;
    profile[..=peak].windows(2).all(|w| w[1] >= w[0]) && profile[peak..].windows(2).all(|w| w[1] <= w[0])
}

fn c8_sharpness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut done = 0;
    let mut tried = 0;
    let mut worst = 0.0f64;
    while done < 50 {
        tried += 1;
        if tried > 2000 {
            return Err(format!("only {done} unimodal instances in {tried} draws"));
        }
        let n = rng.gen_range(2..=5);
        let space = random_space(&mut rng, n);
        let f = SampledFunction::new((0..n).map(|_| rng.gen_range(0.1..3.0)).collect()).unwrap();
        let psi = random_zeta(&mut rng);
        let grid = psi.interval().interior(200);
        let profile: Vec<f64> = grid.iter().map(|p| f.ln_norm(*p, &space).unwrap() - psi.ln_eval(*p)).collect();
        if !unimodal(&profile) {
            continue;
        }
        let g0 = bilateral::grandnorm::in_g0_test(&f, &psi, &space).map_err(|e| e.to_string())?;
        check(g0.in_g0, format!("instance {done}: bounded function not reported in G°"))?;
        let w = match sharpness_witness(&f, &psi, &space) {
            Ok(w) => w,
            Err(bilateral::Error::NoInteriorMaximizer(_)) => continue,
            Err(e) => return Err(e.to_string()),
        };
        worst = worst.max(w.rel_error);
        check(w.rel_error <= 1e-6, format!("instance {done}: relative error {:.3e}", w.rel_error))?;
        done += 1;
    }
    Ok(format!("50 witnesses ({tried} draws), max relative error {worst:.2e}"))
}

fn c9_indices() -> Outcome {
    let mut lines = Vec::new();
    for (a, b) in [(1.5, 4.0), (2.0, 8.0)] {
        let r = IndexReport::compute(&zeta(a, b, 1.0, 1.0));
        let d = r.diagnostics();
        check(d.is_empty(), format!("(a,b)=({a},{b}): {d:?}"))?;
        let (d1, d2) = r.duality_defect;
        check(d1.abs() <= 0.03 && d2.abs() <= 0.03, format!("(a,b)=({a},{b}): duality defects {d1}, {d2}"))?;
        lines.push(format!(
            "({a},{b}): G ({:.4}, {:.4}) SL ({:.4}, {:.4})",
            r.grand.gamma1.value, r.grand.gamma2.value, r.small.gamma1.value, r.small.gamma2.value
        ));
    }
    Ok(lines.join("; "))
}

fn c10_catalog() -> Outcome {
    let grids: Vec<(CatalogEntry<f64>, f64, f64)> = catalog::defaults::<f64>()
        .into_iter()
        .map(|e| {
            let (lo, hi) = match e.name() {
                "f_a_gamma" | "g_a_gamma_m" => (1.5, 6.0),
                "g_b_nu" => (1.0, 4.0),
                "h_m" => (1.0, 10.0),
                "f_ab_gamma_nu" | "f_L_plus_g_L" => (1.5, 4.0),
                "f_L" => (1.0, 2.0),
                "g_L" => (1.5, 6.0),
                "saddle" => (1.15, 1.85),
                _ => (1.0, 20.0),
            };
            (e, lo, hi)
        })
        .collect();
    let mut worst = 0.0f64;
    for (e, lo, hi) in &grids {
        let space = e.default_space().map_err(|x| x.to_string())?;
        let f = e.sample_plain(&space).map_err(|x| x.to_string())?;
        for i in 0..20 {
            let p = lo + (hi - lo) * (0.1 + 0.8 * i as f64 / 19.0);
            let oracle = e.ln_moment(p);
            let quad = space.ln_moment(f.values(), p).map_err(|x| x.to_string())?;
            let rel = ((quad - oracle).exp() - 1.0).abs();
            worst = worst.max(rel);
            check(rel <= 1e-6, format!("{} at p={p}: relative error {rel:.3e}", e.name()))?;
        }
    }
    let mut claims = 0;
    for name in ["f_ab_gamma_nu", "g_a_gamma_m", "f_L", "g_L", "f_L_plus_g_L", "saddle", "orlicz_tail"] {
        let e = CatalogEntry::<f64>::from_params(name, &[]).unwrap();
        let r = catalog::catalog_membership_check(&e).map_err(|x| x.to_string())?;
        for c in &r.claims {
            check(c.passed, format!("{name}: claim failed: {}", c.description))?;
            claims += 1;
        }
    }
    let listing = catalog::listing();
    check(listing.contains(catalog::GAMMA_PAIRING_NOTE), "listing lacks the Gamma pairing note".into())?;
    Ok(format!("moments agree to {worst:.1e}; {claims} membership claims pass; pairing note present"))
}

fn c11_acn() -> Outcome {
    let psi = zeta(1.5, 4.0, 1.0, 2.0);
    // indicator of a unit-mass set, E(n) of mass 2^-n
    let k = 24;
    let mut w: Vec<f64> = (1..k).map(|i| 0.5f64.powi(i)).collect();
    w.push(0.5f64.powi(k - 1));
    let space = MeasureSpace::atomic(w).unwrap();
    let g = SampledFunction::new(vec![1.0; k as usize]).unwrap();
    let sets: Vec<Vec<bool>> = (1..=20).map(|n| (0..k as usize).map(|i| i >= n).collect()).collect();
    let r = acn_check(&g, &psi, &space, &sets, AcnMethod::Single).map_err(|e| e.to_string())?;
    check(r.monotone && r.vanishes, format!("indicator profile {:?}", r.values))?;
    for (n, v) in r.values.iter().enumerate() {
        let want = phi_small(&psi, 0.5f64.powi(n as i32 + 1)).unwrap();
        check((v - want).abs() <= 1e-9 * want, format!("indicator set {}: {v} vs chi {want}", n + 1))?;
    }
    let ind_last = r.values.last().copied().unwrap() / r.norm;

    // catalog function on its quadrature space, tail sets {|ln|x|| > 5n}
    let e = CatalogEntry::<f64>::from_params("f_ab_gamma_nu", &[]).unwrap();
    let space = e.default_space().unwrap();
    let g = e.sample_plain(&space).unwrap();
    let sets: Vec<Vec<bool>> =
        (1..=20).map(|n| space.nodes().iter().map(|x| x.ln_x.abs() > 5.0 * n as f64).collect()).collect();
    let r = acn_check(&g, &psi, &space, &sets, AcnMethod::Single).map_err(|e| e.to_string())?;
    check(r.monotone && r.vanishes, format!("catalog profile {:?} (norm {})", r.values, r.norm))?;
    Ok(format!(
        "indicator ratio {:.2e}, catalog ratio {:.2e} after 20 sets",
        ind_last,
        r.values.last().unwrap() / r.norm
    ))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("closed-form fundamental function", c1_closed_form),
        ("small-delta asymptotics", c2_asymptotics),
        ("strong duality with certificates", c3_duality),
        ("indicator norms equal chi", c4_indicators),
        ("step-function example", c5_step_example),
        ("chi-integral dominates the small norm", c6_domination),
        ("generalized Hoelder inequality", c7_holder),
        ("sharpness witnesses", c8_sharpness),
        ("Boyd and fundamental indices", c9_indices),
        ("example catalog", c10_catalog),
        ("absolutely continuous norm", c11_acn),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{secs:.1}s]", i + 1)
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
