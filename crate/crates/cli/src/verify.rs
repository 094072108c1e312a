//! Seeded property batteries behind `bilateral verify`.

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bilateral::chiest::{chi_integral_simple, Chi, SimpleFunction};
use bilateral::fundamental::phi_small;
use bilateral::grandnorm::{holder_check, in_g0_test, Certificate};
use bilateral::measure::{MeasureSpace, SampledFunction};
use bilateral::psi::PsiFunction;
use bilateral::smallnorm::{
    exponent_grid, primal_feasible, sharpness_witness, sl_norm_both, sl_norm_primal, sl_upper_single, PrimalOptions,
    GRID_SIZE,
};
use bilateral::Error;

pub const SUITES: [&str; 5] = ["duality", "holder", "indicators", "chi", "sharpness"];

#[derive(Debug)]
pub struct SuiteOutcome {
    pub suite: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
    pub worst: f64,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn default_count(suite: &str) -> usize {
    match suite {
        "duality" => 40,
        "holder" => 500,
        "indicators" => 20,
        "chi" => 40,
        _ => 20,
    }
}

pub fn suites(name: &str) -> Result<Vec<&'static str>> {
    if name == "all" {
        return Ok(SUITES.to_vec());
    }
    match SUITES.iter().find(|s| **s == name) {
        Some(s) => Ok(vec![*s]),
        None => bail!("unknown suite {name:?} (expected one of {} or all)", SUITES.join(", ")),
    }
}

fn random_zeta(rng: &mut ChaCha8Rng) -> PsiFunction<f64> {
    let a = rng.gen_range(1.0..2.0);
    let b = a + rng.gen_range(1.0..4.0);
    PsiFunction::zeta(a, b, rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)).expect("valid by construction")
}

fn random_space(rng: &mut ChaCha8Rng, n: usize) -> MeasureSpace<f64> {
    MeasureSpace::atomic((0..n).map(|_| rng.gen_range(0.1..2.0)).collect()).expect("positive weights")
}

fn random_values(rng: &mut ChaCha8Rng, n: usize, signed: bool) -> SampledFunction<f64> {
    let lo = if signed { -2.0 } else { 0.05 };
    SampledFunction::new((0..n).map(|_| rng.gen_range(lo..2.0)).collect()).expect("finite values")
}

pub fn run(suite: &'static str, seed: u64, count: Option<usize>) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = count.unwrap_or_else(|| default_count(suite));
    let mut out = SuiteOutcome { suite, cases, failures: Vec::new(), worst: 0.0 };
    for i in 0..cases {
        let r = match suite {
            "duality" => duality_case(&mut rng, i),
            "holder" => holder_case(&mut rng),
            "indicators" => indicator_case(&mut rng),
            "chi" => chi_case(&mut rng),
            _ => sharpness_case(&mut rng),
        };
        match r {
            Ok(w) => out.worst = out.worst.max(w),
            Err(msg) => out.failures.push(format!("case {i}: {msg}")),
        }
    }
    out
}

fn err(e: Error) -> String {
    format!("solver error: {e}")
}

/// Relative primal-dual gap, with both certificates re-checked.
fn duality_case(rng: &mut ChaCha8Rng, i: usize) -> Result<f64, String> {
    let n = rng.gen_range(2..=4);
    let space = random_space(rng, n);
    let g = random_values(rng, n, i.is_multiple_of(2));
    let psi = random_zeta(rng);
    let grid = exponent_grid(&psi, GRID_SIZE);
    let r = sl_norm_both(&g, &psi, &space, &grid).map_err(err)?;
    if r.gap.abs() > 1e-3 {
        return Err(format!(
            "strong duality: sup of the pairing over the G unit ball ({}) and inf over decompositions ({}) differ by {:.3e}",
            r.primal.value, r.dual.value, r.gap
        ));
    }
    if let Certificate::FeasiblePoint(f) = &r.primal.certificate {
        if !primal_feasible(f, &psi, &space, &grid, 1e-6).map_err(err)? {
            return Err("strong duality: primal certificate violates |f|_p <= psi(p)".into());
        }
    }
    if let Certificate::Decomposition(d) = &r.dual.certificate {
        d.verify(&g, &psi, &space).map_err(|e| format!("strong duality: decomposition does not reconstruct g: {e}"))?;
    }
    Ok(r.gap.abs())
}

/// `|∫ f g| <= ||f||_G ||g||_SL` with the single-exponent bound on the right.
fn holder_case(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let n = rng.gen_range(1..=4);
    let space = random_space(rng, n);
    let f = random_values(rng, n, true);
    let g = random_values(rng, n, true);
    let psi = random_zeta(rng);
    let upper = sl_upper_single(&g, &psi, &space, &[]).map_err(err)?.value;
    let h = holder_check(&f, &g, &psi, &space, upper, 1e-9).map_err(err)?;
    if !h.holds {
        return Err(format!("generalized Hölder inequality: |int f g| = {} exceeds ||f||_G * ||g||_SL = {}", h.lhs, h.rhs));
    }
    Ok(if h.rhs > 0.0 { h.lhs / h.rhs } else { 0.0 })
}

/// `||I_A||_SL = μ(A)/φ(μ(A))`.
fn indicator_case(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let psi = random_zeta(rng);
    let d = 10f64.powf(rng.gen_range(-4.0..2.0));
    let space = MeasureSpace::atomic(vec![d, 1.0]).map_err(err)?;
    let g = SampledFunction::new(vec![1.0, 0.0]).map_err(err)?;
    let grid = exponent_grid(&psi, GRID_SIZE);
    let chi = phi_small(&psi, d).map_err(err)?;
    let opts = PrimalOptions { refine: true, ..Default::default() };
    let p = sl_norm_primal(&g, &psi, &space, &grid, opts).map_err(err)?.value;
    let rel = (p - chi).abs() / chi;
    if rel > 1e-3 {
        return Err(format!("fundamental function of SL: norm of an indicator of measure {d} is {p}, expected mu/phi(mu) = {chi}"));
    }
    let single = sl_upper_single(&g, &psi, &space, &[]).map_err(err)?.value;
    if single < chi * (1.0 - 1e-12) {
        return Err(format!("fundamental function of SL: single-exponent bound {single} falls below {chi}"));
    }
    Ok(rel)
}

/// The χ-integral of a simple function dominates its SL norm.
fn chi_case(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let n = rng.gen_range(2..=4);
    let space = random_space(rng, n);
    let f = random_values(rng, n, true);
    let psi = random_zeta(rng);
    let simple = SimpleFunction::from_sampled(&space, &f).map_err(err)?;
    let chi = Chi::from_psi(&psi);
    let upper = chi_integral_simple(&simple, &chi);
    let grid = exponent_grid(&psi, GRID_SIZE);
    let lower = sl_norm_primal(&f, &psi, &space, &grid, PrimalOptions { refine: true, ..Default::default() })
        .map_err(err)?
        .value;
    if upper < lower - 1e-6 {
        return Err(format!("chi-integral bound: |||f||| = {upper} is below the SL norm lower bound {lower}"));
    }
    Ok(lower / upper)
}

/// Hölder equality at the peak exponent for functions in G°.
fn sharpness_case(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let n = rng.gen_range(2..=5);
    let space = random_space(rng, n);
    let f = random_values(rng, n, false);
    let psi = random_zeta(rng);
    let g0 = in_g0_test(&f, &psi, &space).map_err(err)?;
    if !g0.in_g0 {
        return Err("G° membership: a bounded function on a finite space is not in the closure of bounded functions".into());
    }
    match sharpness_witness(&f, &psi, &space) {
        Ok(w) if w.rel_error > 1e-6 => Err(format!(
            "sharpness of Hölder: pairing {} differs from ||f||_G * bound = {} by {:.3e}",
            w.pairing,
            w.grand * w.sl_upper,
            w.rel_error
        )),
        Ok(w) => Ok(w.rel_error),
        // a maximizer on the boundary has no witness; not a failure
        Err(Error::NoInteriorMaximizer(_)) => Ok(0.0),
        Err(e) => Err(err(e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_are_deterministic_and_pass() {
        for s in SUITES {
            let a = run(s, 11, Some(3));
            let b = run(s, 11, Some(3));
            assert!(a.passed(), "{s}: {:?}", a.failures);
            assert_eq!(a.worst.to_bits(), b.worst.to_bits());
        }
        assert!(suites("nope").is_err());
        assert_eq!(suites("all").unwrap().len(), SUITES.len());
    }
}
