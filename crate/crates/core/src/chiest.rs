//! The χ-integral `|||f||| = ∫ |f| dχ`, a majorant of the small norm, and
//! the distance it induces.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fundamental::phi_small;
use crate::measure::{MeasureSpace, SampledFunction};
use crate::psi::PsiFunction;
use crate::scalar::Scalar;

/// Level counts tried by `chi_integral_general`.
pub const LEVEL_FAMILY: [usize; 5] = [1, 2, 4, 8, 16];
/// Relative change that ends the truncation ladder.
pub const TRUNCATION_TOL: f64 = 1e-6;

/// A fundamental function `δ ↦ χ(δ)` of the small space.
#[derive(Clone)]
pub struct Chi<T> {
    pub label: String,
    eval: Arc<dyn Fn(T) -> T + Send + Sync>,
}

impl<T: Scalar> std::fmt::Debug for Chi<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Chi({})", self.label)
    }
}

impl<T: Scalar> Chi<T> {
    /// `χ(δ) = δ/φ(G(ψ), δ)`.
    pub fn from_psi(psi: &PsiFunction<T>) -> Self {
        let psi = psi.clone();
        Self {
            label: format!("chi[{}]", psi.label),
            eval: Arc::new(move |d| if d > T::zero() { phi_small(&psi, d).unwrap_or(T::nan()) } else { T::zero() }),
        }
    }

    /// `χ(δ) = δ^e`.
    pub fn power(e: T) -> Self {
        Self { label: format!("delta^{e}"), eval: Arc::new(move |d: T| d.powf(e)) }
    }

    pub fn custom<F: Fn(T) -> T + Send + Sync + 'static>(label: &str, eval: F) -> Self {
        Self { label: label.into(), eval: Arc::new(eval) }
    }

    pub fn eval(&self, delta: T) -> T {
        if delta <= T::zero() {
            return T::zero();
        }
        (self.eval)(delta)
    }
}

/// Support of one term of a simple function.
#[derive(Debug, Clone, PartialEq)]
pub enum SetSpec<T> {
    /// Atom indices of a space.
    Atoms(Vec<usize>),
    /// Union of intervals of the line with Lebesgue measure.
    Intervals(Vec<(T, T)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term<T> {
    pub coef: T,
    pub set: SetSpec<T>,
    pub measure: T,
}

/// `f = Σ_k c_k I(H_k)` with pairwise disjoint `H_k` of positive finite measure.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleFunction<T> {
    terms: Vec<Term<T>>,
}

fn check_measure<T: Scalar>(m: T) -> Result<()> {
    if !(m > T::zero()) || !m.is_finite() {
        return Err(Error::Domain(format!("set measure {m} must be positive and finite")));
    }
    Ok(())
}

impl<T: Scalar> SimpleFunction<T> {
    /// Terms over atom sets of `space`.
    pub fn on_atoms(space: &MeasureSpace<T>, terms: Vec<(T, Vec<usize>)>) -> Result<Self> {
        let mut seen = vec![false; space.len()];
        let mut out = Vec::with_capacity(terms.len());
        for (coef, atoms) in terms {
            for &i in &atoms {
                if i >= space.len() {
                    return Err(Error::Domain(format!("atom {i} is not in the space")));
                }
                if seen[i] {
                    return Err(Error::Overlap(format!("atom {i} appears in two sets")));
                }
                seen[i] = true;
            }
            let measure: T = atoms.iter().map(|&i| space.weights()[i]).sum();
            check_measure(measure)?;
            out.push(Term { coef, set: SetSpec::Atoms(atoms), measure });
        }
        Ok(Self { terms: out })
    }

    /// Terms over unions of intervals; shared endpoints are allowed.
    pub fn on_intervals(terms: Vec<(T, Vec<(T, T)>)>) -> Result<Self> {
        let mut all: Vec<(T, T)> = Vec::new();
        let mut out = Vec::with_capacity(terms.len());
        for (coef, ivs) in terms {
            let mut measure = T::zero();
            for &(lo, hi) in &ivs {
                if !(hi > lo) {
                    return Err(Error::Domain(format!("empty interval ({lo}, {hi})")));
                }
                if all.iter().any(|&(l, h)| lo < h && l < hi) {
                    return Err(Error::Overlap(format!("interval ({lo}, {hi}) overlaps another set")));
                }
                all.push((lo, hi));
                measure = measure + (hi - lo);
            }
            check_measure(measure)?;
            out.push(Term { coef, set: SetSpec::Intervals(ivs), measure });
        }
        Ok(Self { terms: out })
    }

    /// Groups the atoms of a sampled function by value.
    pub fn from_sampled(space: &MeasureSpace<T>, f: &SampledFunction<T>) -> Result<Self> {
        let mut groups: Vec<(T, Vec<usize>)> = Vec::new();
        for (i, v) in f.values().iter().enumerate() {
            if *v == T::zero() {
                continue;
            }
            match groups.iter_mut().find(|g| g.0 == *v) {
                Some(g) => g.1.push(i),
                None => groups.push((*v, vec![i])),
            }
        }
        Self::on_atoms(space, groups)
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    /// Drops zero coefficients and merges the sets that carry equal coefficients.
    pub fn canonical(&self) -> Self {
        let mut out: Vec<Term<T>> = Vec::new();
        for t in self.terms.iter().filter(|t| t.coef != T::zero()) {
            match out.iter_mut().find(|o| o.coef == t.coef) {
                Some(o) => {
                    o.measure = o.measure + t.measure;
                    o.set = match (&o.set, &t.set) {
                        (SetSpec::Atoms(a), SetSpec::Atoms(b)) => SetSpec::Atoms(a.iter().chain(b).copied().collect()),
                        (SetSpec::Intervals(a), SetSpec::Intervals(b)) => {
                            SetSpec::Intervals(a.iter().chain(b).copied().collect())
                        }
                        _ => o.set.clone(),
                    };
                }
                None => out.push(t.clone()),
            }
        }
        Self { terms: out }
    }

    /// Values on the atoms of a space of `len` atoms.
    pub fn to_sampled(&self, len: usize) -> Result<SampledFunction<T>> {
        let mut v = vec![T::zero(); len];
        for t in &self.terms {
            match &t.set {
                SetSpec::Atoms(a) => a.iter().for_each(|&i| v[i] = t.coef),
                SetSpec::Intervals(_) => {
                    return Err(Error::NotApplicable("interval sets have no atom values".into()));
                }
            }
        }
        SampledFunction::new(v)
    }

    pub fn scaled(&self, lambda: T) -> Self {
        Self {
            terms: self.terms.iter().map(|t| Term { coef: t.coef * lambda, ..t.clone() }).collect(),
        }
    }
}

/// `Σ_k |c_k| χ(μ(H_k))` over the canonical representation.
pub fn chi_integral_simple<T: Scalar>(f: &SimpleFunction<T>, chi: &Chi<T>) -> T {
    f.canonical().terms.iter().map(|t| t.coef.abs() * chi.eval(t.measure)).sum()
}

/// A level-set majorant `g = Σ_k t_k I(H_k) ≥ f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Majorant<T> {
    pub levels: Vec<T>,
    pub masks: Vec<Vec<bool>>,
    pub measures: Vec<T>,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralReport<T> {
    /// Smallest majorant value over the family.
    pub value: T,
    pub majorant: Majorant<T>,
    /// Canonical sum when `f` takes at most `max_levels` distinct values.
    pub simple_value: Option<T>,
    /// Set when the majorant undercuts the canonical sum.
    pub undercuts_simple: bool,
}

/// Distinct positive values of `f` in increasing order with the measure of each level set.
struct Levels<T> {
    values: Vec<T>,
    cum: Vec<T>,
    members: Vec<Vec<usize>>,
}

impl<T: Scalar> Levels<T> {
    fn new(space: &MeasureSpace<T>, f: &[T]) -> Self {
        let mut idx: Vec<usize> = (0..f.len()).filter(|&i| f[i] > T::zero()).collect();
        idx.sort_by(|&i, &j| f[i].partial_cmp(&f[j]).unwrap());
        let mut values: Vec<T> = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut cum = vec![T::zero()];
        for i in idx {
            if values.last() != Some(&f[i]) {
                values.push(f[i]);
                members.push(Vec::new());
                cum.push(*cum.last().unwrap());
            }
            members.last_mut().unwrap().push(i);
            let c = cum.last_mut().unwrap();
            *c = *c + space.weights()[i];
        }
        Self { values, cum, members }
    }

    fn len(&self) -> usize {
        self.values.len()
    }
}

/// Cost of the majorant whose blocks end at `ends` (exclusive, increasing, last = len).
fn block_cost<T: Scalar>(lv: &Levels<T>, ends: &[usize], chi: &dyn Fn(T) -> T) -> T {
    let mut start = 0;
    let mut total = T::zero();
    for &e in ends {
        if e > start {
            total = total + lv.values[e - 1] * chi(lv.cum[e] - lv.cum[start]);
        }
        start = e;
    }
    total
}

/// Coordinate search over block boundaries, golden section per boundary.
fn optimize_ends<T: Scalar>(lv: &Levels<T>, mut ends: Vec<usize>, chi: &dyn Fn(T) -> T) -> (Vec<usize>, T) {
    let mut best = block_cost(lv, &ends, chi);
    for _ in 0..50 {
        let mut improved = false;
        for k in 0..ends.len().saturating_sub(1) {
            let lo = if k == 0 { 1 } else { ends[k - 1] + 1 };
            let hi = ends[k + 1] - 1;
            if hi < lo {
                continue;
            }
            let cost_at = |e: usize, ends: &mut Vec<usize>| {
                let keep = ends[k];
                ends[k] = e;
                let c = block_cost(lv, ends, chi);
                ends[k] = keep;
                c
            };
            // golden section on the integer range, then a local scan
            let (mut a, mut b) = (lo, hi);
            while b - a > 4 {
                let m1 = a + (b - a) * 382 / 1000;
                let m2 = a + (b - a) * 618 / 1000;
                if cost_at(m1, &mut ends) <= cost_at(m2, &mut ends) {
                    b = m2;
                } else {
                    a = m1;
                }
            }
            let mut cand = (a..=b).chain([ends[k]]).collect::<Vec<_>>();
            let around = ends[k];
            cand.extend((around.saturating_sub(2)..=around + 2).filter(|e| *e >= lo && *e <= hi));
            for e in cand {
                let c = cost_at(e, &mut ends);
                if c < best * (T::one() - T::lit(1e-15)) {
                    best = c;
                    ends[k] = e;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    (ends, best)
}

/// `inf` of `∫ g dχ` over level-set majorants `g ≥ f` with at most
/// `max_levels` levels (all counts of `LEVEL_FAMILY` up to it are tried).
pub fn chi_integral_general<T: Scalar>(
    f: &SampledFunction<T>,
    space: &MeasureSpace<T>,
    chi: &Chi<T>,
    max_levels: usize,
) -> Result<GeneralReport<T>> {
    if f.len() != space.len() {
        return Err(Error::ShapeMismatch { expected: space.len(), got: f.len() });
    }
    if !f.is_nonnegative() {
        return Err(Error::Domain("chi_integral_general needs f >= 0".into()));
    }
    let family: Vec<usize> = LEVEL_FAMILY.iter().copied().filter(|m| *m <= max_levels).collect();
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let lv = Levels::new(space, f.values());
    let n = lv.len();
    if n == 0 {
        let empty = Majorant { levels: vec![], masks: vec![], measures: vec![], value: T::zero() };
        return Ok(GeneralReport { value: T::zero(), majorant: empty, simple_value: Some(T::zero()), undercuts_simple: false });
    }
    let cache: RefCell<HashMap<u64, T>> = RefCell::new(HashMap::new());
    let chi_cached = |d: T| -> T {
        let key = d.as_f64().to_bits();
        if let Some(v) = cache.borrow().get(&key) {
            return *v;
        }
        let v = chi.eval(d);
        cache.borrow_mut().insert(key, v);
        v
    };

    let mut best: Option<(Vec<usize>, T)> = None;
    for &m in &family {
        let m = m.min(n);
        let ends: Vec<usize> = if m == n {
            (1..=n).collect()
        } else {
            (1..=m).map(|k| (k * n).div_ceil(m)).collect()
        };
        let (ends, cost) = optimize_ends(&lv, ends, &chi_cached);
        if best.as_ref().is_none_or(|b| cost < b.1) {
            best = Some((ends, cost));
        }
    }
    let (ends, value) = best.unwrap();
    let mut levels = Vec::new();
    let mut masks = Vec::new();
    let mut measures = Vec::new();
    let mut start = 0;
    for &e in &ends {
        if e > start {
            let mut mask = vec![false; f.len()];
            lv.members[start..e].iter().flatten().for_each(|&i| mask[i] = true);
            levels.push(lv.values[e - 1]);
            measures.push(lv.cum[e] - lv.cum[start]);
            masks.push(mask);
        }
        start = e;
    }
    let simple_value = (n <= max_levels).then(|| {
        let all: Vec<usize> = (1..=n).collect();
        block_cost(&lv, &all, &chi_cached)
    });
    let undercuts_simple = simple_value.is_some_and(|s| value < s * (T::one() - T::lit(1e-12)));
    Ok(GeneralReport { value, majorant: Majorant { levels, masks, measures, value }, simple_value, undercuts_simple })
}

/// Truncation ladder `N = 2^k` on `f · I(f ≤ N)` until successive values
/// agree to `TRUNCATION_TOL`; returns the last value and `N`.
pub fn chi_integral_truncated<T: Scalar>(
    f: &SampledFunction<T>,
    space: &MeasureSpace<T>,
    chi: &Chi<T>,
    max_levels: usize,
) -> Result<(T, T)> {
    let top = f.values().iter().copied().fold(T::zero(), T::max);
    let mut prev: Option<(T, usize)> = None;
    let mut n = T::one();
    loop {
        let mask: Vec<bool> = f.values().iter().map(|v| *v <= n).collect();
        let kept = mask.iter().filter(|m| **m).count();
        // a rung that keeps the same atoms as the last one is skipped
        if prev.is_none_or(|(_, k)| k != kept) || n >= top {
            let v = chi_integral_general(&f.restricted(&mask), space, chi, max_levels)?.value;
            let settled = prev.is_some_and(|(p, _)| (v - p).abs() <= T::lit(TRUNCATION_TOL) * v.abs());
            if settled || n >= top {
                return Ok((v, n));
            }
            prev = Some((v, kept));
        }
        n = n * T::lit(2.0);
    }
}

/// `|||f||| = |||f⁺||| + |||f⁻|||` with the majorant family of `max_levels` levels.
pub fn chi_seminorm<T: Scalar>(f: &SampledFunction<T>, space: &MeasureSpace<T>, chi: &Chi<T>, max_levels: usize) -> Result<T> {
    let pos = SampledFunction::new(f.values().iter().map(|v| v.max(T::zero())).collect())?;
    let neg = SampledFunction::new(f.values().iter().map(|v| (-*v).max(T::zero())).collect())?;
    Ok(chi_integral_general(&pos, space, chi, max_levels)?.value + chi_integral_general(&neg, space, chi, max_levels)?.value)
}

/// `|||f||| ` for a simple function: the canonical sums of `f⁺` and `f⁻`.
pub fn chi_seminorm_simple<T: Scalar>(f: &SimpleFunction<T>, chi: &Chi<T>) -> T {
    chi_integral_simple(f, chi)
}

/// `d(f, g) = |||f - g|||`.
pub fn chi_distance<T: Scalar>(
    f: &SampledFunction<T>,
    g: &SampledFunction<T>,
    space: &MeasureSpace<T>,
    chi: &Chi<T>,
    max_levels: usize,
) -> Result<T> {
    chi_seminorm(&f.add(&g.scaled(-T::one()))?, space, chi, max_levels)
}

/// `f_n = I([0,1/2]) + (1 + 1/n) I((1/2,1))`.
pub fn example_step<T: Scalar>(n: u32) -> SimpleFunction<T> {
    let half = T::lit(0.5);
    SimpleFunction::on_intervals(vec![
        (T::one(), vec![(T::zero(), half)]),
        (T::one() + T::one() / T::lit(n as f64), vec![(half, T::one())]),
    ])
    .expect("disjoint by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt_chi() -> Chi<f64> {
        Chi::power(0.5)
    }

    #[test]
    fn step_sequence_values() {
        for n in [2, 10, 1000] {
            let v = chi_integral_simple(&example_step::<f64>(n), &sqrt_chi());
            let want = 0.5f64.sqrt() * (2.0 + 1.0 / n as f64);
            assert!((v - want).abs() < 1e-12);
        }
        let one = SimpleFunction::on_intervals(vec![(1.0, vec![(0.0, 1.0)])]).unwrap();
        assert!((chi_integral_simple(&one, &sqrt_chi()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_merges_equal_coefficients() {
        let f = SimpleFunction::on_intervals(vec![(1.0, vec![(0.0, 0.5)]), (1.0, vec![(0.5, 1.0)])]).unwrap();
        assert_eq!(f.canonical().terms().len(), 1);
        assert!((chi_integral_simple(&f, &sqrt_chi()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_rejected() {
        let r = SimpleFunction::on_intervals(vec![(1.0f64, vec![(0.0, 0.6)]), (2.0, vec![(0.5, 1.0)])]);
        assert!(matches!(r, Err(Error::Overlap(_))));
        let space = MeasureSpace::atomic(vec![1.0f64, 1.0]).unwrap();
        assert!(SimpleFunction::on_atoms(&space, vec![(1.0, vec![0]), (2.0, vec![0, 1])]).is_err());
    }

    #[test]
    fn linear_function_two_levels() {
        let space = MeasureSpace::interval(0.0, 1.0, 4096).unwrap();
        let f = SampledFunction::sample(&space, |n| n.x).unwrap();
        let one = chi_integral_general(&f, &space, &sqrt_chi(), 1).unwrap();
        assert!((one.value - 1.0).abs() < 1e-3);
        let two = chi_integral_general(&f, &space, &sqrt_chi(), 2).unwrap();
        let oracle = (1..1000).map(|k| k as f64 / 1000.0).map(|s| s.powf(1.5) + (1.0 - s).sqrt()).fold(f64::MAX, f64::min);
        assert!(two.value <= 0.981);
        assert!((two.value - oracle).abs() < 2e-3);
        let four = chi_integral_general(&f, &space, &sqrt_chi(), 4).unwrap();
        assert!(four.value <= two.value);
    }

    #[test]
    fn majorant_undercuts_step_function() {
        let space = MeasureSpace::atomic(vec![0.5, 0.5]).unwrap();
        let f = SampledFunction::new(vec![1.0, 1.001]).unwrap();
        let r = chi_integral_general(&f, &space, &sqrt_chi(), 16).unwrap();
        assert!(r.undercuts_simple);
        assert!((r.value - 1.001).abs() < 1e-12);
        assert!((r.simple_value.unwrap() - 0.5f64.sqrt() * 2.001).abs() < 1e-12);
    }

    #[test]
    fn seminorm_homogeneous_and_distance() {
        let space = MeasureSpace::atomic(vec![0.2, 0.3, 0.5]).unwrap();
        let f = SampledFunction::new(vec![1.0, -2.0, 0.5]).unwrap();
        let chi = sqrt_chi();
        let a = chi_seminorm(&f, &space, &chi, 16).unwrap();
        let b = chi_seminorm(&f.scaled(-2.5), &space, &chi, 16).unwrap();
        assert!((b - 2.5 * a).abs() < 1e-12);
        assert_eq!(chi_seminorm(&SampledFunction::zeros(3), &space, &chi, 16).unwrap(), 0.0);
        assert_eq!(chi_distance(&f, &f, &space, &chi, 16).unwrap(), 0.0);
        let d0 = chi_distance(&f, &SampledFunction::zeros(3), &space, &chi, 16).unwrap();
        assert!((d0 - a).abs() < 1e-15);
    }

    #[test]
    fn truncation_ladder_stops() {
        let space = MeasureSpace::atomic(vec![0.25; 4]).unwrap();
        let f = SampledFunction::new(vec![0.5, 3.0, 9.0, 100.0]).unwrap();
        let (v, n) = chi_integral_truncated(&f, &space, &sqrt_chi(), 16).unwrap();
        assert!(n >= 100.0);
        assert!((v - chi_integral_general(&f, &space, &sqrt_chi(), 16).unwrap().value).abs() < 1e-12);
    }
}
