//! Supremum of a function of the exponent over an open interval `(a, b)`.
//!
//! The objective is sampled on a grid that clusters geometrically at both
//! endpoints, then the best bracket is polished by golden-section search.
//! Objectives are passed in log form (`ln` of the quantity whose supremum
//! is wanted) so that ratios spanning hundreds of orders of magnitude stay
//! representable.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Number of geometric endpoint samples for a finite endpoint.
pub const CLUSTER_DEPTH: usize = 40;
/// Number of doubling samples `p = h·2^k` towards `b = ∞`.
pub const INFINITE_DEPTH: usize = 20;
/// Endpoint growth beyond this factor always counts as divergence.
pub const BLOWUP_FACTOR: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Lower,
    Upper,
}

/// Open exponent interval `(a, b)` with a pivot `h ∈ (a, b)` that anchors
/// the endpoint clusters. `b` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentInterval<T> {
    pub a: T,
    pub b: T,
    pub pivot: T,
}

impl<T: Scalar> ExponentInterval<T> {
    pub fn new(a: T, b: T, pivot: T) -> Self {
        debug_assert!(a < pivot && pivot < b);
        Self { a, b, pivot }
    }

    pub fn contains(&self, p: T) -> bool {
        p > self.a && p < self.b
    }

    /// Samples `a + (h-a)2^{-k}`, `k = 1..=depth`, ordered towards `a`.
    pub fn lower_cluster(&self, depth: usize) -> Vec<T> {
        let gap = self.pivot - self.a;
        let mut out = Vec::with_capacity(depth);
        let mut scale = T::one();
        for _ in 0..depth {
            scale = scale / T::lit(2.0);
            let p = self.a + gap * scale;
            if p > self.a {
                out.push(p);
            }
        }
        out
    }

    /// Samples towards `b`: `b - (b-h)2^{-k}` or `h·2^k` when `b = ∞`.
    pub fn upper_cluster(&self, depth: usize) -> Vec<T> {
        let mut out = Vec::new();
        if self.b.is_finite() {
            let gap = self.b - self.pivot;
            let mut scale = T::one();
            for _ in 0..depth {
                scale = scale / T::lit(2.0);
                let p = self.b - gap * scale;
                if p < self.b {
                    out.push(p);
                }
            }
        } else {
            let mut p = self.pivot;
            for _ in 0..INFINITE_DEPTH.min(depth) {
                p = p * T::lit(2.0);
                out.push(p);
            }
        }
        out
    }

    /// Uniform interior samples between the first cluster points.
    pub fn interior(&self, resolution: usize) -> Vec<T> {
        let lo = self.a + (self.pivot - self.a) / T::lit(2.0);
        let hi = if self.b.is_finite() {
            self.b - (self.b - self.pivot) / T::lit(2.0)
        } else {
            self.pivot * T::lit(2.0)
        };
        let n = resolution.max(2);
        (0..n)
            .map(|i| lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1))
            .collect()
    }

    /// Full sorted grid with clusters, interior, pivot and `extra` points.
    pub fn grid(&self, resolution: usize, extra: &[T]) -> Vec<T> {
        let mut pts = self.lower_cluster(CLUSTER_DEPTH);
        pts.extend(self.upper_cluster(CLUSTER_DEPTH));
        pts.extend(self.interior(resolution));
        pts.push(self.pivot);
        pts.extend(extra.iter().copied().filter(|p| self.contains(*p)));
        pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        pts.dedup();
        pts
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Interior grid points (the clusters come on top of these).
    pub resolution: usize,
    pub polish: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { resolution: 64, polish: true }
    }
}

/// Outcome of a supremum search, in log form.
#[derive(Debug, Clone, PartialEq)]
pub struct SupResult<T> {
    /// `ln sup`; `+inf` on divergence, `-inf` if the objective vanishes.
    pub ln_value: T,
    /// Maximizing exponent, or the endpoint approached on divergence.
    pub arg: T,
    pub divergent_at: Option<Endpoint>,
    /// Best grid sample before polishing.
    pub grid_ln_value: T,
    /// Samples `(p, ln objective)` along each endpoint cluster, ordered towards the endpoint.
    pub lower_profile: Vec<(T, T)>,
    pub upper_profile: Vec<(T, T)>,
    pub grid_points: usize,
}

impl<T: Scalar> SupResult<T> {
    pub fn value(&self) -> T {
        self.ln_value.exp()
    }
}

/// Decides whether log-samples ordered towards an endpoint blow up.
///
/// The last three increments must be positive and either the final sample
/// exceeds `reference` by `BLOWUP_FACTOR`, or the increments do not decay
/// geometrically (ratio at least 3/4), which is the signature of power or
/// logarithmic growth along the halving sequence.
pub fn endpoint_blowup<T: Scalar>(samples: &[T], reference: T) -> bool {
    let n = samples.len();
    if n < 4 {
        return false;
    }
    let s = &samples[n - 4..];
    if s.iter().any(|v| v.is_nan()) {
        return false;
    }
    if s[3] == T::infinity() {
        return true;
    }
    let d: Vec<T> = s.windows(2).map(|w| w[1] - w[0]).collect();
    let tiny = T::lit(1e-9);
    if !(d[0] > tiny && d[1] > tiny && d[2] > tiny) {
        return false;
    }
    let big = s[3] - reference > T::lit(BLOWUP_FACTOR.ln());
    let ratio = T::lit(0.75);
    let persistent = d[2] >= ratio * d[1] && d[1] >= ratio * d[0];
    big || persistent
}

fn clean<T: Scalar>(v: T) -> T {
    if v.is_nan() {
        T::neg_infinity()
    } else {
        v
    }
}

/// `sup_{p ∈ (a,b)} exp(ln_objective(p))` with endpoint divergence detection.
pub fn sup_ln<T: Scalar, F: Fn(T) -> T>(
    interval: &ExponentInterval<T>,
    extra: &[T],
    opts: SearchOptions,
    ln_objective: F,
) -> SupResult<T> {
    extremum(interval, extra, opts, ln_objective, true)
}

fn extremum<T: Scalar, F: Fn(T) -> T>(
    interval: &ExponentInterval<T>,
    extra: &[T],
    opts: SearchOptions,
    ln_objective: F,
    detect_divergence: bool,
) -> SupResult<T> {
    let lower: Vec<(T, T)> = interval
        .lower_cluster(CLUSTER_DEPTH)
        .into_iter()
        .map(|p| (p, clean(ln_objective(p))))
        .collect();
    let upper: Vec<(T, T)> = interval
        .upper_cluster(CLUSTER_DEPTH)
        .into_iter()
        .map(|p| (p, clean(ln_objective(p))))
        .collect();
    let mut samples: Vec<(T, T)> = lower.iter().chain(upper.iter()).copied().collect();
    let mut inner: Vec<T> = interval.interior(opts.resolution);
    inner.push(interval.pivot);
    inner.extend(extra.iter().copied().filter(|p| interval.contains(*p)));
    samples.extend(inner.into_iter().map(|p| (p, clean(ln_objective(p)))));
    samples.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    samples.dedup_by(|x, y| x.0 == y.0);
    let grid_points = samples.len();

    let mut result = SupResult {
        ln_value: T::neg_infinity(),
        arg: interval.pivot,
        divergent_at: None,
        grid_ln_value: T::neg_infinity(),
        lower_profile: lower.clone(),
        upper_profile: upper.clone(),
        grid_points,
    };

    if let Some(&(p, _)) = samples.iter().find(|(_, v)| *v == T::infinity()) {
        result.ln_value = T::infinity();
        result.arg = p;
        return result;
    }

    let mut best = 0usize;
    for (i, s) in samples.iter().enumerate() {
        if s.1 > samples[best].1 {
            best = i;
        }
    }
    if samples[best].1 == T::neg_infinity() {
        return result;
    }

    let lower_vals: Vec<T> = lower.iter().map(|s| s.1).collect();
    let upper_vals: Vec<T> = upper.iter().map(|s| s.1).collect();
    let interior_ref = samples
        .iter()
        .filter(|(p, _)| {
            let lo_ok = lower.last().is_none_or(|l| *p > l.0 * T::one() && lower.iter().all(|q| q.0 != *p));
            let hi_ok = upper.iter().all(|q| q.0 != *p);
            lo_ok && hi_ok
        })
        .map(|s| s.1)
        .fold(T::neg_infinity(), T::max);
    if detect_divergence && endpoint_blowup(&lower_vals, interior_ref) {
        result.ln_value = T::infinity();
        result.arg = interval.a;
        result.divergent_at = Some(Endpoint::Lower);
        return result;
    }
    if detect_divergence && endpoint_blowup(&upper_vals, interior_ref) {
        result.ln_value = T::infinity();
        result.arg = interval.b;
        result.divergent_at = Some(Endpoint::Upper);
        return result;
    }

    let (mut arg, mut val) = samples[best];
    result.grid_ln_value = val;
    if opts.polish {
        let lo = if best > 0 { samples[best - 1].0 } else { samples[best].0 };
        let hi = if best + 1 < samples.len() { samples[best + 1].0 } else { samples[best].0 };
        if hi > lo {
            let (p, v) = golden_max(lo, hi, |p| clean(ln_objective(p)));
            if v > val {
                arg = p;
                val = v;
            }
        }
    }
    result.ln_value = val;
    result.arg = arg;
    result
}

/// Infimum counterpart of [`sup_ln`]: returns `ln inf`.
pub fn inf_ln<T: Scalar, F: Fn(T) -> T>(
    interval: &ExponentInterval<T>,
    extra: &[T],
    opts: SearchOptions,
    ln_objective: F,
) -> SupResult<T> {
    // No divergence rule: an objective creeping down to a positive limit
    // must not be mistaken for one that vanishes. The deepest cluster
    // sample stands in for the endpoint limit.
    let neg = |p: T| {
        let v = ln_objective(p);
        if v.is_nan() {
            T::neg_infinity()
        } else {
            -v
        }
    };
    let mut r = extremum(interval, extra, opts, neg, false);
    r.ln_value = -r.ln_value;
    r.grid_ln_value = -r.grid_ln_value;
    r.lower_profile.iter_mut().for_each(|s| s.1 = -s.1);
    r.upper_profile.iter_mut().for_each(|s| s.1 = -s.1);
    r
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub fn golden_max<T: Scalar, F: Fn(T) -> T>(mut lo: T, mut hi: T, f: F) -> (T, T) {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (hi - lo).abs() <= T::epsilon() * T::lit(4.0) * (T::one() + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_maximum() {
        let iv = ExponentInterval::new(1.0_f64, 3.0, 2.0);
        let r = sup_ln(&iv, &[], SearchOptions::default(), |p| -(p - 1.37).powi(2));
        assert!((r.arg - 1.37).abs() < 1e-6);
        assert!(r.ln_value.abs() < 1e-12);
        assert!(r.divergent_at.is_none());
    }

    #[test]
    fn flags_power_blowup_at_lower_end() {
        let iv = ExponentInterval::new(1.0_f64, 3.0, 2.0);
        let r = sup_ln(&iv, &[], SearchOptions::default(), |p| -0.1 * (p - 1.0).ln());
        assert_eq!(r.divergent_at, Some(Endpoint::Lower));
        assert_eq!(r.ln_value, f64::INFINITY);
    }

    #[test]
    fn bounded_endpoint_limit_is_not_divergence() {
        // increases towards a but converges to 0 geometrically
        let iv = ExponentInterval::new(1.0_f64, 3.0, 2.0);
        let r = sup_ln(&iv, &[], SearchOptions::default(), |p| -(p - 1.0));
        assert!(r.divergent_at.is_none());
        assert!(r.ln_value <= 0.0 && r.ln_value > -1e-9);
    }

    #[test]
    fn infinite_upper_end() {
        let iv = ExponentInterval::new(1.0_f64, f64::INFINITY, 2.0);
        let r = sup_ln(&iv, &[], SearchOptions::default(), |p| p.ln());
        assert_eq!(r.divergent_at, Some(Endpoint::Upper));
        let r = sup_ln(&iv, &[], SearchOptions::default(), |p| -(p.ln() - 30.0_f64.ln()).powi(2));
        assert!((r.arg - 30.0).abs() < 1e-5);
    }

    #[test]
    fn infimum() {
        let iv = ExponentInterval::new(1.0_f64, 2.0, 1.5);
        let r = inf_ln(&iv, &[], SearchOptions::default(), |p| (p - 1.25).powi(2) + 1.0);
        assert!((r.ln_value - 1.0).abs() < 1e-12);
        assert!((r.arg - 1.25).abs() < 1e-6);
    }

    #[test]
    fn kink_at_pivot() {
        let iv = ExponentInterval::new(1.0_f64, 3.0, 2.2);
        let r = sup_ln(&iv, &[], SearchOptions::default(), |p| -(p - 2.2).abs());
        assert!(r.ln_value.abs() < 1e-12);
    }
}
