//! Weight functions `ψ` on an open exponent interval `(a, b)`.
//!
//! Every `PsiFunction` evaluates `ln ψ(p)`; `ψ` itself is `exp` of that.
//! Working in logs keeps the endpoint explosions representable.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::search::{endpoint_blowup, ExponentInterval, CLUSTER_DEPTH};

/// Endpoint samples `2^k` stop here when `b = ∞`.
pub const INFINITE_PROBE_LOG2: i32 = 20;
/// Absolute tolerance of the crossover root.
pub const ROOT_TOL: f64 = 1e-12;

pub type LnPsiFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Zeta,
    ZetaSlowlyVarying,
    YoungFenchel,
    Tabulated,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
    Both,
}

/// Parameters of `ζ(a, b; α, β; ·)` together with the crossover root `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaParams<T> {
    pub a: T,
    pub b: T,
    pub alpha: T,
    pub beta: T,
    pub h: T,
}

fn check_zeta_domain<T: Scalar>(a: T, b: T, alpha: T, beta: T) -> Result<()> {
    let bad = |msg: &str| {
        Err(Error::Domain(format!(
            "{msg} (a={a}, b={b}, alpha={alpha}, beta={beta})"
        )))
    };
    if !(a >= T::one()) || a.is_infinite() {
        return bad("need finite a >= 1");
    }
    if b.is_finite() {
        if !(b > a) {
            return bad("need b > a");
        }
        if !(alpha >= T::zero() && beta >= T::zero()) || (alpha == T::zero() && beta == T::zero()) {
            return bad("finite b needs min(alpha, beta) >= 0, not both zero");
        }
    } else {
        if b < T::zero() {
            return bad("b must be finite or +inf");
        }
        if !(alpha >= T::zero() && beta < T::zero()) {
            return bad("b = inf needs alpha >= 0 and beta < 0");
        }
    }
    Ok(())
}

/// Crossover root `h` of `(h-a)^α = (b-h)^β`, or `(h-a)^α = h^β` when `b = ∞`.
///
/// When one exponent vanishes there is no crossover; `ζ` is then a single
/// branch and `h` is only a pivot for the exponent search: the midpoint for
/// finite `b`, `a + 1` otherwise.
pub fn zeta_root_h<T: Scalar>(a: T, b: T, alpha: T, beta: T) -> Result<T> {
    check_zeta_domain(a, b, alpha, beta)?;
    let two = T::lit(2.0);
    if b.is_finite() && (alpha == T::zero() || beta == T::zero()) {
        return Ok((a + b) / two);
    }
    if b.is_infinite() && alpha == T::zero() {
        return Ok(a + T::one());
    }
    // g is increasing in h and runs from -inf to +inf.
    let g = |h: T| {
        let right = if b.is_finite() { beta * (b - h).ln() } else { beta * h.ln() };
        alpha * (h - a).ln() - right
    };
    let mut lo = a;
    let mut hi = if b.is_finite() {
        b
    } else {
        let mut hi = a + T::one();
        while g(hi) <= T::zero() {
            hi = hi * two;
        }
        hi
    };
    let tol = T::lit(ROOT_TOL);
    while hi - lo > tol {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / two)
}

impl<T: Scalar> ZetaParams<T> {
    pub fn new(a: T, b: T, alpha: T, beta: T) -> Result<Self> {
        let h = zeta_root_h(a, b, alpha, beta)?;
        Ok(Self { a, b, alpha, beta, h })
    }

    fn lower_branch(&self, p: T) -> T {
        self.alpha * (p - self.a).ln()
    }

    fn upper_branch(&self, p: T) -> T {
        if self.b.is_finite() {
            self.beta * (self.b - p).ln()
        } else {
            self.beta * p.ln()
        }
    }

    /// `ln ζ(p)` without the interval check.
    pub fn ln_zeta_unchecked(&self, p: T) -> T {
        if self.alpha == T::zero() {
            return self.upper_branch(p);
        }
        if self.b.is_finite() && self.beta == T::zero() {
            return self.lower_branch(p);
        }
        if p < self.h {
            self.lower_branch(p)
        } else {
            self.upper_branch(p)
        }
    }

    pub fn ln_zeta(&self, p: T) -> Result<T> {
        if !(p > self.a && p < self.b) {
            return Err(Error::OutsideInterval { p: p.as_f64(), a: self.a.as_f64(), b: self.b.as_f64() });
        }
        Ok(self.ln_zeta_unchecked(p))
    }

    /// Difference of the two branch logs at `h` (zero up to the root tolerance).
    pub fn branch_gap(&self) -> T {
        self.lower_branch(self.h) - self.upper_branch(self.h)
    }
}

/// `ζ(a, b; α, β; p)`.
pub fn zeta_eval<T: Scalar>(a: T, b: T, alpha: T, beta: T, p: T) -> Result<T> {
    Ok(ZetaParams::new(a, b, alpha, beta)?.ln_zeta(p)?.exp())
}

/// Continuous positive factor `L(z)` declared slowly varying at infinity.
#[derive(Clone)]
pub struct SlowlyVaryingFactor<T> {
    pub name: String,
    ln_eval: LnPsiFn<T>,
}

impl<T: Scalar> fmt::Debug for SlowlyVaryingFactor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SlowlyVaryingFactor").field("name", &self.name).finish()
    }
}

impl<T: Scalar> SlowlyVaryingFactor<T> {
    /// Wraps `z ↦ L(z)`; positivity and slow variation are checked empirically.
    pub fn new<F: Fn(T) -> T + Send + Sync + 'static>(name: &str, eval: F) -> Result<Self> {
        let factor = Self { name: name.to_string(), ln_eval: Arc::new(move |z| eval(z).ln()) };
        factor.check()?;
        Ok(factor)
    }

    /// `L ≡ 1`.
    pub fn unit() -> Self {
        Self { name: "one".into(), ln_eval: Arc::new(|_| T::zero()) }
    }

    /// `L(z) = ln(e + z)`.
    pub fn log_e_plus() -> Self {
        Self { name: "log(e+z)".into(), ln_eval: Arc::new(|z: T| (T::E() + z).ln().ln()) }
    }

    pub fn ln_eval(&self, z: T) -> T {
        (self.ln_eval)(z)
    }

    pub fn eval(&self, z: T) -> T {
        self.ln_eval(z).exp()
    }

    /// Positivity on `z = 10^k`, `k = -3..=30`, and `L(λz)/L(z)` within 5% of 1
    /// for `λ ∈ {2, 10}` at `z = 10^30`.
    pub fn check(&self) -> Result<()> {
        for k in -3..=30 {
            let z = T::lit(10f64.powi(k));
            let v = self.ln_eval(z);
            if !v.is_finite() {
                return Err(Error::Domain(format!("L({z}) is not positive and finite")));
            }
        }
        let z = T::lit(1e30);
        for lambda in [2.0, 10.0] {
            let r = (self.ln_eval(z * T::lit(lambda)) - self.ln_eval(z)).exp();
            if (r - T::one()).abs() > T::lit(0.05) {
                return Err(Error::Domain(format!(
                    "L({lambda}z)/L(z) = {r} at z = 1e30 is not within 5% of 1"
                )));
            }
        }
        Ok(())
    }
}

/// A weight `ψ` on `(a, b)`, immutable and cheap to clone.
#[derive(Clone)]
pub struct PsiFunction<T> {
    pub a: T,
    pub b: T,
    pub family: Family,
    /// `(α, β)` for the zeta families.
    pub zeta: Option<ZetaParams<T>>,
    /// Crossover root for the zeta families, a search pivot otherwise.
    pub h: T,
    pub label: String,
    ln_eval: LnPsiFn<T>,
}

impl<T: Scalar> fmt::Debug for PsiFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PsiFunction")
            .field("label", &self.label)
            .field("family", &self.family)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("h", &self.h)
            .finish()
    }
}

fn default_pivot<T: Scalar>(a: T, b: T) -> T {
    if b.is_finite() {
        (a + b) / T::lit(2.0)
    } else {
        a + T::one()
    }
}

fn check_interval<T: Scalar>(a: T, b: T) -> Result<()> {
    if !(a >= T::one()) || !a.is_finite() || !(b > a) {
        return Err(Error::Domain(format!("need 1 <= a < b, got ({a}, {b})")));
    }
    Ok(())
}

impl<T: Scalar> PsiFunction<T> {
    /// `ψ = 1/ζ(a, b; α, β; ·)`.
    pub fn zeta(a: T, b: T, alpha: T, beta: T) -> Result<Self> {
        let params = ZetaParams::new(a, b, alpha, beta)?;
        Ok(Self {
            a,
            b,
            family: Family::Zeta,
            zeta: Some(params),
            h: params.h,
            label: format!("zeta(a={a}, b={b}, alpha={alpha}, beta={beta})"),
            ln_eval: Arc::new(move |p| -params.ln_zeta_unchecked(p)),
        })
    }

    /// Arbitrary `ln ψ` on `(a, b)`. `pivot` anchors the endpoint clusters.
    pub fn custom<F: Fn(T) -> T + Send + Sync + 'static>(
        label: &str,
        a: T,
        b: T,
        pivot: Option<T>,
        ln_psi: F,
    ) -> Result<Self> {
        check_interval(a, b)?;
        let h = pivot.unwrap_or_else(|| default_pivot(a, b));
        if !(h > a && h < b) {
            return Err(Error::OutsideInterval { p: h.as_f64(), a: a.as_f64(), b: b.as_f64() });
        }
        Ok(Self { a, b, family: Family::Custom, zeta: None, h, label: label.into(), ln_eval: Arc::new(ln_psi) })
    }

    /// Interpolates `ln ψ` linearly in `p` through the table; the interval
    /// is spanned by the first and last abscissae, with constant extension.
    pub fn tabulated(points: &[(T, T)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Parse("tabulated psi needs at least two rows".into()));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Parse("tabulated psi abscissae must increase strictly".into()));
        }
        if points.iter().any(|(_, v)| !(*v > T::zero()) || !v.is_finite()) {
            return Err(Error::Parse("tabulated psi values must be positive and finite".into()));
        }
        let a = points[0].0;
        let b = points[points.len() - 1].0;
        check_interval(a, b)?;
        let xs: Vec<T> = points.iter().map(|r| r.0).collect();
        let ys: Vec<T> = points.iter().map(|r| r.1.ln()).collect();
        let ln_eval = move |p: T| {
            if p <= xs[0] {
                return ys[0];
            }
            let n = xs.len();
            if p >= xs[n - 1] {
                return ys[n - 1];
            }
            let i = xs.partition_point(|x| *x <= p).max(1) - 1;
            let t = (p - xs[i]) / (xs[i + 1] - xs[i]);
            ys[i] + t * (ys[i + 1] - ys[i])
        };
        Ok(Self {
            a,
            b,
            family: Family::Tabulated,
            zeta: None,
            h: default_pivot(a, b),
            label: format!("tabulated({} rows)", points.len()),
            ln_eval: Arc::new(ln_eval),
        })
    }

    /// Reads `p, psi` rows (header optional) from a CSV file.
    pub fn load_tabulated(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_tabulated(file)
    }

    pub fn read_tabulated<R: std::io::Read>(source: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(source);
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::Parse(format!("expected two columns, got {}", rec.len())));
            }
            let (Ok(p), Ok(v)) = (rec[0].parse::<f64>(), rec[1].parse::<f64>()) else {
                if rows.is_empty() {
                    continue; // header
                }
                return Err(Error::Parse(format!("bad row {:?}", rec)));
            };
            rows.push((T::lit(p), T::lit(v)));
        }
        Self::tabulated(&rows)
    }

    /// `ψ(p) = exp(W*(p)/p)` on `(1, ∞)`. Points where the transform is
    /// unbounded evaluate to `ψ = +inf`.
    pub fn young_fenchel<W: Fn(T) -> T + Send + Sync + 'static>(label: &str, w: W) -> Self {
        let w = Arc::new(w);
        Self {
            a: T::one(),
            b: T::infinity(),
            family: Family::YoungFenchel,
            zeta: None,
            h: T::lit(2.0),
            label: format!("young-fenchel({label})"),
            ln_eval: Arc::new(move |p| match young_fenchel_conjugate(&*w, p) {
                Ok(ws) => ws / p,
                Err(_) => T::infinity(),
            }),
        }
    }

    /// Decorates a zeta-family `ψ` with `L(a/(p-a))`, `L(b/(b-p))`, or the max of both.
    pub fn slowly_varying(&self, factor: &SlowlyVaryingFactor<T>, side: Side) -> Result<Self> {
        if self.zeta.is_none() {
            return Err(Error::Domain("slowly varying decoration needs a zeta-family psi".into()));
        }
        if side != Side::A && self.b.is_infinite() {
            return Err(Error::Domain("side b decoration needs finite b".into()));
        }
        let base = self.ln_eval.clone();
        let l = factor.clone();
        let (a, b) = (self.a, self.b);
        let ln_eval: LnPsiFn<T> = Arc::new(move |p: T| {
            let la = || l.ln_eval(a / (p - a));
            let lb = || l.ln_eval(b / (b - p));
            let deco = match side {
                Side::A => la(),
                Side::B => lb(),
                Side::Both => la().max(lb()),
            };
            base(p) + deco
        });
        let side_name = match side {
            Side::A => "a",
            Side::B => "b",
            Side::Both => "both",
        };
        Ok(Self {
            family: Family::ZetaSlowlyVarying,
            label: format!("{} * {}[{}]", self.label, factor.name, side_name),
            ln_eval,
            ..self.clone()
        })
    }

    /// `ν(p) = c·ψ(p)`.
    pub fn scaled(&self, c: T) -> Self {
        let base = self.ln_eval.clone();
        let lc = c.ln();
        Self {
            label: format!("{c} * {}", self.label),
            ln_eval: Arc::new(move |p| base(p) + lc),
            family: Family::Custom,
            ..self.clone()
        }
    }

    pub fn ln_eval(&self, p: T) -> T {
        (self.ln_eval)(p)
    }

    pub fn eval(&self, p: T) -> T {
        self.ln_eval(p).exp()
    }

    pub fn try_eval(&self, p: T) -> Result<T> {
        if !self.contains(p) {
            return Err(Error::OutsideInterval { p: p.as_f64(), a: self.a.as_f64(), b: self.b.as_f64() });
        }
        Ok(self.eval(p))
    }

    pub fn contains(&self, p: T) -> bool {
        p > self.a && p < self.b
    }

    pub fn interval(&self) -> ExponentInterval<T> {
        ExponentInterval::new(self.a, self.b, self.h)
    }

    /// Probe points ordered towards the lower endpoint: `a + (h-a)2^{-k}`, `k ≤ 40`.
    pub fn lower_probes(&self) -> Vec<T> {
        self.interval().lower_cluster(CLUSTER_DEPTH)
    }

    /// Probe points ordered towards the upper endpoint; `2^k` up to `2^20` when `b = ∞`.
    pub fn upper_probes(&self) -> Vec<T> {
        if self.b.is_finite() {
            return self.interval().upper_cluster(CLUSTER_DEPTH);
        }
        (0..=INFINITE_PROBE_LOG2)
            .map(|k| T::lit(2f64.powi(k)))
            .filter(|p| *p > self.h)
            .collect()
    }

    /// Whether `ψ` explodes at `(lower, upper)` endpoint.
    pub fn explodes(&self) -> (bool, bool) {
        let reference = self.ln_eval(self.h);
        let lo: Vec<T> = self.lower_probes().into_iter().map(|p| self.ln_eval(p)).collect();
        let hi: Vec<T> = self.upper_probes().into_iter().map(|p| self.ln_eval(p)).collect();
        (endpoint_blowup(&lo, reference), endpoint_blowup(&hi, reference))
    }

    /// `max(ψ(a+0), ψ(b-0)) = ∞`.
    pub fn is_nontrivial(&self) -> bool {
        let (lo, hi) = self.explodes();
        lo || hi
    }

    /// Grid-level checks of the weight invariants.
    pub fn check(&self) -> PsiCheck<T> {
        let grid = self.interval().grid(256, &[]);
        let ln_vals: Vec<T> = grid.iter().map(|p| self.ln_eval(*p)).collect();
        let positive = ln_vals.iter().all(|v| v.is_finite());
        let inf_value = ln_vals.iter().copied().fold(T::infinity(), T::min).exp();
        let dense = self.interval().interior(1024);
        let dense_vals: Vec<T> = dense.iter().map(|p| self.ln_eval(*p)).collect();
        let max_jump = dense_vals.windows(2).map(|w| (w[1] - w[0]).abs()).fold(T::zero(), T::max);
        let (lower, upper) = self.explodes();
        let zeta_identity = self.zeta.filter(|_| self.family == Family::Zeta).map(|z| {
            grid.iter()
                .map(|p| (self.ln_eval(*p) + z.ln_zeta_unchecked(*p)).exp() - T::one())
                .fold(T::zero(), |m, d| m.max(d.abs()))
        });
        PsiCheck {
            positive,
            continuous: positive && max_jump < T::lit(0.5),
            inf_value,
            inf_positive: inf_value > T::zero(),
            explodes_lower: lower,
            explodes_upper: upper,
            zeta_identity_error: zeta_identity,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiCheck<T> {
    pub positive: bool,
    /// No jump of `ln ψ` above 0.5 between neighbours of a 1024-point interior grid.
    pub continuous: bool,
    pub inf_value: T,
    pub inf_positive: bool,
    pub explodes_lower: bool,
    pub explodes_upper: bool,
    /// `max |ψζ - 1|` on the grid, zeta family only.
    pub zeta_identity_error: Option<T>,
}

impl<T: Scalar> PsiCheck<T> {
    pub fn nontrivial(&self) -> bool {
        self.explodes_lower || self.explodes_upper
    }

    pub fn valid(&self) -> bool {
        self.positive && self.continuous && self.inf_positive
    }
}

/// `W*(p) = sup_{z > 2} (pz - W(z))` by ternary search on `[2, max(1000, 10p)]`.
pub fn young_fenchel_conjugate<T: Scalar, W: Fn(T) -> T + ?Sized>(w: &W, p: T) -> Result<T> {
    if !(p >= T::one()) {
        return Err(Error::ExponentBelowOne(p.as_f64()));
    }
    let z_max = T::lit(1000.0).max(T::lit(10.0) * p);
    let obj = |z: T| p * z - w(z);
    let (mut lo, mut hi) = (T::lit(2.0), z_max);
    let third = T::lit(3.0);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / third;
        let m2 = hi - (hi - lo) / third;
        if obj(m1) < obj(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
        if hi - lo <= T::epsilon() * hi {
            break;
        }
    }
    let z = (lo + hi) / T::lit(2.0);
    let edge = T::lit(1e-6) * z_max;
    if z_max - z < edge && obj(z_max) >= obj(z_max - edge) {
        return Err(Error::UnboundedTransform(z_max.as_f64()));
    }
    Ok(obj(z).max(obj(T::lit(2.0))))
}

/// `ψ(p) = exp(W*(p)/p)`.
pub fn young_fenchel_psi<T: Scalar, W: Fn(T) -> T>(w: W, p: T) -> Result<T> {
    Ok((young_fenchel_conjugate(&w, p)? / p).exp())
}

/// Ratio bounds of `ψ/ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equivalence<T> {
    pub equivalent: bool,
    pub inf_ratio: T,
    pub sup_ratio: T,
}

/// `0 < inf ψ/ν ≤ sup ψ/ν < ∞` on the clustered grid of `resolution` interior points.
///
/// A bound fails when the log-ratio blows up along an endpoint cluster.
pub fn psi_equiv_test<T: Scalar>(psi: &PsiFunction<T>, nu: &PsiFunction<T>, resolution: usize) -> Equivalence<T> {
    let iv = psi.interval();
    let ln_r = |p: T| psi.ln_eval(p) - nu.ln_eval(p);
    let grid = iv.grid(resolution, &[]);
    let vals: Vec<T> = grid.iter().map(|p| ln_r(*p)).collect();
    let lo = vals.iter().copied().fold(T::infinity(), T::min);
    let hi = vals.iter().copied().fold(T::neg_infinity(), T::max);
    let reference = ln_r(psi.h);
    let mut bounded = vals.iter().all(|v| v.is_finite());
    for probes in [psi.lower_probes(), psi.upper_probes()] {
        let s: Vec<T> = probes.iter().map(|p| ln_r(*p)).collect();
        let neg: Vec<T> = s.iter().map(|v| -*v).collect();
        if endpoint_blowup(&s, reference) || endpoint_blowup(&neg, -reference) {
            bounded = false;
        }
    }
    Equivalence { equivalent: bounded, inf_ratio: lo.exp(), sup_ratio: hi.exp() }
}

/// Outcome of `ν1 << ν2`, per endpoint at which `ν2` explodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Dominance<T> {
    pub dominated: bool,
    /// Final ratio `ν1/ν2` on the lower probe sequence, if `ν2` explodes there.
    pub lower: Option<T>,
    pub upper: Option<T>,
}

/// Tolerance for the ratio at the finest probe.
pub const DOMINANCE_TOL: f64 = 1e-3;

/// `lim ν1/ν2 = 0` as `ν2 → ∞`, sampled at the finest endpoint probes.
pub fn dominated_test<T: Scalar>(nu1: &PsiFunction<T>, nu2: &PsiFunction<T>) -> Result<Dominance<T>> {
    let (lo, hi) = nu2.explodes();
    if !lo && !hi {
        return Err(Error::Undefined("nu2 is bounded at both endpoints".into()));
    }
    let last_ratio = |probes: Vec<T>| {
        probes.last().map(|p| (nu1.ln_eval(*p) - nu2.ln_eval(*p)).exp()).unwrap_or(T::one())
    };
    let lower = lo.then(|| last_ratio(nu2.lower_probes()));
    let upper = hi.then(|| last_ratio(nu2.upper_probes()));
    let tol = T::lit(DOMINANCE_TOL);
    let dominated = lower.iter().chain(upper.iter()).all(|r| *r < tol);
    Ok(Dominance { dominated, lower, upper })
}
