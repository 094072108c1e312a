//! Small Lebesgue norm `||g||_{SL(ψ)}`.
//!
//! On a finite exponent set `P` the norm is the optimum of two problems
//! with equal value:
//!
//! * primal: `max ∫ f g dμ` subject to `|f|_p ≤ ψ(p)` for `p ∈ P`;
//! * dual: `min Σ_k ψ(q_k) |g_k|_{q_k'}` over splittings `g = Σ_k g_k`, `q_k ∈ P`.
//!
//! The dual is solved by column generation: the cost is the gauge of the
//! convex hull of the balls `{ψ(q)|a|_{q'} ≤ 1}`, so a restricted master LP
//! over finitely many atoms is priced against the best atom of every ball.
//! The primal is solved by a log-barrier Newton method.

use crate::error::{Error, Result};
use crate::grandnorm::{grand_norm, Certificate, NormReport, TOL_FLOOR};
use crate::linalg::{invert, mat_vec, solve, Matrix};
use crate::measure::{conjugate_exponent, MeasureSpace, SampledFunction};
use crate::psi::PsiFunction;
use crate::scalar::{ln_sum_exp, Scalar};
use crate::search::{inf_ln, SearchOptions};

/// Default number of grid exponents.
pub const GRID_SIZE: usize = 64;
/// Reconstruction residual allowed in a decomposition, relative to `|g|_1`.
pub const RECONSTRUCTION_TOL: f64 = 1e-12;
/// `acn_check` threshold relative to the norm of `g`.
pub const ACN_THRESHOLD: f64 = 1e-3;

/// `m` exponents in `(a, b)` with cosine spacing, denser towards the endpoints.
/// For `b = ∞` the spacing is applied to `u ∈ (0,1)` with `p = a + (h-a)u/(1-u)`.
pub fn exponent_grid<T: Scalar>(psi: &PsiFunction<T>, m: usize) -> Vec<T> {
    let m = m.max(1);
    (0..m)
        .map(|k| {
            let t = T::PI() * (T::from_usize_lossy(k) + T::lit(0.5)) / T::from_usize_lossy(m);
            let u = (T::one() - t.cos()) / T::lit(2.0);
            if psi.b.is_finite() {
                psi.a + (psi.b - psi.a) * u
            } else {
                psi.a + (psi.h - psi.a) * u / (T::one() - u)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component<T> {
    /// Argument of `ψ`; the moment is taken at the conjugate `q'`.
    pub q: T,
    pub values: Vec<T>,
}

/// A splitting `g = Σ_k g_k` with cost `Σ_k ψ(q_k)|g_k|_{q_k'}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<T> {
    pub components: Vec<Component<T>>,
    pub cost: T,
    /// `|Σ_k g_k - g|_1` (counting measure).
    pub residual_l1: T,
    pub nonnegative: bool,
}

/// `ψ(q)|v|_{q'}`.
pub fn component_cost<T: Scalar>(q: T, values: &[T], psi: &PsiFunction<T>, space: &MeasureSpace<T>) -> Result<T> {
    if values.iter().all(|v| *v == T::zero()) {
        return Ok(T::zero());
    }
    let qc = conjugate_exponent(q)?;
    Ok((psi.ln_eval(q) + space.ln_moment(values, qc)? / qc).exp())
}

impl<T: Scalar> Decomposition<T> {
    pub fn empty() -> Self {
        Self { components: Vec::new(), cost: T::zero(), residual_l1: T::zero(), nonnegative: true }
    }

    pub fn new(
        components: Vec<Component<T>>,
        g: &SampledFunction<T>,
        psi: &PsiFunction<T>,
        space: &MeasureSpace<T>,
        nonnegative: bool,
    ) -> Result<Self> {
        let mut cost = T::zero();
        for c in &components {
            cost = cost + component_cost(c.q, &c.values, psi, space)?;
        }
        let mut d = Self { components, cost, residual_l1: T::zero(), nonnegative };
        d.residual_l1 = d.residual(g).iter().map(|r| r.abs()).sum();
        Ok(d)
    }

    pub fn reconstruct(&self, len: usize) -> Vec<T> {
        let mut out = vec![T::zero(); len];
        for c in &self.components {
            for (o, v) in out.iter_mut().zip(&c.values) {
                *o = *o + *v;
            }
        }
        out
    }

    pub fn residual(&self, g: &SampledFunction<T>) -> Vec<T> {
        self.reconstruct(g.len()).iter().zip(g.values()).map(|(s, v)| *s - *v).collect()
    }

    /// Re-verifies the certificate from scratch: reconstruction, exponent
    /// range, sign constraint and the stated cost.
    pub fn verify(&self, g: &SampledFunction<T>, psi: &PsiFunction<T>, space: &MeasureSpace<T>) -> Result<()> {
        let l1: T = g.values().iter().map(|v| v.abs()).sum();
        let res: T = self.residual(g).iter().map(|r| r.abs()).sum();
        if res > T::lit(RECONSTRUCTION_TOL) * l1 {
            return Err(Error::Domain(format!("reconstruction residual {res} exceeds tolerance")));
        }
        let mut cost = T::zero();
        for c in &self.components {
            if !psi.contains(c.q) {
                return Err(Error::OutsideInterval { p: c.q.as_f64(), a: psi.a.as_f64(), b: psi.b.as_f64() });
            }
            if self.nonnegative && c.values.iter().any(|v| *v < T::zero()) {
                return Err(Error::Domain("negative entry in a nonnegative decomposition".into()));
            }
            cost = cost + component_cost(c.q, &c.values, psi, space)?;
        }
        if (cost - self.cost).abs() > T::lit(1e-10) * cost.max(T::lit(f64::MIN_POSITIVE)) {
            return Err(Error::Domain(format!("stated cost {} differs from recomputed {cost}", self.cost)));
        }
        Ok(())
    }
}

fn zero_report<T: Scalar>(psi: &PsiFunction<T>, certificate: Certificate<T>) -> NormReport<T> {
    NormReport {
        value: T::zero(),
        arg: psi.h,
        divergent_at: None,
        grid_points: 0,
        tolerance: T::lit(TOL_FLOOR),
        lower_bound: Some(T::zero()),
        certificate,
    }
}

/// `inf_p ψ(p)|g|_{p'}`: the best single-exponent upper bound.
///
/// `extra` exponents are added to the search grid, which matters when
/// `|g|_{p'}` is finite only at isolated exponents.
pub fn sl_upper_single<T: Scalar>(
    g: &SampledFunction<T>,
    psi: &PsiFunction<T>,
    space: &MeasureSpace<T>,
    extra: &[T],
) -> Result<NormReport<T>> {
    if g.len() != space.len() {
        return Err(Error::ShapeMismatch { expected: space.len(), got: g.len() });
    }
    if g.is_zero() && !g.has_analytic_moment() {
        return Ok(zero_report(psi, Certificate::None));
    }
    let obj = |p: T| {
        let pc = match conjugate_exponent(p) {
            Ok(v) => v,
            Err(_) => return T::infinity(),
        };
        psi.ln_eval(p) + g.ln_norm(pc, space).unwrap_or(T::infinity())
    };
    let r = inf_ln(&psi.interval(), extra, SearchOptions::default(), obj);
    let tolerance = if r.ln_value.is_finite() {
        (r.grid_ln_value - r.ln_value).max(T::lit(TOL_FLOOR))
    } else {
        T::lit(TOL_FLOOR)
    };
    Ok(NormReport {
        value: r.ln_value.exp(),
        arg: r.arg,
        divergent_at: None,
        grid_points: r.grid_points,
        tolerance,
        lower_bound: None,
        certificate: Certificate::None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualOptions {
    /// Restrict components to `g_k ≥ 0`; `None` switches it on when `g ≥ 0`.
    pub nonnegative: Option<bool>,
    /// Relative gap between the master value and its priced lower bound.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DualOptions {
    fn default() -> Self {
        Self { nonnegative: None, tol: 1e-9, max_iter: 20_000 }
    }
}

/// Restriction of `g` and `μ` to the support of `g`.
struct Support<T> {
    idx: Vec<usize>,
    ln_mu: Vec<T>,
    g: Vec<T>,
}

impl<T: Scalar> Support<T> {
    fn new(g: &SampledFunction<T>, space: &MeasureSpace<T>) -> Self {
        let idx: Vec<usize> = (0..g.len()).filter(|&i| g.values()[i] != T::zero()).collect();
        Self {
            ln_mu: idx.iter().map(|&i| space.ln_weights()[i]).collect(),
            g: idx.iter().map(|&i| g.values()[i]).collect(),
            idx,
        }
    }

    fn len(&self) -> usize {
        self.idx.len()
    }

    fn expand(&self, v: &[T], len: usize) -> Vec<T> {
        let mut out = vec![T::zero(); len];
        for (k, &i) in self.idx.iter().enumerate() {
            out[i] = v[k];
        }
        out
    }

    /// `ln |w|_p` over the support.
    fn ln_norm(&self, w: &[T], p: T) -> T {
        let terms = w.iter().zip(&self.ln_mu).map(|(v, lm)| {
            if *v == T::zero() {
                T::neg_infinity()
            } else {
                *lm + p * v.abs().ln()
            }
        });
        ln_sum_exp(terms) / p
    }
}

struct Pricing<T> {
    value: T,
    q_index: usize,
    atom: Vec<T>,
}

/// Best unit atom `a` of `∪_j {ψ(q_j)|a|_{q_j'} ≤ 1}` against the LP dual `z`.
fn price<T: Scalar>(sup: &Support<T>, z: &[T], grid: &[T], ln_psi: &[T], nonnegative: bool) -> Option<Pricing<T>> {
    let w: Vec<T> = z
        .iter()
        .zip(&sup.ln_mu)
        .map(|(zi, lm)| {
            let v = *zi / lm.exp();
            if nonnegative {
                v.max(T::zero())
            } else {
                v
            }
        })
        .collect();
    if w.iter().all(|v| *v == T::zero()) {
        return None;
    }
    let mut best: Option<(T, usize, T)> = None;
    for (j, (&p, &lp)) in grid.iter().zip(ln_psi).enumerate() {
        let ln_w = sup.ln_norm(&w, p);
        let v = ln_w - lp;
        if best.is_none_or(|b| v > b.0) {
            best = Some((v, j, ln_w));
        }
    }
    let (ln_v, j, ln_w) = best?;
    let p = grid[j];
    let atom = w
        .iter()
        .map(|wi| {
            if *wi == T::zero() {
                T::zero()
            } else {
                let mag = ((p - T::one()) * (wi.abs().ln() - ln_w) - ln_psi[j]).exp();
                mag * wi.signum()
            }
        })
        .collect();
    Some(Pricing { value: ln_v.exp(), q_index: j, atom })
}

/// Gridded dual: column generation on the splitting problem, restricted to
/// exponents in `q_grid`. The value is the cost of the returned decomposition,
/// an upper bound on the norm; `lower_bound` bounds the gridded optimum below.
pub fn sl_norm_dual<T: Scalar>(
    g: &SampledFunction<T>,
    psi: &PsiFunction<T>,
    space: &MeasureSpace<T>,
    q_grid: &[T],
    opts: DualOptions,
) -> Result<NormReport<T>> {
    if g.len() != space.len() {
        return Err(Error::ShapeMismatch { expected: space.len(), got: g.len() });
    }
    let grid: Vec<T> = q_grid.iter().copied().filter(|q| psi.contains(*q)).collect();
    if grid.is_empty() {
        return Err(Error::Domain("exponent grid has no point inside (a, b)".into()));
    }
    let nonneg = opts.nonnegative.unwrap_or_else(|| g.is_nonnegative());
    if nonneg && !g.is_nonnegative() {
        return Err(Error::Domain("nonnegative mode requires g >= 0".into()));
    }
    let sup = Support::new(g, space);
    let n = sup.len();
    if n == 0 {
        return Ok(zero_report(psi, Certificate::Decomposition(Decomposition::empty())));
    }
    let ln_psi: Vec<T> = grid.iter().map(|q| psi.ln_eval(*q)).collect();

    // Coordinate atoms, each at its cheapest exponent.
    let mut cols: Vec<(usize, Vec<T>)> = (0..n)
        .map(|i| {
            let (j, ln_c) = grid
                .iter()
                .enumerate()
                .map(|(j, q)| (j, ln_psi[j] + (T::one() - T::one() / *q) * sup.ln_mu[i]))
                .fold((0, T::infinity()), |b, c| if c.1 < b.1 { c } else { b });
            let mut a = vec![T::zero(); n];
            a[i] = sup.g[i].signum() / ln_c.exp();
            (j, a)
        })
        .collect();
    let basis_matrix = |cols: &[(usize, Vec<T>)]| -> Matrix<T> {
        (0..n).map(|r| cols.iter().map(|c| c.1[r]).collect()).collect()
    };
    let mut binv = invert(&basis_matrix(&cols)).ok_or(Error::Domain("singular initial basis".into()))?;
    let tol = T::lit(opts.tol);
    let mut lower = T::zero();
    let mut iterations = 0;
    let mut x = mat_vec(&binv, &sup.g);
    loop {
        let z: Vec<T> = (0..n).map(|i| (0..n).map(|r| binv[r][i]).sum()).collect();
        let obj: T = x.iter().copied().sum();
        let Some(pr) = price(&sup, &z, &grid, &ln_psi, nonneg) else { break };
        lower = lower.max(obj / pr.value.max(T::one()));
        if pr.value <= T::one() + tol || obj - lower <= tol * obj || iterations >= opts.max_iter {
            break;
        }
        iterations += 1;
        let d = mat_vec(&binv, &pr.atom);
        let eps = T::lit(1e-14);
        let mut leave: Option<(usize, T)> = None;
        for r in 0..n {
            if d[r] > eps {
                let ratio = x[r].max(T::zero()) / d[r];
                if leave.is_none_or(|l| ratio < l.1) {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((r, _)) = leave else { break };
        cols[r] = (pr.q_index, pr.atom);
        let piv = d[r];
        let row_r: Vec<T> = binv[r].iter().map(|v| *v / piv).collect();
        for (k, row) in binv.iter_mut().enumerate() {
            if k == r {
                continue;
            }
            let f = d[k];
            if f != T::zero() {
                for (v, vr) in row.iter_mut().zip(&row_r) {
                    *v = *v - f * *vr;
                }
            }
        }
        binv[r] = row_r;
        if iterations % 64 == 0 {
            if let Some(inv) = invert(&basis_matrix(&cols)) {
                binv = inv;
            }
        }
        x = mat_vec(&binv, &sup.g);
    }

    // Merge basic atoms that share an exponent; the triangle inequality
    // makes this never more expensive.
    let mut merged: Vec<(usize, Vec<T>)> = Vec::new();
    for (r, (j, a)) in cols.iter().enumerate() {
        let lam = x[r].max(T::zero());
        if lam == T::zero() {
            continue;
        }
        let v: Vec<T> = a.iter().map(|ai| *ai * lam).collect();
        match merged.iter_mut().find(|m| m.0 == *j) {
            Some(m) => m.1.iter_mut().zip(&v).for_each(|(u, w)| *u = *u + *w),
            None => merged.push((*j, v)),
        }
    }
    // Put the rounding residual where it hurts least.
    for i in 0..n {
        let s: T = merged.iter().map(|m| m.1[i]).sum();
        let r = sup.g[i] - s;
        if r == T::zero() {
            continue;
        }
        match merged.iter().enumerate().max_by(|u, v| u.1 .1[i].abs().partial_cmp(&v.1 .1[i].abs()).unwrap()) {
            Some((k, _)) => {
                let v = merged[k].1[i] + r;
                merged[k].1[i] = if nonneg { v.max(T::zero()) } else { v };
            }
            None => merged.push((cols[i].0, {
                let mut v = vec![T::zero(); n];
                v[i] = sup.g[i];
                v
            })),
        }
    }
    let components: Vec<Component<T>> = merged
        .into_iter()
        .map(|(j, v)| Component { q: grid[j], values: sup.expand(&v, g.len()) })
        .collect();
    let decomposition = Decomposition::new(components, g, psi, space, nonneg)?;
    let value = decomposition.cost;
    let arg = decomposition
        .components
        .iter()
        .map(|c| (c.q, component_cost(c.q, &c.values, psi, space).unwrap_or(T::zero())))
        .fold((psi.h, T::neg_infinity()), |b, c| if c.1 > b.1 { c } else { b })
        .0;
    let lower = lower.min(value);
    Ok(NormReport {
        value,
        arg,
        divergent_at: None,
        grid_points: grid.len(),
        tolerance: ((value - lower) / value).max(T::lit(TOL_FLOOR)),
        lower_bound: Some(lower),
        certificate: Certificate::Decomposition(decomposition),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimalOptions {
    /// Add the most violated exponent of the whole interval until the
    /// maximizer is feasible for every `p ∈ (a, b)`.
    pub refine: bool,
    /// Relative barrier gap at termination.
    pub tol: f64,
    pub max_rounds: usize,
}

impl Default for PrimalOptions {
    fn default() -> Self {
        Self { refine: false, tol: 1e-9, max_rounds: 60 }
    }
}

struct Barrier<'a, T> {
    c: &'a [T],
    ln_mu: &'a [T],
    p: Vec<T>,
    ln_psi: Vec<T>,
}

impl<T: Scalar> Barrier<'_, T> {
    /// `ln F_j(y)` with `F_j = Σ_i μ_i (y_i/ψ_j)^{p_j}`.
    fn ln_f(&self, ln_y: &[T]) -> Vec<T> {
        self.p
            .iter()
            .zip(&self.ln_psi)
            .map(|(p, lp)| ln_sum_exp(ln_y.iter().zip(self.ln_mu).map(|(ly, lm)| *lm + *p * (*ly - *lp))))
            .collect()
    }

    /// Largest `s` with `F_j(s y) ≤ θ` for all `j`.
    fn ln_scale_into(&self, ln_y: &[T], theta: T) -> T {
        self.ln_f(ln_y)
            .iter()
            .zip(&self.p)
            .map(|(lf, p)| (theta.ln() - *lf) / *p)
            .fold(T::infinity(), T::min)
    }

    fn objective(&self, y: &[T]) -> T {
        self.c.iter().zip(y).map(|(c, y)| *c * *y).sum()
    }

    /// `-t c·y - Σ ln(1 - F_j) - Σ ln y_i`; `+inf` outside the domain.
    fn phi(&self, t: T, y: &[T]) -> T {
        if y.iter().any(|v| !(*v > T::zero())) {
            return T::infinity();
        }
        let ln_y: Vec<T> = y.iter().map(|v| v.ln()).collect();
        let mut s = -t * self.objective(y);
        for lf in self.ln_f(&ln_y) {
            let slack = T::one() - lf.exp();
            if !(slack > T::zero()) {
                return T::infinity();
            }
            s = s - slack.ln();
        }
        s - ln_y.iter().copied().sum::<T>()
    }

    fn newton_step(&self, t: T, y: &[T]) -> Option<(Vec<T>, Vec<T>)> {
        let n = y.len();
        let ln_y: Vec<T> = y.iter().map(|v| v.ln()).collect();
        let mut grad: Vec<T> = (0..n).map(|i| -t * self.c[i] - T::one() / y[i]).collect();
        let mut hess: Matrix<T> = (0..n)
            .map(|i| (0..n).map(|k| if i == k { T::one() / (y[i] * y[i]) } else { T::zero() }).collect())
            .collect();
        for (p, lp) in self.p.iter().zip(&self.ln_psi) {
            let terms: Vec<T> = ln_y.iter().zip(self.ln_mu).map(|(ly, lm)| (*lm + *p * (*ly - *lp)).exp()).collect();
            let f: T = terms.iter().copied().sum();
            let slack = T::one() - f;
            let gf: Vec<T> = (0..n).map(|i| *p * terms[i] / y[i]).collect();
            for i in 0..n {
                grad[i] = grad[i] + gf[i] / slack;
                let hf = *p * (*p - T::one()) * terms[i] / (y[i] * y[i]);
                hess[i][i] = hess[i][i] + hf / slack;
                for k in 0..n {
                    hess[i][k] = hess[i][k] + gf[i] * gf[k] / (slack * slack);
                }
            }
        }
        let d = solve(hess, grad.iter().map(|g| -*g).collect())?;
        Some((d, grad))
    }

    /// Path following from a strictly feasible `y`; returns the final `y`
    /// and the duality-gap bound `(m + n)/t`.
    fn run(&self, mut y: Vec<T>, tol: T) -> (Vec<T>, T) {
        let n = y.len();
        let count = T::from_usize_lossy(self.p.len() + n);
        let mut t = count / self.objective(&y).max(T::lit(f64::MIN_POSITIVE));
        let mu = T::lit(10.0);
        for _ in 0..60 {
            for _ in 0..200 {
                let Some((d, grad)) = self.newton_step(t, &y) else { break };
                let dec: T = -grad.iter().zip(&d).map(|(g, d)| *g * *d).sum::<T>();
                if !(dec > T::lit(1e-14)) {
                    break;
                }
                let f0 = self.phi(t, &y);
                let mut s = T::one();
                let mut moved = false;
                for _ in 0..60 {
                    let cand: Vec<T> = y.iter().zip(&d).map(|(v, dv)| *v + s * *dv).collect();
                    let f1 = self.phi(t, &cand);
                    if f1 <= f0 - T::lit(0.25) * s * dec {
                        y = cand;
                        moved = true;
                        break;
                    }
                    s = s / T::lit(2.0);
                }
                if !moved || dec < T::lit(1e-12) {
                    break;
                }
            }
            let obj = self.objective(&y);
            if count / t <= tol * obj {
                break;
            }
            t = t * mu;
        }
        (y, count / t)
    }
}

fn aligned_start<T: Scalar>(sup: &Support<T>, bar: &Barrier<'_, T>) -> Vec<T> {
    let theta = T::lit(0.5);
    let mut candidates: Vec<Vec<T>> = vec![vec![T::zero(); sup.len()]];
    for p in &bar.p {
        let raw: Vec<T> = sup.g.iter().map(|g| g.abs().ln() / (*p - T::one())).collect();
        let top = raw.iter().copied().fold(T::neg_infinity(), T::max);
        candidates.push(raw.iter().map(|v| (*v - top).max(T::lit(-30.0))).collect());
    }
    let mut best: Option<(T, Vec<T>)> = None;
    for ln_y in candidates {
        let s = bar.ln_scale_into(&ln_y, theta);
        let y: Vec<T> = ln_y.iter().map(|v| (*v + s).exp()).collect();
        let obj = bar.objective(&y);
        if best.as_ref().is_none_or(|b| obj > b.0) {
            best = Some((obj, y));
        }
    }
    best.unwrap().1
}

/// Gridded primal: `max ∫ f g dμ` over `|f|_p ≤ ψ(p)`, `p ∈ p_grid`, on a
/// finite atomic space. The certificate is the maximizer `f*`; with
/// `refine`, `f*` is rescaled onto the whole-interval feasible set so that
/// the value is a lower bound on the norm itself.
pub fn sl_norm_primal<T: Scalar>(
    g: &SampledFunction<T>,
    psi: &PsiFunction<T>,
    space: &MeasureSpace<T>,
    p_grid: &[T],
    opts: PrimalOptions,
) -> Result<NormReport<T>> {
    if g.len() != space.len() {
        return Err(Error::ShapeMismatch { expected: space.len(), got: g.len() });
    }
    if !space.is_atomic() {
        return Err(Error::NotApplicable("primal solver needs a finite atomic space".into()));
    }
    let mut grid: Vec<T> = p_grid.iter().copied().filter(|p| psi.contains(*p)).collect();
    if grid.is_empty() {
        return Err(Error::Domain("exponent grid has no point inside (a, b)".into()));
    }
    let sup = Support::new(g, space);
    if sup.len() == 0 {
        return Ok(zero_report(psi, Certificate::FeasiblePoint(vec![T::zero(); g.len()])));
    }
    let c: Vec<T> = sup.g.iter().zip(&sup.ln_mu).map(|(g, lm)| g.abs() * lm.exp()).collect();
    let tol = T::lit(opts.tol);
    let mut warm: Option<Vec<T>> = None;
    let mut rounds = 0;
    loop {
        let bar = Barrier { c: &c, ln_mu: &sup.ln_mu, ln_psi: grid.iter().map(|p| psi.ln_eval(*p)).collect(), p: grid.clone() };
        let start = match warm.take() {
            Some(y) => {
                let ln_y: Vec<T> = y.iter().map(|v| v.ln()).collect();
                let s = bar.ln_scale_into(&ln_y, T::lit(0.5)).min(T::zero());
                let scaled: Vec<T> = y.iter().map(|v| *v * s.exp()).collect();
                let fresh = aligned_start(&sup, &bar);
                if bar.objective(&scaled) >= bar.objective(&fresh) {
                    scaled
                } else {
                    fresh
                }
            }
            None => aligned_start(&sup, &bar),
        };
        let (y, gap) = bar.run(start, tol);
        let mut f: Vec<T> = y.iter().zip(&sup.g).map(|(y, g)| *y * g.signum()).collect();
        let ln_y: Vec<T> = y.iter().map(|v| v.ln()).collect();
        let lf = bar.ln_f(&ln_y);
        let (jmax, _) = lf.iter().enumerate().fold((0, T::neg_infinity()), |b, (j, v)| if *v > b.1 { (j, *v) } else { b });
        let mut arg = grid[jmax];
        let mut value = bar.objective(&y);
        let mut finished = !opts.refine;
        if opts.refine {
            let fs = SampledFunction::new(sup.expand(&f, g.len()))?;
            let r = grand_norm(&fs, psi, space, SearchOptions::default())?;
            rounds += 1;
            if r.value <= T::one() + tol || rounds >= opts.max_rounds {
                finished = true;
                if r.value > T::one() {
                    f.iter_mut().for_each(|v| *v = *v / r.value);
                    value = value / r.value;
                    arg = r.arg;
                }
            } else {
                grid.push(r.arg);
                warm = Some(y.clone());
            }
        }
        if finished {
            return Ok(NormReport {
                value,
                arg,
                divergent_at: None,
                grid_points: grid.len(),
                tolerance: (gap / value).max(T::lit(TOL_FLOOR)),
                lower_bound: Some(value),
                certificate: Certificate::FeasiblePoint(sup.expand(&f, g.len())),
            });
        }
    }
}

/// Primal and dual on the same exponent set, with their relative gap.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport<T> {
    pub primal: NormReport<T>,
    pub dual: NormReport<T>,
    /// `(dual - primal)/dual`.
    pub gap: T,
}

pub fn sl_norm_both<T: Scalar>(
    g: &SampledFunction<T>,
    psi: &PsiFunction<T>,
    space: &MeasureSpace<T>,
    grid: &[T],
) -> Result<DualityReport<T>> {
    let primal = sl_norm_primal(g, psi, space, grid, PrimalOptions::default())?;
    let dual = sl_norm_dual(g, psi, space, grid, DualOptions::default())?;
    let gap = if dual.value == T::zero() { T::zero() } else { (dual.value - primal.value) / dual.value };
    Ok(DualityReport { primal, dual, gap })
}

/// Checks that a primal certificate satisfies `|f|_p ≤ ψ(p)(1 + tol)` on `grid`.
pub fn primal_feasible<T: Scalar>(f: &[T], psi: &PsiFunction<T>, space: &MeasureSpace<T>, grid: &[T], tol: T) -> Result<bool> {
    for p in grid {
        let ln_n = space.ln_moment(f, *p)? / *p;
        if ln_n - psi.ln_eval(*p) > tol.ln_1p() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone)]
pub struct Witness<T> {
    pub sigma: T,
    /// `g = f^{σ-1}`, normalized to `|g|_{σ'} = 1`.
    pub g: SampledFunction<T>,
    /// `∫ f g dμ`.
    pub pairing: T,
    pub grand: T,
    pub sl_upper: T,
    /// `|pairing - grand · sl_upper| / pairing`.
    pub rel_error: T,
}

/// Hölder-equality witness at the exponent `σ` where `|f|_σ/ψ(σ)` peaks.
pub fn sharpness_witness<T: Scalar>(f: &SampledFunction<T>, psi: &PsiFunction<T>, space: &MeasureSpace<T>) -> Result<Witness<T>> {
    if f.is_zero() || !f.is_nonnegative() {
        return Err(Error::Domain("sharpness witness needs a nonzero f >= 0".into()));
    }
    let r = grand_norm(f, psi, space, SearchOptions::default())?;
    if r.divergent_at.is_some() || !r.value.is_finite() {
        return Err(Error::NoInteriorMaximizer("the ratio |f|_p/psi(p) diverges".into()));
    }
    let iv = psi.interval();
    let edge_lo = iv.lower_cluster(crate::search::CLUSTER_DEPTH).last().copied().unwrap_or(psi.a);
    let edge_hi = iv.upper_cluster(crate::search::CLUSTER_DEPTH).last().copied().unwrap_or(psi.b);
    if r.arg <= edge_lo || r.arg >= edge_hi {
        return Err(Error::NoInteriorMaximizer(format!("maximizer {} sits at the end of the grid", r.arg)));
    }
    let sigma = r.arg;
    let sc = conjugate_exponent(sigma)?;
    let raw: Vec<T> = f.values().iter().map(|v| if *v > T::zero() { v.powf(sigma - T::one()) } else { T::zero() }).collect();
    let ln_n = space.ln_moment(&raw, sc)? / sc;
    let g = SampledFunction::new(raw.iter().map(|v| *v / ln_n.exp()).collect())?;
    let pairing = crate::measure::integral_product(f, &g, space)?;
    let single = sl_upper_single(&g, psi, space, &[sigma])?;
    let product = r.value * single.value;
    Ok(Witness {
        sigma,
        pairing,
        grand: r.value,
        sl_upper: single.value,
        rel_error: (pairing - product).abs() / pairing,
        g,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcnMethod {
    Dual,
    Single,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcnReport<T> {
    /// Upper bound of `||g I(E(n))||` for each set.
    pub values: Vec<T>,
    pub norm: T,
    pub monotone: bool,
    /// Last value below `ACN_THRESHOLD · norm`.
    pub vanishes: bool,
}

/// Profile of certified upper bounds of `||g I(E(n))||_{SL(ψ)}` along nested sets.
pub fn acn_check<T: Scalar>(
    g: &SampledFunction<T>,
    psi: &PsiFunction<T>,
    space: &MeasureSpace<T>,
    sets: &[Vec<bool>],
    method: AcnMethod,
) -> Result<AcnReport<T>> {
    let bound = |h: &SampledFunction<T>| -> Result<T> {
        Ok(match method {
            AcnMethod::Single => sl_upper_single(h, psi, space, &[])?.value,
            AcnMethod::Dual => sl_norm_dual(h, psi, space, &exponent_grid(psi, GRID_SIZE), DualOptions::default())?.value,
        })
    };
    let norm = bound(g)?;
    let mut values = Vec::with_capacity(sets.len());
    for s in sets {
        if s.len() != g.len() {
            return Err(Error::ShapeMismatch { expected: g.len(), got: s.len() });
        }
        values.push(bound(&g.restricted(s))?);
    }
    let slack = T::one() + T::lit(1e-12);
    let monotone = values.windows(2).all(|w| w[1] <= w[0] * slack);
    let vanishes = norm == T::zero() || values.last().is_some_and(|v| *v < T::lit(ACN_THRESHOLD) * norm);
    Ok(AcnReport { values, norm, monotone, vanishes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fundamental::phi_small;

    fn flat() -> PsiFunction<f64> {
        PsiFunction::custom("one", 1.0, 2.0, None, |_| 0.0).unwrap()
    }

    fn zeta() -> PsiFunction<f64> {
        PsiFunction::zeta(1.5, 4.0, 1.0, 2.0).unwrap()
    }

    #[test]
    fn zero_function_everywhere() {
        let space = MeasureSpace::atomic(vec![1.0, 2.0]).unwrap();
        let g = SampledFunction::zeros(2);
        let psi = zeta();
        let grid = exponent_grid(&psi, 16);
        assert_eq!(sl_upper_single(&g, &psi, &space, &[]).unwrap().value, 0.0);
        let d = sl_norm_dual(&g, &psi, &space, &grid, DualOptions::default()).unwrap();
        assert_eq!(d.value, 0.0);
        assert!(matches!(d.certificate, Certificate::Decomposition(ref c) if c.components.is_empty()));
        assert_eq!(sl_norm_primal(&g, &psi, &space, &grid, PrimalOptions::default()).unwrap().value, 0.0);
    }

    #[test]
    fn flat_psi_two_atoms() {
        let space = MeasureSpace::atomic(vec![1.0, 1.0]).unwrap();
        let g = SampledFunction::new(vec![1.0, 0.0]).unwrap();
        let psi = flat();
        let grid: Vec<f64> = (1..=99).map(|k| 1.0 + k as f64 / 100.0).collect();
        let d = sl_norm_dual(&g, &psi, &space, &grid, DualOptions::default()).unwrap();
        assert!((d.value - 1.0).abs() < 1e-9);
        let p = sl_norm_primal(&g, &psi, &space, &exponent_grid(&psi, 64), PrimalOptions::default()).unwrap();
        assert!((p.value - 1.0).abs() < 1e-6);
        let Certificate::FeasiblePoint(f) = p.certificate else { panic!() };
        assert!((f[0] - 1.0).abs() < 1e-6 && f[1] == 0.0);
    }

    #[test]
    fn grid_duality_on_small_instance() {
        let space = MeasureSpace::atomic(vec![0.3, 1.1, 0.05]).unwrap();
        let g = SampledFunction::new(vec![1.0, -0.4, 2.5]).unwrap();
        let psi = zeta();
        let grid = exponent_grid(&psi, 64);
        let r = sl_norm_both(&g, &psi, &space, &grid).unwrap();
        assert!(r.gap.abs() < 1e-6, "{:?}", (r.primal.value, r.dual.value));
        let Certificate::Decomposition(dec) = &r.dual.certificate else { panic!() };
        dec.verify(&g, &psi, &space).unwrap();
        let Certificate::FeasiblePoint(f) = &r.primal.certificate else { panic!() };
        assert!(primal_feasible(f, &psi, &space, &grid, 1e-9).unwrap());
    }

    #[test]
    fn indicator_primal_is_chi() {
        let psi = zeta();
        for d in [1e-3, 0.2, 5.0] {
            let space = MeasureSpace::atomic(vec![d, 1.0]).unwrap();
            let g = SampledFunction::new(vec![1.0, 0.0]).unwrap();
            let chi = phi_small(&psi, d).unwrap();
            let opts = PrimalOptions { refine: true, ..Default::default() };
            let p = sl_norm_primal(&g, &psi, &space, &exponent_grid(&psi, 8), opts).unwrap();
            assert!((p.value / chi - 1.0).abs() < 1e-6, "{d}: {} vs {chi}", p.value);
            let s = sl_upper_single(&g, &psi, &space, &[]).unwrap();
            assert!(s.value >= chi * (1.0 - 1e-12));
        }
    }

    #[test]
    fn dual_is_homogeneous() {
        let space = MeasureSpace::atomic(vec![0.3, 1.1]).unwrap();
        let g = SampledFunction::new(vec![1.0, 2.0]).unwrap();
        let psi = zeta();
        let grid = exponent_grid(&psi, 32);
        let a = sl_norm_dual(&g, &psi, &space, &grid, DualOptions::default()).unwrap().value;
        let b = sl_norm_dual(&g.scaled(-3.0), &psi, &space, &grid, DualOptions::default()).unwrap().value;
        assert!((b / a - 3.0).abs() < 1e-8);
    }

    #[test]
    fn witness_on_indicator() {
        let psi = zeta();
        let space = MeasureSpace::atomic(vec![0.1, 1.0]).unwrap();
        let f = SampledFunction::new(vec![1.0, 0.0]).unwrap();
        let w = sharpness_witness(&f, &psi, &space).unwrap();
        assert!(w.rel_error < 1e-9);
        assert!(sharpness_witness(&SampledFunction::zeros(2), &psi, &space).is_err());
    }

    #[test]
    fn acn_indicator_profile() {
        let psi = zeta();
        let weights: Vec<f64> = (1..=21).map(|k| 2f64.powi(-k)).collect();
        let space = MeasureSpace::atomic(weights).unwrap();
        let g = SampledFunction::new(vec![1.0; 21]).unwrap();
        let sets: Vec<Vec<bool>> = (1..=20).map(|n| (0..21).map(|i| i >= n).collect()).collect();
        let r = acn_check(&g, &psi, &space, &sets, AcnMethod::Single).unwrap();
        assert!(r.monotone && r.vanishes, "{:?}", r.values.last());
    }
}
