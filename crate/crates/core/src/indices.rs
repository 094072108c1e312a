//! Dilations `σ_s f(x) = f(x/s)` on the half-line and Boyd-type index fits
//! for `G(ψ)` and `SL(ψ)`.
//!
//! On `[0, ∞)` with Lebesgue measure `|σ_s f|_p = s^{1/p}|f|_p`, and
//! `σ_s I([0,δ]) = I([0,sδ])`, so everything below is driven by `ln φ`.

use crate::fundamental::phi_grand_ln;
use crate::grandnorm::grand_norm_ln;
use crate::psi::PsiFunction;
use crate::scalar::Scalar;
use crate::search::SearchOptions;

/// Relative agreement required between a fitted index and its target.
pub const INDEX_TOL: f64 = 0.02;
/// Residual standard error above which a fit is flagged.
pub const RESIDUAL_THRESHOLD: f64 = 0.05;
/// Number of `s` values per side.
pub const S_POINTS: usize = 9;
/// `ln δ` grid used for the uniformization over `δ`.
pub const LN_DELTA_SPAN: f64 = 1e4;
pub const LN_DELTA_POINTS: usize = 81;

fn log_spaced<T: Scalar>(lo_exp: f64, hi_exp: f64, n: usize) -> Vec<T> {
    (0..n)
        .map(|i| T::lit(10f64.powf(lo_exp + (hi_exp - lo_exp) * i as f64 / (n - 1) as f64)))
        .collect()
}

/// `s ∈ [1e-6, 1e-2]`.
pub fn small_s_grid<T: Scalar>() -> Vec<T> {
    log_spaced(-6.0, -2.0, S_POINTS)
}

/// `s ∈ [1e2, 1e6]`.
pub fn large_s_grid<T: Scalar>() -> Vec<T> {
    log_spaced(2.0, 6.0, S_POINTS)
}

pub fn ln_delta_grid<T: Scalar>() -> Vec<T> {
    let n = LN_DELTA_POINTS;
    (0..n)
        .map(|i| T::lit(-LN_DELTA_SPAN + 2.0 * LN_DELTA_SPAN * i as f64 / (n - 1) as f64))
        .collect()
}

/// Ordinary least squares fit `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Residual standard error.
    pub residual: T,
    pub points: Vec<(T, T)>,
}

pub fn ols<T: Scalar>(points: &[(T, T)]) -> SlopeFit<T> {
    let n = T::from_usize_lossy(points.len());
    let mx = points.iter().map(|p| p.0).sum::<T>() / n;
    let my = points.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: T = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: T = points.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    let dof = if points.len() > 2 { n - T::lit(2.0) } else { T::one() };
    SlopeFit { slope, intercept, residual: (ssr / dof).sqrt(), points: points.to_vec() }
}

/// Bounds on `||σ_s||` acting on `G(ψ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationBounds<T> {
    pub lower: T,
    pub upper: T,
}

/// `sup_{p∈(a,b)} s^{1/p}`.
pub fn dilation_upper<T: Scalar>(a: T, b: T, s: T) -> T {
    if s < T::one() {
        if b.is_finite() {
            s.powf(b.recip())
        } else {
            T::one()
        }
    } else {
        s.powf(a.recip())
    }
}

/// `max_δ ln φ(sδ) - ln φ(δ)` and `min_δ` of the same, over `ln_deltas`.
fn ratio_extremes<T: Scalar>(ln_phi: &dyn Fn(T) -> T, base: &[T], ln_deltas: &[T], ln_s: T) -> (T, T) {
    let mut hi = T::neg_infinity();
    let mut lo = T::infinity();
    for (ld, b) in ln_deltas.iter().zip(base) {
        let r = ln_phi(*ld + ln_s) - *b;
        hi = hi.max(r);
        lo = lo.min(r);
    }
    (hi, lo)
}

/// `(lower, upper)` for `||σ_s||` on `G(ψ)`. The lower bound is the best
/// ratio over indicators `I([0,δ])` on the default `δ`-grid and over the
/// optional test functions, each given by its `p ↦ ln |f|_p`.
pub fn dilation_norm_bounds<T: Scalar>(psi: &PsiFunction<T>, s: T, extra: &[&dyn Fn(T) -> T]) -> DilationBounds<T> {
    let upper = dilation_upper(psi.a, psi.b, s);
    if s == T::one() {
        return DilationBounds { lower: T::one(), upper };
    }
    let ln_phi = |x: T| phi_grand_ln(psi, x).ln_phi;
    let grid = ln_delta_grid::<T>();
    let base: Vec<T> = grid.iter().map(|x| ln_phi(*x)).collect();
    let mut best = ratio_extremes(&ln_phi, &base, &grid, s.ln()).0;
    let opts = SearchOptions::default();
    let ln_s = s.ln();
    for f in extra {
        let n0 = grand_norm_ln(psi, opts, f).value;
        let n1 = grand_norm_ln(psi, opts, |p| ln_s / p + f(p)).value;
        if n0 > T::zero() && n0.is_finite() && n1.is_finite() {
            best = best.max((n1 / n0).ln());
        }
    }
    DilationBounds { lower: best.exp().min(upper), upper }
}

/// Dilation data over an `s`-grid with the fitted log-log slope.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationEstimate<T> {
    pub s: Vec<T>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub fit: SlopeFit<T>,
}

/// One fitted index against its target.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexFit<T> {
    pub name: &'static str,
    pub value: T,
    pub target: Option<T>,
    pub residual: T,
    /// `None` when there is no target.
    pub agrees: Option<bool>,
    pub diagnostic: Option<String>,
}

impl<T: Scalar> IndexFit<T> {
    fn new(name: &'static str, fit: &SlopeFit<T>, target: Option<T>) -> Self {
        let agrees = target.map(|t| agrees(fit.slope, t));
        let mut diagnostic = None;
        if fit.residual > T::lit(RESIDUAL_THRESHOLD) {
            diagnostic = Some(format!("{name}: fit residual {} exceeds {RESIDUAL_THRESHOLD}", fit.residual));
        } else if agrees == Some(false) {
            diagnostic = Some(format!("{name}: fitted {} misses target {}", fit.slope, target.unwrap()));
        }
        Self { name, value: fit.slope, target, residual: fit.residual, agrees, diagnostic }
    }

    /// Passes when the residual is small and the target, if any, is met.
    pub fn ok(&self) -> bool {
        self.diagnostic.is_none()
    }
}

/// Relative tolerance, or absolute when the target is zero.
pub fn agrees<T: Scalar>(value: T, target: T) -> bool {
    let tol = T::lit(INDEX_TOL);
    if target == T::zero() {
        value.abs() <= tol
    } else {
        (value - target).abs() <= tol * target.abs()
    }
}

/// Dilation profiles of a fundamental function `ln δ ↦ ln φ(δ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationFits<T> {
    /// `ln sup_δ φ(sδ)/φ(δ)` against `ln s`, small `s`.
    pub grand_small: SlopeFit<T>,
    pub grand_large: SlopeFit<T>,
    /// `ln sup_δ χ(sδ)/χ(δ)` against `ln s`.
    pub small_small: SlopeFit<T>,
    pub small_large: SlopeFit<T>,
}

/// Fits all four slopes from one table of `ln φ` values.
pub fn dilation_fits<T: Scalar>(ln_phi: &dyn Fn(T) -> T) -> DilationFits<T> {
    let grid = ln_delta_grid::<T>();
    let base: Vec<T> = grid.iter().map(|x| ln_phi(*x)).collect();
    let side = |ss: Vec<T>| {
        let mut g = Vec::with_capacity(ss.len());
        let mut c = Vec::with_capacity(ss.len());
        for s in ss {
            let ln_s = s.ln();
            let (hi, lo) = ratio_extremes(ln_phi, &base, &grid, ln_s);
            g.push((ln_s, hi));
            // χ(sδ)/χ(δ) = s·φ(δ)/φ(sδ)
            c.push((ln_s, ln_s - lo));
        }
        (ols(&g), ols(&c))
    };
    let (grand_small, small_small) = side(small_s_grid());
    let (grand_large, small_large) = side(large_s_grid());
    DilationFits { grand_small, grand_large, small_small, small_large }
}

/// Same as `dilation_fits` for a model given by `ln δ ↦ ln χ(δ)`.
pub fn dilation_fits_from_chi<T: Scalar>(ln_chi: &dyn Fn(T) -> T) -> DilationFits<T> {
    dilation_fits(&|x: T| x - ln_chi(x))
}

fn targets_grand<T: Scalar>(psi: &PsiFunction<T>) -> (T, T) {
    (if psi.b.is_finite() { psi.b.recip() } else { T::zero() }, psi.a.recip())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrandIndices<T> {
    pub gamma1: IndexFit<T>,
    pub gamma2: IndexFit<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallIndices<T> {
    pub gamma1: IndexFit<T>,
    pub gamma2: IndexFit<T>,
    /// Fundamental-function slopes under the Shimogaki labels; same numbers as the Boyd fits.
    pub beta1: IndexFit<T>,
    pub beta2: IndexFit<T>,
}

fn psi_fits<T: Scalar>(psi: &PsiFunction<T>) -> DilationFits<T> {
    dilation_fits(&|x: T| phi_grand_ln(psi, x).ln_phi)
}

/// `(γ_1, γ_2)` of `G(ψ)` against `(1/b, 1/a)`.
pub fn boyd_indices_grand<T: Scalar>(psi: &PsiFunction<T>) -> GrandIndices<T> {
    grand_from_fits(psi, &psi_fits(psi))
}

fn grand_from_fits<T: Scalar>(psi: &PsiFunction<T>, fits: &DilationFits<T>) -> GrandIndices<T> {
    let (t1, t2) = targets_grand(psi);
    GrandIndices {
        gamma1: IndexFit::new("gamma1(G)", &fits.grand_small, Some(t1)),
        gamma2: IndexFit::new("gamma2(G)", &fits.grand_large, Some(t2)),
    }
}

fn small_from_fits<T: Scalar>(psi: &PsiFunction<T>, fits: &DilationFits<T>) -> SmallIndices<T> {
    let (g1, g2) = targets_grand(psi);
    let (t1, t2) = (T::one() - g2, T::one() - g1);
    SmallIndices {
        gamma1: IndexFit::new("gamma1(SL)", &fits.small_small, Some(t1)),
        gamma2: IndexFit::new("gamma2(SL)", &fits.small_large, Some(t2)),
        beta1: IndexFit::new("beta1(SL)", &fits.small_small, Some(t1)),
        beta2: IndexFit::new("beta2(SL)", &fits.small_large, Some(t2)),
    }
}

/// `(γ_1, γ_2, β_1, β_2)` of `SL(ψ)` against `(1-1/a, 1-1/b, 1-1/a, 1-1/b)`.
pub fn indices_small<T: Scalar>(psi: &PsiFunction<T>) -> SmallIndices<T> {
    small_from_fits(psi, &psi_fits(psi))
}

/// Both index sets from one dilation table, with the duality defects
/// `γ_1(SL) + γ_2(G) - 1` and `γ_2(SL) + γ_1(G) - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexReport<T> {
    pub grand: GrandIndices<T>,
    pub small: SmallIndices<T>,
    pub duality_defect: (T, T),
}

impl<T: Scalar> IndexReport<T> {
    pub fn compute(psi: &PsiFunction<T>) -> Self {
        let fits = psi_fits(psi);
        let grand = grand_from_fits(psi, &fits);
        let small = small_from_fits(psi, &fits);
        let duality_defect = (
            small.gamma1.value + grand.gamma2.value - T::one(),
            small.gamma2.value + grand.gamma1.value - T::one(),
        );
        Self { grand, small, duality_defect }
    }

    /// Index ordering `0 ≤ γ_1 ≤ γ_2 ≤ 1` on both spaces, with slack `tol`.
    pub fn ordered(&self, tol: T) -> bool {
        let ok = |a: T, b: T| a >= -tol && a <= b + tol && b <= T::one() + tol;
        ok(self.grand.gamma1.value, self.grand.gamma2.value) && ok(self.small.gamma1.value, self.small.gamma2.value)
    }

    pub fn diagnostics(&self) -> Vec<String> {
        [&self.grand.gamma1, &self.grand.gamma2, &self.small.gamma1, &self.small.gamma2]
            .iter()
            .filter_map(|f| f.diagnostic.clone())
            .collect()
    }
}

/// `DilationEstimate` for `G(ψ)` over the given `s` values.
pub fn dilation_estimate<T: Scalar>(psi: &PsiFunction<T>, s: &[T]) -> DilationEstimate<T> {
    let ln_phi = |x: T| phi_grand_ln(psi, x).ln_phi;
    let grid = ln_delta_grid::<T>();
    let base: Vec<T> = grid.iter().map(|x| ln_phi(*x)).collect();
    let lower: Vec<T> = s
        .iter()
        .map(|s| ratio_extremes(&ln_phi, &base, &grid, s.ln()).0.exp().min(dilation_upper(psi.a, psi.b, *s)))
        .collect();
    let upper = s.iter().map(|s| dilation_upper(psi.a, psi.b, *s)).collect();
    let pts: Vec<(T, T)> = s.iter().zip(&lower).map(|(s, l)| (s.ln(), l.ln())).collect();
    DilationEstimate { s: s.to_vec(), lower, upper, fit: ols(&pts) }
}
