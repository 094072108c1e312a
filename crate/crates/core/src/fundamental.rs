//! Fundamental functions `φ(δ) = sup_p δ^{1/p}/ψ(p)` of `G(ψ)` and
//! `χ(δ) = δ/φ(δ)` of `SL(ψ)`.
//!
//! Numeric routines take `ln δ` internally so that `δ` may span the whole
//! floating range.

use crate::error::{Error, Result};
use crate::measure::MeasureSpace;
use crate::psi::{PsiFunction, ZetaParams};
use crate::scalar::{rel_diff, Scalar};
use crate::search::{sup_ln, SearchOptions};

/// Closed-form branches must match the numeric supremum to this relative level.
pub const CLOSED_FORM_TOL: f64 = 1e-4;
pub const POINTS_PER_DECADE: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiPoint<T> {
    pub ln_phi: T,
    /// Maximizing exponent.
    pub arg: T,
}

impl<T: Scalar> PhiPoint<T> {
    pub fn phi(&self) -> T {
        self.ln_phi.exp()
    }
}

/// `ln φ` at `ln δ`, with the maximizing exponent.
pub fn phi_grand_ln<T: Scalar>(psi: &PsiFunction<T>, ln_delta: T) -> PhiPoint<T> {
    let r = sup_ln(&psi.interval(), &[], SearchOptions::default(), |p| ln_delta / p - psi.ln_eval(p));
    PhiPoint { ln_phi: r.ln_value, arg: r.arg }
}

/// `φ(G(ψ), δ)` by the clustered-grid supremum.
pub fn phi_grand_numeric<T: Scalar>(psi: &PsiFunction<T>, delta: T) -> Result<T> {
    check_delta(delta)?;
    Ok(phi_grand_ln(psi, delta.ln()).phi())
}

fn check_delta<T: Scalar>(delta: T) -> Result<()> {
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(Error::Domain(format!("delta = {delta} must be positive and finite")));
    }
    Ok(())
}

/// Reading of the printed upper-branch root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum P2Reading {
    /// `-M/(2β) + sqrt(ln²(δ/(4β²)) + bM/β)` with `M = |ln δ|`, as printed.
    Literal,
    /// `-M/(2β) + sqrt(M²/(4β²) + bM/β)`, the stationary point of `ln δ/p + β ln(b-p)`.
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Lower branch at its interior stationary point.
    P1,
    /// Lower branch frozen at `h`.
    LowerAtH,
    P2,
    UpperAtH,
    /// `b = ∞` branch at `p = |ln δ|/|β|`.
    P3,
    InfiniteAtH,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discrepancy<T> {
    pub branch: Branch,
    pub closed: T,
    pub numeric: T,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm<T> {
    pub value: T,
    pub branch: Branch,
    /// Lower-branch value and its exponent.
    pub phi1: T,
    pub p1: T,
    /// Upper-branch value (`φ_2`, or `φ_3` when `b = ∞`) and its exponent.
    pub phi_upper: T,
    pub p_upper: T,
    pub delta1: T,
    /// `δ_2`, or `exp(-h|β|)` when `b = ∞`.
    pub delta2: T,
    pub numeric: T,
    pub diagnostic: Vec<Discrepancy<T>>,
}

/// Stationary root of `α p² = (p - a) ln δ` on the lower branch.
pub fn p1_root<T: Scalar>(a: T, alpha: T, ln_delta: T) -> T {
    let two = T::lit(2.0);
    let c = ln_delta / (two * alpha);
    c - (c * c - a * ln_delta / alpha).sqrt()
}

/// Upper-branch root for `b < ∞` under the chosen reading.
pub fn p2_root<T: Scalar>(b: T, beta: T, ln_delta: T, reading: P2Reading) -> T {
    let m = ln_delta.abs();
    let two = T::lit(2.0);
    let head = -m / (two * beta);
    let sq = match reading {
        P2Reading::Stationary => m * m / (T::lit(4.0) * beta * beta),
        P2Reading::Literal => {
            let l = ln_delta - (T::lit(4.0) * beta * beta).ln();
            l * l
        }
    };
    head + (sq + b * m / beta).sqrt()
}

/// `φ(G(a,b;α,β), δ)` by the branch formulas, cross-checked against the
/// numeric supremum. Mismatches beyond `CLOSED_FORM_TOL` land in `diagnostic`.
pub fn phi_grand_closed<T: Scalar>(a: T, b: T, alpha: T, beta: T, delta: T, reading: P2Reading) -> Result<ClosedForm<T>> {
    check_delta(delta)?;
    let z = ZetaParams::new(a, b, alpha, beta)?;
    if alpha == T::zero() || (b.is_finite() && beta == T::zero()) {
        return Err(Error::Domain("closed form needs alpha > 0 and, for finite b, beta > 0".into()));
    }
    let h = z.h;
    let ln_d = delta.ln();
    let ln_at = |p: T| ln_d / p + z.ln_zeta_unchecked(p);

    let ln_delta1 = alpha * h * h / (h - a);
    let (p1, branch1) = if ln_d >= ln_delta1 { (p1_root(a, alpha, ln_d), Branch::P1) } else { (h, Branch::LowerAtH) };
    let phi1 = (ln_d / p1 + alpha * (p1 - a).ln()).exp();

    let (ln_delta2, p_upper, phi_upper, branch_u) = if b.is_finite() {
        let ln_delta2 = -beta * h * h / (b - h);
        let (p, br) = if ln_d < ln_delta2 { (p2_root(b, beta, ln_d, reading), Branch::P2) } else { (h, Branch::UpperAtH) };
        (ln_delta2, p, (ln_d / p + beta * (b - p).ln()).exp(), br)
    } else {
        let nb = beta.abs();
        let ln_delta3 = -h * nb;
        if ln_d < ln_delta3 {
            let m = ln_d.abs();
            let v = nb * (nb / T::E()).ln() - nb * m.ln();
            (ln_delta3, m / nb, v.exp(), Branch::P3)
        } else {
            (ln_delta3, h, (ln_d / h - nb * h.ln()).exp(), Branch::InfiniteAtH)
        }
    };

    let (value, branch) = if phi1 >= phi_upper || phi_upper.is_nan() { (phi1, branch1) } else { (phi_upper, branch_u) };
    let psi = PsiFunction::zeta(a, b, alpha, beta)?;
    let numeric = phi_grand_ln(&psi, ln_d).phi();

    let mut diagnostic = Vec::new();
    let tol = T::lit(CLOSED_FORM_TOL);
    for (br, v, p) in [(branch1, phi1, p1), (branch_u, phi_upper, p_upper)] {
        let inside = p > a && p < b;
        if !inside || v.is_nan() {
            diagnostic.push(Discrepancy {
                branch: br,
                closed: v,
                numeric,
                detail: format!("branch exponent {p} lies outside ({a}, {b})"),
            });
        } else if v > numeric * (T::one() + tol) {
            diagnostic.push(Discrepancy {
                branch: br,
                closed: v,
                numeric,
                detail: "branch value exceeds the supremum".into(),
            });
        } else if (v - ln_at(p).exp()).abs() > tol * v {
            diagnostic.push(Discrepancy {
                branch: br,
                closed: v,
                numeric,
                detail: format!("branch value disagrees with the objective at p = {p}"),
            });
        }
    }
    if !value.is_nan() && rel_diff(value, numeric) > tol {
        diagnostic.push(Discrepancy {
            branch,
            closed: value,
            numeric,
            detail: format!("closed form deviates from the numeric supremum by {}", rel_diff(value, numeric)),
        });
    }
    Ok(ClosedForm {
        value,
        branch,
        phi1,
        p1,
        phi_upper,
        p_upper,
        delta1: ln_delta1.exp(),
        delta2: ln_delta2.exp(),
        numeric,
        diagnostic,
    })
}

/// `(βb²/e)^β δ^{1/b} |ln δ|^{-β}`, the small-`δ` asymptote for finite `b`.
pub fn small_delta_asymptote<T: Scalar>(b: T, beta: T, delta: T) -> Option<T> {
    if !b.is_finite() || !(beta > T::zero()) || !(delta < T::one()) || !(delta > T::zero()) {
        return None;
    }
    let ln_d = delta.ln();
    Some((beta * (beta * b * b / T::E()).ln() + ln_d / b - beta * ln_d.abs().ln()).exp())
}

/// `χ(δ) = δ/φ(δ)`.
pub fn phi_small<T: Scalar>(psi: &PsiFunction<T>, delta: T) -> Result<T> {
    check_delta(delta)?;
    Ok((delta.ln() - phi_grand_ln(psi, delta.ln()).ln_phi).exp())
}

/// `χ(δ)` on a concrete space: requires `δ < μ(X)` and a nonatomic model.
pub fn phi_small_on<T: Scalar>(psi: &PsiFunction<T>, delta: T, space: &MeasureSpace<T>) -> Result<T> {
    if !space.capabilities().nonatomic_model {
        return Err(Error::NotApplicable("space does not model a nonatomic measure".into()));
    }
    let mass = space.total_mass();
    if !(delta < mass) {
        return Err(Error::Domain(format!("delta = {delta} is not below the total mass {mass}")));
    }
    phi_small(psi, delta)
}

/// `||I(A)||_{SL(ψ)} = χ(μ(A))`.
pub fn indicator_sl_norm<T: Scalar>(measure: T, psi: &PsiFunction<T>) -> Result<T> {
    phi_small(psi, measure)
}

/// Logarithmic grid with `per_decade` points per decade, endpoints included.
pub fn log_grid<T: Scalar>(lo: T, hi: T, per_decade: usize) -> Vec<T> {
    let (l, h) = (lo.log10(), hi.log10());
    let n = ((h - l) * T::from_usize_lossy(per_decade)).round().to_usize().unwrap_or(0).max(1);
    (0..=n)
        .map(|i| T::lit(10.0).powf(l + (h - l) * T::from_usize_lossy(i) / T::from_usize_lossy(n)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalProfile<T> {
    pub delta: Vec<T>,
    pub phi: Vec<T>,
    pub arg: Vec<T>,
    /// Small-`δ` asymptote, where defined.
    pub asymptote: Vec<Option<T>>,
}

impl<T: Scalar> FundamentalProfile<T> {
    pub fn compute(psi: &PsiFunction<T>, delta: &[T]) -> Self {
        let pts: Vec<PhiPoint<T>> = delta.iter().map(|d| phi_grand_ln(psi, d.ln())).collect();
        let asymptote = delta
            .iter()
            .map(|d| psi.zeta.and_then(|z| small_delta_asymptote(z.b, z.beta, *d)))
            .collect();
        Self {
            delta: delta.to_vec(),
            phi: pts.iter().map(|p| p.phi()).collect(),
            arg: pts.iter().map(|p| p.arg).collect(),
            asymptote,
        }
    }

    pub fn chi(&self) -> Vec<T> {
        self.delta.iter().zip(&self.phi).map(|(d, p)| *d / *p).collect()
    }

    /// `φ` nondecreasing and `φ(δ)/δ` nonincreasing, up to `rel_tol`.
    pub fn is_quasiconcave(&self, rel_tol: T) -> bool {
        self.phi.windows(2).zip(self.delta.windows(2)).all(|(f, d)| {
            let up = f[1] >= f[0] * (T::one() - rel_tol);
            let down = f[1] / d[1] <= f[0] / d[0] * (T::one() + rel_tol);
            up && down
        })
    }

    /// `φ/asymptote` where the asymptote is defined.
    pub fn asymptote_ratio(&self) -> Vec<(T, T)> {
        self.delta
            .iter()
            .zip(&self.phi)
            .zip(&self.asymptote)
            .filter_map(|((d, f), a)| a.map(|a| (*d, *f / a)))
            .collect()
    }
}
