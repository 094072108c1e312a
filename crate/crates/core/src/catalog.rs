//! Example functions with pointwise evaluators and moment oracles.
//!
//! All entries are radial functions on `R^n` with measure `|x|^σ dx`; the
//! real-line entries use `n = 1`, `σ = 0`. Moments `|f|_p^p` come either in
//! closed form (Gamma integrals after `|x| = e^{±t}`) or from the adaptive
//! half-line integrator applied to the same reduced integral.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grandnorm::{grand_norm, in_g0_test};
use crate::measure::{radial_constants, MeasureSpace, Node, SampledFunction, DEFAULT_NODES};
use crate::psi::{young_fenchel_psi, PsiFunction, Side, SlowlyVaryingFactor};
use crate::quadrature::ln_integral_half_line;
use crate::scalar::{ln_add_exp, ln_gamma, Scalar};
use crate::search::SearchOptions;

/// Shrink factors used by the exclusion claims.
pub const SHRINK: [f64; 2] = [0.25, 0.5];
/// Largest admissible corridor constant for the saddle-point example.
pub const SADDLE_CORRIDOR: f64 = 10.0;
/// Largest admissible corridor constant for the Orlicz-tail example.
pub const ORLICZ_CORRIDOR: f64 = 4.0;

/// Where the printed moment formula and the substitution disagree.
pub const GAMMA_PAIRING_NOTE: &str = "the (p/a - 1) factor pairs with Gamma(p*gamma + 1) and the (1 - p/b) factor \
     with Gamma(p*nu + 1); the stored moments use this pairing, confirmed by quadrature";

pub const NAMES: [&str; 10] = [
    "f_a_gamma",
    "g_b_nu",
    "h_m",
    "f_ab_gamma_nu",
    "g_a_gamma_m",
    "f_L",
    "g_L",
    "f_L_plus_g_L",
    "saddle",
    "orlicz_tail",
];

/// `L(z) = ln(e + z)`, the slowly varying factor of the radial entries.
fn ln_l<T: Scalar>(z: T) -> T {
    (T::E() + z).ln().ln()
}

#[derive(Debug, Clone, PartialEq)]
pub enum CatalogEntry<T> {
    /// `I(|x| ≥ 1)|x|^{-1/a}|ln|x||^γ`.
    FAGamma { a: T, gamma: T },
    /// `I(|x| < 1)|x|^{-1/b}|ln|x||^ν`.
    GBNu { b: T, nu: T },
    /// `|ln|x||^{1/m} I(|x| < 1)`.
    HM { m: T },
    FABGammaNu { a: T, b: T, gamma: T, nu: T },
    /// `h_m + f_{a,γ}`.
    GAGammaM { a: T, gamma: T, m: T },
    /// `I(|x|<1)|x|^{-1/b}|ln|x||^γ L(|ln|x||)` on `(R^n, |x|^σ dx)`; `a` is
    /// the lower end of the matching weight.
    FL { a: T, b: T, gamma: T, n: u32, sigma: T },
    /// `I(|x|>1)|x|^{-1/a}|ln|x||^γ L(ln|x|)`; `b` is the upper end of the matching weight.
    GL { a: T, b: T, gamma: T, n: u32, sigma: T },
    FLPlusGL { a: T, b: T, gamma: T, n: u32, sigma: T },
    /// `|x|^{-1/b}exp(c1|ln|x||^{1-β})` inside the unit ball plus
    /// `|x|^{-1/a}exp(c2(ln|x|)^{1-α})` outside.
    Saddle { a: T, b: T, alpha: T, beta: T, c1: T, c2: T },
    /// Radial `h` with `μ_σ{h > u} = exp(-W(ln u))` for `u ≥ e²`, `W(z) = z^k`.
    OrliczTail { n: u32, sigma: T, k: T },
}

fn param<T: Scalar>(params: &[(String, f64)], key: &str, default: f64) -> T {
    T::lit(params.iter().rev().find(|(k, _)| k == key).map_or(default, |(_, v)| *v))
}

fn dim(params: &[(String, f64)]) -> Result<u32> {
    let n = params.iter().rev().find(|(k, _)| k == "n").map_or(1.0, |(_, v)| *v);
    if n < 1.0 || n.fract() != 0.0 {
        return Err(Error::Domain(format!("dimension n = {n} must be a positive integer")));
    }
    Ok(n as u32)
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg.into()))
    }
}

impl<T: Scalar> CatalogEntry<T> {
    /// Builds an entry from its name and `key=value` parameters; missing keys take defaults.
    pub fn from_params(name: &str, params: &[(String, f64)]) -> Result<Self> {
        let p = |k: &str, d: f64| param::<T>(params, k, d);
        let e = match name {
            "f_a_gamma" => Self::FAGamma { a: p("a", 1.5), gamma: p("gamma", 0.5) },
            "g_b_nu" => Self::GBNu { b: p("b", 4.0), nu: p("nu", 0.5) },
            "h_m" => Self::HM { m: p("m", 2.0) },
            "f_ab_gamma_nu" => Self::FABGammaNu { a: p("a", 1.5), b: p("b", 4.0), gamma: p("gamma", 0.5), nu: p("nu", 0.5) },
            "g_a_gamma_m" => Self::GAGammaM { a: p("a", 1.5), gamma: p("gamma", 0.5), m: p("m", 2.0) },
            "f_L" => Self::FL { a: p("a", 1.0), b: p("b", 2.0), gamma: p("gamma", 0.5), n: dim(params)?, sigma: p("sigma", 0.0) },
            "g_L" => Self::GL { a: p("a", 1.5), b: p("b", 6.0), gamma: p("gamma", 0.5), n: dim(params)?, sigma: p("sigma", 0.0) },
            "f_L_plus_g_L" => {
                Self::FLPlusGL { a: p("a", 1.5), b: p("b", 4.0), gamma: p("gamma", 0.5), n: dim(params)?, sigma: p("sigma", 0.0) }
            }
            "saddle" => Self::Saddle {
                a: p("a", 1.0),
                b: p("b", 2.0),
                alpha: p("alpha", 0.5),
                beta: p("beta", 0.5),
                c1: p("c1", 1.0),
                c2: p("c2", 1.0),
            },
            "orlicz_tail" => Self::OrliczTail { n: dim(params)?, sigma: p("sigma", 0.0), k: p("k", 2.0) },
            other => return Err(Error::UnknownEntry(other.into())),
        };
        e.validate()?;
        Ok(e)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::FAGamma { .. } => "f_a_gamma",
            Self::GBNu { .. } => "g_b_nu",
            Self::HM { .. } => "h_m",
            Self::FABGammaNu { .. } => "f_ab_gamma_nu",
            Self::GAGammaM { .. } => "g_a_gamma_m",
            Self::FL { .. } => "f_L",
            Self::GL { .. } => "g_L",
            Self::FLPlusGL { .. } => "f_L_plus_g_L",
            Self::Saddle { .. } => "saddle",
            Self::OrliczTail { .. } => "orlicz_tail",
        }
    }

    /// Parameter record as `(key, value)` pairs.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        let f = |x: &T| x.as_f64();
        match self {
            Self::FAGamma { a, gamma } => vec![("a", f(a)), ("gamma", f(gamma))],
            Self::GBNu { b, nu } => vec![("b", f(b)), ("nu", f(nu))],
            Self::HM { m } => vec![("m", f(m))],
            Self::FABGammaNu { a, b, gamma, nu } => vec![("a", f(a)), ("b", f(b)), ("gamma", f(gamma)), ("nu", f(nu))],
            Self::GAGammaM { a, gamma, m } => vec![("a", f(a)), ("gamma", f(gamma)), ("m", f(m))],
            Self::FL { a, b, gamma, n, sigma } | Self::GL { a, b, gamma, n, sigma } | Self::FLPlusGL { a, b, gamma, n, sigma } => {
                vec![("a", f(a)), ("b", f(b)), ("gamma", f(gamma)), ("n", *n as f64), ("sigma", f(sigma))]
            }
            Self::Saddle { a, b, alpha, beta, c1, c2 } => vec![
                ("a", f(a)),
                ("b", f(b)),
                ("alpha", f(alpha)),
                ("beta", f(beta)),
                ("c1", f(c1)),
                ("c2", f(c2)),
            ],
            Self::OrliczTail { n, sigma, k } => vec![("n", *n as f64), ("sigma", f(sigma)), ("k", f(k))],
        }
    }

    fn power(&self) -> T {
        match self {
            Self::FL { n, sigma, .. } | Self::GL { n, sigma, .. } | Self::FLPlusGL { n, sigma, .. } | Self::OrliczTail { n, sigma, .. } => {
                T::from_u32(*n).unwrap() + *sigma
            }
            _ => T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let one = T::one();
        match *self {
            Self::FAGamma { a, gamma } => require(a >= one && gamma * a > -one, "need a >= 1, gamma > -1/a"),
            Self::GBNu { b, nu } => require(b > one && nu * b > -one && b.is_finite(), "need finite b > 1, nu > -1/b"),
            Self::HM { m } => require(m > T::zero(), "need m > 0"),
            Self::FABGammaNu { a, b, gamma, nu } => require(
                a >= one && b > a && b.is_finite() && gamma * a > -one && nu * b > -one,
                "need 1 <= a < b < inf, gamma > -1/a, nu > -1/b",
            ),
            Self::GAGammaM { a, gamma, m } => {
                require(a >= one && gamma * a > -one && m > T::zero(), "need a >= 1, gamma > -1/a, m > 0")
            }
            Self::FL { a, b, gamma, n, sigma } => {
                radial_constants(n, sigma)?;
                let big_b = b * self.power();
                require(big_b > one && a >= one && a < big_b && gamma >= T::zero(), "need 1 <= a < b(n+sigma), gamma >= 0")
            }
            Self::GL { a, b, gamma, n, sigma } => {
                radial_constants(n, sigma)?;
                let big_a = a * self.power();
                require(big_a >= one && b > big_a && gamma >= T::zero(), "need 1 <= a(n+sigma) < b, gamma >= 0")
            }
            Self::FLPlusGL { a, b, gamma, n, sigma } => {
                radial_constants(n, sigma)?;
                require(a >= one && b > a && b.is_finite() && gamma >= T::zero(), "need 1 <= a < b < inf, gamma >= 0")
            }
            Self::Saddle { a, b, alpha, beta, c1, c2 } => require(
                a >= one
                    && b > a
                    && b.is_finite()
                    && alpha > T::zero()
                    && alpha < one
                    && beta > T::zero()
                    && beta < one
                    && c1 > T::zero()
                    && c2 > T::zero(),
                "need 1 <= a < b < inf, alpha, beta in (0,1), c1, c2 > 0",
            ),
            Self::OrliczTail { n, sigma, k } => {
                radial_constants(n, sigma)?;
                require(k > one, "need k > 1")
            }
        }
    }

    /// Open interval of exponents where the moment is finite.
    pub fn validity(&self) -> (T, T) {
        let inf = T::infinity();
        let gamma_floor = |g: T| if g < T::zero() { -g.recip() } else { T::zero() };
        match *self {
            Self::FAGamma { a, gamma } | Self::GAGammaM { a, gamma, .. } => (a.max(gamma_floor(gamma)), inf),
            Self::GBNu { b, nu } => (gamma_floor(nu), b),
            Self::HM { .. } => (T::zero(), inf),
            Self::FABGammaNu { a, b, gamma, nu } => (a.max(gamma_floor(gamma)).max(gamma_floor(nu)), b),
            Self::FL { b, .. } => (T::zero(), b * self.power()),
            Self::GL { a, .. } => (a * self.power(), inf),
            Self::FLPlusGL { a, b, .. } => (a * self.power(), b * self.power()),
            Self::Saddle { a, b, .. } => (a, b),
            Self::OrliczTail { .. } => (T::zero(), inf),
        }
    }

    pub fn is_valid_exponent(&self, p: T) -> bool {
        let (lo, hi) = self.validity();
        p > lo && p < hi
    }

    /// Whether `ln_moment` is a closed form rather than a reduced one-dimensional integral.
    pub fn has_closed_form(&self) -> bool {
        matches!(self, Self::FAGamma { .. } | Self::GBNu { .. } | Self::HM { .. } | Self::FABGammaNu { .. } | Self::GAGammaM { .. })
    }

    /// `ln |f|_p^p`, `+inf` outside the validity interval.
    pub fn ln_moment(&self, p: T) -> T {
        if !self.is_valid_exponent(p) {
            return T::infinity();
        }
        let ln2 = T::LN_2();
        // ln ∫_0^∞ t^k e^{-ct} dt
        let gamma_int = |k: T, c: T| ln_gamma(k + T::one()) - (k + T::one()) * c.ln();
        let one = T::one();
        match *self {
            Self::FAGamma { a, gamma } => ln2 + gamma_int(p * gamma, p / a - one),
            Self::GBNu { b, nu } => ln2 + gamma_int(p * nu, one - p / b),
            Self::HM { m } => ln2 + ln_gamma(p / m + one),
            Self::FABGammaNu { a, b, gamma, nu } => {
                ln_add_exp(ln2 + gamma_int(p * gamma, p / a - one), ln2 + gamma_int(p * nu, one - p / b))
            }
            Self::GAGammaM { a, gamma, m } => ln_add_exp(ln2 + gamma_int(p * gamma, p / a - one), ln2 + ln_gamma(p / m + one)),
            Self::FL { b, gamma, n, sigma, .. } => self.ln_radial_inner(n, sigma, b, gamma, p),
            Self::GL { a, gamma, n, sigma, .. } => self.ln_radial_outer(n, sigma, a, gamma, p),
            Self::FLPlusGL { a, b, gamma, n, sigma } => {
                ln_add_exp(self.ln_radial_inner(n, sigma, b, gamma, p), self.ln_radial_outer(n, sigma, a, gamma, p))
            }
            Self::Saddle { a, b, alpha, beta, c1, c2 } => {
                let inner = ln_integral_half_line(|t: T| -t * (one - p / b) + p * c1 * t.powf(one - beta));
                let outer = ln_integral_half_line(|t: T| -t * (p / a - one) + p * c2 * t.powf(one - alpha));
                ln2 + ln_add_exp(inner, outer)
            }
            Self::OrliczTail { k, .. } => {
                // ∫_2^∞ exp(pz - W(z)) W'(z) dz
                let two = T::lit(2.0);
                ln_integral_half_line(|t: T| {
                    let z = two + t;
                    p * z - z.powf(k) + k.ln() + (k - one) * z.ln()
                })
            }
        }
    }

    /// `Ω ∫_0^∞ e^{-t((n+σ) - p/b)} t^{pγ} L(t)^p dt`.
    fn ln_radial_inner(&self, n: u32, sigma: T, b: T, gamma: T, p: T) -> T {
        let (_, big_omega, _) = radial_constants(n, sigma).expect("validated");
        let c = self.power() - p / b;
        if !(c > T::zero()) {
            return T::infinity();
        }
        big_omega.ln() + ln_integral_half_line(|t: T| -c * t + p * gamma * t.ln() + p * ln_l(t))
    }

    /// `Ω ∫_0^∞ e^{-t(p/a - (n+σ))} t^{pγ} L(t)^p dt`.
    fn ln_radial_outer(&self, n: u32, sigma: T, a: T, gamma: T, p: T) -> T {
        let (_, big_omega, _) = radial_constants(n, sigma).expect("validated");
        let c = p / a - self.power();
        if !(c > T::zero()) {
            return T::infinity();
        }
        big_omega.ln() + ln_integral_half_line(|t: T| -c * t + p * gamma * t.ln() + p * ln_l(t))
    }

    pub fn moment(&self, p: T) -> T {
        self.ln_moment(p).exp()
    }

    /// Radius where the Orlicz-tail function jumps from 0 to `e²`.
    fn orlicz_jump(&self) -> T {
        match *self {
            Self::OrliczTail { n, sigma, k } => {
                let (_, _, r) = radial_constants(n, sigma).expect("validated");
                r * (-T::lit(2.0).powf(k) / self.power()).exp()
            }
            _ => T::one(),
        }
    }

    /// Quadrature space the entry lives on, split at the radius where the
    /// function has its singularity or jump.
    pub fn space(&self, nodes: usize) -> Result<MeasureSpace<T>> {
        match *self {
            Self::FL { n, sigma, .. } | Self::GL { n, sigma, .. } | Self::FLPlusGL { n, sigma, .. } => {
                MeasureSpace::radial(n, sigma, nodes)
            }
            Self::OrliczTail { n, sigma, .. } => MeasureSpace::radial_with_pivot(n, sigma, self.orlicz_jump(), nodes),
            _ => MeasureSpace::radial(1, T::zero(), nodes),
        }
    }

    pub fn default_space(&self) -> Result<MeasureSpace<T>> {
        self.space(DEFAULT_NODES)
    }

    /// Value at a node of a radial space (`node.ln_x = ln |x|`).
    pub fn eval(&self, node: &Node<T>) -> T {
        let ln_r = node.ln_x;
        let t = ln_r.abs();
        let zero = T::zero();
        let one = T::one();
        let inside = ln_r < zero;
        let f_a = |a: T, gamma: T| if inside { zero } else { (-ln_r / a + gamma * t.ln()).exp() };
        let g_b = |b: T, nu: T| if inside { (-ln_r / b + nu * t.ln()).exp() } else { zero };
        let h_m = |m: T| if inside { t.powf(m.recip()) } else { zero };
        match *self {
            Self::FAGamma { a, gamma } => f_a(a, gamma),
            Self::GBNu { b, nu } => g_b(b, nu),
            Self::HM { m } => h_m(m),
            Self::FABGammaNu { a, b, gamma, nu } => f_a(a, gamma) + g_b(b, nu),
            Self::GAGammaM { a, gamma, m } => h_m(m) + f_a(a, gamma),
            Self::FL { b, gamma, .. } => g_b(b, gamma) * ln_l(t).exp(),
            Self::GL { a, gamma, .. } => f_a(a, gamma) * ln_l(t).exp(),
            Self::FLPlusGL { a, b, gamma, .. } => (f_a(a, gamma) + g_b(b, gamma)) * ln_l(t).exp(),
            Self::Saddle { a, b, alpha, beta, c1, c2 } => {
                if inside {
                    (-ln_r / b + c1 * t.powf(one - beta)).exp()
                } else {
                    (-ln_r / a + c2 * t.powf(one - alpha)).exp()
                }
            }
            Self::OrliczTail { k, .. } => {
                let (_, _, r) = radial_constants(self.n(), self.sigma()).expect("validated");
                let y = self.power() * (r.ln() - ln_r);
                if y < T::lit(2.0).powf(k) {
                    zero
                } else {
                    y.powf(k.recip()).exp()
                }
            }
        }
    }

    fn n(&self) -> u32 {
        match self {
            Self::FL { n, .. } | Self::GL { n, .. } | Self::FLPlusGL { n, .. } | Self::OrliczTail { n, .. } => *n,
            _ => 1,
        }
    }

    fn sigma(&self) -> T {
        match self {
            Self::FL { sigma, .. } | Self::GL { sigma, .. } | Self::FLPlusGL { sigma, .. } | Self::OrliczTail { sigma, .. } => *sigma,
            _ => T::zero(),
        }
    }

    /// Samples on `space` with the moment oracle attached.
    pub fn sample(&self, space: &MeasureSpace<T>) -> Result<SampledFunction<T>> {
        let me = self.clone();
        Ok(SampledFunction::sample(space, |n| self.eval(n))?.with_ln_moment(Arc::new(move |p| me.ln_moment(p))))
    }

    /// Samples without the oracle, so norms come from quadrature.
    pub fn sample_plain(&self, space: &MeasureSpace<T>) -> Result<SampledFunction<T>> {
        SampledFunction::sample(space, |n| self.eval(n))
    }

    /// The weight the entry is claimed to belong to (and not to its `G°`).
    pub fn claimed_psi(&self) -> Option<PsiFunction<T>> {
        let one = T::one();
        let l = SlowlyVaryingFactor::log_e_plus();
        match *self {
            Self::FABGammaNu { a, b, gamma, nu } => PsiFunction::zeta(a, b, gamma + a.recip(), nu + b.recip()).ok(),
            Self::GAGammaM { a, gamma, m } => PsiFunction::zeta(a, T::infinity(), gamma + a.recip(), -m.recip()).ok(),
            Self::FL { a, b, gamma, .. } => {
                let big_b = b * self.power();
                PsiFunction::zeta(a, big_b, T::zero(), gamma + big_b.recip()).ok()?.slowly_varying(&l, Side::B).ok()
            }
            Self::GL { a, b, gamma, .. } => {
                let big_a = a * self.power();
                PsiFunction::zeta(big_a.max(one), b, gamma + big_a.recip(), T::zero()).ok()?.slowly_varying(&l, Side::A).ok()
            }
            Self::FLPlusGL { a, b, gamma, .. } => {
                let (big_a, big_b) = (a * self.power(), b * self.power());
                PsiFunction::zeta(big_a.max(one), big_b, gamma + big_a.recip(), gamma + big_b.recip())
                    .ok()?
                    .slowly_varying(&l, Side::Both)
                    .ok()
            }
            _ => None,
        }
    }

    /// Weights the entry is claimed not to belong to, with a description.
    pub fn excluded_psis(&self) -> Vec<(String, PsiFunction<T>)> {
        let mut out = Vec::new();
        let one = T::one();
        for d in SHRINK {
            let keep = one - T::lit(d);
            match *self {
                Self::FABGammaNu { a, b, gamma, nu } => {
                    let (al, be) = (gamma + a.recip(), nu + b.recip());
                    if let Ok(p) = PsiFunction::zeta(a, b, keep * al, be) {
                        out.push((format!("alpha side shrunk by {d}"), p));
                    }
                    if let Ok(p) = PsiFunction::zeta(a, b, al, keep * be) {
                        out.push((format!("beta side shrunk by {d}"), p));
                    }
                }
                Self::GAGammaM { a, gamma, m } => {
                    if let Ok(p) = PsiFunction::zeta(a, T::infinity(), keep * (gamma + a.recip()), -m.recip()) {
                        out.push((format!("alpha side shrunk by {d}"), p));
                    }
                }
                _ => {}
            }
        }
        out
    }
}

/// `|f|_p^p` for a named entry.
pub fn catalog_moment<T: Scalar>(name: &str, params: &[(String, f64)], p: T) -> Result<T> {
    Ok(CatalogEntry::<T>::from_params(name, params)?.moment(p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Claim<T> {
    pub description: String,
    pub passed: bool,
    pub value: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport<T> {
    pub entry: String,
    pub claims: Vec<Claim<T>>,
}

impl<T: Scalar> MembershipReport<T> {
    pub fn all_passed(&self) -> bool {
        self.claims.iter().all(|c| c.passed)
    }
}

/// Runs the membership and exclusion claims of an entry through
/// `grand_norm` and `in_g0_test` with the moment oracle.
pub fn catalog_membership_check<T: Scalar>(entry: &CatalogEntry<T>) -> Result<MembershipReport<T>> {
    let mut claims = Vec::new();
    match entry {
        CatalogEntry::Saddle { a, b, alpha, beta, c1, c2 } => {
            let r = saddle_asymptotic_check(*a, *b, *alpha, *beta, *c1, *c2)?;
            claims.push(Claim {
                description: format!("log-norm within a corridor of {SADDLE_CORRIDOR} around the two-sided power law"),
                passed: r.passes,
                value: Some(r.corridor),
            });
        }
        CatalogEntry::OrliczTail { .. } => {
            let r = orlicz_corridor(entry, T::one(), T::lit(20.0))?;
            claims.push(Claim {
                description: format!("|h|_p / psi(p) within a corridor of {ORLICZ_CORRIDOR} on [1, 20]"),
                passed: r.passes,
                value: Some(r.corridor),
            });
        }
        _ => {
            let psi = entry
                .claimed_psi()
                .ok_or_else(|| Error::NotApplicable(format!("{} carries no membership claim", entry.name())))?;
            let space = MeasureSpace::atomic(vec![T::one()])?;
            let f = SampledFunction::new(vec![T::one()])?.with_ln_moment({
                let e = entry.clone();
                Arc::new(move |p| e.ln_moment(p))
            });
            let g0 = in_g0_test(&f, &psi, &space)?;
            claims.push(Claim {
                description: format!("finite norm in G({})", psi.label),
                passed: g0.norm.is_finite() && g0.norm > T::zero(),
                value: Some(g0.norm),
            });
            claims.push(Claim { description: "not in the closure G°".into(), passed: !g0.in_g0, value: None });
            for (what, nu) in entry.excluded_psis() {
                let n = grand_norm(&f, &nu, &space, SearchOptions::default())?.value;
                claims.push(Claim { description: format!("infinite norm with {what}"), passed: n == T::infinity(), value: Some(n) });
            }
        }
    }
    Ok(MembershipReport { entry: entry.name().into(), claims })
}

/// Fit of `ln|f|_p` against `(p-a)^{1-1/α} + (b-p)^{1-1/β}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleReport<T> {
    /// `(p, ln|f|_p, shape(p))`.
    pub samples: Vec<(T, T, T)>,
    /// Least-squares coefficients of the two branches.
    pub coef: (T, T),
    /// Smallest `C` with `ratio ∈ [1/C, C]` on the grid.
    pub corridor: T,
    pub passes: bool,
    /// Slope of `ln ln|f|_p` against `ln(p - a)` over the four points nearest `a`.
    pub lower_slope: T,
}

/// Exponent grid for the saddle fit: geometric clusters towards both ends
/// plus a uniform interior.
fn saddle_grid<T: Scalar>(a: T, b: T) -> Vec<T> {
    let w = b - a;
    let mut u: Vec<f64> = (0..12).map(|k| 1e-3 * 2f64.powi(k) / 2.0).filter(|x| *x < 0.1).collect();
    u.extend((1..=18).map(|k| k as f64 / 20.0));
    let mut out: Vec<T> = u.iter().map(|x| a + w * T::lit(*x)).collect();
    out.extend(u.iter().filter(|x| **x < 0.1).map(|x| b - w * T::lit(*x)));
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}

pub fn saddle_asymptotic_check<T: Scalar>(a: T, b: T, alpha: T, beta: T, c1: T, c2: T) -> Result<SaddleReport<T>> {
    let entry = CatalogEntry::Saddle { a, b, alpha, beta, c1, c2 };
    entry.validate()?;
    let one = T::one();
    let shape = |p: T| (p - a).powf(one - alpha.recip()) + (b - p).powf(one - beta.recip());
    let mut samples = Vec::new();
    for p in saddle_grid(a, b) {
        let ln_norm = entry.ln_moment(p) / p;
        if !ln_norm.is_finite() {
            return Err(Error::NoInteriorMaximizer(format!("saddle moment diverges at p = {p}")));
        }
        samples.push((p, ln_norm, shape(p)));
    }
    let corridor = samples
        .iter()
        .map(|(_, v, s)| {
            let r = *v / *s;
            if r > T::zero() {
                r.max(r.recip())
            } else {
                T::infinity()
            }
        })
        .fold(one, T::max);
    // two-parameter least squares without intercept
    let (mut s11, mut s12, mut s22, mut y1, mut y2) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for (p, v, _) in &samples {
        let u1 = (*p - a).powf(one - alpha.recip());
        let u2 = (b - *p).powf(one - beta.recip());
        s11 = s11 + u1 * u1;
        s12 = s12 + u1 * u2;
        s22 = s22 + u2 * u2;
        y1 = y1 + u1 * *v;
        y2 = y2 + u2 * *v;
    }
    let det = s11 * s22 - s12 * s12;
    let coef = ((y1 * s22 - y2 * s12) / det, (s11 * y2 - s12 * y1) / det);
    let near: Vec<(T, T)> = samples.iter().take(4).map(|(p, v, _)| ((*p - a).ln(), v.ln())).collect();
    let lower_slope = crate::indices::ols(&near).slope;
    Ok(SaddleReport { samples, coef, corridor, passes: corridor <= T::lit(SADDLE_CORRIDOR), lower_slope })
}

/// `|h|_p / ψ(p)` over a grid, with `ψ(p) = exp(W*(p)/p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorridorReport<T> {
    pub samples: Vec<(T, T)>,
    pub corridor: T,
    pub passes: bool,
}

pub fn orlicz_corridor<T: Scalar>(entry: &CatalogEntry<T>, lo: T, hi: T) -> Result<CorridorReport<T>> {
    let k = match entry {
        CatalogEntry::OrliczTail { k, .. } => *k,
        _ => return Err(Error::NotApplicable(format!("{} is not the Orlicz-tail entry", entry.name()))),
    };
    let mut samples = Vec::new();
    for i in 0..=38 {
        let p = lo + (hi - lo) * T::lit(i as f64 / 38.0);
        let psi = young_fenchel_psi(|z: T| z.powf(k), p)?;
        samples.push((p, (entry.ln_moment(p) / p).exp() / psi));
    }
    let max = samples.iter().map(|s| s.1).fold(T::zero(), T::max);
    let min = samples.iter().map(|s| s.1).fold(T::infinity(), T::min);
    let corridor = max.max(min.recip()).max(T::one());
    Ok(CorridorReport { samples, corridor, passes: corridor <= T::lit(ORLICZ_CORRIDOR) })
}

/// Entries at their default parameters.
pub fn defaults<T: Scalar>() -> Vec<CatalogEntry<T>> {
    NAMES.iter().map(|n| CatalogEntry::from_params(n, &[]).expect("defaults are valid")).collect()
}

/// Human-readable catalog: one line per entry at default parameters, then
/// the note on the moment formula.
pub fn listing() -> String {
    let mut out = String::new();
    for e in defaults::<f64>() {
        let params: Vec<String> = e.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        let (lo, hi) = e.validity();
        let oracle = if e.has_closed_form() { "closed form" } else { "reduced integral" };
        out.push_str(&format!("{:<14} {:<48} p in ({lo}, {hi})  moment: {oracle}\n", e.name(), params.join(",")));
    }
    out.push_str("note: ");
    out.push_str(GAMMA_PAIRING_NOTE);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(name: &str, kv: &[(&str, f64)]) -> CatalogEntry<f64> {
        let kv: Vec<(String, f64)> = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        CatalogEntry::from_params(name, &kv).unwrap()
    }

    #[test]
    fn closed_form_values() {
        assert!((entry("f_a_gamma", &[("a", 2.0), ("gamma", 0.0)]).moment(4.0) - 2.0).abs() < 1e-12);
        assert!((entry("g_b_nu", &[("b", 2.0), ("nu", 0.0)]).moment(1.0) - 4.0).abs() < 1e-12);
        assert!((entry("h_m", &[("m", 2.0)]).moment(2.0) - 2.0).abs() < 1e-12);
        assert_eq!(entry("f_a_gamma", &[]).moment(1.2), f64::INFINITY);
        assert_eq!(entry("g_b_nu", &[]).moment(4.5), f64::INFINITY);
    }

    #[test]
    fn unknown_and_invalid() {
        assert!(matches!(CatalogEntry::<f64>::from_params("nope", &[]), Err(Error::UnknownEntry(_))));
        let bad = vec![("a".to_string(), 0.5)];
        assert!(CatalogEntry::<f64>::from_params("f_a_gamma", &bad).is_err());
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let e = entry("f_ab_gamma_nu", &[]);
        let space = e.default_space().unwrap();
        let f = e.sample_plain(&space).unwrap();
        for p in [1.8, 2.5, 3.5] {
            let q = space.ln_moment(f.values(), p).unwrap();
            assert!((q.exp() / e.moment(p) - 1.0).abs() < 1e-6, "p={p}");
        }
    }

    #[test]
    fn defaults_validate() {
        assert_eq!(defaults::<f64>().len(), NAMES.len());
    }

    #[test]
    fn membership_of_two_sided_example() {
        let r = catalog_membership_check(&entry("f_ab_gamma_nu", &[])).unwrap();
        assert!(r.all_passed(), "{r:?}");
    }
}
