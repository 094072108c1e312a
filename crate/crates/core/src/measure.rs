//! Measure spaces, sampled functions and `L_p` norms.
//!
//! A [`MeasureSpace`] is always realized as a finite list of nodes with
//! positive weights: the atoms of an atomic space, or the nodes of a
//! quadrature rule for an interval or a radially weighted `R^n`. Weights
//! are kept in log form as well so that improper integrals whose weights
//! and integrands overflow separately can still be summed.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::composite_gauss_legendre;
use crate::scalar::{ln_gamma, ln_sum_exp, Scalar};

/// Default number of quadrature nodes per space.
pub const DEFAULT_NODES: usize = 2048;

/// Largest `|ln(r / pivot)|` reached by tail nodes. Keeps `r` and the
/// catalog integrands representable in `f64`.
pub const TAIL_DEPTH: f64 = 700.0;

/// Smallest depth reached by tail nodes, as `ln` of the depth.
const TAIL_LN_DEPTH_MIN: f64 = -40.0;

/// Tail partial sums above this multiple of the core estimate flag divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

const GL_ORDER: usize = 16;

/// A quadrature node or atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node<T> {
    /// Position (atom index for atomic spaces, radius for radial spaces).
    pub x: T,
    /// `ln |x|`, carried separately so evaluators near `x = 0` or `x = 1`
    /// do not lose precision.
    pub ln_x: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceKind<T> {
    Atomic { ids: Vec<String> },
    /// `[lo, hi]`; `hi` may be `+inf`, in which case the tail `x - lo = e^v` is used.
    Interval { lo: T, hi: T },
    /// `R^n` with weight `|x|^σ`, integrated radially. `pivot` is the radius
    /// that splits the inner (`r → 0`) and outer (`r → ∞`) branches.
    Radial { dim: u32, sigma: T, pivot: T },
}

/// Declared properties of the model measure. They are not proved, only
/// recorded and checked for consistency with the variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    pub finite_total_mass: bool,
    pub nonatomic_model: bool,
    pub resonant_model: bool,
}

/// Nodes of one improper branch, sorted by depth into the tail.
#[derive(Debug, Clone, PartialEq)]
struct Tail<T> {
    indices: Vec<usize>,
    depth: Vec<T>,
    core_depth: T,
    outer_depth: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace<T> {
    kind: SpaceKind<T>,
    nodes: Vec<Node<T>>,
    weights: Vec<T>,
    ln_weights: Vec<T>,
    tails: Vec<Tail<T>>,
    caps: Capabilities,
}

impl<T: Scalar> MeasureSpace<T> {
    /// Atomic space with atoms named `0, 1, ...`.
    pub fn atomic(weights: Vec<T>) -> Result<Self> {
        let ids = (0..weights.len()).map(|i| i.to_string()).collect();
        Self::atomic_with_ids(ids, weights)
    }

    pub fn atomic_with_ids(ids: Vec<String>, weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidSpace("atomic space without atoms".into()));
        }
        if ids.len() != weights.len() {
            return Err(Error::InvalidSpace("ids and weights differ in length".into()));
        }
        check_weights(&weights)?;
        let w0 = weights[0];
        let equal = weights
            .iter()
            .all(|&w| (w - w0).abs() <= T::lit(1e-12) * w0);
        let nodes = (0..weights.len())
            .map(|i| {
                let x = T::from_usize_lossy(i);
                Node { x, ln_x: x.ln() }
            })
            .collect();
        Ok(Self {
            kind: SpaceKind::Atomic { ids },
            nodes,
            ln_weights: weights.iter().map(|w| w.ln()).collect(),
            weights,
            tails: Vec::new(),
            caps: Capabilities {
                finite_total_mass: true,
                nonatomic_model: false,
                resonant_model: equal,
            },
        })
    }

    /// Lebesgue measure on `[lo, hi]`, `hi` possibly `+inf`.
    pub fn interval(lo: T, hi: T, nodes: usize) -> Result<Self> {
        if !(lo.is_finite() && hi > lo) {
            return Err(Error::InvalidSpace(format!("bad interval [{lo}, {hi}]")));
        }
        let panels = (nodes / GL_ORDER).max(1);
        let mut space_nodes = Vec::new();
        let mut ln_weights = Vec::new();
        let mut tails = Vec::new();
        if hi.is_finite() {
            let (x, w) = composite_gauss_legendre(lo, hi, panels, GL_ORDER);
            for (x, w) in x.into_iter().zip(w) {
                space_nodes.push(Node { x, ln_x: x.abs().ln() });
                ln_weights.push(w.ln());
            }
        } else {
            let tail = tail_rule::<T>(panels);
            let mut tail_meta = Tail {
                indices: Vec::new(),
                depth: Vec::new(),
                core_depth: tail.core_depth,
                outer_depth: tail.outer_depth,
            };
            for (t, ln_w) in tail.depth.iter().zip(&tail.ln_weights) {
                let x = lo + *t;
                tail_meta.indices.push(space_nodes.len());
                tail_meta.depth.push(*t);
                space_nodes.push(Node { x, ln_x: x.abs().ln() });
                ln_weights.push(*ln_w);
            }
            tails.push(tail_meta);
        }
        Ok(Self {
            kind: SpaceKind::Interval { lo, hi },
            weights: ln_weights.iter().map(|l: &T| l.exp()).collect(),
            nodes: space_nodes,
            ln_weights,
            tails,
            caps: Capabilities {
                finite_total_mass: hi.is_finite(),
                nonatomic_model: true,
                resonant_model: true,
            },
        })
    }

    /// `R^dim` with measure `|x|^σ dx`, pivot radius 1.
    pub fn radial(dim: u32, sigma: T, nodes: usize) -> Result<Self> {
        Self::radial_with_pivot(dim, sigma, T::one(), nodes)
    }

    /// Radial space whose inner and outer branches meet at `pivot`.
    ///
    /// Each branch uses `r = pivot·exp(∓t)` with `t = e^v`, so both the
    /// singularity at the origin and the tail at infinity become
    /// Gamma-type integrals in `t`.
    pub fn radial_with_pivot(dim: u32, sigma: T, pivot: T, nodes: usize) -> Result<Self> {
        let (_, big_omega, _) = radial_constants(dim, sigma)?;
        if !(pivot > T::zero() && pivot.is_finite()) {
            return Err(Error::InvalidSpace(format!("pivot radius {pivot} must be positive")));
        }
        let power = T::from_u32(dim).unwrap() + sigma;
        let panels = (nodes / (2 * GL_ORDER)).max(1);
        let tail = tail_rule::<T>(panels);
        let ln_pivot = pivot.ln();
        let mut space_nodes = Vec::new();
        let mut ln_weights = Vec::new();
        let mut tails = Vec::new();
        for sign in [-T::one(), T::one()] {
            let mut meta = Tail {
                indices: Vec::new(),
                depth: Vec::new(),
                core_depth: tail.core_depth,
                outer_depth: tail.outer_depth,
            };
            for (t, ln_w) in tail.depth.iter().zip(&tail.ln_weights) {
                let ln_r = ln_pivot + sign * *t;
                meta.indices.push(space_nodes.len());
                meta.depth.push(*t);
                space_nodes.push(Node { x: ln_r.exp(), ln_x: ln_r });
                // Ω r^{n-1+σ} dr with dr = r dt
                ln_weights.push(big_omega.ln() + power * ln_r + *ln_w);
            }
            tails.push(meta);
        }
        Ok(Self {
            kind: SpaceKind::Radial { dim, sigma, pivot },
            weights: ln_weights.iter().map(|l: &T| l.exp()).collect(),
            nodes: space_nodes,
            ln_weights,
            tails,
            caps: Capabilities {
                finite_total_mass: false,
                nonatomic_model: true,
                resonant_model: true,
            },
        })
    }

    /// Declares an atomic space to be a discretization of a nonatomic measure.
    pub fn declare_nonatomic(mut self) -> Self {
        self.caps.nonatomic_model = true;
        self.caps.resonant_model = true;
        self
    }

    pub fn kind(&self) -> &SpaceKind<T> {
        &self.kind
    }

    pub fn capabilities(&self) -> Capabilities {
        self.caps
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn ln_weights(&self) -> &[T] {
        &self.ln_weights
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.kind, SpaceKind::Atomic { .. })
    }

    /// `μ(X)`; `+inf` for the unbounded models.
    pub fn total_mass(&self) -> T {
        if self.caps.finite_total_mass {
            self.weights.iter().copied().sum()
        } else {
            T::infinity()
        }
    }

    /// Measure of the node set selected by `mask`.
    pub fn measure(&self, mask: &[bool]) -> T {
        self.weights
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(w, _)| *w)
            .sum()
    }

    /// `ln ∫ |f|^p dμ` with the tail divergence test applied; `+inf` on divergence.
    pub fn ln_moment(&self, values: &[T], p: T) -> Result<T> {
        check_exponent(p)?;
        if values.len() != self.len() {
            return Err(Error::ShapeMismatch { expected: self.len(), got: values.len() });
        }
        let terms: Vec<T> = values
            .iter()
            .zip(&self.ln_weights)
            .map(|(v, lw)| {
                if *v == T::zero() {
                    T::neg_infinity()
                } else {
                    *lw + p * v.abs().ln()
                }
            })
            .collect();
        for tail in &self.tails {
            if tail_diverges(tail, &terms) {
                return Ok(T::infinity());
            }
        }
        Ok(ln_sum_exp(terms.iter().copied()))
    }
}

struct TailRule<T> {
    depth: Vec<T>,
    ln_weights: Vec<T>,
    core_depth: T,
    outer_depth: T,
}

/// Nodes in the depth variable `t ∈ (0, TAIL_DEPTH]`, `t = e^v`.
fn tail_rule<T: Scalar>(panels: usize) -> TailRule<T> {
    let v_lo = TAIL_LN_DEPTH_MIN;
    let v_hi = TAIL_DEPTH.ln();
    let (v, w) = composite_gauss_legendre::<f64>(v_lo, v_hi, panels, GL_ORDER);
    TailRule {
        depth: v.iter().map(|v| T::lit(v.exp())).collect(),
        ln_weights: v.iter().zip(&w).map(|(v, w)| T::lit(v + w.ln())).collect(),
        core_depth: T::lit(TAIL_DEPTH / 8.0),
        outer_depth: T::lit(TAIL_DEPTH / 2.0),
    }
}

/// Divergence test on one improper branch: the full partial sum exceeds
/// `DIVERGENCE_FACTOR` times the core estimate, or the outer half of the
/// depth range carries more than a quarter of the branch total. Both
/// windows are measured from the first node where the function is nonzero.
fn tail_diverges<T: Scalar>(tail: &Tail<T>, terms: &[T]) -> bool {
    let pick = |pred: &dyn Fn(T) -> bool| {
        ln_sum_exp(
            tail.indices
                .iter()
                .zip(&tail.depth)
                .filter(|(_, d)| pred(**d))
                .map(|(i, _)| terms[*i]),
        )
    };
    let all = pick(&|_| true);
    if all == T::neg_infinity() {
        return false;
    }
    if all == T::infinity() {
        return true;
    }
    // windows start where the support of the branch starts
    let start = tail
        .indices
        .iter()
        .zip(&tail.depth)
        .filter(|(i, _)| terms[**i] > T::neg_infinity())
        .map(|(_, d)| *d)
        .fold(T::infinity(), T::min);
    let end = tail.depth.iter().copied().fold(T::zero(), T::max);
    let outer_from = tail.outer_depth.max(start + (end - start) / T::lit(2.0));
    let core = pick(&|d| d <= start + tail.core_depth);
    let outer = pick(&|d| d >= outer_from);
    let growth = all - core > T::lit(DIVERGENCE_FACTOR.ln());
    let share = outer - all > T::lit(0.25f64.ln());
    growth || share
}

fn check_weights<T: Scalar>(weights: &[T]) -> Result<()> {
    for (i, w) in weights.iter().enumerate() {
        if !(*w > T::zero() && w.is_finite()) {
            return Err(Error::InvalidSpace(format!("weight {i} = {w} is not positive and finite")));
        }
    }
    Ok(())
}

fn check_exponent<T: Scalar>(p: T) -> Result<()> {
    if p.is_nan() || p < T::one() || p.is_infinite() {
        return Err(Error::ExponentBelowOne(p.as_f64()));
    }
    Ok(())
}

/// Log-moment evaluator `p ↦ ln |f|_p^p`.
pub type LnMomentFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// A function realized by its values at the nodes of a space.
#[derive(Clone)]
pub struct SampledFunction<T> {
    values: Vec<T>,
    ln_moment: Option<LnMomentFn<T>>,
}

impl<T: std::fmt::Debug> std::fmt::Debug for SampledFunction<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampledFunction")
            .field("values", &self.values)
            .field("analytic", &self.ln_moment.is_some())
            .finish()
    }
}

impl<T: Scalar> SampledFunction<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("sample {i} is not finite")));
        }
        Ok(Self { values, ln_moment: None })
    }

    /// Samples `eval` at every node of `space`.
    pub fn sample<F: Fn(&Node<T>) -> T>(space: &MeasureSpace<T>, eval: F) -> Result<Self> {
        Self::new(space.nodes().iter().map(eval).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self { values: vec![T::zero(); len], ln_moment: None }
    }

    /// Attaches an analytic evaluator of `ln |f|_p^p`.
    pub fn with_ln_moment(mut self, ln_moment: LnMomentFn<T>) -> Self {
        self.ln_moment = Some(ln_moment);
        self
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn has_analytic_moment(&self) -> bool {
        self.ln_moment.is_some()
    }

    /// Analytic `|f|_p^p`, when an evaluator is attached.
    pub fn analytic_moment(&self, p: T) -> Option<T> {
        self.ln_moment.as_ref().map(|m| m(p).exp())
    }

    pub fn analytic_ln_moment(&self, p: T) -> Option<T> {
        self.ln_moment.as_ref().map(|m| m(p))
    }

    /// `|f|_p`, preferring the analytic evaluator over quadrature.
    pub fn norm(&self, p: T, space: &MeasureSpace<T>) -> Result<T> {
        match &self.ln_moment {
            Some(m) => {
                check_exponent(p)?;
                Ok((m(p) / p).exp())
            }
            None => lp_norm(self, p, space),
        }
    }

    /// `ln |f|_p`, preferring the analytic evaluator.
    pub fn ln_norm(&self, p: T, space: &MeasureSpace<T>) -> Result<T> {
        check_exponent(p)?;
        let m = match &self.ln_moment {
            Some(m) => m(p),
            None => space.ln_moment(&self.values, p)?,
        };
        Ok(m / p)
    }

    pub fn scaled(&self, lambda: T) -> Self {
        let ln_moment = self.ln_moment.clone().map(|m| {
            let shift = lambda.abs().ln();
            Arc::new(move |p: T| m(p) + p * shift) as LnMomentFn<T>
        });
        Self {
            values: self.values.iter().map(|v| *v * lambda).collect(),
            ln_moment: if lambda == T::zero() { None } else { ln_moment },
        }
    }

    /// Pointwise sum; analytic evaluators are dropped.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch { expected: self.len(), got: other.len() });
        }
        Self::new(self.values.iter().zip(&other.values).map(|(a, b)| *a + *b).collect())
    }

    /// `f · I(mask)`.
    pub fn restricted(&self, mask: &[bool]) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(mask)
                .map(|(v, &m)| if m { *v } else { T::zero() })
                .collect(),
            ln_moment: None,
        }
    }

    pub fn abs(&self) -> Self {
        Self { values: self.values.iter().map(|v| v.abs()).collect(), ln_moment: self.ln_moment.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == T::zero())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| *v >= T::zero())
    }
}

/// `|f|_p = (∫ |f|^p dμ)^{1/p}` by summation over the nodes of `space`.
///
/// Returns `+inf` when the tail divergence test fires.
pub fn lp_norm<T: Scalar>(f: &SampledFunction<T>, p: T, space: &MeasureSpace<T>) -> Result<T> {
    let ln_m = space.ln_moment(f.values(), p)?;
    Ok((ln_m / p).exp())
}

/// `∫ f g dμ`.
pub fn integral_product<T: Scalar>(f: &SampledFunction<T>, g: &SampledFunction<T>, space: &MeasureSpace<T>) -> Result<T> {
    if f.len() != space.len() || g.len() != space.len() {
        return Err(Error::ShapeMismatch { expected: space.len(), got: f.len().min(g.len()) });
    }
    Ok(f.values()
        .iter()
        .zip(g.values())
        .zip(space.weights())
        .map(|((a, b), w)| *a * *b * *w)
        .sum())
}

/// Conjugate exponent `p/(p-1)`; `+inf ↦ 1` and `1 ↦ +inf` by convention.
pub fn conjugate_exponent<T: Scalar>(p: T) -> Result<T> {
    if p.is_infinite() && p > T::zero() {
        return Ok(T::one());
    }
    if p == T::one() {
        return Ok(T::infinity());
    }
    if p.is_nan() || p < T::one() {
        return Err(Error::InvalidConjugate(p.as_f64()));
    }
    Ok(p / (p - T::one()))
}

/// `(ω(n), Ω(n), R(σ, n))`: volume of the unit ball, its surface area, and
/// the radius with `μ_σ{|x| < R} = 1`.
pub fn radial_constants<T: Scalar>(n: u32, sigma: T) -> Result<(T, T, T)> {
    let nf = T::from_u32(n).ok_or_else(|| Error::Domain("dimension".into()))?;
    if n == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if !(nf + sigma > T::zero()) {
        return Err(Error::Domain(format!("n + σ = {} must be positive", (nf + sigma).as_f64())));
    }
    let half_n = nf / T::lit(2.0);
    let ln_pi = T::PI().ln();
    let omega = (half_n * ln_pi - ln_gamma(half_n + T::one())).exp();
    let big_omega = nf * omega;
    let power = sigma + nf;
    let radius = ((power / big_omega).ln() / power).exp();
    Ok((omega, big_omega, radius))
}

#[derive(Debug, Deserialize)]
struct AtomRow {
    id: String,
    weight: f64,
    value: f64,
}

/// Loads an atomic space and a function on it from CSV with columns
/// `id,weight,value`.
pub fn load_atomic_csv<T: Scalar>(path: &Path) -> Result<(MeasureSpace<T>, SampledFunction<T>)> {
    let mut reader = csv::Reader::from_path(path)?;
    read_atomic(&mut reader)
}

/// Same as [`load_atomic_csv`] from any reader.
pub fn read_atomic_csv<T: Scalar, R: std::io::Read>(source: R) -> Result<(MeasureSpace<T>, SampledFunction<T>)> {
    let mut reader = csv::Reader::from_reader(source);
    read_atomic(&mut reader)
}

fn read_atomic<T: Scalar, R: std::io::Read>(reader: &mut csv::Reader<R>) -> Result<(MeasureSpace<T>, SampledFunction<T>)> {
    let mut ids = Vec::new();
    let mut weights = Vec::new();
    let mut values = Vec::new();
    for row in reader.deserialize() {
        let row: AtomRow = row?;
        ids.push(row.id);
        weights.push(T::lit(row.weight));
        values.push(T::lit(row.value));
    }
    let space = MeasureSpace::atomic_with_ids(ids, weights)?;
    let f = SampledFunction::new(values)?;
    Ok((space, f))
}
