//! Gauss-Legendre rules and a log-domain integrator for half-line integrals.

use crate::scalar::{ln_sum_exp, Scalar};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    // Computed in f64 and converted: the Newton iteration needs more
    // precision than f32 offers near the ends of the interval.
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n == 1 {
        nodes[0] = 0.0;
        weights[0] = 2.0;
    }
    (
        nodes.into_iter().map(T::lit).collect(),
        weights.into_iter().map(T::lit).collect(),
    )
}

/// Composite Gauss-Legendre rule on `[lo, hi]` with `panels` equal panels.
pub fn composite_gauss_legendre<T: Scalar>(lo: T, hi: T, panels: usize, order: usize) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre::<T>(order);
    let width = (hi - lo) / T::from_usize_lossy(panels);
    let half = width / T::lit(2.0);
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for k in 0..panels {
        let mid = lo + width * (T::from_usize_lossy(k) + T::lit(0.5));
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + half * *xi);
            weights.push(half * *wi);
        }
    }
    (nodes, weights)
}

/// `ln ∫_0^∞ exp(ln_f(t)) dt` for integrands that are unimodal in `ln t`.
///
/// The integral is taken in `v = ln t` over `v ∈ [-745, 690]`. The window
/// where the integrand is within `e^-60` of its peak is located with a
/// coarse scan and integrated with 16-point Gauss-Legendre panels of
/// width 1/4. Returns `+inf` when the integrand is still non-negligible at
/// either end of the representable range (divergence at 0 or ∞).
pub fn ln_integral_half_line<T: Scalar, F: Fn(T) -> T>(ln_f: F) -> T {
    let v_min = -745.0_f64;
    let v_max = 690.0_f64;
    let step = 0.5_f64;
    let g = |v: f64| -> f64 {
        let t = T::lit(v).exp();
        let val = (ln_f(t) + T::lit(v)).as_f64();
        if val.is_nan() {
            f64::NEG_INFINITY
        } else {
            val
        }
    };
    let n = ((v_max - v_min) / step) as usize + 1;
    let scan: Vec<f64> = (0..n).map(|i| g(v_min + step * i as f64)).collect();
    let peak = scan.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return T::neg_infinity();
    }
    if peak == f64::INFINITY {
        return T::infinity();
    }
    let cutoff = peak - 60.0;
    if scan[0] >= cutoff || scan[n - 1] >= cutoff {
        return T::infinity();
    }
    let first = scan.iter().position(|&s| s > cutoff).unwrap_or(0);
    let last = scan.iter().rposition(|&s| s > cutoff).unwrap_or(n - 1);
    let lo = v_min + step * first.saturating_sub(1) as f64;
    let hi = v_min + step * (last + 1).min(n - 1) as f64;
    let panels = (((hi - lo) / 0.25).ceil() as usize).max(1);
    let (nodes, weights) = composite_gauss_legendre::<f64>(lo, hi, panels, 16);
    let terms = nodes
        .iter()
        .zip(&weights)
        .map(|(&v, &w)| T::lit(g(v) + w.ln()));
    ln_sum_exp(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre::<f64>(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn composite_rule_on_unit_interval() {
        let (x, w) = composite_gauss_legendre(0.0_f64, 1.0, 4, 5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.exp()).sum();
        assert!((s - (1.0_f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn half_line_gamma_integrals() {
        // ∫ t^{k} e^{-ct} dt = Γ(k+1)/c^{k+1}
        for &(k, c) in &[(0.0_f64, 1.0_f64), (2.5, 0.3), (-0.5, 2.0), (7.0, 0.01)] {
            let v = ln_integral_half_line(|t: f64| k * t.ln() - c * t);
            let exact = crate::scalar::ln_gamma(k + 1.0) - (k + 1.0) * c.ln();
            assert!((v - exact).abs() < 1e-10, "k={k} c={c}: {v} vs {exact}");
        }
    }

    #[test]
    fn half_line_detects_divergence() {
        assert_eq!(ln_integral_half_line(|t: f64| 0.01 * t), f64::INFINITY);
        assert_eq!(ln_integral_half_line(|t: f64| -1.5 * t.ln() - t), f64::INFINITY);
    }
}
