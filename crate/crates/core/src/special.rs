//! Scalar normal-distribution helpers.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// Standard normal CDF, accurate in both tails.
pub fn norm_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * erfc(-x * FRAC_1_SQRT_2)
    }
}

/// P(a < Z < b) for a standard normal Z, computed on the side with less cancellation.
pub fn norm_interval(a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    if a > 0.0 {
        (norm_cdf(-a) - norm_cdf(-b)).max(0.0)
    } else {
        (norm_cdf(b) - norm_cdf(a)).max(0.0)
    }
}

/// Mills ratio Φ(-t)/φ(t) for large positive t by continued fraction.
fn mills_ratio_cf(t: f64) -> f64 {
    let mut f = t;
    for k in (1..=60).rev() {
        f = t + k as f64 / f;
    }
    1.0 / f
}

pub fn log_norm_cdf(x: f64) -> f64 {
    if x < -30.0 {
        -0.5 * x * x - LN_SQRT_2PI + mills_ratio_cf(-x).ln()
    } else if x > 5.0 {
        // ln(1 - q) with q tiny
        (-norm_cdf(-x)).ln_1p()
    } else {
        norm_cdf(x).ln()
    }
}

/// Inverse Mills ratio ζ(x) = φ(x)/Φ(x).
pub fn zeta(x: f64) -> f64 {
    if x == f64::INFINITY {
        0.0
    } else if x < -30.0 {
        1.0 / mills_ratio_cf(-x)
    } else {
        norm_pdf(x) / norm_cdf(x)
    }
}

pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        let x = -SQRT_2 * erfc_inv(2.0 * p);
        // one Halley step against the accurate CDF
        let e = norm_cdf(x) - p;
        let u = e / norm_pdf(x);
        x - u / (1.0 + 0.5 * x * u)
    }
}

/// N(0, var) density at x.
pub fn norm_pdf_var(x: f64, var: f64) -> f64 {
    (-0.5 * x * x / var).exp() / (2.0 * PI * var).sqrt()
}

/// log(exp(a) + exp(b) + ...) without overflow.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cdf_reference_values() {
        assert_relative_eq!(norm_cdf(0.0), 0.5, epsilon = 1e-16);
        assert_relative_eq!(norm_cdf(1.96), 0.975_002_104_851_780, epsilon = 1e-14);
        assert_relative_eq!(norm_cdf(-5.0), 2.866_515_718_791_939e-7, max_relative = 1e-12);
    }

    #[test]
    fn log_cdf_is_continuous_at_switch() {
        let left = log_norm_cdf(-30.0 - 1e-9);
        let right = log_norm_cdf(-30.0 + 1e-9);
        assert!((left - right).abs() < 1e-6);
        assert!(log_norm_cdf(-1e3).is_finite());
    }

    #[test]
    fn zeta_asymptote() {
        // ζ(x) ≈ -x for very negative x
        assert_relative_eq!(zeta(-200.0), 200.005, max_relative = 1e-5);
        assert_relative_eq!(zeta(0.0), 2.0 * norm_pdf(0.0), epsilon = 1e-15);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-10, 0.01, 0.3, 0.5, 0.9, 0.999] {
            assert_relative_eq!(norm_cdf(norm_quantile(p)), p, max_relative = 1e-13);
        }
    }
}
