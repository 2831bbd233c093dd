//! Standard normal helpers.
//!
//! Tail-accurate forms are used throughout: `upper_tail(x)` is computed from
//! `erfc` directly so that p-values around 1e-20 keep full relative precision.
//! Quantiles start from an `erfc_inv` approximation and are polished with
//! Newton steps against `erfc`.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Φ(x)
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Φ̄(x) = 1 − Φ(x)
pub fn upper_tail(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

pub fn pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Φ⁻¹(p); ±∞ at the endpoints.
pub fn quantile(p: f64) -> f64 {
    -upper_quantile(p)
}

/// Upper quantile Φ̄⁻¹(p), i.e. z_p with Φ̄(z_p) = p.
pub fn upper_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::INFINITY;
    }
    if p >= 1.0 {
        return f64::NEG_INFINITY;
    }
    if p > 0.5 {
        return -upper_quantile(1.0 - p);
    }
    let mut z = SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..3 {
        let density = pdf(z);
        if density == 0.0 {
            break;
        }
        z += (upper_tail(z) - p) / density;
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_quantiles() {
        assert!((upper_quantile(0.025) - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((upper_quantile(0.05) - 1.644_853_626_951_472_2).abs() < 1e-12);
        assert_eq!(upper_quantile(0.5), 0.0);
        assert!((quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-12);
    }

    #[test]
    fn quantile_inverts_cdf_in_the_tails() {
        for &p in &[1e-300, 1e-20, 1e-8, 0.001, 0.3, 0.5, 0.7, 0.999] {
            let z = upper_quantile(p);
            assert!(((upper_tail(z) - p) / p).abs() < 1e-12, "p = {p} rel {}", (upper_tail(z) - p) / p);
        }
    }

    #[test]
    fn pdf_integrates_against_cdf() {
        // Simpson on [-1, 2]
        let n = 2000;
        let (lo, hi) = (-1.0, 2.0);
        let h = (hi - lo) / n as f64;
        let mut s = pdf(lo) + pdf(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * pdf(lo + i as f64 * h);
        }
        let integral = s * h / 3.0;
        assert!((integral - (cdf(hi) - cdf(lo))).abs() < 1e-12, "{}", integral - (cdf(hi) - cdf(lo)));
    }
}
