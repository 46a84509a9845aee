//! Standard normal distribution function and its inverse.

use crate::error::{Error, Result};
use core::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal CDF.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - cdf(x)`, without cancellation for large `x`.
pub fn survival(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

// Rational approximation coefficients (P. J. Acklam), relative error ~1e-9
// before refinement, kept digit for digit.
#[allow(clippy::excessive_precision)]
const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];
const P_LOW: f64 = 0.02425;

/// Quantile for `u` in `(0, 0.5]`; the result is `<= 0`.
fn lower_quantile(u: f64) -> f64 {
    if u == 0.5 {
        return 0.0;
    }
    let mut x = if u < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(u));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    // Two Halley steps against the erfc-based CDF.
    let sqrt_2pi = libm::sqrt(2.0 * PI);
    for _ in 0..2 {
        let e = cdf(x) - u;
        let t = e * sqrt_2pi * libm::exp(0.5 * x * x);
        x -= t / (1.0 + 0.5 * x * t);
    }
    x
}

/// Inverse of the standard normal CDF.
///
/// Odd symmetric by construction: for `u > 0.5` the value is computed as
/// `-normal_quantile(1 - u)`, and `1 - u` is exact in that range.
pub fn normal_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(alloc::format!(
            "normal quantile needs u in (0, 1), got {u}"
        )));
    }
    if u <= 0.5 {
        Ok(lower_quantile(u))
    } else {
        Ok(-lower_quantile(1.0 - u))
    }
}

/// `Φ⁻¹(1 - tail)` evaluated from the tail probability directly, so small
/// tails keep full relative precision.
pub fn upper_quantile(tail: f64) -> Result<f64> {
    normal_quantile(tail).map(|x| -x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_is_zero() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
    }

    #[test]
    fn rejects_closed_endpoints() {
        for u in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(normal_quantile(u), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn odd_symmetry_is_exact() {
        for u in [1e-10, 0.001, 0.02425, 0.1, 0.3, 0.4999] {
            let lo = normal_quantile(u).unwrap();
            let hi = normal_quantile(1.0 - u).unwrap();
            if 1.0 - (1.0 - u) == u {
                assert_eq!(lo, -hi, "u = {u}");
            }
        }
    }
}
