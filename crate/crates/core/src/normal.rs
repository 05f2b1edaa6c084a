//! Standard normal distribution functions at full double precision.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;
use statrs::function::erf::erfc_inv;

/// Standard normal CDF, via `Phi(x) = erfc(-x / sqrt(2)) / 2`.
///
/// The complementary form keeps full relative precision in the lower tail.
pub fn cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Inverse of [`cdf`] on (0, 1).
///
/// Starts from the rational `erfc_inv` approximation and takes one Halley
/// step against [`cdf`], which brings it to full precision.
pub fn inverse_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    let density = pdf(x);
    if density == 0.0 {
        return x;
    }
    let err = (cdf(x) - p) / density;
    x - err / (1.0 + 0.5 * x * err)
}
