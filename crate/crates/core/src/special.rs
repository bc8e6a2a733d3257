//! Gamma-function helpers.
//!
//! Every Gamma quotient in the crate goes through [`ln_gamma`] and is
//! exponentiated last; direct evaluation overflows for degrees in the
//! low hundreds.

use std::f64::consts::PI;

/// `ln |Γ(x)|` together with the sign of `Γ(x)`.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    let (value, sign) = libm::lgamma_r(x);
    (value, if sign < 0 { -1.0 } else { 1.0 })
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma called with non-positive argument {x}");
    libm::lgamma(x)
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `1/Γ(x)`, finite everywhere (zero at the poles).
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    let (lg, sign) = ln_gamma_signed(x);
    sign * (-lg).exp()
}

/// Pochhammer symbol `(a)_m = a (a + 1) ... (a + m - 1)`.
///
/// Evaluated as a finite product so it stays exact across poles of the
/// equivalent Gamma ratio `Γ(a + m) / Γ(a)`.
pub fn pochhammer(a: f64, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (a + i as f64))
}

/// Signed `ln |(a)_m|`, for products too long to multiply out.
pub fn ln_pochhammer_signed(a: f64, m: usize) -> (f64, f64) {
    let mut ln = 0.0;
    let mut sign = 1.0;
    for i in 0..m {
        let factor = a + i as f64;
        if factor == 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        if factor < 0.0 {
            sign = -sign;
        }
        ln += factor.abs().ln();
    }
    (ln, sign)
}

/// Area of the unit sphere `S^m ⊂ R^{m+1}`: `2 π^{(m+1)/2} / Γ((m+1)/2)`.
///
/// `m = 0` gives 2, the counting measure of `{-1, +1}`.
pub fn sphere_area(m: usize) -> f64 {
    let h = (m as f64 + 1.0) / 2.0;
    (2.0f64.ln() + h * PI.ln() - ln_gamma(h)).exp()
}

pub fn ln_sphere_area(m: usize) -> f64 {
    let h = (m as f64 + 1.0) / 2.0;
    2.0f64.ln() + h * PI.ln() - ln_gamma(h)
}
