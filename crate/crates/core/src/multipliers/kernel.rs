use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::jacobi::{gauss_jacobi, JacobiParams};

/// Default Gauss-Jacobi order for radial integrals.
pub const DEFAULT_RADIAL_ORDER: usize = 64;

/// Radial kernel `a(τ) = τ^p (1-τ²)^q h(τ)` on `[0, 1]` with `h` smooth.
///
/// The singular powers are absorbed into the Gauss-Jacobi weight, so only
/// `h` is sampled at the nodes.
#[derive(Clone)]
pub struct Kernel {
    label: String,
    tau_power: f64,
    one_minus_tau2_power: f64,
    smooth: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("label", &self.label)
            .field("tau_power", &self.tau_power)
            .field("one_minus_tau2_power", &self.one_minus_tau2_power)
            .finish()
    }
}

impl Kernel {
    pub fn new(
        label: impl Into<String>,
        tau_power: f64,
        one_minus_tau2_power: f64,
        smooth: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Kernel { label: label.into(), tau_power, one_minus_tau2_power, smooth: Arc::new(smooth) }
    }

    pub fn from_fn(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(label, 0.0, 0.0, f)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), 0.0, 0.0, move |_| c)
    }

    /// `a(τ) = τ^p`.
    pub fn power(p: f64) -> Self {
        Self::new(format!("tau^{p}"), p, 0.0, |_| 1.0)
    }

    /// The generalized cosine kernel `τ^{α-n+k}`.
    pub fn cosine(geom: &Geometry, alpha: f64) -> Self {
        let p = alpha - geom.n() as f64 + geom.k() as f64;
        Self::new(format!("cosine(alpha={alpha})"), p, 0.0, |_| 1.0)
    }

    /// `a(τ) = R_{i/2}^{(ρ,σ)}(2τ² - 1)` for even `i`.
    pub fn jacobi(geom: &Geometry, i: usize) -> Result<Self> {
        if i % 2 == 1 {
            return Err(Error::OddDegree { what: "Jacobi kernel", j: i });
        }
        let params = geom.jacobi();
        Ok(Self::new(format!("R_{}(2tau^2-1)", i / 2), 0.0, 0.0, move |tau| {
            params.eval_r(i / 2, 2.0 * tau * tau - 1.0)
        }))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn tau_power(&self) -> f64 {
        self.tau_power
    }

    pub fn one_minus_tau2_power(&self) -> f64 {
        self.one_minus_tau2_power
    }

    pub fn eval(&self, tau: f64) -> f64 {
        let mut v = (self.smooth)(tau);
        if self.tau_power != 0.0 {
            v *= tau.powf(self.tau_power);
        }
        if self.one_minus_tau2_power != 0.0 {
            v *= (1.0 - tau * tau).powf(self.one_minus_tau2_power);
        }
        v
    }

    pub fn smooth(&self, tau: f64) -> f64 {
        (self.smooth)(tau)
    }

    /// Jacobi parameters of `a(τ) ρ(τ) dτ` after `s = 2τ² - 1`.
    fn weight_params(&self, geom: &Geometry) -> (f64, f64) {
        (geom.rho() + self.one_minus_tau2_power, geom.sigma() + self.tau_power / 2.0)
    }

    pub fn is_integrable(&self, geom: &Geometry) -> bool {
        let (a, b) = self.weight_params(geom);
        a > -1.0 && b > -1.0
    }

    /// Nodes `τ_i` and weights `w_i` with `Σ w_i g(τ_i) ≈ ∫₀¹ a(τ) g(τ) ρ(τ) dτ`,
    /// where `ρ(τ) = τ^{n-k-1} (1-τ²)^{(k-1)/2}`.
    ///
    /// `dτ = ds / (4τ)` turns `ρ(τ) dτ` into `2^{-ρ-σ-2} (1-s)^ρ (1+s)^σ ds`,
    /// and the kernel's own powers shift both exponents.
    pub fn radial_rule(&self, geom: &Geometry, order: usize) -> Result<Vec<(f64, f64)>> {
        let (a, b) = self.weight_params(geom);
        if !(a > -1.0 && b > -1.0) {
            return Err(Error::KernelNotIntegrable {
                reason: format!(
                    "exponents ({a}, {b}) of (1-s), (1+s) after s = 2tau^2-1 must exceed -1 (kernel {})",
                    self.label
                ),
                estimate: self.truncated_estimate(geom, &|_| 1.0),
            });
        }
        let rule = gauss_jacobi(JacobiParams::new(a, b)?, order)?;
        let scale = (-(a + b + 2.0) * 2f64.ln()).exp();
        Ok(rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&s, &w)| {
                let tau = ((1.0 + s) / 2.0).sqrt();
                (tau, scale * w * self.smooth(tau))
            })
            .collect())
    }

    /// `∫₀¹ a(τ) g(τ) ρ(τ) dτ`.
    pub fn radial_integral(&self, geom: &Geometry, g: impl Fn(f64) -> f64, order: usize) -> Result<f64> {
        match self.radial_rule(geom, order) {
            Ok(rule) => Ok(rule.iter().map(|(tau, w)| w * g(*tau)).sum()),
            Err(Error::KernelNotIntegrable { reason, .. }) => {
                Err(Error::KernelNotIntegrable { reason, estimate: self.truncated_estimate(geom, &g) })
            }
            Err(e) => Err(e),
        }
    }

    // ∫ over [ε, 1-ε] with ε = 1e-6 by composite Gauss-Legendre on a log-graded mesh.
    fn truncated_estimate(&self, geom: &Geometry, g: &dyn Fn(f64) -> f64) -> f64 {
        let Ok(rule) = gauss_jacobi(JacobiParams { rho: 0.0, sigma: 0.0 }, 16) else {
            return f64::NAN;
        };
        let eps: f64 = 1e-6;
        let mut breaks = vec![eps];
        let mut x = eps;
        while x < 0.5 {
            x *= 2.0;
            breaks.push(x.min(0.5));
        }
        let mut y = 0.5f64;
        while 1.0 - y > eps {
            y = 1.0 - (1.0 - y) / 2.0;
            breaks.push(y.min(1.0 - eps));
        }
        breaks
            .windows(2)
            .map(|w| {
                let (lo, hi) = (w[0], w[1]);
                let half = (hi - lo) / 2.0;
                half * rule.integrate(|u| {
                    let tau = lo + half * (u + 1.0);
                    self.eval(tau) * g(tau) * geom.radial_weight(tau)
                })
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_integrates_to_inverse_c_nk() {
        for n in 2..=5 {
            for k in 1..n {
                let g = Geometry::new(n, k).unwrap();
                let v = Kernel::constant(1.0).radial_integral(&g, |_| 1.0, 8).unwrap();
                assert!((g.c_nk() * v - 1.0).abs() < 1e-12, "({n},{k})");
            }
        }
    }

    #[test]
    fn singular_power_is_absorbed() {
        // ∫₀¹ τ^{-1/2} · τ (1-τ²)^0 dτ on (3,1): ρ(τ) = τ.
        let g = Geometry::new(3, 1).unwrap();
        let v = Kernel::power(-0.5).radial_integral(&g, |_| 1.0, 4).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn non_integrable_kernel_is_reported() {
        let g = Geometry::new(2, 1).unwrap();
        match Kernel::power(-2.0).radial_integral(&g, |_| 1.0, 8) {
            Err(Error::KernelNotIntegrable { estimate, .. }) => assert!(estimate > 1e3),
            other => panic!("expected integrability failure, got {other:?}"),
        }
    }
}
