//! Fourier-Laplace multipliers of the shifted Funk transform and its relatives.
//!
//! Every operator here acts on a degree-`j` harmonic `Y_j` by sending it to
//! a multiple of the induced harmonic `Ŷ_j`; odd degrees are annihilated.

mod kernel;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use kernel::{Kernel, DEFAULT_RADIAL_ORDER};

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::special::{ln_gamma, ln_pochhammer_signed};

fn even(what: &'static str, j: usize) -> Result<()> {
    if j % 2 == 1 {
        Err(Error::OddDegree { what, j })
    } else {
        Ok(())
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::domain(format!("tau must lie in [0, 1], got {tau}")))
    }
}

fn sign_of_half(j: usize) -> f64 {
    if (j / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `m̂_τ(j) = κ_j / √d_n(j) · R_{j/2}^{(ρ,σ)}(2τ² - 1)`.
pub fn m_hat_tau(geom: &Geometry, j: usize, tau: f64) -> Result<f64> {
    even("m_hat_tau", j)?;
    check_tau(tau)?;
    let r = geom.jacobi().eval_r(j / 2, 2.0 * tau * tau - 1.0);
    Ok(geom.kappa(j)? / (geom.dim(j) as f64).sqrt() * r)
}

/// Multiplier of the Funk-Radon transform (`τ = 0`), closed form.
pub fn funk_multiplier(geom: &Geometry, j: usize) -> Result<f64> {
    even("funk_multiplier", j)?;
    let (n, k, jf) = (geom.n() as f64, geom.k() as f64, j as f64);
    let ln_delta2 = ln_gamma((k + 1.0) / 2.0) + ln_gamma(n / 2.0)
        - ln_gamma((n - k) / 2.0)
        - 0.5 * std::f64::consts::PI.ln();
    let ln_ratio = ln_gamma((jf + n - k) / 2.0) + ln_gamma((jf + 1.0) / 2.0)
        - ln_gamma((jf + n) / 2.0)
        - ln_gamma((jf + k + 1.0) / 2.0);
    Ok(sign_of_half(j) * (0.5 * (ln_delta2 + ln_ratio)).exp())
}

/// Multiplier of the generalized cosine transform with kernel `τ^{α-n+k}`.
///
/// `Γ((j+n-k-α)/2) / Γ((n-k-α)/2)` is taken as a Pochhammer product so the
/// value stays finite (and may vanish) when `(n-k-α)/2` is a pole.
pub fn cosine_multiplier(geom: &Geometry, j: usize, alpha: f64) -> Result<f64> {
    even("cosine_multiplier", j)?;
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("cosine multiplier needs alpha > 0, got {alpha}")));
    }
    let (n, k, jf) = (geom.n() as f64, geom.k() as f64, j as f64);
    let (ln_poch, poch_sign) = ln_pochhammer_signed((n - k - alpha) / 2.0, j / 2);
    if poch_sign == 0.0 {
        return Ok(0.0);
    }
    let ln_front = 0.5 * (geom.c_nk().ln() + ln_gamma(n) - n * 2f64.ln()) + ln_gamma(alpha / 2.0);
    let ln_ratio = 0.5
        * (ln_gamma((jf + k + 1.0) / 2.0) + ln_gamma((jf + 1.0) / 2.0)
            - ln_gamma((jf + n - k) / 2.0)
            - ln_gamma((n + jf) / 2.0));
    let ln_tail = ln_poch - ln_gamma((jf + k + alpha + 1.0) / 2.0);
    Ok(sign_of_half(j) * poch_sign * (ln_front + ln_ratio + ln_tail).exp())
}

/// `â(j) = c_{n,k,j} ∫₀¹ R_{j/2}(2τ² - 1) a(τ) ρ(τ) dτ` by Gauss-Jacobi quadrature.
pub fn kernel_multiplier(geom: &Geometry, j: usize, kernel: &Kernel, order: usize) -> Result<f64> {
    even("kernel_multiplier", j)?;
    let params = geom.jacobi();
    let integral = kernel.radial_integral(geom, |tau| params.eval_r(j / 2, 2.0 * tau * tau - 1.0), order)?;
    Ok(geom.c_nkj(j)? * integral)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Shifted { tau: f64 },
    Funk,
    Kernel { label: String },
    Cosine { alpha: f64 },
}

/// Multipliers on even degrees `0, 2, ..., J`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierTable {
    pub geom: Geometry,
    pub origin: Origin,
    pub values: BTreeMap<usize, f64>,
}

impl MultiplierTable {
    fn build(geom: &Geometry, origin: Origin, j_max: usize, f: impl Fn(usize) -> Result<f64>) -> Result<Self> {
        let values = (0..=j_max).step_by(2).map(|j| Ok((j, f(j)?))).collect::<Result<_>>()?;
        Ok(MultiplierTable { geom: geom.clone(), origin, values })
    }

    pub fn shifted(geom: &Geometry, j_max: usize, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        let g = Geometry::with_cache(geom.n(), geom.k(), j_max)?;
        Self::build(&g, Origin::Shifted { tau }, j_max, |j| m_hat_tau(&g, j, tau))
    }

    pub fn funk(geom: &Geometry, j_max: usize) -> Result<Self> {
        Self::build(geom, Origin::Funk, j_max, |j| funk_multiplier(geom, j))
    }

    pub fn cosine(geom: &Geometry, j_max: usize, alpha: f64) -> Result<Self> {
        Self::build(geom, Origin::Cosine { alpha }, j_max, |j| cosine_multiplier(geom, j, alpha))
    }

    pub fn kernel(geom: &Geometry, j_max: usize, kernel: &Kernel, order: usize) -> Result<Self> {
        let g = Geometry::with_cache(geom.n(), geom.k(), j_max)?;
        Self::build(&g, Origin::Kernel { label: kernel.label().to_string() }, j_max, |j| {
            kernel_multiplier(&g, j, kernel, order)
        })
    }

    /// Value at `j`; odd degrees are zero.
    pub fn get(&self, j: usize) -> Option<f64> {
        if j % 2 == 1 {
            return Some(0.0);
        }
        self.values.get(&j).copied()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "origin": self.origin,
            "geom": self.geom,
            "values": self.values.iter().map(|(j, v)| serde_json::json!([j, v])).collect::<Vec<_>>(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,value\n");
        for (j, v) in &self.values {
            out.push_str(&format!("{j},{v}\n"));
        }
        out
    }
}

/// Largest deviations between closed forms and quadrature for `j <= j_max`.
#[derive(Debug, Clone, Serialize)]
pub struct SelfTest {
    pub j_max: usize,
    pub funk_vs_shifted: f64,
    pub cosine_vs_quadrature: f64,
}

impl SelfTest {
    pub fn passed(&self, tol: f64) -> bool {
        self.funk_vs_shifted <= tol && self.cosine_vs_quadrature <= tol
    }
}

/// Cross-validate the closed forms (Funk and `α = 1` cosine) against
/// `m̂_0` and quadrature of the defining integral.
pub fn self_test(geom: &Geometry, j_max: usize) -> Result<SelfTest> {
    let mut funk_vs_shifted: f64 = 0.0;
    let mut cosine_vs_quadrature: f64 = 0.0;
    let g = Geometry::with_cache(geom.n(), geom.k(), j_max)?;
    let kernel = Kernel::cosine(&g, 1.0);
    for j in (0..=j_max).step_by(2) {
        funk_vs_shifted = funk_vs_shifted.max((funk_multiplier(&g, j)? - m_hat_tau(&g, j, 0.0)?).abs());
        let closed = cosine_multiplier(&g, j, 1.0)?;
        let quad = kernel_multiplier(&g, j, &kernel, DEFAULT_RADIAL_ORDER)?;
        cosine_vs_quadrature = cosine_vs_quadrature.max((closed - quad).abs());
    }
    Ok(SelfTest { j_max, funk_vs_shifted, cosine_vs_quadrature })
}
