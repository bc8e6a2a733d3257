//! The dimension pair `(n, k)` and every scalar constant derived from it.
//!
//! `S^n ⊂ R^{n+1}` is split as `R^{k+1} × R^{n-k}`; a point is written
//! `x = η sin θ + ζ cos θ` with `η ∈ S^k`, `ζ ∈ S^{n-k-1}`. The radial weight
//! of that split is `(1 - τ²)^{(k-1)/2} τ^{n-k-1}` on `[0, 1]`, which after
//! `s = 2τ² - 1` becomes the Jacobi weight with indices `(rho, sigma)`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;
use crate::special::{gamma, ln_gamma, ln_sphere_area, pochhammer, sphere_area};

/// Degrees for which `kappa_j` is precomputed unless the caller asks for more.
pub const DEFAULT_CACHE_DEGREE: usize = 64;

#[derive(Debug, Clone)]
pub struct Geometry {
    n: usize,
    k: usize,
    rho: f64,
    sigma: f64,
    c_nk: f64,
    // kappa_j for even j, indexed by j / 2
    kappa: Vec<f64>,
}

impl Geometry {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        Self::with_cache(n, k, DEFAULT_CACHE_DEGREE)
    }

    /// Builds the geometry and caches `kappa_j` for every even `j <= j_max`.
    pub fn with_cache(n: usize, k: usize, j_max: usize) -> Result<Self> {
        if n < 2 || k < 1 || k > n - 1 {
            return Err(Error::InvalidGeometry { n, k });
        }
        let rho = (k as f64 - 1.0) / 2.0;
        let sigma = (n - k) as f64 / 2.0 - 1.0;
        let c_nk = (ln_sphere_area(n - k - 1) + ln_sphere_area(k) - ln_sphere_area(n)).exp();
        let mut geom = Geometry { n, k, rho, sigma, c_nk, kappa: Vec::new() };
        geom.kappa = (0..=j_max / 2).map(|h| geom.kappa_uncached(2 * h)).collect();
        Ok(geom)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `(k - 1) / 2`
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `(n - k) / 2 - 1`
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Jacobi indices `(rho, sigma)` of the radial weight in `s = 2τ² - 1`.
    pub fn jacobi(&self) -> JacobiParams {
        JacobiParams::new(self.rho, self.sigma).expect("rho, sigma > -1 for admissible (n, k)")
    }

    /// Jacobi indices in the swapped order `(sigma, rho)`, the family whose
    /// zeros in `cos 2t` mark the non-injective shifts.
    pub fn shift_jacobi(&self) -> JacobiParams {
        self.jacobi().swapped()
    }

    pub fn sphere_area(&self, m: usize) -> f64 {
        sphere_area(m)
    }

    /// `σ_{n-k-1} σ_k / σ_n`.
    pub fn c_nk(&self) -> f64 {
        self.c_nk
    }

    /// Radial weight `(1 - τ²)^{(k-1)/2} τ^{n-k-1}`.
    pub fn radial_weight(&self, tau: f64) -> f64 {
        (1.0 - tau * tau).powf(self.rho) * tau.powi((self.n - self.k - 1) as i32)
    }

    pub fn dim(&self, j: usize) -> u64 {
        dim_harmonics(self.n, j)
    }

    pub fn kappa(&self, j: usize) -> Result<f64> {
        if j % 2 == 1 {
            return Err(Error::OddDegree { what: "kappa_j", j });
        }
        Ok(self.kappa.get(j / 2).copied().unwrap_or_else(|| self.kappa_uncached(j)))
    }

    /// `alpha_j = kappa_j sqrt(d_n(j))`.
    pub fn alpha(&self, j: usize) -> Result<f64> {
        Ok(self.kappa(j)? * (self.dim(j) as f64).sqrt())
    }

    /// `c_{n,k,j} = kappa_j c_{n,k} / sqrt(d_n(j))`.
    pub fn c_nkj(&self, j: usize) -> Result<f64> {
        Ok(self.kappa(j)? * self.c_nk / (self.dim(j) as f64).sqrt())
    }

    fn kappa_uncached(&self, j: usize) -> f64 {
        if j == 0 {
            return 1.0;
        }
        let (n, k, j) = (self.n as f64, self.k as f64, j as f64);
        let ln_sq = ln_sphere_area(self.n) + (2.0 * j + n - 1.0).ln()
            + ln_gamma((j + k + 1.0) / 2.0)
            + ln_gamma((j + n - 1.0) / 2.0)
            - ln_sphere_area(self.n - self.k - 1)
            - ln_sphere_area(self.k)
            - 2.0 * ln_gamma((k + 1.0) / 2.0)
            - ln_gamma(j / 2.0 + 1.0)
            - ln_gamma((j + n - k) / 2.0);
        (0.5 * ln_sq).exp()
    }
}

impl PartialEq for Geometry {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.k == other.k
    }
}

#[derive(Serialize, Deserialize)]
struct GeometryRepr {
    n: usize,
    k: usize,
    #[serde(default)]
    rho: Option<f64>,
    #[serde(default)]
    sigma: Option<f64>,
}

impl Serialize for Geometry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GeometryRepr { n: self.n, k: self.k, rho: Some(self.rho), sigma: Some(self.sigma) }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Geometry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GeometryRepr::deserialize(d)?;
        Geometry::new(repr.n, repr.k).map_err(serde::de::Error::custom)
    }
}

/// Dimension `d_m(j)` of the space of degree-`j` spherical harmonics on `S^m`.
///
/// For `m >= 2` this is `(m + 2j - 1) Γ(m + j - 1) / (Γ(j + 1) Γ(m))`,
/// evaluated as an exact integer product. `S^1` has 1 harmonic of degree 0
/// and 2 of every positive degree; `S^0 = {±1}` has the constant and the
/// sign function, and nothing of degree 2 or more.
pub fn dim_harmonics(m: usize, j: usize) -> u64 {
    match m {
        0 => u64::from(j <= 1),
        1 => {
            if j == 0 {
                1
            } else {
                2
            }
        }
        _ => {
            // (m + 2j - 1) (j + 1)(j + 2)...(j + m - 2) / (m - 1)!
            let mut num: u128 = (m + 2 * j - 1) as u128;
            for i in 1..=(m - 2) {
                num *= (j + i) as u128;
            }
            let den: u128 = (1..m as u128).product();
            (num / den) as u64
        }
    }
}

/// The Gamma quotient behind [`dim_harmonics`] in floating point, for
/// auditing that it really is an integer.
pub fn dim_harmonics_gamma(m: usize, j: usize) -> f64 {
    assert!(m >= 2, "the Gamma quotient is only meaningful for m >= 2");
    // Γ(m+j-1)/Γ(j+1) = (j+1)_{m-2} by the functional equation.
    let (mf, jf) = (m as f64, j as f64);
    (mf + 2.0 * jf - 1.0) * pochhammer(jf + 1.0, m - 2) / gamma(mf)
}

/// A geodesic shift `t ∈ [0, π/2)` with its companions `θ = π/2 - t` and
/// `τ = cos θ = sin t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftParam {
    pub t: f64,
    pub theta: f64,
    pub tau: f64,
}

impl ShiftParam {
    pub fn from_t(t: f64) -> Result<Self> {
        if !(0.0..FRAC_PI_2).contains(&t) {
            return Err(Error::domain(format!("shift t = {t} must lie in [0, pi/2)")));
        }
        Ok(ShiftParam { t, theta: FRAC_PI_2 - t, tau: t.sin() })
    }

    /// `cos 2t = 1 - 2τ²`.
    pub fn cos_2t(&self) -> f64 {
        (2.0 * self.t).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn admissible() -> impl Iterator<Item = (usize, usize)> {
        (2..=5).flat_map(|n| (1..n).map(move |k| (n, k)))
    }

    #[test]
    fn rejects_bad_pairs() {
        assert!(Geometry::new(1, 1).is_err());
        assert!(Geometry::new(3, 0).is_err());
        assert!(Geometry::new(3, 3).is_err());
        assert!(Geometry::new(3, 2).is_ok());
    }

    #[test]
    fn dims_of_small_spheres() {
        for j in 0..10 {
            assert_eq!(dim_harmonics(2, j), 2 * j as u64 + 1);
            assert_eq!(dim_harmonics(3, j), (j as u64 + 1).pow(2));
        }
        assert_eq!(dim_harmonics(1, 0), 1);
        assert_eq!(dim_harmonics(1, 5), 2);
        assert_eq!(dim_harmonics(0, 1), 1);
        assert_eq!(dim_harmonics(0, 2), 0);
        for m in 2..7 {
            assert_eq!(dim_harmonics(m, 0), 1);
        }
    }

    // d_m(j) counts harmonic polynomials: dim P_j - dim P_{j-2} in m + 1 variables.
    #[test]
    fn dims_match_polynomial_count() {
        fn binom(n: u64, r: u64) -> u64 {
            (0..r).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
        }
        for m in 2..7u64 {
            for j in 0..20u64 {
                let polys = |d: u64| binom(d + m, m);
                let expected = polys(j) - if j >= 2 { polys(j - 2) } else { 0 };
                assert_eq!(dim_harmonics(m as usize, j as usize), expected, "m={m} j={j}");
            }
        }
    }

    #[test]
    fn gamma_quotient_is_integral() {
        for m in 2..=6 {
            for j in 0..=64 {
                let q = dim_harmonics_gamma(m, j);
                assert!((q - q.round()).abs() <= 1e-9, "m={m} j={j} q={q}");
                assert_eq!(q.round() as u64, dim_harmonics(m, j));
            }
        }
    }

    #[test]
    fn kappa_and_alpha_at_degree_zero() {
        for (n, k) in admissible() {
            let g = Geometry::new(n, k).unwrap();
            assert!((g.kappa(0).unwrap() - 1.0).abs() < 1e-12, "({n},{k})");
            assert!((g.alpha(0).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kappa_squared_is_dimension_for_hyperplane_case() {
        for n in 2..=5 {
            let g = Geometry::new(n, n - 1).unwrap();
            for j in (0..=40).step_by(2) {
                let kappa = g.kappa(j).unwrap();
                let d = g.dim(j) as f64;
                assert!((kappa * kappa - d).abs() < 1e-10 * d, "n={n} j={j}");
                assert!((g.alpha(j).unwrap() - d).abs() < 1e-10 * d);
            }
        }
    }

    // Independent route: kappa_M for r = s = 0 written with Jacobi indices,
    // Gamma functions evaluated directly.
    #[test]
    fn kappa_matches_direct_gamma_evaluation() {
        for (n, k) in admissible() {
            let g = Geometry::new(n, k).unwrap();
            let (rho, sigma) = (g.rho(), g.sigma());
            for j in (0..=20).step_by(2) {
                let m = (j / 2) as f64;
                let direct = 2.0 * sphere_area(n) * (2.0 * m + rho + sigma + 1.0)
                    * gamma(m + rho + 1.0)
                    * gamma(m + rho + sigma + 1.0)
                    / (sphere_area(n - k - 1)
                        * sphere_area(k)
                        * gamma(m + 1.0)
                        * gamma(m + sigma + 1.0)
                        * gamma(rho + 1.0).powi(2));
                let kappa = g.kappa(j).unwrap();
                assert!((kappa - direct.sqrt()).abs() < 1e-12 * kappa, "({n},{k}) j={j}");
            }
        }
        // (n, k, j) = (3, 1, 2): 6 sigma_3 / sigma_1^2 = 6 (2 pi^2) / (2 pi)^2 = 3
        let g = Geometry::new(3, 1).unwrap();
        assert!((g.kappa(2).unwrap() - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn kappa_finite_for_high_degree() {
        for (n, k) in admissible() {
            let g = Geometry::with_cache(n, k, 16).unwrap();
            for j in (0..=256).step_by(2) {
                let kappa = g.kappa(j).unwrap();
                assert!(kappa.is_finite() && kappa > 0.0);
            }
        }
    }

    #[test]
    fn odd_degree_rejected() {
        let g = Geometry::new(3, 1).unwrap();
        assert!(matches!(g.kappa(3), Err(Error::OddDegree { .. })));
        assert!(g.alpha(1).is_err());
    }

    #[test]
    fn shift_param_relations() {
        let s = ShiftParam::from_t(0.4).unwrap();
        assert_eq!(s.tau, 0.4f64.sin());
        assert!((2.0 * s.tau * s.tau - 1.0 + s.cos_2t()).abs() < 1e-15);
        assert!(ShiftParam::from_t(FRAC_PI_2).is_err());
        assert!(ShiftParam::from_t(-0.1).is_err());
    }

    #[test]
    fn json_shape() {
        let g = Geometry::new(4, 2).unwrap();
        let v = serde_json::to_value(&g).unwrap();
        assert_eq!(v["n"], 4);
        assert_eq!(v["k"], 2);
        assert_eq!(v["rho"], 0.5);
        assert_eq!(v["sigma"], 0.0);
        let back: Geometry = serde_json::from_value(v).unwrap();
        assert_eq!(back, g);
    }
}
