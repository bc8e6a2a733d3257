//! Jacobi polynomials `P_m^{(ρ,σ)}` for the weight `(1 - t)^ρ (1 + t)^σ`,
//! their value-at-one normalization `R_m = P_m / P_m(1)`, Gauss-Jacobi
//! quadrature and polynomial roots.
//!
//! Roots and nodes come from the symmetric tridiagonal Jacobi matrix
//! (Golub-Welsch), so none are ever missed; each is then polished by Newton
//! steps on the three-term recurrence.

use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::ln_gamma;

/// Residual tolerance on `|R_m(root)|` below which a root counts as certified.
pub const DEFAULT_ROOT_RESIDUAL_TOL: f64 = 1e-10;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;
const NEWTON_STEPS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobiParams {
    pub rho: f64,
    pub sigma: f64,
}

impl JacobiParams {
    pub fn new(rho: f64, sigma: f64) -> Result<Self> {
        if !(rho > -1.0 && sigma > -1.0 && rho.is_finite() && sigma.is_finite()) {
            return Err(Error::JacobiParams { rho, sigma });
        }
        Ok(JacobiParams { rho, sigma })
    }

    pub fn swapped(self) -> Self {
        JacobiParams { rho: self.sigma, sigma: self.rho }
    }

    /// `∫_{-1}^{1} (1 - t)^ρ (1 + t)^σ dt = 2^{ρ+σ+1} Γ(ρ+1) Γ(σ+1) / Γ(ρ+σ+2)`.
    pub fn total_mass(&self) -> f64 {
        let (a, b) = (self.rho, self.sigma);
        ((a + b + 1.0) * 2f64.ln() + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0))
            .exp()
    }

    pub fn weight(&self, t: f64) -> f64 {
        (1.0 - t).powf(self.rho) * (1.0 + t).powf(self.sigma)
    }

    /// `P_m(1) = Γ(m + ρ + 1) / (m! Γ(ρ + 1))`.
    pub fn p_at_one(&self, m: usize) -> f64 {
        let mf = m as f64;
        (ln_gamma(mf + self.rho + 1.0) - ln_gamma(mf + 1.0) - ln_gamma(self.rho + 1.0)).exp()
    }

    /// `P_m^{(ρ,σ)}(x)` by the forward three-term recurrence.
    pub fn eval_p(&self, m: usize, x: f64) -> f64 {
        let (mut prev, mut cur) = (0.0, 1.0);
        for d in 1..=m {
            (prev, cur) = (cur, self.step(d, x, cur, prev));
        }
        cur
    }

    /// `P_d` from `P_{d-1}` and `P_{d-2}` (the latter unused for `d = 1`).
    #[inline]
    fn step(&self, d: usize, x: f64, p1: f64, p2: f64) -> f64 {
        let (a, b) = (self.rho, self.sigma);
        if d == 1 {
            return 0.5 * (a - b) + 0.5 * (a + b + 2.0) * x;
        }
        let n = d as f64;
        let s = 2.0 * n + a + b;
        let c0 = 2.0 * n * (n + a + b) * (s - 2.0);
        let c1 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c2 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * s;
        (c1 * p1 - c2 * p2) / c0
    }

    /// `[P_0(x), ..., P_m(x)]`.
    pub fn eval_p_upto(&self, m: usize, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; m + 1];
        self.eval_p_into(x, &mut out);
        out
    }

    /// `out[d] = P_d(x)` for every `d < out.len()`.
    pub fn eval_p_into(&self, x: f64, out: &mut [f64]) {
        for d in 0..out.len() {
            out[d] = match d {
                0 => 1.0,
                1 => self.step(1, x, 1.0, 0.0),
                _ => self.step(d, x, out[d - 1], out[d - 2]),
            };
        }
    }

    /// `R_m(x) = P_m(x) / P_m(1)`; exactly 1 at `x = 1`.
    pub fn eval_r(&self, m: usize, x: f64) -> f64 {
        if x == 1.0 {
            return 1.0;
        }
        let (mut prev, mut cur, mut at_one) = (0.0, 1.0, 1.0);
        for d in 1..=m {
            (prev, cur) = (cur, self.step(d, x, cur, prev));
            at_one *= (d as f64 + self.rho) / d as f64;
        }
        cur / at_one
    }

    /// `[R_0(x), ..., R_m(x)]`.
    pub fn eval_r_upto(&self, m: usize, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; m + 1];
        self.eval_r_into(x, &mut out);
        out
    }

    /// `out[d] = R_d(x)` for every `d < out.len()`.
    pub fn eval_r_into(&self, x: f64, out: &mut [f64]) {
        if x == 1.0 {
            out.iter_mut().for_each(|v| *v = 1.0);
            return;
        }
        self.eval_p_into(x, out);
        // P_d(1) = P_{d-1}(1) (d + ρ) / d
        let mut at_one = 1.0;
        for (d, v) in out.iter_mut().enumerate().skip(1) {
            at_one *= (d as f64 + self.rho) / d as f64;
            *v /= at_one;
        }
    }

    /// `P_m'(x) = (m + ρ + σ + 1)/2 · P_{m-1}^{(ρ+1, σ+1)}(x)`.
    pub fn eval_p_derivative(&self, m: usize, x: f64) -> f64 {
        if m == 0 {
            return 0.0;
        }
        let shifted = JacobiParams { rho: self.rho + 1.0, sigma: self.sigma + 1.0 };
        0.5 * (m as f64 + self.rho + self.sigma + 1.0) * shifted.eval_p(m - 1, x)
    }

    /// Closed-form `∫ R_m² (1 - t)^ρ (1 + t)^σ dt`.
    pub fn norm2_r(&self, m: usize) -> f64 {
        let (a, b, mf) = (self.rho, self.sigma, m as f64);
        if m == 0 {
            return self.total_mass();
        }
        let ln = (a + b + 1.0) * 2f64.ln() + ln_gamma(mf + 1.0) + 2.0 * ln_gamma(a + 1.0)
            + ln_gamma(mf + b + 1.0)
            - (2.0 * mf + a + b + 1.0).ln()
            - ln_gamma(mf + a + 1.0)
            - ln_gamma(mf + a + b + 1.0);
        ln.exp()
    }

    /// Symmetric tridiagonal matrix whose eigenvalues are the zeros of `P_order`.
    fn jacobi_matrix(&self, order: usize) -> DMatrix<f64> {
        let (a, b) = (self.rho, self.sigma);
        let mut mat = DMatrix::zeros(order, order);
        for i in 0..order {
            let s = 2.0 * i as f64 + a + b;
            mat[(i, i)] = if i == 0 { (b - a) / (a + b + 2.0) } else { (b * b - a * a) / (s * (s + 2.0)) };
        }
        for i in 1..order {
            let fi = i as f64;
            let s = 2.0 * fi + a + b;
            let sq = if i == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
            } else {
                4.0 * fi * (fi + a) * (fi + b) * (fi + a + b) / (s * s * (s + 1.0) * (s - 1.0))
            };
            let off = sq.sqrt();
            mat[(i - 1, i)] = off;
            mat[(i, i - 1)] = off;
        }
        mat
    }

    /// Zeros of `P_order`, ascending, Newton-polished.
    fn polished_zeros(&self, order: usize) -> Result<Vec<f64>> {
        let eigen = SymmetricEigen::try_new(self.jacobi_matrix(order), EIGEN_EPS, EIGEN_MAX_ITER)
            .ok_or(Error::EigenNoConvergence { order })?;
        let mut zeros: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
        zeros.sort_by(|x, y| x.total_cmp(y));
        for z in zeros.iter_mut() {
            for _ in 0..NEWTON_STEPS {
                let d = self.eval_p_derivative(order, *z);
                if d != 0.0 {
                    let step = self.eval_p(order, *z) / d;
                    if step.is_finite() {
                        *z -= step;
                    }
                }
            }
            *z = z.clamp(-1.0 + f64::EPSILON, 1.0 - f64::EPSILON);
        }
        Ok(zeros)
    }
}

/// Nodes and weights of an `order`-point Gauss-Jacobi rule.
#[derive(Debug, Clone, Serialize)]
pub struct QuadratureRule {
    pub params: JacobiParams,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    /// `Σ w_i f(t_i) ≈ ∫ f(t) (1 - t)^ρ (1 + t)^σ dt`, exact for polynomials
    /// of degree `<= 2 order - 1`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,weight\n");
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            let _ = writeln!(out, "{t:.17e},{w:.17e}");
        }
        out
    }
}

/// Gauss-Jacobi rule via Golub-Welsch.
///
/// Nodes are the eigenvalues of the Jacobi matrix, refined by Newton steps;
/// weights are then taken from the Christoffel formula
/// `w_i = C / ((1 - t_i²) P_N'(t_i)²)`, which keeps full relative accuracy
/// in the small end-point weights.
pub fn gauss_jacobi(params: JacobiParams, order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::domain("Gauss-Jacobi order must be at least 1"));
    }
    let nodes = params.polished_zeros(order)?;
    let (a, b, nf) = (params.rho, params.sigma, order as f64);
    let ln_c = (a + b + 1.0) * 2f64.ln() + ln_gamma(nf + a + 1.0) + ln_gamma(nf + b + 1.0)
        - ln_gamma(nf + a + b + 1.0)
        - ln_gamma(nf + 1.0);
    let c = ln_c.exp();
    let weights = nodes
        .iter()
        .map(|&t| {
            let d = params.eval_p_derivative(order, t);
            c / ((1.0 - t * t) * d * d)
        })
        .collect();
    Ok(QuadratureRule { params, nodes, weights, order })
}

/// The `m` simple zeros of `P_m^{(ρ,σ)}` with their residuals `|R_m(root)|`.
#[derive(Debug, Clone, Serialize)]
pub struct RootSet {
    pub params: JacobiParams,
    pub degree: usize,
    pub roots: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl RootSet {
    /// Residuals within `tol` and roots strictly increasing inside `(-1, 1)`.
    pub fn is_certified(&self, tol: f64) -> bool {
        self.residuals.iter().all(|&r| r <= tol)
            && self.roots.windows(2).all(|w| w[0] < w[1])
            && self.roots.iter().all(|&x| -1.0 < x && x < 1.0)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("root,residual\n");
        for (x, r) in self.roots.iter().zip(&self.residuals) {
            let _ = writeln!(out, "{x:.17e},{r:.3e}");
        }
        out
    }
}

pub fn roots(params: JacobiParams, m: usize) -> Result<RootSet> {
    if m == 0 {
        return Err(Error::domain("roots requires degree m >= 1"));
    }
    let roots = params.polished_zeros(m)?;
    let residuals = roots.iter().map(|&x| params.eval_r(m, x).abs()).collect();
    Ok(RootSet { params, degree: m, roots, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64) -> JacobiParams {
        JacobiParams::new(a, b).unwrap()
    }

    fn geometry_params() -> Vec<JacobiParams> {
        let mut out = Vec::new();
        for n in 2..=5usize {
            for k in 1..n {
                out.push(params((k as f64 - 1.0) / 2.0, (n - k) as f64 / 2.0 - 1.0));
            }
        }
        out
    }

    // Beta-integral oracle: ∫ t^p (1-t)^a (1+t)^b dt via the binomial
    // expansion t^p = Σ C(p,i) (1+t)^i (-1)^{p-i}.
    // ∫ t^p (1-t)^a (1+t)^b dt by integrating d/dt[(1-t)^{a+1}(1+t)^{b+1} t^p] = 0:
    // (a+b+2+p) M_{p+1} = (b-a) M_p + p M_{p-1}, started from the Beta mass.
    fn moment(a: f64, b: f64, p: u32) -> f64 {
        let m0 = ((a + b + 1.0) * 2f64.ln() + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0)).exp();
        let (mut prev, mut cur) = (0.0, m0);
        for q in 0..p {
            let qf = q as f64;
            let next = ((b - a) * cur + qf * prev) / (a + b + 2.0 + qf);
            prev = cur;
            cur = next;
        }
        cur
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(JacobiParams::new(-1.0, 0.0).is_err());
        assert!(JacobiParams::new(0.0, -1.5).is_err());
        assert!(JacobiParams::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn degree_zero_and_one() {
        let p = params(0.7, -0.3);
        for &x in &[-1.0, -0.2, 0.5, 1.0] {
            assert_eq!(p.eval_p(0, x), 1.0);
            let expected = (0.7 + 0.3) / 2.0 + (0.7 - 0.3 + 2.0) * x / 2.0;
            assert!((p.eval_p(1, x) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn value_at_one() {
        for p in geometry_params() {
            for m in 0..30 {
                let direct = p.eval_p(m, 1.0);
                let closed = p.p_at_one(m);
                assert!((direct - closed).abs() < 1e-12 * closed, "{p:?} m={m}");
                assert_eq!(p.eval_r(m, 1.0), 1.0);
            }
        }
    }

    #[test]
    fn degree_one_root() {
        let p = params(0.0, -0.5);
        let x = (p.sigma - p.rho) / (p.rho + p.sigma + 2.0);
        assert!(p.eval_r(1, x).abs() < 1e-15);
        let set = roots(p, 1).unwrap();
        assert!((set.roots[0] - x).abs() < 1e-15);
        // Index order (σ_geom, ρ_geom) = (-1/2, 0) for (n, k) = (2, 1).
        let shift = params(-0.5, 0.0);
        assert!((roots(shift, 1).unwrap().roots[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn legendre_roots() {
        let set = roots(params(0.0, 0.0), 2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((set.roots[0] + r).abs() < 1e-15);
        assert!((set.roots[1] - r).abs() < 1e-15);
    }

    #[test]
    fn legendre_midpoint_rule() {
        let rule = gauss_jacobi(params(0.0, 0.0), 1).unwrap();
        assert!(rule.nodes[0].abs() < 1e-15);
        assert!((rule.weights[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exact_moments() {
        for p in geometry_params().into_iter().chain([params(2.5, -0.7), params(-0.5, -0.5)]) {
            for order in 1..=12 {
                let rule = gauss_jacobi(p, order).unwrap();
                for pow in 0..(2 * order as u32) {
                    let exact = moment(p.rho, p.sigma, pow);
                    let got = rule.integrate(|t| t.powi(pow as i32));
                    let scale = moment(p.rho, p.sigma, 0);
                    assert!(
                        (got - exact).abs() <= 1e-13 * exact.abs().max(1e-2 * scale),
                        "{p:?} N={order} p={pow}: {got} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn weights_sum_to_mass() {
        for p in geometry_params() {
            for order in [1, 5, 20, 60] {
                let rule = gauss_jacobi(p, order).unwrap();
                let total: f64 = rule.weights.iter().sum();
                assert!((total - p.total_mass()).abs() < 1e-13 * p.total_mass());
                assert!(rule.weights.iter().all(|&w| w > 0.0));
                assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn norm_and_orthogonality_against_quadrature() {
        for p in geometry_params() {
            let rule = gauss_jacobi(p, 21).unwrap();
            for m in 0..=20 {
                let quad = rule.integrate(|t| p.eval_r(m, t).powi(2));
                let closed = p.norm2_r(m);
                assert!((quad - closed).abs() < 1e-12 * closed, "{p:?} m={m}");
                for l in 0..m {
                    let cross = rule.integrate(|t| p.eval_r(m, t) * p.eval_r(l, t));
                    assert!(cross.abs() < 1e-12, "{p:?} ({l},{m}) -> {cross}");
                }
            }
        }
    }

    #[test]
    fn reflection_symmetry() {
        for p in geometry_params() {
            let q = p.swapped();
            for m in 0..25 {
                for i in 0..=20 {
                    let x = -1.0 + 0.1 * i as f64;
                    let lhs = p.eval_p(m, -x);
                    let rhs = if m % 2 == 0 { 1.0 } else { -1.0 } * q.eval_p(m, x);
                    assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "{p:?} m={m} x={x}");
                }
            }
        }
    }

    #[test]
    fn roots_interlace_and_certify() {
        for p in geometry_params() {
            let mut prev = roots(p, 1).unwrap();
            for m in 2..=100 {
                let next = roots(p, m).unwrap();
                assert!(next.is_certified(DEFAULT_ROOT_RESIDUAL_TOL), "{p:?} m={m} res={}", next.max_residual());
                for (i, &x) in prev.roots.iter().enumerate() {
                    assert!(next.roots[i] < x && x < next.roots[i + 1], "{p:?} m={m}");
                }
                prev = next;
            }
        }
    }

    #[test]
    fn csv_exports() {
        let rule = gauss_jacobi(params(0.0, 0.0), 2).unwrap();
        let csv = rule.to_csv();
        assert!(csv.starts_with("node,weight\n"));
        assert_eq!(csv.lines().count(), 3);
        let set = roots(params(0.0, 0.0), 3).unwrap();
        assert_eq!(set.to_csv().lines().count(), 4);
    }
}
