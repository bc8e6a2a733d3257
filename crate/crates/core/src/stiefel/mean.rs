use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::frame::{block_rotation, haar_orthogonal, haar_rotation, StiefelFrame};
use super::mc::{monte_carlo, McEstimate};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::harmonics::SphereGrid;

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::domain(format!("tau must lie in [0, 1], got {tau}")))
    }
}

/// Product cubature on `S^k × S^{n-k-1}` realizing the bispherical mean
/// `(M_τ f)(v) = ∬ f(r_v(η √(1-τ²) + ζ τ)) d_*η d_*ζ`.
///
/// Exact for `f` polynomial of degree `<= order`.
#[derive(Debug, Clone)]
pub struct BisphericalMean {
    geom: Geometry,
    eta: SphereGrid,
    zeta: SphereGrid,
}

impl BisphericalMean {
    pub fn new(geom: &Geometry, order: usize) -> Result<Self> {
        Ok(BisphericalMean {
            geom: geom.clone(),
            eta: SphereGrid::for_sphere(geom.k(), order)?,
            zeta: SphereGrid::for_sphere(geom.n() - geom.k() - 1, order)?,
        })
    }

    pub fn geom(&self) -> &Geometry {
        &self.geom
    }

    pub fn mean(&self, f: impl Fn(&[f64]) -> f64, v: &StiefelFrame, tau: f64) -> Result<f64> {
        self.mean_with(f, &v.completion(), tau)
    }

    /// Mean using a caller-supplied completion `r_v` (any rotation with `r_v v₀ = v`).
    pub fn mean_with(&self, f: impl Fn(&[f64]) -> f64, r_v: &DMatrix<f64>, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        let k = self.geom.k();
        let rows = self.geom.n() + 1;
        let c = r_v.view((0, 0), (rows, k + 1));
        let v = r_v.view((0, k + 1), (rows, rows - k - 1));
        let s = (1.0 - tau * tau).sqrt();
        let image_eta: Vec<DVector<f64>> = self.eta.iter().map(|(eta, _)| c * DVector::from_column_slice(eta) * s).collect();
        let mut total = 0.0;
        let mut x = vec![0.0; rows];
        for (zeta, wz) in self.zeta.iter() {
            let vz = v * DVector::from_column_slice(zeta) * tau;
            for (ie, (_, we)) in image_eta.iter().zip(self.eta.iter()) {
                for i in 0..rows {
                    x[i] = ie[i] + vz[i];
                }
                total += we * wz * f(&x);
            }
        }
        Ok(total)
    }
}

/// `(M_τ f)(v)` with a grid exact up to degree `order`.
pub fn bispherical_mean(
    geom: &Geometry,
    f: impl Fn(&[f64]) -> f64,
    v: &StiefelFrame,
    tau: f64,
    order: usize,
) -> Result<f64> {
    BisphericalMean::new(geom, order)?.mean(f, v, tau)
}

/// A function on the Stiefel manifold, optionally declared right-`O(n-k)` invariant
/// (a function on the Grassmannian of `(n-k)`-planes).
#[derive(Clone)]
pub struct GrassmannFunction {
    label: String,
    invariant: bool,
    eval: Arc<dyn Fn(&StiefelFrame) -> f64 + Send + Sync>,
}

impl fmt::Debug for GrassmannFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrassmannFunction").field("label", &self.label).field("invariant", &self.invariant).finish()
    }
}

impl GrassmannFunction {
    pub fn new(label: impl Into<String>, invariant: bool, eval: impl Fn(&StiefelFrame) -> f64 + Send + Sync + 'static) -> Self {
        GrassmannFunction { label: label.into(), invariant, eval: Arc::new(eval) }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), true, move |_| c)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_invariant(&self) -> bool {
        self.invariant
    }

    pub fn eval(&self, v: &StiefelFrame) -> f64 {
        (self.eval)(v)
    }

    /// Largest `|φ(vγ) - φ(v)|` over random frames and `γ ∈ O(n-k)`.
    pub fn invariance_defect(&self, geom: &Geometry, samples: usize, rng: &mut impl Rng) -> f64 {
        (0..samples)
            .map(|_| {
                let v = super::frame::sample_frame(geom, rng);
                let gamma = haar_orthogonal(geom.n() - geom.k(), rng);
                let w = v.right_multiply(&gamma).expect("orthogonal action keeps frames orthonormal");
                (self.eval(&w) - self.eval(&v)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Householder reflection through `e_{n+1} - x`, composed with the
/// reflection `x_1 ↦ -x_1`; a rotation with `r_x e_{n+1} = x`.
pub fn rotation_to(x: &[f64]) -> DMatrix<f64> {
    let m = x.len();
    let mut u = DVector::from_iterator(m, x.iter().map(|v| -v));
    u[m - 1] += 1.0;
    let un = u.norm_squared();
    let mut h = DMatrix::identity(m, m);
    if un < 1e-30 {
        return h;
    }
    h -= &u * u.transpose() * (2.0 / un);
    h.column_mut(0).neg_mut();
    h
}

/// Group elements `(γ, δ) ∈ K' × K` of one dual-mean draw.
#[derive(Debug, Clone)]
pub struct DualDraw {
    gamma_t_v0: DMatrix<f64>,
    delta_t: DMatrix<f64>,
}

impl DualDraw {
    pub fn sample(geom: &Geometry, rng: &mut impl Rng) -> Self {
        let n = geom.n();
        let gamma = block_rotation(geom, rng);
        let mut delta = DMatrix::identity(n + 1, n + 1);
        delta.view_mut((0, 0), (n, n)).copy_from(&haar_rotation(n, rng));
        DualDraw {
            gamma_t_v0: gamma.transpose() * StiefelFrame::canonical(geom).matrix(),
            delta_t: delta.transpose(),
        }
    }

    /// `r_x δ⁻¹ g_{k+1,n+1}(θ)⁻¹ γ⁻¹ v₀` with `τ = cos θ`.
    pub fn frame(&self, geom: &Geometry, r_x: &DMatrix<f64>, tau: f64) -> StiefelFrame {
        let (n, k) = (geom.n(), geom.k());
        let sin_t = (1.0 - tau * tau).max(0.0).sqrt();
        // g⁻¹ = gᵀ acting on coordinates k+1 and n+1 (0-based k and n).
        let mut w = self.gamma_t_v0.clone();
        for c in 0..w.ncols() {
            let (a, b) = (w[(k, c)], w[(n, c)]);
            w[(k, c)] = tau * a - sin_t * b;
            w[(n, c)] = sin_t * a + tau * b;
        }
        StiefelFrame::new(r_x * &self.delta_t * w).expect("rotations applied to v0 give a frame")
    }
}

/// One draw of `r_x δ⁻¹ g_{k+1,n+1}(θ)⁻¹ γ⁻¹ v₀`; the frame is uniform among
/// those with `|xᵀv| = τ`.
pub fn sample_dual_frame(geom: &Geometry, r_x: &DMatrix<f64>, tau: f64, rng: &mut impl Rng) -> StiefelFrame {
    DualDraw::sample(geom, rng).frame(geom, r_x, tau)
}

/// `(M*_τ φ)(x)` by Monte-Carlo over `SO(n) × SO(k+1) × SO(n-k)`.
pub fn dual_mean(
    geom: &Geometry,
    phi: &GrassmannFunction,
    x: &[f64],
    tau: f64,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_tau(tau)?;
    if n_samples == 0 {
        return Err(Error::domain("dual_mean needs at least one sample"));
    }
    let r_x = rotation_to(x);
    Ok(monte_carlo(seed, n_samples, |rng| phi.eval(&sample_dual_frame(geom, &r_x, tau, rng))))
}
