use super::frame::StiefelFrame;
use super::mc::{monte_carlo, McEstimate};
use super::mean::{rotation_to, BisphericalMean, DualDraw, GrassmannFunction};
use crate::error::Result;
use crate::geometry::Geometry;
use crate::multipliers::Kernel;

/// `(Af)(v) = c_{n,k} ∫₀¹ a(τ) (M_τ f)(v) ρ(τ) dτ`.
///
/// `mean_order` is the exactness degree of the inner bispherical grid and
/// `radial_order` the number of Gauss-Jacobi nodes in `s = 2τ² - 1`.
pub fn intertwine_a(
    geom: &Geometry,
    kernel: &Kernel,
    f: impl Fn(&[f64]) -> f64,
    v: &StiefelFrame,
    mean_order: usize,
    radial_order: usize,
) -> Result<f64> {
    let rule = kernel.radial_rule(geom, radial_order)?;
    let mean = BisphericalMean::new(geom, mean_order)?;
    let r_v = v.completion();
    let mut total = 0.0;
    for (tau, w) in rule {
        total += w * mean.mean_with(&f, &r_v, tau)?;
    }
    Ok(geom.c_nk() * total)
}

/// `(A*φ)(x) = c_{n,k} ∫₀¹ a(τ) (M*_τ φ)(x) ρ(τ) dτ`; every Monte-Carlo draw
/// of the group elements is reused across all radial nodes.
pub fn intertwine_a_star(
    geom: &Geometry,
    kernel: &Kernel,
    phi: &GrassmannFunction,
    x: &[f64],
    n_samples: usize,
    radial_order: usize,
    seed: u64,
) -> Result<McEstimate> {
    let rule = kernel.radial_rule(geom, radial_order)?;
    let r_x = rotation_to(x);
    let c = geom.c_nk();
    Ok(monte_carlo(seed, n_samples, |rng| {
        let draw = DualDraw::sample(geom, rng);
        c * rule.iter().map(|(tau, w)| w * phi.eval(&draw.frame(geom, &r_x, *tau))).sum::<f64>()
    }))
}
