use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::Geometry;
use crate::jacobi::{gauss_jacobi, JacobiParams};

/// Product cubature on `S^dim` for the normalized measure `d_*x`.
///
/// Points are stored row-major, `dim + 1` coordinates each.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    dim: usize,
    order: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereGrid {
    /// Grid of design order `order` split along the geometry's `R^{k+1} × R^{n-k}`.
    pub fn for_geometry(geom: &Geometry, order: usize) -> Result<Self> {
        Self::build(geom.n(), Some(geom.k()), order)
    }

    pub fn for_sphere(dim: usize, order: usize) -> Result<Self> {
        Self::build(dim, None, order)
    }

    fn build(dim: usize, split: Option<usize>, order: usize) -> Result<Self> {
        match dim {
            0 => Ok(SphereGrid { dim, order, points: vec![-1.0, 1.0], weights: vec![0.5, 0.5] }),
            1 => {
                // Equispaced points integrate trigonometric degree < count exactly.
                let count = order + 1;
                let mut points = Vec::with_capacity(2 * count);
                for i in 0..count {
                    let phi = 2.0 * PI * i as f64 / count as f64;
                    points.extend([phi.cos(), phi.sin()]);
                }
                Ok(SphereGrid { dim, order, points, weights: vec![1.0 / count as f64; count] })
            }
            _ => {
                let k = split.unwrap_or(dim - 1);
                let eta = Self::for_sphere(k, order)?;
                let zeta = Self::for_sphere(dim - k - 1, order)?;
                // sin^k θ cos^{dim-k-1} θ dθ in s = cos 2θ.
                let params = JacobiParams::new((k as f64 - 1.0) / 2.0, (dim - k) as f64 / 2.0 - 1.0)?;
                let rule = gauss_jacobi(params, order / 4 + 1)?;
                let mass: f64 = rule.weights.iter().sum();

                let size = rule.nodes.len() * eta.len() * zeta.len();
                let mut points = Vec::with_capacity(size * (dim + 1));
                let mut weights = Vec::with_capacity(size);
                for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let (sin_t, cos_t) = (((1.0 - s) / 2.0).sqrt(), ((1.0 + s) / 2.0).sqrt());
                    for (pe, we) in eta.iter() {
                        for (pz, wz) in zeta.iter() {
                            points.extend(pe.iter().map(|v| v * sin_t));
                            points.extend(pz.iter().map(|v| v * cos_t));
                            weights.push(w / mass * we * wz);
                        }
                    }
                }
                Ok(SphereGrid { dim, order, points, weights })
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * (self.dim + 1)..(i + 1) * (self.dim + 1)]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points.chunks_exact(self.dim + 1).zip(self.weights.iter().copied())
    }

    pub fn total_weight(&self) -> f64 {
        compensated_sum(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
        let terms: Vec<f64> = self
            .points
            .par_chunks_exact(self.dim + 1)
            .zip(self.weights.par_iter())
            .map(|(x, w)| w * f(x))
            .collect();
        compensated_sum(terms)
    }
}

/// Neumaier summation.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}
