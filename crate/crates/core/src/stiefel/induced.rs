use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::frame::{sample_frame, StiefelFrame};
use super::mc::{monte_carlo, McEstimate};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::harmonics::{BisphericalIndex, SphereBasis, SphereFunction, SphereGrid};
use crate::jacobi::JacobiParams;

/// Values of `R_{j/2}^{(ρ,σ)}(2|xᵀv|² - 1)` weighted by the grid, at every
/// grid point `x`.
struct ZonalKernel {
    params: JacobiParams,
    half: usize,
    points: DMatrix<f64>,
    weights: DVector<f64>,
}

impl ZonalKernel {
    fn new(geom: &Geometry, j: usize) -> Result<(Self, SphereGrid)> {
        let grid = SphereGrid::for_geometry(geom, 2 * j)?;
        let rows = geom.n() + 1;
        let mut points = DMatrix::zeros(grid.len(), rows);
        for (i, (x, _)) in grid.iter().enumerate() {
            for c in 0..rows {
                points[(i, c)] = x[c];
            }
        }
        let weights = DVector::from_column_slice(grid.weights());
        Ok((ZonalKernel { params: geom.jacobi(), half: j / 2, points, weights }, grid))
    }

    fn weighted(&self, v: &StiefelFrame) -> DVector<f64> {
        let proj = &self.points * v.matrix();
        DVector::from_iterator(
            self.points.nrows(),
            proj.row_iter().zip(self.weights.iter()).map(|(row, w)| {
                w * self.params.eval_r(self.half, 2.0 * row.norm_squared() - 1.0)
            }),
        )
    }
}

fn even_degree(j: usize) -> Result<()> {
    if j % 2 == 1 {
        Err(Error::OddDegree { what: "induced harmonic", j })
    } else {
        Ok(())
    }
}

/// Induced Stiefel harmonic `Ŷ_j(v) = α_j ∫ Y_j(x) R_{j/2}(2|xᵀv|² - 1) d_*x`.
pub struct InducedHarmonic {
    geom: Geometry,
    j: usize,
    alpha: f64,
    kernel: ZonalKernel,
    values: DVector<f64>,
}

impl InducedHarmonic {
    /// `y` must be supported on the single even degree `j`.
    pub fn new(y: &SphereFunction, j: usize) -> Result<Self> {
        even_degree(j)?;
        if let Some(bad) = y.coeffs().iter().find(|(i, c)| i.degree() != j && **c != 0.0) {
            return Err(Error::MixedDegree { expected: j, found: bad.0.degree() });
        }
        let geom = y.geom().clone();
        let (kernel, grid) = ZonalKernel::new(&geom, j)?;
        let ev = y.evaluator();
        let values: Vec<f64> = (0..grid.len()).into_par_iter().map(|i| ev.eval(grid.point(i))).collect();
        Ok(InducedHarmonic { alpha: geom.alpha(j)?, geom, j, kernel, values: DVector::from_vec(values) })
    }

    /// Degree inferred from the (single) degree present in `y`.
    pub fn from_function(y: &SphereFunction) -> Result<Self> {
        let degrees = y.degrees();
        match degrees.as_slice() {
            [j] => Self::new(y, *j),
            [] => Self::new(y, 0),
            [a, b, ..] => Err(Error::MixedDegree { expected: *a, found: *b }),
        }
    }

    pub fn degree(&self) -> usize {
        self.j
    }

    pub fn geom(&self) -> &Geometry {
        &self.geom
    }

    pub fn eval(&self, v: &StiefelFrame) -> f64 {
        self.alpha * self.kernel.weighted(v).dot(&self.values)
    }
}

/// All induced harmonics `Ŷ_{j,λ}` of one degree, in basis order.
pub struct InducedSystem {
    geom: Geometry,
    j: usize,
    alpha: f64,
    indices: Vec<BisphericalIndex>,
    kernel: ZonalKernel,
    /// Grid points × degree-`j` members.
    values: DMatrix<f64>,
}

impl InducedSystem {
    pub fn new(geom: &Geometry, j: usize) -> Result<Self> {
        even_degree(j)?;
        let basis = SphereBasis::for_geometry(geom, j);
        let range = basis.degree_range(j);
        let all = basis.indices();
        let (kernel, grid) = ZonalKernel::new(geom, j)?;
        let rows: Vec<Vec<f64>> =
            (0..grid.len()).into_par_iter().map(|i| basis.eval_all(grid.point(i))[range.clone()].to_vec()).collect();
        let values = DMatrix::from_fn(grid.len(), range.len(), |i, c| rows[i][c]);
        Ok(InducedSystem {
            geom: geom.clone(),
            j,
            alpha: geom.alpha(j)?,
            indices: all[range].to_vec(),
            kernel,
            values,
        })
    }

    pub fn degree(&self) -> usize {
        self.j
    }

    pub fn geom(&self) -> &Geometry {
        &self.geom
    }

    pub fn indices(&self) -> &[BisphericalIndex] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn eval_all(&self, v: &StiefelFrame) -> Vec<f64> {
        let w = self.kernel.weighted(v);
        (self.values.transpose() * w * self.alpha).iter().copied().collect()
    }
}

/// Monte-Carlo estimate of `α_j ∫ Ŷ_j(v) R_{j/2}(2|xᵀv|² - 1) d_*v`, which
/// reproduces `Y_j(x)`.
pub fn reconstruct_from_induced(
    geom: &Geometry,
    j: usize,
    yhat: impl Fn(&StiefelFrame) -> f64 + Sync,
    x: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    even_degree(j)?;
    let alpha = geom.alpha(j)?;
    let params = geom.jacobi();
    Ok(monte_carlo(seed, n_samples, |rng| {
        let v = sample_frame(geom, rng);
        alpha * yhat(&v) * params.eval_r(j / 2, 2.0 * v.projection_norm2(x) - 1.0)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stiefel::frame::RotationSampler;

    #[test]
    fn degree_zero_is_constant_one() {
        let g = Geometry::new(3, 1).unwrap();
        let one = SphereFunction::constant(g.clone(), 0, 1.0);
        let yhat = InducedHarmonic::from_function(&one).unwrap();
        let mut s = RotationSampler::new(g, 5);
        for _ in 0..5 {
            assert!((yhat.eval(&s.frame()) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_mixed_and_odd_degrees() {
        let g = Geometry::new(2, 1).unwrap();
        let mut f = SphereFunction::constant(g.clone(), 2, 1.0);
        f.set(BisphericalIndex { r: 0, mu: 1, s: 0, nu: 1, m: 1 }, 1.0).unwrap();
        assert!(matches!(InducedHarmonic::from_function(&f), Err(Error::MixedDegree { .. })));
        let odd = SphereFunction::basis_function(g.clone(), 1, BisphericalIndex { r: 1, mu: 1, s: 0, nu: 1, m: 0 }).unwrap();
        assert!(matches!(InducedHarmonic::from_function(&odd), Err(Error::OddDegree { .. })));
        assert!(InducedSystem::new(&g, 3).is_err());
    }

    #[test]
    fn single_and_system_agree() {
        let g = Geometry::new(3, 2).unwrap();
        let sys = InducedSystem::new(&g, 2).unwrap();
        let mut s = RotationSampler::new(g.clone(), 6);
        let v = s.frame();
        let all = sys.eval_all(&v);
        for (p, idx) in sys.indices().iter().enumerate() {
            let f = SphereFunction::basis_function(g.clone(), 2, *idx).unwrap();
            let single = InducedHarmonic::new(&f, 2).unwrap().eval(&v);
            assert!((single - all[p]).abs() < 1e-12);
        }
    }
}
