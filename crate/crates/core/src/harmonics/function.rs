use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{BisphericalIndex, SphereBasis};
use super::grid::SphereGrid;
use crate::error::{Error, Result};
use crate::geometry::Geometry;

/// Relative Parseval defect above which an analysis is flagged as leaking
/// energy past the band limit.
pub const LEAKAGE_THRESHOLD: f64 = 1e-6;

/// Band-limited function on `S^n` in the orthonormal bispherical basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereFunction {
    geom: Geometry,
    band_limit: usize,
    coeffs: BTreeMap<BisphericalIndex, f64>,
}

/// Which degrees a random function populates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeFilter {
    All,
    Even,
    Odd,
    Exactly(usize),
}

impl DegreeFilter {
    pub fn admits(&self, j: usize) -> bool {
        match self {
            DegreeFilter::All => true,
            DegreeFilter::Even => j.is_multiple_of(2),
            DegreeFilter::Odd => j % 2 == 1,
            DegreeFilter::Exactly(d) => j == *d,
        }
    }
}

impl SphereFunction {
    pub fn zero(geom: Geometry, band_limit: usize) -> Self {
        SphereFunction { geom, band_limit, coeffs: BTreeMap::new() }
    }

    pub fn constant(geom: Geometry, band_limit: usize, value: f64) -> Self {
        let mut f = Self::zero(geom, band_limit);
        f.coeffs.insert(BisphericalIndex { r: 0, mu: 1, s: 0, nu: 1, m: 0 }, value);
        f
    }

    /// A single basis function `U^j_M`.
    pub fn basis_function(geom: Geometry, band_limit: usize, index: BisphericalIndex) -> Result<Self> {
        let mut f = Self::zero(geom, band_limit);
        f.set(index, 1.0)?;
        Ok(f)
    }

    /// Independent standard normal coefficients on every admitted degree.
    pub fn random(geom: Geometry, band_limit: usize, filter: DegreeFilter, rng: &mut impl Rng) -> Self {
        let basis = SphereBasis::for_geometry(&geom, band_limit);
        let coeffs = basis
            .indices()
            .into_iter()
            .filter(|idx| filter.admits(idx.degree()))
            .map(|idx| (idx, rng.sample::<f64, _>(StandardNormal)))
            .collect();
        SphereFunction { geom, band_limit, coeffs }
    }

    pub fn geom(&self) -> &Geometry {
        &self.geom
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn coeffs(&self) -> &BTreeMap<BisphericalIndex, f64> {
        &self.coeffs
    }

    pub fn get(&self, index: &BisphericalIndex) -> f64 {
        self.coeffs.get(index).copied().unwrap_or(0.0)
    }

    /// Set a coefficient; the index must be a valid label of degree `<= J`.
    pub fn set(&mut self, index: BisphericalIndex, value: f64) -> Result<()> {
        if index.degree() > self.band_limit {
            return Err(Error::domain(format!(
                "index {index} has degree {} above the band limit {}",
                index.degree(),
                self.band_limit
            )));
        }
        let basis = SphereBasis::for_geometry(&self.geom, index.degree());
        if basis.position(&index).is_none() {
            return Err(Error::UnknownIndex(index.to_string()));
        }
        self.coeffs.insert(index, value);
        Ok(())
    }

    pub fn norm2(&self) -> f64 {
        self.coeffs.values().map(|c| c * c).sum()
    }

    /// Degrees carrying a nonzero coefficient.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.coeffs.iter().filter(|(_, c)| **c != 0.0).map(|(i, _)| i.degree()).collect();
        d.dedup();
        d
    }

    pub fn filter_degrees(&self, keep: impl Fn(usize) -> bool) -> Self {
        SphereFunction {
            geom: self.geom.clone(),
            band_limit: self.band_limit,
            coeffs: self.coeffs.iter().filter(|(i, _)| keep(i.degree())).map(|(i, c)| (*i, *c)).collect(),
        }
    }

    pub fn map_by_degree(&self, factor: impl Fn(usize) -> f64) -> Self {
        SphereFunction {
            geom: self.geom.clone(),
            band_limit: self.band_limit,
            coeffs: self.coeffs.iter().map(|(i, c)| (*i, c * factor(i.degree()))).collect(),
        }
    }

    /// Largest coefficient difference over the union of both supports.
    pub fn max_coeff_diff(&self, other: &SphereFunction) -> f64 {
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .map(|i| (self.get(i) - other.get(i)).abs())
            .fold(0.0, f64::max)
    }

    /// Dense evaluator sharing one basis across many points.
    pub fn evaluator(&self) -> Evaluator {
        let basis = SphereBasis::for_geometry(&self.geom, self.band_limit);
        let mut dense = vec![0.0; basis.len()];
        for (idx, c) in &self.coeffs {
            let p = basis.position(idx).expect("coefficient indices are validated on insertion");
            dense[p] = *c;
        }
        Evaluator { basis, dense }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.evaluator().eval(x)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SphereFunctionRepr::from(self)).expect("plain data serializes")
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        let repr: SphereFunctionRepr = serde_json::from_value(value)?;
        let mut f = SphereFunction::zero(repr.geom, repr.band_limit);
        for c in repr.coeffs {
            f.set(BisphericalIndex { r: c.r, mu: c.mu, s: c.s, nu: c.nu, m: c.m }, c.value)?;
        }
        Ok(f)
    }
}

impl Serialize for SphereFunction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SphereFunctionRepr::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SphereFunction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        SphereFunction::from_json(value).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct SphereFunctionRepr {
    geom: Geometry,
    #[serde(rename = "J")]
    band_limit: usize,
    coeffs: Vec<CoeffRepr>,
}

#[derive(Serialize, Deserialize)]
struct CoeffRepr {
    r: usize,
    mu: usize,
    s: usize,
    nu: usize,
    m: usize,
    value: f64,
}

impl From<&SphereFunction> for SphereFunctionRepr {
    fn from(f: &SphereFunction) -> Self {
        SphereFunctionRepr {
            geom: f.geom.clone(),
            band_limit: f.band_limit,
            coeffs: f
                .coeffs
                .iter()
                .map(|(i, v)| CoeffRepr { r: i.r, mu: i.mu, s: i.s, nu: i.nu, m: i.m, value: *v })
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evaluator {
    basis: SphereBasis,
    dense: Vec<f64>,
}

impl Evaluator {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.basis.eval_all(x).iter().zip(&self.dense).map(|(u, c)| u * c).sum()
    }
}

/// Result of [`analyze`].
#[derive(Debug, Clone)]
pub struct Analysis {
    pub function: SphereFunction,
    /// `‖f‖²` on the grid.
    pub grid_norm2: f64,
    /// `(‖f‖²_grid - Σ c²) / ‖f‖²_grid`.
    pub leakage: f64,
    pub band_limited: bool,
}

/// Coefficients of `f` up to degree `J` by product quadrature of order `2J`.
pub fn analyze(f: impl Fn(&[f64]) -> f64 + Sync, geom: &Geometry, band_limit: usize) -> Result<Analysis> {
    let basis = SphereBasis::for_geometry(geom, band_limit);
    let grid = SphereGrid::for_geometry(geom, 2 * band_limit)?;
    analyze_on(f, geom, &basis, &grid)
}

/// [`analyze`] with a prebuilt basis and grid (grid order must be `>= 2J`).
pub fn analyze_on(
    f: impl Fn(&[f64]) -> f64 + Sync,
    geom: &Geometry,
    basis: &SphereBasis,
    grid: &SphereGrid,
) -> Result<Analysis> {
    if grid.order() < 2 * basis.band_limit() {
        return Err(Error::domain(format!(
            "grid order {} is below twice the band limit {}",
            grid.order(),
            basis.band_limit()
        )));
    }
    const CHUNK: usize = 256;
    let partials: Vec<(Vec<f64>, f64)> = (0..grid.len().div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; basis.len()];
            let mut norm = 0.0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(grid.len()) {
                let x = grid.point(i);
                let w = grid.weights()[i];
                let fx = f(x);
                norm += w * fx * fx;
                for (a, u) in acc.iter_mut().zip(basis.eval_all(x)) {
                    *a += w * fx * u;
                }
            }
            (acc, norm)
        })
        .collect();

    let mut dense = vec![0.0; basis.len()];
    let mut grid_norm2 = 0.0;
    for (acc, norm) in partials {
        for (d, a) in dense.iter_mut().zip(acc) {
            *d += a;
        }
        grid_norm2 += norm;
    }

    let indices = basis.indices();
    let coeffs = indices.into_iter().zip(dense).collect::<BTreeMap<_, _>>();
    let function = SphereFunction { geom: geom.clone(), band_limit: basis.band_limit(), coeffs };
    let captured = function.norm2();
    let leakage = if grid_norm2 > 0.0 { ((grid_norm2 - captured) / grid_norm2).max(0.0) } else { 0.0 };
    Ok(Analysis { function, grid_norm2, leakage, band_limited: leakage <= LEAKAGE_THRESHOLD })
}

pub fn synthesize(f: &SphereFunction, x: &[f64]) -> f64 {
    f.eval(x)
}
