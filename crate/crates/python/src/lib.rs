//! Python bindings: module `pyshiftfunk`.
//!
//! Geometries, sphere functions and induced-coefficient maps are wrapped as
//! classes; reports cross the boundary as JSON strings.

use nalgebra::DMatrix;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shiftfunk::harmonics::DegreeFilter;
use shiftfunk::injectivity::{self, InducedCoefficients, DEFAULT_INVERSION_FLOOR, DEFAULT_ZERO_TOL};
use shiftfunk::jacobi::{self, JacobiParams};
use shiftfunk::multipliers::{self, MultiplierTable};
use shiftfunk::stiefel::{self, BisphericalMean, StiefelFrame};
use shiftfunk::verify::{self, VerifyOptions};

fn err(e: shiftfunk::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn params(rho: f64, sigma: f64) -> PyResult<JacobiParams> {
    JacobiParams::new(rho, sigma).map_err(err)
}

#[pyclass(name = "Geometry", frozen, from_py_object)]
#[derive(Clone)]
struct PyGeometry(shiftfunk::Geometry);

#[pymethods]
impl PyGeometry {
    #[new]
    fn new(n: usize, k: usize) -> PyResult<Self> {
        shiftfunk::Geometry::new(n, k).map(PyGeometry).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k()
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.0.rho()
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma()
    }

    #[getter]
    fn c_nk(&self) -> f64 {
        self.0.c_nk()
    }

    fn kappa(&self, j: usize) -> PyResult<f64> {
        self.0.kappa(j).map_err(err)
    }

    fn alpha(&self, j: usize) -> PyResult<f64> {
        self.0.alpha(j).map_err(err)
    }

    /// Dimension of degree-`j` harmonics on `S^n`.
    fn dim(&self, j: usize) -> u64 {
        self.0.dim(j)
    }

    fn __repr__(&self) -> String {
        format!("Geometry(n={}, k={})", self.0.n(), self.0.k())
    }
}

#[pyclass(name = "SphereFunction", frozen, from_py_object)]
#[derive(Clone)]
struct PySphereFunction(shiftfunk::SphereFunction);

#[pymethods]
impl PySphereFunction {
    /// Random coefficients; `degrees` is "all", "even" or "odd".
    #[staticmethod]
    #[pyo3(signature = (geom, band_limit, seed=0, degrees="all"))]
    fn random(geom: &PyGeometry, band_limit: usize, seed: u64, degrees: &str) -> PyResult<Self> {
        let filter = match degrees {
            "all" => DegreeFilter::All,
            "even" => DegreeFilter::Even,
            "odd" => DegreeFilter::Odd,
            other => return Err(PyValueError::new_err(format!("unknown degree filter {other:?}"))),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(PySphereFunction(shiftfunk::SphereFunction::random(geom.0.clone(), band_limit, filter, &mut rng)))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let value = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        shiftfunk::SphereFunction::from_json(value).map(PySphereFunction).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json().to_string()
    }

    #[getter]
    fn band_limit(&self) -> usize {
        self.0.band_limit()
    }

    #[getter]
    fn geom(&self) -> PyGeometry {
        PyGeometry(self.0.geom().clone())
    }

    /// Squared L² norm (sum of squared coefficients).
    fn norm2(&self) -> f64 {
        self.0.norm2()
    }

    fn degrees(&self) -> Vec<usize> {
        self.0.degrees()
    }

    fn max_coeff_diff(&self, other: &PySphereFunction) -> f64 {
        self.0.max_coeff_diff(&other.0)
    }

    fn __call__(&self, x: Vec<f64>) -> PyResult<f64> {
        if x.len() != self.0.geom().n() + 1 {
            return Err(PyValueError::new_err(format!("point needs {} coordinates", self.0.geom().n() + 1)));
        }
        Ok(self.0.eval(&x))
    }
}

#[pyclass(name = "InducedCoefficients", frozen)]
struct PyInducedCoefficients(InducedCoefficients);

#[pymethods]
impl PyInducedCoefficients {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let value = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        InducedCoefficients::from_json(value).map(PyInducedCoefficients).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json().to_string()
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.0.tau
    }

    fn __len__(&self) -> usize {
        self.0.coeffs.len()
    }
}

#[pyfunction]
fn jacobi_p(rho: f64, sigma: f64, m: usize, x: f64) -> PyResult<f64> {
    Ok(params(rho, sigma)?.eval_p(m, x))
}

/// `P_m(x) / P_m(1)`.
#[pyfunction]
fn jacobi_r(rho: f64, sigma: f64, m: usize, x: f64) -> PyResult<f64> {
    Ok(params(rho, sigma)?.eval_r(m, x))
}

#[pyfunction]
fn jacobi_norm2_r(rho: f64, sigma: f64, m: usize) -> PyResult<f64> {
    Ok(params(rho, sigma)?.norm2_r(m))
}

#[pyfunction]
fn jacobi_roots(rho: f64, sigma: f64, m: usize) -> PyResult<Vec<f64>> {
    Ok(jacobi::roots(params(rho, sigma)?, m).map_err(err)?.roots)
}

/// `(nodes, weights)` of the `order`-point rule.
#[pyfunction]
fn gauss_jacobi(rho: f64, sigma: f64, order: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let rule = jacobi::gauss_jacobi(params(rho, sigma)?, order).map_err(err)?;
    Ok((rule.nodes, rule.weights))
}

#[pyfunction]
fn m_hat_tau(geom: &PyGeometry, j: usize, tau: f64) -> PyResult<f64> {
    multipliers::m_hat_tau(&geom.0, j, tau).map_err(err)
}

#[pyfunction]
fn funk_multiplier(geom: &PyGeometry, j: usize) -> PyResult<f64> {
    multipliers::funk_multiplier(&geom.0, j).map_err(err)
}

#[pyfunction]
fn cosine_multiplier(geom: &PyGeometry, j: usize, alpha: f64) -> PyResult<f64> {
    multipliers::cosine_multiplier(&geom.0, j, alpha).map_err(err)
}

/// `[(j, m̂_τ(j))]` for even `j <= j_max`.
#[pyfunction]
fn multiplier_table(geom: &PyGeometry, j_max: usize, tau: f64) -> PyResult<Vec<(usize, f64)>> {
    Ok(MultiplierTable::shifted(&geom.0, j_max, tau).map_err(err)?.values.into_iter().collect())
}

/// Injectivity report as a JSON string.
#[pyfunction]
#[pyo3(signature = (geom, shifts, j_max=64, zero_tol=DEFAULT_ZERO_TOL))]
fn classify_shifts(geom: &PyGeometry, shifts: Vec<f64>, j_max: usize, zero_tol: f64) -> PyResult<String> {
    let report = injectivity::classify_shift_family(&geom.0, &shifts, j_max, zero_tol).map_err(err)?;
    Ok(report.to_json().to_string())
}

/// Sorted `(t, j)` pairs with `cos 2t` a root of the degree-`j` condition.
#[pyfunction]
fn noninjective_shifts(geom: &PyGeometry, j_max: usize) -> PyResult<Vec<(f64, usize)>> {
    injectivity::noninjective_shifts(&geom.0, j_max).map_err(err)
}

#[pyfunction]
fn max_gap(shifts: Vec<(f64, usize)>) -> f64 {
    injectivity::max_gap(&shifts)
}

#[pyfunction]
fn spectral_forward(f: &PySphereFunction, tau: f64) -> PyResult<PyInducedCoefficients> {
    injectivity::spectral_forward(&f.0, tau).map(PyInducedCoefficients).map_err(err)
}

/// `(function, blocked degrees)`.
#[pyfunction]
#[pyo3(signature = (coeffs, floor=DEFAULT_INVERSION_FLOOR))]
fn spectral_invert(coeffs: &PyInducedCoefficients, floor: f64) -> PyResult<(PySphereFunction, Vec<usize>)> {
    let inv = injectivity::spectral_invert(&coeffs.0, floor).map_err(err)?;
    Ok((PySphereFunction(inv.function), inv.blocked))
}

/// Largest `|M_τ Y_{j0}|` over random frames, at `τ = sin t`.
#[pyfunction]
#[pyo3(signature = (geom, t, j0, frames=10, seed=0))]
fn kernel_witness(geom: &PyGeometry, t: f64, j0: usize, frames: usize, seed: u64) -> PyResult<f64> {
    Ok(injectivity::kernel_witness(&geom.0, t, j0, frames, seed).map_err(err)?.max_abs)
}

/// Haar-random frame as `n + 1` rows of `n - k` columns.
#[pyfunction]
#[pyo3(signature = (geom, seed=0))]
fn sample_frame(geom: &PyGeometry, seed: u64) -> Vec<Vec<f64>> {
    let v = stiefel::sample_frame(&geom.0, &mut ChaCha8Rng::seed_from_u64(seed));
    v.matrix().row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// `(M_τ f)(v)` by product quadrature exact to the band limit of `f`.
#[pyfunction]
fn bispherical_mean(f: &PySphereFunction, frame: Vec<Vec<f64>>, tau: f64) -> PyResult<f64> {
    let geom = f.0.geom();
    let cols = frame.first().map_or(0, Vec::len);
    if frame.len() != geom.n() + 1 || frame.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("frame must be a rectangular (n+1) x (n-k) list of rows"));
    }
    let v = StiefelFrame::new(DMatrix::from_fn(frame.len(), cols, |i, j| frame[i][j])).map_err(err)?;
    let mean = BisphericalMean::new(geom, f.0.band_limit()).map_err(err)?;
    let ev = f.0.evaluator();
    mean.mean(|x| ev.eval(x), &v, tau).map_err(err)
}

/// Runs the invariant suite; `[(name, status, detail)]`.
#[pyfunction]
#[pyo3(signature = (geom, seed=0, samples=20_000, band=4))]
fn run_verify(py: Python<'_>, geom: &PyGeometry, seed: u64, samples: usize, band: usize) -> PyResult<Vec<(String, String, String)>> {
    let opts = VerifyOptions { seed, samples, band };
    let report = py.detach(|| verify::run(&geom.0, &opts)).map_err(err)?;
    Ok(report
        .checks
        .iter()
        .map(|c| {
            let status = serde_json::to_value(c.status).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
            (c.name.to_string(), status, c.detail.clone())
        })
        .collect())
}

#[pymodule]
fn pyshiftfunk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGeometry>()?;
    m.add_class::<PySphereFunction>()?;
    m.add_class::<PyInducedCoefficients>()?;
    m.add_function(wrap_pyfunction!(jacobi_p, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_r, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_norm2_r, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_roots, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_jacobi, m)?)?;
    m.add_function(wrap_pyfunction!(m_hat_tau, m)?)?;
    m.add_function(wrap_pyfunction!(funk_multiplier, m)?)?;
    m.add_function(wrap_pyfunction!(cosine_multiplier, m)?)?;
    m.add_function(wrap_pyfunction!(multiplier_table, m)?)?;
    m.add_function(wrap_pyfunction!(classify_shifts, m)?)?;
    m.add_function(wrap_pyfunction!(noninjective_shifts, m)?)?;
    m.add_function(wrap_pyfunction!(max_gap, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_forward, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_invert, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_witness, m)?)?;
    m.add_function(wrap_pyfunction!(sample_frame, m)?)?;
    m.add_function(wrap_pyfunction!(bispherical_mean, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    m.add("DEFAULT_ZERO_TOL", DEFAULT_ZERO_TOL)?;
    m.add("DEFAULT_INVERSION_FLOOR", DEFAULT_INVERSION_FLOOR)?;
    Ok(())
}
