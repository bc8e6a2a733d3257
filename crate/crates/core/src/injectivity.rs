//! Injectivity of the shifted Funk transform `R_t` on even functions.
//!
//! `R_t` kills the even degree `j` exactly when `cos 2t` is a zero of
//! `P_{j/2}^{(σ,ρ)}`; a family of shifts is injective when no degree is
//! killed by all of them. Only degrees up to `J_max` are ever examined.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, ShiftParam};
use crate::harmonics::{BisphericalIndex, DegreeFilter, SphereFunction};
use crate::jacobi::{roots, RootSet, DEFAULT_ROOT_RESIDUAL_TOL};
use crate::multipliers::m_hat_tau;
use crate::stiefel::{sample_frame, BisphericalMean};

pub const DEFAULT_ZERO_TOL: f64 = 1e-9;
pub const DEFAULT_INVERSION_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    InjectiveUpToJmax { j_max: usize },
    /// Every shift (listed by position) annihilates degree `j0`.
    NonInjective { j0: usize, shifts: Vec<usize> },
    /// At degree `j` every shift is within root-location uncertainty of a zero.
    Inconclusive { j: usize, margin: f64 },
}

/// Margins of one even degree.
#[derive(Debug, Clone, Serialize)]
pub struct MarginRow {
    pub j: usize,
    /// Distance from `cos 2t_i` to the nearest root, per shift.
    pub margins: Vec<f64>,
    pub nearest_roots: Vec<f64>,
    pub max_root_residual: f64,
    /// Newton-step bound on the root locations.
    pub root_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InjectivityReport {
    pub geom: Geometry,
    pub shifts: Vec<ShiftParam>,
    pub j_max: usize,
    pub zero_tol: f64,
    pub verdict: Verdict,
    pub margins: Vec<MarginRow>,
}

impl InjectivityReport {
    pub fn is_non_injective(&self) -> bool {
        matches!(self.verdict, Verdict::NonInjective { .. })
    }

    pub fn is_injective_up_to_jmax(&self) -> bool {
        matches!(self.verdict, Verdict::InjectiveUpToJmax { .. })
    }

    /// Smallest over degrees of the largest per-shift margin.
    pub fn min_family_margin(&self) -> f64 {
        self.margins.iter().map(|r| r.margins.iter().copied().fold(0.0, f64::max)).fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data serializes")
    }
}

fn check_j_max(j_max: usize) -> Result<()> {
    if j_max % 2 == 1 {
        Err(Error::OddDegree { what: "J_max", j: j_max })
    } else {
        Ok(())
    }
}

fn open_shift(t: f64) -> Result<ShiftParam> {
    if !(t > 0.0 && t < FRAC_PI_2) {
        return Err(Error::domain(format!("shift t = {t} must lie in the open interval (0, pi/2)")));
    }
    ShiftParam::from_t(t)
}

/// Root sets of `P_{j/2}^{(σ,ρ)}` for even `2 <= j <= J_max`.
pub fn shift_root_table(geom: &Geometry, j_max: usize) -> Result<Vec<(usize, RootSet)>> {
    let params = geom.shift_jacobi();
    (2..=j_max).step_by(2).collect::<Vec<_>>().into_par_iter().map(|j| Ok((j, roots(params, j / 2)?))).collect()
}

fn root_error(set: &RootSet) -> f64 {
    let params = set.params;
    let m = set.degree;
    set.roots
        .iter()
        .map(|&x| {
            let d = params.eval_p_derivative(m, x).abs();
            let p = params.eval_p(m, x).abs();
            if d > 0.0 {
                p / d + 4.0 * f64::EPSILON
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

fn nearest(roots: &[f64], x: f64) -> (f64, f64) {
    let i = roots.partition_point(|&r| r < x);
    [i.checked_sub(1), (i < roots.len()).then_some(i)]
        .into_iter()
        .flatten()
        .map(|i| ((roots[i] - x).abs(), roots[i]))
        .fold((f64::INFINITY, f64::NAN), |a, b| if b.0 < a.0 { b } else { a })
}

/// Classify a family of shifts `t_1, ..., t_ℓ` up to degree `J_max`.
pub fn classify_shift_family(geom: &Geometry, shifts: &[f64], j_max: usize, zero_tol: f64) -> Result<InjectivityReport> {
    if shifts.is_empty() {
        return Err(Error::domain("shift family must contain at least one shift"));
    }
    check_j_max(j_max)?;
    let params: Vec<ShiftParam> = shifts.iter().map(|&t| open_shift(t)).collect::<Result<_>>()?;
    let table = shift_root_table(geom, j_max)?;

    let rows: Vec<MarginRow> = table
        .iter()
        .map(|(j, set)| {
            let (margins, nearest_roots) = params.iter().map(|p| nearest(&set.roots, p.cos_2t())).unzip();
            let certified = set.is_certified(DEFAULT_ROOT_RESIDUAL_TOL);
            MarginRow {
                j: *j,
                margins,
                nearest_roots,
                max_root_residual: set.max_residual(),
                root_error: if certified { root_error(set) } else { f64::INFINITY },
            }
        })
        .collect();

    let all_zero = rows.iter().find(|r| r.margins.iter().all(|&m| m <= zero_tol));
    let verdict = if let Some(row) = all_zero {
        Verdict::NonInjective { j0: row.j, shifts: (0..params.len()).collect() }
    } else if let Some(row) = rows.iter().find(|r| r.margins.iter().all(|&m| m <= zero_tol + r.root_error)) {
        Verdict::Inconclusive { j: row.j, margin: row.margins.iter().copied().fold(0.0, f64::max) }
    } else {
        Verdict::InjectiveUpToJmax { j_max }
    };
    Ok(InjectivityReport { geom: geom.clone(), shifts: params, j_max, zero_tol, verdict, margins: rows })
}

pub fn classify_shift(geom: &Geometry, t: f64, j_max: usize, zero_tol: f64) -> Result<InjectivityReport> {
    classify_shift_family(geom, &[t], j_max, zero_tol)
}

/// Every non-injective shift `t = ½ arccos x` with `x` a root of
/// `P_{j/2}^{(σ,ρ)}`, `j <= J_max`, sorted by `t`, with its degree.
pub fn noninjective_shifts(geom: &Geometry, j_max: usize) -> Result<Vec<(f64, usize)>> {
    check_j_max(j_max)?;
    let mut out: Vec<(f64, usize)> = shift_root_table(geom, j_max)?
        .into_iter()
        .flat_map(|(j, set)| set.roots.into_iter().map(move |x| (0.5 * x.acos(), j)))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(out)
}

/// Largest gap between consecutive points of `{0} ∪ shifts ∪ {π/2}`.
pub fn max_gap(shifts: &[(f64, usize)]) -> f64 {
    let mut ts: Vec<f64> = std::iter::once(0.0).chain(shifts.iter().map(|s| s.0)).chain([FRAC_PI_2]).collect();
    ts.sort_by(f64::total_cmp);
    ts.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Coefficients of `M_τ f` in the induced harmonics `Ŷ_{j,λ}`.
///
/// JSON: the [`SphereFunction`] layout plus `"tau"`.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedCoefficients {
    pub geom: Geometry,
    pub tau: f64,
    pub band_limit: usize,
    pub coeffs: BTreeMap<BisphericalIndex, f64>,
}

impl InducedCoefficients {
    pub fn to_json(&self) -> serde_json::Value {
        let mut f = SphereFunction::zero(self.geom.clone(), self.band_limit);
        for (idx, c) in &self.coeffs {
            f.set(*idx, *c).expect("indices come from a function of this band limit");
        }
        let mut value = f.to_json();
        value["tau"] = serde_json::json!(self.tau);
        value
    }

    pub fn from_json(mut value: serde_json::Value) -> Result<Self> {
        let tau = value
            .as_object_mut()
            .and_then(|o| o.remove("tau"))
            .and_then(|t| t.as_f64())
            .ok_or_else(|| Error::domain("induced coefficients need a numeric \"tau\""))?;
        check_tau(tau)?;
        let f = SphereFunction::from_json(value)?;
        Ok(InducedCoefficients { geom: f.geom().clone(), tau, band_limit: f.band_limit(), coeffs: f.coeffs().clone() })
    }
}

impl Serialize for InducedCoefficients {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::domain(format!("tau must lie in [0, 1], got {tau}")))
    }
}

/// `M_τ f = Σ m̂_τ(j) c_{j,λ} Ŷ_{j,λ}` over even `j`.
pub fn spectral_forward(f: &SphereFunction, tau: f64) -> Result<InducedCoefficients> {
    check_tau(tau)?;
    let geom = Geometry::with_cache(f.geom().n(), f.geom().k(), f.band_limit())?;
    let mut coeffs = BTreeMap::new();
    for (idx, c) in f.coeffs() {
        let j = idx.degree();
        if j % 2 == 0 {
            coeffs.insert(*idx, m_hat_tau(&geom, j, tau)? * c);
        }
    }
    Ok(InducedCoefficients { geom: f.geom().clone(), tau, band_limit: f.band_limit(), coeffs })
}

#[derive(Debug, Clone)]
pub struct Inversion {
    pub function: SphereFunction,
    /// Degrees where `|m̂_τ(j)| <= floor`; their coefficients are left out.
    pub blocked: Vec<usize>,
}

pub fn spectral_invert(coeffs: &InducedCoefficients, floor: f64) -> Result<Inversion> {
    let geom = Geometry::with_cache(coeffs.geom.n(), coeffs.geom.k(), coeffs.band_limit)?;
    let mut function = SphereFunction::zero(coeffs.geom.clone(), coeffs.band_limit);
    let mut blocked = Vec::new();
    for (idx, c) in &coeffs.coeffs {
        let j = idx.degree();
        let m = m_hat_tau(&geom, j, coeffs.tau)?;
        if m.abs() <= floor {
            if blocked.last() != Some(&j) {
                blocked.push(j);
            }
            continue;
        }
        function.set(*idx, c / m)?;
    }
    Ok(Inversion { function, blocked })
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub t: f64,
    pub j0: usize,
    pub values: Vec<f64>,
    pub max_abs: f64,
}

/// Evaluate `M_{sin t} Y_{j0}` for a random degree-`j0` harmonic at random frames.
pub fn kernel_witness(geom: &Geometry, t: f64, j0: usize, frames: usize, seed: u64) -> Result<WitnessReport> {
    let shift = open_shift(t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = SphereFunction::random(geom.clone(), j0, DegreeFilter::Exactly(j0), &mut rng);
    let ev = y.evaluator();
    let mean = BisphericalMean::new(geom, j0)?;
    let values = (0..frames)
        .map(|_| mean.mean(|x| ev.eval(x), &sample_frame(geom, &mut rng), shift.tau))
        .collect::<Result<Vec<_>>>()?;
    let max_abs = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(WitnessReport { t, j0, values, max_abs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn third_shift() -> f64 {
        0.5 * (1.0f64 / 3.0).acos()
    }

    #[test]
    fn two_sphere_degree_two_zero() {
        let g = Geometry::new(2, 1).unwrap();
        let r = classify_shift(&g, third_shift(), 8, DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(r.verdict, Verdict::NonInjective { j0: 2, shifts: vec![0] });
        assert!(r.margins[0].margins[0] < 1e-15);
    }

    #[test]
    fn small_shift_is_injective() {
        for n in 2..=5 {
            for k in 1..n {
                let g = Geometry::new(n, k).unwrap();
                let r = classify_shift(&g, 1e-3, 32, DEFAULT_ZERO_TOL).unwrap();
                assert!(r.is_injective_up_to_jmax(), "({n},{k})");
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = Geometry::new(2, 1).unwrap();
        assert!(classify_shift(&g, 0.0, 8, 1e-9).is_err());
        assert!(classify_shift(&g, FRAC_PI_2, 8, 1e-9).is_err());
        assert!(classify_shift(&g, 0.3, 7, 1e-9).is_err());
        assert!(classify_shift_family(&g, &[], 8, 1e-9).is_err());
    }

    #[test]
    fn noninjective_shift_enumeration() {
        let g = Geometry::new(2, 1).unwrap();
        let s = noninjective_shifts(&g, 2).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0].0 - third_shift()).abs() < 1e-15);
        assert_eq!(s[0].1, 2);
        for n in 2..=4 {
            for k in 1..n {
                let g = Geometry::new(n, k).unwrap();
                let s = noninjective_shifts(&g, 20).unwrap();
                assert_eq!(s.len(), (2..=20).step_by(2).map(|j| j / 2).sum::<usize>());
                assert!(s.windows(2).all(|w| w[0].0 <= w[1].0));
            }
        }
    }

    #[test]
    fn family_rules() {
        let g = Geometry::new(2, 1).unwrap();
        let t = third_shift();
        let dup = classify_shift_family(&g, &[t, t], 16, DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(dup.verdict, Verdict::NonInjective { j0: 2, shifts: vec![0, 1] });
        let mixed = classify_shift_family(&g, &[t, 0.3], 16, DEFAULT_ZERO_TOL).unwrap();
        assert!(mixed.is_injective_up_to_jmax());
    }

    #[test]
    fn blocked_inversion() {
        let g = Geometry::new(2, 1).unwrap();
        let tau = third_shift().sin();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = SphereFunction::random(g.clone(), 6, DegreeFilter::Even, &mut rng);
        let fwd = spectral_forward(&f, tau).unwrap();
        let inv = spectral_invert(&fwd, DEFAULT_INVERSION_FLOOR).unwrap();
        assert_eq!(inv.blocked, vec![2]);
        let expected = f.filter_degrees(|j| j != 2);
        assert!(inv.function.max_coeff_diff(&expected) < 1e-10);
    }

    #[test]
    fn odd_functions_vanish() {
        let g = Geometry::new(3, 1).unwrap();
        let f = SphereFunction::random(g, 5, DegreeFilter::Odd, &mut ChaCha8Rng::seed_from_u64(2));
        let fwd = spectral_forward(&f, 0.4).unwrap();
        assert!(fwd.coeffs.is_empty());
        let inv = spectral_invert(&fwd, DEFAULT_INVERSION_FLOOR).unwrap();
        assert!(inv.function.coeffs().is_empty());
    }

    #[test]
    fn induced_coefficients_json() {
        let g = Geometry::new(3, 2).unwrap();
        let f = SphereFunction::random(g, 4, DegreeFilter::Even, &mut ChaCha8Rng::seed_from_u64(4));
        let fwd = spectral_forward(&f, 0.25).unwrap();
        let json = fwd.to_json();
        assert_eq!(json["tau"], 0.25);
        assert_eq!(InducedCoefficients::from_json(json).unwrap(), fwd);
        assert!(spectral_forward(&f, 1.5).is_err());
    }

    #[test]
    fn max_gap_includes_endpoints() {
        assert!((max_gap(&[]) - FRAC_PI_2).abs() < 1e-15);
        assert!((max_gap(&[(0.5, 2)]) - (FRAC_PI_2 - 0.5)).abs() < 1e-15);
    }
}
