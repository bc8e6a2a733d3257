#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;
use shiftfunk::stiefel::{GrassmannFunction, StiefelFrame};
use shiftfunk::Geometry;

pub fn geometries(max_n: usize) -> Vec<Geometry> {
    (2..=max_n).flat_map(|n| (1..n).map(move |k| Geometry::new(n, k).unwrap())).collect()
}

pub fn random_point(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..=dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

/// Random right-invariant function of the projector `P = v vᵀ`:
/// `φ(v) = c₀ + Σ cᵢ uᵢᵀ P uᵢ + d (aᵀ P b)²`.
pub fn random_grassmann(geom: &Geometry, rng: &mut impl Rng) -> GrassmannFunction {
    let dim = geom.n();
    let terms: Vec<(f64, Vec<f64>)> =
        (0..3).map(|_| (rng.sample::<f64, _>(StandardNormal), random_point(dim, rng))).collect();
    let (a, b) = (random_point(dim, rng), random_point(dim, rng));
    let (c0, d): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
    GrassmannFunction::new("random projector polynomial", true, move |v: &StiefelFrame| {
        let m = v.matrix();
        let bilinear = |x: &[f64], y: &[f64]| -> f64 {
            (0..m.ncols())
                .map(|c| {
                    let px: f64 = m.column(c).iter().zip(x).map(|(p, q)| p * q).sum();
                    let py: f64 = m.column(c).iter().zip(y).map(|(p, q)| p * q).sum();
                    px * py
                })
                .sum()
        };
        c0 + terms.iter().map(|(c, u)| c * bilinear(u, u)).sum::<f64>() + d * bilinear(&a, &b).powi(2)
    })
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// 1% critical value of the two-sample KS statistic.
pub fn ks_critical_1pct(na: usize, nb: usize) -> f64 {
    let (na, nb) = (na as f64, nb as f64);
    1.628 * ((na + nb) / (na * nb)).sqrt()
}
