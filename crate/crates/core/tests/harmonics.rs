use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use shiftfunk::harmonics::{spherical_poly, DegreeFilter};
use shiftfunk::jacobi::{gauss_jacobi, JacobiParams};
use shiftfunk::special::sphere_area;
use shiftfunk::{dim_harmonics, Geometry, SphereBasis, SphereFunction, SphereGrid};

fn random_point(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..=dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

fn geometries(max_n: usize) -> Vec<Geometry> {
    (2..=max_n).flat_map(|n| (1..n).map(move |k| Geometry::new(n, k).unwrap())).collect()
}

/// Basis values at every grid point as a (points × members) matrix scaled by √w.
fn weighted_design(basis: &SphereBasis, grid: &SphereGrid) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(grid.len(), basis.len());
    for (i, (x, w)) in grid.iter().enumerate() {
        let sw = w.sqrt();
        for (p, v) in basis.eval_all(x).into_iter().enumerate() {
            a[(i, p)] = sw * v;
        }
    }
    a
}

#[test]
fn gram_matrix_is_identity() {
    for g in geometries(4) {
        let band = 6;
        let basis = SphereBasis::for_geometry(&g, band);
        let grid = SphereGrid::for_geometry(&g, 2 * band).unwrap();
        let a = weighted_design(&basis, &grid);
        let gram = a.transpose() * &a;
        let defect = (gram - DMatrix::identity(basis.len(), basis.len())).amax();
        assert!(defect <= 1e-10, "({},{}) defect {defect:e}", g.n(), g.k());
    }
}

#[test]
fn gram_matrix_on_five_sphere() {
    for k in 1..5 {
        let g = Geometry::new(5, k).unwrap();
        let basis = SphereBasis::for_geometry(&g, 4);
        let grid = SphereGrid::for_geometry(&g, 8).unwrap();
        let a = weighted_design(&basis, &grid);
        let defect = (a.transpose() * &a - DMatrix::identity(basis.len(), basis.len())).amax();
        assert!(defect <= 1e-10, "(5,{k}) defect {defect:e}");
    }
}

#[test]
fn addition_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for g in geometries(5) {
        let n = g.n();
        let basis = SphereBasis::for_geometry(&g, 6);
        for _ in 0..20 {
            let x = random_point(n, &mut rng);
            let y = random_point(n, &mut rng);
            let (ux, uy) = (basis.eval_all(&x), basis.eval_all(&y));
            let dot: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            for j in 0..=6 {
                let sum: f64 = basis.degree_range(j).map(|p| ux[p] * uy[p]).sum();
                let expected = dim_harmonics(n, j) as f64 * spherical_poly(n, j, dot).unwrap();
                assert!((sum - expected).abs() <= 1e-9, "({n},{}) j={j}: {sum} vs {expected}", g.k());
            }
        }
    }
}

// ω_j = σ_{n-1}/σ_n ∫ Ω(t) P_j(t) (1-t²)^{(n-2)/2} dt.
#[test]
fn funk_hecke_for_t_squared() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for g in geometries(4) {
        let n = g.n();
        let half = n as f64 / 2.0 - 1.0;
        let rule = gauss_jacobi(JacobiParams::new(half, half).unwrap(), 8).unwrap();
        let ratio = sphere_area(n - 1) / sphere_area(n);
        let basis = SphereBasis::for_geometry(&g, 4);
        let grid = SphereGrid::for_geometry(&g, 6).unwrap();
        for _ in 0..3 {
            let y = random_point(n, &mut rng);
            for p in 0..basis.len() {
                let j = basis.degree_of(p);
                let omega = ratio * rule.integrate(|t| t * t * spherical_poly(n, j, t).unwrap());
                let lhs = grid.integrate(|x| {
                    let d: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
                    d * d * basis.eval(p, x)
                });
                let rhs = omega * basis.eval(p, &y);
                assert!((lhs - rhs).abs() <= 1e-9, "({n},{}) member {p} j={j}", g.k());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parseval(seed in any::<u64>(), gi in 0usize..6, band in 0usize..5) {
        let g = geometries(4)[gi].clone();
        let f = SphereFunction::random(g.clone(), band, DegreeFilter::All, &mut ChaCha8Rng::seed_from_u64(seed));
        let grid = SphereGrid::for_geometry(&g, 2 * band).unwrap();
        let ev = f.evaluator();
        let grid_norm = grid.integrate(|x| ev.eval(x).powi(2));
        prop_assert!((grid_norm - f.norm2()).abs() <= 1e-10 * f.norm2().max(1.0));
    }

    #[test]
    fn analysis_round_trip(seed in any::<u64>(), gi in 0usize..6, band in 0usize..5) {
        let g = geometries(4)[gi].clone();
        let f = SphereFunction::random(g.clone(), band, DegreeFilter::All, &mut ChaCha8Rng::seed_from_u64(seed));
        let ev = f.evaluator();
        let a = shiftfunk::analyze(|x| ev.eval(x), &g, band).unwrap();
        prop_assert!(a.band_limited);
        prop_assert!(a.function.max_coeff_diff(&f) <= 1e-10);
    }

    #[test]
    fn degree_counts(gi in 0usize..10, band in 0usize..9) {
        let g = geometries(5)[gi].clone();
        let basis = SphereBasis::for_geometry(&g, band);
        for j in 0..=band {
            prop_assert_eq!(basis.degree_range(j).len() as u64, dim_harmonics(g.n(), j));
        }
    }
}
