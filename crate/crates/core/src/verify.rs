//! The invariant suite run by `shiftfunk verify`: one named check per
//! property, each with its own deterministic random stream.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{dim_harmonics, dim_harmonics_gamma, Geometry, ShiftParam};
use crate::harmonics::{spherical_poly, DegreeFilter, SphereBasis, SphereFunction, SphereGrid};
use crate::injectivity::{
    classify_shift, classify_shift_family, kernel_witness, noninjective_shifts, spectral_forward, spectral_invert,
    Verdict, DEFAULT_INVERSION_FLOOR, DEFAULT_ZERO_TOL,
};
use crate::jacobi::{gauss_jacobi, roots, JacobiParams};
use crate::multipliers::{funk_multiplier, m_hat_tau, self_test, Kernel, MultiplierTable};
use crate::special::ln_gamma;
use crate::stiefel::{
    dual_mean, haar_orthogonal, haar_rotation, intertwine_a, monte_carlo, monte_carlo_many, reconstruct_from_induced,
    rotation_to, sample_dual_frame, sample_frame, BisphericalMean, GrassmannFunction, InducedHarmonic, InducedSystem,
    McEstimate, StiefelFrame,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl Check {
    pub fn line(&self) -> String {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        format!("{tag} {:<40} {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Monte-Carlo sample count of the stochastic checks.
    pub samples: usize,
    /// Band limit of the random test functions.
    pub band: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 0, samples: 20_000, band: 4 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub geom: Geometry,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Fail).count()
    }
}

struct Ctx {
    geom: Geometry,
    opts: VerifyOptions,
}

/// `(passed, detail, skipped)`.
type Outcome = Result<(bool, String, bool)>;

fn ok(passed: bool, detail: String) -> Outcome {
    Ok((passed, detail, false))
}

fn skip(detail: &str) -> Outcome {
    Ok((true, detail.to_string(), true))
}

type CheckFn = fn(&Ctx, &mut ChaCha8Rng) -> Outcome;

const SUITE: &[(&str, CheckFn)] = &[
    ("geometry.admissible", geometry_admissible),
    ("geometry.c_nk_normalization", geometry_c_nk),
    ("geometry.kappa_alpha_zero", geometry_kappa_zero),
    ("geometry.dim_integral", geometry_dim_integral),
    ("geometry.kappa_finite", geometry_kappa_finite),
    ("geometry.shift_substitution", geometry_shift),
    ("jacobi.roots_interlace", jacobi_interlace),
    ("jacobi.root_residuals", jacobi_residuals),
    ("jacobi.reflection_symmetry", jacobi_reflection),
    ("jacobi.quadrature_norms", jacobi_norms),
    ("jacobi.quadrature_exactness", jacobi_exactness),
    ("harmonics.index_ranges", harmonics_indices),
    ("harmonics.grid_exactness", harmonics_grid),
    ("harmonics.gram_identity", harmonics_gram),
    ("harmonics.parseval", harmonics_parseval),
    ("harmonics.funk_hecke", harmonics_funk_hecke),
    ("harmonics.degree_count", harmonics_degree_count),
    ("harmonics.addition_formula", harmonics_addition),
    ("harmonics.json_round_trip", harmonics_json),
    ("stiefel.frame_orthonormal", stiefel_frames),
    ("stiefel.rotation_determinant", stiefel_rotations),
    ("stiefel.grassmann_invariance", stiefel_grassmann),
    ("stiefel.right_invariance", stiefel_right_invariance),
    ("stiefel.completion_independence", stiefel_completion),
    ("stiefel.funk_hecke_type", stiefel_funk_hecke_type),
    ("stiefel.funk_radon_limit", stiefel_funk_radon),
    ("stiefel.induced_addition", stiefel_induced_addition),
    ("stiefel.induced_orthonormality", stiefel_induced_orthonormality),
    ("stiefel.dual_identity", stiefel_dual_identity),
    ("stiefel.reconstruction", stiefel_reconstruction),
    ("stiefel.duality", stiefel_duality),
    ("stiefel.contraction", stiefel_contraction),
    ("stiefel.dual_contraction", stiefel_dual_contraction),
    ("stiefel.young_bound", stiefel_young),
    ("multipliers.funk_consistency", multipliers_funk),
    ("multipliers.parity_bridge", multipliers_parity),
    ("multipliers.bounded_by_one", multipliers_bounded),
    ("multipliers.sphere_case", multipliers_sphere),
    ("multipliers.table_conventions", multipliers_table),
    ("multipliers.cosine_quadrature", multipliers_cosine),
    ("injectivity.report_invariants", injectivity_report),
    ("injectivity.spectral_round_trip", injectivity_round_trip),
    ("injectivity.spectral_geometric_agreement", injectivity_agreement),
    ("injectivity.verdict_monotone", injectivity_monotone),
    ("injectivity.witness_independent_of_zero_tol", injectivity_witness),
    ("cli.seed_determinism", cli_determinism),
];

/// Names of every check, in run order.
pub fn check_names() -> Vec<&'static str> {
    SUITE.iter().map(|(n, _)| *n).collect()
}

pub fn run(geom: &Geometry, opts: &VerifyOptions) -> Result<VerifyReport> {
    run_with(geom, opts, |_| {})
}

/// Like [`run`], calling `progress` after each check.
pub fn run_with(geom: &Geometry, opts: &VerifyOptions, mut progress: impl FnMut(&Check)) -> Result<VerifyReport> {
    let ctx = Ctx { geom: Geometry::with_cache(geom.n(), geom.k(), 256)?, opts: *opts };
    let mut checks = Vec::with_capacity(SUITE.len());
    for (i, (name, f)) in SUITE.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(i as u64);
        let check = match f(&ctx, &mut rng) {
            Ok((_, detail, true)) => Check { name, status: Status::Skip, detail },
            Ok((passed, detail, false)) => {
                Check { name, status: if passed { Status::Pass } else { Status::Fail }, detail }
            }
            Err(e) => Check { name, status: Status::Fail, detail: format!("error: {e}") },
        };
        progress(&check);
        checks.push(check);
    }
    Ok(VerifyReport { geom: geom.clone(), seed: opts.seed, samples: opts.samples, checks })
}

fn random_point(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..=dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

/// `|estimate - target| / stderr`, zero within round-off of an exact estimate.
fn z_abs(e: &McEstimate, target: f64) -> f64 {
    let d = (e.estimate - target).abs();
    if d <= 1e-12 * target.abs().max(1.0) {
        0.0
    } else {
        d / e.stderr
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `φ(v) = c₀ + Σ cᵢ |vᵀuᵢ|² + d (aᵀ v vᵀ b)²`, right-invariant.
fn random_grassmann(geom: &Geometry, rng: &mut impl Rng) -> GrassmannFunction {
    let dim = geom.n();
    let terms: Vec<(f64, Vec<f64>)> =
        (0..3).map(|_| (rng.sample::<f64, _>(StandardNormal), random_point(dim, rng))).collect();
    let (a, b) = (random_point(dim, rng), random_point(dim, rng));
    let (c0, d): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
    GrassmannFunction::new("projector polynomial", true, move |v: &StiefelFrame| {
        let m = v.matrix();
        let pa: Vec<f64> = m.column_iter().map(|c| dot(c.as_slice(), &a)).collect();
        let pb: Vec<f64> = m.column_iter().map(|c| dot(c.as_slice(), &b)).collect();
        c0 + terms.iter().map(|(c, u)| c * v.projection_norm2(u)).sum::<f64>() + d * dot(&pa, &pb).powi(2)
    })
}

fn even_degrees(band: usize) -> impl Iterator<Item = usize> {
    (0..=band).step_by(2)
}

fn geometry_admissible(c: &Ctx, _: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    ok(g.k() >= 1 && g.k() < g.n() && g.rho() > -1.0 && g.sigma() > -1.0, format!("rho={} sigma={}", g.rho(), g.sigma()))
}

// ∫₀¹ ρ(τ) dτ = ∫₀^{π/2} cos^k θ sin^{n-k-1} θ dθ with τ = sin θ.
fn geometry_c_nk(c: &Ctx, _: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let rule = gauss_jacobi(JacobiParams::new(0.0, 0.0)?, 48)?;
    let integral = FRAC_PI_2 / 2.0
        * rule.integrate(|s| {
            let th = (s + 1.0) * PI / 4.0;
            th.cos().powi(g.k() as i32) * th.sin().powi((g.n() - g.k() - 1) as i32)
        });
    let err = (g.c_nk() * integral - 1.0).abs();
    ok(err <= 1e-12, format!("|c_nk * int rho - 1| = {err:.2e}"))
}

fn geometry_kappa_zero(c: &Ctx, _: &mut ChaCha8Rng) -> Outcome {
    let err = (c.geom.kappa(0)? - 1.0).abs().max((c.geom.alpha(0)? - 1.0).abs());
    ok(err <= 1e-12, format!("max deviation {err:.2e}"))
}

fn geometry_dim_integral(c: &Ctx, _: &mut ChaCha8Rng) -> Outcome {
    let n = c.geom.n();
    let mut worst: f64 = 0.0;
    for j in 0..=64 {
        let q = dim_harmonics_gamma(n, j);
        let d = dim_harmonics(n, j);
        if d == 0 || q.round() as u64 != d {
            return ok(false, format!("j={j}: gamma quotient {q} vs {d}"));
        }
        worst = worst.max((q - q.round()).abs());
    }
    ok(worst <= 1e-9, format!("max distance to integer {worst:.2e} over j <= 64"))
}

fn geometry_kappa_finite(c: &Ctx, _: &mut ChaCha8Rng) -> Outcome {
    for j in even_degrees(256) {
        let kappa = c.geom.kappa(j)?;
        if !(kappa.is_finite() && kappa > 0.0) {
            return ok(false, format!("kappa_{j} = {kappa}"));
        }
    }
    ok(true, "finite and positive for even j <= 256".into())
}

fn geometry_shift(_: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let t = rng.random::<f64>() * FRAC_PI_2;
        let s = ShiftParam::from_t(t)?;
        if s.tau != t.sin() {
            return ok(false, format!("tau != sin t at t={t}"));
        }
        worst = worst.max((2.0 * s.tau * s.tau - 1.0 + s.cos_2t()).abs());
    }
    ok(worst <= 4.0 * f64::EPSILON, format!("|2 tau^2 - 1 + cos 2t| <= {worst:.2e}"))
}

fn param_sets(g: &Geometry) -> [JacobiParams; 2] {
    [g.jacobi(), g.shift_jacobi()]
}

fn jacobi_interlace(c: &Ctx, _: &mut ChaCha8Rng) -> Outcome {
    for p in param_sets(&c.geom) {
        let mut prev = roots(p, 1)?.roots;
        for m in 2..=101 {
            let next = roots(p, m)?.roots;
            let fine = prev.iter().enumerate().all(|(i, x)| next[i] < *x && *x < next[i + 1]);
            if !fine {
                return ok(false, format!("({},{}) m={}", p.rho, p.sigma, m - 1));
            }
            prev = next;
        }
    }
    ok(true, "roots(m) interleave roots(m+1), m <= 100".into())
}

fn jacobi_residuals(c: &Ctx, _: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for p in param_sets(&c.geom) {
        for m in 1..=100 {
            for x in roots(p, m)?.roots {
                worst = worst.max(p.eval_p(m, x).abs() / p.eval_p_derivative(m, x).abs());
            }
        }
    }
    ok(worst <= 1e-10, format!("max |P/P'| at roots {worst:.2e}"))
}

fn jacobi_reflection(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for p in param_sets(&c.geom) {
        let q = p.swapped();
        for _ in 0..100 {
            let x = 2.0 * rng.random::<f64>() - 1.0;
            for m in 0..=20 {
                let lhs = p.eval_p(m, -x);
                let rhs = if m % 2 == 0 { 1.0 } else { -1.0 } * q.eval_p(m, x);
                worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
            }
        }
    }
    ok(worst <= 1e-12, format!("max relative deviation {worst:.2e}"))
}

fn jacobi_norms(c: &Ctx, _: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for p in param_sets(&c.geom) {
        let rule = gauss_jacobi(p, 21)?;
        for m in 0..=20 {
            let q = rule.integrate(|x| p.eval_r(m, x).powi(2));
            worst = worst.max((q - p.norm2_r(m)).abs() / p.norm2_r(m));
        }
    }
    ok(worst <= 1e-12, format!("max relative deviation {worst:.2e}"))
}

fn jacobi_exactness(c: &Ctx, _: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for p in param_sets(&c.geom) {
        let n = 10;
        let rule = gauss_jacobi(p, n)?;
        if !rule.nodes.windows(2).all(|w| w[0] < w[1]) || !rule.weights.iter().all(|w| *w > 0.0) {
            return ok(false, "nodes not increasing or weights not positive".into());
        }
        // (a+b+2+q) M_{q+1} = (b-a) M_q + q M_{q-1}
        let (a, b) = (p.rho, p.sigma);
        let (mut prev, mut cur) = (0.0, p.total_mass());
        for q in 0..2 * n {
            let got = rule.integrate(|x| x.powi(q as i32));
            worst = worst.max((got - cur).abs() / p.total_mass());
            let next = ((b - a) * cur + q as f64 * prev) / (a + b + 2.0 + q as f64);
            prev = cur;
            cur = next;
        }
    }
    ok(worst <= 1e-12, format!("max moment error {worst:.2e}, N=10, p <= 19"))
}

fn harmonics_indices(c: &Ctx, _: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let basis = SphereBasis::for_geometry(g, c.opts.band);
    for idx in basis.indices() {
        let fine = idx.degree() <= c.opts.band
            && (1..=dim_harmonics(g.k(), idx.r) as usize).contains(&idx.mu)
            && (1..=dim_harmonics(g.n() - g.k() - 1, idx.s) as usize).contains(&idx.nu);
        if !fine {
            return ok(false, format!("bad index {idx}"));
        }
    }
    ok(true, format!("{} indices", basis.len()))
}

// ∫ (x·y)^{2p} d_*x = Γ((n+1)/2) Γ(p+1/2) / (√π Γ(p+(n+1)/2)).
fn harmonics_grid(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let n = c.geom.n();
    let order = 2 * c.opts.band;
    let grid = SphereGrid::for_geometry(&c.geom, order)?;
    let norm = grid.iter().map(|(x, _)| (dot(x, x).sqrt() - 1.0).abs()).fold(0.0, f64::max);
    let h = (n as f64 + 1.0) / 2.0;
    let mut worst = (grid.total_weight() - 1.0).abs();
    for _ in 0..5 {
        let y = random_point(n, rng);
        for p in 0..=order / 2 {
            let pf = p as f64;
            let exact = (ln_gamma(h) + ln_gamma(pf + 0.5) - 0.5 * PI.ln() - ln_gamma(pf + h)).exp();
            worst = worst.max((grid.integrate(|x| dot(x, &y).powi(2 * p as i32)) - exact).abs());
        }
    }
    ok(norm <= 1e-14 && worst <= 1e-12, format!("point norm defect {norm:.2e}, moment error {worst:.2e}"))
}

fn design_gram_defect(basis: &SphereBasis, grid: &SphereGrid) -> f64 {
    let rows: Vec<Vec<f64>> = grid.iter().map(|(x, _)| basis.eval_all(x)).collect();
    let mut worst: f64 = 0.0;
    for a in 0..basis.len() {
        for b in a..basis.len() {
            let g: f64 = rows.iter().zip(grid.weights()).map(|(r, w)| w * r[a] * r[b]).sum();
            worst = worst.max((g - if a == b { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

fn harmonics_gram(c: &Ctx, _: &mut ChaCha8Rng) -> Outcome {
    let basis = SphereBasis::for_geometry(&c.geom, c.opts.band);
    let grid = SphereGrid::for_geometry(&c.geom, 2 * c.opts.band)?;
    let defect = design_gram_defect(&basis, &grid);
    ok(defect <= 1e-10, format!("max |G - I| = {defect:.2e}, J={}", c.opts.band))
}

fn harmonics_parseval(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let grid = SphereGrid::for_geometry(&c.geom, 2 * c.opts.band)?;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let f = SphereFunction::random(c.geom.clone(), c.opts.band, DegreeFilter::All, rng);
        let ev = f.evaluator();
        let g = grid.integrate(|x| ev.eval(x).powi(2));
        worst = worst.max((g - f.norm2()).abs() / f.norm2().max(1.0));
    }
    ok(worst <= 1e-10, format!("max relative defect {worst:.2e}"))
}

// ω_j = σ_{n-1}/σ_n ∫ t² P_j(t) (1-t²)^{(n-2)/2} dt.
fn harmonics_funk_hecke(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let n = g.n();
    let half = n as f64 / 2.0 - 1.0;
    let rule = gauss_jacobi(JacobiParams::new(half, half)?, 8)?;
    let ratio = g.sphere_area(n - 1) / g.sphere_area(n);
    let band = c.opts.band.min(4);
    let basis = SphereBasis::for_geometry(g, band);
    let grid = SphereGrid::for_geometry(g, band + 2)?;
    let mut worst: f64 = 0.0;
    for _ in 0..2 {
        let y = random_point(n, rng);
        for p in 0..basis.len() {
            let j = basis.degree_of(p);
            let omega = ratio * rule.integrate(|t| t * t * spherical_poly(n, j, t).unwrap_or(f64::NAN));
            let lhs = grid.integrate(|x| dot(x, &y).powi(2) * basis.eval(p, x));
            worst = worst.max((lhs - omega * basis.eval(p, &y)).abs());
        }
    }
    ok(worst <= 1e-9, format!("max error {worst:.2e}"))
}

fn harmonics_degree_count(c: &Ctx, _: &mut ChaCha8Rng) -> Outcome {
    let band = c.opts.band.max(8);
    let basis = SphereBasis::for_geometry(&c.geom, band);
    for j in 0..=band {
        let got = basis.degree_range(j).len() as u64;
        let want = dim_harmonics(c.geom.n(), j);
        if got != want {
            return ok(false, format!("j={j}: {got} members, d_n(j)={want}"));
        }
    }
    ok(true, format!("all j <= {band}"))
}

fn harmonics_addition(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let n = c.geom.n();
    let basis = SphereBasis::for_geometry(&c.geom, c.opts.band);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (x, y) = (random_point(n, rng), random_point(n, rng));
        let (ux, uy) = (basis.eval_all(&x), basis.eval_all(&y));
        for j in 0..=c.opts.band {
            let sum: f64 = basis.degree_range(j).map(|p| ux[p] * uy[p]).sum();
            let expected = dim_harmonics(n, j) as f64 * spherical_poly(n, j, dot(&x, &y))?;
            worst = worst.max((sum - expected).abs());
        }
    }
    ok(worst <= 1e-9, format!("max error {worst:.2e}"))
}

fn harmonics_json(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let f = SphereFunction::random(c.geom.clone(), c.opts.band, DegreeFilter::All, rng);
    let back = SphereFunction::from_json(f.to_json())?;
    ok(back.max_coeff_diff(&f) == 0.0 && back.band_limit() == f.band_limit(), "exact".into())
}

fn stiefel_frames(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let worst = (0..100).map(|_| sample_frame(&c.geom, rng).defect()).fold(0.0, f64::max);
    ok(worst <= 1e-12, format!("max |v^T v - I| = {worst:.2e}"))
}

fn stiefel_rotations(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let m = c.geom.n() + 1;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let r = haar_rotation(m, rng);
        let orth = (r.transpose() * &r - nalgebra::DMatrix::identity(m, m)).norm();
        worst = worst.max(orth).max((r.determinant() - 1.0).abs());
    }
    ok(worst <= 1e-12, format!("max defect {worst:.2e}"))
}

fn stiefel_grassmann(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let phi = random_grassmann(&c.geom, rng);
    let d = phi.invariance_defect(&c.geom, 20, rng);
    ok(d <= 1e-10, format!("max |phi(v gamma) - phi(v)| = {d:.2e}"))
}

fn stiefel_right_invariance(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let f = SphereFunction::random(g.clone(), c.opts.band, DegreeFilter::All, rng);
    let ev = f.evaluator();
    let mean = BisphericalMean::new(g, c.opts.band)?;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let v = sample_frame(g, rng);
        let tau: f64 = rng.random();
        let gamma = haar_orthogonal(g.n() - g.k(), rng);
        let a = mean.mean(|x| ev.eval(x), &v, tau)?;
        let b = mean.mean(|x| ev.eval(x), &v.right_multiply(&gamma)?, tau)?;
        worst = worst.max((a - b).abs());
    }
    ok(worst <= 1e-10, format!("max deviation {worst:.2e}"))
}

fn stiefel_completion(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let f = SphereFunction::random(g.clone(), c.opts.band, DegreeFilter::All, rng);
    let ev = f.evaluator();
    let mean = BisphericalMean::new(g, c.opts.band)?;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let v = sample_frame(g, rng);
        let tau: f64 = rng.random();
        let a = mean.mean_with(|x| ev.eval(x), &v.completion_with(rng), tau)?;
        let b = mean.mean_with(|x| ev.eval(x), &v.completion_with(rng), tau)?;
        worst = worst.max((a - b).abs());
    }
    ok(worst <= 1e-10, format!("max deviation {worst:.2e}"))
}

fn stiefel_funk_hecke_type(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let band = c.opts.band;
    let basis = SphereBasis::for_geometry(g, band);
    let mean = BisphericalMean::new(g, band)?;
    let systems = (0..=band)
        .map(|j| if j % 2 == 0 { InducedSystem::new(g, j).map(Some) } else { Ok(None) })
        .collect::<Result<Vec<_>>>()?;
    let (mut even_err, mut odd_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..2 {
        let v = sample_frame(g, rng);
        for tau in [0.0, 0.3, 0.7] {
            for j in 0..=band {
                let induced = systems[j].as_ref().map(|s| s.eval_all(&v));
                for (i, p) in basis.degree_range(j).enumerate() {
                    let lhs = mean.mean(|x| basis.eval(p, x), &v, tau)?;
                    match &induced {
                        None => odd_err = odd_err.max(lhs.abs()),
                        Some(vals) => even_err = even_err.max((lhs - m_hat_tau(g, j, tau)? * vals[i]).abs()),
                    }
                }
            }
        }
    }
    ok(even_err <= 1e-8 && odd_err <= 1e-10, format!("even {even_err:.2e}, odd {odd_err:.2e}"))
}

fn stiefel_funk_radon(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let band = c.opts.band;
    let mean = BisphericalMean::new(g, band)?;
    let mut worst: f64 = 0.0;
    for j in even_degrees(band) {
        let y = SphereFunction::random(g.clone(), j, DegreeFilter::Exactly(j), rng);
        let ev = y.evaluator();
        let yhat = InducedHarmonic::new(&y, j)?;
        for _ in 0..2 {
            let v = sample_frame(g, rng);
            let lhs = mean.mean(|x| ev.eval(x), &v, 0.0)?;
            worst = worst.max((lhs - funk_multiplier(g, j)? * yhat.eval(&v)).abs());
        }
    }
    ok(worst <= 1e-8, format!("max error {worst:.2e}"))
}

fn stiefel_induced_addition(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let basis = SphereBasis::for_geometry(g, c.opts.band);
    let params = g.jacobi();
    let mut worst: f64 = 0.0;
    for j in even_degrees(c.opts.band) {
        let sys = InducedSystem::new(g, j)?;
        let alpha = g.alpha(j)?;
        for _ in 0..10 {
            let x = random_point(g.n(), rng);
            let v = sample_frame(g, rng);
            let ux = basis.eval_all(&x);
            let sum: f64 = basis.degree_range(j).zip(sys.eval_all(&v)).map(|(p, y)| ux[p] * y).sum::<f64>() / alpha;
            worst = worst.max((params.eval_r(j / 2, 2.0 * v.projection_norm2(&x) - 1.0) - sum).abs());
        }
    }
    ok(worst <= 1e-8, format!("max error {worst:.2e}"))
}

fn stiefel_induced_orthonormality(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let systems = [InducedSystem::new(g, 0)?, InducedSystem::new(g, 2)?];
    let total: usize = systems.iter().map(|s| s.len()).sum();
    let est = monte_carlo_many(rng.random(), c.opts.samples, total * (total + 1) / 2, |rng, out| {
        let v = sample_frame(g, rng);
        let vals: Vec<f64> = systems.iter().flat_map(|s| s.eval_all(&v)).collect();
        let mut i = 0;
        for a in 0..total {
            for b in a..total {
                out[i] = vals[a] * vals[b];
                i += 1;
            }
        }
    });
    let mut worst: f64 = 0.0;
    let mut i = 0;
    for a in 0..total {
        for b in a..total {
            worst = worst.max(z_abs(&est[i], if a == b { 1.0 } else { 0.0 }));
            i += 1;
        }
    }
    ok(worst <= 4.0, format!("{} entries, max |z| = {worst:.2}", est.len()))
}

fn induced_phi(y: &SphereFunction, j: usize) -> Result<GrassmannFunction> {
    let yhat = Arc::new(InducedHarmonic::new(y, j)?);
    Ok(GrassmannFunction::new("induced harmonic", true, move |v| yhat.eval(v)))
}

fn stiefel_dual_identity(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let y = SphereFunction::random(g.clone(), 2, DegreeFilter::Exactly(2), rng);
    let phi = induced_phi(&y, 2)?;
    let x = random_point(g.n(), rng);
    let tau = 0.4;
    let est = dual_mean(g, &phi, &x, tau, c.opts.samples, rng.random())?;
    let expected = m_hat_tau(g, 2, tau)? * y.eval(&x);
    ok(est.agrees_with(expected, 4.0), format!("z = {:.2}", est.z_score(expected)))
}

fn stiefel_reconstruction(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let y = SphereFunction::random(g.clone(), 2, DegreeFilter::Exactly(2), rng);
    let yhat = InducedHarmonic::new(&y, 2)?;
    let x = random_point(g.n(), rng);
    let est = reconstruct_from_induced(g, 2, |v| yhat.eval(v), &x, c.opts.samples, rng.random())?;
    let expected = y.eval(&x);
    ok(est.agrees_with(expected, 4.0), format!("z = {:.2}", est.z_score(expected)))
}

fn stiefel_duality(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let n = g.n();
    let mut worst: f64 = 0.0;
    for _ in 0..2 {
        let f = SphereFunction::random(g.clone(), c.opts.band, DegreeFilter::All, rng);
        let ev = f.evaluator();
        let phi = random_grassmann(g, rng);
        let tau: f64 = rng.random();
        let mean = BisphericalMean::new(g, c.opts.band)?;
        let est = monte_carlo_many(rng.random(), c.opts.samples, 2, |rng, out| {
            let v = sample_frame(g, rng);
            out[0] = mean.mean(|x| ev.eval(x), &v, tau).unwrap_or(f64::NAN) * phi.eval(&v);
            let x = random_point(n, rng);
            out[1] = ev.eval(&x) * phi.eval(&sample_dual_frame(g, &rotation_to(&x), tau, rng));
        });
        let combined = est[0].stderr.hypot(est[1].stderr);
        worst = worst.max((est[0].estimate - est[1].estimate).abs() / combined);
    }
    ok(worst <= 4.0, format!("max |difference| / combined stderr = {worst:.2}"))
}

fn stiefel_contraction(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let grid = SphereGrid::for_geometry(g, 4 * c.opts.band)?;
    let mean = BisphericalMean::new(g, c.opts.band)?;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..3 {
        let f = SphereFunction::random(g.clone(), c.opts.band, DegreeFilter::All, rng);
        let ev = f.evaluator();
        let l1 = grid.integrate(|x| ev.eval(x).abs());
        let tau: f64 = rng.random();
        let est = monte_carlo(rng.random(), c.opts.samples / 4, |rng| {
            mean.mean(|x| ev.eval(x), &sample_frame(g, rng), tau).map_or(f64::NAN, f64::abs)
        });
        worst = worst.max(est.estimate / l1);
    }
    ok(worst <= 1.0 + 1e-6, format!("max ||M f||_1 / ||f||_1 = {worst:.4}"))
}

// φ = Σ c_{j,λ} Ŷ_{j,λ} over j ∈ {0, 2}, so M*_τ φ = Σ c m̂_τ(j) Y_{j,λ}; the
// closed form is spot-checked against the Monte-Carlo dual mean.
fn stiefel_dual_contraction(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let systems = Arc::new([InducedSystem::new(g, 0)?, InducedSystem::new(g, 2)?]);
    let coeffs: Vec<f64> = systems.iter().flat_map(|s| (0..s.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect::<Vec<_>>()).collect();
    let mut y = SphereFunction::zero(g.clone(), 2);
    let tau: f64 = rng.random();
    let mut i = 0;
    for s in systems.iter() {
        let m = m_hat_tau(g, s.degree(), tau)?;
        for idx in s.indices() {
            y.set(*idx, m * coeffs[i])?;
            i += 1;
        }
    }
    let phi = {
        let (systems, coeffs) = (systems.clone(), coeffs.clone());
        GrassmannFunction::new("induced combination", true, move |v| {
            dot(&systems.iter().flat_map(|s| s.eval_all(v)).collect::<Vec<_>>(), &coeffs)
        })
    };
    let x = random_point(g.n(), rng);
    let spot = dual_mean(g, &phi, &x, tau, c.opts.samples / 4, rng.random())?;
    let spot_ok = spot.agrees_with(y.eval(&x), 4.0);
    let ev = y.evaluator();
    let dual_l1 = SphereGrid::for_geometry(g, 16)?.integrate(|x| ev.eval(x).abs());
    let phi_l1 = monte_carlo(rng.random(), c.opts.samples, |rng| phi.eval(&sample_frame(g, rng)).abs());
    let bound = phi_l1.estimate * (1.0 + 1e-6) + 4.0 * phi_l1.stderr;
    ok(
        spot_ok && dual_l1 <= bound,
        format!("||M* phi||_1 = {dual_l1:.4}, ||phi||_1 = {:.4} +- {:.1e}, spot z = {:.2}", phi_l1.estimate, phi_l1.stderr, spot.z_score(y.eval(&x))),
    )
}

fn stiefel_young(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let kernel = Kernel::constant(1.0);
    let a_norm: f64 = kernel.radial_rule(g, 4)?.iter().map(|(_, w)| w).sum();
    let f = SphereFunction::random(g.clone(), c.opts.band, DegreeFilter::All, rng);
    let ev = f.evaluator();
    let l1 = SphereGrid::for_geometry(g, 4 * c.opts.band)?.integrate(|x| ev.eval(x).abs());
    let est = monte_carlo(rng.random(), 256, |rng| {
        intertwine_a(g, &kernel, |x| ev.eval(x), &sample_frame(g, rng), c.opts.band, 4).map_or(f64::NAN, f64::abs)
    });
    let bound = l1 * a_norm * g.c_nk();
    ok(
        est.estimate <= bound * (1.0 + 1e-6) + 4.0 * est.stderr,
        format!("||A f||_1 = {:.4}, bound {bound:.4}", est.estimate),
    )
}

fn multipliers_funk(c: &Ctx, _: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for j in even_degrees(64) {
        worst = worst.max((funk_multiplier(&c.geom, j)? - m_hat_tau(&c.geom, j, 0.0)?).abs());
    }
    ok(worst <= 1e-12, format!("max deviation {worst:.2e}, j <= 64"))
}

// R(-x) and R(x) with swapped parameters are normalized at opposite ends, so
// the reflection carries the positive factor P^{(σ,ρ)}_m(1) / P^{(ρ,σ)}_m(1).
fn multipliers_parity(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let p = c.geom.jacobi();
    let q = p.swapped();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let t = rng.random::<f64>() * FRAC_PI_2;
        let tau = t.sin();
        for m in 0..=10 {
            let lhs = p.eval_r(m, 2.0 * tau * tau - 1.0);
            let scale = q.p_at_one(m) / p.p_at_one(m);
            let rhs = if m % 2 == 0 { 1.0 } else { -1.0 } * scale * q.eval_r(m, (2.0 * t).cos());
            worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
        }
    }
    ok(worst <= 1e-12, format!("max deviation {worst:.2e}, j <= 20"))
}

fn multipliers_bounded(c: &Ctx, _: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..=100 {
        let tau = i as f64 / 100.0;
        for j in even_degrees(64) {
            worst = worst.max(m_hat_tau(&c.geom, j, tau)?.abs());
        }
    }
    ok(worst <= 1.0 + 1e-12, format!("max |m_hat| = {worst:.15}"))
}

fn multipliers_sphere(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    if g.k() != g.n() - 1 {
        return skip("only for k = n-1");
    }
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let tau: f64 = rng.random();
        for j in even_degrees(64) {
            worst = worst.max((m_hat_tau(g, j, tau)? - spherical_poly(g.n(), j, tau)?).abs());
        }
    }
    ok(worst <= 1e-12, format!("max deviation {worst:.2e}"))
}

fn multipliers_table(c: &Ctx, _: &mut ChaCha8Rng) -> Outcome {
    let table = MultiplierTable::shifted(&c.geom, 8, 0.37)?;
    let fine = table.get(0) == Some(1.0) && (1..8).step_by(2).all(|j| table.get(j) == Some(0.0));
    ok(fine, format!("value at j=0 is {:?}", table.get(0)))
}

fn multipliers_cosine(c: &Ctx, _: &mut ChaCha8Rng) -> Outcome {
    let st = self_test(&c.geom, 8)?;
    ok(st.cosine_vs_quadrature <= 1e-10, format!("max deviation {:.2e}, alpha=1, j <= 8", st.cosine_vs_quadrature))
}

fn injectivity_report(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let mut shifts: Vec<f64> = noninjective_shifts(g, 8)?.into_iter().map(|(t, _)| t).collect();
    shifts.extend((0..10).map(|_| (0.01 + 0.98 * rng.random::<f64>()) * FRAC_PI_2));
    for &t in &shifts {
        let r = classify_shift(g, t, 32, DEFAULT_ZERO_TOL)?;
        let fine = match &r.verdict {
            Verdict::NonInjective { j0, .. } => {
                r.margins.iter().find(|row| row.j == *j0).is_some_and(|row| row.margins.iter().all(|m| *m <= r.zero_tol))
            }
            Verdict::InjectiveUpToJmax { .. } => r.min_family_margin() > r.zero_tol,
            Verdict::Inconclusive { .. } => true,
        };
        if !fine {
            return ok(false, format!("t={t}: verdict contradicts margins"));
        }
    }
    ok(true, format!("{} shifts", shifts.len()))
}

fn injectivity_round_trip(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let tau = 0.5;
    let f = SphereFunction::random(g.clone(), 8, DegreeFilter::Even, rng);
    let inv = spectral_invert(&spectral_forward(&f, tau)?, DEFAULT_INVERSION_FLOOR)?;
    let expected = f.filter_degrees(|j| !inv.blocked.contains(&j));
    let err = inv.function.max_coeff_diff(&expected);
    ok(err <= 1e-10, format!("coefficient error {err:.2e}, blocked {:?}", inv.blocked))
}

fn injectivity_agreement(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let band = c.opts.band.min(4);
    let f = SphereFunction::random(g.clone(), band, DegreeFilter::All, rng);
    let ev = f.evaluator();
    let tau = 0.4;
    let spectral = spectral_forward(&f, tau)?;
    let mean = BisphericalMean::new(g, band)?;
    let systems = even_degrees(band).map(|j| InducedSystem::new(g, j)).collect::<Result<Vec<_>>>()?;
    let total: usize = systems.iter().map(|s| s.len()).sum();
    let est = monte_carlo_many(rng.random(), c.opts.samples / 2, total, |rng, out| {
        let v = sample_frame(g, rng);
        let m = mean.mean(|x| ev.eval(x), &v, tau).unwrap_or(f64::NAN);
        for (o, y) in out.iter_mut().zip(systems.iter().flat_map(|s| s.eval_all(&v))) {
            *o = m * y;
        }
    });
    let targets = systems.iter().flat_map(|s| s.indices().iter().map(|i| spectral.coeffs.get(i).copied().unwrap_or(0.0)));
    let worst = est.iter().zip(targets).map(|(e, t)| z_abs(e, t)).fold(0.0, f64::max);
    ok(worst <= 4.0, format!("{total} coefficients, max |z| = {worst:.2}"))
}

fn injectivity_monotone(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let mut shifts: Vec<f64> = noninjective_shifts(g, 32)?.into_iter().step_by(7).map(|(t, _)| t).collect();
    shifts.extend((0..20).map(|_| (0.01 + 0.98 * rng.random::<f64>()) * FRAC_PI_2));
    for &t in &shifts {
        let low = classify_shift(g, t, 32, DEFAULT_ZERO_TOL)?;
        let high = classify_shift(g, t, 64, DEFAULT_ZERO_TOL)?;
        let fine = match (&low.verdict, &high.verdict) {
            (Verdict::NonInjective { j0: a, .. }, Verdict::NonInjective { j0: b, .. }) => a == b,
            (Verdict::NonInjective { .. }, _) => false,
            (_, Verdict::InjectiveUpToJmax { .. }) => low.is_injective_up_to_jmax(),
            _ => true,
        };
        if !fine {
            return ok(false, format!("t={t}: {:?} at 32 vs {:?} at 64", low.verdict, high.verdict));
        }
    }
    ok(true, format!("{} shifts", shifts.len()))
}

// At the exact root the witness is at quadrature level whatever zero_tol is;
// a shift nudged off the root is still flagged under a loose zero_tol, but
// its witness is a genuine nonzero.
fn injectivity_witness(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let (t, j0) = noninjective_shifts(g, 2)?[0];
    let seed = rng.random();
    let at_root = kernel_witness(g, t, j0, 10, seed)?;
    let strict = classify_shift(g, t, 8, DEFAULT_ZERO_TOL)?;
    let nudged_t = t + 1e-5;
    let loose = classify_shift_family(g, &[nudged_t], 8, 1e-3)?;
    let nudged = kernel_witness(g, nudged_t, j0, 10, seed)?;
    let fine = at_root.max_abs <= 1e-8
        && strict.is_non_injective()
        && loose.is_non_injective()
        && nudged.max_abs > 100.0 * at_root.max_abs.max(1e-14);
    ok(fine, format!("witness at root {:.2e}, nudged by 1e-5 {:.2e}", at_root.max_abs, nudged.max_abs))
}

fn cli_determinism(c: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let g = &c.geom;
    let seed: u64 = rng.random();
    let x = random_point(g.n(), rng);
    let draw = || monte_carlo(seed, 5000, |rng| sample_frame(g, rng).projection_norm2(&x));
    let a = draw();
    let b = draw();
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| crate::error::Error::domain(e.to_string()))?
        .install(draw);
    let same = |p: &McEstimate, q: &McEstimate| {
        p.estimate.to_bits() == q.estimate.to_bits() && p.stderr.to_bits() == q.stderr.to_bits()
    };
    ok(same(&a, &b) && same(&a, &single), "bit-identical across runs and thread counts".into())
}
