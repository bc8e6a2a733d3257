//! Recursive orthonormal bases of spherical harmonics.
//!
//! A sphere `S^m` with `m >= 2` is split as `R^{k+1} × R^{m-k}` and its
//! harmonics are
//!
//! ```text
//! U(x) = κ_M · Y_{r,μ}(η) · Y_{s,ν}(ζ) · sin^r θ · cos^s θ · R_i^{(r+(k-1)/2, s+(m-k)/2-1)}(cos 2θ)
//! ```
//!
//! for `x = η sin θ + ζ cos θ`, of total degree `j = 2i + r + s`. The factor
//! spheres recurse with the split `S^{p-1} × S^0` down to explicit harmonics
//! on `S^1` (`1, √2 cos ℓφ, √2 sin ℓφ`) and `S^0` (`1`, the sign).
//!
//! Everything is evaluated in solid (homogeneous polynomial) form:
//! `sin^r θ · Y_{r,μ}(η)` is the solid harmonic at the `R^{k+1}` block of `x`,
//! and `cos 2θ` becomes `(|x_ζ|² - |x_η|²) / |x|²`. The poles `θ ∈ {0, π/2}`,
//! where `η` or `ζ` is undefined, need no special direction.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::f64::consts::SQRT_2;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::geometry::Geometry;
use crate::jacobi::JacobiParams;
use crate::special::{ln_gamma, ln_sphere_area};

/// Label `M = (r, μ; s, ν; m)` of a bispherical harmonic of degree `2m + r + s`.
///
/// `mu` and `nu` are 1-based positions among the degree-`r` harmonics of
/// `S^k` and the degree-`s` harmonics of `S^{n-k-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BisphericalIndex {
    pub r: usize,
    pub mu: usize,
    pub s: usize,
    pub nu: usize,
    pub m: usize,
}

impl BisphericalIndex {
    pub fn degree(&self) -> usize {
        2 * self.m + self.r + self.s
    }

    fn sort_key(&self) -> (usize, usize, usize, usize, usize) {
        (self.degree(), self.r, self.s, self.mu, self.nu)
    }
}

impl Ord for BisphericalIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for BisphericalIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for BisphericalIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(r={}, mu={}; s={}, nu={}; m={})", self.r, self.mu, self.s, self.nu, self.m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Harmonic {
    Constant,
    /// The degree-one function `ζ ↦ ζ` on `S^0`.
    Sign,
    Cos(usize),
    Sin(usize),
    Bispherical(BisphericalIndex),
}

#[derive(Debug, Clone)]
struct Member {
    degree: usize,
    label: Harmonic,
    kappa: f64,
    eta: usize,
    zeta: usize,
    /// Position in the split's flat radial table.
    radial: usize,
}

#[derive(Debug, Clone)]
enum Node {
    Points,
    Circle,
    Split(Box<Split>),
}

#[derive(Debug, Clone)]
struct Split {
    k: usize,
    eta: SphereBasis,
    zeta: SphereBasis,
    rho0: f64,
    sigma0: f64,
    /// `(params, offset, len)` of the radial block of each `(r, s)`, `r + s <= J`.
    blocks: Vec<(JacobiParams, usize, usize)>,
    radial_len: usize,
}

/// All harmonics of degree `<= band_limit` on `S^dim`, ordered by degree.
#[derive(Debug, Clone)]
pub struct SphereBasis {
    dim: usize,
    band_limit: usize,
    node: Node,
    members: Vec<Member>,
    degree_start: Vec<usize>,
    lookup: HashMap<BisphericalIndex, usize>,
}

impl SphereBasis {
    /// Basis of `S^n` built on the geometry's own split `R^{k+1} × R^{n-k}`.
    pub fn for_geometry(geom: &Geometry, band_limit: usize) -> Self {
        Self::build(geom.n(), Some(geom.k()), band_limit)
    }

    /// Basis of `S^dim` with the default split `S^{dim-1} × S^0`.
    pub fn for_sphere(dim: usize, band_limit: usize) -> Self {
        Self::build(dim, None, band_limit)
    }

    fn build(dim: usize, split: Option<usize>, band_limit: usize) -> Self {
        match dim {
            0 => Self::points(band_limit),
            1 => Self::circle(band_limit),
            _ => Self::split(dim, split.unwrap_or(dim - 1), band_limit),
        }
    }

    fn points(band_limit: usize) -> Self {
        let mut members = vec![Member { degree: 0, label: Harmonic::Constant, kappa: 1.0, eta: 0, zeta: 0, radial: 0 }];
        if band_limit >= 1 {
            members.push(Member { degree: 1, label: Harmonic::Sign, kappa: 1.0, eta: 0, zeta: 0, radial: 0 });
        }
        Self::finish(0, band_limit, Node::Points, members)
    }

    fn circle(band_limit: usize) -> Self {
        let mut members = vec![Member { degree: 0, label: Harmonic::Constant, kappa: 1.0, eta: 0, zeta: 0, radial: 0 }];
        for l in 1..=band_limit {
            members.push(Member { degree: l, label: Harmonic::Cos(l), kappa: SQRT_2, eta: 0, zeta: 0, radial: 0 });
            members.push(Member { degree: l, label: Harmonic::Sin(l), kappa: SQRT_2, eta: 0, zeta: 0, radial: 0 });
        }
        Self::finish(1, band_limit, Node::Circle, members)
    }

    fn split(dim: usize, k: usize, band_limit: usize) -> Self {
        assert!((1..dim).contains(&k), "split index k={k} out of range for S^{dim}");
        let eta = Self::for_sphere(k, band_limit);
        let zeta = Self::for_sphere(dim - k - 1, band_limit);
        let rho0 = (k as f64 - 1.0) / 2.0;
        let sigma0 = (dim - k) as f64 / 2.0 - 1.0;
        let ln_area_ratio = ln_sphere_area(dim) - ln_sphere_area(dim - k - 1) - ln_sphere_area(k);
        let mut blocks = Vec::new();
        let mut offsets = vec![0; (band_limit + 1) * (band_limit + 1)];
        let mut radial_len = 0;
        for r in 0..=band_limit {
            for s in 0..=band_limit - r {
                let len = (band_limit - r - s) / 2 + 1;
                offsets[r * (band_limit + 1) + s] = radial_len;
                blocks.push((JacobiParams { rho: rho0 + r as f64, sigma: sigma0 + s as f64 }, radial_len, len));
                radial_len += len;
            }
        }

        let mut members = Vec::new();
        for j in 0..=band_limit {
            for r in 0..=j {
                for s in 0..=(j - r) {
                    if (j - r - s) % 2 == 1 {
                        continue;
                    }
                    let m = (j - r - s) / 2;
                    let (eta_range, zeta_range) = (eta.degree_range(r), zeta.degree_range(s));
                    if eta_range.is_empty() || zeta_range.is_empty() {
                        continue;
                    }
                    let kappa = bispherical_kappa(ln_area_ratio, r as f64 + rho0, s as f64 + sigma0, m);
                    for (mu, e) in eta_range.clone().enumerate() {
                        for (nu, z) in zeta_range.clone().enumerate() {
                            let index = BisphericalIndex { r, mu: mu + 1, s, nu: nu + 1, m };
                            let radial = offsets[r * (band_limit + 1) + s] + m;
                            members.push(Member { degree: j, label: Harmonic::Bispherical(index), kappa, eta: e, zeta: z, radial });
                        }
                    }
                }
            }
        }
        Self::finish(dim, band_limit, Node::Split(Box::new(Split { k, eta, zeta, rho0, sigma0, blocks, radial_len })), members)
    }

    fn finish(dim: usize, band_limit: usize, node: Node, members: Vec<Member>) -> Self {
        let mut degree_start = vec![0; band_limit + 2];
        for d in 0..=band_limit {
            degree_start[d + 1] = degree_start[d] + members.iter().filter(|m| m.degree == d).count();
        }
        let lookup = members
            .iter()
            .enumerate()
            .filter_map(|(i, m)| match m.label {
                Harmonic::Bispherical(idx) => Some((idx, i)),
                _ => None,
            })
            .collect();
        SphereBasis { dim, band_limit, node, members, degree_start, lookup }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Positions of the degree-`d` members.
    pub fn degree_range(&self, d: usize) -> Range<usize> {
        if d > self.band_limit {
            return 0..0;
        }
        self.degree_start[d]..self.degree_start[d + 1]
    }

    pub fn degree_of(&self, position: usize) -> usize {
        self.members[position].degree
    }

    pub fn label(&self, position: usize) -> Harmonic {
        self.members[position].label
    }

    /// Bispherical labels in basis order (empty for `S^0`, `S^1`).
    pub fn indices(&self) -> Vec<BisphericalIndex> {
        self.members
            .iter()
            .filter_map(|m| match m.label {
                Harmonic::Bispherical(idx) => Some(idx),
                _ => None,
            })
            .collect()
    }

    pub fn position(&self, index: &BisphericalIndex) -> Option<usize> {
        self.lookup.get(index).copied()
    }

    /// Normalization constant `κ_M` of a member.
    pub fn kappa(&self, position: usize) -> f64 {
        self.members[position].kappa
    }

    /// Values of every member at `x` (homogeneous extension off the sphere).
    pub fn eval_all(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.members.len()];
        self.eval_into(x, &mut out);
        out
    }

    /// [`eval_all`](Self::eval_all) into a buffer of length [`len`](Self::len).
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim + 1);
        match &self.node {
            Node::Points => {
                out[0] = 1.0;
                if out.len() > 1 {
                    out[1] = x[0];
                }
            }
            Node::Circle => {
                out[0] = 1.0;
                let (mut re, mut im) = (1.0, 0.0);
                for l in 1..=self.band_limit {
                    (re, im) = (re * x[0] - im * x[1], re * x[1] + im * x[0]);
                    out[2 * l - 1] = SQRT_2 * re;
                    out[2 * l] = SQRT_2 * im;
                }
            }
            Node::Split(split) => {
                let (xe, xz) = x.split_at(split.k + 1);
                let mut scratch = vec![0.0; split.eta.len() + split.zeta.len() + split.radial_len];
                let (ev, rest) = scratch.split_at_mut(split.eta.len());
                let (zv, radial) = rest.split_at_mut(split.zeta.len());
                split.eta.eval_into(xe, ev);
                split.zeta.eval_into(xz, zv);
                split.fill_radial(xe, xz, radial);
                for (o, mem) in out.iter_mut().zip(&self.members) {
                    *o = mem.kappa * ev[mem.eta] * zv[mem.zeta] * radial[mem.radial];
                }
            }
        }
    }

    /// Value of one member at `x`.
    pub fn eval(&self, position: usize, x: &[f64]) -> f64 {
        let mem = &self.members[position];
        match (&self.node, mem.label) {
            (_, Harmonic::Constant) => 1.0,
            (_, Harmonic::Sign) => x[0],
            (_, Harmonic::Cos(l)) => SQRT_2 * circle_power(x, l).0,
            (_, Harmonic::Sin(l)) => SQRT_2 * circle_power(x, l).1,
            (Node::Split(split), Harmonic::Bispherical(idx)) => {
                let (xe, xz) = x.split_at(split.k + 1);
                let params = JacobiParams {
                    rho: split.rho0 + idx.r as f64,
                    sigma: split.sigma0 + idx.s as f64,
                };
                let radial = homogeneous_r(params, idx.m, xe, xz);
                mem.kappa * split.eta.eval(mem.eta, xe) * split.zeta.eval(mem.zeta, xz) * radial[idx.m]
            }
            _ => unreachable!("bispherical label on a leaf sphere"),
        }
    }

    pub fn eval_index(&self, index: &BisphericalIndex, x: &[f64]) -> Option<f64> {
        self.position(index).map(|p| self.eval(p, x))
    }
}

impl Split {
    /// Every radial block `|x|^{2i} R_i^{(ρ0+r, σ0+s)}(cos 2θ)`.
    fn fill_radial(&self, xe: &[f64], xz: &[f64], radial: &mut [f64]) {
        let a: f64 = xe.iter().map(|v| v * v).sum();
        let b: f64 = xz.iter().map(|v| v * v).sum();
        let total = a + b;
        for (params, offset, len) in &self.blocks {
            let block = &mut radial[*offset..offset + len];
            if total == 0.0 {
                block.fill(0.0);
                block[0] = 1.0;
                continue;
            }
            params.eval_r_into((b - a) / total, block);
            let mut scale = 1.0;
            for v in block.iter_mut().skip(1) {
                scale *= total;
                *v *= scale;
            }
        }
    }
}

/// `[|x|^{2i} R_i((|x_ζ|² - |x_η|²) / |x|²)]_{i=0..=m}`.
fn homogeneous_r(params: JacobiParams, m: usize, xe: &[f64], xz: &[f64]) -> Vec<f64> {
    let a: f64 = xe.iter().map(|v| v * v).sum();
    let b: f64 = xz.iter().map(|v| v * v).sum();
    let total = a + b;
    if total == 0.0 {
        let mut out = vec![0.0; m + 1];
        out[0] = 1.0;
        return out;
    }
    let mut values = params.eval_r_upto(m, (b - a) / total);
    let mut scale = 1.0;
    for v in values.iter_mut().skip(1) {
        scale *= total;
        *v *= scale;
    }
    values
}

fn circle_power(x: &[f64], l: usize) -> (f64, f64) {
    let (mut re, mut im) = (1.0, 0.0);
    for _ in 0..l {
        (re, im) = (re * x[0] - im * x[1], re * x[1] + im * x[0]);
    }
    (re, im)
}

/// `κ_M` for Jacobi indices `(ρ, σ)` already shifted by `r` and `s`:
///
/// `κ² = 2 (σ_m / σ_{m-k-1} σ_k) (2i+ρ+σ+1) Γ(i+ρ+1) Γ(i+ρ+σ+1) / (i! Γ(i+σ+1) Γ(ρ+1)²)`.
fn bispherical_kappa(ln_area_ratio: f64, rho: f64, sigma: f64, m: usize) -> f64 {
    let mf = m as f64;
    let ln_sq = 2f64.ln() + ln_area_ratio + (2.0 * mf + rho + sigma + 1.0).ln()
        + ln_gamma(mf + rho + 1.0)
        + ln_gamma(mf + rho + sigma + 1.0)
        - ln_gamma(mf + 1.0)
        - ln_gamma(mf + sigma + 1.0)
        - 2.0 * ln_gamma(rho + 1.0);
    (0.5 * ln_sq).exp()
}
