use std::hash::{DefaultHasher, Hash, Hasher};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Geometry;

/// Tolerance on `|vᵀv - I|_F` for accepting a frame.
pub const ORTHONORMAL_TOL: f64 = 1e-12;

/// Column-orthonormal `(n+1) × (n-k)` matrix; a point of `V_{n+1,n-k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelFrame {
    v: DMatrix<f64>,
}

impl StiefelFrame {
    pub fn new(v: DMatrix<f64>) -> Result<Self> {
        let defect = orthonormality_defect(&v);
        if !(defect <= ORTHONORMAL_TOL) {
            return Err(Error::NotOrthonormal { defect });
        }
        Ok(StiefelFrame { v })
    }

    /// `v₀`: the last `n-k` columns of the identity.
    pub fn canonical(geom: &Geometry) -> Self {
        let (rows, cols) = (geom.n() + 1, geom.n() - geom.k());
        let mut v = DMatrix::zeros(rows, cols);
        for c in 0..cols {
            v[(rows - cols + c, c)] = 1.0;
        }
        StiefelFrame { v }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn rows(&self) -> usize {
        self.v.nrows()
    }

    pub fn cols(&self) -> usize {
        self.v.ncols()
    }

    pub fn defect(&self) -> f64 {
        orthonormality_defect(&self.v)
    }

    /// `|xᵀv|²`.
    pub fn projection_norm2(&self, x: &[f64]) -> f64 {
        (0..self.cols())
            .map(|c| {
                let d: f64 = self.v.column(c).iter().zip(x).map(|(a, b)| a * b).sum();
                d * d
            })
            .sum()
    }

    /// `v γ` for `γ ∈ O(n-k)`.
    pub fn right_multiply(&self, gamma: &DMatrix<f64>) -> Result<Self> {
        Self::new(&self.v * gamma)
    }

    /// `g v` for `g ∈ O(n+1)`.
    pub fn left_multiply(&self, g: &DMatrix<f64>) -> Result<Self> {
        Self::new(g * &self.v)
    }

    /// Rotation `r_v ∈ SO(n+1)` with `r_v v₀ = v`.
    ///
    /// Deterministic: the complement is drawn from a generator seeded by the
    /// bytes of `v`.
    pub fn completion(&self) -> DMatrix<f64> {
        let mut hasher = DefaultHasher::new();
        for x in self.v.iter() {
            x.to_bits().hash(&mut hasher);
        }
        self.completion_with(&mut ChaCha8Rng::seed_from_u64(hasher.finish()))
    }

    /// [`completion`](Self::completion) with an arbitrary random complement.
    pub fn completion_with(&self, rng: &mut impl Rng) -> DMatrix<f64> {
        let (rows, cols) = (self.rows(), self.cols());
        let free = rows - cols;
        loop {
            let mut a = DMatrix::zeros(rows, rows);
            a.view_mut((0, 0), (rows, cols)).copy_from(&self.v);
            for c in cols..rows {
                for r in 0..rows {
                    a[(r, c)] = rng.sample(StandardNormal);
                }
            }
            let qr = a.qr();
            let q = qr.q();
            let diag_ok = (0..rows).all(|i| qr.r()[(i, i)].abs() > 1e-8);
            if !diag_ok {
                continue;
            }
            let mut out = DMatrix::zeros(rows, rows);
            out.view_mut((0, 0), (rows, free)).copy_from(&q.view((0, cols), (rows, free)));
            out.view_mut((0, free), (rows, cols)).copy_from(&self.v);
            if out.determinant() < 0.0 {
                out.column_mut(0).neg_mut();
            }
            return out;
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(FrameRepr::from(self)).expect("plain data serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct FrameRepr {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl From<&StiefelFrame> for FrameRepr {
    fn from(f: &StiefelFrame) -> Self {
        let data = (0..f.rows()).flat_map(|r| (0..f.cols()).map(move |c| (r, c))).map(|(r, c)| f.v[(r, c)]).collect();
        FrameRepr { rows: f.rows(), cols: f.cols(), data }
    }
}

impl Serialize for StiefelFrame {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FrameRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for StiefelFrame {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = FrameRepr::deserialize(d)?;
        if repr.data.len() != repr.rows * repr.cols {
            return Err(serde::de::Error::custom("frame data length does not match rows * cols"));
        }
        StiefelFrame::new(DMatrix::from_row_slice(repr.rows, repr.cols, &repr.data)).map_err(serde::de::Error::custom)
    }
}

pub fn orthonormality_defect(v: &DMatrix<f64>) -> f64 {
    (v.transpose() * v - DMatrix::identity(v.ncols(), v.ncols())).norm()
}

fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Gaussian matrix, QR, and column signs fixed so that `R` has a positive
/// diagonal. Returns `None` on a (probability zero) rank-deficient draw.
fn haar_columns(rows: usize, cols: usize, rng: &mut impl Rng) -> Option<DMatrix<f64>> {
    let qr = gaussian(rows, cols, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..cols {
        let d = r[(c, c)];
        if d.abs() < 1e-10 {
            return None;
        }
        if d < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    Some(q)
}

/// Haar-distributed element of `SO(m)`.
pub fn haar_rotation(m: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    loop {
        if let Some(mut q) = haar_columns(m, m, rng) {
            if q.determinant() < 0.0 {
                q.column_mut(0).neg_mut();
            }
            return q;
        }
    }
}

/// Haar-distributed element of `O(m)`.
pub fn haar_orthogonal(m: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    loop {
        if let Some(q) = haar_columns(m, m, rng) {
            return q;
        }
    }
}

/// Frame drawn from the invariant probability measure `d_*v`.
pub fn sample_frame(geom: &Geometry, rng: &mut impl Rng) -> StiefelFrame {
    loop {
        if let Some(v) = haar_columns(geom.n() + 1, geom.n() - geom.k(), rng) {
            return StiefelFrame { v };
        }
    }
}

/// Seeded source of rotations and frames for one geometry.
#[derive(Debug, Clone)]
pub struct RotationSampler {
    geom: Geometry,
    seed: u64,
    rng: ChaCha8Rng,
}

impl RotationSampler {
    pub fn new(geom: Geometry, seed: u64) -> Self {
        RotationSampler { geom, seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn geom(&self) -> &Geometry {
        &self.geom
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn frame(&mut self) -> StiefelFrame {
        sample_frame(&self.geom, &mut self.rng)
    }

    /// Element of `G = SO(n+1)`.
    pub fn rotation(&mut self) -> DMatrix<f64> {
        haar_rotation(self.geom.n() + 1, &mut self.rng)
    }

    /// Element of `K = SO(n)` embedded as the stabilizer of `e_{n+1}`.
    pub fn stabilizer(&mut self) -> DMatrix<f64> {
        let n = self.geom.n();
        let mut g = DMatrix::identity(n + 1, n + 1);
        g.view_mut((0, 0), (n, n)).copy_from(&haar_rotation(n, &mut self.rng));
        g
    }

    /// Element of `K' = SO(k+1) × SO(n-k)`, block diagonal.
    pub fn block_rotation(&mut self) -> DMatrix<f64> {
        block_rotation(&self.geom, &mut self.rng)
    }

    /// Element of `O(n-k)` acting on frames from the right.
    pub fn right_orthogonal(&mut self) -> DMatrix<f64> {
        haar_orthogonal(self.geom.n() - self.geom.k(), &mut self.rng)
    }
}

pub(crate) fn block_rotation(geom: &Geometry, rng: &mut impl Rng) -> DMatrix<f64> {
    let (n, k) = (geom.n(), geom.k());
    let mut g = DMatrix::zeros(n + 1, n + 1);
    g.view_mut((0, 0), (k + 1, k + 1)).copy_from(&haar_rotation(k + 1, rng));
    g.view_mut((k + 1, k + 1), (n - k, n - k)).copy_from(&haar_rotation(n - k, rng));
    g
}
