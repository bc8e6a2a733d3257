//! Spherical harmonics on `S^n` in bispherical coordinates.

mod basis;
mod function;
mod grid;
mod poly;

pub use basis::{BisphericalIndex, Harmonic, SphereBasis};
pub use function::{analyze, analyze_on, synthesize, Analysis, DegreeFilter, Evaluator, SphereFunction, LEAKAGE_THRESHOLD};
pub use grid::{compensated_sum, SphereGrid};
pub use poly::{spherical_poly, spherical_poly_upto};
