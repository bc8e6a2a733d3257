pub mod cli;
pub mod error;
pub mod geometry;
pub mod harmonics;
pub mod injectivity;
pub mod jacobi;
pub mod multipliers;
pub mod special;
pub mod stiefel;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{dim_harmonics, Geometry, ShiftParam};
pub use jacobi::{gauss_jacobi, roots, JacobiParams, QuadratureRule, RootSet};
pub use harmonics::{analyze, synthesize, BisphericalIndex, SphereBasis, SphereFunction, SphereGrid};
pub use multipliers::{cosine_multiplier, funk_multiplier, kernel_multiplier, m_hat_tau, Kernel, MultiplierTable};
pub use stiefel::{McEstimate, StiefelFrame};
