//! Frames on `V_{n+1,n-k}`, the bispherical mean `M_τ`, its dual, induced
//! Stiefel harmonics and the intertwining operators.

mod frame;
mod induced;
mod intertwine;
mod mc;
mod mean;

pub use frame::{
    haar_orthogonal, haar_rotation, orthonormality_defect, sample_frame, RotationSampler, StiefelFrame,
    ORTHONORMAL_TOL,
};
pub use induced::{reconstruct_from_induced, InducedHarmonic, InducedSystem};
pub use intertwine::{intertwine_a, intertwine_a_star};
pub use mc::{monte_carlo, monte_carlo_many, stream_rng, McEstimate, CHUNK};
pub use mean::{
    bispherical_mean, dual_mean, rotation_to, sample_dual_frame, BisphericalMean, DualDraw, GrassmannFunction,
};
