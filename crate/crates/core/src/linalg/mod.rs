//! Shared linear-algebra kernels: banded complex LU, shift-invert Arnoldi,
//! smallest-singular-value estimation, and small dense eigensolves.

pub mod arnoldi;
pub mod band;
pub mod dense;
pub mod sigma_min;

pub use arnoldi::{shift_invert_eigs, ArnoldiOptions, EigenPair};
pub use band::{BandLu, BandMatrix};
pub use sigma_min::{smallest_singular_value, smallest_singular_value_warm, SigmaMinState};
