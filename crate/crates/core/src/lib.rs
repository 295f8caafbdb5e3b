#![allow(clippy::needless_range_loop, clippy::excessive_precision)]

//! Numerical laboratory for the spectral asymptotics of the non-self-adjoint
//! operator -h^2*Laplacian + i*V on two-dimensional wire-like domains with
//! mixed Dirichlet/Neumann boundaries.
//!
//! The crate provides, bottom up: complex Airy evaluation and the scalar
//! spectral constants; discretized one- and two-dimensional model operators
//! with eigenvalue and resolvent probes; the conformal family of wire
//! domains and their boundary geometry; boundary-layer quasimode
//! construction; assembly and eigensolution of the full operator on the
//! mapped unit square; and an experiment harness with asymptotic fits.

pub mod airy;
pub mod grid;
pub mod harness;
pub mod model1d;
pub mod conformal;
pub mod model2d;
pub mod spectral;
pub mod table;
pub mod error;
pub mod linalg;
pub mod operator;
pub mod quad;
pub mod quasimode;
pub mod rng;

pub use error::{Error, Result};
