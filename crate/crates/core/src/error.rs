//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("airy evaluation overflow: Re(zeta) = {re_zeta:.3e} lies deep in the growth sector")]
    AiryOverflow { re_zeta: f64 },

    #[error("zero index {k} outside the supported range 1..={max}")]
    ZeroIndexOutOfRange { k: usize, max: usize },

    #[error("quadrature failed to reach tolerance {tol:.3e} (best error {best:.3e})")]
    QuadratureNonConvergence { tol: f64, best: f64 },

    #[error("banded LU factorization hit a zero pivot at column {col}")]
    SingularFactorization { col: usize },

    #[error("Arnoldi failed to converge after {restarts} restarts (best residual {best:.3e})")]
    ArnoldiNonConvergence { restarts: usize, best: f64 },

    #[error("inverse iteration for sigma_min stagnated after {iters} steps")]
    SigmaMinStagnation { iters: usize },

    #[error("eigenvalue tracking ambiguous at eps = {eps:.4e}: candidates {lam1} and {lam2}")]
    TrackingAmbiguous {
        eps: f64,
        lam1: num_complex::Complex64,
        lam2: num_complex::Complex64,
    },

    #[error("incompatible operator/boundary-condition combination: {0}")]
    IncompatibleSpec(String),

    #[error("grid does not resolve the required scale: {0}")]
    ResolutionGuard(String),

    #[error("Newton iteration for the inverse map diverged at z = {z}")]
    NewtonDiverged { z: num_complex::Complex64 },

    #[error("conformal map is not injective: f'(w) vanishes near w = {w}")]
    MapNotInjective { w: num_complex::Complex64 },

    #[error("geometry is degenerate: {0}")]
    DegenerateGeometry(String),

    #[error("deflated solve failed: projected component {overlap:.3e} exceeds 1e-8")]
    DeflationFailure { overlap: f64 },

    #[error("missing eigenvalue near shift {shift} after {attempts} attempts")]
    MissingEigenvalue {
        shift: num_complex::Complex64,
        attempts: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("fit is ill-conditioned (condition number {cond:.3e})")]
    IllConditionedFit { cond: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
