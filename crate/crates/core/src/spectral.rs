//! Shared result types for eigenvalue and resolvent computations.

use num_complex::Complex64;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResolventSample {
    pub lambda_re: f64,
    pub lambda_im: f64,
    /// 1 / sigma_min(A - lambda), the resolvent norm of the discretization.
    pub inv_norm: f64,
}

/// Per-eigenvector localization statistics on the grid coordinates.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Localization {
    pub centroid: (f64, f64),
    /// Standard deviations of |psi|^2 along the two axes.
    pub widths: (f64, f64),
    /// |psi|^2 mass within two grid cells of the artificial truncation edges.
    pub boundary_mass: f64,
}

pub struct SpectralResult {
    pub eigenvalues: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
    pub localization: Vec<Localization>,
    pub resolvent_samples: Vec<ResolventSample>,
}

impl SpectralResult {
    /// Assemble from eigenpairs, enforcing the sort-by-real-part invariant.
    pub fn from_pairs(mut pairs: Vec<(Complex64, Vec<Complex64>, f64)>) -> Self {
        pairs.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));
        let eigenvalues = pairs.iter().map(|p| p.0).collect();
        let residuals = pairs.iter().map(|p| p.2).collect();
        let vectors = pairs.into_iter().map(|p| p.1).collect();
        SpectralResult {
            eigenvalues,
            residuals,
            vectors,
            localization: Vec::new(),
            resolvent_samples: Vec::new(),
        }
    }
}
