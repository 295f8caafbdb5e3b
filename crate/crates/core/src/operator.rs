//! The full operator -h^2 Laplace + iV assembled on the mapped unit square.
//!
//! Pulling back along the conformal map turns the operator into
//! -h^2 w(u,v) Laplace_{(u,v)} + i v with the exact weight w = |f'|^{-2},
//! Dirichlet conditions at v = 0, 1 and Neumann conditions at u = 0, 1. No
//! potential solver and no meshing of the image domain are ever needed.

use crate::conformal::ConformalDomain;
use crate::error::{Error, Result};
use crate::grid::{Bc, Grid2D};
use crate::linalg::{shift_invert_eigs, smallest_singular_value, ArnoldiOptions, BandMatrix};
use crate::spectral::{Localization, ResolventSample, SpectralResult};
use num_complex::Complex64;

/// Banded realization of the pulled-back operator plus grid metadata.
pub struct FullOperator {
    pub matrix: BandMatrix,
    pub grid: Grid2D,
    pub h: f64,
    /// conformal weight |f'|^{-2} at the nodes (u fast or v fast per grid)
    pub weight: Vec<f64>,
    /// potential (the v coordinate) at the nodes
    pub potential: Vec<f64>,
}

/// Resolution policy for the boundary layer: nodes per h^{2/3} layer width.
pub const LAYER_NODES_DEFAULT: usize = 8;

/// Grid dimensions satisfying the resolution guard for the given h.
pub fn full_grid_dims(domain: &ConformalDomain, h: f64, layer_nodes: usize) -> (usize, usize) {
    let mut max_fp = 0.0f64;
    for iu in 0..=40 {
        for iv in 0..=40 {
            let w = Complex64::new(iu as f64 / 40.0, iv as f64 / 40.0);
            max_fp = max_fp.max(domain.fprime(w).norm());
        }
    }
    let n_v = ((layer_nodes as f64) * h.powf(-2.0 / 3.0) * max_fp).ceil() as usize;
    let n_v = n_v.max(128);
    let n_u = 160;
    (n_u, n_v)
}

/// Assemble on an (n_u, n_v) grid: Dirichlet at v in {0, 1}, Neumann at
/// u in {0, 1}.
pub fn assemble_full(
    domain: &ConformalDomain,
    h: f64,
    n_u: usize,
    n_v: usize,
) -> Result<FullOperator> {
    let mut max_fp = 0.0f64;
    for iu in 0..=40 {
        for iv in 0..=40 {
            let w = Complex64::new(iu as f64 / 40.0, iv as f64 / 40.0);
            max_fp = max_fp.max(domain.fprime(w).norm());
        }
    }
    let needed = (8.0 * h.powf(-2.0 / 3.0) * max_fp).ceil() as usize;
    if n_v < needed.max(128) || n_u < 128 {
        return Err(Error::ResolutionGuard(format!(
            "grid {n_u} x {n_v} under-resolves the boundary layer (need n_v >= {} and n_u >= 128)",
            needed.max(128)
        )));
    }
    let grid = Grid2D::new(
        (0.0, 1.0),
        (0.0, 1.0),
        n_u,
        n_v,
        [Bc::Neumann, Bc::Neumann, Bc::Dirichlet, Bc::Dirichlet],
    )?;
    let gu = grid.sigma_axis();
    let gv = grid.tau_axis();
    let (mu, mv) = (gu.len(), gv.len());
    let du = gu.spacing();
    let dv = gv.spacing();
    let inv_du2 = 1.0 / (du * du);
    let inv_dv2 = 1.0 / (dv * dv);
    let bw = grid.bandwidth();
    let mut a = BandMatrix::zeros(mu * mv, bw, bw);
    let mut weight = vec![0.0; mu * mv];
    let mut potential = vec![0.0; mu * mv];
    let h2 = h * h;
    for iu in 0..mu {
        let u = gu.node(iu);
        for iv in 0..mv {
            let v = gv.node(iv);
            let row = grid.flat(iu, iv);
            let wgt = 1.0 / domain.fprime(Complex64::new(u, v)).norm_sqr();
            weight[row] = wgt;
            potential[row] = v;
            let cu = h2 * wgt * inv_du2;
            let cv = h2 * wgt * inv_dv2;
            a.add(row, row, Complex64::new(2.0 * (cu + cv), v));
            if iu + 1 < mu {
                let c = if iu == 0 { -2.0 * cu } else { -cu };
                a.add(row, grid.flat(iu + 1, iv), Complex64::new(c, 0.0));
            }
            if iu > 0 {
                let c = if iu == mu - 1 { -2.0 * cu } else { -cu };
                a.add(row, grid.flat(iu - 1, iv), Complex64::new(c, 0.0));
            }
            if iv + 1 < mv {
                a.add(row, grid.flat(iu, iv + 1), Complex64::new(-cv, 0.0));
            }
            if iv > 0 {
                a.add(row, grid.flat(iu, iv - 1), Complex64::new(-cv, 0.0));
            }
        }
    }
    Ok(FullOperator { matrix: a, grid, h, weight, potential })
}

impl FullOperator {
    /// Matrix-free application of the stencil; the assembly self-check
    /// compares this with the stored band action.
    pub fn apply_stencil(&self, x: &[Complex64], y: &mut [Complex64]) {
        let gu = self.grid.sigma_axis();
        let gv = self.grid.tau_axis();
        let (mu, mv) = (gu.len(), gv.len());
        let du = gu.spacing();
        let dv = gv.spacing();
        let h2 = self.h * self.h;
        for iu in 0..mu {
            for iv in 0..mv {
                let row = self.grid.flat(iu, iv);
                let wgt = self.weight[row];
                let cu = h2 * wgt / (du * du);
                let cv = h2 * wgt / (dv * dv);
                let mut acc = Complex64::new(2.0 * (cu + cv), self.potential[row]) * x[row];
                if iu + 1 < mu {
                    let c = if iu == 0 { 2.0 * cu } else { cu };
                    acc -= c * x[self.grid.flat(iu + 1, iv)];
                }
                if iu > 0 {
                    let c = if iu == mu - 1 { 2.0 * cu } else { cu };
                    acc -= c * x[self.grid.flat(iu - 1, iv)];
                }
                if iv + 1 < mv {
                    acc -= cv * x[self.grid.flat(iu, iv + 1)];
                }
                if iv > 0 {
                    acc -= cv * x[self.grid.flat(iu, iv - 1)];
                }
                y[row] = acc;
            }
        }
    }

    /// Relative residual ||(A - lambda) q|| / ||q|| for a trial field.
    pub fn residual(&self, q: &[Complex64], lambda: Complex64) -> f64 {
        let mut aq = vec![Complex64::new(0.0, 0.0); q.len()];
        self.matrix.matvec(q, &mut aq);
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for (a, b) in aq.iter().zip(q) {
            num += (a - lambda * b).norm_sqr();
            den += b.norm_sqr();
        }
        (num / den).sqrt()
    }

    /// k eigenvalues nearest `shift` with localization statistics computed
    /// in the physical boundary-layer coordinates.
    pub fn eig_near(
        &self,
        shift: Complex64,
        k: usize,
        start: Option<&[Complex64]>,
        opts: &ArnoldiOptions,
    ) -> Result<SpectralResult> {
        let mut sh = shift;
        let nudge = 1e-3 * self.h.powf(2.0 / 3.0) * Complex64::new(0.6, 0.8);
        for attempt in 0..3 {
            let mut shifted = self.matrix.clone();
            shifted.shift_diagonal(sh);
            match shifted.lu() {
                Ok(lu) => {
                    let pairs = shift_invert_eigs(&self.matrix, &lu, sh, k, start, opts)?;
                    let triples: Vec<_> =
                        pairs.into_iter().map(|p| (p.value, p.vector, p.residual)).collect();
                    let mut res = SpectralResult::from_pairs(triples);
                    res.localization = res.vectors.iter().map(|v| self.localization(v)).collect();
                    return Ok(res);
                }
                Err(Error::SingularFactorization { .. }) if attempt < 2 => sh += nudge,
                Err(e) => return Err(e),
            }
        }
        Err(Error::MissingEigenvalue { shift, attempts: 3 })
    }

    /// Resolvent norm samples 1/sigma_min(A - lambda).
    pub fn resolvent_probe(&self, lambdas: &[Complex64]) -> Result<Vec<ResolventSample>> {
        let mut out = Vec::with_capacity(lambdas.len());
        for &lam in lambdas {
            let mut shifted = self.matrix.clone();
            shifted.shift_diagonal(lam);
            let inv_norm = match shifted.lu() {
                Ok(lu) => 1.0 / smallest_singular_value(&lu, 1e-6, 200)?,
                Err(Error::SingularFactorization { .. }) => 1e12,
                Err(e) => return Err(e),
            };
            out.push(ResolventSample { lambda_re: lam.re, lambda_im: lam.im, inv_norm });
        }
        Ok(out)
    }

    pub fn localization(&self, vec: &[Complex64]) -> Localization {
        let gu = self.grid.sigma_axis();
        let gv = self.grid.tau_axis();
        let (mu, mv) = (gu.len(), gv.len());
        let mut mass = 0.0;
        let mut cu = 0.0;
        let mut cv = 0.0;
        for iu in 0..mu {
            for iv in 0..mv {
                let w = vec[self.grid.flat(iu, iv)].norm_sqr();
                mass += w;
                cu += w * gu.node(iu);
                cv += w * gv.node(iv);
            }
        }
        cu /= mass;
        cv /= mass;
        let mut vu = 0.0;
        let mut vv = 0.0;
        let mut boundary = 0.0;
        for iu in 0..mu {
            for iv in 0..mv {
                let w = vec[self.grid.flat(iu, iv)].norm_sqr();
                vu += w * (gu.node(iu) - cu).powi(2);
                vv += w * (gv.node(iv) - cv).powi(2);
                if iu < 2 || iu + 3 > mu {
                    boundary += w;
                }
            }
        }
        Localization {
            centroid: (cu, cv),
            widths: ((vu / mass).sqrt(), (vv / mass).sqrt()),
            boundary_mass: boundary / mass,
        }
    }

    /// Distance of |psi|^2-weighted mass from the nearest Dirichlet side in
    /// the v coordinate: the boundary-layer width of an eigenvector.
    pub fn layer_width(&self, vec: &[Complex64]) -> f64 {
        let gu = self.grid.sigma_axis();
        let gv = self.grid.tau_axis();
        let mut mass = 0.0;
        let mut m2 = 0.0;
        for iu in 0..gu.len() {
            for iv in 0..gv.len() {
                let w = vec[self.grid.flat(iu, iv)].norm_sqr();
                let v = gv.node(iv);
                let d = v.min(1.0 - v);
                mass += w;
                m2 += w * d * d;
            }
        }
        (m2 / mass).sqrt()
    }

    /// Width of |psi|^2 along the u coordinate about its centroid.
    pub fn tangential_width(&self, vec: &[Complex64]) -> f64 {
        let loc = self.localization(vec);
        loc.widths.0
    }
}
