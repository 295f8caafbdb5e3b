//! Shift-invert Arnoldi for banded complex operators.
//!
//! The Krylov space is built on (A - shift)^{-1} using a banded LU; Ritz
//! pairs are extracted from the projected Hessenberg matrix and residuals are
//! always measured against the original operator A.

use crate::error::{Error, Result};
use crate::linalg::band::{BandLu, BandMatrix};
use crate::linalg::dense::{hessenberg_eigenvalues, hessenberg_eigenvector, DenseMatrix};
use crate::rng::SplitMix64;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub struct ArnoldiOptions {
    pub subspace: usize,
    pub max_restarts: usize,
    pub residual_tol: f64,
    pub seed: u64,
}

impl Default for ArnoldiOptions {
    fn default() -> Self {
        ArnoldiOptions { subspace: 40, max_restarts: 10, residual_tol: 1e-8, seed: 0x5EED }
    }
}

pub struct EigenPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Find the `k` eigenvalues of `a` nearest `shift`.
///
/// `lu` must be the factorization of (a - shift*I). The start vector, when
/// not supplied, is seeded deterministically.
pub fn shift_invert_eigs(
    a: &BandMatrix,
    lu: &BandLu,
    shift: Complex64,
    k: usize,
    start: Option<&[Complex64]>,
    opts: &ArnoldiOptions,
) -> Result<Vec<EigenPair>> {
    let n = a.n;
    let m = opts.subspace.min(n);
    let mut v0: Vec<Complex64> = match start {
        Some(v) => v.to_vec(),
        None => {
            let mut rng = SplitMix64::new(opts.seed);
            (0..n).map(|_| Complex64::new(rng.next_f64(), rng.next_f64())).collect()
        }
    };
    let nv = norm(&v0);
    if nv == 0.0 {
        return Err(Error::ArnoldiNonConvergence { restarts: 0, best: f64::INFINITY });
    }
    for z in v0.iter_mut() {
        *z /= nv;
    }

    let a_scale = a.norm_inf().max(1.0);
    let mut best_resid = f64::INFINITY;

    for restart in 0..=opts.max_restarts {
        // Arnoldi factorization of OP = (A - shift)^{-1}
        let mut basis: Vec<Vec<Complex64>> = vec![v0.clone()];
        let mut h = DenseMatrix::zeros(m + 1); // (m+1) x m used
        let mut mdone = m;
        for j in 0..m {
            let mut w = basis[j].clone();
            lu.solve(&mut w);
            // modified Gram-Schmidt, two passes
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c = dot_conj(q, &w);
                    if c != ZERO {
                        for (wl, ql) in w.iter_mut().zip(q) {
                            *wl -= c * ql;
                        }
                        let prev = h.get(i, j);
                        h.set(i, j, prev + c);
                    }
                }
            }
            let hj = norm(&w);
            h.set(j + 1, j, Complex64::new(hj, 0.0));
            if hj < 1e-14 {
                mdone = j + 1; // exact invariant subspace
                break;
            }
            for z in w.iter_mut() {
                *z /= hj;
            }
            basis.push(w);
        }

        // Ritz pairs of the leading mdone x mdone block
        let mut hm = DenseMatrix::zeros(mdone);
        for j in 0..mdone {
            for i in 0..mdone.min(j + 2) {
                hm.set(i, j, h.get(i, j));
            }
        }
        let mut hm_eig = hm.clone();
        let mut ritz = hessenberg_eigenvalues(&mut hm_eig);
        // nearest to shift in A-space = largest |mu| in OP-space
        ritz.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
        let take = k.min(ritz.len());

        let mut pairs: Vec<EigenPair> = Vec::with_capacity(take);
        let mut worst = 0.0f64;
        for mu in ritz.iter().take(take) {
            if mu.norm() == 0.0 {
                continue;
            }
            let y = hessenberg_eigenvector(&hm, *mu);
            let mut x = vec![ZERO; n];
            for (j, yj) in y.iter().enumerate().take(mdone) {
                for (xl, bl) in x.iter_mut().zip(&basis[j]) {
                    *xl += yj * bl;
                }
            }
            let xn = norm(&x);
            for z in x.iter_mut() {
                *z /= xn;
            }
            let lambda = shift + 1.0 / mu;
            let mut ax = vec![ZERO; n];
            a.matvec(&x, &mut ax);
            for (axl, xl) in ax.iter_mut().zip(&x) {
                *axl -= lambda * xl;
            }
            let resid = norm(&ax) / a_scale.max(lambda.norm());
            worst = worst.max(resid);
            pairs.push(EigenPair { value: lambda, vector: x, residual: resid });
        }

        if !pairs.is_empty() && worst <= opts.residual_tol {
            pairs.sort_by(|p, q| p.value.re.total_cmp(&q.value.re));
            return Ok(pairs);
        }
        best_resid = best_resid.min(worst);
        if restart == opts.max_restarts {
            break;
        }
        // restart from the best Ritz vector (or their sum when k > 1)
        if let Some(p) = pairs.first() {
            v0 = p.vector.clone();
            if pairs.len() > 1 {
                for q in pairs.iter().skip(1) {
                    for (dst, src) in v0.iter_mut().zip(&q.vector) {
                        *dst += src;
                    }
                }
                let nv = norm(&v0);
                for z in v0.iter_mut() {
                    *z /= nv;
                }
            }
        } else {
            let mut rng = SplitMix64::new(opts.seed ^ (restart as u64 + 1));
            v0 = (0..n).map(|_| Complex64::new(rng.next_f64(), rng.next_f64())).collect();
            let nv = norm(&v0);
            for z in v0.iter_mut() {
                *z /= nv;
            }
        }
    }
    Err(Error::ArnoldiNonConvergence { restarts: opts.max_restarts, best: best_resid })
}
