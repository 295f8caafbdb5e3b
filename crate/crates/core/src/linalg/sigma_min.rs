//! Smallest singular value of a factored banded matrix: two-vector subspace
//! iteration on the normal equations (B^H B)^{-1}, which stays fast when the
//! two smallest singular values are nearly degenerate.

use crate::error::{Error, Result};
use crate::linalg::band::BandLu;
use crate::rng::SplitMix64;
use num_complex::Complex64;


fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Reusable iteration subspace for warm-started parameter sweeps.
pub struct SigmaMinState {
    v1: Vec<Complex64>,
    v2: Vec<Complex64>,
}

/// Smallest singular value of B given its LU factorization.
///
/// Relative accuracy ~`rtol`; errors out on stagnation past `max_iter`.
pub fn smallest_singular_value(lu: &BandLu, rtol: f64, max_iter: usize) -> Result<f64> {
    smallest_singular_value_warm(lu, rtol, max_iter, &mut None)
}

/// Warm-startable variant: when `state` holds the subspace of a nearby
/// spectral point, convergence typically takes a handful of iterations.
pub fn smallest_singular_value_warm(
    lu: &BandLu,
    rtol: f64,
    max_iter: usize,
    state: &mut Option<SigmaMinState>,
) -> Result<f64> {
    let n = lu.n;
    let (mut v1, mut v2) = match state.take() {
        Some(s) if s.v1.len() == n => (s.v1, s.v2),
        _ => {
            let mut rng = SplitMix64::new(0xABCD_EF01);
            let v1: Vec<Complex64> =
                (0..n).map(|_| Complex64::new(rng.next_f64(), rng.next_f64())).collect();
            let v2: Vec<Complex64> =
                (0..n).map(|_| Complex64::new(rng.next_f64(), rng.next_f64())).collect();
            (v1, v2)
        }
    };
    // orthonormalize the start pair
    let n1 = norm(&v1);
    for z in v1.iter_mut() {
        *z /= n1;
    }
    let c = dot(&v1, &v2);
    for (a, b) in v2.iter_mut().zip(&v1) {
        *a -= c * b;
    }
    let n2 = norm(&v2);
    for z in v2.iter_mut() {
        *z /= n2;
    }
    let mut sigma_prev = f64::INFINITY;
    for it in 0..max_iter {
        // y_i = M v_i with M = (B^H B)^{-1}
        let mut y1 = v1.clone();
        lu.solve_conj_transpose(&mut y1);
        lu.solve(&mut y1);
        let mut y2 = v2.clone();
        lu.solve_conj_transpose(&mut y2);
        lu.solve(&mut y2);
        // Rayleigh-Ritz on span(v1, v2): G = V^H M V is Hermitian
        let g11 = dot(&v1, &y1).re;
        let g12 = dot(&v1, &y2);
        let g22 = dot(&v2, &y2).re;
        let tr = g11 + g22;
        let det = g11 * g22 - g12.norm_sqr();
        let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
        let mu_max = (0.5 * tr + disc).max(1e-300);
        let sigma = 1.0 / mu_max.sqrt();
        let done = (sigma - sigma_prev).abs() <= rtol * sigma;
        sigma_prev = sigma;
        // next subspace = orthonormalized image
        let ny1 = norm(&y1);
        if !(ny1.is_finite() && ny1 > 0.0) {
            return Err(Error::SigmaMinStagnation { iters: it });
        }
        v1 = y1;
        for z in v1.iter_mut() {
            *z /= ny1;
        }
        let c = dot(&v1, &y2);
        for (a, b) in y2.iter_mut().zip(&v1) {
            *a -= c * b;
        }
        let ny2 = norm(&y2);
        v2 = y2;
        if ny2 > 1e-200 {
            for z in v2.iter_mut() {
                *z /= ny2;
            }
        }
        if done {
            *state = Some(SigmaMinState { v1, v2 });
            return Ok(sigma);
        }
    }
    Err(Error::SigmaMinStagnation { iters: max_iter })
}
