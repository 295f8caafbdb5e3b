//! Small dense complex eigenproblems: Householder reduction to Hessenberg
//! form and a shifted-QR iteration. Used for the Arnoldi projected problem
//! and as a brute-force oracle on small discretizations.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Column-major dense matrix, minimal surface.
#[derive(Clone)]
pub struct DenseMatrix {
    pub n: usize,
    pub a: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, a: vec![ZERO; n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.a[j * self.n + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[j * self.n + i] = v;
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.n;
        for yi in y.iter_mut() {
            *yi = ZERO;
        }
        for j in 0..n {
            let xj = x[j];
            if xj == ZERO {
                continue;
            }
            let col = &self.a[j * n..(j + 1) * n];
            for i in 0..n {
                y[i] += col[i] * xj;
            }
        }
    }
}

/// Reduce to upper Hessenberg form by Householder similarity (in place).
pub fn hessenberg_reduce(m: &mut DenseMatrix) {
    let n = m.n;
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k below the subdiagonal
        let mut norm2 = 0.0f64;
        for i in (k + 1)..n {
            norm2 += m.get(i, k).norm_sqr();
        }
        if norm2 == 0.0 {
            continue;
        }
        let x0 = m.get(k + 1, k);
        let alpha = if x0 == ZERO {
            Complex64::new(-norm2.sqrt(), 0.0)
        } else {
            -x0 / x0.norm() * norm2.sqrt()
        };
        let mut v: Vec<Complex64> = vec![ZERO; n];
        v[k + 1] = x0 - alpha;
        for i in (k + 2)..n {
            v[i] = m.get(i, k);
        }
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // A <- (I - beta v v^H) A
        for j in 0..n {
            let mut dot = ZERO;
            for i in (k + 1)..n {
                dot += v[i].conj() * m.get(i, j);
            }
            dot *= beta;
            for i in (k + 1)..n {
                let val = m.get(i, j) - v[i] * dot;
                m.set(i, j, val);
            }
        }
        // A <- A (I - beta v v^H)
        for i in 0..n {
            let mut dot = ZERO;
            for j in (k + 1)..n {
                dot += m.get(i, j) * v[j];
            }
            dot *= beta;
            for j in (k + 1)..n {
                let val = m.get(i, j) - dot * v[j].conj();
                m.set(i, j, val);
            }
        }
    }
    // clean below the subdiagonal
    for j in 0..n {
        for i in (j + 2)..n {
            m.set(i, j, ZERO);
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift QR with
/// Wilkinson shifts and deflation. Destroys `h`.
pub fn hessenberg_eigenvalues(h: &mut DenseMatrix) -> Vec<Complex64> {
    let n = h.n;
    let mut eigs = vec![ZERO; n];
    let mut hi = n; // active block is 0..hi
    let mut iter_since_deflation = 0usize;
    let max_total = 60 * n.max(1);
    let mut total = 0usize;
    while hi > 0 {
        if hi == 1 {
            eigs[0] = h.get(0, 0);
            break;
        }
        // look for a negligible subdiagonal within the active block
        let mut split = 0usize;
        for i in (1..hi).rev() {
            let s = h.get(i - 1, i - 1).norm() + h.get(i, i).norm();
            let s = if s == 0.0 { 1.0 } else { s };
            if h.get(i, i - 1).norm() <= 1e-16 * s {
                h.set(i, i - 1, ZERO);
                split = i;
                break;
            }
        }
        if split == hi - 1 {
            // 1x1 block deflates
            eigs[hi - 1] = h.get(hi - 1, hi - 1);
            hi -= 1;
            iter_since_deflation = 0;
            continue;
        }
        total += 1;
        if total > max_total {
            // return the diagonal as the best available estimate
            for i in 0..hi {
                eigs[i] = h.get(i, i);
            }
            break;
        }
        // Wilkinson shift from the trailing 2x2 of the active block
        let a = h.get(hi - 2, hi - 2);
        let b = h.get(hi - 2, hi - 1);
        let c = h.get(hi - 1, hi - 2);
        let d = h.get(hi - 1, hi - 1);
        let tr = a + d;
        let det = a * d - b * c;
        let disc = (tr * tr - 4.0 * det).sqrt();
        let r1 = 0.5 * (tr + disc);
        let r2 = 0.5 * (tr - disc);
        let mut shift = if (r1 - d).norm() < (r2 - d).norm() { r1 } else { r2 };
        if iter_since_deflation > 0 && iter_since_deflation.is_multiple_of(12) {
            // exceptional shift to break cycles
            shift = d + Complex64::new(1.5 * h.get(hi - 1, hi - 2).norm(), 0.0);
        }
        iter_since_deflation += 1;
        qr_sweep(h, split, hi, shift);
    }
    eigs
}

/// One explicit single-shift QR step on the active block lo..hi: factor
/// (H - shift I) = QR by Givens rotations, then form RQ + shift I.
fn qr_sweep(h: &mut DenseMatrix, lo: usize, hi: usize, shift: Complex64) {
    let m = hi - lo;
    if m < 2 {
        return;
    }
    for i in lo..hi {
        let v = h.get(i, i) - shift;
        h.set(i, i, v);
    }
    let mut cs = vec![(Complex64::new(1.0, 0.0), ZERO); m - 1];
    for k in lo..(hi - 1) {
        let x = h.get(k, k);
        let y = h.get(k + 1, k);
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (Complex64::new(1.0, 0.0), ZERO)
        } else {
            (x / r, y / r)
        };
        cs[k - lo] = (c, s);
        // rows k, k+1 <- G * rows, with G = [[c*, s*], [-s, c]]
        for j in k..hi {
            let a = h.get(k, j);
            let b = h.get(k + 1, j);
            h.set(k, j, c.conj() * a + s.conj() * b);
            h.set(k + 1, j, -s * a + c * b);
        }
    }
    for k in lo..(hi - 1) {
        let (c, s) = cs[k - lo];
        // columns k, k+1 <- columns * G^H
        let row_hi = (k + 2).min(hi);
        for r in lo..row_hi {
            let a = h.get(r, k);
            let b = h.get(r, k + 1);
            h.set(r, k, c * a + s * b);
            h.set(r, k + 1, -s.conj() * a + c.conj() * b);
        }
    }
    for i in lo..hi {
        let v = h.get(i, i) + shift;
        h.set(i, i, v);
    }
    // restore exact Hessenberg zeros that rounding may have perturbed
    for j in lo..hi.saturating_sub(2) {
        for i in (j + 2)..hi {
            h.set(i, j, ZERO);
        }
    }
}

/// All eigenvalues of a dense complex matrix (destroys the input copy).
pub fn dense_eigenvalues(mut m: DenseMatrix) -> Vec<Complex64> {
    hessenberg_reduce(&mut m);
    hessenberg_eigenvalues(&mut m)
}

/// Dense LU solve with partial pivoting, for small auxiliary systems.
pub fn dense_solve(mut a: DenseMatrix, b: &mut [Complex64]) -> bool {
    let n = a.n;
    let mut piv: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut imax, mut vmax) = (k, a.get(k, k).norm());
        for i in (k + 1)..n {
            let v = a.get(i, k).norm();
            if v > vmax {
                imax = i;
                vmax = v;
            }
        }
        if vmax == 0.0 {
            return false;
        }
        if imax != k {
            for j in 0..n {
                let t = a.get(k, j);
                a.set(k, j, a.get(imax, j));
                a.set(imax, j, t);
            }
            piv.swap(k, imax);
            b.swap(k, imax);
        }
        let d = a.get(k, k);
        for i in (k + 1)..n {
            let m = a.get(i, k) / d;
            a.set(i, k, m);
            if m != ZERO {
                for j in (k + 1)..n {
                    let v = a.get(i, j) - m * a.get(k, j);
                    a.set(i, j, v);
                }
                b[i] -= m * b[k];
            }
        }
    }
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in (i + 1)..n {
            acc -= a.get(i, j) * b[j];
        }
        b[i] = acc / a.get(i, i);
    }
    true
}

/// Eigenvector of a Hessenberg matrix for a computed eigenvalue, by one pass
/// of inverse iteration from a deterministic start.
pub fn hessenberg_eigenvector(h: &DenseMatrix, lambda: Complex64) -> Vec<Complex64> {
    let n = h.n;
    let mut shifted = h.clone();
    let eps = 1e-13 * (1.0 + lambda.norm());
    for i in 0..n {
        let v = shifted.get(i, i) - lambda + Complex64::new(eps, eps);
        shifted.set(i, i, v);
    }
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.3 * (i as f64).sin(), 0.1 * (i as f64).cos()))
        .collect();
    for _ in 0..3 {
        if !dense_solve(shifted.clone(), &mut v) {
            break;
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
    v
}
