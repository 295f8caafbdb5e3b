//! Complex banded matrices with LU factorization (partial pivoting).
//!
//! Storage follows the LAPACK general-band layout: column j of the matrix
//! occupies a slice of length 2*kl+ku+1, with A(i,j) at band row kl+ku+i-j.
//! The extra kl leading rows hold fill-in generated by row interchanges.

use crate::error::{Error, Result};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone)]
pub struct BandMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    ldab: usize,
    ab: Vec<Complex64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, ldab, ab: vec![ZERO; ldab * n] }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.ku >= j && j + self.kl >= i, "({i},{j}) outside band");
        j * self.ldab + (self.kl + self.ku + i - j)
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i + self.ku >= j && j + self.kl >= i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if self.in_band(i, j) {
            self.ab[self.idx(i, j)]
        } else {
            ZERO
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let k = self.idx(i, j);
        self.ab[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        let k = self.idx(i, j);
        self.ab[k] += v;
    }

    /// Shift the diagonal: A <- A - lambda I.
    pub fn shift_diagonal(&mut self, lambda: Complex64) {
        for i in 0..self.n {
            let k = self.idx(i, i);
            self.ab[k] -= lambda;
        }
    }

    /// y = A x.
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for yi in y.iter_mut() {
            *yi = ZERO;
        }
        for j in 0..self.n {
            let xj = x[j];
            if xj == ZERO {
                continue;
            }
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            let base = j * self.ldab + self.kl + self.ku;
            for i in lo..=hi {
                y[i] += self.ab[base + i - j] * xj;
            }
        }
    }

    /// y = A^H x.
    pub fn matvec_conj_transpose(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            let base = j * self.ldab + self.kl + self.ku;
            let mut acc = ZERO;
            for i in lo..=hi {
                acc += self.ab[base + i - j].conj() * x[i];
            }
            y[j] = acc;
        }
    }

    /// Max-row-sum norm (infinity norm).
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0f64; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            let base = j * self.ldab + self.kl + self.ku;
            for i in lo..=hi {
                rows[i] += self.ab[base + i - j].norm();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// LU factorization with partial pivoting; consumes the matrix.
    pub fn lu(mut self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        let kv = kl + ku; // width of U's band after pivoting
        let mut ipiv = vec![0usize; n];
        // The factorization views the storage as a (2kl+ku+1) x n array whose
        // rows kl..2kl+ku hold the matrix; fill spills into rows 0..kl.
        for j in 0..n {
            // pivot search in column j among rows j..=min(n-1, j+kl)
            let last = (j + kl).min(n - 1);
            let mut piv = j;
            let mut pmax = self.band_entry(j, j).norm();
            for i in (j + 1)..=last {
                let v = self.band_entry(i, j).norm();
                if v > pmax {
                    pmax = v;
                    piv = i;
                }
            }
            ipiv[j] = piv;
            if pmax == 0.0 {
                return Err(Error::SingularFactorization { col: j });
            }
            if piv != j {
                // swap rows j and piv across the columns they intersect
                let jmax = (j + kv).min(n - 1);
                for col in j..=jmax {
                    let a = self.band_index_checked(j, col);
                    let b = self.band_index_checked(piv, col);
                    if let (Some(a), Some(b)) = (a, b) {
                        self.ab.swap(a, b);
                    } else if let Some(a) = a {
                        let tmp = self.ab[a];
                        self.ab[a] = ZERO;
                        let b = self.band_index_force(piv, col);
                        self.ab[b] = tmp;
                    } else if let Some(b) = b {
                        let tmp = self.ab[b];
                        self.ab[b] = ZERO;
                        let a = self.band_index_force(j, col);
                        self.ab[a] = tmp;
                    }
                }
            }
            // multipliers into L's slots (contiguous within column j)
            let diag = self.band_entry(j, j);
            let col_j = self.band_index_force(j, j);
            for i in (j + 1)..=last {
                self.ab[col_j + (i - j)] /= diag;
            }
            // rank-one update, one trailing column at a time (contiguous)
            let jmax = (j + kv).min(n - 1);
            let nrows = last - j;
            for col in (j + 1)..=jmax {
                let ujc = self.band_entry_fill(j, col);
                if ujc == ZERO {
                    continue;
                }
                let col_base = self.band_index_force(j, col);
                for r in 1..=nrows {
                    let m = self.ab[col_j + r];
                    if m != ZERO {
                        self.ab[col_base + r] -= m * ujc;
                    }
                }
            }
        }
        Ok(BandLu { n, kl, ku, ldab: self.ldab, ab: self.ab, ipiv })
    }

    // entry access during factorization, allowing the fill region (i can be
    // up to kl above the nominal band and anywhere within kl below)
    #[inline]
    fn band_entry(&self, i: usize, j: usize) -> Complex64 {
        self.ab[j * self.ldab + (self.kl + self.ku + i - j)]
    }

    #[inline]
    fn band_entry_fill(&self, i: usize, j: usize) -> Complex64 {
        // i + kl + ku >= j is guaranteed within the factorization loops
        self.ab[j * self.ldab + (self.kl + self.ku + i) - j]
    }

    #[inline]
    fn band_index_force(&self, i: usize, j: usize) -> usize {
        j * self.ldab + (self.kl + self.ku + i) - j
    }

    #[inline]
    fn band_index_checked(&self, i: usize, j: usize) -> Option<usize> {
        if j > i + self.kl + self.ku || i > j + self.kl {
            return None;
        }
        Some(j * self.ldab + (self.kl + self.ku + i) - j)
    }
}

/// Factored form P A = L U (band storage).
pub struct BandLu {
    pub n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<Complex64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    #[inline]
    fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.ab[j * self.ldab + (self.kl + self.ku + i) - j]
    }

    /// Solve A x = b in place.
    pub fn solve(&self, b: &mut [Complex64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let kv = self.kl + self.ku;
        // forward: apply P and L^{-1}
        for j in 0..n {
            let piv = self.ipiv[j];
            if piv != j {
                b.swap(j, piv);
            }
            let bj = b[j];
            if bj != ZERO {
                let last = (j + self.kl).min(n - 1);
                for i in (j + 1)..=last {
                    let l = self.entry(i, j);
                    b[i] -= l * bj;
                }
            }
        }
        // back substitution with U (bandwidth kl+ku)
        for j in (0..n).rev() {
            let bj = b[j] / self.entry(j, j);
            b[j] = bj;
            if bj != ZERO {
                let lo = j.saturating_sub(kv);
                for i in lo..j {
                    b[i] -= self.entry(i, j) * bj;
                }
            }
        }
    }

    /// Solve A^H x = b in place (using the factors of A).
    ///
    /// The factorization represents A as an interleaved product of pivots
    /// and eliminations, so the adjoint solve must interleave the conjugate
    /// eliminations with the pivot swaps on the way back.
    pub fn solve_conj_transpose(&self, b: &mut [Complex64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let kv = self.kl + self.ku;
        // U^H t = b: forward substitution with the lower-triangular U^H
        for j in 0..n {
            let lo = j.saturating_sub(kv);
            let mut acc = b[j];
            for i in lo..j {
                acc -= self.entry(i, j).conj() * b[i];
            }
            b[j] = acc / self.entry(j, j).conj();
        }
        // (L_{n-1}^H P_{n-1} ... L_0^H P_0) x = t
        for j in (0..n).rev() {
            let last = (j + self.kl).min(n - 1);
            let mut acc = b[j];
            for i in (j + 1)..=last {
                acc -= self.entry(i, j).conj() * b[i];
            }
            b[j] = acc;
            let piv = self.ipiv[j];
            if piv != j {
                b.swap(j, piv);
            }
        }
    }
}
