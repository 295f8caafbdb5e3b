//! Grids, boundary conditions, and the smooth cutoff family.

use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Bc {
    Dirichlet,
    Neumann,
}

/// 1D grid on [a, b] with `n` base interior points; a Neumann end adds its
/// boundary node as an unknown (ghost-eliminated to second order).
#[derive(Clone, Copy, Debug)]
pub struct Grid1D {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub bc_left: Bc,
    pub bc_right: Bc,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n: usize, bc_left: Bc, bc_right: Bc) -> Result<Self> {
        if b <= a {
            return Err(Error::Config(format!("grid requires b > a, got [{a}, {b}]")));
        }
        if n < 64 {
            return Err(Error::Config(format!("grid requires n >= 64, got {n}")));
        }
        Ok(Grid1D { a, b, n, bc_left, bc_right })
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.n as f64 + 1.0)
    }

    /// Number of unknowns.
    pub fn len(&self) -> usize {
        let mut m = self.n;
        if self.bc_left == Bc::Neumann {
            m += 1;
        }
        if self.bc_right == Bc::Neumann {
            m += 1;
        }
        m
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinate of unknown `k`.
    #[inline]
    pub fn node(&self, k: usize) -> f64 {
        let first = if self.bc_left == Bc::Neumann { 0 } else { 1 };
        self.a + self.spacing() * (first + k) as f64
    }
}

/// Smooth cutoff chi: identically 1 on |x| <= 1, identically 0 on |x| >= 2,
/// with a C-infinity taper in between chosen so sqrt(1 - chi^2) is smooth too.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CutoffSpec {
    pub b_exponent: f64,
    pub companion: bool,
}

impl CutoffSpec {
    pub fn new(b_exponent: f64) -> Result<Self> {
        if !(0.5 < b_exponent && b_exponent < 0.75) {
            return Err(Error::Config(format!(
                "cutoff exponent must lie in (1/2, 3/4), got {b_exponent}"
            )));
        }
        Ok(CutoffSpec { b_exponent, companion: false })
    }

    /// chi(x).
    pub fn chi(x: f64) -> f64 {
        let ax = x.abs();
        if ax <= 1.0 {
            1.0
        } else if ax >= 2.0 {
            0.0
        } else {
            let t = ax - 1.0;
            (1.0 - 1.0 / (1.0 - t * t)).exp()
        }
    }

    /// The companion cutoff sqrt(1 - chi^2).
    pub fn chi_check(x: f64) -> f64 {
        (1.0 - Self::chi(x).powi(2)).max(0.0).sqrt()
    }
}

/// Tensor grid for the (sigma, tau) half-strip models and the mapped square.
#[derive(Clone, Debug)]
pub struct Grid2D {
    pub sigma_range: (f64, f64),
    pub tau_range: (f64, f64),
    pub n_sigma: usize,
    pub n_tau: usize,
    /// [sigma_min side, sigma_max side, tau_min side, tau_max side]
    pub bc: [Bc; 4],
}

impl Grid2D {
    pub fn new(
        sigma_range: (f64, f64),
        tau_range: (f64, f64),
        n_sigma: usize,
        n_tau: usize,
        bc: [Bc; 4],
    ) -> Result<Self> {
        if !(sigma_range.1 > sigma_range.0 && tau_range.1 > tau_range.0) {
            return Err(Error::Config("grid ranges must be increasing".into()));
        }
        let g = Grid2D { sigma_range, tau_range, n_sigma, n_tau, bc };
        if g.len() > 4_000_000 {
            return Err(Error::Config(format!(
                "grid of {} unknowns exceeds the desk-scale guard",
                g.len()
            )));
        }
        Ok(g)
    }

    pub fn sigma_axis(&self) -> Grid1D {
        Grid1D {
            a: self.sigma_range.0,
            b: self.sigma_range.1,
            n: self.n_sigma,
            bc_left: self.bc[0],
            bc_right: self.bc[1],
        }
    }

    pub fn tau_axis(&self) -> Grid1D {
        Grid1D {
            a: self.tau_range.0,
            b: self.tau_range.1,
            n: self.n_tau,
            bc_left: self.bc[2],
            bc_right: self.bc[3],
        }
    }

    pub fn len(&self) -> usize {
        self.sigma_axis().len() * self.tau_axis().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when the tau axis is the fast (contiguous) index, which holds the
    /// LU bandwidth at min(n_sigma, n_tau).
    pub fn tau_fastest(&self) -> bool {
        self.tau_axis().len() <= self.sigma_axis().len()
    }

    /// Flatten (sigma index, tau index) to the unknown index.
    #[inline]
    pub fn flat(&self, is: usize, it: usize) -> usize {
        if self.tau_fastest() {
            is * self.tau_axis().len() + it
        } else {
            it * self.sigma_axis().len() + is
        }
    }

    pub fn bandwidth(&self) -> usize {
        self.sigma_axis().len().min(self.tau_axis().len())
    }
}
