//! Complex Airy function of the first kind, its derivative, and their zeros.
//!
//! Evaluation is dependency-free and split by region: a Maclaurin series near
//! the origin, the Poincare asymptotic expansion far out in the decay sector,
//! and Taylor-series marching of the Airy ODE y'' = z*y along rays to bridge
//! the gap (inward from the asymptotic anchor, which is the stable direction)
//! and to reach the oscillatory region near the negative real axis.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Ai(0) = 3^(-2/3) / Gamma(2/3).
pub const AI_ZERO: f64 = 0.355_028_053_887_817_24;
/// Ai'(0) = -3^(-1/3) / Gamma(1/3).
pub const AIP_ZERO: f64 = -0.258_819_403_792_806_8;

const SERIES_RADIUS: f64 = 4.0;
const ASYMPTOTIC_RADIUS: f64 = 12.0;
const DECAY_SECTOR_ARG: f64 = 1.8;

/// Ai and Ai' evaluated together (they share all intermediate work).
pub fn airy_ai_both(z: Complex64) -> Result<(Complex64, Complex64)> {
    let r = z.norm();
    if r <= SERIES_RADIUS {
        return Ok(maclaurin(z));
    }
    let arg = z.arg();
    if arg.abs() <= DECAY_SECTOR_ARG {
        if r >= ASYMPTOTIC_RADIUS {
            asymptotic(z)
        } else {
            // anchor on the same ray and march inward
            let anchor = Complex64::from_polar(ASYMPTOTIC_RADIUS, arg);
            let (ai, aip) = asymptotic(anchor)?;
            Ok(march(anchor, z, ai, aip))
        }
    } else {
        if r > 45.0 {
            return Err(Error::AiryOverflow { re_zeta: -(r.powf(1.5)) });
        }
        // oscillatory / growth sector: start from the series on the same ray
        let anchor = Complex64::from_polar(SERIES_RADIUS, arg);
        let (ai, aip) = maclaurin(anchor);
        Ok(march(anchor, z, ai, aip))
    }
}

/// Airy function of the first kind.
pub fn airy_ai(z: Complex64) -> Result<Complex64> {
    airy_ai_both(z).map(|(ai, _)| ai)
}

/// Derivative of the Airy function of the first kind.
pub fn airy_ai_prime(z: Complex64) -> Result<Complex64> {
    airy_ai_both(z).map(|(_, aip)| aip)
}

/// Real-argument evaluation; the imaginary parts vanish identically along the
/// real axis for every branch used here.
pub fn airy_ai_real(x: f64) -> (f64, f64) {
    let (ai, aip) = airy_ai_both(Complex64::new(x, 0.0)).expect("real axis is always in range");
    (ai.re, aip.re)
}

/// Maclaurin series Ai(z) = Ai(0) f(z) + Ai'(0) g(z), valid for moderate |z|.
fn maclaurin(z: Complex64) -> (Complex64, Complex64) {
    let z3 = z * z * z;
    // f = sum f_k,  f' = sum f_k * 3k / z ; g = sum g_k, g' = sum g_k (3k+1)/z
    let mut fk = Complex64::new(1.0, 0.0);
    let mut gk = z;
    let mut f = fk;
    let mut g = gk;
    let mut fp = Complex64::new(0.0, 0.0);
    let mut gp = Complex64::new(1.0, 0.0);
    // gp accumulates d/dz of each term directly to stay finite at z = 0.
    let mut fp_term;
    let mut gp_term;
    for k in 0..60 {
        let kf = k as f64;
        fk *= z3 / ((3.0 * kf + 2.0) * (3.0 * kf + 3.0));
        gk *= z3 / ((3.0 * kf + 3.0) * (3.0 * kf + 4.0));
        f += fk;
        g += gk;
        // term derivatives: d/dz z^{3k+3}-type handled via factor (3k+3)/z etc.
        fp_term = fk * (3.0 * kf + 3.0) / z;
        gp_term = gk * (3.0 * kf + 4.0) / z;
        if z.norm() == 0.0 {
            fp_term = Complex64::new(0.0, 0.0);
            gp_term = Complex64::new(0.0, 0.0);
        }
        fp += fp_term;
        gp += gp_term;
        if fk.norm() < 1e-18 * f.norm().max(1.0) && gk.norm() < 1e-18 * g.norm().max(1.0) {
            break;
        }
    }
    let ai = AI_ZERO * f + AIP_ZERO * g;
    let aip = AI_ZERO * fp + AIP_ZERO * gp;
    (ai, aip)
}

/// Poincare expansion in the decay sector, summed to its optimal truncation.
fn asymptotic(z: Complex64) -> Result<(Complex64, Complex64)> {
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    if zeta.re < -45.0 {
        return Err(Error::AiryOverflow { re_zeta: zeta.re });
    }
    let inv_zeta = 1.0 / zeta;
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let z_quarter = z.powf(0.25);

    let mut uk = 1.0_f64;
    let mut term_u = Complex64::new(1.0, 0.0);
    let mut sum_u = term_u;
    let mut term_v;
    let mut sum_v = Complex64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 0..24 {
        let kf = k as f64;
        uk *= (3.0 * kf + 0.5) * (3.0 * kf + 1.5) * (3.0 * kf + 2.5)
            / (54.0 * (kf + 1.0) * (kf + 0.5));
        let vk = uk * (6.0 * (kf + 1.0) + 1.0) / (1.0 - 6.0 * (kf + 1.0));
        term_u = Complex64::new(uk, 0.0) * (-inv_zeta).powu(k as u32 + 1);
        term_v = Complex64::new(vk, 0.0) * (-inv_zeta).powu(k as u32 + 1);
        let mag = term_u.norm();
        if mag > last {
            break; // asymptotic series started diverging; stop at optimal truncation
        }
        sum_u += term_u;
        sum_v += term_v;
        last = mag;
        if mag < 1e-17 {
            break;
        }
    }
    let pre = (-zeta).exp() / (2.0 * sqrt_pi);
    let ai = pre / z_quarter * sum_u;
    let aip = -pre * z_quarter * sum_v;
    Ok((ai, aip))
}

/// Taylor-series marching of y'' = z*y from `from` to `to` along the segment,
/// carrying (Ai, Ai') as initial data.
fn march(from: Complex64, to: Complex64, ai0: Complex64, aip0: Complex64) -> (Complex64, Complex64) {
    let mut z0 = from;
    let mut y = ai0;
    let mut yp = aip0;
    let total = to - from;
    let nsteps = total.norm().ceil().max(1.0) as usize;
    let step = total / nsteps as f64;
    let mut c = [Complex64::new(0.0, 0.0); 42];
    for _ in 0..nsteps {
        c[0] = y;
        c[1] = yp;
        let mut val = c[0] + c[1] * step;
        let mut der = c[1];
        let mut pw = step;
        for n in 0..40 {
            let nf = n as f64;
            let prev = if n == 0 { Complex64::new(0.0, 0.0) } else { c[n - 1] };
            c[n + 2] = (z0 * c[n] + prev) / ((nf + 2.0) * (nf + 1.0));
            der += c[n + 2] * (nf + 2.0) * pw;
            pw *= step;
            let t = c[n + 2] * pw;
            val += t;
            if t.norm() < 1e-18 * val.norm().max(1e-280) && n > 4 {
                break;
            }
        }
        y = val;
        yp = der;
        z0 += step;
    }
    (y, yp)
}

/// The asymptotic seed for the k-th zero of Ai.
fn zero_guess(k: usize) -> f64 {
    -(3.0 * std::f64::consts::PI * (4.0 * k as f64 - 1.0) / 8.0).powf(2.0 / 3.0)
}

/// The asymptotic seed for the k-th zero of Ai'.
fn prime_zero_guess(k: usize) -> f64 {
    if k == 1 {
        return -1.0;
    }
    -(3.0 * std::f64::consts::PI * (4.0 * k as f64 - 3.0) / 8.0).powf(2.0 / 3.0)
}

pub const MAX_ZERO_INDEX: usize = 20;

fn refine_zero(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut flo = f(lo);
    debug_assert!(flo * f(hi) <= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || hi - lo < 1e-15 {
            return mid;
        }
        if flo * fm <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    0.5 * (lo + hi)
}

/// k-th zero of Ai (k = 1 is the rightmost), bracketed from the asymptotic
/// seed and polished by Newton.
pub fn airy_zero(k: usize) -> Result<f64> {
    if k == 0 || k > MAX_ZERO_INDEX {
        return Err(Error::ZeroIndexOutOfRange { k, max: MAX_ZERO_INDEX });
    }
    let guess = zero_guess(k);
    let (mut lo, mut hi) = bracket(guess, |x| airy_ai_real(x).0)?;
    let root = refine_zero(lo, hi, |x| airy_ai_real(x).0);
    let mut x = root;
    for _ in 0..4 {
        let (ai, aip) = airy_ai_real(x);
        let dx = ai / aip;
        x -= dx;
        if dx.abs() < 1e-15 {
            break;
        }
    }
    // keep inside the bracket in case Newton overshoots
    if x < lo.min(hi) || x > lo.max(hi) {
        std::mem::swap(&mut lo, &mut hi);
        x = root;
    }
    Ok(x)
}

/// k-th zero of Ai'.
pub fn airy_prime_zero(k: usize) -> Result<f64> {
    if k == 0 || k > MAX_ZERO_INDEX {
        return Err(Error::ZeroIndexOutOfRange { k, max: MAX_ZERO_INDEX });
    }
    let guess = prime_zero_guess(k);
    let (lo, hi) = bracket(guess, |x| airy_ai_real(x).1)?;
    let root = refine_zero(lo, hi, |x| airy_ai_real(x).1);
    let mut x = root;
    for _ in 0..4 {
        let (ai, aip) = airy_ai_real(x);
        // Ai'' = x * Ai
        let dx = aip / (x * ai);
        x -= dx;
        if dx.abs() < 1e-15 {
            break;
        }
    }
    Ok(x)
}

fn bracket(guess: f64, f: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let mut half_width = 0.05_f64;
    for _ in 0..12 {
        let lo = guess - half_width;
        let hi = guess + half_width;
        if f(lo) * f(hi) < 0.0 {
            return Ok((lo, hi));
        }
        half_width *= 1.7;
    }
    Err(Error::ZeroIndexOutOfRange { k: 0, max: MAX_ZERO_INDEX })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_origin() {
        let (ai, aip) = airy_ai_real(0.0);
        assert!((ai - AI_ZERO).abs() < 1e-15);
        assert!((aip - AIP_ZERO).abs() < 1e-15);
    }

    #[test]
    fn known_real_values() {
        // reference values from the 26-digit tables in Abramowitz & Stegun 10.4
        let (ai1, aip1) = airy_ai_real(1.0);
        assert!((ai1 - 0.135_292_416_312_881_4).abs() < 1e-13);
        assert!((aip1 - (-0.159_147_441_296_793_2)).abs() < 1e-13);
        let (aim1, _) = airy_ai_real(-1.0);
        assert!((aim1 - 0.535_560_883_292_352_1).abs() < 1e-13);
    }

    #[test]
    fn seam_continuity_series_march() {
        // cross-check the |z| = 4 seam on several rays
        for &arg in &[0.0f64, 0.3, std::f64::consts::FRAC_PI_6, 3.0] {
            for &r in &[3.9f64, 4.1] {
                let z = Complex64::from_polar(r, arg);
                let (series, seriesp) = maclaurin(z);
                let (v, vp) = airy_ai_both(z).unwrap();
                assert!(
                    (series - v).norm() <= 1e-10 * v.norm().max(1e-12),
                    "Ai mismatch at r={r} arg={arg}: {series} vs {v}"
                );
                assert!((seriesp - vp).norm() <= 1e-10 * vp.norm().max(1e-12));
            }
        }
    }

    #[test]
    fn seam_continuity_march_asymptotic() {
        for &arg in &[0.0f64, 0.4, 1.0] {
            for &r in &[11.0f64, 12.5, 14.0] {
                let z = Complex64::from_polar(r, arg);
                let anchor = Complex64::from_polar(16.0, arg);
                let (a, ap) = asymptotic(anchor).unwrap();
                let (m, mp) = march(anchor, z, a, ap);
                let (v, vp) = airy_ai_both(z).unwrap();
                assert!((m - v).norm() <= 1e-11 * v.norm(), "at r={r} arg={arg}");
                assert!((mp - vp).norm() <= 1e-11 * vp.norm());
            }
        }
    }

    #[test]
    fn wronskian_along_rays() {
        // Ai(z)Bi'(z) - Ai'(z)Bi(z) = 1/pi; probe instead the ODE-consistency
        // of the pair by a second-difference along the ray.
        let h = 1e-3;
        for &x in &[-8.0f64, -3.0, 2.0, 6.0, 9.0] {
            let (_, aipm) = airy_ai_real(x - h);
            let (ai, _) = airy_ai_real(x);
            let (_, aipp) = airy_ai_real(x + h);
            let second = (aipp - aipm) / (2.0 * h);
            assert!(
                (second - x * ai).abs() < 2e-6 * ai.abs().max(1.0),
                "ODE residual at {x}"
            );
        }
    }

    #[test]
    fn first_zeros() {
        let nu1 = airy_zero(1).unwrap();
        let nu2 = airy_zero(2).unwrap();
        assert!((nu1 - (-2.338_107_410_459_767)).abs() < 1e-10);
        assert!((nu2 - (-4.087_949_444_130_97)).abs() < 1e-10);
        let nup1 = airy_prime_zero(1).unwrap();
        assert!((nup1 - (-1.018_792_971_647_471)).abs() < 1e-10);
        assert!(nup1 > nu1);
    }

    #[test]
    fn zeros_are_zeros() {
        for k in 1..=MAX_ZERO_INDEX {
            let nu = airy_zero(k).unwrap();
            assert!(nu < 0.0);
            assert!(airy_ai_real(nu).0.abs() <= 1e-12, "Ai at zero {k}");
            let nup = airy_prime_zero(k).unwrap();
            assert!(airy_ai_real(nup).1.abs() <= 1e-12, "Ai' at zero {k}");
        }
    }

    #[test]
    fn zero_ordering() {
        let mut prev = 0.0;
        for k in 1..=MAX_ZERO_INDEX {
            let nu = airy_zero(k).unwrap();
            assert!(nu < prev);
            prev = nu;
        }
    }

    #[test]
    fn out_of_range_zero_index() {
        assert!(airy_zero(0).is_err());
        assert!(airy_zero(21).is_err());
    }

    #[test]
    fn decay_sector_accuracy_spot_checks() {
        // Compare against 20-digit reference values (mpmath).
        // Ai(5) and Ai(10):
        let (ai5, _) = airy_ai_real(5.0);
        assert!((ai5 - 1.0834442813607441735e-4).abs() < 1e-14 * 1.1);
        let (ai10, _) = airy_ai_real(10.0);
        assert!(((ai10 - 1.1047532552898685548e-10) / 1.1e-10).abs() < 1e-10);
    }
}
