//! The cubic conformal family of wire-like domains.
//!
//! Omega = f(unit square) with f(w) = w + delta (w^2/2 + gamma w^3/3). The
//! potential solving the mixed boundary-value problem is exactly V = Im g
//! with g the inverse map, so |grad V| = 1/|f'| and every geometric quantity
//! reduces to boundary evaluations of f' and f''.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;


/// Which of the four sides of the unit square a boundary point lives on.
/// D1 (v = 0) and D2 (v = 1) carry Dirichlet data V = 0 and V = 1; N1
/// (u = 0) and N2 (u = 1) are the insulating sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    D1,
    D2,
    N1,
    N2,
}

#[derive(Clone, Copy, Debug)]
pub struct ConformalDomain {
    pub delta: f64,
    pub gamma: f64,
    pub newton_tol: f64,
}

impl ConformalDomain {
    pub fn new(delta: f64, gamma: f64) -> Result<Self> {
        if delta < 0.0 {
            return Err(Error::Config("delta must be nonnegative".into()));
        }
        if !(-2.0..0.0).contains(&gamma) && delta > 0.0 {
            return Err(Error::Config(format!("gamma = {gamma} outside (-2, 0)")));
        }
        let d = ConformalDomain { delta, gamma, newton_tol: 1e-13 };
        d.check_injective()?;
        Ok(d)
    }

    /// f' must not vanish on the closed square (sampled with a margin).
    fn check_injective(&self) -> Result<()> {
        for iu in 0..=200 {
            for iv in 0..=200 {
                let w = Complex64::new(iu as f64 / 200.0, iv as f64 / 200.0);
                if self.fprime(w).norm() < 0.05 {
                    return Err(Error::MapNotInjective { w });
                }
            }
        }
        Ok(())
    }

    pub fn forward(&self, w: Complex64) -> Complex64 {
        w + self.delta * (0.5 * w * w + self.gamma / 3.0 * w * w * w)
    }

    pub fn fprime(&self, w: Complex64) -> Complex64 {
        Complex64::new(1.0, 0.0) + self.delta * (w + self.gamma * w * w)
    }

    pub fn fsecond(&self, w: Complex64) -> Complex64 {
        self.delta * (Complex64::new(1.0, 0.0) + 2.0 * self.gamma * w)
    }

    /// Inverse map by Newton iteration from w0 = z.
    pub fn inverse(&self, z: Complex64) -> Result<Complex64> {
        let mut w = z;
        for _ in 0..30 {
            let r = self.forward(w) - z;
            if r.norm() <= self.newton_tol {
                return Ok(w);
            }
            let dp = self.fprime(w);
            if dp.norm() < 1e-14 {
                return Err(Error::NewtonDiverged { z });
            }
            w -= r / dp;
        }
        let r = (self.forward(w) - z).norm();
        if r <= self.newton_tol * 10.0 {
            Ok(w)
        } else {
            Err(Error::NewtonDiverged { z })
        }
    }

    /// V(z) = Im g(z): exactly the second square coordinate.
    pub fn potential(&self, z: Complex64) -> Result<f64> {
        Ok(self.inverse(z)?.im)
    }

    /// |grad V|(z) = |g'(z)| = 1 / |f'(g(z))|.
    pub fn grad_potential_norm(&self, z: Complex64) -> Result<f64> {
        let w = self.inverse(z)?;
        Ok(1.0 / self.fprime(w).norm())
    }

    /// grad V as a 2-vector: grad V = (Im g)' -> (-Im g', Re g')... computed
    /// from g' = 1/f'(g(z)), grad V = (d V/dx, dV/dy) = (Im g_x, Im g_y)
    /// with g_y = i g_x; so grad V = (Im g', Re g').
    pub fn grad_potential(&self, z: Complex64) -> Result<(f64, f64)> {
        let w = self.inverse(z)?;
        let gp = 1.0 / self.fprime(w);
        Ok((gp.im, gp.re))
    }

    /// Point on the boundary of the square for side + parameter.
    pub fn square_point(side: Side, t: f64) -> Complex64 {
        match side {
            Side::D1 => Complex64::new(t, 0.0),
            Side::D2 => Complex64::new(t, 1.0),
            Side::N1 => Complex64::new(0.0, t),
            Side::N2 => Complex64::new(1.0, t),
        }
    }

    /// |f'| along a side (the reciprocal of |grad V| there).
    pub fn boundary_fprime_norm(&self, side: Side, t: f64) -> f64 {
        self.fprime(Self::square_point(side, t)).norm()
    }

    /// Arclength along a Dirichlet side from parameter a to b (oriented by
    /// increasing parameter).
    pub fn arclength(&self, side: Side, a: f64, b: f64) -> f64 {
        let (v, _) = crate::quad::integrate_real(
            |t| self.boundary_fprime_norm(side, t),
            a,
            b,
            1e-12,
        )
        .expect("arclength quadrature converges for the polynomial family");
        v
    }

    /// Signed curvature of the image of a side, oriented with the interior
    /// to the left (so D1 is traversed with increasing u, D2 with
    /// decreasing u).
    pub fn curvature(&self, side: Side, t: f64) -> f64 {
        let w = Self::square_point(side, t);
        let dir = match side {
            Side::D1 => Complex64::new(1.0, 0.0),
            Side::D2 => Complex64::new(-1.0, 0.0),
            Side::N1 => Complex64::new(0.0, -1.0),
            Side::N2 => Complex64::new(0.0, 1.0),
        };
        let zp = self.fprime(w) * dir;
        let zpp = self.fsecond(w) * dir * dir;
        (zpp * zp.conj()).im / zp.norm().powi(3)
    }
}

/// Cumulative arclength along one side, sampled once and interpolated
/// (composite Simpson on a uniform parameter grid, cubic readback).
pub struct SideArclength {
    side: Side,
    s: Vec<f64>,
    n: usize,
}

impl SideArclength {
    pub fn build(domain: &ConformalDomain, side: Side) -> Self {
        let n = 4096usize;
        let h = 1.0 / n as f64;
        let speed: Vec<f64> =
            (0..=2 * n).map(|k| domain.boundary_fprime_norm(side, 0.5 * h * k as f64)).collect();
        let mut s = Vec::with_capacity(n + 1);
        s.push(0.0);
        let mut acc = 0.0;
        for k in 0..n {
            // Simpson over [k h, (k+1) h] with the midpoint sample
            acc += h / 6.0 * (speed[2 * k] + 4.0 * speed[2 * k + 1] + speed[2 * k + 2]);
            s.push(acc);
        }
        SideArclength { side, s, n }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn total(&self) -> f64 {
        *self.s.last().unwrap()
    }

    /// Arclength from parameter 0 to u.
    pub fn s_of_u(&self, u: f64) -> f64 {
        let x = (u.clamp(0.0, 1.0)) * self.n as f64;
        let j = (x.floor() as usize).clamp(1, self.n.saturating_sub(2));
        let t = x - j as f64;
        let c0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let c1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let c2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let c3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        self.s[j - 1] * c0 + self.s[j] * c1 + self.s[j + 1] * c2 + self.s[(j + 2).min(self.n)] * c3
    }
}

/// One minimizer of |grad V| on the Dirichlet boundary.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Minimizer {
    pub side: Side,
    /// square-side parameter u of the minimizer
    pub u: f64,
    /// arclength position measured from the side's starting corner
    pub arclength: f64,
    pub is_corner: bool,
    /// sign of c = dV/drho (inward normal derivative): +1 on D1, -1 on D2
    pub c_sign: f64,
    /// |grad V| at the minimizer
    pub grad_v: f64,
    /// second arclength derivative of |grad V| (interior minimizers)
    pub alpha: f64,
    /// one-sided first arclength derivative of |grad V| (corner minimizers)
    pub alpha_hat: f64,
    /// boundary curvature at the minimizer
    pub kappa: f64,
    /// second normal derivative of V: beta_hat = kappa * c
    pub beta_hat: f64,
    /// beta_hat / sqrt(2 alpha_m J_m)
    pub beta: f64,
    /// kappa sqrt(J_m / (2 alpha_m))
    pub omega: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PotentialType {
    V1,
    V2,
    Degenerate,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometryReport {
    pub delta: f64,
    pub gamma: f64,
    pub j_m: f64,
    pub minimizers: Vec<Minimizer>,
    pub potential_type: PotentialType,
    pub alpha_m: f64,
    pub alpha_hat_m: f64,
}

const MIN_TOL: f64 = 1e-9;

/// Locate and classify the minimizers of |grad V| on the Dirichlet
/// boundary by dense sampling plus golden-section refinement.
pub fn analyze_geometry(domain: &ConformalDomain, n_boundary: usize) -> Result<GeometryReport> {
    if n_boundary < 2000 {
        return Err(Error::Config("need at least 2000 boundary samples per side".into()));
    }
    if domain.delta == 0.0 {
        return Err(Error::DegenerateGeometry(
            "delta = 0: |grad V| is constant on the whole Dirichlet boundary".into(),
        ));
    }
    // |grad V| = 1/|f'|; minimize F = 1/|f'| <=> maximize |f'|
    let mut candidates: Vec<(Side, f64)> = Vec::new();
    for side in [Side::D1, Side::D2] {
        let f = |t: f64| 1.0 / domain.boundary_fprime_norm(side, t);
        // interior local minima
        let n = n_boundary;
        let mut prev2 = f(0.0);
        let mut prev = f(1.0 / n as f64);
        for i in 2..=n {
            let t = i as f64 / n as f64;
            let cur = f(t);
            if prev < prev2 && prev <= cur {
                let lo = (i as f64 - 2.0) / n as f64;
                let hi = t;
                let u = golden_min(&f, lo, hi);
                candidates.push((side, u));
            }
            prev2 = prev;
            prev = cur;
        }
        // corners always compete
        candidates.push((side, 0.0));
        candidates.push((side, 1.0));
    }
    let value =
        |side: Side, u: f64| -> f64 { 1.0 / domain.boundary_fprime_norm(side, u) };
    let j_m = candidates
        .iter()
        .map(|&(s, u)| value(s, u))
        .fold(f64::INFINITY, f64::min);

    let mut minimizers = Vec::new();
    for &(side, u) in &candidates {
        if value(side, u) > j_m + MIN_TOL * j_m.max(1.0) {
            continue;
        }
        if minimizers
            .iter()
            .any(|m: &Minimizer| m.side == side && (m.u - u).abs() < 1e-6)
        {
            continue;
        }
        let is_corner = !(1e-7..=1.0 - 1e-7).contains(&u);
        minimizers.push(build_minimizer(domain, side, u, is_corner)?);
    }
    if minimizers.is_empty() {
        return Err(Error::DegenerateGeometry("no minimizer located".into()));
    }

    let interior: Vec<&Minimizer> = minimizers.iter().filter(|m| !m.is_corner).collect();
    let corner: Vec<&Minimizer> = minimizers.iter().filter(|m| m.is_corner).collect();
    let alpha_m = interior.iter().map(|m| m.alpha.abs()).fold(f64::INFINITY, f64::min);
    let alpha_hat_m = corner.iter().map(|m| m.alpha_hat.abs()).fold(f64::INFINITY, f64::min);
    let potential_type = if corner.is_empty() && alpha_m > 1e-8 {
        PotentialType::V1
    } else if interior.is_empty() && alpha_hat_m > 1e-8 {
        PotentialType::V2
    } else {
        PotentialType::Degenerate
    };
    let (alpha_m, alpha_hat_m) = (
        if alpha_m.is_finite() { alpha_m } else { 0.0 },
        if alpha_hat_m.is_finite() { alpha_hat_m } else { 0.0 },
    );
    // fill the scaled quantities now that alpha_m is known
    for m in minimizers.iter_mut() {
        let am = if m.is_corner { alpha_hat_m } else { alpha_m };
        if am > 0.0 {
            m.beta = m.beta_hat / (2.0 * am * j_m).sqrt();
            m.omega = m.kappa * (j_m / (2.0 * am)).sqrt();
        }
    }
    Ok(GeometryReport {
        delta: domain.delta,
        gamma: domain.gamma,
        j_m,
        minimizers,
        potential_type,
        alpha_m,
        alpha_hat_m,
    })
}

fn build_minimizer(
    domain: &ConformalDomain,
    side: Side,
    u: f64,
    is_corner: bool,
) -> Result<Minimizer> {
    let c_sign = match side {
        Side::D1 => 1.0,
        Side::D2 => -1.0,
        _ => unreachable!("minimizers live on Dirichlet sides"),
    };
    let grad_v = 1.0 / domain.boundary_fprime_norm(side, u);
    // arclength derivatives of F(s) = |grad V| via 5-point differences in s
    let f_of_s = |s: f64| -> f64 {
        let t = param_at_arclength(domain, side, u, s);
        1.0 / domain.boundary_fprime_norm(side, t)
    };
    let alpha = if is_corner { 0.0 } else { second_derivative_richardson(&f_of_s, 1e-3) };
    let alpha_hat = if is_corner {
        // one-sided first derivative into the side
        let dir = if u < 0.5 { 1.0 } else { -1.0 };
        let h = 1e-5;
        let d = (-3.0 * f_of_s(0.0) + 4.0 * f_of_s(dir * h) - f_of_s(dir * 2.0 * h)) / (2.0 * dir * h);
        d.abs()
    } else {
        0.0
    };
    let kappa = domain.curvature(side, u);
    let c = c_sign * grad_v;
    let beta_hat = kappa * c;
    Ok(Minimizer {
        side,
        u,
        arclength: domain.arclength(side, 0.0, u),
        is_corner,
        c_sign,
        grad_v,
        alpha,
        alpha_hat,
        kappa,
        beta_hat,
        beta: 0.0,
        omega: 0.0,
    })
}

/// Solve for the side parameter at signed arclength s from the point u0.
fn param_at_arclength(domain: &ConformalDomain, side: Side, u0: f64, s: f64) -> f64 {
    let mut t = u0;
    for _ in 0..30 {
        let g = domain.arclength(side, u0.min(t), u0.max(t)) * (t - u0).signum() - s;
        if g.abs() < 1e-13 {
            break;
        }
        t -= g / domain.boundary_fprime_norm(side, t);
    }
    t
}

/// Second derivative by centered 5-point differences at two steps combined
/// by Richardson extrapolation.
fn second_derivative_richardson(f: &impl Fn(f64) -> f64, h: f64) -> f64 {
    let five_point = |h: f64| -> f64 {
        (-f(-2.0 * h) + 16.0 * f(-h) - 30.0 * f(0.0) + 16.0 * f(h) - f(2.0 * h)) / (12.0 * h * h)
    };
    let d1 = five_point(h);
    let d2 = five_point(h / 2.0);
    (16.0 * d2 - d1) / 15.0
}

/// The corner chart (s, rho) and the metric factor of the conjugate-harmonic
/// coordinates at a corner.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CornerChart {
    pub corner_id: usize,
    /// square vertex of the corner
    pub u_corner: f64,
    pub v_corner: f64,
    /// |grad V| at the corner
    pub grad_v: f64,
    /// first-order coefficients of the metric g(s, rho) ~ 1 + a s + b rho
    pub alpha_tilde: f64,
    pub beta_tilde: f64,
    /// finite-difference verification value 2 alpha_hat / c
    pub alpha_tilde_check: f64,
}

/// Corner ids: 1 = (0,0), 2 = (1,0), 3 = (1,1), 4 = (0,1).
pub fn corner_coordinates(domain: &ConformalDomain, corner_id: usize) -> Result<CornerChart> {
    let (uc, vc) = match corner_id {
        1 => (0.0, 0.0),
        2 => (1.0, 0.0),
        3 => (1.0, 1.0),
        4 => (0.0, 1.0),
        _ => return Err(Error::Config(format!("corner id {corner_id} outside 1..=4"))),
    };
    let wc = Complex64::new(uc, vc);
    let jc = 1.0 / domain.fprime(wc).norm();
    // the chart is linear on the square: s moves along the Dirichlet side,
    // rho into the domain; both normalized by |grad V| at the corner
    let su = if uc == 0.0 { 1.0 } else { -1.0 };
    let sv = if vc == 0.0 { 1.0 } else { -1.0 };
    let metric = |s: f64, rho: f64| -> f64 {
        let w = Complex64::new(uc + su * jc * s, vc + sv * jc * rho);
        (domain.fprime(wc).norm() / domain.fprime(w).norm()).powi(2)
    };
    debug_assert!((metric(0.0, 0.0) - 1.0).abs() < 1e-14);
    let h = 1e-5;
    let alpha_tilde = (-3.0 * metric(0.0, 0.0) + 4.0 * metric(h, 0.0) - metric(2.0 * h, 0.0)) / (2.0 * h);
    let beta_tilde = (-3.0 * metric(0.0, 0.0) + 4.0 * metric(0.0, h) - metric(0.0, 2.0 * h)) / (2.0 * h);
    // independent route: one-sided arclength derivative of |grad V| along
    // the Dirichlet side through the corner, in the chart's s direction
    let side = if vc == 0.0 { Side::D1 } else { Side::D2 };
    let c = if side == Side::D1 { jc } else { -jc };
    let f_arc = |s: f64| -> f64 {
        let t = param_at_arclength(domain, side, uc, su * s);
        1.0 / domain.boundary_fprime_norm(side, t)
    };
    let dh = 1e-5;
    let d_signed = (-3.0 * f_arc(0.0) + 4.0 * f_arc(dh) - f_arc(2.0 * dh)) / (2.0 * dh);
    // g = |grad V|^2 / Jc^2, so dg/ds(0) = 2 F'(0) / Jc; with the signed
    // alpha_hat = sign(c) F' this is the 2 alpha_hat / c identity
    let alpha_tilde_check = 2.0 * d_signed / jc;
    let _ = c;
    Ok(CornerChart {
        corner_id,
        u_corner: uc,
        v_corner: vc,
        grad_v: jc,
        alpha_tilde,
        beta_tilde,
        alpha_tilde_check,
    })
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if b - a < 1e-14 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    #[test]
    fn identity_map_at_delta_zero() {
        let d = ConformalDomain { delta: 0.0, gamma: -1.0, newton_tol: 1e-13 };
        let w = Complex64::new(0.3, 0.7);
        assert_eq!(d.forward(w), w);
        assert_eq!(d.inverse(w).unwrap(), w);
        assert_eq!(d.forward(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn round_trip_on_a_sample_grid() {
        let d = ConformalDomain::new(0.1, -1.0).unwrap();
        let mut worst = 0.0f64;
        for iu in 0..=100 {
            for iv in 0..=100 {
                let w = Complex64::new(iu as f64 / 100.0, iv as f64 / 100.0);
                let z = d.forward(w);
                let back = d.inverse(z).unwrap();
                worst = worst.max((back - w).norm());
            }
        }
        assert!(worst <= 1e-12, "round-trip error {worst}");
    }

    #[test]
    fn gradient_reciprocal_identity() {
        // |grad V(f(w))| * |f'(w)| = 1
        let d = ConformalDomain::new(0.08, -0.7).unwrap();
        let mut s = 11u64;
        let mut rnd = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64).fract()
        };
        for _ in 0..1000 {
            let w = Complex64::new(rnd(), rnd());
            let z = d.forward(w);
            let g = d.grad_potential_norm(z).unwrap();
            assert!((g * d.fprime(w).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_values_on_the_two_sides() {
        let d = ConformalDomain::new(0.05, -1.0).unwrap();
        for i in 0..=50 {
            let t = i as f64 / 50.0;
            let z0 = d.forward(Complex64::new(t, 0.0));
            let z1 = d.forward(Complex64::new(t, 1.0));
            assert!(d.potential(z0).unwrap().abs() < 1e-12);
            assert!((d.potential(z1).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn neumann_sides_have_no_normal_gradient() {
        // on the images of u = 0 and u = 1 the potential gradient is purely
        // tangential: dV/dn = 0 means grad V is parallel to the side image
        let d = ConformalDomain::new(0.05, -1.0).unwrap();
        for i in 1..50 {
            let t = i as f64 / 50.0;
            for side in [Side::N1, Side::N2] {
                let w = ConformalDomain::square_point(side, t);
                let z = d.forward(w);
                let (gx, gy) = d.grad_potential(z).unwrap();
                // tangent of the side image
                let dir = match side {
                    Side::N1 => Complex64::new(0.0, 1.0),
                    Side::N2 => Complex64::new(0.0, 1.0),
                    _ => unreachable!(),
                };
                let tangent = d.fprime(w) * dir;
                // normal component = grad V x tangent / |tangent|
                let cross = (gx * tangent.im - gy * tangent.re) / tangent.norm();
                let normal = cross;
                assert!(
                    normal.abs() < 1e-10,
                    "normal gradient {normal} at {side:?} t = {t}"
                );
            }
        }
    }

    #[test]
    fn v1_classification_with_interior_minimizer() {
        let d = ConformalDomain::new(0.05, -1.0).unwrap();
        let rep = analyze_geometry(&d, 2000).unwrap();
        assert_eq!(rep.potential_type, PotentialType::V1);
        assert_eq!(rep.minimizers.len(), 1);
        let m = &rep.minimizers[0];
        assert_eq!(m.side, Side::D2);
        assert!(!m.is_corner);
        // minimizer near u = -1/(2 gamma) = 0.5
        assert!((m.u - 0.5).abs() < 0.1, "minimizer at u = {}", m.u);
        assert!(m.c_sign < 0.0);
        assert!(rep.alpha_m > 0.0);
    }

    #[test]
    fn v2_classification_at_weak_cubic() {
        let d = ConformalDomain::new(0.05, -0.25).unwrap();
        let rep = analyze_geometry(&d, 2000).unwrap();
        assert_eq!(rep.potential_type, PotentialType::V2);
        assert!(rep.minimizers.iter().all(|m| m.is_corner));
        assert!(rep.alpha_hat_m > 0.0);
    }

    #[test]
    fn beta_hat_equals_kappa_c_against_normal_differences() {
        // harmonicity in boundary-fitted coordinates forces
        // V_rho_rho = kappa V_rho on a Dirichlet side
        let d = ConformalDomain::new(0.05, -1.0).unwrap();
        let rep = analyze_geometry(&d, 2000).unwrap();
        let m = &rep.minimizers[0];
        // normal finite differences of V at the minimizer
        let w0 = ConformalDomain::square_point(m.side, m.u);
        let z0 = d.forward(w0);
        // inward normal of the image: rotate the oriented tangent left
        let dir = match m.side {
            Side::D1 => Complex64::new(1.0, 0.0),
            Side::D2 => Complex64::new(-1.0, 0.0),
            _ => unreachable!(),
        };
        let tangent = (d.fprime(w0) * dir) / (d.fprime(w0) * dir).norm();
        let normal = I * tangent;
        let h = 1e-4;
        let v = |rho: f64| d.potential(z0 + rho * normal).unwrap();
        let second = (2.0 * v(0.0) - 5.0 * v(h) + 4.0 * v(2.0 * h) - v(3.0 * h)) / (h * h);
        let c = m.c_sign * m.grad_v;
        assert!(
            (m.beta_hat - second).abs() < 1e-5,
            "beta_hat {} vs normal-difference {second}",
            m.beta_hat
        );
        assert!((m.beta_hat - m.kappa * c).abs() < 1e-12);
    }

    #[test]
    fn corners_meet_at_right_angles() {
        let d = ConformalDomain::new(0.08, -0.6).unwrap();
        for id in 1..=4usize {
            let (uc, vc) = match id {
                1 => (0.0, 0.0),
                2 => (1.0, 0.0),
                3 => (1.0, 1.0),
                _ => (0.0, 1.0),
            };
            let wc = Complex64::new(uc, vc);
            // tangents of the two sides meeting at the corner
            let horiz = d.fprime(wc) * Complex64::new(1.0, 0.0);
            let vert = d.fprime(wc) * Complex64::new(0.0, 1.0);
            let dot = horiz.re * vert.re + horiz.im * vert.im;
            assert!(dot.abs() < 1e-13, "corner {id} angle defect {dot}");
        }
    }

    #[test]
    fn classification_transition_near_minus_half() {
        let mut last_v1 = f64::NAN;
        let mut first_v2 = f64::NAN;
        let mut g = -1.5;
        while g <= -0.1 {
            let d = ConformalDomain::new(0.05, g).unwrap();
            let rep = analyze_geometry(&d, 2000).unwrap();
            match rep.potential_type {
                PotentialType::V1 => last_v1 = g,
                PotentialType::V2 => {
                    if first_v2.is_nan() {
                        first_v2 = g;
                    }
                }
                PotentialType::Degenerate => {}
            }
            g += 0.05;
        }
        assert!(
            (last_v1 - (-0.5)).abs() <= 0.055 || (first_v2 - (-0.5)).abs() <= 0.055,
            "transition between {last_v1} and {first_v2}"
        );
    }

    #[test]
    fn corner_chart_metric_and_link_identity() {
        let d = ConformalDomain::new(0.05, -0.25).unwrap();
        for id in 1..=4usize {
            let chart = corner_coordinates(&d, id).unwrap();
            assert!(
                (chart.alpha_tilde - chart.alpha_tilde_check).abs() < 1e-6,
                "corner {id}: alpha_tilde {} vs 2 alpha_hat / c {}",
                chart.alpha_tilde,
                chart.alpha_tilde_check
            );
        }
    }

    #[test]
    fn degenerate_square_is_reported() {
        let d = ConformalDomain { delta: 0.0, gamma: -1.0, newton_tol: 1e-13 };
        assert!(matches!(
            analyze_geometry(&d, 2000),
            Err(Error::DegenerateGeometry(_))
        ));
    }
}
