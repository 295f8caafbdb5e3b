//! Adaptive Gauss-Kronrod quadrature (7-15 pair) for complex-valued
//! integrands over real intervals.

use crate::error::{Error, Result};
use num_complex::Complex64;

// QUADPACK dqk15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod_panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    for j in 0..3 {
        let x = half * XGK[2 * j + 1];
        let f1 = f(center - x);
        let f2 = f(center + x);
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[2 * j + 1] * (f1 + f2);
    }
    for j in 0..4 {
        let x = half * XGK[2 * j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        res_k += WGK[2 * j] * (f1 + f2);
    }
    let err = ((res_k - res_g) * half).norm();
    (res_k * half, err)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Returns the integral and an error estimate. Panels are bisected until the
/// summed Kronrod error estimate drops below `tol`.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tol: f64) -> Result<(Complex64, f64)> {
    #[derive(Clone, Copy)]
    struct Panel {
        a: f64,
        b: f64,
        value: Complex64,
        err: f64,
    }
    let (v0, e0) = kronrod_panel(&f, a, b);
    let mut panels = vec![Panel { a, b, value: v0, err: e0 }];
    let max_panels = 4000;
    loop {
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        if total_err <= tol {
            let total: Complex64 = panels.iter().map(|p| p.value).sum();
            return Ok((total, total_err));
        }
        if panels.len() >= max_panels {
            return Err(Error::QuadratureNonConvergence { tol, best: total_err });
        }
        // split the worst panel
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("non-empty panel list");
        let p = panels.swap_remove(idx);
        let mid = 0.5 * (p.a + p.b);
        let (v1, e1) = kronrod_panel(&f, p.a, mid);
        let (v2, e2) = kronrod_panel(&f, mid, p.b);
        panels.push(Panel { a: p.a, b: mid, value: v1, err: e1 });
        panels.push(Panel { a: mid, b: p.b, value: v2, err: e2 });
    }
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    let (v, e) = integrate(|t| Complex64::new(f(t), 0.0), a, b, tol)?;
    Ok((v.re, e))
}
