//! Scalar spectral constants: Airy zeros, normalization constants, moments,
//! and the first-order coefficients entering the two-term eigenvalue
//! predictions.
//!
//! Moments are stored as ratios of real Airy integrals (so `tau_m` and
//! `tau_m2` are manifestly real); the complex moments of the bilinear-
//! normalized eigenfunction v_1 are exposed through accessors that attach
//! the phases picked up when the integration ray is rotated onto the real
//! axis. Both conventions are carried so the model-operator eigensolves can
//! adjudicate which closed form enters the predictions.

use crate::airy::{airy_ai_real, airy_prime_zero, airy_zero};
use crate::error::{Error, Result};
use crate::grid::Bc;
use crate::model1d::{eig_richardson, Model1DSpec, Operator1D};
use crate::quad::integrate_real;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI};

pub mod complex_serde {
    use num_complex::Complex64;
    use serde::ser::SerializeStruct;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Complex", 2)?;
        st.serialize_field("re", &z.re)?;
        st.serialize_field("im", &z.im)?;
        st.end()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AiryTable {
    /// zeros nu_k of Ai, ordered by decreasing value (increasing |nu_k|)
    pub nu: Vec<f64>,
    /// zeros nu'_k of Ai'
    pub nu_prime: Vec<f64>,
    /// C_k = [int_0^inf Ai^2(tau + nu_k) dtau]^{-1/2}
    pub c_norm: Vec<f64>,
    /// normalized first moment of Ai^2(. + nu_1) over the half line
    pub tau_m: f64,
    /// normalized second moment
    pub tau_m2: f64,
    /// e^{i pi/6} int Ai'^2 / int Ai^2 (argument pi/6 by construction)
    #[serde(serialize_with = "complex_serde::serialize")]
    pub theta0: Complex64,
    /// |nu_1| e^{i pi/3}, the ground eigenvalue of the Dirichlet complex Airy
    /// operator on the half line
    #[serde(serialize_with = "complex_serde::serialize")]
    pub lambda0: Complex64,
}

/// Build the constant table: zeros to index `k_max` and quadrature moments
/// at absolute tolerance `quad_tol`.
pub fn build_airy_table(k_max: usize, quad_tol: f64) -> Result<AiryTable> {
    if k_max == 0 || k_max > crate::airy::MAX_ZERO_INDEX {
        return Err(Error::ZeroIndexOutOfRange { k: k_max, max: crate::airy::MAX_ZERO_INDEX });
    }
    if quad_tol < 1e-12 {
        return Err(Error::Config(format!(
            "quad_tol below 1e-12 is not resolvable in double precision (got {quad_tol})"
        )));
    }
    let mut nu = Vec::with_capacity(k_max);
    let mut nu_prime = Vec::with_capacity(k_max);
    let mut c_norm = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        nu.push(airy_zero(k)?);
        nu_prime.push(airy_prime_zero(k)?);
    }
    for &nuk in &nu {
        let upper = nuk.abs() + 25.0;
        let (norm2, _) = integrate_real(|t| airy_ai_real(t + nuk).0.powi(2), 0.0, upper, quad_tol)?;
        c_norm.push(1.0 / norm2.sqrt());
    }
    let nu1 = nu[0];
    let upper = nu1.abs() + 25.0;
    let (n0, _) = integrate_real(|t| airy_ai_real(t + nu1).0.powi(2), 0.0, upper, quad_tol)?;
    // internal cross-check: int Ai^2(t + nu_1) dt = Ai'(nu_1)^2
    let aip = airy_ai_real(nu1).1;
    debug_assert!((n0 - aip * aip).abs() < 1e-9, "normalization identity violated");
    let (t1, _) = integrate_real(|t| t * airy_ai_real(t + nu1).0.powi(2), 0.0, upper, quad_tol)?;
    let (t2, _) = integrate_real(|t| t * t * airy_ai_real(t + nu1).0.powi(2), 0.0, upper, quad_tol)?;
    let (m0, _) = integrate_real(|t| airy_ai_real(t + nu1).1.powi(2), 0.0, upper, quad_tol)?;
    let tau_m = t1 / n0;
    let tau_m2 = t2 / n0;
    let theta0 = Complex64::from_polar(m0 / n0, FRAC_PI_6);
    let lambda0 = Complex64::from_polar(nu1.abs(), FRAC_PI_3);
    Ok(AiryTable { nu, nu_prime, c_norm, tau_m, tau_m2, theta0, lambda0 })
}

impl AiryTable {
    /// Eigenvalue of the Dirichlet complex Airy operator for level k (1-based).
    pub fn theta_k(&self, k: usize) -> Complex64 {
        Complex64::from_polar(self.nu[k - 1].abs(), FRAC_PI_3)
    }

    /// First moment of the bilinear-normalized ground state:
    /// int tau v_1^2 dtau with int v_1^2 = 1, equal to tau_m e^{-i pi/6}.
    pub fn moment_tau_bilinear(&self) -> Complex64 {
        Complex64::from_polar(self.tau_m, -FRAC_PI_6)
    }

    /// Second moment int tau^2 v_1^2 dtau = tau_m2 e^{-i pi/3}.
    pub fn moment_tau2_bilinear(&self) -> Complex64 {
        Complex64::from_polar(self.tau_m2, -FRAC_PI_3)
    }

    /// lambda_0 - i <tau>: the coefficient of sigma in the transverse
    /// solvability problem under the bilinear normalization. Its argument is
    /// pi/3; its modulus equals |theta0|.
    pub fn theta0_effective(&self) -> Complex64 {
        self.lambda0 - Complex64::new(0.0, 1.0) * self.moment_tau_bilinear()
    }

    /// Defect of the printed identity theta0 = lambda0 - e^{i pi/6} tau_m
    /// under the stored (argument pi/6) convention. Reported as a diagnostic.
    pub fn theta0_identity_defect(&self) -> f64 {
        (self.theta0 - (self.lambda0 - Complex64::from_polar(self.tau_m, FRAC_PI_6))).norm()
    }

    /// Ground eigenvalue of -d^2/dsigma^2 + i<tau> sigma^2 + i beta <tau^2>,
    /// the transverse operator under the bilinear normalization:
    /// sqrt(tau_m) e^{i pi/6} + beta tau_m2 e^{i pi/6}.
    pub fn lambda1_effective(&self, beta: f64) -> Complex64 {
        let a = Complex64::new(0.0, 1.0) * self.moment_tau_bilinear();
        a.sqrt() + Complex64::new(0.0, beta) * self.moment_tau2_bilinear()
    }

    /// Closed-form candidate sqrt(tau_m) e^{i pi/12} + beta tau_m2.
    pub fn lambda1_closed_sqrt(&self, beta: f64) -> Complex64 {
        Complex64::from_polar(self.tau_m.sqrt(), PI / 12.0) + beta * self.tau_m2
    }

    /// Closed-form candidate sqrt(2 tau_m) e^{i pi/12} + beta tau_m2.
    pub fn lambda1_closed_sqrt2(&self, beta: f64) -> Complex64 {
        Complex64::from_polar((2.0 * self.tau_m).sqrt(), PI / 12.0) + beta * self.tau_m2
    }

    /// -theta0^{2/3} nu'_1 with the stored theta0 (argument pi/9 result).
    pub fn lambda1_check(&self) -> Complex64 {
        -self.theta0.powf(2.0 / 3.0) * self.nu_prime[0]
    }

    /// -theta_eff^{2/3} nu'_1 with the bilinear-normalization theta
    /// (argument 2 pi/9 result); same modulus as `lambda1_check`.
    pub fn lambda1_check_effective(&self) -> Complex64 {
        -self.theta0_effective().powf(2.0 / 3.0) * self.nu_prime[0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Lambda1Match {
    SqrtTauM,
    SqrtTwoTauM,
    Neither,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Lambda1V1 {
    /// ground eigenvalue of the discretized transverse operator as printed
    #[serde(serialize_with = "complex_serde::serialize")]
    pub numeric: Complex64,
    #[serde(serialize_with = "complex_serde::serialize")]
    pub closed_sqrt: Complex64,
    #[serde(serialize_with = "complex_serde::serialize")]
    pub closed_sqrt2: Complex64,
    /// the bilinear-normalization value used by the quasimode predictions
    #[serde(serialize_with = "complex_serde::serialize")]
    pub effective: Complex64,
    pub matches: Lambda1Match,
}

/// Numerically adjudicate the transverse eigenvalue: discretize
/// -d^2/dsigma^2 + e^{i pi/6} tau_m sigma^2 + beta tau_m2 on [-12, 12] and
/// report which closed form the ground state matches.
pub fn lambda1_v1(beta: f64, table: &AiryTable) -> Result<Lambda1V1> {
    if beta.abs() > 10.0 {
        return Err(Error::Config(format!("|beta| = {} exceeds 10", beta.abs())));
    }
    let a = Complex64::from_polar(table.tau_m, FRAC_PI_6);
    let shift_c = Complex64::new(beta * table.tau_m2, 0.0);
    let spec = Model1DSpec::airy_half_line(Operator1D::POsc { sigma2_coef: a, shift: shift_c });
    let guess = table.lambda1_closed_sqrt(beta);
    let numeric = eig_richardson(
        &spec,
        -12.0,
        12.0,
        (Bc::Dirichlet, Bc::Dirichlet),
        2000,
        guess * 0.98 + Complex64::new(1e-4, 0.0),
        1,
    )?[0];
    let c1 = table.lambda1_closed_sqrt(beta);
    let c2 = table.lambda1_closed_sqrt2(beta);
    let matches = if (numeric - c1).norm() <= 1e-6 * (1.0 + c1.norm()) {
        Lambda1Match::SqrtTauM
    } else if (numeric - c2).norm() <= 1e-6 * (1.0 + c2.norm()) {
        Lambda1Match::SqrtTwoTauM
    } else {
        Lambda1Match::Neither
    };
    Ok(Lambda1V1 {
        numeric,
        closed_sqrt: c1,
        closed_sqrt2: c2,
        effective: table.lambda1_effective(beta),
        matches,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Lambda1V2 {
    /// -theta0^{2/3} nu'_1 from the stored table value
    #[serde(serialize_with = "complex_serde::serialize")]
    pub value: Complex64,
    /// ground eigenvalue of the discretized Neumann realization of
    /// -d^2/dsigma^2 + theta0 sigma (cross-check of the closed form)
    #[serde(serialize_with = "complex_serde::serialize")]
    pub neumann_numeric: Complex64,
    /// bilinear-normalization variant used by the quasimode predictions
    #[serde(serialize_with = "complex_serde::serialize")]
    pub effective: Complex64,
}

/// The corner transverse eigenvalue with its Neumann-discretization
/// cross-check.
pub fn lambda1_v2(table: &AiryTable) -> Result<Lambda1V2> {
    let value = table.lambda1_check();
    let spec = Model1DSpec::airy_half_line(Operator1D::NeumannAiry { theta0: table.theta0 });
    let neumann_numeric = eig_richardson(
        &spec,
        0.0,
        30.0,
        (Bc::Neumann, Bc::Dirichlet),
        1500,
        value + Complex64::new(2e-3, 0.0),
        1,
    )?[0];
    Ok(Lambda1V2 { value, neumann_numeric, effective: table.lambda1_check_effective() })
}
