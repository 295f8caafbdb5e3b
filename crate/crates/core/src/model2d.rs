//! Two-dimensional model operators on truncated strips and quarter planes:
//! affine complex Airy operators (half plane and corner), the curvature
//! model coupling a transverse oscillator to the boundary layer, the corner
//! models with sigma-dependent stiffness, and the separable reference
//! operator.

use crate::error::{Error, Result};
use crate::grid::{Bc, CutoffSpec, Grid2D};
use crate::linalg::{shift_invert_eigs, smallest_singular_value, ArnoldiOptions, BandMatrix};
use crate::spectral::{Localization, SpectralResult};
use crate::table::AiryTable;
use num_complex::Complex64;
use serde::Serialize;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug)]
pub enum Operator2D {
    /// -Laplace + i j tau on sigma in R, tau in R_+, Dirichlet at tau = 0.
    ADHalf { j_slope: f64 },
    /// -Laplace + i j sigma on sigma in R, tau in R_+, Neumann at tau = 0.
    ANHalf { j_slope: f64 },
    /// -Laplace + i j sigma on the quarter plane, Dirichlet at sigma = 0,
    /// Neumann at tau = 0.
    ACorner { j_slope: f64 },
    /// Boundary-layer model: the perturbed half-line Airy operator in tau
    /// plus eps * (-d^2/dsigma^2 + i sigma^2 tau), with optional stiffness
    /// and drift corrections.
    BepsV1 { eps: f64, beta: f64, theta: f64, tilde_b: f64, omega: f64 },
    /// -(1 + eps|sigma|) d^2/dtau^2 - eps d^2/dsigma^2 + i tau on the strip.
    UepsV2 { eps: f64 },
    /// The same operator on the quarter plane with a Neumann condition at
    /// sigma = 0.
    QepsV2 { eps: f64 },
    /// Separable reference: perturbed Airy in tau plus eps times a complex
    /// harmonic oscillator in sigma.
    M2Sep { eps: f64, beta: f64, sigma2_coef: Complex64, shift: Complex64 },
}

#[derive(Clone, Copy, Debug)]
pub struct Model2DSpec {
    pub operator: Operator2D,
    pub cutoff: CutoffSpec,
}

pub struct Discrete2D {
    pub matrix: BandMatrix,
    pub grid: Grid2D,
}

struct Coefficients {
    /// coefficient of -d^2/dtau^2 at (sigma, tau)
    c_tau: Box<dyn Fn(f64, f64) -> f64>,
    /// coefficient of -d^2/dsigma^2
    c_sigma: Box<dyn Fn(f64, f64) -> f64>,
    /// coefficient of d/dtau (first-order drift)
    d_tau: f64,
    /// full complex potential
    pot: Box<dyn Fn(f64, f64) -> Complex64>,
}

fn coefficients(spec: &Model2DSpec) -> Coefficients {
    let cutoff_b = spec.cutoff.b_exponent;
    match spec.operator {
        Operator2D::ADHalf { j_slope } => Coefficients {
            c_tau: Box::new(|_, _| 1.0),
            c_sigma: Box::new(|_, _| 1.0),
            d_tau: 0.0,
            pot: Box::new(move |_, t| I * (j_slope * t)),
        },
        Operator2D::ANHalf { j_slope } | Operator2D::ACorner { j_slope } => Coefficients {
            c_tau: Box::new(|_, _| 1.0),
            c_sigma: Box::new(|_, _| 1.0),
            d_tau: 0.0,
            pot: Box::new(move |s, _| I * (j_slope * s)),
        },
        Operator2D::BepsV1 { eps, beta, theta, tilde_b, omega } => Coefficients {
            c_tau: Box::new(|_, _| 1.0),
            c_sigma: Box::new(move |_, t| {
                eps + theta * eps * eps * t * CutoffSpec::chi(eps.powf(tilde_b) * t)
            }),
            d_tau: -2.0 * omega * eps,
            pot: Box::new(move |s, t| {
                let chi = CutoffSpec::chi(eps.powf(cutoff_b) * t);
                I * (t + eps * beta * chi * t * t + eps * s * s * t)
            }),
        },
        Operator2D::UepsV2 { eps } | Operator2D::QepsV2 { eps } => Coefficients {
            c_tau: Box::new(move |s, _| 1.0 + eps * s.abs()),
            c_sigma: Box::new(move |_, _| eps),
            d_tau: 0.0,
            pot: Box::new(|_, t| I * t),
        },
        Operator2D::M2Sep { eps, beta, sigma2_coef, shift } => Coefficients {
            c_tau: Box::new(|_, _| 1.0),
            c_sigma: Box::new(move |_, _| eps),
            d_tau: 0.0,
            pot: Box::new(move |s, t| {
                let chi = CutoffSpec::chi(eps.powf(cutoff_b) * t);
                I * (t + eps * beta * chi * t * t) + eps * (sigma2_coef * (s * s) + shift)
            }),
        },
    }
}

fn check_compat(spec: &Model2DSpec, grid: &Grid2D) -> Result<()> {
    let need = |cond: bool, msg: &str| {
        if cond {
            Ok(())
        } else {
            Err(Error::IncompatibleSpec(msg.into()))
        }
    };
    match spec.operator {
        Operator2D::ADHalf { .. } => {
            need(grid.bc[2] == Bc::Dirichlet, "Dirichlet required at tau = 0")?
        }
        Operator2D::ANHalf { .. } => {
            need(grid.bc[2] == Bc::Neumann, "Neumann required at tau = 0")?
        }
        Operator2D::ACorner { j_slope } => {
            need(j_slope != 0.0, "corner operator needs a nonzero potential slope")?;
            need(grid.sigma_range.0 == 0.0, "corner operator lives on sigma >= 0")?;
            need(grid.bc[0] == Bc::Dirichlet, "Dirichlet required at sigma = 0")?;
            need(grid.bc[2] == Bc::Neumann, "Neumann required at tau = 0")?;
        }
        Operator2D::BepsV1 { eps, tilde_b, theta, .. } => {
            need(grid.bc[2] == Bc::Dirichlet, "Dirichlet required at tau = 0")?;
            need(eps >= 0.0, "eps must be nonnegative")?;
            if theta != 0.0 {
                need(0.0 < tilde_b && tilde_b < 0.5, "stiffness cutoff exponent outside (0, 1/2)")?;
            }
        }
        Operator2D::UepsV2 { .. } => {
            need(grid.bc[2] == Bc::Dirichlet, "Dirichlet required at tau = 0")?
        }
        Operator2D::QepsV2 { .. } => {
            need(grid.sigma_range.0 == 0.0, "quarter-plane operator lives on sigma >= 0")?;
            need(grid.bc[0] == Bc::Neumann, "Neumann required at sigma = 0")?;
            need(grid.bc[2] == Bc::Dirichlet, "Dirichlet required at tau = 0")?;
        }
        Operator2D::M2Sep { .. } => {
            need(grid.bc[2] == Bc::Dirichlet, "Dirichlet required at tau = 0")?
        }
    }
    Ok(())
}

/// Assemble the 5-point discretization. Mixed derivatives never occur; the
/// second-order terms are separable with coefficients sampled at the node.
pub fn assemble_2d(spec: &Model2DSpec, grid: &Grid2D) -> Result<Discrete2D> {
    check_compat(spec, grid)?;
    let coefs = coefficients(spec);
    let gs = grid.sigma_axis();
    let gt = grid.tau_axis();
    let (ms, mt) = (gs.len(), gt.len());
    let ds = gs.spacing();
    let dt = gt.spacing();
    let inv_ds2 = 1.0 / (ds * ds);
    let inv_dt2 = 1.0 / (dt * dt);

    // resolution guard: the potential must be resolved along tau
    let mut max_dpot = 0.0f64;
    for it in 0..mt.saturating_sub(1) {
        let p0 = (coefs.pot)(gs.node(ms / 2), gt.node(it));
        let p1 = (coefs.pot)(gs.node(ms / 2), gt.node(it + 1));
        max_dpot = max_dpot.max((p1 - p0).norm());
    }
    if max_dpot > 0.5 {
        return Err(Error::ResolutionGuard(format!(
            "potential changes by {max_dpot:.3} per tau step; refine the tau grid"
        )));
    }

    let bw = grid.bandwidth();
    let mut a = BandMatrix::zeros(ms * mt, bw, bw);
    for is in 0..ms {
        let s = gs.node(is);
        for it in 0..mt {
            let t = gt.node(it);
            let row = grid.flat(is, it);
            let ct = (coefs.c_tau)(s, t) * inv_dt2;
            let cs = (coefs.c_sigma)(s, t) * inv_ds2;
            let drift = coefs.d_tau / (2.0 * dt);
            a.add(row, row, Complex64::new(2.0 * ct + 2.0 * cs, 0.0) + (coefs.pot)(s, t));
            // tau neighbors (ghost doubling at a Neumann end)
            if it + 1 < mt {
                let mut c = -ct;
                if it == 0 && grid.bc[2] == Bc::Neumann {
                    c *= 2.0;
                }
                a.add(row, grid.flat(is, it + 1), Complex64::new(c, drift));
            }
            if it > 0 {
                let mut c = -ct;
                if it == mt - 1 && grid.bc[3] == Bc::Neumann {
                    c *= 2.0;
                }
                a.add(row, grid.flat(is, it - 1), Complex64::new(c, -drift));
            }
            // drift at Dirichlet edges: the missing neighbor carries value 0,
            // so the centered difference needs no correction row
            // sigma neighbors
            if is + 1 < ms {
                let mut c = -cs;
                if is == 0 && grid.bc[0] == Bc::Neumann {
                    c *= 2.0;
                }
                a.add(row, grid.flat(is + 1, it), Complex64::new(c, 0.0));
            }
            if is > 0 {
                let mut c = -cs;
                if is == ms - 1 && grid.bc[1] == Bc::Neumann {
                    c *= 2.0;
                }
                a.add(row, grid.flat(is - 1, it), Complex64::new(c, 0.0));
            }
        }
    }
    Ok(Discrete2D { matrix: a, grid: grid.clone() })
}

impl Discrete2D {
    /// k eigenvalues nearest `shift`, with localization statistics.
    pub fn eig_near(
        &self,
        shift: Complex64,
        k: usize,
        start: Option<&[Complex64]>,
        opts: &ArnoldiOptions,
    ) -> Result<SpectralResult> {
        let mut sh = shift;
        let nudge = 1e-3 * (1.0 + shift.norm()) * Complex64::new(0.6, 0.8);
        for attempt in 0..3 {
            let mut shifted = self.matrix.clone();
            shifted.shift_diagonal(sh);
            match shifted.lu() {
                Ok(lu) => {
                    let pairs = shift_invert_eigs(&self.matrix, &lu, sh, k, start, opts)?;
                    let triples: Vec<_> =
                        pairs.into_iter().map(|p| (p.value, p.vector, p.residual)).collect();
                    let mut res = SpectralResult::from_pairs(triples);
                    res.localization =
                        res.vectors.iter().map(|v| self.localization(v)).collect();
                    return Ok(res);
                }
                Err(Error::SingularFactorization { .. }) if attempt < 2 => sh += nudge,
                Err(e) => return Err(e),
            }
        }
        Err(Error::MissingEigenvalue { shift, attempts: 3 })
    }

    /// Resolvent norm 1/sigma_min at one spectral point.
    pub fn resolvent_norm(&self, lambda: Complex64) -> Result<f64> {
        let mut shifted = self.matrix.clone();
        shifted.shift_diagonal(lambda);
        match shifted.lu() {
            Ok(lu) => Ok(1.0 / smallest_singular_value(&lu, 1e-6, 200)?),
            Err(Error::SingularFactorization { .. }) => Ok(1e12),
            Err(e) => Err(e),
        }
    }

    pub fn localization(&self, v: &[Complex64]) -> Localization {
        let gs = self.grid.sigma_axis();
        let gt = self.grid.tau_axis();
        let (ms, mt) = (gs.len(), gt.len());
        let mut mass = 0.0;
        let mut cs = 0.0;
        let mut ct = 0.0;
        for is in 0..ms {
            for it in 0..mt {
                let w = v[self.grid.flat(is, it)].norm_sqr();
                mass += w;
                cs += w * gs.node(is);
                ct += w * gt.node(it);
            }
        }
        cs /= mass;
        ct /= mass;
        let mut vs = 0.0;
        let mut vt = 0.0;
        let mut boundary = 0.0;
        for is in 0..ms {
            for it in 0..mt {
                let w = v[self.grid.flat(is, it)].norm_sqr();
                vs += w * (gs.node(is) - cs).powi(2);
                vt += w * (gt.node(it) - ct).powi(2);
                // mass near artificial (truncation) edges: any side that is
                // Dirichlet but not a physical boundary of the model; treat
                // the outer tau edge and both sigma edges as artificial
                if it + 3 > mt || is < 2 || is + 3 > ms {
                    boundary += w;
                }
            }
        }
        Localization {
            centroid: (cs, ct),
            widths: ((vs / mass).sqrt(), (vt / mass).sqrt()),
            boundary_mass: boundary / mass,
        }
    }

    /// Fraction of |v|^2 mass with sigma <= s_max.
    pub fn mass_within_sigma(&self, v: &[Complex64], s_max: f64) -> f64 {
        let gs = self.grid.sigma_axis();
        let gt = self.grid.tau_axis();
        let mut inside = 0.0;
        let mut total = 0.0;
        for is in 0..gs.len() {
            let s = gs.node(is);
            for it in 0..gt.len() {
                let w = v[self.grid.flat(is, it)].norm_sqr();
                total += w;
                if s.abs() <= s_max {
                    inside += w;
                }
            }
        }
        inside / total
    }
}

/// Default strip grid for the curvature model at a given eps: resolves the
/// Airy scale along tau and covers the transverse decay width.
pub fn v1_model_grid(eps: f64, half: bool) -> Result<Grid2D> {
    let s_max = (4.0 * eps.powf(-0.25)).max(8.0);
    let n_per_unit = 8.0;
    let t_max = 20.0;
    let n_tau = (t_max / 0.05) as usize - 1;
    if half {
        let n_sigma = (s_max * n_per_unit) as usize;
        Grid2D::new(
            (0.0, s_max),
            (0.0, t_max),
            n_sigma,
            n_tau,
            [Bc::Neumann, Bc::Dirichlet, Bc::Dirichlet, Bc::Dirichlet],
        )
    } else {
        let n_sigma = (2.0 * s_max * n_per_unit) as usize;
        Grid2D::new(
            (-s_max, s_max),
            (0.0, t_max),
            n_sigma,
            n_tau,
            [Bc::Dirichlet, Bc::Dirichlet, Bc::Dirichlet, Bc::Dirichlet],
        )
    }
}

pub fn v2_model_grid(eps: f64) -> Result<Grid2D> {
    let s_max = (4.0 * eps.powf(-0.25)).max(10.0);
    let n_sigma = (s_max * 8.0) as usize;
    let t_max = 20.0;
    let n_tau = (t_max / 0.05) as usize - 1;
    Grid2D::new(
        (0.0, s_max),
        (0.0, t_max),
        n_sigma,
        n_tau,
        [Bc::Neumann, Bc::Dirichlet, Bc::Dirichlet, Bc::Dirichlet],
    )
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ModelRow {
    pub epsilon: f64,
    pub re_lambda: f64,
    pub im_lambda: f64,
    /// distance to the two-term prediction with the bilinear-normalization
    /// first-order coefficient
    pub defect: f64,
    pub residual: f64,
    /// |psi|^2 fraction within the localization window
    pub mass_core: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelVerification {
    pub rows: Vec<ModelRow>,
    /// least-squares linear coefficient of lambda(eps) about lambda0
    #[serde(serialize_with = "crate::table::complex_serde::serialize")]
    pub first_order_coef: Complex64,
    /// log-log slope of `defect` against eps
    pub defect_slope: f64,
}

/// Eigensolve the curvature model near the two-term prediction across
/// eps_list and fit the first-order coefficient.
///
/// The transverse mode is even in sigma, so the eigensolve runs on the
/// half strip with a Neumann condition at sigma = 0 (verified against the
/// full strip in the tests).
pub fn verify_v1_model(eps_list: &[f64], beta: f64, table: &AiryTable) -> Result<ModelVerification> {
    let cutoff = CutoffSpec::new(0.6)?;
    let lam1 = table.lambda1_effective(beta);
    let mut rows = Vec::new();
    let mut lams = Vec::new();
    for &eps in eps_list {
        let spec = Model2DSpec {
            operator: Operator2D::BepsV1 { eps, beta, theta: 0.0, tilde_b: 0.3, omega: 0.0 },
            cutoff,
        };
        let grid = v1_model_grid(eps, true)?;
        let op = assemble_2d(&spec, &grid)?;
        let shift = table.lambda0 + eps * lam1;
        let res = op.eig_near(shift, 1, None, &ArnoldiOptions::default())?;
        let lam = res.eigenvalues[0];
        let width = 2.0 * eps.powf(-1.0 / 3.0);
        rows.push(ModelRow {
            epsilon: eps,
            re_lambda: lam.re,
            im_lambda: lam.im,
            defect: (lam - shift).norm(),
            residual: res.residuals[0],
            mass_core: op.mass_within_sigma(&res.vectors[0], width),
        });
        lams.push(lam);
    }
    let first_order_coef = fit_linear_coefficient(eps_list, &lams, table.lambda0);
    let defects: Vec<f64> = rows.iter().map(|r| r.defect).collect();
    let defect_slope = crate::model1d::log_log_slope(eps_list, &defects);
    Ok(ModelVerification { rows, first_order_coef, defect_slope })
}

/// Eigensolve the quarter-plane corner model near its two-term prediction.
pub fn verify_v2_model(eps_list: &[f64], table: &AiryTable) -> Result<ModelVerification> {
    let cutoff = CutoffSpec::new(0.6)?;
    let lam1 = table.lambda1_check_effective();
    let mut rows = Vec::new();
    let mut lams = Vec::new();
    for &eps in eps_list {
        let spec = Model2DSpec { operator: Operator2D::QepsV2 { eps }, cutoff };
        let grid = v2_model_grid(eps)?;
        let op = assemble_2d(&spec, &grid)?;
        let shift = table.lambda0 + eps * lam1;
        let res = op.eig_near(shift, 1, None, &ArnoldiOptions::default())?;
        let lam = res.eigenvalues[0];
        let width = 2.0 * eps.powf(-1.0 / 3.0);
        rows.push(ModelRow {
            epsilon: eps,
            re_lambda: lam.re,
            im_lambda: lam.im,
            defect: (lam - shift).norm(),
            residual: res.residuals[0],
            mass_core: op.mass_within_sigma(&res.vectors[0], width),
        });
        lams.push(lam);
    }
    let first_order_coef = fit_linear_coefficient(eps_list, &lams, table.lambda0);
    let defects: Vec<f64> = rows.iter().map(|r| r.defect).collect();
    let defect_slope = crate::model1d::log_log_slope(eps_list, &defects);
    Ok(ModelVerification { rows, first_order_coef, defect_slope })
}

/// Least-squares fit of lambda(eps) = lambda0 + c1 eps + c2 eps^2 with
/// lambda0 pinned; returns c1.
fn fit_linear_coefficient(eps: &[f64], lams: &[Complex64], lambda0: Complex64) -> Complex64 {
    // normal equations for the 2x2 system in (c1, c2)
    let (mut s11, mut s12, mut s22) = (0.0f64, 0.0f64, 0.0f64);
    let (mut b1, mut b2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for (&e, &l) in eps.iter().zip(lams) {
        let y = l - lambda0;
        s11 += e * e;
        s12 += e * e * e;
        s22 += e * e * e * e;
        b1 += y * e;
        b2 += y * e * e;
    }
    let det = s11 * s22 - s12 * s12;
    (b1 * s22 - b2 * s12) / det
}

#[derive(Clone, Debug, Serialize)]
pub struct CornerScanRow {
    pub eps_margin: f64,
    pub max_inv_norm: f64,
    /// eps_margin * max_inv_norm, bounded across margins by the corner
    /// resolvent estimate
    pub product: f64,
}

/// Sweep the corner operator's resolvent norm along vertical lines left of
/// the critical abscissa |j|^{2/3} |nu_1| / 2.
pub fn corner_resolvent_scan(
    j_slope: f64,
    eps_margin_list: &[f64],
    table: &AiryTable,
) -> Result<Vec<CornerScanRow>> {
    if !eps_margin_list.iter().all(|&m| m > 0.05 && m <= 0.5) {
        return Err(Error::Config("corner scan margins must lie in (0.05, 0.5]".into()));
    }
    let critical = j_slope.abs().powf(2.0 / 3.0) * table.nu[0].abs() / 2.0;
    let scale = j_slope.abs().powf(-1.0 / 3.0); // dilation length scale
    let s_max = 16.0 * scale;
    let t_max = 27.0 * scale;
    let grid = Grid2D::new(
        (0.0, s_max),
        (0.0, t_max),
        (s_max / (0.15 * scale)) as usize,
        (t_max / (0.15 * scale)) as usize,
        [Bc::Dirichlet, Bc::Dirichlet, Bc::Neumann, Bc::Dirichlet],
    )?;
    let spec = Model2DSpec {
        operator: Operator2D::ACorner { j_slope },
        cutoff: CutoffSpec::new(0.6)?,
    };
    let op = assemble_2d(&spec, &grid)?;
    let mut rows = Vec::new();
    let mut warm = None;
    for &margin in eps_margin_list {
        let re = critical - margin * j_slope.abs().powf(2.0 / 3.0);
        let mut max_inv = 0.0f64;
        for k in 0..17 {
            let im = -4.0 + 8.0 * k as f64 / 16.0;
            let lam = Complex64::new(re, im * j_slope.abs().powf(2.0 / 3.0));
            let mut shifted = op.matrix.clone();
            shifted.shift_diagonal(lam);
            let inv = match shifted.lu() {
                Ok(lu) => {
                    1.0 / crate::linalg::sigma_min::smallest_singular_value_warm(
                        &lu, 1e-5, 300, &mut warm,
                    )?
                }
                Err(crate::error::Error::SingularFactorization { .. }) => 1e12,
                Err(e) => return Err(e),
            };
            max_inv = max_inv.max(inv);
        }
        rows.push(CornerScanRow {
            eps_margin: margin,
            max_inv_norm: max_inv,
            product: margin * max_inv,
        });
    }
    Ok(rows)
}
