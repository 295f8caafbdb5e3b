//! Brute-force cross-checks of the hand-built linear-algebra kernels against
//! dense factorizations, plus the slower model-operator invariants.

use airy_spectra::conformal::ConformalDomain;
use airy_spectra::grid::{Bc, CutoffSpec, Grid1D, Grid2D};
use airy_spectra::linalg::{smallest_singular_value, ArnoldiOptions};
use airy_spectra::model1d::{assemble_1d, Model1DSpec, Operator1D};
use airy_spectra::model2d::{assemble_2d, v1_model_grid, Model2DSpec, Operator2D};
use airy_spectra::operator::assemble_full;
use airy_spectra::table::build_airy_table;
use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;

fn to_dense(m: &airy_spectra::linalg::BandMatrix) -> DMatrix<Complex<f64>> {
    let n = m.n;
    let mut d = DMatrix::<Complex<f64>>::zeros(n, n);
    for j in 0..n {
        for i in j.saturating_sub(m.ku)..=(j + m.kl).min(n - 1) {
            let z = m.get(i, j);
            d[(i, j)] = Complex::new(z.re, z.im);
        }
    }
    d
}

#[test]
fn arnoldi_matches_dense_eigensolve_on_a_small_grid() {
    // 32 x 32 instance of the full operator against a dense Schur oracle
    let domain = ConformalDomain::new(0.08, -0.8).unwrap();
    let grid = Grid2D::new(
        (-3.0, 3.0),
        (0.0, 10.0),
        32,
        32,
        [Bc::Dirichlet; 4],
    )
    .unwrap();
    let spec = Model2DSpec {
        operator: Operator2D::BepsV1 { eps: 0.05, beta: 0.5, theta: 0.0, tilde_b: 0.3, omega: 0.0 },
        cutoff: CutoffSpec::new(0.6).unwrap(),
    };
    let _ = domain;
    let op = assemble_2d(&spec, &grid).unwrap();
    let dense = to_dense(&op.matrix);
    let schur = dense.clone().try_schur(1e-12, 20000).expect("dense Schur converges");
    let t = schur.unpack().1;
    let mut dense_eigs: Vec<Complex64> =
        (0..t.nrows()).map(|i| Complex64::new(t[(i, i)].re, t[(i, i)].im)).collect();
    dense_eigs.sort_by(|a, b| a.re.total_cmp(&b.re));

    let table = build_airy_table(1, 1e-12).unwrap();
    let shift = table.lambda0 + Complex64::new(0.05, 0.0);
    let res = op.eig_near(shift, 3, None, &ArnoldiOptions::default()).unwrap();
    for lam in &res.eigenvalues {
        let nearest = dense_eigs
            .iter()
            .map(|d| (d - lam).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-8, "Arnoldi eigenvalue {lam} missing from the dense spectrum");
    }
}

#[test]
fn sigma_min_matches_dense_svd() {
    // n = 300 slice of the perturbed half-line operator
    let grid = Grid1D::new(0.0, 30.0, 300, Bc::Dirichlet, Bc::Dirichlet).unwrap();
    let spec = Model1DSpec::perturbed(
        Operator1D::L2Half,
        0.02,
        1.0,
        CutoffSpec::new(0.6).unwrap(),
    );
    let op = assemble_1d(&spec, &grid).unwrap();
    let lam = Complex64::new(1.0, 2.0);
    let mut shifted = op.matrix.clone();
    shifted.shift_diagonal(lam);
    let dense = to_dense(&shifted);
    let svd = dense.svd(false, false);
    let want = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let lu = shifted.clone().lu().unwrap();
    let got = smallest_singular_value(&lu, 1e-9, 500).unwrap();
    assert!(
        (got - want).abs() <= 1e-8 * want.max(1.0),
        "sigma_min {got} vs dense SVD {want}"
    );
}

#[test]
fn line_operator_resolvent_sweep_is_uniformly_bounded() {
    // sup over Re lambda = 0, |Im| <= 5 of the resolvent norm stays within a
    // factor 2 across eps
    let cutoff = CutoffSpec::new(0.6).unwrap();
    let mut sups = Vec::new();
    for &eps in &[0.04, 0.02, 0.01] {
        let grid = Grid1D::new(-30.0, 30.0, 3000, Bc::Dirichlet, Bc::Dirichlet).unwrap();
        let spec = Model1DSpec::perturbed(Operator1D::L2Line, eps, 1.0, cutoff);
        let op = assemble_1d(&spec, &grid).unwrap();
        let mut sup = 0.0f64;
        for k in 0..11 {
            let im = -5.0 + k as f64;
            let inv = airy_spectra::model1d::resolvent_norm_1d(&op, Complex64::new(0.0, im)).unwrap();
            sup = sup.max(inv);
        }
        sups.push(sup);
    }
    let ratio = sups.iter().cloned().fold(0.0f64, f64::max)
        / sups.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(ratio < 2.0, "resolvent sup varies by {ratio} across eps: {sups:?}");
}

#[test]
fn v1_model_truncation_stability() {
    // widening the transverse box moves the tracked eigenvalue below 1e-7
    let table = build_airy_table(1, 1e-12).unwrap();
    let eps = 0.04;
    let lam1 = table.lambda1_effective(0.0);
    let shift = table.lambda0 + eps * lam1;
    let mut vals = Vec::new();
    for widen in [1.0f64, 1.5] {
        let s_max = 4.0 * widen * eps.powf(-0.25);
        let n_sigma = (s_max * 8.0) as usize;
        let grid = Grid2D::new(
            (0.0, s_max),
            (0.0, 20.0),
            n_sigma,
            399,
            [Bc::Neumann, Bc::Dirichlet, Bc::Dirichlet, Bc::Dirichlet],
        )
        .unwrap();
        let spec = Model2DSpec {
            operator: Operator2D::BepsV1 { eps, beta: 0.0, theta: 0.0, tilde_b: 0.3, omega: 0.0 },
            cutoff: CutoffSpec::new(0.6).unwrap(),
        };
        let op = assemble_2d(&spec, &grid).unwrap();
        let res = op.eig_near(shift, 1, None, &ArnoldiOptions::default()).unwrap();
        vals.push(res.eigenvalues[0]);
    }
    // grids share the tau axis; sigma spacing matches to rounding
    assert!(
        (vals[0] - vals[1]).norm() < 1e-7,
        "truncation moved the eigenvalue by {:.2e}",
        (vals[0] - vals[1]).norm()
    );
}

#[test]
fn ueps_even_modes_match_qeps() {
    // the full-strip operator restricted to even modes is the quarter-plane
    // operator with a Neumann wall
    let table = build_airy_table(1, 1e-12).unwrap();
    let eps = 0.05;
    let shift = table.lambda0 + eps * table.lambda1_check_effective();
    let cutoff = CutoffSpec::new(0.6).unwrap();
    let s_max = 10.0;
    let grid_half = Grid2D::new(
        (0.0, s_max),
        (0.0, 20.0),
        80,
        399,
        [Bc::Neumann, Bc::Dirichlet, Bc::Dirichlet, Bc::Dirichlet],
    )
    .unwrap();
    let grid_full = Grid2D::new(
        (-s_max, s_max),
        (0.0, 20.0),
        161,
        399,
        [Bc::Dirichlet, Bc::Dirichlet, Bc::Dirichlet, Bc::Dirichlet],
    )
    .unwrap();
    let op_half = assemble_2d(
        &Model2DSpec { operator: Operator2D::QepsV2 { eps }, cutoff },
        &grid_half,
    )
    .unwrap();
    let op_full = assemble_2d(
        &Model2DSpec { operator: Operator2D::UepsV2 { eps }, cutoff },
        &grid_full,
    )
    .unwrap();
    let r_half = op_half.eig_near(shift, 1, None, &ArnoldiOptions::default()).unwrap();
    let r_full = op_full.eig_near(shift, 1, None, &ArnoldiOptions::default()).unwrap();
    let gap = (r_half.eigenvalues[0] - r_full.eigenvalues[0]).norm();
    assert!(gap < 2e-4, "even-sector mismatch {gap:.2e}");
    // the full-strip eigenvector is even in sigma
    let v = &r_full.vectors[0];
    let gs = grid_full.sigma_axis();
    let gt = grid_full.tau_axis();
    let mid = gs.len() / 2;
    let mut asym = 0.0f64;
    let mut scale = 0.0f64;
    for ds in 1..mid {
        for it in (0..gt.len()).step_by(7) {
            let a = v[grid_full.flat(mid - ds, it)];
            let b = v[grid_full.flat(mid + ds, it)];
            asym = asym.max((a - b).norm());
            scale = scale.max(a.norm());
        }
    }
    assert!(asym <= 1e-6 * scale.max(1e-300), "asymmetry {asym:.2e} at scale {scale:.2e}");
}

#[test]
fn no_spurious_eigenvalue_left_of_the_model_margin() {
    // resolvent probes left of 0.9 Re theta_1 stay bounded for the corner and
    // curvature models at eps <= 0.05
    let table = build_airy_table(1, 1e-12).unwrap();
    let margin = 0.9 * table.lambda0.re;
    let cutoff = CutoffSpec::new(0.6).unwrap();
    let probes = [
        Complex64::new(0.5 * margin, table.lambda0.im),
        Complex64::new(0.8 * margin, 0.5),
    ];
    // curvature model at beta = 0
    let grid = v1_model_grid(0.05, true).unwrap();
    let op = assemble_2d(
        &Model2DSpec {
            operator: Operator2D::BepsV1 { eps: 0.05, beta: 0.0, theta: 0.0, tilde_b: 0.3, omega: 0.0 },
            cutoff,
        },
        &grid,
    )
    .unwrap();
    for &lam in &probes {
        let inv = op.resolvent_norm(lam).unwrap();
        assert!(inv < 1e4, "curvature model resolvent {inv:.2e} at {lam} suggests spectrum");
    }
    // corner model
    let grid = Grid2D::new(
        (0.0, 14.0),
        (0.0, 24.0),
        100,
        170,
        [Bc::Dirichlet, Bc::Dirichlet, Bc::Neumann, Bc::Dirichlet],
    )
    .unwrap();
    let op = assemble_2d(
        &Model2DSpec { operator: Operator2D::ACorner { j_slope: 1.0 }, cutoff },
        &grid,
    )
    .unwrap();
    for &lam in &probes {
        let inv = op.resolvent_norm(lam).unwrap();
        assert!(inv < 1e4, "corner model resolvent {inv:.2e} at {lam} suggests spectrum");
    }
}

#[test]
fn curvature_corrections_shift_the_eigenvalue_at_the_expected_order() {
    // the stiffness (theta) and drift (omega) corrections are assembled and
    // eigensolved; their effect on the tracked eigenvalue is O(eps^2 theta)
    // and O(eps omega) small
    let table = build_airy_table(1, 1e-12).unwrap();
    let eps = 0.04;
    let shift = table.lambda0 + eps * table.lambda1_effective(0.0);
    let cutoff = CutoffSpec::new(0.6).unwrap();
    let grid = v1_model_grid(eps, true).unwrap();
    let solve = |theta: f64, omega: f64| -> Complex64 {
        let op = assemble_2d(
            &Model2DSpec {
                operator: Operator2D::BepsV1 { eps, beta: 0.0, theta, tilde_b: 0.3, omega },
                cutoff,
            },
            &grid,
        )
        .unwrap();
        op.eig_near(shift, 1, None, &ArnoldiOptions::default()).unwrap().eigenvalues[0]
    };
    let base = solve(0.0, 0.0);
    let with_theta = solve(0.5, 0.0);
    let with_omega = solve(0.0, 0.3);
    let d_theta = (with_theta - base).norm();
    let d_omega = (with_omega - base).norm();
    assert!(d_theta > 0.0 && d_theta < 10.0 * 0.5 * eps * eps, "theta shift {d_theta:.2e}");
    assert!(d_omega > 0.0 && d_omega < 10.0 * 0.3 * eps, "omega shift {d_omega:.2e}");
}

#[test]
fn full_operator_boundary_layer_scalings() {
    // eigenvector layer width scales like h^{2/3}
    use airy_spectra::conformal::analyze_geometry;
    use airy_spectra::operator::full_grid_dims;
    use airy_spectra::quasimode::*;
    let table = build_airy_table(1, 1e-12).unwrap();
    let domain = ConformalDomain::new(0.05, -1.0).unwrap();
    let rep = analyze_geometry(&domain, 2000).unwrap();
    let ws = build_tau_workspace(&table, 3000).unwrap();
    let hs = [0.04, 0.028, 0.02, 0.014];
    let mut widths = Vec::new();
    for &h in &hs {
        let (n_u, n_v) = full_grid_dims(&domain, h, 10);
        let op = assemble_full(&domain, h, n_u, n_v).unwrap();
        let q = build_quasimode_v1(
            &rep,
            &table,
            &domain,
            &ws,
            &op,
            0,
            &QuasimodeOptions::default(),
        )
        .unwrap();
        let res = op
            .eig_near(q.prediction.lambda_hat, 1, Some(&q.values), &ArnoldiOptions::default())
            .unwrap();
        // numerical-range containment: accretive real part, potential-bounded
        // imaginary part
        for lam in &res.eigenvalues {
            assert!(lam.re >= -1e-8, "accretivity violated: {lam}");
            assert!(
                lam.im >= -1e-8 && lam.im <= 1.0 + 1e-8,
                "imaginary part outside the potential range: {lam}"
            );
        }
        widths.push(op.layer_width(&res.vectors[0]));
    }
    let slope = airy_spectra::model1d::log_log_slope(&hs, &widths);
    assert!(
        (slope - 2.0 / 3.0).abs() <= 0.1,
        "layer width slope {slope:.3} (want 2/3 +- 0.1); widths {widths:?}"
    );
}
