//! Derived checks against independent reference computations.

mod common;

use common::*;
use gfxfer_core::density_ratio::{build_basis, fit_ratio, gaussian_ratio_oracle, RatioConfig};
use gfxfer_core::experiment::{run_trial, Cell, ExperimentConfig, GraphKind, PsdKind};
use gfxfer_core::graph::{perturb_edges, NodeMapping};
use gfxfer_core::gwss::{psd_historical, GwssModel};
use gfxfer_core::recovery::{lmmse, make_mask, observe_batch};
use gfxfer_core::spectral_fit::{
    arma_eval, covariance_from_arma, fit_arma, vandermonde, ArmaParams, CovarianceConvention,
    Regularization, SolverOptions,
};
use gfxfer_core::transfer::{
    baseline_transfer, current_basis_transfer, drw_transfer, weighted_psd_nodechange,
    TransferOptions, TransferScenario,
};
use gfxfer_core::{spectral_decompose, DMatrix, DVector, Graph};
use rand::Rng;

#[test]
fn lmmse_gain_matches_brute_force_regression() {
    let mut rng = rng(1);
    for _ in 0..3 {
        let g = connected_er(5, 0.6, &mut rng);
        let basis = spectral_decompose(&g).unwrap();
        let p = DVector::from_fn(5, |_, _| 0.1 + 1.9 * rng.random::<f64>());
        let cov = basis.synthesize(&p).unwrap();
        let mask = loop {
            let m = make_mask(5, 0.4, &mut rng).unwrap();
            if m.num_observed() < 5 {
                break m.with_noise_std(0.1f64.sqrt()).unwrap();
            }
        };
        let est = lmmse(&cov, &DVector::zeros(5), &mask, true).unwrap();
        let brute = regression_gain(&cov, &mask, 100_000, &mut rng);
        let err = (&est.gain - &brute).amax();
        assert!(err < 0.01, "gain differs from regression by {err}");
        assert!(est.offset.amax() == 0.0);

        // the closed form beats the estimator-free completion
        let x = gaussian_columns(
            &(cov.clone() + DMatrix::identity(5, 5) * 1e-12),
            20_000,
            &mut rng,
        );
        let y = observe_batch(&mask, &x, &mut rng).unwrap();
        let xhat = est.recover_batch(&y).unwrap();
        let mut fill = DMatrix::zeros(5, x.ncols());
        for (r, &i) in mask.observed().iter().enumerate() {
            fill.row_mut(i).copy_from(&y.row(r));
        }
        let mse_est = (&xhat - &x).norm_squared();
        let mse_fill = (&fill - &x).norm_squared();
        assert!(mse_est <= mse_fill, "{mse_est} > {mse_fill}");
    }
}

#[test]
fn arma_fit_matches_dual_projected_gradient() {
    let mut rng = rng(2);
    let (l, m, rho) = (2, 1, 1e-3);
    let mut constrained = 0;
    for _ in 0..3 {
        let mut pts: Vec<f64> = (0..8).map(|_| 2.0 * rng.random::<f64>()).collect();
        pts.sort_by(f64::total_cmp);
        let grid = DVector::from_vec(pts);
        let target = DVector::from_fn(8, |_, _| rng.random::<f64>());
        let reg = Regularization::ridge(l, m, rho, rho);
        let fit = fit_arma(&target, &grid, l, m, &reg, &SolverOptions::default()).unwrap();

        // ‖A z − c‖² + ρ‖z‖² with z = (α, β), as ½ zᵀQz + qᵀz
        let (phi1, phi2) = vandermonde(&grid, l, m);
        let n = m + l + 1;
        let mut a = DMatrix::zeros(8, n);
        let mut g_mat = DMatrix::zeros(16, n);
        let mut g_vec = DVector::zeros(16);
        for i in 0..8 {
            for j in 0..m {
                a[(i, j)] = target[i] * phi1[(i, j)];
                g_mat[(i, j)] = phi1[(i, j)];
            }
            for j in 0..=l {
                a[(i, m + j)] = -phi2[(i, j)];
                g_mat[(8 + i, m + j)] = phi2[(i, j)];
            }
            g_vec[i] = 1.0;
        }
        let c = -&target;
        let q_mat = (a.transpose() * &a + DMatrix::identity(n, n) * rho) * 2.0;
        let q_vec = a.transpose() * &c * -2.0;
        let z = dual_projected_gradient(&q_mat, &q_vec, &g_mat, &g_vec, 1_000_000);
        let oracle = ArmaParams::new(
            z.rows(m, l + 1).iter().copied().collect(),
            z.rows(0, m).iter().copied().collect(),
        )
        .unwrap();
        let oracle_obj = oracle.fit_objective(&target, &grid, &reg).unwrap();
        let ours = fit.diagnostics.objective;
        assert!(
            (ours - oracle_obj).abs() <= 1e-5 * oracle_obj.abs().max(1e-12),
            "active set {ours} vs oracle {oracle_obj}"
        );
        let slack = (&g_mat * &z + &g_vec).min();
        if slack < 1e-6 {
            constrained += 1;
        }
    }
    assert!(constrained > 0, "no instance exercised the constraints");
}

#[test]
fn fitted_covariance_reproduces_the_analytic_psd() {
    let mut rng = rng(3);
    let g = connected_er(100, 0.15, &mut rng);
    let basis = spectral_decompose(&g).unwrap();
    let p = psd_historical(&basis).unwrap();
    let fit = fit_arma(
        &p.map(f64::sqrt),
        basis.eigenvalues(),
        5,
        2,
        &Regularization::ridge(5, 2, 1e-6, 1e-6),
        &SolverOptions::default(),
    )
    .unwrap();
    let cov = covariance_from_arma(&basis, &fit.params, CovarianceConvention::Squared).unwrap();
    let truth = basis.synthesize(&p).unwrap();
    let rel = (&cov - &truth).norm() / truth.norm();
    assert!(rel < 0.1, "relative Frobenius error {rel}");

    // conjugation by U diagonalizes, and zeroed responses drop the rank
    let mut f = arma_eval(basis.eigenvalues(), &fit.params).unwrap();
    f.rows_mut(3, 97).fill(0.0);
    let sigma = basis.synthesize(&f.map(|v| v * v)).unwrap();
    let conj = basis.eigenvectors().transpose() * &sigma * basis.eigenvectors();
    let off = DMatrix::from_fn(100, 100, |i, j| if i == j { 0.0 } else { conj[(i, j)] });
    assert!(off.amax() < 1e-9);
    let rank = sigma
        .symmetric_eigenvalues()
        .iter()
        .filter(|v| v.abs() > 1e-9)
        .count();
    assert_eq!(rank, f.iter().filter(|v| **v != 0.0).count());
}

#[test]
fn median_bandwidth_tracks_the_interpoint_median() {
    let mut rng = rng(4);
    let cloud = normal_matrix(2, 1000, &mut rng);
    let cfg = RatioConfig {
        b_max: 50,
        ..RatioConfig::default()
    };
    let basis = build_basis(&cloud, None, &cfg, &mut rng).unwrap();
    // distance of two independent N(0, I₂) points is Rayleigh(√2)
    let median = (2.0 * 2.0 * 2f64.ln()).sqrt();
    let ratio = basis.bandwidth() / median;
    assert!((0.5..=2.0).contains(&ratio), "bandwidth ratio {ratio}");
}

#[test]
fn ratio_is_near_one_without_shift() {
    let mut rng = rng(5);
    let cov = random_spd(5, 0.5, 2.0, &mut rng);
    let y_h = gaussian_columns(&cov, 2000, &mut rng);
    let y_c = gaussian_columns(&cov, 2000, &mut rng);
    let cfg = RatioConfig::default();
    let basis = build_basis(&y_c, Some(&y_h), &cfg, &mut rng).unwrap();
    let model = fit_ratio(&y_h, &y_c, basis, &cfg.lambda_grid, cfg.folds).unwrap();
    let w = model.eval_batch(&y_h).unwrap();
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    assert!((0.8..=1.2).contains(&mean), "mean weight {mean}");
}

#[test]
fn weighted_second_moment_recovers_the_wider_gaussian() {
    let mut rng = rng(6);
    let y_h = normal_matrix(1, 5000, &mut rng);
    let y_c = normal_matrix(1, 5000, &mut rng) * 2f64.sqrt();
    let cfg = RatioConfig::default();
    let basis = build_basis(&y_c, Some(&y_h), &cfg, &mut rng).unwrap();
    let model = fit_ratio(&y_h, &y_c, basis, &cfg.lambda_grid, cfg.folds).unwrap();
    let w = model.eval_batch(&y_h).unwrap();
    let moment = w
        .iter()
        .zip(y_h.iter())
        .map(|(w, y)| w * y * y)
        .sum::<f64>()
        / 5000.0;
    assert!(
        (moment - 2.0).abs() < 0.15 * 2.0,
        "weighted second moment {moment}"
    );
}

#[test]
fn gaussian_oracle_matches_a_direct_density_quotient() {
    let mut rng = rng(7);
    for _ in 0..5 {
        let (ch, cc) = (
            random_spd(3, 0.3, 3.0, &mut rng),
            random_spd(3, 0.3, 3.0, &mut rng),
        );
        let (mh, mc) = (
            normal_matrix(3, 1, &mut rng).column(0).into_owned(),
            DVector::zeros(3),
        );
        let y = normal_matrix(3, 1, &mut rng).column(0).into_owned();
        let pdf = |cov: &DMatrix<f64>, mean: &DVector<f64>| {
            let d = &y - mean;
            let quad = (d.transpose() * cov.clone().try_inverse().unwrap() * &d)[0];
            (-0.5 * quad).exp() / ((2.0 * std::f64::consts::PI).powi(3) * cov.determinant()).sqrt()
        };
        let direct = pdf(&cc, &mc) / pdf(&ch, &mh);
        let oracle = gaussian_ratio_oracle(&ch, &cc, &mh, &mc, &y).unwrap();
        assert!(
            (oracle - direct).abs() < 1e-10 * direct.max(1.0),
            "{oracle} vs {direct}"
        );
    }
}

/// Same graph, same PSD on both sides: a PSD the (0, 1) ARMA family can
/// represent exactly, `f(λ) = 1 / (1 + 0.2 λ)`, `p = f²`.
fn no_shift_scenario(seed: u64) -> (TransferScenario, DMatrix<f64>) {
    let mut rng = rng(seed);
    let g = connected_er(20, 0.3, &mut rng);
    let basis = spectral_decompose(&g).unwrap();
    let f = basis.eigenvalues().map(|l| 1.0 / (1.0 + 0.2 * l));
    let p = f.map(|v| v * v);
    let model = GwssModel::zero_mean(basis.clone(), p.clone()).unwrap();
    let mask = make_mask(20, 0.3, &mut rng)
        .unwrap()
        .with_noise_std(0.1f64.sqrt())
        .unwrap();
    let x_h = model.sample(5000, &mut rng).unwrap();
    let x_c = model.sample(2000, &mut rng).unwrap();
    let y_h = observe_batch(&mask, &x_h, &mut rng).unwrap();
    let y_c = observe_batch(&mask, &x_c, &mut rng).unwrap();
    let scn = TransferScenario::with_bases(
        g.clone(),
        g.clone(),
        basis.clone(),
        basis.clone(),
        NodeMapping::identity(&g),
        mask.clone(),
        mask,
        x_h,
        y_h,
        y_c,
    )
    .unwrap();
    (scn, basis.synthesize(&p).unwrap())
}

#[test]
fn baseline_matches_the_oracle_wiener_filter_without_shift() {
    let (scn, cov) = no_shift_scenario(8);
    let opts = TransferOptions::new(0, 1);
    let out = baseline_transfer(&scn, &opts).unwrap();
    let oracle = lmmse(&cov, &DVector::zeros(20), scn.mask_c(), true).unwrap();
    let diff = (&out.estimator.gain - &oracle.gain).norm();
    assert!(diff < 0.05, "gain Frobenius difference {diff}");
}

#[test]
fn drw_psd_stays_close_to_the_unweighted_psd_without_shift() {
    let (scn, _) = no_shift_scenario(9);
    let opts = TransferOptions::default();
    let drw = drw_transfer(&scn, &opts, &mut rng(10)).unwrap();
    let plain = current_basis_transfer(&scn, &opts, None).unwrap();
    for (w, u) in drw.psd.values.iter().zip(plain.psd.values.iter()) {
        if *u > 0.05 {
            assert!((w - u).abs() <= 0.25 * u, "weighted {w} vs unweighted {u}");
        }
    }
}

#[test]
fn node_change_psd_matches_explicit_selection_matrices() {
    // 6 nodes; node 3 leaves, node 6 joins
    #[rustfmt::skip]
    let w_h = DMatrix::from_row_slice(6, 6, &[
        0.0, 1.0, 0.0, 2.0, 0.0, 0.5,
        1.0, 0.0, 1.5, 0.0, 0.0, 0.0,
        0.0, 1.5, 0.0, 1.0, 0.7, 0.0,
        2.0, 0.0, 1.0, 0.0, 1.2, 0.0,
        0.0, 0.0, 0.7, 1.2, 0.0, 2.5,
        0.5, 0.0, 0.0, 0.0, 2.5, 0.0,
    ]);
    #[rustfmt::skip]
    let w_c = DMatrix::from_row_slice(6, 6, &[
        0.0, 1.0, 0.0, 0.0, 0.5, 0.9,
        1.0, 0.0, 1.5, 0.0, 0.0, 0.0,
        0.0, 1.5, 0.0, 0.7, 0.0, 1.1,
        0.0, 0.0, 0.7, 0.0, 2.5, 0.0,
        0.5, 0.0, 0.0, 2.5, 0.0, 0.0,
        0.9, 0.0, 1.1, 0.0, 0.0, 0.0,
    ]);
    let hist = Graph::new(w_h, (0..6).collect(), None).unwrap();
    let curr = Graph::new(w_c, vec![0, 1, 2, 4, 5, 6], None).unwrap();
    let mapping = NodeMapping::between(&hist, &curr);
    assert_eq!(
        (mapping.removed.clone(), mapping.added.clone()),
        (vec![3], vec![6])
    );
    let basis_c = spectral_decompose(&curr).unwrap();
    let mut rng = rng(11);
    let x = normal_matrix(6, 40, &mut rng);
    let w: Vec<f64> = (0..40).map(|_| 2.0 * rng.random::<f64>()).collect();
    let ours = weighted_psd_nodechange(&x, Some(&w), &basis_c, &mapping).unwrap();
    let dense = dense_nodechange_psd(&x, &w, &basis_c, &hist, &curr);
    assert!((&ours.values - &dense).amax() < 1e-10);
}

#[test]
fn unchanged_graph_gives_matching_method_errors() {
    let cfg = ExperimentConfig {
        sizes: vec![0],
        psd_current: PsdKind::LowPass,
        ..ExperimentConfig::default()
    };
    for graph in [GraphKind::Er, GraphKind::Rs] {
        let r = run_trial(&cfg, Cell { graph, size: 0 }, 12).unwrap();
        assert_eq!(r.diagnostics.edges_historical, r.diagnostics.edges_current);
        let rel = (r.mse_drw - r.mse_armae).abs() / r.mse_armae;
        assert!(
            rel < 0.1,
            "{graph}: ARMAE {} vs DRW {}",
            r.mse_armae,
            r.mse_drw
        );
    }
}

#[test]
fn edge_perturbation_is_a_pure_edge_swap_on_the_protocol_graph() {
    let mut rng = rng(13);
    let g = gfxfer_core::graph::gen_er(100, 0.15, 1.0, 3.0, &mut rng).unwrap();
    let policy = gfxfer_core::graph::WeightPolicy::Uniform {
        low: 1.0,
        high: 3.0,
    };
    let c = perturb_edges(&g, 10, policy, &mut rng).unwrap();
    let (a, b) = (g.edge_id_set(), c.edge_id_set());
    assert_eq!(a.difference(&b).count(), 10);
    assert_eq!(b.difference(&a).count(), 10);
}
