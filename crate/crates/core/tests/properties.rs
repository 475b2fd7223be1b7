//! Property tests for invariants that must hold on every input.

mod common;

use common::*;
use gfxfer_core::density_ratio::{build_basis, fit_ratio, RatioConfig};
use gfxfer_core::experiment::MethodStats;
use gfxfer_core::graph::{gen_er, gen_rs, perturb_edges, perturb_nodes, ThetaRule, WeightPolicy};
use gfxfer_core::recovery::{lmmse, make_mask};
use gfxfer_core::spectral_fit::{
    covariance_from_arma, fit_arma, nonparam_psd, CovarianceConvention, Regularization,
    SolverOptions,
};
use gfxfer_core::{gft, igft, spectral_decompose, DMatrix, DVector, Graph};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn check_graph(g: &Graph) {
    let w = g.weights();
    for i in 0..g.num_nodes() {
        assert_eq!(w[(i, i)], 0.0);
        for j in 0..g.num_nodes() {
            assert_eq!(w[(i, j)], w[(j, i)]);
            assert!(w[(i, j)] >= 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gft_is_orthonormal(seed in any::<u64>(), n in 2usize..30, p in 0.1f64..0.9) {
        let mut rng = rng(seed);
        let g = gen_er(n, p, 1.0, 3.0, &mut rng).unwrap();
        let basis = spectral_decompose(&g).unwrap();
        let x = normal_matrix(n, 1, &mut rng).column(0).into_owned();
        let xh = gft(&basis, &x).unwrap();
        prop_assert!((xh.norm() - x.norm()).abs() < 1e-9 * x.norm().max(1.0));
        prop_assert!((igft(&basis, &xh).unwrap() - &x).amax() < 1e-9);
        let l = g.laplacian();
        let recon = basis.synthesize(basis.eigenvalues()).unwrap();
        prop_assert!((recon - &l).amax() < 1e-8 * l.amax().max(1.0));
        prop_assert!(basis.eigenvalues().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn perturbations_keep_graph_invariants(seed in any::<u64>(), e in 0usize..6, v in 0usize..5) {
        let mut rng = rng(seed);
        let g = gen_rs(20, 4, ThetaRule::MeanEdgeDistance, &mut rng).unwrap();
        check_graph(&g);
        let policy = WeightPolicy::DistanceKernel { theta: 0.2 };
        if let Ok(c) = perturb_edges(&g, e, policy, &mut rng) {
            check_graph(&c);
            prop_assert_eq!(c.edge_count(), g.edge_count());
            prop_assert_eq!(c.node_ids(), g.node_ids());
        }
        let (c, m) = perturb_nodes(&g, v, 0.3, policy, &mut rng).unwrap();
        check_graph(&c);
        prop_assert_eq!(c.num_nodes(), g.num_nodes() + m.added.len() - m.removed.len());
        prop_assert_eq!(m.removed.len(), v);
        prop_assert!(m.validate(&g, &c).is_ok());
    }

    #[test]
    fn recovery_is_affine(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut rng = rng(seed);
        let g = gen_er(8, 0.5, 1.0, 3.0, &mut rng).unwrap();
        let basis = spectral_decompose(&g).unwrap();
        let p = DVector::from_fn(8, |i, _| 1.0 / (1.0 + i as f64));
        let cov = basis.synthesize(&p).unwrap();
        let mean = normal_matrix(8, 1, &mut rng).column(0).into_owned();
        let mask = make_mask(8, 0.3, &mut rng).unwrap().with_noise_std(0.3).unwrap();
        let est = lmmse(&cov, &mean, &mask, true).unwrap();
        let k = mask.num_observed();
        let y1 = normal_matrix(k, 1, &mut rng).column(0).into_owned();
        let y2 = normal_matrix(k, 1, &mut rng).column(0).into_owned();
        let lhs = est.recover(&(&y1 * a + &y2 * b)).unwrap();
        let rhs = (est.recover(&y1).unwrap() - &est.offset) * a
            + (est.recover(&y2).unwrap() - &est.offset) * b
            + &est.offset;
        prop_assert!((lhs - rhs).amax() < 1e-9);
    }

    #[test]
    fn weighted_psd_is_nonnegative_and_unit_weights_are_exact(seed in any::<u64>(), k in 1usize..40) {
        let mut rng = rng(seed);
        let g = gen_er(10, 0.4, 1.0, 3.0, &mut rng).unwrap();
        let basis = spectral_decompose(&g).unwrap();
        let x = normal_matrix(10, k, &mut rng);
        let w: Vec<f64> = (0..k).map(|i| (i % 3) as f64 * 0.7).collect();
        let weighted = nonparam_psd(&x, &basis, Some(&w)).unwrap();
        prop_assert!(weighted.values.iter().all(|v| *v >= 0.0));
        let ones = vec![1.0; k];
        let unit = nonparam_psd(&x, &basis, Some(&ones)).unwrap();
        let plain = nonparam_psd(&x, &basis, None).unwrap();
        prop_assert_eq!(unit.values, plain.values);
    }

    #[test]
    fn arma_fits_are_feasible_and_monotone(seed in any::<u64>(), l in 0usize..6, m in 0usize..3) {
        let mut rng = rng(seed);
        let grid = DVector::from_fn(25, |i, _| 0.4 * i as f64);
        let target = DVector::from_fn(25, |_, _| rng.random_range(0.0..2.0));
        let fit = fit_arma(&target, &grid, l, m, &Regularization::ridge(l, m, 1e-6, 1e-6), &SolverOptions::default()).unwrap();
        for &lam in grid.iter() {
            prop_assert!(fit.params.denominator(lam) >= -1e-9);
            prop_assert!(fit.params.numerator(lam) >= -1e-9);
        }
        let h = &fit.diagnostics.objective_history;
        prop_assert!(h.windows(2).all(|w| w[1] <= w[0]));
        if let Ok(cov) = covariance_from_arma(
            &gfxfer_core::SpectralBasis::from_parts(grid.clone(), DMatrix::identity(25, 25)).unwrap(),
            &fit.params,
            CovarianceConvention::Squared,
        ) {
            prop_assert!(cov.symmetric_eigenvalues().iter().all(|v| *v >= -1e-10));
        }
    }

    #[test]
    fn ratio_evaluations_are_nonnegative(seed in any::<u64>(), shift in 0.0f64..2.0) {
        let mut rng = rng(seed);
        let y_h = normal_matrix(2, 200, &mut rng);
        let y_c = normal_matrix(2, 150, &mut rng).add_scalar(shift);
        let cfg = RatioConfig { b_max: 30, ..RatioConfig::default() };
        let basis = build_basis(&y_c, Some(&y_h), &cfg, &mut rng).unwrap();
        let model = fit_ratio(&y_h, &y_c, basis, &cfg.lambda_grid, cfg.folds).unwrap();
        let probe = normal_matrix(2, 100, &mut rng) * 3.0;
        prop_assert!(model.eval_batch(&probe).unwrap().iter().all(|w| *w >= 0.0));
    }

    #[test]
    fn aggregate_statistics_ignore_trial_order(mut values in prop::collection::vec(0.0f64..1.0, 1..200), seed in any::<u64>()) {
        let before = MethodStats::of(&values);
        let mut rng = rng(seed);
        values.shuffle(&mut rng);
        prop_assert_eq!(before, MethodStats::of(&values));
    }
}
