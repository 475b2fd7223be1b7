use criterion::{criterion_group, criterion_main, Criterion};
use gfxfer_core::density_ratio::{build_basis, fit_ratio, RatioConfig};
use gfxfer_core::experiment::{run_trial, Cell, ExperimentConfig, GraphKind};
use gfxfer_core::graph::{gen_er, gen_rs, ThetaRule};
use gfxfer_core::gwss::{psd_historical, GwssModel};
use gfxfer_core::spectral_fit::{fit_arma, nonparam_psd, Regularization, SolverOptions};
use gfxfer_core::{spectral_decompose, DMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spectral(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let er = gen_er(100, 0.15, 1.0, 3.0, &mut rng).unwrap();
    let rs = gen_rs(100, 8, ThetaRule::MeanEdgeDistance, &mut rng).unwrap();
    c.bench_function("spectral_decompose ER N=100", |b| {
        b.iter(|| spectral_decompose(&er).unwrap())
    });
    c.bench_function("spectral_decompose RS N=100", |b| {
        b.iter(|| spectral_decompose(&rs).unwrap())
    });
}

fn arma(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = gen_er(100, 0.15, 1.0, 3.0, &mut rng).unwrap();
    let basis = spectral_decompose(&g).unwrap();
    let model = GwssModel::zero_mean(basis.clone(), psd_historical(&basis).unwrap()).unwrap();
    let x = model.sample(2000, &mut rng).unwrap();
    let target = nonparam_psd(&x, &basis, None).unwrap().sqrt();
    let reg = Regularization::ridge(5, 2, 1e-6, 1e-6);
    let opts = SolverOptions::default();
    c.bench_function("fit_arma L=5 M=2 N=100", |b| {
        b.iter(|| fit_arma(&target, basis.eigenvalues(), 5, 2, &reg, &opts).unwrap())
    });
}

fn ratio(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let y_h = DMatrix::from_fn(70, 2000, |i, j| {
        ((i * 31 + j * 17) % 23) as f64 / 23.0 - 0.5
    });
    let y_c = DMatrix::from_fn(70, 1000, |i, j| {
        ((i * 13 + j * 29) % 19) as f64 / 38.0 - 0.25
    });
    let cfg = RatioConfig::default();
    c.bench_function("fit_ratio d=70 K=2000/1000 b=100", |b| {
        b.iter(|| {
            let basis = build_basis(&y_c, Some(&y_h), &cfg, &mut rng).unwrap();
            fit_ratio(&y_h, &y_c, basis, &cfg.lambda_grid, cfg.folds).unwrap()
        })
    });
}

fn trial(c: &mut Criterion) {
    let cfg = ExperimentConfig::default();
    let mut group = c.benchmark_group("run_trial");
    group.sample_size(20);
    for graph in [GraphKind::Er, GraphKind::Rs] {
        let cell = Cell { graph, size: 20 };
        group.bench_function(format!("{graph} e=20"), |b| {
            b.iter(|| run_trial(&cfg, cell, 7).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, spectral, arma, ratio, trial);
criterion_main!(benches);
