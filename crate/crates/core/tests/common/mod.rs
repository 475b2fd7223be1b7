//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use gfxfer_core::graph::{gen_er, NodeMapping};
use gfxfer_core::recovery::ObservationModel;
use gfxfer_core::{DMatrix, DVector, Graph, SpectralBasis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Connected ER graph with U(1, 3) weights (redrawn until connected).
pub fn connected_er<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    loop {
        let g = gen_er(n, p, 1.0, 3.0, rng).unwrap();
        if is_connected(&g) {
            return g;
        }
    }
}

pub fn is_connected(g: &Graph) -> bool {
    let n = g.num_nodes();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && g.weights()[(i, j)] > 0.0 {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Random symmetric positive definite matrix with eigenvalues in [lo, hi].
pub fn random_spd<R: Rng>(d: usize, lo: f64, hi: f64, rng: &mut R) -> DMatrix<f64> {
    let q = normal_matrix(d, d, rng).qr().q();
    let eig = DVector::from_fn(d, |_, _| lo + (hi - lo) * rng.random::<f64>());
    &q * DMatrix::from_diagonal(&eig) * q.transpose()
}

/// Columns drawn from `N(0, cov)` through an explicit Cholesky factor.
pub fn gaussian_columns<R: Rng>(cov: &DMatrix<f64>, count: usize, rng: &mut R) -> DMatrix<f64> {
    let l = cov.clone().cholesky().expect("SPD covariance").l();
    l * normal_matrix(cov.nrows(), count, rng)
}

/// Linear regression of `x` on `y` from `pairs` simulated draws of
/// `x ~ N(0, cov)`, `y = M x + σ n`: returns `Ĉ_xy Ĉ_yy⁻¹`.
pub fn regression_gain<R: Rng>(
    cov: &DMatrix<f64>,
    mask: &ObservationModel,
    pairs: usize,
    rng: &mut R,
) -> DMatrix<f64> {
    let (n, obs) = (cov.nrows(), mask.observed());
    let eig = cov.clone().symmetric_eigen();
    let root =
        &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    let mut cxy = DMatrix::zeros(n, obs.len());
    let mut cyy = DMatrix::zeros(obs.len(), obs.len());
    let chunk = 10_000;
    let mut done = 0;
    while done < pairs {
        let k = chunk.min(pairs - done);
        let x = &root * normal_matrix(n, k, rng);
        let noise = normal_matrix(obs.len(), k, rng) * mask.noise_std();
        let y = DMatrix::from_fn(obs.len(), k, |r, c| x[(obs[r], c)]) + noise;
        cxy += &x * y.transpose();
        cyy += &y * y.transpose();
        done += k;
    }
    cxy * cyy.try_inverse().expect("invertible sample covariance")
}

/// Node-change PSD built from explicit selection matrices:
/// `(1/K) Σ_k w_k (U_cᵀ S_cᵀ S_h x_k)²`, where `S_h` and `S_c` pick the
/// surviving node IDs out of the historical and current node orders.
pub fn dense_nodechange_psd(
    x_hist: &DMatrix<f64>,
    weights: &[f64],
    basis_c: &SpectralBasis,
    hist: &Graph,
    curr: &Graph,
) -> DVector<f64> {
    let survivors: Vec<u64> = hist
        .node_ids()
        .iter()
        .copied()
        .filter(|id| curr.index_of(*id).is_some())
        .collect();
    let mut s_h = DMatrix::zeros(survivors.len(), hist.num_nodes());
    let mut s_c = DMatrix::zeros(survivors.len(), curr.num_nodes());
    for (k, id) in survivors.iter().enumerate() {
        s_h[(k, hist.index_of(*id).unwrap())] = 1.0;
        s_c[(k, curr.index_of(*id).unwrap())] = 1.0;
    }
    let op = basis_c.eigenvectors().transpose() * s_c.transpose() * s_h;
    let mut out = DVector::zeros(curr.num_nodes());
    for (k, x) in x_hist.column_iter().enumerate() {
        let z = &op * x;
        out += z.map(|v| weights[k] * v * v);
    }
    out / x_hist.ncols() as f64
}

pub fn mapping_is_consistent(m: &NodeMapping, hist: &Graph, curr: &Graph) -> bool {
    m.validate(hist, curr).is_ok()
}

/// Objective of `min ½ zᵀQz + qᵀz  s.t.  G z + g ≥ 0` reached by
/// accelerated projected gradient on the dual (multipliers μ ≥ 0), with
/// the primal recovered as `z = Q⁻¹(Gᵀμ − q)`.
pub fn dual_projected_gradient(
    q_mat: &DMatrix<f64>,
    q_vec: &DVector<f64>,
    g_mat: &DMatrix<f64>,
    g_vec: &DVector<f64>,
    iterations: usize,
) -> DVector<f64> {
    let q_inv = q_mat.clone().try_inverse().expect("positive definite Q");
    // dual: minimize ½ μᵀ(G Q⁻¹ Gᵀ)μ − μᵀ(G Q⁻¹ q − g)  over μ ≥ 0
    let hess = g_mat * &q_inv * g_mat.transpose();
    let lin = g_mat * &q_inv * q_vec - g_vec;
    let step = 1.0 / hess.clone().symmetric_eigen().eigenvalues.max();
    let mut mu = DVector::zeros(g_mat.nrows());
    let mut prev = mu.clone();
    let mut t: f64 = 1.0;
    for _ in 0..iterations {
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let v = &mu + (&mu - &prev) * ((t - 1.0) / t_next);
        let grad = &hess * &v - &lin;
        prev = mu;
        mu = (v - grad * step).map(|x| x.max(0.0));
        // restart when momentum points uphill
        if (&mu - &prev).dot(&(&hess * &mu - &lin)) > 0.0 {
            t = 1.0;
        } else {
            t = t_next;
        }
    }
    &q_inv * (g_mat.transpose() * mu - q_vec)
}
