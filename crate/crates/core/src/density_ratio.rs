//! Least-squares density-ratio estimation with a Gaussian kernel model
//! `r(y) = max(φ(y)ᵀθ, 0)`.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Tuning of the ratio estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RatioConfig {
    /// Maximum number of kernel centers.
    pub b_max: usize,
    pub lambda_grid: Vec<f64>,
    pub folds: usize,
    /// Points used for the median-distance bandwidth.
    pub median_subsample: usize,
}

impl Default for RatioConfig {
    fn default() -> Self {
        Self {
            b_max: 100,
            lambda_grid: vec![1e-3, 1e-2, 1e-1, 1.0, 10.0],
            folds: 5,
            median_subsample: 500,
        }
    }
}

/// Gaussian kernels `φ_l(y) = exp(-‖y - c_l‖² / (2σ²))`; centers are columns.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBasis {
    centers: DMatrix<f64>,
    bandwidth: f64,
}

impl KernelBasis {
    pub fn new(centers: DMatrix<f64>, bandwidth: f64) -> Result<Self> {
        if centers.ncols() == 0 {
            return Err(Error::EmptySampleSet);
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidParameter(format!("bandwidth {bandwidth}")));
        }
        Ok(Self { centers, bandwidth })
    }

    pub fn dim(&self) -> usize {
        self.centers.nrows()
    }

    pub fn num_centers(&self) -> usize {
        self.centers.ncols()
    }

    pub fn centers(&self) -> &DMatrix<f64> {
        &self.centers
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Design matrix `K × b` for samples stored as columns.
    pub fn features(&self, samples: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_len(self.dim(), samples.nrows())?;
        let d2 = squared_distances(samples, &self.centers);
        let inv = 1.0 / (2.0 * self.bandwidth * self.bandwidth);
        Ok(d2.map(|v| (-v * inv).exp()))
    }
}

/// `D[i, j] = ‖a_i - b_j‖²` for columns `a_i`, `b_j`.
fn squared_distances(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let na: Vec<f64> = a.column_iter().map(|c| c.norm_squared()).collect();
    let nb: Vec<f64> = b.column_iter().map(|c| c.norm_squared()).collect();
    let mut g = a.transpose() * b;
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            g[(i, j)] = (na[i] + nb[j] - 2.0 * g[(i, j)]).max(0.0);
        }
    }
    g
}

fn median_pairwise_distance(points: &DMatrix<f64>) -> Option<f64> {
    let k = points.ncols();
    if k < 2 {
        return None;
    }
    let d2 = squared_distances(points, points);
    let mut dists: Vec<f64> = (0..k)
        .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
        .map(|(i, j)| d2[(i, j)].sqrt())
        .collect();
    let mid = dists.len() / 2;
    let (_, m, _) = dists.select_nth_unstable_by(mid, f64::total_cmp);
    let mut med = *m;
    if dists.len().is_multiple_of(2) {
        let lower = dists[..mid]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        med = 0.5 * (med + lower);
    }
    Some(med)
}

fn sample_columns<R: Rng + ?Sized>(m: &DMatrix<f64>, count: usize, rng: &mut R) -> DMatrix<f64> {
    if count >= m.ncols() {
        return m.clone();
    }
    let mut idx = index::sample(rng, m.ncols(), count).into_vec();
    idx.sort_unstable();
    m.select_columns(&idx)
}

/// Kernel centers drawn without replacement from the current samples;
/// bandwidth from the median heuristic over the pooled samples (or the
/// centers when `y_hist` is `None`), falling back to 1.0 when degenerate.
pub fn build_basis<R: Rng + ?Sized>(
    y_curr: &DMatrix<f64>,
    y_hist: Option<&DMatrix<f64>>,
    cfg: &RatioConfig,
    rng: &mut R,
) -> Result<KernelBasis> {
    if y_curr.ncols() == 0 || cfg.b_max == 0 {
        return Err(Error::EmptySampleSet);
    }
    let b = cfg.b_max.min(y_curr.ncols());
    let mut idx = index::sample(rng, y_curr.ncols(), b).into_vec();
    idx.sort_unstable();
    let centers = y_curr.select_columns(&idx);

    let pool = match y_hist {
        Some(h) => {
            check_len(y_curr.nrows(), h.nrows())?;
            let mut both = DMatrix::zeros(h.nrows(), h.ncols() + y_curr.ncols());
            both.columns_mut(0, h.ncols()).copy_from(h);
            both.columns_mut(h.ncols(), y_curr.ncols())
                .copy_from(y_curr);
            sample_columns(&both, cfg.median_subsample.max(2), rng)
        }
        None => sample_columns(&centers, cfg.median_subsample.max(2), rng),
    };
    let bandwidth = match median_pairwise_distance(&pool) {
        Some(m) if m > 0.0 && m.is_finite() => m,
        _ => 1.0,
    };
    KernelBasis::new(centers, bandwidth)
}

/// Fitted ratio model.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityRatioModel {
    pub basis: KernelBasis,
    pub theta: DVector<f64>,
    pub reg_lambda: f64,
    /// Mean held-out objective per grid value (empty when CV was skipped).
    pub cv_scores: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RatioRecord {
    bandwidth: f64,
    reg_lambda: f64,
    theta: Vec<f64>,
    centers: Vec<Vec<f64>>,
}

impl DensityRatioModel {
    pub fn eval(&self, y: &DVector<f64>) -> Result<f64> {
        let f = self
            .basis
            .features(&DMatrix::from_column_slice(y.len(), 1, y.as_slice()))?;
        Ok((f.row(0) * &self.theta)[0].max(0.0))
    }

    /// Ratios for samples stored as columns.
    pub fn eval_batch(&self, ys: &DMatrix<f64>) -> Result<Vec<f64>> {
        let f = self.basis.features(ys)?;
        Ok((f * &self.theta).iter().map(|v| v.max(0.0)).collect())
    }

    pub fn to_record(&self) -> String {
        let rec = RatioRecord {
            bandwidth: self.basis.bandwidth,
            reg_lambda: self.reg_lambda,
            theta: self.theta.iter().copied().collect(),
            centers: self
                .basis
                .centers
                .column_iter()
                .map(|c| c.iter().copied().collect())
                .collect(),
        };
        toml::to_string(&rec).expect("plain record serializes")
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let rec: RatioRecord = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let d = rec.centers.first().map_or(0, Vec::len);
        if rec.centers.iter().any(|c| c.len() != d) {
            return Err(Error::Parse("ragged centers".into()));
        }
        let flat: Vec<f64> = rec.centers.concat();
        let centers = DMatrix::from_vec(d, rec.centers.len(), flat);
        check_len(centers.ncols(), rec.theta.len())?;
        Ok(Self {
            basis: KernelBasis::new(centers, rec.bandwidth)?,
            theta: DVector::from_vec(rec.theta),
            reg_lambda: rec.reg_lambda,
            cv_scores: Vec::new(),
        })
    }
}

pub fn eval_ratio(model: &DensityRatioModel, y: &DVector<f64>) -> Result<f64> {
    model.eval(y)
}

fn solve_theta(h_mat: &DMatrix<f64>, h_vec: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    let mut m = h_mat.clone();
    for i in 0..m.nrows() {
        m[(i, i)] += lambda;
    }
    Cholesky::new(m)
        .map(|ch| ch.solve(h_vec))
        .ok_or(Error::SingularSystem)
}

fn fold_sums(
    phi: &DMatrix<f64>,
    folds: usize,
) -> (Vec<DMatrix<f64>>, Vec<DVector<f64>>, Vec<usize>) {
    let b = phi.ncols();
    let mut outer = Vec::with_capacity(folds);
    let mut sums = Vec::with_capacity(folds);
    let mut counts = Vec::with_capacity(folds);
    for f in 0..folds {
        let rows: Vec<usize> = (f..phi.nrows()).step_by(folds).collect();
        let sub = phi.select_rows(&rows);
        outer.push(sub.transpose() * &sub);
        sums.push(DVector::from_iterator(
            b,
            sub.column_iter().map(|c| c.sum()),
        ));
        counts.push(rows.len());
    }
    (outer, sums, counts)
}

/// Fits `θ = (H + λI)⁻¹ h`, choosing λ from `lambda_grid` by k-fold
/// cross-validation of `½ θᵀHθ − hᵀθ` (folds assigned by index modulo k).
pub fn fit_ratio(
    y_hist: &DMatrix<f64>,
    y_curr: &DMatrix<f64>,
    basis: KernelBasis,
    lambda_grid: &[f64],
    folds: usize,
) -> Result<DensityRatioModel> {
    if y_hist.ncols() == 0 || y_curr.ncols() == 0 {
        return Err(Error::EmptySampleSet);
    }
    if lambda_grid.is_empty() {
        return Err(Error::InvalidParameter("empty lambda grid".into()));
    }
    if let Some(&bad) = lambda_grid.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(Error::NonPositiveLambda(bad));
    }
    let phi_h = basis.features(y_hist)?;
    let phi_c = basis.features(y_curr)?;
    let (k_h, k_c) = (phi_h.nrows(), phi_c.nrows());
    let b = basis.num_centers();

    let folds = folds.min(k_h).min(k_c);
    let mut cv_scores = Vec::new();
    let reg_lambda = if lambda_grid.len() == 1 || folds < 2 {
        lambda_grid[0]
    } else {
        let (outer_h, _, cnt_h) = fold_sums(&phi_h, folds);
        let (_, sum_c, cnt_c) = fold_sums(&phi_c, folds);
        let total_outer = outer_h.iter().fold(DMatrix::zeros(b, b), |acc, m| acc + m);
        let total_sum = sum_c.iter().fold(DVector::zeros(b), |acc, v| acc + v);
        for &lambda in lambda_grid {
            let mut score = 0.0;
            for f in 0..folds {
                let h_tr = (&total_outer - &outer_h[f]) / (k_h - cnt_h[f]) as f64;
                let v_tr = (&total_sum - &sum_c[f]) / (k_c - cnt_c[f]) as f64;
                let theta = solve_theta(&h_tr, &v_tr, lambda)?;
                let h_val = &outer_h[f] / cnt_h[f] as f64;
                let v_val = &sum_c[f] / cnt_c[f] as f64;
                score += 0.5 * theta.dot(&(h_val * &theta)) - v_val.dot(&theta);
            }
            cv_scores.push(score / folds as f64);
        }
        let best = cv_scores
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        lambda_grid[best]
    };

    let h_mat = (phi_h.transpose() * &phi_h) / k_h as f64;
    let h_vec = DVector::from_iterator(b, phi_c.column_iter().map(|c| c.sum())) / k_c as f64;
    let theta = solve_theta(&h_mat, &h_vec, reg_lambda)?;
    Ok(DensityRatioModel {
        basis,
        theta,
        reg_lambda,
        cv_scores,
    })
}

/// Exact ratio `N(y; μ_c, Σ_c) / N(y; μ_h, Σ_h)` through log-densities.
pub fn gaussian_ratio_oracle(
    cov_h: &DMatrix<f64>,
    cov_c: &DMatrix<f64>,
    mean_h: &DVector<f64>,
    mean_c: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64> {
    Ok((gaussian_log_density(cov_c, mean_c, y)? - gaussian_log_density(cov_h, mean_h, y)?).exp())
}

pub fn gaussian_log_density(
    cov: &DMatrix<f64>,
    mean: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64> {
    let d = y.len();
    check_len(d, mean.len())?;
    check_len(d, cov.nrows())?;
    check_len(d, cov.ncols())?;
    let ch = Cholesky::new(cov.clone()).ok_or(Error::SingularCovariance)?;
    let l = ch.l();
    let log_det = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let diff = y - mean;
    let z = l
        .solve_lower_triangular(&diff)
        .ok_or(Error::SingularCovariance)?;
    Ok(-0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + z.norm_squared()))
}
