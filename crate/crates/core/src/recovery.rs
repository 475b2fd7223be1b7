//! Observation model (node selection plus white noise) and LMMSE recovery.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, check_probability, Error, Result};
use crate::gwss::standard_normal_matrix;
use crate::linalg::{pinv, select_rows, PINV_RTOL};

/// Selection of observed nodes `S` (ascending indices) and noise level σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationModel {
    num_nodes: usize,
    observed: Vec<usize>,
    noise_std: f64,
}

impl ObservationModel {
    pub fn new(num_nodes: usize, mut observed: Vec<usize>, noise_std: f64) -> Result<Self> {
        observed.sort_unstable();
        if observed.is_empty() {
            return Err(Error::InvalidParameter("no observed nodes".into()));
        }
        if observed.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("duplicate observed node".into()));
        }
        if let Some(&last) = observed.last() {
            if last >= num_nodes {
                return Err(Error::IndexOutOfRange {
                    index: last,
                    len: num_nodes,
                });
            }
        }
        if !(noise_std >= 0.0 && noise_std.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise std {noise_std}")));
        }
        Ok(Self {
            num_nodes,
            observed,
            noise_std,
        })
    }

    pub fn with_noise_std(mut self, noise_std: f64) -> Result<Self> {
        if !(noise_std >= 0.0 && noise_std.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise std {noise_std}")));
        }
        self.noise_std = noise_std;
        Ok(self)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    pub fn missing(&self) -> Vec<usize> {
        let mut it = self.observed.iter().peekable();
        (0..self.num_nodes)
            .filter(|i| {
                if it.peek() == Some(&i) {
                    it.next();
                    false
                } else {
                    true
                }
            })
            .collect()
    }

    pub fn num_observed(&self) -> usize {
        self.observed.len()
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    /// Dense `d × N` selection matrix.
    pub fn selection_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.observed.len(), self.num_nodes);
        for (r, &c) in self.observed.iter().enumerate() {
            m[(r, c)] = 1.0;
        }
        m
    }

    /// `M x` without noise.
    pub fn select(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.num_nodes, x.len())?;
        Ok(DVector::from_iterator(
            self.observed.len(),
            self.observed.iter().map(|&i| x[i]),
        ))
    }
}

/// Each node missing independently with `missing_prob`; redrawn while no
/// node is observed. Noise std starts at 0.
pub fn make_mask<R: Rng + ?Sized>(
    n: usize,
    missing_prob: f64,
    rng: &mut R,
) -> Result<ObservationModel> {
    check_probability(missing_prob)?;
    if missing_prob >= 1.0 {
        return Err(Error::InvalidProbability(missing_prob));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("mask over zero nodes".into()));
    }
    loop {
        let observed: Vec<usize> = (0..n)
            .filter(|_| rng.random::<f64>() >= missing_prob)
            .collect();
        if !observed.is_empty() {
            return ObservationModel::new(n, observed, 0.0);
        }
    }
}

/// `y = M x + ε`, ε ~ N(0, σ² I).
pub fn observe<R: Rng + ?Sized>(
    m: &ObservationModel,
    x: &DVector<f64>,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let mut y = m.select(x)?;
    if m.noise_std > 0.0 {
        let noise = standard_normal_matrix(y.len(), 1, rng);
        y += noise.column(0) * m.noise_std;
    }
    Ok(y)
}

/// Column-wise [`observe`] over a batch of signals.
pub fn observe_batch<R: Rng + ?Sized>(
    m: &ObservationModel,
    signals: &DMatrix<f64>,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    check_len(m.num_nodes, signals.nrows())?;
    let mut y = select_rows(signals, &m.observed);
    if m.noise_std > 0.0 {
        y += standard_normal_matrix(y.nrows(), y.ncols(), rng) * m.noise_std;
    }
    Ok(y)
}

/// Affine estimator `x̂ = Q y + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEstimator {
    pub gain: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl LinearEstimator {
    pub fn new(gain: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        check_len(gain.nrows(), offset.len())?;
        if gain.iter().chain(offset.iter()).any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem);
        }
        Ok(Self { gain, offset })
    }

    pub fn recover(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.gain.ncols(), y.len())?;
        Ok(&self.gain * y + &self.offset)
    }

    /// Column-wise recovery of a batch of observations.
    pub fn recover_batch(&self, ys: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_len(self.gain.ncols(), ys.nrows())?;
        let mut out = &self.gain * ys;
        for mut col in out.column_iter_mut() {
            col += &self.offset;
        }
        Ok(out)
    }
}

pub fn recover(est: &LinearEstimator, y: &DVector<f64>) -> Result<DVector<f64>> {
    est.recover(y)
}

/// LMMSE gain `Q = Σ Mᵀ (M Σ Mᵀ [+ σ² I])⁺`, offset `b = μ - Q M μ`.
///
/// The inner matrix is pseudo-inverted with relative cutoff 1e-10.
pub fn lmmse(
    cov: &DMatrix<f64>,
    mean: &DVector<f64>,
    m: &ObservationModel,
    include_noise: bool,
) -> Result<LinearEstimator> {
    let n = m.num_nodes;
    check_len(n, cov.nrows())?;
    check_len(n, cov.ncols())?;
    check_len(n, mean.len())?;
    let obs = &m.observed;
    // Σ Mᵀ: observed columns of Σ
    let cross = DMatrix::from_fn(n, obs.len(), |i, j| cov[(i, obs[j])]);
    let mut inner = select_rows(&cross, obs);
    if include_noise {
        let var = m.noise_std * m.noise_std;
        for i in 0..obs.len() {
            inner[(i, i)] += var;
        }
    }
    let inv = pinv(&inner, PINV_RTOL)?;
    let gain = cross * inv;
    let expected_y = m.select(mean)?;
    let offset = mean - &gain * expected_y;
    LinearEstimator::new(gain, offset)
}

/// Mean squared error `(1/N) ‖x̂ - x‖²`.
pub fn mse(estimate: &DVector<f64>, truth: &DVector<f64>) -> Result<f64> {
    check_len(truth.len(), estimate.len())?;
    if truth.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    Ok((estimate - truth).norm_squared() / truth.len() as f64)
}

/// MSE restricted to the given node indices.
pub fn mse_on(estimate: &DVector<f64>, truth: &DVector<f64>, nodes: &[usize]) -> Result<f64> {
    check_len(truth.len(), estimate.len())?;
    if nodes.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let s: f64 = nodes
        .iter()
        .map(|&i| (estimate[i] - truth[i]).powi(2))
        .sum();
    Ok(s / nodes.len() as f64)
}

/// Estimator-free completion: observed entries as measured, missing entries
/// from `fill`.
pub fn fill_missing(
    m: &ObservationModel,
    y: &DVector<f64>,
    fill: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_len(m.observed.len(), y.len())?;
    check_len(m.num_nodes, fill.len())?;
    let mut out = fill.clone();
    for (k, &i) in m.observed.iter().enumerate() {
        out[i] = y[k];
    }
    Ok(out)
}
