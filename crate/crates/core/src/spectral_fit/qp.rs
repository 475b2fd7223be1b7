//! Primal active-set solver for
//!
//! ```text
//! minimize ‖A z − c‖²   subject to   G z + g ≥ 0
//! ```
//!
//! started from a feasible point. Every iterate stays feasible and the
//! objective never increases.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::linalg::{pinv, PINV_RTOL};

const STEP_RTOL: f64 = 1e-12;
const RANK_RTOL: f64 = 1e-11;
const STALL_LIMIT: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub z: DVector<f64>,
    /// Multipliers of every constraint (zero off the working set).
    pub multipliers: DVector<f64>,
    pub iterations: usize,
    /// Objective at the start point and after every iteration.
    pub objective_history: Vec<f64>,
    pub kkt_residual: f64,
    pub converged: bool,
}

fn objective(a: &DMatrix<f64>, c: &DVector<f64>, z: &DVector<f64>) -> f64 {
    (a * z - c).norm_squared()
}

/// Minimum-norm least-squares solution of `m x ≈ r`.
fn lstsq(m: &DMatrix<f64>, r: &DVector<f64>) -> Result<DVector<f64>> {
    if m.ncols() == 0 {
        return Ok(DVector::zeros(0));
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Ok(DVector::zeros(m.ncols()));
    }
    svd.solve(r, RANK_RTOL * smax)
        .map_err(|_| Error::SingularSystem)
}

pub fn solve_constrained_lsq(
    a: &DMatrix<f64>,
    c: &DVector<f64>,
    g_mat: &DMatrix<f64>,
    g_vec: &DVector<f64>,
    z0: DVector<f64>,
    max_iter: usize,
    tol: f64,
) -> Result<QpSolution> {
    let n = a.ncols();
    check_len(a.nrows(), c.len())?;
    check_len(n, z0.len())?;
    check_len(n, g_mat.ncols())?;
    check_len(g_mat.nrows(), g_vec.len())?;
    let n_con = g_mat.nrows();

    // unit-norm constraint rows; all-zero rows are dropped from the active-set logic
    let row_norm: Vec<f64> = (0..n_con).map(|i| g_mat.row(i).norm()).collect();
    let live: Vec<bool> = row_norm.iter().map(|&r| r > 0.0).collect();
    let slack = |z: &DVector<f64>, i: usize| -> f64 { (g_mat.row(i) * z)[0] + g_vec[i] };
    for i in 0..n_con {
        if slack(&z0, i) < -tol.max(1e-12) {
            return Err(Error::InvalidParameter(format!(
                "start point violates constraint {i} by {}",
                -slack(&z0, i)
            )));
        }
    }

    let grad_scale = 1.0 + 2.0 * (a.transpose() * c).amax();
    let mu_tol = 1e-10 * grad_scale;
    let mut z = z0;
    let mut working: Vec<usize> = Vec::new();
    let mut history = vec![objective(a, c, &z)];
    let mut stall = 0usize;
    // constraints whose negative multiplier proved spurious: dropping them gave a
    // direction that ran straight back into them
    let mut locked: Vec<usize> = Vec::new();
    let mut last_dropped = None;
    let mut converged = false;
    let mut multipliers = DVector::zeros(n_con);
    let mut iterations = 0usize;

    while iterations < max_iter {
        iterations += 1;
        let w_mat = DMatrix::from_fn(working.len(), n, |r, j| {
            g_mat[(working[r], j)] / row_norm[working[r]]
        });
        let projector = if working.is_empty() {
            DMatrix::identity(n, n)
        } else {
            DMatrix::identity(n, n) - pinv(&w_mat, PINV_RTOL)? * &w_mat
        };
        let residual = c - a * &z;
        let step = projector.clone() * lstsq(&(a * &projector), &residual)?;

        let prev = *history.last().expect("history is never empty");
        if step.norm() <= STEP_RTOL * (1.0 + z.norm()) {
            let grad = 2.0 * a.transpose() * (a * &z - c);
            let mu = if working.is_empty() {
                DVector::zeros(0)
            } else {
                pinv(&w_mat.transpose(), PINV_RTOL)? * &grad
            };
            let negative = mu
                .iter()
                .enumerate()
                .filter(|(k, &m)| m < -mu_tol && !locked.contains(&working[*k]));
            // at a degenerate vertex Bland's rule (lowest constraint index) prevents cycling
            let leaving = if stall > 0 {
                negative.min_by_key(|(k, _)| working[*k]).map(|(k, _)| k)
            } else {
                negative.min_by(|x, y| x.1.total_cmp(y.1)).map(|(k, _)| k)
            };
            match leaving {
                None => {
                    multipliers.fill(0.0);
                    for (k, &i) in working.iter().enumerate() {
                        multipliers[i] = mu[k] / row_norm[i];
                    }
                    history.push(prev);
                    converged = true;
                    break;
                }
                Some(k) => {
                    last_dropped = Some(working.remove(k));
                }
            }
            history.push(prev);
            stall += 1;
        } else {
            let mut t = 1.0;
            let mut blocking = None;
            for i in 0..n_con {
                if !live[i] || working.contains(&i) {
                    continue;
                }
                let d = (g_mat.row(i) * &step)[0];
                if d < -1e-14 * row_norm[i] * step.norm() {
                    let ti = slack(&z, i).max(0.0) / (-d);
                    if ti < t {
                        t = ti;
                        blocking = Some(i);
                    }
                }
            }
            z += &step * t;
            if let Some(i) = blocking {
                if t == 0.0 && last_dropped == Some(i) {
                    locked.push(i);
                }
                working.push(i);
            }
            last_dropped = None;
            let obj = objective(a, c, &z).min(prev);
            // rounding can lift the objective by a few ulps; history stays monotone
            if obj < prev {
                stall = 0;
                locked.clear();
            } else {
                stall += 1;
            }
            history.push(obj);
        }
        if stall >= STALL_LIMIT {
            return Err(Error::SolverDiverged { iterations });
        }
    }

    let kkt_residual = kkt_residual(a, c, g_mat, g_vec, &z, &multipliers, grad_scale);
    Ok(QpSolution {
        z,
        multipliers,
        iterations,
        objective_history: history,
        kkt_residual,
        converged,
    })
}

/// Scaled KKT residual: stationarity, primal and dual feasibility, complementarity.
pub(crate) fn kkt_residual(
    a: &DMatrix<f64>,
    c: &DVector<f64>,
    g_mat: &DMatrix<f64>,
    g_vec: &DVector<f64>,
    z: &DVector<f64>,
    mu: &DVector<f64>,
    scale: f64,
) -> f64 {
    let grad = 2.0 * a.transpose() * (a * z - c);
    let stationarity = (grad - g_mat.transpose() * mu).amax() / scale;
    let s = g_mat * z + g_vec;
    let primal = s.iter().fold(0.0f64, |m, &v| m.max(-v));
    let dual = mu.iter().fold(0.0f64, |m, &v| m.max(-v)) / scale;
    let comp = s
        .iter()
        .zip(mu.iter())
        .fold(0.0f64, |m, (&si, &mi)| m.max((si * mi).abs()))
        / scale;
    stationarity.max(primal).max(dual).max(comp)
}
