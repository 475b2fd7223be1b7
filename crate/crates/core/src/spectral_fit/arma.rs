use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::qp::solve_constrained_lsq;
use crate::error::{check_len, Error, Result};
use crate::spectral::SpectralBasis;

/// Denominators smaller than this are treated as poles.
pub const POLE_TOL: f64 = 1e-12;

/// ARMA graph frequency response
/// `f(λ) = Σ_l β_l λ^l / (1 + Σ_m α_m λ^m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaParams {
    /// Numerator coefficients `β_0..β_L`.
    pub beta: Vec<f64>,
    /// Denominator coefficients `α_1..α_M`.
    pub alpha: Vec<f64>,
}

impl ArmaParams {
    pub fn new(beta: Vec<f64>, alpha: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::InvalidParameter(
                "numerator needs at least β_0".into(),
            ));
        }
        Ok(Self { beta, alpha })
    }

    /// `(L, M)`.
    pub fn orders(&self) -> (usize, usize) {
        (self.beta.len() - 1, self.alpha.len())
    }

    pub fn numerator(&self, lambda: f64) -> f64 {
        self.beta.iter().rev().fold(0.0, |acc, &b| acc * lambda + b)
    }

    pub fn denominator(&self, lambda: f64) -> f64 {
        1.0 + lambda
            * self
                .alpha
                .iter()
                .rev()
                .fold(0.0, |acc, &a| acc * lambda + a)
    }

    /// Objective of the linearized fit at these parameters.
    pub fn fit_objective(
        &self,
        target: &DVector<f64>,
        grid: &DVector<f64>,
        reg: &Regularization,
    ) -> Result<f64> {
        check_len(grid.len(), target.len())?;
        let (l, m) = self.orders();
        reg.check(l, m)?;
        let misfit: f64 = grid
            .iter()
            .zip(target.iter())
            .map(|(&lam, &t)| (t * self.denominator(lam) - self.numerator(lam)).powi(2))
            .sum();
        let a = DVector::from_column_slice(&self.alpha);
        let b = DVector::from_column_slice(&self.beta);
        Ok(misfit + a.dot(&(&reg.alpha * &a)) + b.dot(&(&reg.beta * &b)))
    }
}

/// Entrywise evaluation of the ARMA response on `grid`.
pub fn arma_eval(grid: &DVector<f64>, params: &ArmaParams) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(grid.len());
    for (o, &lam) in out.iter_mut().zip(grid.iter()) {
        let den = params.denominator(lam);
        if den.abs() < POLE_TOL || !den.is_finite() {
            return Err(Error::PoleOnGrid { lambda: lam });
        }
        *o = params.numerator(lam) / den;
    }
    Ok(out)
}

/// `Φ₁` (columns λ..λᴹ) and `Φ₂` (columns 1..λᴸ) on `grid`.
pub fn vandermonde(grid: &DVector<f64>, l: usize, m: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let phi1 = DMatrix::from_fn(grid.len(), m, |i, j| grid[i].powi(j as i32 + 1));
    let phi2 = DMatrix::from_fn(grid.len(), l + 1, |i, j| grid[i].powi(j as i32));
    (phi1, phi2)
}

/// Quadratic penalties `αᵀ R_α α + βᵀ R_β β`.
#[derive(Debug, Clone, PartialEq)]
pub struct Regularization {
    pub alpha: DMatrix<f64>,
    pub beta: DMatrix<f64>,
}

impl Regularization {
    pub fn ridge(l: usize, m: usize, rho_alpha: f64, rho_beta: f64) -> Self {
        Self {
            alpha: DMatrix::identity(m, m) * rho_alpha,
            beta: DMatrix::identity(l + 1, l + 1) * rho_beta,
        }
    }

    pub fn none(l: usize, m: usize) -> Self {
        Self::ridge(l, m, 0.0, 0.0)
    }

    fn check(&self, l: usize, m: usize) -> Result<()> {
        let square = |x: &DMatrix<f64>, k: usize| x.nrows() == k && x.ncols() == k;
        if !square(&self.alpha, m) || !square(&self.beta, l + 1) {
            return Err(Error::DimensionMismatch {
                expected: m + l + 1,
                got: self.alpha.nrows() + self.beta.nrows(),
            });
        }
        for r in [&self.alpha, &self.beta] {
            if (r - r.transpose()).amax() > 1e-12 {
                return Err(Error::InvalidParameter(
                    "regularization not symmetric".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub objective: f64,
    pub kkt_residual: f64,
    pub converged: bool,
    /// Eigenvalue scale used to condition the Vandermonde columns.
    pub grid_scale: f64,
    #[serde(skip)]
    pub objective_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaFit {
    pub params: ArmaParams,
    pub diagnostics: FitDiagnostics,
}

#[derive(Serialize, Deserialize)]
struct FitRecord {
    numerator_order: usize,
    denominator_order: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    diagnostics: FitDiagnostics,
}

impl ArmaFit {
    /// TOML record with orders, coefficients and solver diagnostics.
    pub fn to_record(&self) -> String {
        let (l, m) = self.params.orders();
        let rec = FitRecord {
            numerator_order: l,
            denominator_order: m,
            alpha: self.params.alpha.clone(),
            beta: self.params.beta.clone(),
            diagnostics: self.diagnostics.clone(),
        };
        toml::to_string(&rec).expect("plain record serializes")
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let rec: FitRecord = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let params = ArmaParams::new(rec.beta, rec.alpha)?;
        if params.orders() != (rec.numerator_order, rec.denominator_order) {
            return Err(Error::Parse(
                "orders do not match coefficient counts".into(),
            ));
        }
        Ok(Self {
            params,
            diagnostics: rec.diagnostics,
        })
    }
}

fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.is_empty() {
        return m.clone();
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut v = eig.eigenvectors.clone();
    for (mut col, &e) in v.column_iter_mut().zip(eig.eigenvalues.iter()) {
        col *= e.max(0.0).sqrt();
    }
    &v * eig.eigenvectors.transpose()
}

/// Fits ARMA coefficients to `target` (typically `√p̂`) on `grid` by solving
///
/// ```text
/// min ‖P(1 + Φ₁α) − Φ₂β‖² + αᵀR_αα + βᵀR_ββ   s.t.  1 + Φ₁α ≥ 0,  Φ₂β ≥ 0
/// ```
///
/// with `P = diag(target)`. The grid is rescaled to `[0, 1]` internally.
pub fn fit_arma(
    target: &DVector<f64>,
    grid: &DVector<f64>,
    l: usize,
    m: usize,
    reg: &Regularization,
    opts: &SolverOptions,
) -> Result<ArmaFit> {
    fit_arma_with_support(target, grid, &DVector::zeros(0), 0.0, l, m, reg, opts)
}

/// Like [`fit_arma`], with the denominator bounded below by `margin` instead
/// of zero, and with both constraint sets also imposed on the `support`
/// eigenvalues, where the parameters will later be evaluated without being
/// fitted. A positive margin keeps the response away from `0/0` points.
#[allow(clippy::too_many_arguments)]
pub fn fit_arma_with_support(
    target: &DVector<f64>,
    grid: &DVector<f64>,
    support: &DVector<f64>,
    margin: f64,
    l: usize,
    m: usize,
    reg: &Regularization,
    opts: &SolverOptions,
) -> Result<ArmaFit> {
    if !(margin.is_finite() && (0.0..1.0).contains(&margin)) {
        return Err(Error::InvalidParameter(format!(
            "denominator margin {margin} outside [0, 1)"
        )));
    }
    let n_pts = grid.len();
    check_len(n_pts, target.len())?;
    if n_pts == 0 {
        return Err(Error::EmptySampleSet);
    }
    reg.check(l, m)?;
    if let Some(&bad) = target.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidParameter(format!("fit target entry {bad}")));
    }
    let scale = grid
        .iter()
        .chain(support.iter())
        .fold(0.0f64, |s, v| s.max(v.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let scaled_grid = grid / scale;
    let (phi1, phi2) = vandermonde(&scaled_grid, l, m);
    let n = m + l + 1;

    // coefficient scaling: raw = scaled * s^-power
    let unscale: Vec<f64> = (1..=m)
        .chain(0..=l)
        .map(|p| scale.powi(-(p as i32)))
        .collect();
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(&unscale));
    let mut r_full = DMatrix::zeros(n, n);
    r_full.view_mut((0, 0), (m, m)).copy_from(&reg.alpha);
    r_full.view_mut((m, m), (l + 1, l + 1)).copy_from(&reg.beta);
    let r_scaled = &d * r_full * &d;
    let has_reg = r_scaled.amax() > 0.0;

    let rows = n_pts + if has_reg { n } else { 0 };
    let mut a = DMatrix::zeros(rows, n);
    let mut c = DVector::zeros(rows);
    for i in 0..n_pts {
        for j in 0..m {
            a[(i, j)] = target[i] * phi1[(i, j)];
        }
        for j in 0..=l {
            a[(i, m + j)] = -phi2[(i, j)];
        }
        c[i] = -target[i];
    }
    if has_reg {
        a.view_mut((n_pts, 0), (n, n))
            .copy_from(&psd_sqrt(&r_scaled));
    }

    let n_sup = support.len();
    let (sup1, sup2) = vandermonde(&(support / scale), l, m);
    let mut g_mat = DMatrix::zeros(2 * (n_pts + n_sup), n);
    let mut g_vec = DVector::zeros(2 * (n_pts + n_sup));
    g_mat.view_mut((0, 0), (n_pts, m)).copy_from(&phi1);
    g_mat.view_mut((n_pts, m), (n_pts, l + 1)).copy_from(&phi2);
    g_vec.rows_mut(0, n_pts).fill(1.0 - margin);
    let off = 2 * n_pts;
    g_mat.view_mut((off, 0), (n_sup, m)).copy_from(&sup1);
    g_mat
        .view_mut((off + n_sup, m), (n_sup, l + 1))
        .copy_from(&sup2);
    g_vec.rows_mut(off, n_sup).fill(1.0 - margin);

    let mut z0 = DVector::zeros(n);
    z0[m] = (target.sum() / n_pts as f64).max(1e-3);

    let sol = solve_constrained_lsq(&a, &c, &g_mat, &g_vec, z0, opts.max_iter, opts.tol)?;
    let raw: Vec<f64> = sol.z.iter().zip(&unscale).map(|(v, s)| v * s).collect();
    let params = ArmaParams::new(raw[m..].to_vec(), raw[..m].to_vec())?;
    let objective = params.fit_objective(target, grid, reg)?;
    Ok(ArmaFit {
        params,
        diagnostics: FitDiagnostics {
            iterations: sol.iterations,
            objective,
            kkt_residual: sol.kkt_residual,
            converged: sol.converged && sol.kkt_residual < opts.tol,
            grid_scale: scale,
            objective_history: sol.objective_history,
        },
    })
}

/// Which power of the filter response forms the PSD of the covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceConvention {
    /// `U diag(f²) Uᵀ`; the fit targets `√p̂`, so `f²` is the PSD.
    #[default]
    Squared,
    /// `U diag(f) Uᵀ` with negative responses clipped to zero.
    Linear,
}

/// Covariance `U diag(f²) Uᵀ` (or `diag(f)`) with `f` the ARMA response on
/// the basis eigenvalues.
pub fn covariance_from_arma(
    basis: &SpectralBasis,
    params: &ArmaParams,
    convention: CovarianceConvention,
) -> Result<DMatrix<f64>> {
    let f = arma_eval(basis.eigenvalues(), params)?;
    let psd = match convention {
        CovarianceConvention::Squared => f.map(|v| v * v),
        CovarianceConvention::Linear => f.map(|v| v.max(0.0)),
    };
    basis.synthesize(&psd)
}
