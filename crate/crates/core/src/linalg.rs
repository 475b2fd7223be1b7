use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative singular-value cutoff for pseudo-inverses.
pub const PINV_RTOL: f64 = 1e-10;

/// Moore–Penrose pseudo-inverse with cutoff `rtol * σ_max`.
pub fn pinv(m: &DMatrix<f64>, rtol: f64) -> Result<DMatrix<f64>> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    if m.is_empty() {
        return Ok(DMatrix::zeros(m.ncols(), m.nrows()));
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = rtol * smax;
    let u = svd.u.as_ref().ok_or(Error::SingularSystem)?;
    let vt = svd.v_t.as_ref().ok_or(Error::SingularSystem)?;
    let mut inv_s = svd.singular_values.clone();
    for s in inv_s.iter_mut() {
        *s = if *s > cutoff && *s > 0.0 {
            1.0 / *s
        } else {
            0.0
        };
    }
    let mut vs = vt.transpose();
    for (mut col, &s) in vs.column_iter_mut().zip(inv_s.iter()) {
        col *= s;
    }
    let out = vs * u.transpose();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(out)
}

/// Rows of `m` picked by `rows`, in that order.
pub fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

/// Compensated (Neumaier) sum.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
