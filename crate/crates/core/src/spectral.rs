//! Laplacian eigendecomposition and the graph Fourier transform.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_len, Error, Result};
use crate::graph::Graph;

/// Eigenvalues below this magnitude are snapped to zero.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-9;

/// Ascending graph frequencies with their orthonormal eigenvectors
/// (column `i` of `eigenvectors` pairs with `eigenvalues[i]`).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SpectralBasis {
    /// Builds a basis from precomputed parts. The caller is responsible for
    /// orthonormality; eigenvalues must be ascending.
    pub fn from_parts(eigenvalues: DVector<f64>, eigenvectors: DMatrix<f64>) -> Result<Self> {
        let n = eigenvalues.len();
        check_len(n, eigenvectors.nrows())?;
        check_len(n, eigenvectors.ncols())?;
        if eigenvalues
            .iter()
            .zip(eigenvalues.iter().skip(1))
            .any(|(a, b)| a > b)
        {
            return Err(Error::InvalidParameter("eigenvalues not ascending".into()));
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(0.0, f64::max)
    }

    /// `U diag(values) Uᵀ`.
    pub fn synthesize(&self, values: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_len(self.dim(), values.len())?;
        let mut scaled = self.eigenvectors.clone();
        for (mut col, &v) in scaled.column_iter_mut().zip(values.iter()) {
            col *= v;
        }
        let mut out = &scaled * self.eigenvectors.transpose();
        symmetrize(&mut out);
        Ok(out)
    }
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Eigendecomposition of the combinatorial Laplacian of `g`.
///
/// Ties keep the order produced by the eigen routine (stable sort); each
/// eigenvector is signed so its first entry of magnitude above 1e-9 is positive.
pub fn spectral_decompose(g: &Graph) -> Result<SpectralBasis> {
    decompose_symmetric(g.laplacian())
}

pub(crate) fn decompose_symmetric(m: DMatrix<f64>) -> Result<SpectralBasis> {
    let n = m.nrows();
    if n == 0 {
        return Ok(SpectralBasis {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::DecompositionFailure(
            "non-finite matrix entry".into(),
        ));
    }
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::DecompositionFailure("eigen iteration did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[src];
        values[dst] = if lambda.abs() < ZERO_EIGENVALUE_TOL {
            0.0
        } else {
            lambda
        };
        let col = eig.eigenvectors.column(src);
        let flip = col
            .iter()
            .find(|v| v.abs() > 1e-9)
            .is_some_and(|&v| v < 0.0);
        let sign = if flip { -1.0 } else { 1.0 };
        vectors.set_column(dst, &(col * sign));
    }
    Ok(SpectralBasis {
        eigenvalues: values,
        eigenvectors: vectors,
    })
}

/// Graph Fourier transform `Uᵀx`.
pub fn gft(basis: &SpectralBasis, x: &DVector<f64>) -> Result<DVector<f64>> {
    check_len(basis.dim(), x.len())?;
    Ok(basis.eigenvectors.transpose() * x)
}

/// Inverse transform `U x̂`.
pub fn igft(basis: &SpectralBasis, spectrum: &DVector<f64>) -> Result<DVector<f64>> {
    check_len(basis.dim(), spectrum.len())?;
    Ok(&basis.eigenvectors * spectrum)
}

/// Column-wise transform of a batch of signals stored as columns.
pub fn gft_batch(basis: &SpectralBasis, signals: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_len(basis.dim(), signals.nrows())?;
    Ok(basis.eigenvectors.transpose() * signals)
}
