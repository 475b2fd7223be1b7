//! Graph wide-sense stationary signal models.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, Error, Result};
use crate::spectral::{SpectralBasis, ZERO_EIGENVALUE_TOL};

/// Mean and power spectral density over a spectral basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GwssModel {
    basis: SpectralBasis,
    mean: DVector<f64>,
    psd: DVector<f64>,
}

impl GwssModel {
    pub fn new(basis: SpectralBasis, mean: DVector<f64>, psd: DVector<f64>) -> Result<Self> {
        check_len(basis.dim(), mean.len())?;
        check_len(basis.dim(), psd.len())?;
        if let Some(&bad) = psd.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter(format!("psd entry {bad}")));
        }
        Ok(Self { basis, mean, psd })
    }

    pub fn zero_mean(basis: SpectralBasis, psd: DVector<f64>) -> Result<Self> {
        let n = basis.dim();
        Self::new(basis, DVector::zeros(n), psd)
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn psd(&self) -> &DVector<f64> {
        &self.psd
    }

    /// `Σ = U diag(p) Uᵀ`.
    pub fn covariance(&self) -> DMatrix<f64> {
        self.basis
            .synthesize(&self.psd)
            .expect("dimensions checked at construction")
    }

    /// `count` independent draws, one per column: `μ + U diag(√p) z`.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<DMatrix<f64>> {
        if count == 0 {
            return Err(Error::InvalidParameter("sample count must be >= 1".into()));
        }
        let n = self.basis.dim();
        let mut factor = self.basis.eigenvectors().clone();
        for (mut col, &p) in factor.column_iter_mut().zip(self.psd.iter()) {
            col *= p.sqrt();
        }
        let z = standard_normal_matrix(n, count, rng);
        let mut x = factor * z;
        for mut col in x.column_iter_mut() {
            col += &self.mean;
        }
        Ok(x)
    }
}

/// Column-major fill so the draw order is independent of matrix layout tricks.
pub(crate) fn standard_normal_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> DMatrix<f64> {
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    DMatrix::from_vec(rows, cols, data)
}

/// Low-pass PSD `1 - λ_i / λ_max`.
pub fn psd_historical(basis: &SpectralBasis) -> Result<DVector<f64>> {
    let lmax = basis.max_eigenvalue();
    if lmax <= 0.0 {
        return Err(Error::ZeroSpectrum);
    }
    Ok(basis
        .eigenvalues()
        .map(|l| (1.0 - l / lmax).clamp(0.0, 1.0)))
}

/// Inverse-Laplacian PSD `1 / λ_i`, zero on eigenvalues `<= 1e-9` (the
/// Laplacian null space carries no power).
pub fn psd_current(basis: &SpectralBasis) -> DVector<f64> {
    basis.eigenvalues().map(|l| {
        if l > ZERO_EIGENVALUE_TOL {
            1.0 / l
        } else {
            0.0
        }
    })
}
