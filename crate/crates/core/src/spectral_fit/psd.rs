use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::spectral::{gft_batch, SpectralBasis};

/// Nonparametric PSD estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    pub values: DVector<f64>,
    pub sample_count: usize,
    pub weighted: bool,
}

impl PsdEstimate {
    /// Entrywise square root, the target of the ARMA fit.
    pub fn sqrt(&self) -> DVector<f64> {
        self.values.map(f64::sqrt)
    }
}

/// `p̂ = (1/K) Σ_k w_k (x̂⁽ᵏ⁾)²` over spectra stored as columns.
pub fn nonparam_psd_from_spectra(
    spectra: &DMatrix<f64>,
    weights: Option<&[f64]>,
) -> Result<PsdEstimate> {
    let k = spectra.ncols();
    if k == 0 {
        return Err(Error::EmptySampleSet);
    }
    if let Some(w) = weights {
        check_len(k, w.len())?;
        if let Some(&bad) = w.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter(format!("sample weight {bad}")));
        }
    }
    let mut acc = DVector::zeros(spectra.nrows());
    for (j, col) in spectra.column_iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[j]);
        for (a, &s) in acc.iter_mut().zip(col.iter()) {
            *a += w * (s * s);
        }
    }
    acc /= k as f64;
    Ok(PsdEstimate {
        values: acc,
        sample_count: k,
        weighted: weights.is_some(),
    })
}

/// PSD estimate from signals stored as columns, analysed in `basis`.
pub fn nonparam_psd(
    signals: &DMatrix<f64>,
    basis: &SpectralBasis,
    weights: Option<&[f64]>,
) -> Result<PsdEstimate> {
    if signals.ncols() == 0 {
        return Err(Error::EmptySampleSet);
    }
    let spectra = gft_batch(basis, signals)?;
    nonparam_psd_from_spectra(&spectra, weights)
}
