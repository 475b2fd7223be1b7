//! PSD estimation and ARMA graph-filter fitting.

mod arma;
mod psd;
mod qp;

pub use arma::{
    arma_eval, covariance_from_arma, fit_arma, fit_arma_with_support, vandermonde, ArmaFit,
    ArmaParams, CovarianceConvention, FitDiagnostics, Regularization, SolverOptions,
};
pub use psd::{nonparam_psd, nonparam_psd_from_spectra, PsdEstimate};
pub use qp::{solve_constrained_lsq, QpSolution};
