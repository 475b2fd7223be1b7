//! Graph signal recovery with graph Wiener filters, plus transfer of ARMA
//! graph filters to a changed topology through density-ratio weighting of
//! historical data.

pub mod density_ratio;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod gwss;
pub(crate) mod linalg;
pub mod recovery;
pub mod signal_io;
pub mod spectral;
pub mod spectral_fit;
pub mod transfer;

pub use error::{Error, Result};
pub use graph::{Graph, NodeId, NodeMapping};
pub use spectral::{gft, igft, spectral_decompose, SpectralBasis};

pub use nalgebra::{DMatrix, DVector};
