//! Graph filter transfer: the baseline estimator (parameters fitted on the
//! historical graph, reused on the current one) and the density-ratio
//! weighted estimator fitted directly for the current graph.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::density_ratio::{build_basis, fit_ratio, RatioConfig};
use crate::error::{check_len, Error, Result};
use crate::graph::{Graph, NodeMapping};
use crate::linalg::select_rows;
use crate::recovery::{lmmse, LinearEstimator, ObservationModel};
use crate::spectral::{spectral_decompose, SpectralBasis};
use crate::spectral_fit::{
    covariance_from_arma, fit_arma_with_support, nonparam_psd, nonparam_psd_from_spectra, ArmaFit,
    CovarianceConvention, PsdEstimate, Regularization, SolverOptions,
};

/// Historical data and current observations for one transfer problem.
///
/// Current ground-truth signals are deliberately not part of this type.
#[derive(Debug, Clone)]
pub struct TransferScenario {
    graph_h: Graph,
    graph_c: Graph,
    basis_h: SpectralBasis,
    basis_c: SpectralBasis,
    mapping: NodeMapping,
    mask_h: ObservationModel,
    mask_c: ObservationModel,
    x_h: DMatrix<f64>,
    y_h: DMatrix<f64>,
    y_c: DMatrix<f64>,
    ratio_rows_h: Vec<usize>,
    ratio_rows_c: Vec<usize>,
}

impl TransferScenario {
    /// Signals and observations are stored one sample per column. `mask_h`
    /// and `mask_c` select nodes of the historical and current graphs.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        graph_h: Graph,
        graph_c: Graph,
        mapping: NodeMapping,
        mask_h: ObservationModel,
        mask_c: ObservationModel,
        x_h: DMatrix<f64>,
        y_h: DMatrix<f64>,
        y_c: DMatrix<f64>,
    ) -> Result<Self> {
        let basis_h = spectral_decompose(&graph_h)?;
        let basis_c = spectral_decompose(&graph_c)?;
        Self::with_bases(
            graph_h, graph_c, basis_h, basis_c, mapping, mask_h, mask_c, x_h, y_h, y_c,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_bases(
        graph_h: Graph,
        graph_c: Graph,
        basis_h: SpectralBasis,
        basis_c: SpectralBasis,
        mapping: NodeMapping,
        mask_h: ObservationModel,
        mask_c: ObservationModel,
        x_h: DMatrix<f64>,
        y_h: DMatrix<f64>,
        y_c: DMatrix<f64>,
    ) -> Result<Self> {
        mapping.validate(&graph_h, &graph_c)?;
        check_len(graph_h.num_nodes(), basis_h.dim())?;
        check_len(graph_c.num_nodes(), basis_c.dim())?;
        check_len(graph_h.num_nodes(), mask_h.num_nodes())?;
        check_len(graph_c.num_nodes(), mask_c.num_nodes())?;
        check_len(graph_h.num_nodes(), x_h.nrows())?;
        check_len(x_h.ncols(), y_h.ncols())?;
        check_len(mask_h.num_observed(), y_h.nrows())?;
        check_len(mask_c.num_observed(), y_c.nrows())?;

        // observed nodes present in both graphs, aligned by node ID
        let mut ratio_rows_h = Vec::new();
        let mut ratio_rows_c = Vec::new();
        for id in &mapping.kept {
            let ih = mapping.hist_index[id];
            let ic = mapping.curr_index[id];
            if let (Ok(rh), Ok(rc)) = (
                mask_h.observed().binary_search(&ih),
                mask_c.observed().binary_search(&ic),
            ) {
                ratio_rows_h.push(rh);
                ratio_rows_c.push(rc);
            }
        }
        Ok(Self {
            graph_h,
            graph_c,
            basis_h,
            basis_c,
            mapping,
            mask_h,
            mask_c,
            x_h,
            y_h,
            y_c,
            ratio_rows_h,
            ratio_rows_c,
        })
    }

    pub fn graph_h(&self) -> &Graph {
        &self.graph_h
    }

    pub fn graph_c(&self) -> &Graph {
        &self.graph_c
    }

    pub fn basis_h(&self) -> &SpectralBasis {
        &self.basis_h
    }

    pub fn basis_c(&self) -> &SpectralBasis {
        &self.basis_c
    }

    pub fn mapping(&self) -> &NodeMapping {
        &self.mapping
    }

    pub fn mask_h(&self) -> &ObservationModel {
        &self.mask_h
    }

    pub fn mask_c(&self) -> &ObservationModel {
        &self.mask_c
    }

    pub fn x_h(&self) -> &DMatrix<f64> {
        &self.x_h
    }

    pub fn y_h(&self) -> &DMatrix<f64> {
        &self.y_h
    }

    pub fn y_c(&self) -> &DMatrix<f64> {
        &self.y_c
    }

    /// Historical and current observations restricted to observed nodes
    /// shared by both graphs; the inputs of the ratio estimator.
    pub fn ratio_inputs(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        (
            select_rows(&self.y_h, &self.ratio_rows_h),
            select_rows(&self.y_c, &self.ratio_rows_c),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferOptions {
    /// Numerator order `L`.
    pub numerator_order: usize,
    /// Denominator order `M`.
    pub denominator_order: usize,
    pub reg: Regularization,
    pub solver: SolverOptions,
    pub convention: CovarianceConvention,
    /// Add `σ² I` to the inner matrix of the LMMSE gain.
    pub include_noise: bool,
    pub ratio: RatioConfig,
    /// Lower bound on the ARMA denominator at every fitted or evaluated
    /// eigenvalue.
    pub denominator_margin: f64,
    /// Rescale the ratio weights to unit mean over the historical samples
    /// before weighting the PSD.
    pub normalize_weights: bool,
}

impl TransferOptions {
    pub fn new(numerator_order: usize, denominator_order: usize) -> Self {
        Self {
            numerator_order,
            denominator_order,
            reg: Regularization::ridge(numerator_order, denominator_order, 1e-6, 1e-6),
            solver: SolverOptions::default(),
            convention: CovarianceConvention::Squared,
            include_noise: true,
            ratio: RatioConfig::default(),
            denominator_margin: 1e-2,
            normalize_weights: false,
        }
    }
}

impl Default for TransferOptions {
    fn default() -> Self {
        Self::new(5, 2)
    }
}

/// Summary of the ratio weights `w_k = r(y_h⁽ᵏ⁾)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSummary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl WeightSummary {
    pub fn of(weights: &[f64]) -> Self {
        let n = weights.len().max(1) as f64;
        Self {
            min: weights.iter().copied().fold(f64::INFINITY, f64::min),
            mean: weights.iter().sum::<f64>() / n,
            max: weights.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineDiagnostics {
    pub selected_lambda: Option<f64>,
    pub weights: Option<WeightSummary>,
    pub solver_iterations: usize,
    pub kkt_residual: f64,
    pub fit_objective: f64,
    pub convention: CovarianceConvention,
    pub include_noise: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferOutput {
    pub estimator: LinearEstimator,
    pub fit: ArmaFit,
    pub psd: PsdEstimate,
    pub diagnostics: PipelineDiagnostics,
}

fn fit_and_build(
    psd: PsdEstimate,
    fit_grid: &SpectralBasis,
    target_basis: &SpectralBasis,
    transferred: bool,
    mask: &ObservationModel,
    opts: &TransferOptions,
    selected_lambda: Option<f64>,
    weights: Option<WeightSummary>,
) -> Result<TransferOutput> {
    // Parameters carried to another graph must stay pole-free there too.
    let support = if transferred {
        target_basis.eigenvalues().clone()
    } else {
        DVector::zeros(0)
    };
    let fit = fit_arma_with_support(
        &psd.sqrt(),
        fit_grid.eigenvalues(),
        &support,
        opts.denominator_margin,
        opts.numerator_order,
        opts.denominator_order,
        &opts.reg,
        &opts.solver,
    )?;
    let cov = covariance_from_arma(target_basis, &fit.params, opts.convention)?;
    let mean = DVector::zeros(target_basis.dim());
    let estimator = lmmse(&cov, &mean, mask, opts.include_noise)?;
    let diagnostics = PipelineDiagnostics {
        selected_lambda,
        weights,
        solver_iterations: fit.diagnostics.iterations,
        kkt_residual: fit.diagnostics.kkt_residual,
        fit_objective: fit.diagnostics.objective,
        convention: opts.convention,
        include_noise: opts.include_noise,
    };
    Ok(TransferOutput {
        estimator,
        fit,
        psd,
        diagnostics,
    })
}

/// Baseline transfer: PSD and ARMA fit on the historical graph, covariance
/// rebuilt on the current basis, LMMSE for the current mask.
pub fn baseline_transfer(scn: &TransferScenario, opts: &TransferOptions) -> Result<TransferOutput> {
    let psd = nonparam_psd(&scn.x_h, &scn.basis_h, None)?;
    fit_and_build(
        psd,
        &scn.basis_h,
        &scn.basis_c,
        true,
        &scn.mask_c,
        opts,
        None,
        None,
    )
}

/// Fit on the current basis with given per-sample weights (`None` for the
/// plain average); historical signals are mapped onto the current graph.
pub fn current_basis_transfer(
    scn: &TransferScenario,
    opts: &TransferOptions,
    weights: Option<&[f64]>,
) -> Result<TransferOutput> {
    let psd = weighted_psd_nodechange(&scn.x_h, weights, &scn.basis_c, &scn.mapping)?;
    let summary = weights.map(WeightSummary::of);
    fit_and_build(
        psd,
        &scn.basis_c,
        &scn.basis_c,
        false,
        &scn.mask_c,
        opts,
        None,
        summary,
    )
}

/// Density-ratio weighted transfer.
pub fn drw_transfer<R: Rng + ?Sized>(
    scn: &TransferScenario,
    opts: &TransferOptions,
    rng: &mut R,
) -> Result<TransferOutput> {
    if scn.y_c.ncols() == 0 || scn.y_h.ncols() == 0 {
        return Err(Error::EmptySampleSet);
    }
    let (yh, yc) = scn.ratio_inputs();
    if yh.nrows() == 0 {
        return Err(Error::InvalidParameter(
            "no observed node shared by both graphs".into(),
        ));
    }
    let basis = build_basis(&yc, Some(&yh), &opts.ratio, rng)?;
    let model = fit_ratio(&yh, &yc, basis, &opts.ratio.lambda_grid, opts.ratio.folds)?;
    let mut weights = model.eval_batch(&yh)?;
    if weights.iter().all(|&w| w < 1e-12) {
        return Err(Error::DegenerateWeights);
    }
    if opts.normalize_weights {
        let mean = weights.iter().sum::<f64>() / weights.len() as f64;
        weights.iter_mut().for_each(|w| *w /= mean);
    }
    let mut out = current_basis_transfer(scn, opts, Some(&weights))?;
    out.diagnostics.selected_lambda = Some(model.reg_lambda);
    Ok(out)
}

/// Weighted PSD on the current basis from historical signals:
/// `(1/K) Σ_k w_k ([U_cᵀ]_{kept} x_h⁽ᵏ⁾|_{kept})²`, i.e. each historical
/// signal restricted to surviving nodes and analysed through the rows of
/// `U_c` belonging to those nodes. Output length is `N_c`.
pub fn weighted_psd_nodechange(
    x_hist: &DMatrix<f64>,
    weights: Option<&[f64]>,
    basis_c: &SpectralBasis,
    mapping: &NodeMapping,
) -> Result<PsdEstimate> {
    let n_h = mapping.kept.len() + mapping.removed.len();
    let n_c = mapping.kept.len() + mapping.added.len();
    if x_hist.nrows() != n_h {
        return Err(Error::MappingMismatch(format!(
            "historical signals have {} rows, mapping implies {n_h}",
            x_hist.nrows()
        )));
    }
    if basis_c.dim() != n_c {
        return Err(Error::MappingMismatch(format!(
            "current basis has dimension {}, mapping implies {n_c}",
            basis_c.dim()
        )));
    }
    let hist_rows = mapping.kept_hist_indices();
    let curr_rows = mapping.kept_curr_indices();
    if hist_rows.iter().any(|&i| i >= n_h) || curr_rows.iter().any(|&i| i >= n_c) {
        return Err(Error::MappingMismatch("index out of range".into()));
    }
    let identity = mapping.is_identity()
        && hist_rows.iter().enumerate().all(|(k, &i)| i == k)
        && curr_rows.iter().enumerate().all(|(k, &i)| i == k);
    let spectra = if identity {
        basis_c.eigenvectors().transpose() * x_hist
    } else {
        let u_kept = select_rows(basis_c.eigenvectors(), &curr_rows);
        let x_kept = select_rows(x_hist, &hist_rows);
        u_kept.transpose() * &x_kept
    };
    nonparam_psd_from_spectra(&spectra, weights)
}
