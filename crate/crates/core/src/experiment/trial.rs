use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{Cell, ExperimentConfig, GraphKind, MseScope, PerturbationKind, PsdKind};
use crate::error::{Error, Result};
use crate::graph::{
    gen_er, gen_rs, mean_edge_distance, perturb_edges, perturb_nodes, NodeMapping, ThetaRule,
    WeightPolicy,
};
use crate::gwss::{psd_current, psd_historical, GwssModel};
use crate::recovery::{make_mask, observe_batch, ObservationModel};
use crate::spectral::{spectral_decompose, SpectralBasis};
use crate::transfer::{
    baseline_transfer, drw_transfer, PipelineDiagnostics, TransferOutput, TransferScenario,
};

/// Seed of trial `trial` in cell `cell_index`, derived from the master seed.
pub fn trial_seed(master: u64, cell_index: usize, trial: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(master) ^ mix(((cell_index as u64) << 40) ^ trial as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialDiagnostics {
    pub baseline: PipelineDiagnostics,
    pub drw: PipelineDiagnostics,
    pub observed_nodes: usize,
    pub edges_historical: usize,
    pub edges_current: usize,
}

/// Per-method mean MSE over the current samples of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub seed: u64,
    pub mse_noisy: f64,
    pub mse_armae: f64,
    pub mse_drw: f64,
    pub diagnostics: TrialDiagnostics,
}

/// Everything produced by one simulated scenario.
pub(crate) struct Simulation {
    pub scenario: TransferScenario,
    pub x_c: DMatrix<f64>,
    pub noisy_fill: DVector<f64>,
    pub baseline: TransferOutput,
    pub drw: TransferOutput,
}

fn model_psd(kind: PsdKind, basis: &SpectralBasis) -> Result<DVector<f64>> {
    match kind {
        PsdKind::LowPass => psd_historical(basis),
        PsdKind::InverseLaplacian => Ok(psd_current(basis)),
    }
}

fn current_mask<R: Rng + ?Sized>(
    mask_h: &ObservationModel,
    mapping: &NodeMapping,
    n_c: usize,
    missing_prob: f64,
    rng: &mut R,
) -> Result<ObservationModel> {
    let kept: Vec<usize> = mapping
        .kept
        .iter()
        .filter(|id| {
            mask_h
                .observed()
                .binary_search(&mapping.hist_index[id])
                .is_ok()
        })
        .map(|id| mapping.curr_index[id])
        .collect();
    loop {
        let mut observed = kept.clone();
        for id in &mapping.added {
            if rng.random::<f64>() >= missing_prob {
                observed.push(mapping.curr_index[id]);
            }
        }
        if !observed.is_empty() {
            return ObservationModel::new(n_c, observed, mask_h.noise_std());
        }
    }
}

pub(crate) fn simulate(cfg: &ExperimentConfig, cell: Cell, seed: u64) -> Result<Simulation> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.num_nodes;
    let (graph_h, policy) = match cell.graph {
        GraphKind::Er => (
            gen_er(
                n,
                cfg.er_probability,
                cfg.er_weight_low,
                cfg.er_weight_high,
                &mut rng,
            )?,
            WeightPolicy::Uniform {
                low: cfg.er_weight_low,
                high: cfg.er_weight_high,
            },
        ),
        GraphKind::Rs => {
            let g = gen_rs(n, cfg.rs_neighbors, ThetaRule::MeanEdgeDistance, &mut rng)?;
            let theta = mean_edge_distance(&g).unwrap_or(1.0);
            (g, WeightPolicy::DistanceKernel { theta })
        }
    };
    let (graph_c, mapping) = match cfg.perturbation {
        PerturbationKind::Edges => {
            let g = perturb_edges(&graph_h, cell.size, policy, &mut rng)?;
            let m = NodeMapping::identity(&graph_h);
            (g, m)
        }
        PerturbationKind::Nodes => {
            perturb_nodes(&graph_h, cell.size, cfg.node_probability, policy, &mut rng)?
        }
    };
    let basis_h = spectral_decompose(&graph_h)?;
    let basis_c = if graph_c == graph_h {
        basis_h.clone()
    } else {
        spectral_decompose(&graph_c)?
    };
    let model_h = GwssModel::zero_mean(basis_h.clone(), model_psd(cfg.psd_historical, &basis_h)?)?;
    let model_c = GwssModel::zero_mean(basis_c.clone(), model_psd(cfg.psd_current, &basis_c)?)?;
    let x_h = model_h.sample(cfg.historical_samples, &mut rng)?;
    let x_c = model_c.sample(cfg.current_samples, &mut rng)?;

    let noise_std = cfg.noise_var.sqrt();
    let mask_h =
        make_mask(graph_h.num_nodes(), cfg.missing_prob, &mut rng)?.with_noise_std(noise_std)?;
    let mask_c = if mapping.is_identity() {
        mask_h.clone()
    } else {
        current_mask(
            &mask_h,
            &mapping,
            graph_c.num_nodes(),
            cfg.missing_prob,
            &mut rng,
        )?
    };
    let y_h = observe_batch(&mask_h, &x_h, &mut rng)?;
    let y_c = observe_batch(&mask_c, &x_c, &mut rng)?;

    // noisy baseline fills missing nodes with the historical sample mean (0 on added nodes)
    let hist_mean = x_h.column_mean();
    let mut noisy_fill = DVector::zeros(graph_c.num_nodes());
    for id in &mapping.kept {
        noisy_fill[mapping.curr_index[id]] = hist_mean[mapping.hist_index[id]];
    }

    let scenario = TransferScenario::with_bases(
        graph_h, graph_c, basis_h, basis_c, mapping, mask_h, mask_c, x_h, y_h, y_c,
    )?;
    let opts = cfg.transfer_options();
    let baseline = baseline_transfer(&scenario, &opts)?;
    let drw = drw_transfer(&scenario, &opts, &mut rng)?;
    Ok(Simulation {
        scenario,
        x_c,
        noisy_fill,
        baseline,
        drw,
    })
}

impl Simulation {
    /// Column-wise completion of the current observations by the noisy baseline.
    pub fn noisy_estimates(&self) -> DMatrix<f64> {
        let mask = self.scenario.mask_c();
        let mut out = DMatrix::zeros(self.x_c.nrows(), self.x_c.ncols());
        for (k, mut col) in out.column_iter_mut().enumerate() {
            col.copy_from(&self.noisy_fill);
            for (r, &i) in mask.observed().iter().enumerate() {
                col[i] = self.scenario.y_c()[(r, k)];
            }
        }
        out
    }

    pub fn scope_nodes(&self, scope: MseScope) -> Vec<usize> {
        let n = self.x_c.nrows();
        match scope {
            MseScope::All => (0..n).collect(),
            MseScope::Missing => {
                let missing = self.scenario.mask_c().missing();
                if missing.is_empty() {
                    (0..n).collect()
                } else {
                    missing
                }
            }
        }
    }
}

/// Per-sample MSE over `nodes` for estimates and truths stored as columns.
pub(crate) fn per_sample_mse(
    estimates: &DMatrix<f64>,
    truth: &DMatrix<f64>,
    nodes: &[usize],
) -> Vec<f64> {
    estimates
        .column_iter()
        .zip(truth.column_iter())
        .map(|(e, t)| {
            nodes.iter().map(|&i| (e[i] - t[i]).powi(2)).sum::<f64>() / nodes.len() as f64
        })
        .collect()
}

fn mean(values: &[f64]) -> f64 {
    crate::linalg::neumaier_sum(values.iter().copied()) / values.len() as f64
}

/// Runs one fully seeded scenario and scores the three methods.
pub fn run_trial(cfg: &ExperimentConfig, cell: Cell, seed: u64) -> Result<TrialResult> {
    let sim = simulate(cfg, cell, seed)?;
    let nodes = sim.scope_nodes(cfg.mse_scope);
    let y_c = sim.scenario.y_c();
    let armae = sim.baseline.estimator.recover_batch(y_c)?;
    let drw = sim.drw.estimator.recover_batch(y_c)?;
    let noisy = sim.noisy_estimates();
    let result = TrialResult {
        seed,
        mse_noisy: mean(&per_sample_mse(&noisy, &sim.x_c, &nodes)),
        mse_armae: mean(&per_sample_mse(&armae, &sim.x_c, &nodes)),
        mse_drw: mean(&per_sample_mse(&drw, &sim.x_c, &nodes)),
        diagnostics: TrialDiagnostics {
            baseline: sim.baseline.diagnostics.clone(),
            drw: sim.drw.diagnostics.clone(),
            observed_nodes: sim.scenario.mask_c().num_observed(),
            edges_historical: sim.scenario.graph_h().edge_count(),
            edges_current: sim.scenario.graph_c().edge_count(),
        },
    };
    for v in [result.mse_noisy, result.mse_armae, result.mse_drw] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidParameter(format!("non-finite MSE {v}")));
        }
    }
    Ok(result)
}
