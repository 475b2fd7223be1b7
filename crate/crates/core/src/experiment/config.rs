use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::density_ratio::RatioConfig;
use crate::error::{Error, Result};
use crate::spectral_fit::Regularization;
use crate::spectral_fit::{CovarianceConvention, SolverOptions};
use crate::transfer::TransferOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    /// Erdős–Rényi graph with uniform weights.
    Er,
    /// Random sensor graph with k-NN edges.
    Rs,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::Er => "ER",
            GraphKind::Rs => "RS",
        })
    }
}

impl FromStr for GraphKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "er" => Ok(GraphKind::Er),
            "rs" => Ok(GraphKind::Rs),
            _ => Err(Error::Parse(format!("graph kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationKind {
    /// Remove `e` edges and add `e` new ones.
    Edges,
    /// Remove `v` nodes and add `v` new ones.
    Nodes,
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PerturbationKind::Edges => "edges",
            PerturbationKind::Nodes => "nodes",
        })
    }
}

impl FromStr for PerturbationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edges" => Ok(PerturbationKind::Edges),
            "nodes" => Ok(PerturbationKind::Nodes),
            _ => Err(Error::Parse(format!("perturbation kind `{s}`"))),
        }
    }
}

/// Generating PSD of a signal model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsdKind {
    /// `1 - λ / λ_max`
    LowPass,
    /// `1 / λ`, zero on the null space
    InverseLaplacian,
}

/// Nodes over which the reported MSE is averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MseScope {
    #[default]
    All,
    /// Missing nodes only (falls back to all nodes when nothing is missing).
    Missing,
}

/// Experiment description. Defaults reproduce the published protocol at
/// desk scale (1000 trials).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    pub graphs: Vec<GraphKind>,
    pub perturbation: PerturbationKind,
    /// Perturbation sizes `e` or `v`.
    pub sizes: Vec<usize>,
    pub num_nodes: usize,
    pub er_probability: f64,
    pub er_weight_low: f64,
    pub er_weight_high: f64,
    pub rs_neighbors: usize,
    /// Connection probability of nodes added by a node change.
    pub node_probability: f64,
    pub historical_samples: usize,
    pub current_samples: usize,
    pub missing_prob: f64,
    pub noise_var: f64,
    pub psd_historical: PsdKind,
    pub psd_current: PsdKind,
    pub numerator_order: usize,
    pub denominator_order: usize,
    pub ridge_alpha: f64,
    pub ridge_beta: f64,
    pub denominator_margin: f64,
    pub normalize_weights: bool,
    pub include_noise: bool,
    pub convention: CovarianceConvention,
    pub mse_scope: MseScope,
    pub solver: SolverOptions,
    pub ratio: RatioConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            trials: 1000,
            graphs: vec![GraphKind::Er, GraphKind::Rs],
            perturbation: PerturbationKind::Edges,
            sizes: vec![10, 20, 30],
            num_nodes: 100,
            er_probability: 0.15,
            er_weight_low: 1.0,
            er_weight_high: 3.0,
            rs_neighbors: 8,
            node_probability: 0.15,
            historical_samples: 2000,
            current_samples: 1000,
            missing_prob: 0.3,
            noise_var: 0.1,
            psd_historical: PsdKind::LowPass,
            psd_current: PsdKind::InverseLaplacian,
            numerator_order: 5,
            denominator_order: 2,
            ridge_alpha: 1e-6,
            ridge_beta: 1e-6,
            denominator_margin: 1e-2,
            normalize_weights: false,
            include_noise: true,
            convention: CovarianceConvention::Squared,
            mse_scope: MseScope::All,
            solver: SolverOptions::default(),
            ratio: RatioConfig::default(),
        }
    }
}

/// One table cell: graph family and perturbation size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub graph: GraphKind,
    pub size: usize,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("trials", self.trials),
            ("num_nodes", self.num_nodes),
            ("historical_samples", self.historical_samples),
            ("current_samples", self.current_samples),
            ("rs_neighbors", self.rs_neighbors),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be >= 1")));
            }
        }
        if self.graphs.is_empty() || self.sizes.is_empty() {
            return Err(Error::InvalidParameter(
                "graphs and sizes must be non-empty".into(),
            ));
        }
        for p in [self.er_probability, self.node_probability] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability(p));
            }
        }
        if !(0.0..1.0).contains(&self.missing_prob) {
            return Err(Error::InvalidProbability(self.missing_prob));
        }
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise_var {}",
                self.noise_var
            )));
        }
        if self.ridge_alpha < 0.0 || self.ridge_beta < 0.0 {
            return Err(Error::InvalidParameter("ridge weights must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.denominator_margin) {
            return Err(Error::InvalidParameter(
                "denominator_margin must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        self.graphs
            .iter()
            .flat_map(|&graph| self.sizes.iter().map(move |&size| Cell { graph, size }))
            .collect()
    }

    pub fn transfer_options(&self) -> TransferOptions {
        let (l, m) = (self.numerator_order, self.denominator_order);
        TransferOptions {
            numerator_order: l,
            denominator_order: m,
            reg: Regularization::ridge(l, m, self.ridge_alpha, self.ridge_beta),
            solver: self.solver,
            convention: self.convention,
            include_noise: self.include_noise,
            ratio: self.ratio.clone(),
            denominator_margin: self.denominator_margin,
            normalize_weights: self.normalize_weights,
        }
    }
}
