//! Undirected weighted graphs, random generators and topology perturbations.

mod generate;
mod io;
mod perturb;

pub use generate::{gen_er, gen_rs, mean_edge_distance, ThetaRule};
pub use io::{read_edge_list, write_edge_list};
pub use perturb::{perturb_edges, perturb_nodes, NodeMapping, WeightPolicy};

use std::collections::{HashMap, HashSet};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type NodeId = u64;

/// Symmetric tolerance used when validating user-supplied weights.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Undirected weighted graph with stable node identifiers.
///
/// Row/column `i` of the weight matrix belongs to `node_ids[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    node_ids: Vec<NodeId>,
    weights: DMatrix<f64>,
    positions: Option<Vec<[f64; 2]>>,
}

impl Graph {
    /// Validates and builds a graph. Asymmetry up to [`SYMMETRY_TOL`] is
    /// accepted and the stored matrix is symmetrized exactly.
    pub fn new(
        weights: DMatrix<f64>,
        node_ids: Vec<NodeId>,
        positions: Option<Vec<[f64; 2]>>,
    ) -> Result<Self> {
        let n = node_ids.len();
        if weights.nrows() != weights.ncols() {
            return Err(Error::DimensionMismatch {
                expected: weights.nrows(),
                got: weights.ncols(),
            });
        }
        if weights.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: weights.nrows(),
            });
        }
        if let Some(pos) = &positions {
            if pos.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: pos.len(),
                });
            }
        }
        let mut seen = HashSet::with_capacity(n);
        for &id in &node_ids {
            if !seen.insert(id) {
                return Err(Error::DuplicateNodeId(id));
            }
        }
        let mut weights = weights;
        for i in 0..n {
            let d = weights[(i, i)];
            if d != 0.0 {
                return Err(Error::NonzeroDiagonal { index: i, value: d });
            }
            for j in (i + 1)..n {
                let a = weights[(i, j)];
                let b = weights[(j, i)];
                if !a.is_finite() || !b.is_finite() || (a - b).abs() > SYMMETRY_TOL {
                    return Err(Error::AsymmetricWeights {
                        row: i,
                        col: j,
                        a,
                        b,
                    });
                }
                if a < 0.0 || b < 0.0 {
                    let value = a.min(b);
                    return Err(Error::NegativeWeight {
                        row: i,
                        col: j,
                        value,
                    });
                }
                let w = 0.5 * (a + b);
                weights[(i, j)] = w;
                weights[(j, i)] = w;
            }
        }
        Ok(Self {
            node_ids,
            weights,
            positions,
        })
    }

    /// Graph with node IDs `0..n`.
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        let ids = (0..weights.nrows() as NodeId).collect();
        Self::new(weights, ids, None)
    }

    // Internal constructor for generators that already guarantee the invariants.
    pub(crate) fn from_parts_unchecked(
        weights: DMatrix<f64>,
        node_ids: Vec<NodeId>,
        positions: Option<Vec<[f64; 2]>>,
    ) -> Self {
        debug_assert!(Self::new(weights.clone(), node_ids.clone(), positions.clone()).is_ok());
        Self {
            node_ids,
            weights,
            positions,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.node_ids.len()
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.node_ids
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn positions(&self) -> Option<&[[f64; 2]]> {
        self.positions.as_deref()
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.node_ids.iter().position(|&x| x == id)
    }

    pub fn index_map(&self) -> HashMap<NodeId, usize> {
        self.node_ids
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i))
            .collect()
    }

    /// Combinatorial Laplacian `D - W`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.num_nodes();
        let mut l = -self.weights.clone();
        for i in 0..n {
            l[(i, i)] = self.weights.row(i).sum();
        }
        l
    }

    /// Edges as `(i, j, w)` index triples with `i < j`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.num_nodes();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.weights[(i, j)];
                if w > 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.weights.row(i).iter().filter(|&&w| w > 0.0).count()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.weights[(i, j)] > 0.0
    }

    /// Edge set keyed by node ID pairs `(min, max)`.
    pub fn edge_id_set(&self) -> HashSet<(NodeId, NodeId)> {
        self.edges()
            .into_iter()
            .map(|(i, j, _)| {
                let (a, b) = (self.node_ids[i], self.node_ids[j]);
                (a.min(b), a.max(b))
            })
            .collect()
    }
}
