use std::collections::{HashMap, HashSet};

use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::generate::{distance, uniform};
use super::{Graph, NodeId};
use crate::error::{check_probability, Error, Result};

/// How weights of newly created edges are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightPolicy {
    Uniform {
        low: f64,
        high: f64,
    },
    /// `exp(-dist / theta)` of the endpoint positions; new nodes get uniform
    /// positions in the unit square.
    DistanceKernel {
        theta: f64,
    },
}

impl WeightPolicy {
    fn draw<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        a: Option<[f64; 2]>,
        b: Option<[f64; 2]>,
    ) -> Result<f64> {
        match *self {
            WeightPolicy::Uniform { low, high } => Ok(uniform(rng, low, high)),
            WeightPolicy::DistanceKernel { theta } => match (a, b) {
                (Some(a), Some(b)) => Ok((-distance(a, b) / theta).exp()),
                _ => Err(Error::InvalidParameter(
                    "distance kernel weights need node positions".into(),
                )),
            },
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            WeightPolicy::Uniform { low, high } if low >= 0.0 && low <= high => Ok(()),
            WeightPolicy::DistanceKernel { theta } if theta > 0.0 => Ok(()),
            other => Err(Error::InvalidParameter(format!("{other:?}"))),
        }
    }
}

/// Remove `e` uniformly chosen edges and add `e` edges between pairs that
/// were non-adjacent in `g`.
pub fn perturb_edges<R: Rng + ?Sized>(
    g: &Graph,
    e: usize,
    policy: WeightPolicy,
    rng: &mut R,
) -> Result<Graph> {
    policy.validate()?;
    let n = g.num_nodes();
    let edges = g.edges();
    if e > edges.len() {
        return Err(Error::TooManyRemovals {
            requested: e,
            available: edges.len(),
        });
    }
    let free: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !g.has_edge(i, j))
        .collect();
    if e > free.len() {
        return Err(Error::NoRoomToAdd {
            requested: e,
            available: free.len(),
        });
    }
    let mut w = g.weights().clone();
    for k in index::sample(rng, edges.len(), e).into_vec() {
        let (i, j, _) = edges[k];
        w[(i, j)] = 0.0;
        w[(j, i)] = 0.0;
    }
    let pos = g.positions();
    for k in index::sample(rng, free.len(), e).into_vec() {
        let (i, j) = free[k];
        let v = policy.draw(rng, pos.map(|p| p[i]), pos.map(|p| p[j]))?;
        w[(i, j)] = v;
        w[(j, i)] = v;
    }
    Ok(Graph::from_parts_unchecked(
        w,
        g.node_ids().to_vec(),
        pos.map(|p| p.to_vec()),
    ))
}

/// Correspondence between the nodes of a historical and a current graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeMapping {
    /// Shared nodes, in historical row order.
    pub kept: Vec<NodeId>,
    pub removed: Vec<NodeId>,
    pub added: Vec<NodeId>,
    pub hist_index: HashMap<NodeId, usize>,
    pub curr_index: HashMap<NodeId, usize>,
}

impl NodeMapping {
    pub fn identity(g: &Graph) -> Self {
        Self::between(g, g)
    }

    /// Mapping derived from the node ID sets of two graphs.
    pub fn between(hist: &Graph, curr: &Graph) -> Self {
        let hist_index = hist.index_map();
        let curr_index = curr.index_map();
        let kept = hist
            .node_ids()
            .iter()
            .copied()
            .filter(|id| curr_index.contains_key(id))
            .collect();
        let removed = hist
            .node_ids()
            .iter()
            .copied()
            .filter(|id| !curr_index.contains_key(id))
            .collect();
        let added = curr
            .node_ids()
            .iter()
            .copied()
            .filter(|id| !hist_index.contains_key(id))
            .collect();
        Self {
            kept,
            removed,
            added,
            hist_index,
            curr_index,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.removed.is_empty() && self.added.is_empty()
    }

    /// Row indices of the kept nodes in the historical graph.
    pub fn kept_hist_indices(&self) -> Vec<usize> {
        self.kept.iter().map(|id| self.hist_index[id]).collect()
    }

    /// Row indices of the kept nodes in the current graph, aligned with
    /// [`Self::kept_hist_indices`].
    pub fn kept_curr_indices(&self) -> Vec<usize> {
        self.kept.iter().map(|id| self.curr_index[id]).collect()
    }

    pub fn validate(&self, hist: &Graph, curr: &Graph) -> Result<()> {
        let n_h = hist.num_nodes();
        let n_c = curr.num_nodes();
        if self.kept.len() + self.removed.len() != n_h {
            return Err(Error::MappingMismatch(format!(
                "kept + removed = {} but historical graph has {n_h} nodes",
                self.kept.len() + self.removed.len()
            )));
        }
        if self.kept.len() + self.added.len() != n_c {
            return Err(Error::MappingMismatch(format!(
                "kept + added = {} but current graph has {n_c} nodes",
                self.kept.len() + self.added.len()
            )));
        }
        let hist_ids: HashSet<_> = hist.node_ids().iter().collect();
        let curr_ids: HashSet<_> = curr.node_ids().iter().collect();
        for id in &self.kept {
            if !hist_ids.contains(id) || !curr_ids.contains(id) {
                return Err(Error::MappingMismatch(format!("kept node {id} missing")));
            }
            if hist.node_ids()[self.hist_index[id]] != *id
                || curr.node_ids()[self.curr_index[id]] != *id
            {
                return Err(Error::MappingMismatch(format!("stale index for node {id}")));
            }
        }
        for id in &self.removed {
            if !hist_ids.contains(id) || curr_ids.contains(id) {
                return Err(Error::MappingMismatch(format!("removed node {id}")));
            }
        }
        for id in &self.added {
            if hist_ids.contains(id) || !curr_ids.contains(id) {
                return Err(Error::MappingMismatch(format!("added node {id}")));
            }
        }
        Ok(())
    }
}

/// Remove `v` uniformly chosen nodes and add `v` fresh nodes, each linked to
/// every surviving node independently with probability `p_v`.
pub fn perturb_nodes<R: Rng + ?Sized>(
    g: &Graph,
    v: usize,
    p_v: f64,
    policy: WeightPolicy,
    rng: &mut R,
) -> Result<(Graph, NodeMapping)> {
    check_probability(p_v)?;
    policy.validate()?;
    let n = g.num_nodes();
    if v >= n && v > 0 {
        return Err(Error::TooManyRemovals {
            requested: v,
            available: n.saturating_sub(1),
        });
    }
    let mut removed_idx = index::sample(rng, n, v).into_vec();
    removed_idx.sort_unstable();
    let removed_set: HashSet<usize> = removed_idx.iter().copied().collect();
    let survivors: Vec<usize> = (0..n).filter(|i| !removed_set.contains(i)).collect();

    let n_s = survivors.len();
    let n_c = n_s + v;
    let mut w = DMatrix::zeros(n_c, n_c);
    for (a, &i) in survivors.iter().enumerate() {
        for (b, &j) in survivors.iter().enumerate() {
            w[(a, b)] = g.weights()[(i, j)];
        }
    }
    let mut ids: Vec<NodeId> = survivors.iter().map(|&i| g.node_ids()[i]).collect();
    let next_id = g.node_ids().iter().max().map_or(0, |m| m + 1);
    let mut positions: Option<Vec<[f64; 2]>> = g
        .positions()
        .map(|p| survivors.iter().map(|&i| p[i]).collect());

    for k in 0..v {
        let row = n_s + k;
        ids.push(next_id + k as NodeId);
        let new_pos = positions.as_mut().map(|p| {
            let q = [rng.random::<f64>(), rng.random::<f64>()];
            p.push(q);
            q
        });
        for col in 0..n_s {
            if rng.random::<f64>() < p_v {
                let other = positions.as_ref().map(|p| p[col]);
                let value = policy.draw(rng, new_pos, other)?;
                w[(row, col)] = value;
                w[(col, row)] = value;
            }
        }
    }
    let curr = Graph::from_parts_unchecked(w, ids, positions);
    let mapping = NodeMapping::between(g, &curr);
    Ok((curr, mapping))
}
