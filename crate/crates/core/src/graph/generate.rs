use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Graph, NodeId};
use crate::error::{check_probability, Error, Result};

/// Bandwidth policy for the distance kernel `exp(-dist / theta)` of sensor graphs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaRule {
    /// Mean Euclidean length over the k-NN edge set of the instance.
    MeanEdgeDistance,
    Fixed(f64),
}

/// Erdős–Rényi graph; each pair connected with probability `p`, weight ~ U(low, high).
pub fn gen_er<R: Rng + ?Sized>(
    n: usize,
    p: f64,
    weight_low: f64,
    weight_high: f64,
    rng: &mut R,
) -> Result<Graph> {
    check_probability(p)?;
    if !(weight_low <= weight_high) || weight_low < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "weight range [{weight_low}, {weight_high}]"
        )));
    }
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                let v = uniform(rng, weight_low, weight_high);
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    let ids = (0..n as NodeId).collect();
    Ok(Graph::from_parts_unchecked(w, ids, None))
}

pub(crate) fn uniform<R: Rng + ?Sized>(rng: &mut R, low: f64, high: f64) -> f64 {
    let v = low + (high - low) * rng.random::<f64>();
    // guards against rounding past `high`
    v.min(high).max(low)
}

pub(crate) fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Random sensor graph: uniform positions in the unit square, symmetrized
/// k-nearest-neighbour edges with weights `exp(-dist / theta)`.
pub fn gen_rs<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    theta_rule: ThetaRule,
    rng: &mut R,
) -> Result<Graph> {
    if k >= n {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must be < n = {n}"
        )));
    }
    let positions: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
        .collect();

    let mut adjacent = vec![vec![false; n]; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        order.sort_by(|&a, &b| {
            distance(positions[i], positions[a])
                .total_cmp(&distance(positions[i], positions[b]))
                .then(a.cmp(&b))
        });
        for &j in order.iter().take(k) {
            adjacent[i][j] = true;
            adjacent[j][i] = true;
        }
    }

    let theta = match theta_rule {
        ThetaRule::Fixed(t) => {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter(format!("theta = {t}")));
            }
            t
        }
        ThetaRule::MeanEdgeDistance => {
            let (sum, count) = (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .filter(|&(i, j)| adjacent[i][j])
                .fold((0.0, 0usize), |(s, c), (i, j)| {
                    (s + distance(positions[i], positions[j]), c + 1)
                });
            if count == 0 || sum <= 0.0 {
                1.0
            } else {
                sum / count as f64
            }
        }
    };

    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if adjacent[i][j] {
                let v = (-distance(positions[i], positions[j]) / theta).exp();
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    let ids = (0..n as NodeId).collect();
    Ok(Graph::from_parts_unchecked(w, ids, Some(positions)))
}

/// Mean Euclidean edge length of a graph with positions, `None` if it has
/// no positions or no edges.
pub fn mean_edge_distance(g: &Graph) -> Option<f64> {
    let pos = g.positions()?;
    let edges = g.edges();
    if edges.is_empty() {
        return None;
    }
    let total: f64 = edges
        .iter()
        .map(|&(i, j, _)| distance(pos[i], pos[j]))
        .sum();
    Some(total / edges.len() as f64)
}
