use std::io::Write;

use super::config::{Cell, ExperimentConfig};
use super::trial::simulate;
use crate::error::{Error, Result};
use crate::graph::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct DumpRow {
    pub node_id: NodeId,
    pub position: Option<[f64; 2]>,
    pub observed: bool,
    pub truth: f64,
    /// Noisy observation; `None` on missing nodes.
    pub observation: Option<f64>,
    pub noisy: f64,
    pub armae: f64,
    pub drw: f64,
}

/// One recovered current-graph signal with all three estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryDump {
    pub seed: u64,
    pub sample_index: usize,
    pub rows: Vec<DumpRow>,
    pub edges: Vec<(NodeId, NodeId, f64)>,
    pub mse_noisy: f64,
    pub mse_armae: f64,
    pub mse_drw: f64,
}

pub fn dump_recovery(
    cfg: &ExperimentConfig,
    cell: Cell,
    seed: u64,
    sample_index: usize,
) -> Result<RecoveryDump> {
    cfg.validate()?;
    if sample_index >= cfg.current_samples {
        return Err(Error::IndexOutOfRange {
            index: sample_index,
            len: cfg.current_samples,
        });
    }
    let sim = simulate(cfg, cell, seed)?;
    let scn = &sim.scenario;
    let y = scn.y_c().column(sample_index).into_owned();
    let armae = sim.baseline.estimator.recover(&y)?;
    let drw = sim.drw.estimator.recover(&y)?;
    let noisy = sim.noisy_estimates().column(sample_index).into_owned();
    let truth = sim.x_c.column(sample_index).into_owned();

    let graph = scn.graph_c();
    let mask = scn.mask_c();
    let mut obs_value = vec![None; graph.num_nodes()];
    for (r, &i) in mask.observed().iter().enumerate() {
        obs_value[i] = Some(y[r]);
    }
    let rows = (0..graph.num_nodes())
        .map(|i| DumpRow {
            node_id: graph.node_ids()[i],
            position: graph.positions().map(|p| p[i]),
            observed: obs_value[i].is_some(),
            truth: truth[i],
            observation: obs_value[i],
            noisy: noisy[i],
            armae: armae[i],
            drw: drw[i],
        })
        .collect();
    let edges = graph
        .edges()
        .into_iter()
        .map(|(i, j, w)| (graph.node_ids()[i], graph.node_ids()[j], w))
        .collect();
    let nodes = sim.scope_nodes(cfg.mse_scope);
    let score = |est: &nalgebra::DVector<f64>| {
        nodes
            .iter()
            .map(|&i| (est[i] - truth[i]).powi(2))
            .sum::<f64>()
            / nodes.len() as f64
    };
    Ok(RecoveryDump {
        seed,
        sample_index,
        mse_noisy: score(&noisy),
        mse_armae: score(&armae),
        mse_drw: score(&drw),
        rows,
        edges,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// One row per node of the current graph.
pub fn write_dump_csv<W: Write>(out: W, dump: &RecoveryDump) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "node_id",
        "pos_x",
        "pos_y",
        "observed",
        "x",
        "y",
        "xhat_noisy",
        "xhat_armae",
        "xhat_drw",
    ])?;
    for r in &dump.rows {
        w.write_record([
            r.node_id.to_string(),
            opt(r.position.map(|p| p[0])),
            opt(r.position.map(|p| p[1])),
            u8::from(r.observed).to_string(),
            r.truth.to_string(),
            opt(r.observation),
            r.noisy.to_string(),
            r.armae.to_string(),
            r.drw.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dump_edges_csv<W: Write>(out: W, dump: &RecoveryDump) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source", "target", "weight"])?;
    for (a, b, wt) in &dump.edges {
        w.write_record([a.to_string(), b.to_string(), wt.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
