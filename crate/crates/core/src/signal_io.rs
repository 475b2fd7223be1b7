//! CSV batches of graph signals: header row of node IDs, one row per sample.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::graph::NodeId;

/// Writes signals stored as columns (`N × K`) as `K` CSV rows.
pub fn write_signals<W: Write>(out: W, node_ids: &[NodeId], signals: &DMatrix<f64>) -> Result<()> {
    check_len(node_ids.len(), signals.nrows())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(node_ids.iter().map(|id| id.to_string()))?;
    for col in signals.column_iter() {
        w.write_record(col.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a batch written by [`write_signals`]; returns node IDs and an `N × K` matrix.
pub fn read_signals<R: Read>(input: R) -> Result<(Vec<NodeId>, DMatrix<f64>)> {
    let mut r = csv::Reader::from_reader(input);
    let ids: Vec<NodeId> = r
        .headers()?
        .iter()
        .map(|h| {
            h.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("node id `{h}`")))
        })
        .collect::<Result<_>>()?;
    let mut data = Vec::new();
    let mut count = 0;
    for rec in r.records() {
        let rec = rec?;
        check_len(ids.len(), rec.len())?;
        for field in rec.iter() {
            data.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("value `{field}`")))?,
            );
        }
        count += 1;
    }
    Ok((ids.clone(), DMatrix::from_vec(ids.len(), count, data)))
}
