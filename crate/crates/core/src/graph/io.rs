//! Plain-text edge-list format:
//!
//! ```text
//! nodes <N>
//! node <id>            # optional, one per node in row order; default ids 0..N
//! pos <id> <x> <y>     # optional
//! <id_a> <id_b> <weight>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::{Graph, NodeId};
use crate::error::{Error, Result};

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    let n = g.num_nodes();
    writeln!(out, "nodes {n}").unwrap();
    let ids = g.node_ids();
    let default_ids = ids.iter().enumerate().all(|(i, &id)| id == i as NodeId);
    if !default_ids {
        for id in ids {
            writeln!(out, "node {id}").unwrap();
        }
    }
    if let Some(pos) = g.positions() {
        for (id, p) in ids.iter().zip(pos) {
            writeln!(out, "pos {id} {} {}", p[0], p[1]).unwrap();
        }
    }
    for (i, j, w) in g.edges() {
        writeln!(out, "{} {} {w}", ids[i], ids[j]).unwrap();
    }
    out
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, line: usize) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse(format!("line {line}: malformed field")))
}

pub fn read_edge_list(text: &str) -> Result<Graph> {
    let mut n: Option<usize> = None;
    let mut ids: Vec<NodeId> = Vec::new();
    let mut pos: HashMap<NodeId, [f64; 2]> = HashMap::new();
    let mut edges: Vec<(NodeId, NodeId, f64)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = lineno + 1;
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("nodes") => n = Some(parse(toks.next(), lineno)?),
            Some("node") => ids.push(parse(toks.next(), lineno)?),
            Some("pos") => {
                let id = parse(toks.next(), lineno)?;
                let x = parse(toks.next(), lineno)?;
                let y = parse(toks.next(), lineno)?;
                pos.insert(id, [x, y]);
            }
            Some(first) => {
                let a = parse(Some(first), lineno)?;
                let b = parse(toks.next(), lineno)?;
                let w = parse(toks.next(), lineno)?;
                edges.push((a, b, w));
            }
            None => {}
        }
    }
    let n = n.ok_or_else(|| Error::Parse("missing `nodes <N>` header".into()))?;
    if ids.is_empty() {
        ids = (0..n as NodeId).collect();
    } else if ids.len() != n {
        return Err(Error::Parse(format!(
            "{} node lines for {n} nodes",
            ids.len()
        )));
    }
    let index: HashMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let lookup = |id: NodeId| {
        index
            .get(&id)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown node id {id}")))
    };
    let mut w = DMatrix::zeros(n, n);
    for (a, b, v) in edges {
        let (i, j) = (lookup(a)?, lookup(b)?);
        w[(i, j)] = v;
        w[(j, i)] = v;
    }
    let positions = if pos.is_empty() {
        None
    } else {
        Some(
            ids.iter()
                .map(|id| {
                    pos.get(id)
                        .copied()
                        .ok_or_else(|| Error::Parse(format!("missing position for node {id}")))
                })
                .collect::<Result<Vec<_>>>()?,
        )
    };
    Graph::new(w, ids, positions)
}
