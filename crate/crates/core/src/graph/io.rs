use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DirectedGraph;
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRow {
    from: usize,
    to: usize,
}

/// Writes `from,to` rows, one per directed edge (`from` influences `to`).
pub fn write_edge_list(path: &Path, g: &DirectedGraph) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if g.edge_count() == 0 {
        w.write_record(["from", "to"])?;
    }
    for (from, to) in g.edges() {
        w.serialize(EdgeRow { from, to })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an edge list for a graph on `n` nodes.
pub fn read_edge_list(path: &Path, n: usize) -> Result<DirectedGraph> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.iter().map(str::trim).ne(["from", "to"]) {
        return Err(Error::Format {
            path: path.to_owned(),
            msg: format!("expected header `from,to`, got {headers:?}"),
        });
    }
    let mut edges = Vec::new();
    for row in r.deserialize::<EdgeRow>() {
        let row = row?;
        edges.push((row.from, row.to));
    }
    DirectedGraph::from_edges(n, edges).map_err(|e| Error::Format {
        path: path.to_owned(),
        msg: e.to_string(),
    })
}
