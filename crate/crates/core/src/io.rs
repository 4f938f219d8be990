//! Panel data as CSV: columns `x0..x{p-1}`, `y0`, `y1`, one row per node.

use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{read_edge_list, write_edge_list, DirectedGraph};
use crate::numkit::Matrix;
use crate::simulate::PanelData;

pub fn write_panel(path: &Path, panel: &PanelData) -> Result<()> {
    panel.validate()?;
    let mut w = csv::Writer::from_path(path)?;
    let p = panel.x.cols();
    let mut header: Vec<String> = (0..p).map(|c| format!("x{c}")).collect();
    header.push("y0".into());
    header.push("y1".into());
    w.write_record(&header)?;
    for i in 0..panel.n() {
        let mut rec: Vec<String> = panel.x.row(i).iter().map(f64::to_string).collect();
        rec.push(panel.y0[i].to_string());
        rec.push(panel.y1[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn format_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

/// Reads `x`, `y0`, `y1` from `path`; the observed graph is supplied separately.
pub fn read_panel(path: &Path, observed: DirectedGraph) -> Result<PanelData> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let cols = header.len();
    if cols < 3 || &header[cols - 2] != "y0" || &header[cols - 1] != "y1" {
        return Err(format_err(path, "header must be x0,...,x{p-1},y0,y1"));
    }
    let p = cols - 2;
    for (c, name) in header.iter().take(p).enumerate() {
        if name != format!("x{c}") {
            return Err(format_err(
                path,
                format!("column {c} is `{name}`, expected `x{c}`"),
            ));
        }
    }
    let mut data = Vec::new();
    let (mut y0, mut y1) = (Vec::new(), Vec::new());
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        for c in 0..p {
            let v: f64 = rec[c].trim().parse().map_err(|_| {
                format_err(path, format!("row {}: bad number `{}`", row + 1, &rec[c]))
            })?;
            data.push(v);
        }
        for (dst, c) in [(&mut y0, p), (&mut y1, p + 1)] {
            match rec[c].trim() {
                "0" => dst.push(0u8),
                "1" => dst.push(1u8),
                other => {
                    return Err(format_err(
                        path,
                        format!("row {}: action `{other}` is not 0 or 1", row + 1),
                    ))
                }
            }
        }
    }
    let n = y0.len();
    let panel = PanelData {
        x: Matrix::from_row_major(n, p, data)?,
        y0,
        y1,
        observed,
    };
    panel.validate()?;
    Ok(panel)
}

/// Panel CSV plus an observed-graph edge list over the same nodes.
pub fn read_panel_with_graph(data: &Path, graph: &Path) -> Result<PanelData> {
    let mut r = csv::Reader::from_path(data)?;
    let n = r.records().count();
    read_panel(data, read_edge_list(graph, n)?)
}

pub fn write_panel_with_graph(data: &Path, graph: &Path, panel: &PanelData) -> Result<()> {
    write_panel(data, panel)?;
    write_edge_list(graph, &panel.observed)
}
