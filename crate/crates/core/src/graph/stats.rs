use serde::{Deserialize, Serialize};

use super::DirectedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    /// `⌈max_i (in_i + out_i) / 2⌉`.
    pub max_degree: usize,
    /// `Σ_i (in_i + out_i) / 2 / n`, i.e. directed edges per node.
    pub avg_degree: f64,
    /// Global transitivity of the undirected skeleton.
    pub clustering: f64,
}

pub fn stats(g: &DirectedGraph) -> GraphStats {
    let n = g.n();
    if n == 0 {
        return GraphStats {
            max_degree: 0,
            avg_degree: 0.0,
            clustering: 0.0,
        };
    }
    let out = g.out_neighbors();
    let max_total = (0..n)
        .map(|i| g.in_degree(i) + out[i].len())
        .max()
        .unwrap_or(0);
    let avg_degree = g.edge_count() as f64 / n as f64;

    let skeleton: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut s: Vec<usize> = g.in_nbrs(i).iter().chain(&out[i]).copied().collect();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    let mut closed = 0u64;
    let mut triples = 0u64;
    for nb in &skeleton {
        let d = nb.len() as u64;
        triples += d * d.saturating_sub(1) / 2;
        for (a, &u) in nb.iter().enumerate() {
            for &w in &nb[a + 1..] {
                if skeleton[u].binary_search(&w).is_ok() {
                    closed += 1;
                }
            }
        }
    }
    let clustering = if triples == 0 {
        0.0
    } else {
        closed as f64 / triples as f64
    };
    GraphStats {
        max_degree: max_total.div_ceil(2),
        avg_degree,
        clustering,
    }
}
