//! Contact network for the default village design, the observed graph it
//! implies, and their summary statistics.
//!
//! cargo run --release --example graph_construction -- [seed]

use diffdecomp::graph::{
    causal_graph, contains_subgraph, observed_from_contact, stats, DirectedGraph,
};
use diffdecomp::numkit::RngStream;
use diffdecomp::simulate::{gen_contact, DgpConfig};

fn main() -> diffdecomp::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .map_or(2024, |s| s.parse().expect("seed"));

    // Three-node cycle 1 <- 2 <- 3 <- 1 with two periods of diffusion.
    let cycle = DirectedGraph::from_edges(3, [(1, 0), (2, 1), (0, 2)])?;
    let causal = causal_graph(&cycle, 2);
    let edges: Vec<String> = causal
        .edges()
        .map(|(j, i)| format!("{}{}", i + 1, j + 1))
        .collect();
    println!("3-cycle causal graph, t1 = 2: {}", edges.join(" "));

    let cfg = DgpConfig::default();
    let contact = gen_contact(&cfg, &mut RngStream::new(seed, 0))?;
    let observed = observed_from_contact(&contact, cfg.t1);
    println!(
        "causal graph inside observed: {}",
        contains_subgraph(&observed, &causal_graph(&contact, cfg.t1))?
    );
    for (name, g) in [("contact", &contact), ("observed", &observed)] {
        let s = stats(g);
        println!(
            "{name:>8}: n = {}, edges = {}, max degree = {}, average degree = {:.4}, clustering = {:.4}",
            g.n(),
            g.edge_count(),
            s.max_degree,
            s.avg_degree,
            s.clustering
        );
    }
    Ok(())
}
