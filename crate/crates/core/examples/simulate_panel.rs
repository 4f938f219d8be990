//! Simulates one panel from the default design and writes it as CSV with the
//! contact and observed edge lists.
//!
//! cargo run --release --example simulate_panel -- <out-dir> [seed]

use std::path::PathBuf;

use diffdecomp::graph::write_edge_list;
use diffdecomp::io::write_panel;
use diffdecomp::numkit::RngStream;
use diffdecomp::simulate::{build_design, simulate_panel, DgpConfig};

fn main() -> diffdecomp::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "panel_out".into()));
    let seed: u64 = args.next().map_or(2024, |s| s.parse().expect("seed"));

    let cfg = DgpConfig::default();
    let design = build_design(&cfg, &mut RngStream::new(seed, 0))?;
    let panel = simulate_panel(&design, &cfg, &mut RngStream::new(seed, 1))?;

    std::fs::create_dir_all(&out)?;
    write_panel(&out.join("panel.csv"), &panel)?;
    write_edge_list(&out.join("contact.csv"), &design.contact)?;
    write_edge_list(&out.join("observed.csv"), &design.observed)?;

    let initial = panel.y0.iter().filter(|&&y| y == 1).count();
    let later = panel.y1.iter().filter(|&&y| y == 1).count();
    println!(
        "n = {}, initial adopters = {initial}, later adopters = {later}",
        panel.n()
    );
    println!(
        "wrote panel.csv, contact.csv, observed.csv to {}",
        out.display()
    );
    Ok(())
}
