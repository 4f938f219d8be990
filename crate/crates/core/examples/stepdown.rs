//! Step-down selection of covariates whose omission causes spurious
//! diffusion, on one simulated panel.
//!
//! cargo run --release --example stepdown -- [seed]

use diffdecomp::estimate::{omega_with_pairs, Analysis};
use diffdecomp::multitest::stepdown;
use diffdecomp::numkit::RngStream;
use diffdecomp::simulate::{build_design, simulate_panel, DgpConfig};

fn main() -> diffdecomp::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .map_or(2024, |s| s.parse().expect("seed"));

    let cfg = DgpConfig::default();
    let design = build_design(&cfg, &mut RngStream::new(seed, 0))?;
    let panel = simulate_panel(&design, &cfg, &mut RngStream::new(seed, 1))?;
    let analysis = Analysis::new(&panel)?;

    let family = [1, 2, 3];
    let mut deltas = Vec::new();
    let mut sets = Vec::new();
    for s in family {
        let (r, inf) = analysis.decompose(&[s], 0.95)?;
        deltas.push(r.delta_hat);
        sets.push(inf);
    }
    let omega = omega_with_pairs(&analysis.pairs, &sets)?;
    let out = stepdown(
        &family,
        &deltas,
        &omega,
        panel.n(),
        0.05,
        10_000,
        &RngStream::new(seed, 2),
    )?;

    for (k, s) in family.iter().enumerate() {
        println!(
            "x{s}: Delta = {:+.4}, T = {:.3}",
            deltas[k], out.statistics[k]
        );
    }
    for (t, step) in out.trace.iter().enumerate() {
        println!(
            "step {}: active {:?}, critical value {:.3}, rejected {:?}",
            t + 1,
            step.active,
            step.critical_value,
            step.rejected
        );
    }
    println!("selected: {:?}", out.selected);
    Ok(())
}
