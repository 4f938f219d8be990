//! Estimated diffusion measure with and without each covariate, the
//! spurious part and its confidence interval, next to the oracle truth.
//!
//! cargo run --release --example decompose -- [alpha] [seed]

use diffdecomp::estimate::Analysis;
use diffdecomp::numkit::RngStream;
use diffdecomp::simulate::{build_design, delta_oracle, simulate_panel, DgpConfig};

fn main() -> diffdecomp::Result<()> {
    let mut args = std::env::args().skip(1);
    let alpha: f64 = args.next().map_or(1.0, |s| s.parse().expect("alpha"));
    let seed: u64 = args.next().map_or(2024, |s| s.parse().expect("seed"));

    let cfg = DgpConfig {
        alpha,
        ..DgpConfig::default()
    };
    let design = build_design(&cfg, &mut RngStream::new(seed, 0))?;
    let panel = simulate_panel(&design, &cfg, &mut RngStream::new(seed, 1))?;
    let analysis = Analysis::new(&panel)?;
    println!(
        "estimated ADM (no covariate omitted): {:.4}",
        analysis.c_hat_empty
    );

    println!(
        "{:>8} {:>9} {:>9} {:>9} {:>22} {:>9}",
        "omit", "C_S", "Delta", "sigma", "95% CI", "true"
    );
    for omit in [vec![1], vec![2], vec![3], vec![1, 2, 3]] {
        let (r, _) = analysis.decompose(&omit, 0.95)?;
        let truth = delta_oracle(
            &design.contact,
            &design.observed,
            &design.x,
            &cfg.model(),
            &omit,
            500,
            &RngStream::new(seed, 2),
        )?;
        println!(
            "{:>8} {:>9.4} {:>9.4} {:>9.4} {:>22} {:>9.4}",
            format!("{omit:?}"),
            r.c_hat_s,
            r.delta_hat,
            r.sigma_hat,
            format!("[{:.4}, {:.4}]", r.ci_low, r.ci_high),
            truth.delta_s.mean
        );
    }
    Ok(())
}
