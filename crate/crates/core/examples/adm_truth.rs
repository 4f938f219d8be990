//! True average diffusion at the margin for the default design across the
//! covariate-alignment grid.
//!
//! cargo run --release --example adm_truth -- [draws] [seed]

use diffdecomp::numkit::RngStream;
use diffdecomp::simulate::{adm_oracle, build_design, DgpConfig};

fn main() -> diffdecomp::Result<()> {
    let mut args = std::env::args().skip(1);
    let draws: usize = args.next().map_or(20_000, |s| s.parse().expect("draws"));
    let seed: u64 = args.next().map_or(2024, |s| s.parse().expect("seed"));

    for delta0 in [0.0, 0.5] {
        for alpha in [1.0, 0.5, 0.0] {
            let cfg = DgpConfig {
                delta0,
                alpha,
                ..DgpConfig::default()
            };
            let design = build_design(&cfg, &mut RngStream::new(seed, 0))?;
            let started = std::time::Instant::now();
            let adm = adm_oracle(
                &design.contact,
                &design.x,
                &cfg.model(),
                draws,
                &RngStream::new(seed, 1),
            )?;
            println!(
                "delta0 = {delta0:.1}  alpha = {alpha:.1}  ADM = {:.4} (s.e. {:.4}, {} draws, {:.1}s)",
                adm.mean,
                adm.se,
                adm.draws,
                started.elapsed().as_secs_f64()
            );
        }
    }
    Ok(())
}
