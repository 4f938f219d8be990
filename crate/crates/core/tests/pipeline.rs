use diffdecomp::estimate::decompose;
use diffdecomp::mc::{run_scenario, McConfig};
use diffdecomp::numkit::RngStream;
use diffdecomp::simulate::{simulate_panel, DgpConfig};

fn scenario(delta0: f64, alpha: f64, replications: usize) -> diffdecomp::mc::Scenario {
    let cfg = McConfig {
        replications,
        oracle_draws: 1_000,
        master_seed: 11,
        dgp: DgpConfig {
            n_villages: 10,
            delta0,
            alpha,
            ..DgpConfig::default()
        },
        ..McConfig::default()
    };
    cfg.scenarios().unwrap().remove(0)
}

#[test]
fn no_interaction_gives_zero_adm_and_unbiased_delta() {
    let r = run_scenario(&scenario(0.0, 0.0, 200)).unwrap();
    assert_eq!(r.true_adm.mean, 0.0);
    assert_eq!(r.failures, 0);
    let se = (r.delta_hat_se.powi(2) + r.true_delta.se.powi(2)).sqrt();
    assert!(
        (r.mean_delta_hat - r.true_delta.mean).abs() <= 3.0 * se,
        "{} vs {} (se {se})",
        r.mean_delta_hat,
        r.true_delta.mean
    );
    assert!(r.mean_est_adm.abs() <= 3.0 * 0.01);
}

#[test]
fn coverage_and_length_ordered_by_level() {
    let r = run_scenario(&scenario(0.5, 1.0, 100)).unwrap();
    let l = &r.levels;
    assert_eq!(
        l.iter().map(|x| x.level).collect::<Vec<_>>(),
        vec![0.99, 0.95, 0.90]
    );
    assert!(l[0].coverage >= l[1].coverage && l[1].coverage >= l[2].coverage);
    assert!(
        l[0].median_ci_length > l[1].median_ci_length
            && l[1].median_ci_length > l[2].median_ci_length
    );
    assert!(l[1].coverage >= 0.8);
}

#[test]
fn single_replication_is_the_direct_estimate() {
    let sc = scenario(0.5, 0.5, 1);
    let r = run_scenario(&sc).unwrap();
    let panel = simulate_panel(
        &sc.design().unwrap(),
        &sc.cfg,
        &mut RngStream::new(sc.master_seed, 0),
    )
    .unwrap();
    let d = decompose(&panel, &sc.omit, 0.95).unwrap();
    assert_eq!(r.mean_delta_hat, d.delta_hat);
    assert_eq!(
        r.levels[1].coverage,
        f64::from(u8::from(
            d.ci_low <= r.true_delta.mean && r.true_delta.mean <= d.ci_high
        ))
    );
}
