use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    block_diagonal, gen_ba_village, gen_er, observed_from_contact, BaConfig, DirectedGraph,
    Orientation,
};
use crate::numkit::{norm_cdf, Matrix, RngStream};

use super::diffuse::{diffuse_with_rule, Exposure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DgpConfig {
    pub n_villages: usize,
    pub village_size: usize,
    /// Coefficients of the initial-switch probit; entry 0 is the intercept.
    pub gamma0: Vec<f64>,
    /// Coefficients of the diffusion threshold; entry 0 is the intercept.
    pub beta0: Vec<f64>,
    pub delta0: f64,
    /// Weight on the contact network when mixing covariates across nodes.
    pub alpha: f64,
    pub t1: usize,
    pub seed_size: usize,
    pub seed_p: f64,
    pub m: usize,
    pub orientation: Orientation,
    pub exposure: Exposure,
}

impl Default for DgpConfig {
    fn default() -> Self {
        let ba = BaConfig::default();
        Self {
            n_villages: 30,
            village_size: ba.village_size,
            gamma0: vec![0.6, -0.1, -0.3, 0.3],
            beta0: vec![-1.0, 0.3, -0.4, -0.1],
            delta0: 0.5,
            alpha: 1.0,
            t1: 2,
            seed_size: ba.seed_size,
            seed_p: ba.seed_p,
            m: ba.m,
            orientation: ba.orientation,
            exposure: Exposure::LastPeriod,
        }
    }
}

impl DgpConfig {
    /// Number of columns of `X`, intercept included.
    pub fn p(&self) -> usize {
        self.gamma0.len()
    }

    pub fn n(&self) -> usize {
        self.n_villages * self.village_size
    }

    pub fn ba(&self) -> BaConfig {
        BaConfig {
            village_size: self.village_size,
            seed_size: self.seed_size,
            seed_p: self.seed_p,
            m: self.m,
            orientation: self.orientation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma0.is_empty() {
            return Err(Error::InvalidConfig(
                "gamma0 must have at least the intercept".into(),
            ));
        }
        if self.beta0.len() != self.gamma0.len() {
            return Err(Error::InvalidConfig(format!(
                "gamma0 has {} entries but beta0 has {}",
                self.gamma0.len(),
                self.beta0.len()
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!(
                "alpha = {} outside [0, 1]",
                self.alpha
            )));
        }
        if self.t1 == 0 {
            return Err(Error::InvalidConfig("t1 must be at least 1".into()));
        }
        if self.n() == 0 {
            return Err(Error::InvalidConfig("network has no nodes".into()));
        }
        if self
            .gamma0
            .iter()
            .chain(&self.beta0)
            .any(|v| !v.is_finite())
            || !self.delta0.is_finite()
        {
            return Err(Error::InvalidConfig("coefficients must be finite".into()));
        }
        self.ba().validate()
    }
}

/// The parts of a scenario held fixed across replications.
#[derive(Debug, Clone)]
pub struct Design {
    pub contact: DirectedGraph,
    pub observed: DirectedGraph,
    pub x: Matrix,
}

/// One realised dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelData {
    pub x: Matrix,
    pub y0: Vec<u8>,
    pub y1: Vec<u8>,
    pub observed: DirectedGraph,
}

impl PanelData {
    pub fn n(&self) -> usize {
        self.y0.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x.rows();
        for len in [self.y0.len(), self.y1.len(), self.observed.n()] {
            if len != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        if self.y0.iter().chain(&self.y1).any(|&v| v > 1) {
            return Err(Error::InvalidConfig("actions must be 0 or 1".into()));
        }
        Ok(())
    }
}

/// Block-diagonal contact network of independent preferential-attachment villages.
pub fn gen_contact(cfg: &DgpConfig, rng: &mut RngStream) -> Result<DirectedGraph> {
    cfg.validate()?;
    let ba = cfg.ba();
    let villages = (0..cfg.n_villages)
        .map(|_| gen_ba_village(&ba, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(block_diagonal(&villages))
}

/// `X = [1, (αE_c + (1-α)Ẽ + I) X̃]` with `X̃` iid uniform and `Ẽ` a directed
/// Erdős–Rényi graph with the edge density of the contact network.
pub fn gen_covariates(
    contact: &DirectedGraph,
    cfg: &DgpConfig,
    rng: &mut RngStream,
) -> Result<Matrix> {
    cfg.validate()?;
    let n = contact.n();
    let q = cfg.p() - 1;
    let raw: Vec<f64> = (0..n * q).map(|_| rng.uniform()).collect();
    let density = if n > 1 {
        contact.edge_count() as f64 / (n * (n - 1)) as f64
    } else {
        0.0
    };
    let noise = gen_er(n, density, true, rng)?;

    let mut x = Matrix::zeros(n, cfg.p());
    for i in 0..n {
        let row = x.row_mut(i);
        row[0] = 1.0;
        let own = &raw[i * q..(i + 1) * q];
        row[1..].copy_from_slice(own);
        for (graph, w) in [(contact, cfg.alpha), (&noise, 1.0 - cfg.alpha)] {
            if w == 0.0 {
                continue;
            }
            for &j in graph.in_nbrs(i) {
                for (dst, src) in row[1..].iter_mut().zip(&raw[j * q..(j + 1) * q]) {
                    *dst += w * src;
                }
            }
        }
    }
    Ok(x)
}

/// Initial actions `Y0_j = 1{Φ(X_j'γ0) ≥ U_j}` with `U_j` uniform.
pub fn gen_initial(x: &Matrix, gamma0: &[f64], rng: &mut RngStream) -> Result<Vec<u8>> {
    if gamma0.len() != x.cols() {
        return Err(Error::SizeMismatch {
            expected: x.cols(),
            got: gamma0.len(),
        });
    }
    Ok(x.mul_vec(gamma0)
        .into_iter()
        .map(|z| u8::from(norm_cdf(z) >= rng.uniform()))
        .collect())
}

/// Contact network, its observed graph (the causal graph at horizon `t1`)
/// and covariates, drawn in that order from `rng`.
pub fn build_design(cfg: &DgpConfig, rng: &mut RngStream) -> Result<Design> {
    let contact = gen_contact(cfg, rng)?;
    let observed = observed_from_contact(&contact, cfg.t1);
    let x = gen_covariates(&contact, cfg, rng)?;
    Ok(Design {
        contact,
        observed,
        x,
    })
}

/// One dataset on a fixed design: initial actions, then diffusion.
pub fn simulate_panel(design: &Design, cfg: &DgpConfig, rng: &mut RngStream) -> Result<PanelData> {
    let y0 = gen_initial(&design.x, &cfg.gamma0, rng)?;
    let rule = cfg.exposure.rule();
    let path = diffuse_with_rule(
        &design.contact,
        &design.x,
        &cfg.beta0,
        cfg.delta0,
        cfg.t1,
        &y0,
        rule,
        rng,
    )?;
    Ok(PanelData {
        x: design.x.clone(),
        y0,
        y1: path.y1,
        observed: design.observed.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(alpha: f64) -> DgpConfig {
        DgpConfig {
            n_villages: 4,
            village_size: 30,
            seed_size: 10,
            seed_p: 0.2,
            alpha,
            ..DgpConfig::default()
        }
    }

    #[test]
    fn default_config_is_valid() {
        let cfg = DgpConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.n(), 1500);
        assert_eq!(cfg.p(), 4);
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            DgpConfig {
                alpha: 1.5,
                ..DgpConfig::default()
            },
            DgpConfig {
                t1: 0,
                ..DgpConfig::default()
            },
            DgpConfig {
                beta0: vec![1.0],
                ..DgpConfig::default()
            },
            DgpConfig {
                seed_size: 60,
                ..DgpConfig::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn covariates_without_edges_are_raw_uniforms() {
        let g = DirectedGraph::empty(50);
        let cfg = small_cfg(0.5);
        let x = gen_covariates(&g, &cfg, &mut RngStream::new(1, 0)).unwrap();
        let mut rng = RngStream::new(1, 0);
        for i in 0..50 {
            assert_eq!(x[(i, 0)], 1.0);
            for s in 1..4 {
                assert_eq!(x[(i, s)], rng.uniform());
            }
        }
    }

    #[test]
    fn covariates_alpha_one_sum_contact_neighbours() {
        let g = DirectedGraph::from_edges(4, [(1, 0), (2, 0), (0, 3)]).unwrap();
        let cfg = small_cfg(1.0);
        let x = gen_covariates(&g, &cfg, &mut RngStream::new(2, 0)).unwrap();
        let mut rng = RngStream::new(2, 0);
        let raw: Vec<f64> = (0..12).map(|_| rng.uniform()).collect();
        for s in 0..3 {
            assert_eq!(x[(0, s + 1)], raw[s] + 1.0 * raw[3 + s] + 1.0 * raw[6 + s]);
            assert_eq!(x[(1, s + 1)], raw[3 + s]);
            assert_eq!(x[(3, s + 1)], raw[9 + s] + 1.0 * raw[s]);
        }
    }

    #[test]
    fn covariates_correlate_along_edges_at_alpha_one() {
        // Pair (0,1) adjacent; pair (2,3) unrelated.
        let g = DirectedGraph::from_edges(4, [(0, 1)]).unwrap();
        let cfg = DgpConfig {
            n_villages: 1,
            village_size: 4,
            seed_size: 4,
            ..small_cfg(1.0)
        };
        let draws = 10_000;
        let (mut a, mut b, mut c, mut d) = (vec![], vec![], vec![], vec![]);
        for r in 0..draws {
            let x = gen_covariates(&g, &cfg, &mut RngStream::new(3, r)).unwrap();
            a.push(x[(0, 1)]);
            b.push(x[(1, 1)]);
            c.push(x[(2, 1)]);
            d.push(x[(3, 1)]);
        }
        let cov = |u: &[f64], v: &[f64]| {
            let mu = u.iter().sum::<f64>() / u.len() as f64;
            let mv = v.iter().sum::<f64>() / v.len() as f64;
            u.iter()
                .zip(v)
                .map(|(x, y)| (x - mu) * (y - mv))
                .sum::<f64>()
                / (u.len() - 1) as f64
        };
        // Theoretical covariance of the adjacent pair is var(U) = 1/12.
        assert!((cov(&a, &b) - 1.0 / 12.0).abs() < 0.01);
        assert!(cov(&c, &d).abs() < 0.01);
    }

    #[test]
    fn initial_actions_extremes() {
        let x = Matrix::from_row_major(200, 1, vec![1.0; 200]).unwrap();
        let y = gen_initial(&x, &[40.0], &mut RngStream::new(4, 0)).unwrap();
        assert!(y.iter().all(|&v| v == 1));
        let y = gen_initial(&x, &[0.0], &mut RngStream::new(4, 1)).unwrap();
        let m = y.iter().map(|&v| f64::from(v)).sum::<f64>() / 200.0;
        assert!((m - 0.5).abs() < 3.0 * (0.25f64 / 200.0).sqrt());
    }

    #[test]
    fn initial_actions_match_conditional_mean() {
        let cfg = small_cfg(1.0);
        let design = build_design(&cfg, &mut RngStream::new(5, 0)).unwrap();
        let mu: f64 = design
            .x
            .mul_vec(&cfg.gamma0)
            .iter()
            .map(|&z| norm_cdf(z))
            .sum::<f64>()
            / 120.0;
        let reps = 400;
        let means: Vec<f64> = (0..reps)
            .map(|r| {
                let y = gen_initial(&design.x, &cfg.gamma0, &mut RngStream::new(6, r)).unwrap();
                y.iter().map(|&v| f64::from(v)).sum::<f64>() / 120.0
            })
            .collect();
        let (m, se) = crate::numkit::mean_and_se(&means);
        assert!((m - mu).abs() < 3.0 * se, "{m} vs {mu} (se {se})");
    }

    #[test]
    fn design_is_reproducible_and_observed_equals_causal() {
        let cfg = small_cfg(0.5);
        let a = build_design(&cfg, &mut RngStream::new(7, 0)).unwrap();
        let b = build_design(&cfg, &mut RngStream::new(7, 0)).unwrap();
        assert_eq!(a.contact, b.contact);
        assert_eq!(a.x, b.x);
        assert_eq!(a.observed, crate::graph::causal_graph(&a.contact, cfg.t1));
        assert!(crate::graph::contains_subgraph(&a.observed, &a.contact).unwrap());
    }

    #[test]
    fn alpha_only_changes_mixing() {
        let d0 = build_design(&small_cfg(0.0), &mut RngStream::new(8, 0)).unwrap();
        let d1 = build_design(&small_cfg(1.0), &mut RngStream::new(8, 0)).unwrap();
        assert_eq!(d0.contact, d1.contact);
        assert_ne!(d0.x, d1.x);
    }

    #[test]
    fn panel_is_consistent() {
        let cfg = small_cfg(1.0);
        let design = build_design(&cfg, &mut RngStream::new(9, 0)).unwrap();
        let panel = simulate_panel(&design, &cfg, &mut RngStream::new(9, 1)).unwrap();
        panel.validate().unwrap();
        assert!(panel.y0.iter().zip(&panel.y1).all(|(a, b)| a + b <= 1));
    }
}
