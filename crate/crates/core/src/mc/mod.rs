//! Monte Carlo study: scenario grids, replication loops and table output.

mod tables;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{confidence_interval, omega_with_pairs, Analysis, InfluenceSet};
use crate::graph::{stats, GraphStats};
use crate::multitest::stepdown;
use crate::numkit::{lower_median, mean_and_se, norm_cdf, Matrix, RngStream};
use crate::simulate::{
    adm_oracle, build_design, delta_oracle, pseudo_true_gamma, simulate_panel, Design, DgpConfig,
    McEstimate,
};

pub use tables::{emit_tables, write_report_json, TableFormat};

const DESIGN_STREAM: u64 = u64::MAX;
const ORACLE_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepdownSpec {
    /// Covariate columns tested one at a time.
    pub family: Vec<usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_stepdown_draws")]
    pub draws: usize,
}

fn default_alpha() -> f64 {
    0.05
}

fn default_stepdown_draws() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub label: String,
    pub cfg: DgpConfig,
    pub omit: Vec<usize>,
    pub replications: usize,
    pub ci_levels: Vec<f64>,
    pub oracle_draws: usize,
    pub master_seed: u64,
    pub stepdown: Option<StepdownSpec>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.replications == 0 {
            return Err(Error::InvalidConfig(
                "replications must be at least 1".into(),
            ));
        }
        if self.oracle_draws == 0 {
            return Err(Error::InvalidConfig(
                "oracle_draws must be at least 1".into(),
            ));
        }
        if self.ci_levels.is_empty() || self.ci_levels.iter().any(|&l| !(l > 0.0 && l < 1.0)) {
            return Err(Error::InvalidConfig(
                "ci_levels must be non-empty and inside (0, 1)".into(),
            ));
        }
        let p = self.cfg.p();
        if self.omit.is_empty() || self.omit.iter().any(|&s| s == 0 || s >= p) {
            return Err(Error::InvalidConfig(format!(
                "omit must list covariate columns in 1..{p}"
            )));
        }
        if let Some(sd) = &self.stepdown {
            if sd.family.is_empty() || sd.family.iter().any(|&s| s == 0 || s >= p) {
                return Err(Error::InvalidConfig(format!(
                    "stepdown family must list covariate columns in 1..{p}"
                )));
            }
        }
        Ok(())
    }

    /// The fixed network and covariates shared by every replication.
    pub fn design(&self) -> Result<Design> {
        build_design(
            &self.cfg,
            &mut RngStream::new(self.master_seed, DESIGN_STREAM),
        )
    }

    /// Stream feeding the true-value oracles.
    pub fn oracle_stream(&self) -> RngStream {
        RngStream::new(self.master_seed, ORACLE_STREAM)
    }
}

/// Optional lists that expand the base configuration into a grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub village_size: Vec<usize>,
    pub delta0: Vec<f64>,
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub replications: usize,
    pub oracle_draws: usize,
    pub master_seed: u64,
    pub omit: Vec<usize>,
    pub ci_levels: Vec<f64>,
    pub stepdown: Option<StepdownSpec>,
    pub dgp: DgpConfig,
    pub grid: Grid,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            replications: 1000,
            oracle_draws: 100_000,
            master_seed: 2024,
            omit: vec![3],
            ci_levels: vec![0.99, 0.95, 0.90],
            stepdown: None,
            dgp: DgpConfig::default(),
            grid: Grid::default(),
        }
    }
}

impl McConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Scenarios in grid order: village size, then δ0, then α.
    pub fn scenarios(&self) -> Result<Vec<Scenario>> {
        let or = |v: &Vec<f64>, d: f64| if v.is_empty() { vec![d] } else { v.clone() };
        let sizes = if self.grid.village_size.is_empty() {
            vec![self.dgp.village_size]
        } else {
            self.grid.village_size.clone()
        };
        let mut out = Vec::new();
        for &village_size in &sizes {
            for delta0 in or(&self.grid.delta0, self.dgp.delta0) {
                for alpha in or(&self.grid.alpha, self.dgp.alpha) {
                    let cfg = DgpConfig {
                        village_size,
                        delta0,
                        alpha,
                        ..self.dgp.clone()
                    };
                    let sc = Scenario {
                        label: format!("n{}_d{}_a{}", cfg.n(), delta0, alpha),
                        cfg,
                        omit: self.omit.clone(),
                        replications: self.replications,
                        ci_levels: self.ci_levels.clone(),
                        oracle_draws: self.oracle_draws,
                        master_seed: self.master_seed,
                        stepdown: self.stepdown.clone(),
                    };
                    sc.validate()?;
                    out.push(sc);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: f64,
    pub coverage: f64,
    pub median_ci_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub label: String,
    pub n: usize,
    pub village_size: usize,
    pub delta0: f64,
    pub alpha: f64,
    pub omit: Vec<usize>,
    pub replications: usize,
    pub failures: usize,
    pub contact_stats: GraphStats,
    pub observed_stats: GraphStats,
    pub true_adm: McEstimate,
    pub true_delta: McEstimate,
    pub true_c_empty: McEstimate,
    /// Mean of `Ĉ_∅` over successful replications.
    pub mean_est_adm: f64,
    pub mean_delta_hat: f64,
    /// Monte Carlo standard error of `mean_delta_hat`.
    pub delta_hat_se: f64,
    pub levels: Vec<LevelSummary>,
    pub sigma_clamp_rate: f64,
    pub failure_rate: f64,
    /// Family members whose omission leaves the initial-switch probabilities unchanged.
    pub null_set: Vec<usize>,
    /// Share of replications selecting any member of `null_set`.
    pub fwer: Option<f64>,
    /// Distinct failure messages with their counts.
    pub failure_reasons: Vec<(String, usize)>,
}

/// What one replication contributes to the aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Replication {
    pub c_hat_empty: f64,
    pub c_hat_s: f64,
    pub delta_hat: f64,
    pub sigma_hat: f64,
    pub clamped: bool,
    /// `(low, high)` for each configured level.
    pub intervals: Vec<(f64, f64)>,
    pub selected: Option<Vec<usize>>,
}

/// Columns `s` of the family whose omission leaves `Φ(X'γ*)` within `tol` of `Φ(X'γ0)`.
pub fn null_family(x: &Matrix, gamma0: &[f64], family: &[usize], tol: f64) -> Result<Vec<usize>> {
    let mu: Vec<f64> = x.mul_vec(gamma0).iter().map(|&z| norm_cdf(z)).collect();
    let mut out = Vec::new();
    for &s in family {
        let keep: Vec<usize> = (0..x.cols()).filter(|&c| c != s).collect();
        let g = pseudo_true_gamma(x, gamma0, &[s])?;
        let mu_s = x.select_columns(&keep).mul_vec(&g);
        if mu
            .iter()
            .zip(&mu_s)
            .all(|(a, &z)| (a - norm_cdf(z)).abs() <= tol)
        {
            out.push(s);
        }
    }
    Ok(out)
}

/// Estimates for one simulated dataset.
pub fn run_replication(sc: &Scenario, design: &Design, r: u64) -> Result<Replication> {
    let mut rng = RngStream::new(sc.master_seed, r);
    let panel = simulate_panel(design, &sc.cfg, &mut rng)?;
    let analysis = Analysis::new(&panel)?;
    let (res, _) = analysis.decompose(&sc.omit, sc.ci_levels[0])?;
    let intervals = sc
        .ci_levels
        .iter()
        .map(|&l| confidence_interval(res.delta_hat, res.sigma_hat, panel.n(), 1.0 - l))
        .collect::<Result<Vec<_>>>()?;
    let selected = match &sc.stepdown {
        None => None,
        Some(sd) => {
            let mut deltas = Vec::with_capacity(sd.family.len());
            let mut sets: Vec<InfluenceSet> = Vec::with_capacity(sd.family.len());
            for &s in &sd.family {
                let (d, inf) = analysis.decompose(&[s], sc.ci_levels[0])?;
                deltas.push(d.delta_hat);
                sets.push(inf);
            }
            let omega = omega_with_pairs(&analysis.pairs, &sets)?;
            let out = stepdown(
                &sd.family,
                &deltas,
                &omega,
                panel.n(),
                sd.alpha,
                sd.draws,
                &rng.derive(0),
            )?;
            Some(out.selected)
        }
    };
    Ok(Replication {
        c_hat_empty: res.c_hat_empty,
        c_hat_s: res.c_hat_s,
        delta_hat: res.delta_hat,
        sigma_hat: res.sigma_hat,
        clamped: res.clamped,
        intervals,
        selected,
    })
}

/// Oracle truths, `replications` estimation runs and their aggregates.
/// Replication `r` draws from `RngStream::new(master_seed, r)`; results are
/// collected by index so the report does not depend on the thread count.
pub fn run_scenario(sc: &Scenario) -> Result<McReport> {
    sc.validate()?;
    let design = sc.design()?;
    let model = sc.cfg.model();
    let oracle_rng = sc.oracle_stream();
    let true_adm = adm_oracle(
        &design.contact,
        &design.x,
        &model,
        sc.oracle_draws,
        &oracle_rng,
    )?;
    let truth = delta_oracle(
        &design.contact,
        &design.observed,
        &design.x,
        &model,
        &sc.omit,
        sc.oracle_draws,
        &oracle_rng,
    )?;
    let null_set = match &sc.stepdown {
        Some(sd) => null_family(&design.x, &sc.cfg.gamma0, &sd.family, 1e-8)?,
        None => Vec::new(),
    };

    let outcomes: Vec<std::result::Result<Replication, String>> = (0..sc.replications as u64)
        .into_par_iter()
        .map(|r| run_replication(sc, &design, r).map_err(|e| e.to_string()))
        .collect();
    let ok: Vec<&Replication> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let mut failure_reasons: Vec<(String, usize)> = Vec::new();
    for msg in outcomes.iter().filter_map(|o| o.as_ref().err()) {
        match failure_reasons.iter_mut().find(|(m, _)| m == msg) {
            Some((_, c)) => *c += 1,
            None => failure_reasons.push((msg.clone(), 1)),
        }
    }
    let failures = sc.replications - ok.len();
    let m = ok.len() as f64;
    let mean = |f: &dyn Fn(&Replication) -> f64| {
        if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().map(|r| f(r)).sum::<f64>() / m
        }
    };
    let target = truth.delta_s.mean;
    let levels = sc
        .ci_levels
        .iter()
        .enumerate()
        .map(|(k, &level)| {
            let covered = ok
                .iter()
                .filter(|r| r.intervals[k].0 <= target && target <= r.intervals[k].1)
                .count();
            let lengths: Vec<f64> = ok
                .iter()
                .map(|r| r.intervals[k].1 - r.intervals[k].0)
                .collect();
            LevelSummary {
                level,
                coverage: if ok.is_empty() {
                    f64::NAN
                } else {
                    covered as f64 / m
                },
                median_ci_length: lower_median(&lengths).unwrap_or(f64::NAN),
            }
        })
        .collect();
    let fwer = match (&sc.stepdown, null_set.is_empty(), ok.is_empty()) {
        (Some(_), false, false) => {
            let hits = ok
                .iter()
                .filter(|r| {
                    r.selected
                        .as_ref()
                        .is_some_and(|sel| sel.iter().any(|s| null_set.contains(s)))
                })
                .count();
            Some(hits as f64 / m)
        }
        _ => None,
    };
    Ok(McReport {
        label: sc.label.clone(),
        n: sc.cfg.n(),
        village_size: sc.cfg.village_size,
        delta0: sc.cfg.delta0,
        alpha: sc.cfg.alpha,
        omit: sc.omit.clone(),
        replications: sc.replications,
        failures,
        contact_stats: stats(&design.contact),
        observed_stats: stats(&design.observed),
        true_adm,
        true_delta: truth.delta_s,
        true_c_empty: truth.c_empty,
        mean_est_adm: mean(&|r| r.c_hat_empty),
        mean_delta_hat: mean(&|r| r.delta_hat),
        delta_hat_se: mean_and_se(&ok.iter().map(|r| r.delta_hat).collect::<Vec<_>>()).1,
        levels,
        sigma_clamp_rate: mean(&|r| f64::from(u8::from(r.clamped))),
        failure_rate: failures as f64 / sc.replications as f64,
        null_set,
        fwer,
        failure_reasons,
    })
}

/// Runs every scenario in order.
pub fn run_all(scenarios: &[Scenario]) -> Result<Vec<McReport>> {
    scenarios.iter().map(run_scenario).collect()
}
