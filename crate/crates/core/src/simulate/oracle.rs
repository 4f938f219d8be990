use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{probit_newton, NewtonOptions};
use crate::graph::DirectedGraph;
use crate::numkit::{mean_and_se, norm_cdf, norm_sf, Matrix, RngStream};

use super::dgp::{gen_initial, DgpConfig};
use super::diffuse::{
    diffuse_with_shocks, draw_shocks, switches, DiffusionPath, Exposure, ExposureRule,
};

/// Structural coefficients of the initial-action and diffusion equations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionModel {
    pub gamma0: Vec<f64>,
    pub beta0: Vec<f64>,
    pub delta0: f64,
    pub t1: usize,
    #[serde(default)]
    pub exposure: Exposure,
}

impl DgpConfig {
    pub fn model(&self) -> DiffusionModel {
        DiffusionModel {
            gamma0: self.gamma0.clone(),
            beta0: self.beta0.clone(),
            delta0: self.delta0,
            t1: self.t1,
            exposure: self.exposure,
        }
    }
}

impl DiffusionModel {
    fn check(&self, contact: &DirectedGraph, x: &Matrix) -> Result<()> {
        if x.rows() != contact.n() {
            return Err(Error::SizeMismatch {
                expected: contact.n(),
                got: x.rows(),
            });
        }
        for len in [self.gamma0.len(), self.beta0.len()] {
            if len != x.cols() {
                return Err(Error::SizeMismatch {
                    expected: x.cols(),
                    got: len,
                });
            }
        }
        if self.t1 == 0 {
            return Err(Error::InvalidConfig("t1 must be at least 1".into()));
        }
        Ok(())
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub draws: usize,
}

impl McEstimate {
    pub fn from_draws(values: &[f64]) -> Self {
        let (mean, se) = mean_and_se(values);
        Self {
            mean,
            se,
            draws: values.len(),
        }
    }
}

/// Nodes reachable from each node along at most `t1` contact edges, the
/// node itself excluded.
pub fn forward_reach(contact: &DirectedGraph, t1: usize) -> Vec<Vec<usize>> {
    let out = contact.out_neighbors();
    let n = contact.n();
    let mut seen = vec![usize::MAX; n];
    (0..n)
        .map(|j| {
            seen[j] = j;
            let mut reach = Vec::new();
            let mut frontier = vec![j];
            for _ in 0..t1 {
                let mut next = Vec::new();
                for &u in &frontier {
                    for &v in &out[u] {
                        if seen[v] != j {
                            seen[v] = j;
                            next.push(v);
                        }
                    }
                }
                reach.extend_from_slice(&next);
                frontier = next;
            }
            reach.sort_unstable();
            reach
        })
        .collect()
}

/// Counterfactual re-simulation that flips one initial action and
/// recomputes only the nodes the flip can reach. Every recomputed action
/// goes through the same exposure and threshold arithmetic as the full
/// simulation, so the result is identical to re-running the whole network.
pub struct LocalResim<'a> {
    contact: &'a DirectedGraph,
    reach: &'a [Vec<usize>],
    index: &'a [f64],
    delta0: f64,
    shocks: &'a Matrix,
    rule: &'a dyn ExposureRule,
    base: &'a DiffusionPath,
    base_adopted: Vec<Vec<u8>>,
    work: Vec<Vec<u8>>,
    adopted: Vec<Vec<u8>>,
}

fn adopted_by_period(actions: &[Vec<u8>]) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = Vec::with_capacity(actions.len());
    for a in actions {
        let next = match out.last() {
            Some(prev) => prev.iter().zip(a).map(|(p, x)| p | x).collect(),
            None => a.clone(),
        };
        out.push(next);
    }
    out
}

impl<'a> LocalResim<'a> {
    pub fn new(
        contact: &'a DirectedGraph,
        reach: &'a [Vec<usize>],
        index: &'a [f64],
        delta0: f64,
        shocks: &'a Matrix,
        rule: &'a dyn ExposureRule,
        base: &'a DiffusionPath,
    ) -> Self {
        let base_adopted = adopted_by_period(&base.actions);
        Self {
            contact,
            reach,
            index,
            delta0,
            shocks,
            rule,
            base,
            adopted: base_adopted.clone(),
            base_adopted,
            work: base.actions.clone(),
        }
    }

    fn run(&mut self, j: usize) {
        let t1 = self.shocks.rows();
        self.work[0][j] = 1 - self.base.actions[0][j];
        self.adopted[0][j] = self.work[0][j];
        for t in 1..=t1 {
            let u = self.shocks.row(t - 1);
            for &i in std::iter::once(&j).chain(&self.reach[j]) {
                let done = self.adopted[t - 1][i];
                let a = if done == 1 {
                    0
                } else {
                    let e = self.rule.exposure(
                        i,
                        self.contact.in_nbrs(i),
                        &self.work[t - 1],
                        &self.adopted[t - 1],
                    );
                    switches(self.delta0, e, self.index[i], u[i])
                };
                self.work[t][i] = a;
                self.adopted[t][i] = done | a;
            }
        }
    }

    fn y1_at(&self, i: usize) -> u8 {
        self.work[1..].iter().map(|a| a[i]).sum()
    }

    fn restore(&mut self, j: usize) {
        let pairs = self
            .work
            .iter_mut()
            .zip(&self.base.actions)
            .chain(self.adopted.iter_mut().zip(&self.base_adopted));
        for (w, b) in pairs {
            w[j] = b[j];
            for &i in &self.reach[j] {
                w[i] = b[i];
            }
        }
    }

    /// `Σ_{i≠j} [Y_i(t1) | Y0_j = 1] - [Y_i(t1) | Y0_j = 0]` under the shocks of this draw.
    pub fn marginal(&mut self, j: usize) -> i64 {
        self.run(j);
        let flipped: i64 = self.reach[j]
            .iter()
            .map(|&i| i64::from(self.y1_at(i)) - i64::from(self.base.y1[i]))
            .sum();
        self.restore(j);
        if self.base.actions[0][j] == 1 {
            -flipped
        } else {
            flipped
        }
    }

    /// Full terminal outcome vector with `Y0_j` flipped.
    pub fn flipped_y1(&mut self, j: usize) -> Vec<u8> {
        self.run(j);
        let mut y1 = self.base.y1.clone();
        y1[j] = self.y1_at(j);
        for &i in &self.reach[j] {
            y1[i] = self.y1_at(i);
        }
        self.restore(j);
        y1
    }
}

struct Draw {
    y0: Vec<u8>,
    path: DiffusionPath,
    shocks: Matrix,
}

fn draw_once(
    contact: &DirectedGraph,
    x: &Matrix,
    index: &[f64],
    model: &DiffusionModel,
    rng: &mut RngStream,
) -> Result<Draw> {
    let y0 = gen_initial(x, &model.gamma0, rng)?;
    let shocks = draw_shocks(contact.n(), model.t1, rng);
    let path = diffuse_with_shocks(
        contact,
        index,
        model.delta0,
        &y0,
        &shocks,
        model.exposure.rule(),
    )?;
    Ok(Draw { y0, path, shocks })
}

/// Average diffusion at the margin by simulation.
///
/// Draw `d` uses the stream `rng.derive(d)`: initial actions first, then the
/// shocks. Both arms of every node's counterfactual share these numbers.
pub fn adm_oracle(
    contact: &DirectedGraph,
    x: &Matrix,
    model: &DiffusionModel,
    draws: usize,
    rng: &RngStream,
) -> Result<McEstimate> {
    model.check(contact, x)?;
    if draws == 0 {
        return Err(Error::InvalidConfig("draws must be at least 1".into()));
    }
    let n = contact.n();
    let index = x.mul_vec(&model.beta0);
    let reach = forward_reach(contact, model.t1);
    let values = (0..draws)
        .into_par_iter()
        .map(|d| {
            let draw = draw_once(contact, x, &index, model, &mut rng.derive(d as u64))?;
            let mut local = LocalResim::new(
                contact,
                &reach,
                &index,
                model.delta0,
                &draw.shocks,
                model.exposure.rule(),
                &draw.path,
            );
            let total: i64 = (0..n).map(|j| local.marginal(j)).sum();
            Ok(total as f64 / n as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(McEstimate::from_draws(&values))
}

fn check_omit(p: usize, omit: &[usize]) -> Result<Vec<usize>> {
    if let Some(&bad) = omit.iter().find(|&&s| s >= p) {
        return Err(Error::InvalidConfig(format!(
            "omitted column {bad} out of range for {p} columns"
        )));
    }
    let keep: Vec<usize> = (0..p).filter(|c| !omit.contains(c)).collect();
    if keep.is_empty() {
        return Err(Error::InvalidConfig("cannot omit every column".into()));
    }
    Ok(keep)
}

/// Maximiser of the population probit objective on `X` without the columns
/// in `omit`, given the true probabilities `Φ(X_j'γ0)`. Returned in the
/// order of the retained columns.
pub fn pseudo_true_gamma(x: &Matrix, gamma0: &[f64], omit: &[usize]) -> Result<Vec<f64>> {
    if gamma0.len() != x.cols() {
        return Err(Error::SizeMismatch {
            expected: x.cols(),
            got: gamma0.len(),
        });
    }
    let keep = check_omit(x.cols(), omit)?;
    if omit.is_empty() {
        return Ok(gamma0.to_vec());
    }
    let mu: Vec<f64> = x.mul_vec(gamma0).iter().map(|&z| norm_cdf(z)).collect();
    let opts = NewtonOptions {
        score_tol: 1e-10,
        max_iter: 200,
        boundary: 0.0,
    };
    Ok(probit_newton(&x.select_columns(&keep), &mu, opts)?.gamma_hat)
}

/// True values of the decomposition for omitted set `S`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaTruth {
    pub omit: Vec<usize>,
    pub gamma_star: Vec<f64>,
    pub mu: Vec<f64>,
    pub mu_omit: Vec<f64>,
    /// `(μ_j - μ_{j,-S}) / (μ_j(1-μ_j))`.
    pub delta_j: Vec<f64>,
    pub c_s: McEstimate,
    pub c_empty: McEstimate,
    pub delta_s: McEstimate,
}

/// Simulates `C_S`, `C_∅` and `Δ_S` over `observed`, with the same draw
/// streams as [`adm_oracle`] so that `C_∅` and the ADM are paired.
pub fn delta_oracle(
    contact: &DirectedGraph,
    observed: &DirectedGraph,
    x: &Matrix,
    model: &DiffusionModel,
    omit: &[usize],
    draws: usize,
    rng: &RngStream,
) -> Result<DeltaTruth> {
    model.check(contact, x)?;
    if observed.n() != contact.n() {
        return Err(Error::SizeMismatch {
            expected: contact.n(),
            got: observed.n(),
        });
    }
    if draws == 0 {
        return Err(Error::InvalidConfig("draws must be at least 1".into()));
    }
    let n = contact.n();
    let keep = check_omit(x.cols(), omit)?;
    let gamma_star = pseudo_true_gamma(x, &model.gamma0, omit)?;
    let z = x.mul_vec(&model.gamma0);
    let mu: Vec<f64> = z.iter().map(|&v| norm_cdf(v)).collect();
    let sigma2: Vec<f64> = z.iter().map(|&v| norm_cdf(v) * norm_sf(v)).collect();
    let mu_omit: Vec<f64> = x
        .select_columns(&keep)
        .mul_vec(&gamma_star)
        .iter()
        .map(|&v| norm_cdf(v))
        .collect();
    let delta_j: Vec<f64> = (0..n).map(|j| (mu[j] - mu_omit[j]) / sigma2[j]).collect();
    let weight: Vec<f64> = (0..n)
        .map(|i| observed.in_nbrs(i).iter().map(|&j| delta_j[j]).sum())
        .collect();

    let index = x.mul_vec(&model.beta0);
    let per_draw = (0..draws)
        .into_par_iter()
        .map(|d| {
            let draw = draw_once(contact, x, &index, model, &mut rng.derive(d as u64))?;
            let (mut cs, mut ce, mut ds) = (0.0, 0.0, 0.0);
            for i in 0..n {
                if draw.path.y1[i] == 0 {
                    continue;
                }
                for &j in observed.in_nbrs(i) {
                    let y = f64::from(draw.y0[j]);
                    cs += (y - mu_omit[j]) / sigma2[j];
                    ce += (y - mu[j]) / sigma2[j];
                }
                ds += weight[i];
            }
            let nf = n as f64;
            Ok([cs / nf, ce / nf, ds / nf])
        })
        .collect::<Result<Vec<[f64; 3]>>>()?;
    let column =
        |k: usize| McEstimate::from_draws(&per_draw.iter().map(|v| v[k]).collect::<Vec<_>>());
    Ok(DeltaTruth {
        omit: omit.to_vec(),
        gamma_star,
        mu,
        mu_omit,
        delta_j,
        c_s: column(0),
        c_empty: column(1),
        delta_s: column(2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_er;
    use crate::simulate::{build_design, DgpConfig};
    use crate::simulate::{AdoptedShareExposure, MeanExposure};

    fn model(delta0: f64, t1: usize) -> DiffusionModel {
        DiffusionModel {
            gamma0: vec![0.2, -0.5],
            beta0: vec![-0.6, 0.4],
            delta0,
            t1,
            exposure: Exposure::LastPeriod,
        }
    }

    fn design_x(n: usize, rng: &mut RngStream) -> Matrix {
        Matrix::from_row_major(
            n,
            2,
            (0..n).flat_map(|_| [1.0, rng.uniform() * 2.0]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn reach_matches_causal_graph_transpose() {
        let mut rng = RngStream::new(1, 0);
        let g = gen_er(30, 0.08, true, &mut rng).unwrap();
        let reach = forward_reach(&g, 2);
        let causal = crate::graph::causal_graph(&g, 2);
        for j in 0..30 {
            for i in 0..30 {
                assert_eq!(reach[j].contains(&i), causal.has_edge(j, i), "{j} -> {i}");
            }
        }
    }

    #[test]
    fn local_resimulation_is_exact() {
        for inst in 0..20u64 {
            check_local(inst, &MeanExposure);
            check_local(inst, &AdoptedShareExposure);
        }
    }

    fn check_local(inst: u64, rule: &dyn ExposureRule) {
        {
            let mut rng = RngStream::new(100 + inst, 0);
            let n = 8 + (inst as usize % 10);
            let g = gen_er(n, 0.2, true, &mut rng).unwrap();
            let t1 = 1 + (inst as usize % 3);
            let index: Vec<f64> = (0..n).map(|_| rng.std_normal()).collect();
            let y0: Vec<u8> = (0..n).map(|_| u8::from(rng.bernoulli(0.4))).collect();
            let shocks = draw_shocks(n, t1, &mut rng);
            let base = diffuse_with_shocks(&g, &index, 1.5, &y0, &shocks, rule).unwrap();
            let reach = forward_reach(&g, t1);
            let mut local = LocalResim::new(&g, &reach, &index, 1.5, &shocks, rule, &base);
            for j in 0..n {
                let mut flipped = y0.clone();
                flipped[j] = 1 - flipped[j];
                let full = diffuse_with_shocks(&g, &index, 1.5, &flipped, &shocks, rule).unwrap();
                assert_eq!(local.flipped_y1(j), full.y1, "instance {inst}, node {j}");

                let (on, off) = if y0[j] == 1 {
                    (&base, &full)
                } else {
                    (&full, &base)
                };
                let brute: i64 = (0..n)
                    .filter(|&i| i != j)
                    .map(|i| i64::from(on.y1[i]) - i64::from(off.y1[i]))
                    .sum();
                assert_eq!(local.marginal(j), brute);
            }
        }
    }

    /// `E[Σ_{i≠j} Y_i(t1)]` given initial actions, by enumerating every
    /// switching outcome of every period.
    fn expected_others(
        g: &DirectedGraph,
        index: &[f64],
        delta0: f64,
        t1: usize,
        y0: &[u8],
        j: usize,
    ) -> f64 {
        fn rec(
            g: &DirectedGraph,
            index: &[f64],
            delta0: f64,
            left: usize,
            prev: &[u8],
            done: &[u8],
            j: usize,
        ) -> f64 {
            if left == 0 {
                return 0.0;
            }
            let n = prev.len();
            let probs: Vec<f64> = (0..n)
                .map(|i| {
                    if done[i] == 1 {
                        0.0
                    } else {
                        let acted = g.in_nbrs(i).iter().filter(|&&k| prev[k] == 1).count();
                        let e = if g.in_degree(i) == 0 {
                            0.0
                        } else {
                            acted as f64 / g.in_degree(i) as f64
                        };
                        norm_cdf(delta0 * e + index[i])
                    }
                })
                .collect();
            let mut total = 0.0;
            for mask in 0..(1u32 << n) {
                let mut p = 1.0;
                let cur: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
                for i in 0..n {
                    p *= if cur[i] == 1 {
                        probs[i]
                    } else {
                        1.0 - probs[i]
                    };
                }
                if p == 0.0 {
                    continue;
                }
                let gained = (0..n).filter(|&i| i != j && cur[i] == 1).count() as f64;
                let next_done: Vec<u8> = done.iter().zip(&cur).map(|(a, b)| a | b).collect();
                total += p * (gained + rec(g, index, delta0, left - 1, &cur, &next_done, j));
            }
            total
        }
        rec(g, index, delta0, t1, y0, y0, j)
    }

    fn exact_adm(g: &DirectedGraph, x: &Matrix, m: &DiffusionModel) -> f64 {
        let n = g.n();
        let mu: Vec<f64> = x.mul_vec(&m.gamma0).iter().map(|&z| norm_cdf(z)).collect();
        let index = x.mul_vec(&m.beta0);
        let mut adm = 0.0;
        for j in 0..n {
            for mask in 0..(1u32 << n) {
                if (mask >> j) & 1 == 1 {
                    continue;
                }
                let mut p = 1.0;
                let mut y0: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
                for i in (0..n).filter(|&i| i != j) {
                    p *= if y0[i] == 1 { mu[i] } else { 1.0 - mu[i] };
                }
                let off = expected_others(g, &index, m.delta0, m.t1, &y0, j);
                y0[j] = 1;
                let on = expected_others(g, &index, m.delta0, m.t1, &y0, j);
                adm += p * (on - off);
            }
        }
        adm / n as f64
    }

    #[test]
    fn adm_matches_exhaustive_enumeration() {
        let graphs = [
            DirectedGraph::from_edges(3, [(1, 0), (2, 1), (0, 2)]).unwrap(),
            DirectedGraph::from_edges(3, [(0, 1), (0, 2), (1, 2)]).unwrap(),
        ];
        let x = Matrix::from_rows(&[vec![1.0, 0.3], vec![1.0, 1.1], vec![1.0, -0.4]]).unwrap();
        for (k, g) in graphs.iter().enumerate() {
            for t1 in [1, 2] {
                let m = model(2.0, t1);
                let exact = exact_adm(g, &x, &m);
                let est = adm_oracle(g, &x, &m, 100_000, &RngStream::new(7, k as u64)).unwrap();
                assert!(exact > 0.01);
                assert!(
                    (est.mean - exact).abs() < 4.0 * est.se,
                    "graph {k} t1 {t1}: {} vs {exact} (se {})",
                    est.mean,
                    est.se
                );
            }
        }
    }

    #[test]
    fn adm_zero_without_interaction() {
        let mut rng = RngStream::new(2, 0);
        let g = gen_er(60, 0.05, true, &mut rng).unwrap();
        let x = design_x(60, &mut rng);
        let index = x.mul_vec(&model(0.0, 2).beta0);
        let reach = forward_reach(&g, 2);
        for d in 0..50 {
            let mut r = RngStream::new(3, d);
            let draw = draw_once(&g, &x, &index, &model(0.0, 2), &mut r).unwrap();
            let mut local = LocalResim::new(
                &g,
                &reach,
                &index,
                0.0,
                &draw.shocks,
                &MeanExposure,
                &draw.path,
            );
            assert!((0..60).all(|j| local.marginal(j) == 0));
        }
        let est = adm_oracle(&g, &x, &model(0.0, 2), 200, &RngStream::new(3, 0)).unwrap();
        assert_eq!((est.mean, est.se), (0.0, 0.0));
    }

    #[test]
    fn adm_is_deterministic_across_thread_counts() {
        let mut rng = RngStream::new(4, 0);
        let g = gen_er(80, 0.04, true, &mut rng).unwrap();
        let x = design_x(80, &mut rng);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| adm_oracle(&g, &x, &model(1.0, 2), 300, &RngStream::new(5, 0)).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn pseudo_true_fixed_points() {
        let cfg = DgpConfig {
            n_villages: 3,
            village_size: 40,
            seed_size: 10,
            seed_p: 0.2,
            ..DgpConfig::default()
        };
        let design = build_design(&cfg, &mut RngStream::new(6, 0)).unwrap();
        assert_eq!(
            pseudo_true_gamma(&design.x, &cfg.gamma0, &[]).unwrap(),
            cfg.gamma0
        );
        let mu: Vec<f64> = design
            .x
            .mul_vec(&cfg.gamma0)
            .iter()
            .map(|&z| norm_cdf(z))
            .collect();
        let opts = NewtonOptions {
            score_tol: 1e-10,
            max_iter: 200,
            boundary: 0.0,
        };
        let g = probit_newton(&design.x, &mu, opts).unwrap().gamma_hat;
        for (a, b) in g.iter().zip(&cfg.gamma0) {
            assert!((a - b).abs() < 1e-9);
        }
        let mut gamma0 = cfg.gamma0.clone();
        gamma0[2] = 0.0;
        let g = pseudo_true_gamma(&design.x, &gamma0, &[2]).unwrap();
        for (a, b) in g.iter().zip([gamma0[0], gamma0[1], gamma0[3]]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    fn population_objective(x: &Matrix, mu: &[f64], g: &[f64]) -> f64 {
        (0..x.rows())
            .map(|j| {
                let z: f64 = x.row(j).iter().zip(g).map(|(a, b)| a * b).sum();
                mu[j] * norm_cdf(z).ln() + (1.0 - mu[j]) * norm_sf(z).ln()
            })
            .sum()
    }

    #[test]
    fn pseudo_true_matches_grid_search() {
        let mut rng = RngStream::new(8, 0);
        let n = 60;
        let x = Matrix::from_row_major(
            n,
            3,
            (0..n)
                .flat_map(|_| {
                    let a = rng.uniform();
                    [1.0, a, a + rng.uniform()]
                })
                .collect(),
        )
        .unwrap();
        let gamma0 = [0.3, -0.8, 0.6];
        let got = pseudo_true_gamma(&x, &gamma0, &[2]).unwrap();

        let mu: Vec<f64> = x.mul_vec(&gamma0).iter().map(|&z| norm_cdf(z)).collect();
        let xs = x.select_columns(&[0, 1]);
        let f = |g: &[f64]| population_objective(&xs, &mu, g);
        let mut best = [0.0, 0.0];
        let mut best_val = f64::NEG_INFINITY;
        for a in -40..=40 {
            for b in -40..=40 {
                let g = [a as f64 * 0.05, b as f64 * 0.05];
                let v = f(&g);
                if v > best_val {
                    best_val = v;
                    best = g;
                }
            }
        }
        let mut step = 0.05;
        while step > 1e-10 {
            let mut moved = false;
            for k in 0..2 {
                for sign in [-1.0, 1.0] {
                    let mut g = best;
                    g[k] += sign * step;
                    let v = f(&g);
                    if v > best_val {
                        best_val = v;
                        best = g;
                        moved = true;
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        for k in 0..2 {
            assert!((got[k] - best[k]).abs() < 1e-6, "{got:?} vs {best:?}");
        }
    }

    #[test]
    fn delta_oracle_identities() {
        let cfg = DgpConfig {
            n_villages: 4,
            village_size: 40,
            seed_size: 10,
            seed_p: 0.2,
            ..DgpConfig::default()
        };
        let design = build_design(&cfg, &mut RngStream::new(9, 0)).unwrap();
        let m = cfg.model();
        let rng = RngStream::new(10, 0);
        let empty = delta_oracle(
            &design.contact,
            &design.observed,
            &design.x,
            &m,
            &[],
            200,
            &rng,
        )
        .unwrap();
        assert_eq!(empty.delta_s.mean, 0.0);
        assert!(empty.delta_j.iter().all(|d| d.abs() < 1e-8));

        let truth = delta_oracle(
            &design.contact,
            &design.observed,
            &design.x,
            &m,
            &[2],
            4000,
            &rng,
        )
        .unwrap();
        assert!((truth.c_s.mean - truth.c_empty.mean - truth.delta_s.mean).abs() < 1e-12);
        let adm = adm_oracle(&design.contact, &design.x, &m, 4000, &rng).unwrap();
        let se = (adm.se.powi(2) + truth.c_empty.se.powi(2)).sqrt();
        assert!(
            (adm.mean - truth.c_empty.mean).abs() < 4.0 * se,
            "{} vs {}",
            adm.mean,
            truth.c_empty.mean
        );
    }

    #[test]
    fn delta_invariant_to_relabelling() {
        let cfg = DgpConfig {
            n_villages: 2,
            village_size: 40,
            seed_size: 10,
            seed_p: 0.2,
            ..DgpConfig::default()
        };
        let design = build_design(&cfg, &mut RngStream::new(11, 0)).unwrap();
        let n = design.x.rows();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
        let relabel = |g: &DirectedGraph| {
            let mut in_nbrs = vec![Vec::new(); n];
            for (from, to) in g.edges() {
                in_nbrs[perm[to]].push(perm[from]);
            }
            DirectedGraph::from_in_neighbors(in_nbrs).unwrap()
        };
        let mut x2 = Matrix::zeros(n, design.x.cols());
        for i in 0..n {
            x2.row_mut(perm[i]).copy_from_slice(design.x.row(i));
        }
        let m = cfg.model();
        let a = delta_oracle(
            &design.contact,
            &design.observed,
            &design.x,
            &m,
            &[2],
            3000,
            &RngStream::new(12, 0),
        )
        .unwrap();
        let b = delta_oracle(
            &relabel(&design.contact),
            &relabel(&design.observed),
            &x2,
            &m,
            &[2],
            3000,
            &RngStream::new(13, 0),
        )
        .unwrap();
        let se = (a.delta_s.se.powi(2) + b.delta_s.se.powi(2)).sqrt();
        assert!((a.delta_s.mean - b.delta_s.mean).abs() < 4.0 * se);
    }
}
