use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::numkit::{Matrix, RngStream};

/// Neighbourhood summary entering a node's switching threshold.
pub trait ExposureRule: Sync {
    /// `prev` holds every node's action in the previous period and
    /// `adopted` whether each node has acted in any period so far.
    fn exposure(&self, i: usize, nbrs: &[usize], prev: &[u8], adopted: &[u8]) -> f64;
}

fn share(nbrs: &[usize], state: &[u8]) -> f64 {
    if nbrs.is_empty() {
        return 0.0;
    }
    let acted: u32 = nbrs.iter().map(|&j| u32::from(state[j])).sum();
    f64::from(acted) / nbrs.len() as f64
}

/// Share of contact in-neighbours that acted in the previous period; zero
/// for isolated nodes.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanExposure;

impl ExposureRule for MeanExposure {
    fn exposure(&self, _i: usize, nbrs: &[usize], prev: &[u8], _adopted: &[u8]) -> f64 {
        share(nbrs, prev)
    }
}

/// Share of contact in-neighbours that have acted in any earlier period.
#[derive(Debug, Clone, Copy, Default)]
pub struct AdoptedShareExposure;

impl ExposureRule for AdoptedShareExposure {
    fn exposure(&self, _i: usize, nbrs: &[usize], _prev: &[u8], adopted: &[u8]) -> f64 {
        share(nbrs, adopted)
    }
}

/// Built-in exposure rules selectable from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exposure {
    #[default]
    LastPeriod,
    Adopted,
}

impl Exposure {
    pub fn rule(self) -> &'static dyn ExposureRule {
        match self {
            Exposure::LastPeriod => &MeanExposure,
            Exposure::Adopted => &AdoptedShareExposure,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionPath {
    /// `actions[t][i]` is `A_{i,t}` for `t = 0..=t1`.
    pub actions: Vec<Vec<u8>>,
    /// `Σ_{s=1..t1} A_{i,s}`.
    pub y1: Vec<u8>,
}

impl DiffusionPath {
    pub fn t1(&self) -> usize {
        self.actions.len() - 1
    }
}

#[inline]
pub(crate) fn switches(delta0: f64, exposure: f64, index: f64, shock: f64) -> u8 {
    u8::from(delta0 * exposure + index - shock > 0.0)
}

/// Standard-normal threshold shocks, one row per period `1..=t1`, drawn period by period.
pub fn draw_shocks(n: usize, t1: usize, rng: &mut RngStream) -> Matrix {
    Matrix::from_row_major(t1, n, (0..n * t1).map(|_| rng.std_normal()).collect()).expect("shape")
}

/// Runs the irreversible threshold diffusion for `shocks.rows()` periods.
///
/// `index[i]` is `X_i'β0`. A node that has acted in any earlier period,
/// including period 0, never acts again.
pub fn diffuse_with_shocks(
    contact: &DirectedGraph,
    index: &[f64],
    delta0: f64,
    y0: &[u8],
    shocks: &Matrix,
    rule: &dyn ExposureRule,
) -> Result<DiffusionPath> {
    let n = contact.n();
    for len in [index.len(), y0.len(), shocks.cols()] {
        if len != n {
            return Err(Error::SizeMismatch {
                expected: n,
                got: len,
            });
        }
    }
    let t1 = shocks.rows();
    let mut actions = Vec::with_capacity(t1 + 1);
    actions.push(y0.to_vec());
    let mut done = y0.to_vec();
    for t in 1..=t1 {
        let prev = &actions[t - 1];
        let u = shocks.row(t - 1);
        let cur: Vec<u8> = (0..n)
            .map(|i| {
                if done[i] == 1 {
                    0
                } else {
                    switches(
                        delta0,
                        rule.exposure(i, contact.in_nbrs(i), prev, &done),
                        index[i],
                        u[i],
                    )
                }
            })
            .collect();
        for (d, &a) in done.iter_mut().zip(&cur) {
            *d |= a;
        }
        actions.push(cur);
    }
    let y1 = (0..n)
        .map(|i| actions[1..].iter().map(|a| a[i]).sum())
        .collect();
    Ok(DiffusionPath { actions, y1 })
}

/// Diffusion under last-period mean exposure with shocks drawn from `rng`.
pub fn diffuse(
    contact: &DirectedGraph,
    x: &Matrix,
    beta0: &[f64],
    delta0: f64,
    t1: usize,
    y0: &[u8],
    rng: &mut RngStream,
) -> Result<DiffusionPath> {
    diffuse_with_rule(contact, x, beta0, delta0, t1, y0, &MeanExposure, rng)
}

#[allow(clippy::too_many_arguments)]
pub fn diffuse_with_rule(
    contact: &DirectedGraph,
    x: &Matrix,
    beta0: &[f64],
    delta0: f64,
    t1: usize,
    y0: &[u8],
    rule: &dyn ExposureRule,
    rng: &mut RngStream,
) -> Result<DiffusionPath> {
    if t1 == 0 {
        return Err(Error::InvalidConfig("t1 must be at least 1".into()));
    }
    if beta0.len() != x.cols() {
        return Err(Error::SizeMismatch {
            expected: x.cols(),
            got: beta0.len(),
        });
    }
    let shocks = draw_shocks(contact.n(), t1, rng);
    diffuse_with_shocks(contact, &x.mul_vec(beta0), delta0, y0, &shocks, rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::norm_cdf;
    use proptest::prelude::*;

    fn cycle() -> DirectedGraph {
        DirectedGraph::from_edges(3, [(1, 0), (2, 1), (0, 2)]).unwrap()
    }

    #[test]
    fn hand_traced_cycle() {
        // Node 0 starts. Period 1: node 2 (in-neighbour 0) sees exposure 1,
        // threshold 0.5 + 0 - 0.4 > 0 so it acts; node 1 sees 0 and -0.2 < 0.
        // Period 2: node 1 sees node 2's period-1 action, 0.5 - 0.3 > 0.
        let index = [0.0, 0.0, 0.0];
        let shocks = Matrix::from_rows(&[vec![-5.0, 0.2, 0.4], vec![-5.0, 0.3, -5.0]]).unwrap();
        let path =
            diffuse_with_shocks(&cycle(), &index, 0.5, &[1, 0, 0], &shocks, &MeanExposure).unwrap();
        assert_eq!(
            path.actions,
            vec![vec![1, 0, 0], vec![0, 0, 1], vec![0, 1, 0]]
        );
        assert_eq!(path.y1, vec![0, 1, 1]);
    }

    #[test]
    fn exposure_uses_last_period_only() {
        // Node 1 acts at 1; node 0 sees it at 2 but not at 3.
        let g = DirectedGraph::from_edges(2, [(1, 0)]).unwrap();
        let shocks = Matrix::from_rows(&[vec![1.0, -1.0], vec![0.9, 0.0], vec![0.1, 0.0]]).unwrap();
        let path =
            diffuse_with_shocks(&g, &[0.0, 0.0], 1.0, &[0, 0], &shocks, &MeanExposure).unwrap();
        assert_eq!(path.actions[1], vec![0, 1]);
        assert_eq!(path.actions[2], vec![1, 0]);
        let shocks = Matrix::from_rows(&[vec![1.0, -1.0], vec![1.1, 0.0], vec![0.1, 0.0]]).unwrap();
        let path =
            diffuse_with_shocks(&g, &[0.0, 0.0], 1.0, &[0, 0], &shocks, &MeanExposure).unwrap();
        assert_eq!(path.y1, vec![0, 1]);
    }

    #[test]
    fn very_negative_intercept_never_switches() {
        let g = cycle();
        let x = Matrix::from_row_major(3, 1, vec![1.0; 3]).unwrap();
        let path = diffuse(
            &g,
            &x,
            &[-40.0],
            0.0,
            2,
            &[0, 1, 0],
            &mut RngStream::new(1, 0),
        )
        .unwrap();
        assert_eq!(path.y1, vec![0, 0, 0]);
    }

    #[test]
    fn no_interaction_closed_form() {
        let g = DirectedGraph::from_edges(4, [(1, 0), (2, 0), (3, 0)]).unwrap();
        let x = Matrix::from_row_major(4, 1, vec![1.0; 4]).unwrap();
        let beta = [-0.7];
        let draws = 40_000;
        let mut hits = 0u32;
        for r in 0..draws {
            let path = diffuse(
                &g,
                &x,
                &beta,
                0.0,
                2,
                &[0, 1, 1, 1],
                &mut RngStream::new(2, r),
            )
            .unwrap();
            hits += u32::from(path.y1[0]);
        }
        let q = norm_cdf(-0.7);
        let target = 1.0 - (1.0 - q) * (1.0 - q);
        let m = f64::from(hits) / draws as f64;
        assert!((m - target).abs() < 3.0 * (target * (1.0 - target) / draws as f64).sqrt());
    }

    #[test]
    fn isolated_nodes_have_zero_exposure() {
        assert_eq!(MeanExposure.exposure(0, &[], &[1, 1], &[1, 1]), 0.0);
        assert_eq!(
            MeanExposure.exposure(0, &[0, 1, 2], &[1, 0, 1], &[1, 1, 1]),
            2.0 / 3.0
        );
        assert_eq!(
            AdoptedShareExposure.exposure(0, &[0, 1, 2], &[1, 0, 1], &[1, 1, 0]),
            2.0 / 3.0
        );
    }

    #[test]
    fn adopted_exposure_persists() {
        // Node 1 acts at period 0; node 0 still sees it at period 2.
        let g = DirectedGraph::from_edges(2, [(1, 0)]).unwrap();
        let shocks = Matrix::from_rows(&[vec![0.9, 0.0], vec![0.9, 0.0]]).unwrap();
        let last =
            diffuse_with_shocks(&g, &[-0.5, 0.0], 1.0, &[0, 1], &shocks, &MeanExposure).unwrap();
        assert_eq!(last.y1, vec![0, 0]);
        let shocks = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.4, 0.0]]).unwrap();
        let last =
            diffuse_with_shocks(&g, &[-0.5, 0.0], 1.0, &[0, 1], &shocks, &MeanExposure).unwrap();
        let adopted = diffuse_with_shocks(
            &g,
            &[-0.5, 0.0],
            1.0,
            &[0, 1],
            &shocks,
            &AdoptedShareExposure,
        )
        .unwrap();
        assert_eq!((last.y1[0], adopted.y1[0]), (0, 1));
    }

    proptest! {
        #[test]
        fn irreversible(seed in 0u64..500, delta in 0.0f64..3.0, t1 in 1usize..5) {
            let mut rng = RngStream::new(seed, 0);
            let g = crate::graph::gen_er(12, 0.3, true, &mut rng).unwrap();
            let index: Vec<f64> = (0..12).map(|_| rng.std_normal()).collect();
            let y0: Vec<u8> = (0..12).map(|_| u8::from(rng.bernoulli(0.3))).collect();
            let shocks = draw_shocks(12, t1, &mut rng);
            let path = diffuse_with_shocks(&g, &index, delta, &y0, &shocks, &MeanExposure).unwrap();
            for i in 0..12 {
                let total: u8 = path.actions.iter().map(|a| a[i]).sum();
                prop_assert!(total <= 1);
                prop_assert_eq!(path.y1[i] + y0[i], total);
            }
        }
    }
}
