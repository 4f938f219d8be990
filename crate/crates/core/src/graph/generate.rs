use serde::{Deserialize, Serialize};

use super::DirectedGraph;
use crate::error::{Error, Result};
use crate::numkit::RngStream;

/// Erdős–Rényi graph. With `directed = false` each unordered pair is linked
/// with probability `p` and stored as two directed edges; otherwise each
/// ordered pair is drawn independently.
pub fn gen_er(n: usize, p: f64, directed: bool, rng: &mut RngStream) -> Result<DirectedGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!(
            "link probability {p} outside [0, 1]"
        )));
    }
    let mut in_nbrs = vec![Vec::new(); n];
    if directed {
        for to in 0..n {
            for from in 0..n {
                if from != to && rng.bernoulli(p) {
                    in_nbrs[to].push(from);
                }
            }
        }
    } else {
        for a in 0..n {
            for b in a + 1..n {
                if rng.bernoulli(p) {
                    in_nbrs[a].push(b);
                    in_nbrs[b].push(a);
                }
            }
        }
    }
    DirectedGraph::from_in_neighbors(in_nbrs)
}

/// How an undirected preferential-attachment link is turned into a directed
/// influence edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// The older endpoint influences the newer one.
    #[default]
    OldToNew,
    /// Direction drawn by a fair coin per link.
    CoinFlip,
    /// Both directions.
    Reciprocal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaConfig {
    pub village_size: usize,
    pub seed_size: usize,
    pub seed_p: f64,
    /// Links attached by each arriving node.
    pub m: usize,
    pub orientation: Orientation,
}

impl Default for BaConfig {
    fn default() -> Self {
        Self {
            village_size: 50,
            seed_size: 20,
            seed_p: 1.0 / 19.0,
            m: 1,
            orientation: Orientation::OldToNew,
        }
    }
}

impl BaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seed_size > self.village_size {
            return Err(Error::InvalidConfig(format!(
                "seed size {} exceeds village size {}",
                self.seed_size, self.village_size
            )));
        }
        if !(0.0..=1.0).contains(&self.seed_p) {
            return Err(Error::InvalidConfig(format!(
                "seed link probability {} outside [0, 1]",
                self.seed_p
            )));
        }
        if self.village_size > self.seed_size && (self.m == 0 || self.m > self.seed_size) {
            return Err(Error::InvalidConfig(format!(
                "attachments per arrival m = {} must be in 1..={}",
                self.m, self.seed_size
            )));
        }
        Ok(())
    }
}

/// One village: an undirected Erdős–Rényi seed (both directions stored),
/// grown by preferential attachment. Each arrival picks `m` distinct existing
/// nodes with probability proportional to current total degree, falling back
/// to uniform choice while all remaining weights are zero.
pub fn gen_ba_village(cfg: &BaConfig, rng: &mut RngStream) -> Result<DirectedGraph> {
    cfg.validate()?;
    let n = cfg.village_size;
    let seed = gen_er(cfg.seed_size, cfg.seed_p, false, rng)?;
    let mut in_nbrs = vec![Vec::new(); n];
    let mut degree = vec![0usize; n];
    for (from, to) in seed.edges() {
        in_nbrs[to].push(from);
        degree[to] += 1;
    }

    let mut weight = vec![0usize; n];
    let mut picked = Vec::with_capacity(cfg.m);
    for v in cfg.seed_size..n {
        weight[..v].copy_from_slice(&degree[..v]);
        picked.clear();
        for _ in 0..cfg.m {
            let total: usize = weight[..v].iter().sum();
            let target = if total == 0 {
                let free: Vec<usize> = (0..v).filter(|u| !picked.contains(u)).collect();
                free[rng.below(free.len())]
            } else {
                let mut r = rng.below(total);
                let mut chosen = 0;
                for (u, &w) in weight[..v].iter().enumerate() {
                    if r < w {
                        chosen = u;
                        break;
                    }
                    r -= w;
                }
                chosen
            };
            weight[target] = 0;
            picked.push(target);
        }
        for &u in &picked {
            let (forward, backward) = match cfg.orientation {
                Orientation::OldToNew => (true, false),
                Orientation::CoinFlip => {
                    let f = rng.bernoulli(0.5);
                    (f, !f)
                }
                Orientation::Reciprocal => (true, true),
            };
            if forward {
                in_nbrs[v].push(u);
            }
            if backward {
                in_nbrs[u].push(v);
            }
            degree[u] += 1;
            degree[v] += 1;
        }
    }
    DirectedGraph::from_in_neighbors(in_nbrs)
}

/// Disjoint union; block `k` occupies node ids offset by the sizes of the
/// blocks before it.
pub fn block_diagonal(blocks: &[DirectedGraph]) -> DirectedGraph {
    let mut in_nbrs = Vec::with_capacity(blocks.iter().map(DirectedGraph::n).sum());
    let mut offset = 0;
    for b in blocks {
        for i in 0..b.n() {
            in_nbrs.push(b.in_nbrs(i).iter().map(|&j| j + offset).collect());
        }
        offset += b.n();
    }
    DirectedGraph { in_nbrs }
}
