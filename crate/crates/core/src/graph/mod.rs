//! Directed graphs stored as sorted in-neighbour lists.
//!
//! Edge `j -> i` is stored as `j ∈ in_nbrs(i)` and reads "j influences i".
//! Contact, causal and observed graphs all use this one representation.

mod generate;
mod io;
mod stats;

pub use generate::{block_diagonal, gen_ba_village, gen_er, BaConfig, Orientation};
pub use io::{read_edge_list, write_edge_list};
pub use stats::{stats, GraphStats};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    in_nbrs: Vec<Vec<usize>>,
}

impl DirectedGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            in_nbrs: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from `(from, to)` pairs. Duplicates are merged;
    /// self-loops and out-of-range ids are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut in_nbrs = vec![Vec::new(); n];
        for (from, to) in edges {
            check_edge(n, from, to)?;
            in_nbrs[to].push(from);
        }
        for list in &mut in_nbrs {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { in_nbrs })
    }

    /// Builds a graph from per-node in-neighbour lists (any order, duplicates
    /// allowed).
    pub fn from_in_neighbors(mut in_nbrs: Vec<Vec<usize>>) -> Result<Self> {
        let n = in_nbrs.len();
        for (to, list) in in_nbrs.iter_mut().enumerate() {
            for &from in list.iter() {
                check_edge(n, from, to)?;
            }
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { in_nbrs })
    }

    pub fn n(&self) -> usize {
        self.in_nbrs.len()
    }

    pub fn in_nbrs(&self, i: usize) -> &[usize] {
        &self.in_nbrs[i]
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.in_nbrs[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.in_nbrs.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.in_nbrs[to].binary_search(&from).is_ok()
    }

    /// All edges as `(from, to)`, ordered by `to` then `from`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.in_nbrs
            .iter()
            .enumerate()
            .flat_map(|(to, list)| list.iter().map(move |&from| (from, to)))
    }

    /// Sorted out-neighbour lists (`out[j]` = nodes that `j` influences).
    pub fn out_neighbors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n()];
        for (from, to) in self.edges() {
            out[from].push(to);
        }
        out
    }
}

fn check_edge(n: usize, from: usize, to: usize) -> Result<()> {
    if from >= n || to >= n {
        return Err(Error::InvalidConfig(format!(
            "edge {from}->{to} out of range for n = {n}"
        )));
    }
    if from == to {
        return Err(Error::InvalidConfig(format!("self-loop at node {from}")));
    }
    Ok(())
}

/// Reusable visited-marker; avoids clearing an `n`-sized buffer per query.
struct Stamp {
    mark: Vec<u32>,
    epoch: u32,
}

impl Stamp {
    fn new(n: usize) -> Self {
        Self {
            mark: vec![0; n],
            epoch: 0,
        }
    }

    fn next(&mut self) {
        self.epoch += 1;
        if self.epoch == u32::MAX {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
    }

    /// Marks `v`; returns `true` if it was not yet marked in this epoch.
    fn insert(&mut self, v: usize) -> bool {
        if self.mark[v] == self.epoch {
            false
        } else {
            self.mark[v] = self.epoch;
            true
        }
    }
}

fn causal_nbhd_with(contact: &DirectedGraph, i: usize, t1: usize, seen: &mut Stamp) -> Vec<usize> {
    seen.next();
    seen.insert(i);
    let mut out = Vec::new();
    let mut frontier = vec![i];
    for _ in 0..t1 {
        let mut next = Vec::new();
        for &v in &frontier {
            for &j in contact.in_nbrs(v) {
                if seen.insert(j) {
                    next.push(j);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        out.extend_from_slice(&next);
        frontier = next;
    }
    out.sort_unstable();
    out
}

/// Nodes whose initial action can reach `i` along a directed influence path
/// of at most `t1` edges, excluding `i`. Reverse BFS to depth `t1`.
pub fn causal_in_neighborhood(contact: &DirectedGraph, i: usize, t1: usize) -> Vec<usize> {
    causal_nbhd_with(contact, i, t1, &mut Stamp::new(contact.n()))
}

/// Graph whose in-neighbourhoods are the causal in-neighbourhoods at horizon `t1`.
pub fn causal_graph(contact: &DirectedGraph, t1: usize) -> DirectedGraph {
    let mut seen = Stamp::new(contact.n());
    let in_nbrs = (0..contact.n())
        .map(|i| causal_nbhd_with(contact, i, t1, &mut seen))
        .collect();
    DirectedGraph { in_nbrs }
}

/// Sparsity pattern of `B + B² + … + B^t1` (diagonal dropped), where `B` is
/// the contact adjacency matrix. Row `i` of `B^s` is obtained from row `i` of
/// `B^{s-1}` by one sparse expansion step; no dense powers are formed.
pub fn observed_from_contact(contact: &DirectedGraph, t1: usize) -> DirectedGraph {
    let n = contact.n();
    let mut in_frontier = Stamp::new(n);
    let mut in_row = Stamp::new(n);
    let mut in_nbrs = Vec::with_capacity(n);
    for i in 0..n {
        in_row.next();
        let mut row = Vec::new();
        let mut frontier: Vec<usize> = contact.in_nbrs(i).to_vec();
        for s in 1..=t1 {
            if s > 1 {
                in_frontier.next();
                let mut next = Vec::new();
                for &k in &frontier {
                    for &j in contact.in_nbrs(k) {
                        if in_frontier.insert(j) {
                            next.push(j);
                        }
                    }
                }
                frontier = next;
            }
            for &k in &frontier {
                if k != i && in_row.insert(k) {
                    row.push(k);
                }
            }
            if frontier.is_empty() {
                break;
            }
        }
        row.sort_unstable();
        in_nbrs.push(row);
    }
    DirectedGraph { in_nbrs }
}

/// Whether every edge of `small` is an edge of `big`.
pub fn contains_subgraph(big: &DirectedGraph, small: &DirectedGraph) -> Result<bool> {
    if big.n() != small.n() {
        return Err(Error::SizeMismatch {
            expected: big.n(),
            got: small.n(),
        });
    }
    Ok(small.edges().all(|(from, to)| big.has_edge(from, to)))
}

/// Ordered node pairs `(i1, i2)`, diagonal included, whose closed
/// in-neighbourhoods `N̄(i) = in_nbrs(i) ∪ {i}` intersect.
///
/// Stored row-compressed: `partners(i1)` is the sorted list of all `i2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapPairs {
    offsets: Vec<usize>,
    partners: Vec<usize>,
}

impl OverlapPairs {
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn partners(&self, i1: usize) -> &[usize] {
        &self.partners[self.offsets[i1]..self.offsets[i1 + 1]]
    }

    pub fn len(&self) -> usize {
        self.partners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partners.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |i1| self.partners(i1).iter().map(move |&i2| (i1, i2)))
    }

    /// `Σ_{(i1,i2)} a[i1]·b[i2]`, accumulated in row-major pair order.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i1 in 0..self.n() {
            for &i2 in self.partners(i1) {
                acc += a[i1] * b[i2];
            }
        }
        acc
    }
}

/// Enumerates overlapping closed neighbourhoods through the inverted index
/// `v -> {i : v ∈ N̄(i)}`, so the cost is `Σ_v |inv(v)|²` rather than `n²`.
pub fn overlapping_pairs(g: &DirectedGraph) -> OverlapPairs {
    let n = g.n();
    let mut inv = g.out_neighbors();
    for (v, list) in inv.iter_mut().enumerate() {
        let pos = list.binary_search(&v).unwrap_err();
        list.insert(pos, v);
    }
    let mut seen = Stamp::new(n);
    let mut offsets = Vec::with_capacity(n + 1);
    let mut partners = Vec::new();
    offsets.push(0);
    for i1 in 0..n {
        seen.next();
        let start = partners.len();
        for v in g.in_nbrs(i1).iter().copied().chain(std::iter::once(i1)) {
            for &i2 in &inv[v] {
                if seen.insert(i2) {
                    partners.push(i2);
                }
            }
        }
        partners[start..].sort_unstable();
        offsets.push(partners.len());
    }
    OverlapPairs { offsets, partners }
}
