//! Immutable undirected graphs in compressed sparse row form.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    /// Union of the line-cliques.
    G1,
    /// Union of the per-clique complete bipartite graphs.
    G,
    /// Point–line incidence graph, points first.
    Incidence,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub q: Option<u32>,
    pub kind: GraphKind,
    pub seed: Option<u64>,
}

/// Symmetric, loop-free, duplicate-free; every adjacency list strictly ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseGraph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    meta: Option<GraphMeta>,
}

impl SparseGraph {
    /// Validates raw CSR arrays.
    pub fn from_csr(offsets: Vec<usize>, neighbors: Vec<u32>) -> Result<Self> {
        let bad = |msg: String| Err(Error::Format(msg));
        if offsets.first() != Some(&0) || offsets.last() != Some(&neighbors.len()) {
            return bad("offsets must start at 0 and end at the neighbor count".into());
        }
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return bad("offsets must be non-decreasing".into());
        }
        if !neighbors.len().is_multiple_of(2) {
            return bad("odd number of adjacency entries".into());
        }
        let g = SparseGraph {
            offsets,
            neighbors,
            meta: None,
        };
        let n = g.n();
        for u in 0..n {
            let nb = g.neighbors(u);
            if nb.iter().any(|&v| v as usize >= n) {
                return bad(format!("vertex {u} has an out-of-range neighbor"));
            }
            if nb.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("adjacency of {u} is not strictly ascending"));
            }
            if nb.binary_search(&(u as u32)).is_ok() {
                return bad(format!("self-loop at {u}"));
            }
        }
        let asym = (0..n)
            .into_par_iter()
            .find_first(|&u| g.neighbors(u).iter().any(|&v| !g.has_edge(v as usize, u)));
        if let Some(u) = asym {
            return bad(format!("adjacency of {u} is not symmetric"));
        }
        Ok(g)
    }

    /// Builds from an undirected edge list; loops and repeated edges are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        let mut lists = vec![Vec::new(); n];
        for (u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::Format(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(Error::Format(format!("self-loop at {u}")));
            }
            lists[u as usize].push(v);
            lists[v as usize].push(u);
        }
        for (u, l) in lists.iter_mut().enumerate() {
            l.sort_unstable();
            if let Some(w) = l.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::Format(format!("repeated edge ({u}, {})", w[0])));
            }
        }
        Ok(Self::from_sorted_lists(lists))
    }

    /// Callers guarantee the CSR invariants.
    pub(crate) fn from_sorted_lists(lists: Vec<Vec<u32>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let total: usize = lists.iter().map(Vec::len).sum();
        let mut neighbors = Vec::with_capacity(total);
        for l in lists {
            neighbors.extend_from_slice(&l);
            offsets.push(neighbors.len());
        }
        SparseGraph {
            offsets,
            neighbors,
            meta: None,
        }
    }

    pub fn with_meta(mut self, meta: GraphMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn meta(&self) -> Option<&GraphMeta> {
        self.meta.as_ref()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn adjacency(&self) -> &[u32] {
        &self.neighbors
    }

    #[inline]
    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.neighbors[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Edges `(u, v)` with `u < v` in CSR order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| v as usize > u)
                .map(move |&v| (u as u32, v))
        })
    }

    /// `(min, max)` degree; `(0, 0)` for the empty graph.
    pub fn degree_range(&self) -> (usize, usize) {
        (0..self.n())
            .map(|u| self.degree(u))
            .fold(None, |acc: Option<(usize, usize)>, d| {
                Some(acc.map_or((d, d), |(lo, hi)| (lo.min(d), hi.max(d))))
            })
            .unwrap_or((0, 0))
    }

    /// The common degree if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        let (lo, hi) = self.degree_range();
        (lo == hi && self.n() > 0).then_some(lo)
    }

    /// A copy with one extra edge; fails if it is a loop or already present.
    pub fn with_extra_edge(&self, u: u32, v: u32) -> Result<Self> {
        let n = self.n();
        if u == v || u as usize >= n || v as usize >= n || self.has_edge(u as usize, v as usize) {
            return Err(Error::InvalidArgument(format!("cannot add edge ({u}, {v})")));
        }
        let mut lists: Vec<Vec<u32>> = (0..n).map(|x| self.neighbors(x).to_vec()).collect();
        for (a, b) in [(u, v), (v, u)] {
            let l = &mut lists[a as usize];
            let pos = l.binary_search(&b).unwrap_err();
            l.insert(pos, b);
        }
        let mut g = Self::from_sorted_lists(lists);
        g.meta = self.meta;
        Ok(g)
    }

    /// Number of edges with both ends in `x`. Scans whichever of `x` and its
    /// complement is smaller.
    pub fn edges_within(&self, x: &VertexSet) -> u64 {
        debug_assert_eq!(x.universe(), self.n());
        let inside = |u: usize| -> u64 { self.neighbors(u).iter().map(|&v| x.contains_bit(v)).sum() };
        if 2 * x.len() <= self.n() {
            x.members().iter().map(|&u| inside(u as usize)).sum::<u64>() / 2
        } else {
            let deg_sum: u64 = x.members().iter().map(|&u| self.degree(u as usize) as u64).sum();
            let crossing: u64 = (0..self.n()).filter(|&w| !x.contains(w as u32)).map(inside).sum();
            (deg_sum - crossing) / 2
        }
    }

    /// `y = A x` in floating point, parallel over rows.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(u, yu)| {
            *yu = self.neighbors(u).iter().map(|&v| x[v as usize]).sum();
        });
    }

    /// `A x` in exact integer arithmetic.
    pub fn matvec_i64(&self, x: &[i64]) -> Vec<i64> {
        (0..self.n())
            .into_par_iter()
            .map(|u| self.neighbors(u).iter().map(|&v| x[v as usize]).sum())
            .collect()
    }

    /// A proper 2-colouring if the graph is bipartite.
    pub fn bipartite_coloring(&self) -> Option<Vec<u8>> {
        const NONE: u8 = u8::MAX;
        let n = self.n();
        let mut color = vec![NONE; n];
        let mut queue = std::collections::VecDeque::new();
        for s in 0..n {
            if color[s] != NONE {
                continue;
            }
            color[s] = 0;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    let v = v as usize;
                    if color[v] == NONE {
                        color[v] = 1 - color[u];
                        queue.push_back(v);
                    } else if color[v] == color[u] {
                        return None;
                    }
                }
            }
        }
        Some(color)
    }
}

/// A vertex subset with a membership bitmap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexSet {
    members: Vec<u32>,
    bits: Vec<u64>,
    universe: usize,
}

impl VertexSet {
    /// Sorts and deduplicates `ids`; every id must be `< universe`.
    pub fn new(universe: usize, ids: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut members: Vec<u32> = ids.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(&last) = members.last() {
            if last as usize >= universe {
                return Err(Error::InvalidArgument(format!(
                    "vertex {last} outside universe of size {universe}"
                )));
            }
        }
        let mut bits = vec![0u64; universe.div_ceil(64)];
        for &v in &members {
            bits[(v >> 6) as usize] |= 1 << (v & 63);
        }
        Ok(VertexSet {
            members,
            bits,
            universe,
        })
    }

    pub fn full(universe: usize) -> Self {
        Self::new(universe, 0..universe as u32).expect("in range")
    }

    #[inline]
    fn contains_bit(&self, v: u32) -> u64 {
        self.bits[(v >> 6) as usize] >> (v & 63) & 1
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        self.contains_bit(v) == 1
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn universe(&self) -> usize {
        self.universe
    }
}
