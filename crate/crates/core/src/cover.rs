//! Clique covers and the base graph G1 they induce.
//!
//! A cover is a family of vertex sets ("cliques"); G1 joins two vertices
//! iff some clique contains both. For a valid cover each G1 edge has exactly
//! one owning clique and no three distinct cliques close a triangle.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Quadrangle;
use crate::graph::{GraphKind, GraphMeta, SparseGraph};
use crate::incidence::{self, BlockSystem};

/// An edge claimed by two different cliques.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OwnershipConflict {
    pub edge: [u32; 2],
    pub cliques: [u32; 2],
}

#[derive(Clone, Debug)]
pub struct CliqueCover {
    clique_offsets: Vec<usize>,
    members: Vec<u32>,
    vertex_offsets: Vec<usize>,
    vertex_cliques: Vec<u32>,
    vertex_slots: Vec<u32>,
    graph: SparseGraph,
    /// Owning clique of each adjacency entry of `graph`, parallel to its CSR array.
    edge_owner: Vec<u32>,
    conflicts: Vec<OwnershipConflict>,
}

/// Vertices and the three cliques joining them pairwise.
pub(crate) type CliqueTriangle = ([u32; 3], [u32; 3]);

const MAX_RECORDED_CONFLICTS: usize = 64;

impl CliqueCover {
    /// Builds the cover and its G1, rejecting any edge with two owners.
    pub fn new(n: usize, cliques: Vec<Vec<u32>>) -> Result<Self> {
        let cover = Self::assemble(n, cliques)?;
        if let Some(c) = cover.conflicts.first() {
            return Err(Error::CoverViolation(format!(
                "edge ({}, {}) lies in cliques {} and {}",
                c.edge[0], c.edge[1], c.cliques[0], c.cliques[1]
            )));
        }
        Ok(cover)
    }

    /// Builds the cover without rejecting ownership conflicts; they are
    /// recorded (lowest clique id wins) and reported by [`Self::conflicts`].
    /// Each clique is sorted; ids must be `< n` and distinct within a clique.
    pub fn assemble(n: usize, mut cliques: Vec<Vec<u32>>) -> Result<Self> {
        let mut clique_offsets = Vec::with_capacity(cliques.len() + 1);
        clique_offsets.push(0);
        let mut members = Vec::with_capacity(cliques.iter().map(Vec::len).sum());
        for (i, c) in cliques.iter_mut().enumerate() {
            c.sort_unstable();
            if let Some(&v) = c.iter().find(|&&v| v as usize >= n) {
                return Err(Error::Format(format!("clique {i} names vertex {v} >= n = {n}")));
            }
            if c.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Format(format!("clique {i} repeats a vertex")));
            }
            members.extend_from_slice(c);
            clique_offsets.push(members.len());
        }

        let mut degree = vec![0usize; n];
        for &v in &members {
            degree[v as usize] += 1;
        }
        let mut vertex_offsets = Vec::with_capacity(n + 1);
        vertex_offsets.push(0);
        for d in &degree {
            vertex_offsets.push(vertex_offsets.last().unwrap() + d);
        }
        let mut fill = vertex_offsets[..n].to_vec();
        let mut vertex_cliques = vec![0u32; members.len()];
        let mut vertex_slots = vec![0u32; members.len()];
        for (i, c) in cliques.iter().enumerate() {
            for (slot, &v) in c.iter().enumerate() {
                let at = &mut fill[v as usize];
                vertex_cliques[*at] = i as u32;
                vertex_slots[*at] = slot as u32;
                *at += 1;
            }
        }

        let mut cover = CliqueCover {
            clique_offsets,
            members,
            vertex_offsets,
            vertex_cliques,
            vertex_slots,
            graph: SparseGraph::from_sorted_lists(Vec::new()),
            edge_owner: Vec::new(),
            conflicts: Vec::new(),
        };
        cover.build_graph(n);
        Ok(cover)
    }

    fn build_graph(&mut self, n: usize) {
        let this = &*self;
        let per_vertex: Vec<(Vec<u32>, Vec<u32>, Vec<OwnershipConflict>)> = (0..n)
            .into_par_iter()
            .map(|u| {
                let mut pairs: Vec<(u32, u32)> = Vec::new();
                for &c in this.cliques_of(u) {
                    pairs.extend(this.clique(c as usize).iter().filter(|&&v| v as usize != u).map(|&v| (v, c)));
                }
                pairs.sort_unstable();
                let mut nbrs = Vec::with_capacity(pairs.len());
                let mut owners = Vec::with_capacity(pairs.len());
                let mut conflicts = Vec::new();
                for (v, c) in pairs {
                    if nbrs.last() == Some(&v) {
                        if (u as u32) < v {
                            conflicts.push(OwnershipConflict {
                                edge: [u as u32, v],
                                cliques: [*owners.last().unwrap(), c],
                            });
                        }
                        continue;
                    }
                    nbrs.push(v);
                    owners.push(c);
                }
                (nbrs, owners, conflicts)
            })
            .collect();
        let mut lists = Vec::with_capacity(n);
        let mut edge_owner = Vec::new();
        let mut conflicts = Vec::new();
        for (nbrs, owners, c) in per_vertex {
            lists.push(nbrs);
            edge_owner.extend(owners);
            if conflicts.len() < MAX_RECORDED_CONFLICTS {
                conflicts.extend(c.into_iter().take(MAX_RECORDED_CONFLICTS - conflicts.len()));
            }
        }
        self.graph = SparseGraph::from_sorted_lists(lists);
        self.edge_owner = edge_owner;
        self.conflicts = conflicts;
    }

    /// Full validation: unique ownership and no triangle of three cliques.
    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.conflicts.first() {
            return Err(Error::CoverViolation(format!(
                "edge ({}, {}) lies in cliques {} and {}",
                c.edge[0], c.edge[1], c.cliques[0], c.cliques[1]
            )));
        }
        if let Some(t) = self.find_clique_triangle().0 {
            return Err(Error::CoverViolation(format!(
                "vertices {:?} are pairwise joined by distinct cliques {:?}",
                t.0, t.1
            )));
        }
        Ok(())
    }

    /// A triangle of three distinct cliques, if any, plus the work done.
    pub(crate) fn find_clique_triangle(&self) -> (Option<CliqueTriangle>, u64) {
        let (hit, work) = incidence::find_block_triangle(self);
        (hit.map(|t| (t.points, t.blocks)), work)
    }

    pub fn with_meta(mut self, meta: GraphMeta) -> Self {
        self.graph = self.graph.with_meta(meta);
        self
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Number of cliques.
    pub fn len(&self) -> usize {
        self.clique_offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn clique(&self, i: usize) -> &[u32] {
        &self.members[self.clique_offsets[i]..self.clique_offsets[i + 1]]
    }

    pub fn cliques(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..self.len()).map(move |i| self.clique(i))
    }

    /// Start of each clique's slots in a flat per-incidence array.
    pub fn clique_offsets(&self) -> &[usize] {
        &self.clique_offsets
    }

    /// Total number of (clique, slot) incidences.
    pub fn incidence_count(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn cliques_of(&self, v: usize) -> &[u32] {
        &self.vertex_cliques[self.vertex_offsets[v]..self.vertex_offsets[v + 1]]
    }

    /// `(clique, slot)` pairs of vertex `v`, ordered by clique id.
    pub fn incidences(&self, v: usize) -> impl Iterator<Item = (u32, u32)> + '_ {
        let r = self.vertex_offsets[v]..self.vertex_offsets[v + 1];
        self.vertex_cliques[r.clone()]
            .iter()
            .copied()
            .zip(self.vertex_slots[r].iter().copied())
    }

    /// The base graph G1.
    pub fn graph(&self) -> &SparseGraph {
        &self.graph
    }

    /// Owning clique of edge `{u, v}`, if it is a G1 edge.
    pub fn owner(&self, u: usize, v: usize) -> Option<u32> {
        let pos = self.graph.neighbors(u).binary_search(&(v as u32)).ok()?;
        Some(self.edge_owner[self.graph.offsets()[u] + pos])
    }

    /// Ownership conflicts seen during assembly (at most 64 are recorded).
    pub fn conflicts(&self) -> &[OwnershipConflict] {
        &self.conflicts
    }
}

impl BlockSystem for CliqueCover {
    fn num_points(&self) -> usize {
        self.n()
    }
    fn num_blocks(&self) -> usize {
        self.len()
    }
    fn block(&self, b: usize) -> &[u32] {
        self.clique(b)
    }
    fn blocks_of(&self, v: usize) -> &[u32] {
        self.cliques_of(v)
    }
}

/// G1 for W(q): vertices are points, cliques are the lines in id order.
pub fn build_g1(gq: &Quadrangle) -> Result<CliqueCover> {
    let n = gq.points().len();
    let cliques = gq.lines().iter().map(|l| l.point_ids.clone()).collect();
    let cover = CliqueCover::new(n, cliques)?;
    Ok(cover.with_meta(GraphMeta {
        q: Some(gq.q()),
        kind: GraphKind::G1,
        seed: None,
    }))
}

/// Bipartite point–line incidence graph; line `i` is vertex `n + i`.
pub fn build_incidence_graph(gq: &Quadrangle) -> SparseGraph {
    let n = gq.points().len();
    let mut lists: Vec<Vec<u32>> = (0..n)
        .map(|p| gq.point_lines(p).iter().map(|&l| l + n as u32).collect())
        .collect();
    lists.extend(gq.lines().iter().map(|l| l.point_ids.clone()));
    SparseGraph::from_sorted_lists(lists).with_meta(GraphMeta {
        q: Some(gq.q()),
        kind: GraphKind::Incidence,
        seed: None,
    })
}
