//! Random bipartition of every clique and the resulting graph G.
//!
//! Each (clique, slot) incidence gets an independent fair ±1 sign derived by
//! hashing its ids with the master seed, so the assignment does not depend on
//! iteration order or thread count. Inside clique `i`, G is the complete
//! bipartite graph between the `+1` slots (A) and the `-1` slots (B).

use rayon::prelude::*;
use serde::Serialize;

use crate::cover::CliqueCover;
use crate::error::{Error, Result};
use crate::graph::{GraphKind, GraphMeta, SparseGraph, VertexSet};

const CLIQUE_MULT: u64 = 0xA24B_AED4_963E_E407;
const SLOT_MULT: u64 = 0x9FB2_1C65_1E98_DF25;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

/// The sign of slot `slot` in clique `clique` under `seed`: `+1` iff bit 0 of
/// the hash is clear. This is the reproducibility contract for G.
#[inline]
pub fn incidence_sign(seed: u64, clique: u32, slot: u32) -> i8 {
    let h = mix64(seed ^ u64::from(clique).wrapping_mul(CLIQUE_MULT) ^ u64::from(slot).wrapping_mul(SLOT_MULT));
    if h & 1 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignAssignment {
    seed: Option<u64>,
    offsets: Vec<usize>,
    signs: Vec<i8>,
}

impl SignAssignment {
    /// Explicit signs, flattened clique by clique in slot order.
    pub fn from_values(cover: &CliqueCover, signs: Vec<i8>) -> Result<Self> {
        if signs.len() != cover.incidence_count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} signs, got {}",
                cover.incidence_count(),
                signs.len()
            )));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument("signs must be +1 or -1".into()));
        }
        Ok(SignAssignment {
            seed: None,
            offsets: cover.clique_offsets().to_vec(),
            signs,
        })
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    #[inline]
    pub fn sign(&self, clique: u32, slot: u32) -> i8 {
        self.signs[self.offsets[clique as usize] + slot as usize]
    }

    pub fn clique_signs(&self, clique: usize) -> &[i8] {
        &self.signs[self.offsets[clique]..self.offsets[clique + 1]]
    }

    /// All signs, clique by clique.
    pub fn values(&self) -> &[i8] {
        &self.signs
    }

    fn matches(&self, cover: &CliqueCover) -> bool {
        self.offsets == cover.clique_offsets()
    }
}

pub fn assign_signs(cover: &CliqueCover, seed: u64) -> SignAssignment {
    let offsets = cover.clique_offsets().to_vec();
    let signs = (0..cover.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let size = offsets[i + 1] - offsets[i];
            (0..size as u32).map(move |j| incidence_sign(seed, i as u32, j))
        })
        .collect();
    SignAssignment {
        seed: Some(seed),
        offsets,
        signs,
    }
}

/// G: `{u, v}` is an edge iff the clique owning it gives u and v opposite signs.
pub fn build_g(cover: &CliqueCover, signs: &SignAssignment) -> Result<SparseGraph> {
    if !signs.matches(cover) {
        return Err(Error::InvalidArgument("sign assignment was made for a different cover".into()));
    }
    let lists: Vec<Vec<u32>> = (0..cover.n())
        .into_par_iter()
        .map(|u| {
            let mut nbrs = Vec::new();
            for (c, slot) in cover.incidences(u) {
                let own = signs.sign(c, slot);
                let members = cover.clique(c as usize);
                let side = signs.clique_signs(c as usize);
                nbrs.extend(members.iter().zip(side).filter(|(_, &s)| s != own).map(|(&v, _)| v));
            }
            nbrs.sort_unstable();
            nbrs.dedup();
            nbrs
        })
        .collect();
    let q = cover.graph().meta().and_then(|m| m.q);
    Ok(SparseGraph::from_sorted_lists(lists).with_meta(GraphMeta {
        q,
        kind: GraphKind::G,
        seed: signs.seed(),
    }))
}

/// Per-clique restriction to a subset: `t = |clique ∩ X|` and `sigma` the
/// sum of the signs of those slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CliqueTally {
    pub clique: u32,
    pub t: u32,
    pub sigma: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubsetStats {
    pub size: usize,
    /// Edges of G1 inside X, counted on the G1 adjacency.
    pub e_g1: u64,
    /// Edges of G inside X, counted on the G adjacency.
    pub e_g: u64,
    /// Number of cliques meeting X.
    pub s: usize,
    pub t_total: u64,
    /// `Q = Σ_i Σ_{j≠k} Z_ij Z_ik = Σ_i (σ_i² − t_i)`.
    pub q_form: i64,
    /// `Σ_i t_i (t_i − 1)`, the squared Frobenius norm of the block matrix.
    pub frobenius_sq: u64,
    /// `max_i (t_i − 1)`, the spectral norm of the block matrix.
    pub operator_norm: u64,
    #[serde(skip)]
    pub tallies: Vec<CliqueTally>,
}

impl SubsetStats {
    /// `4 e_G = 2 e_G1 − Q`, `‖M‖_F² = 2 e_G1` and, when `q` is given, `‖M‖ ≤ q`.
    pub fn verify(&self, q: Option<u64>) -> Result<()> {
        let lhs = 4 * self.e_g as i128;
        let rhs = 2 * self.e_g1 as i128 - self.q_form as i128;
        if lhs != rhs {
            return Err(Error::IdentityViolation(format!(
                "4 e_G = {lhs} but 2 e_G1 - Q = {rhs} (|X| = {})",
                self.size
            )));
        }
        if self.frobenius_sq != 2 * self.e_g1 {
            return Err(Error::IdentityViolation(format!(
                "frobenius^2 = {} but 2 e_G1 = {}",
                self.frobenius_sq,
                2 * self.e_g1
            )));
        }
        if let Some(q) = q {
            if self.operator_norm > q {
                return Err(Error::IdentityViolation(format!(
                    "operator norm {} exceeds q = {q}",
                    self.operator_norm
                )));
            }
        }
        Ok(())
    }
}

/// Computes the tallies from the cover and signs, and the edge counts from
/// the G1 and G adjacencies, so the identities in [`SubsetStats::verify`]
/// compare independent routes.
pub fn subset_stats(x: &VertexSet, cover: &CliqueCover, signs: &SignAssignment, g: &SparseGraph) -> SubsetStats {
    let nc = cover.len();
    let mut t = vec![0u32; nc];
    let mut sigma = vec![0i32; nc];
    let mut touched = Vec::new();
    for &u in x.members() {
        for (c, slot) in cover.incidences(u as usize) {
            let ci = c as usize;
            if t[ci] == 0 {
                touched.push(c);
            }
            t[ci] += 1;
            sigma[ci] += i32::from(signs.sign(c, slot));
        }
    }
    touched.sort_unstable();
    let tallies: Vec<CliqueTally> = touched
        .iter()
        .map(|&c| CliqueTally {
            clique: c,
            t: t[c as usize],
            sigma: sigma[c as usize],
        })
        .collect();

    let mut t_total = 0u64;
    let mut q_form = 0i64;
    let mut frobenius_sq = 0u64;
    let mut operator_norm = 0u64;
    for tally in &tallies {
        let ti = u64::from(tally.t);
        t_total += ti;
        q_form += i64::from(tally.sigma) * i64::from(tally.sigma) - ti as i64;
        frobenius_sq += ti * (ti - 1);
        operator_norm = operator_norm.max(ti - 1);
    }

    SubsetStats {
        size: x.len(),
        e_g1: cover.graph().edges_within(x),
        e_g: g.edges_within(x),
        s: tallies.len(),
        t_total,
        q_form,
        frobenius_sq,
        operator_norm,
        tallies,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::build_g1;
    use crate::geometry::Quadrangle;

    fn w(q: u64) -> CliqueCover {
        build_g1(&Quadrangle::new(q).unwrap()).unwrap()
    }

    #[test]
    fn mix64_reference_values() {
        // SplitMix64 outputs for state increments of the golden gamma.
        assert_eq!(mix64(0x9E37_79B9_7F4A_7C15), 0xE220_A839_7B1D_CDAF);
        assert_eq!(mix64(0), 0);
    }

    #[test]
    fn signs_are_deterministic() {
        let cover = w(3);
        assert_eq!(assign_signs(&cover, 9), assign_signs(&cover, 9));
        let s = assign_signs(&cover, 9);
        for i in 0..cover.len() {
            for j in 0..cover.clique(i).len() {
                assert_eq!(s.sign(i as u32, j as u32), incidence_sign(9, i as u32, j as u32));
            }
        }
    }

    #[test]
    fn seeds_zero_and_one_differ_in_about_half() {
        let cover = w(8);
        let (a, b) = (assign_signs(&cover, 0), assign_signs(&cover, 1));
        let n = a.values().len() as f64;
        let diff = a.values().iter().zip(b.values()).filter(|(x, y)| x != y).count() as f64;
        let sd = (n * 0.25).sqrt();
        assert!((diff - n / 2.0).abs() <= 5.0 * sd, "diff = {diff} of {n}");
    }

    #[test]
    fn mean_sign_is_fair_at_q8() {
        let cover = w(8);
        let s = assign_signs(&cover, 42);
        let n = s.values().len() as f64;
        let sum: i64 = s.values().iter().map(|&z| i64::from(z)).sum();
        assert!((sum as f64).abs() <= 5.0 * n.sqrt(), "sum = {sum} over {n}");
    }

    #[test]
    fn one_sided_clique_contributes_nothing() {
        let cover = CliqueCover::new(3, vec![vec![0, 1, 2]]).unwrap();
        let s = SignAssignment::from_values(&cover, vec![1, 1, 1]).unwrap();
        assert_eq!(build_g(&cover, &s).unwrap().m(), 0);
        let s = SignAssignment::from_values(&cover, vec![1, 1, -1]).unwrap();
        let g = build_g(&cover, &s).unwrap();
        assert_eq!(g.m(), 2);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 2), (1, 2)]);
    }

    #[test]
    fn rejects_bad_explicit_signs() {
        let cover = CliqueCover::new(3, vec![vec![0, 1, 2]]).unwrap();
        assert!(SignAssignment::from_values(&cover, vec![1, 1]).is_err());
        assert!(SignAssignment::from_values(&cover, vec![1, 0, 1]).is_err());
        let other = CliqueCover::new(4, vec![vec![0, 1, 2, 3]]).unwrap();
        let s = assign_signs(&other, 1);
        assert!(build_g(&cover, &s).is_err());
    }

    #[test]
    fn g_edge_total_matches_class_products() {
        // Independent route: Σ |A_i||B_i| straight from the signs.
        let cover = w(2);
        let s = assign_signs(&cover, 42);
        let g = build_g(&cover, &s).unwrap();
        let by_class: usize = (0..cover.len())
            .map(|i| {
                let pos = s.clique_signs(i).iter().filter(|&&z| z == 1).count();
                pos * (cover.clique(i).len() - pos)
            })
            .sum();
        assert_eq!(g.m(), by_class);
        let x = VertexSet::full(cover.n());
        let st = subset_stats(&x, &cover, &s, &g);
        assert_eq!(4 * st.e_g as i64, 2 * st.e_g1 as i64 - st.q_form);
        assert_eq!(st.e_g as usize, g.m());
    }

    #[test]
    fn empty_subset_is_all_zero() {
        let cover = w(2);
        let s = assign_signs(&cover, 1);
        let g = build_g(&cover, &s).unwrap();
        let st = subset_stats(&VertexSet::new(cover.n(), []).unwrap(), &cover, &s, &g);
        assert_eq!(
            (st.size, st.e_g1, st.e_g, st.s, st.t_total, st.q_form, st.frobenius_sq, st.operator_norm),
            (0, 0, 0, 0, 0, 0, 0, 0)
        );
    }

    #[test]
    fn single_monochrome_clique() {
        let cover = w(3);
        let mut values = vec![1i8; cover.incidence_count()];
        values[cover.clique_offsets()[1]] = -1;
        let s = SignAssignment::from_values(&cover, values).unwrap();
        let g = build_g(&cover, &s).unwrap();
        let x = VertexSet::new(cover.n(), cover.clique(0).iter().copied()).unwrap();
        let st = subset_stats(&x, &cover, &s, &g);
        assert_eq!(st.e_g1, 6);
        assert_eq!(st.e_g, 0);
        // The clique itself has t = 4, sigma = 4; every other clique meets X once.
        assert_eq!(st.q_form, 16 - 4);
        assert_eq!(st.operator_norm, 3);
        st.verify(Some(3)).unwrap();
    }
}
