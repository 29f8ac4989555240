//! Certificates for triangle-freeness, girth and the quadrangle axioms.
//!
//! A failing certificate always carries a witness that can be replayed
//! against the object it was computed from.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::bipartition::SignAssignment;
use crate::cover::CliqueCover;
use crate::error::{Error, Result};
use crate::graph::SparseGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    TriangleFreeExhaustive,
    TriangleFreeStructural,
    Girth,
    GqAxioms,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Witness {
    Triangle { vertices: [u32; 3] },
    Cycle { vertices: Vec<u32> },
    Count { what: String, expected: u64, found: u64 },
    Degree { what: String, id: u32, expected: usize, found: usize },
    NotIsotropic { line: u32, points: [u32; 2] },
    SharedPair { points: [u32; 2], lines: [u32; 2] },
    LineTriangle { points: [u32; 3], lines: [u32; 3] },
    GqAxiom { point: u32, line: u32, collinear: usize },
    OwnershipConflict { edge: [u32; 2], cliques: [u32; 2] },
    CliqueTriangle { vertices: [u32; 3], cliques: [u32; 3] },
    /// A G edge that is not an opposite-sign pair of its owning clique.
    ForeignEdge { edge: [u32; 2], owner: Option<u32> },
}

impl Witness {
    /// Re-checks a graph-level witness. Non-graph witnesses replay as `false`.
    pub fn replay(&self, g: &SparseGraph) -> bool {
        match self {
            Witness::Triangle { vertices: [a, b, c] } => {
                let (a, b, c) = (*a as usize, *b as usize, *c as usize);
                a < g.n() && b < g.n() && c < g.n() && g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c)
            }
            Witness::Cycle { vertices } => {
                let k = vertices.len();
                let mut distinct = vertices.clone();
                distinct.sort_unstable();
                distinct.dedup();
                k >= 3
                    && distinct.len() == k
                    && vertices.iter().all(|&v| (v as usize) < g.n())
                    && (0..k).all(|i| g.has_edge(vertices[i] as usize, vertices[(i + 1) % k] as usize))
            }
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub verdict: Verdict,
    /// The property that failed, if any.
    pub premise: Option<String>,
    pub witness: Option<Witness>,
    pub stats: BTreeMap<String, u64>,
}

impl Certificate {
    pub fn new(kind: CertificateKind) -> Self {
        Certificate {
            kind,
            verdict: Verdict::Pass,
            premise: None,
            witness: None,
            stats: BTreeMap::new(),
        }
    }

    pub(crate) fn fail(mut self, premise: &str, witness: Witness) -> Self {
        self.verdict = Verdict::Fail;
        self.premise = Some(premise.to_string());
        self.witness = Some(witness);
        self
    }

    pub(crate) fn count(&mut self, key: &str, v: u64) {
        *self.stats.entry(key.to_string()).or_default() += v;
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            Ok(self)
        } else {
            Err(Error::CertificateFailure(Box::new(self)))
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {:?}", self.kind, self.verdict)?;
        if let Some(p) = &self.premise {
            write!(f, " ({p})")?;
        }
        if let Some(w) = &self.witness {
            write!(f, " witness {w:?}")?;
        }
        Ok(())
    }
}

/// Sorted-list intersection size with an early exit on the first common element.
#[inline]
fn first_common(a: &[u32], b: &[u32], work: &mut u64) -> Option<u32> {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        *work += 1;
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return Some(a[i]),
        }
    }
    None
}

/// Exhaustive scan. Edges are oriented from lower to higher (degree, id) rank
/// and each oriented edge intersects the two out-lists; on failure the
/// lexicographically least triangle is reported.
pub fn check_triangle_free(g: &SparseGraph) -> Certificate {
    let mut cert = Certificate::new(CertificateKind::TriangleFreeExhaustive);
    let n = g.n();
    let rank = |u: usize| (g.degree(u), u);
    let out: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|u| {
            g.neighbors(u)
                .iter()
                .copied()
                .filter(|&v| rank(v as usize) > rank(u))
                .collect()
        })
        .collect();
    let (found, work) = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut work = 0u64;
            for &v in &out[u] {
                if first_common(&out[u], &out[v as usize], &mut work).is_some() {
                    return (true, work);
                }
            }
            (false, work)
        })
        .reduce(|| (false, 0), |a, b| (a.0 || b.0, a.1 + b.1));
    cert.count("edges", g.m() as u64);
    cert.count("intersection-steps", work);
    if !found {
        return cert;
    }
    let witness = least_triangle(g).expect("a triangle was detected");
    cert.fail("G contains no triangle", Witness::Triangle { vertices: witness })
}

fn least_triangle(g: &SparseGraph) -> Option<[u32; 3]> {
    (0..g.n()).into_par_iter().find_map_first(|a| {
        let na = g.neighbors(a);
        for &b in na.iter().filter(|&&b| b as usize > a) {
            let nb = g.neighbors(b as usize);
            let above = |l: &[u32]| -> usize { l.partition_point(|&c| c <= b) };
            let mut work = 0;
            if let Some(c) = first_common(&na[above(na)..], &nb[above(nb)..], &mut work) {
                return Some([a as u32, b, c]);
            }
        }
        None
    })
}

/// Certifies triangle-freeness of `g` from the cover and signs it was built
/// from, without a triangle scan:
///
/// - P1: every G1 edge has a unique owning clique;
/// - P2: no three distinct cliques pairwise meet in three distinct vertices;
/// - P3: `g` is exactly the union over cliques of the complete bipartite
///   graphs between opposite sign classes.
///
/// Under P1 a triangle of G inside one clique would be an odd cycle in a
/// bipartite graph; under P2 its three edges cannot come from three cliques.
pub fn check_structural(cover: &CliqueCover, signs: &SignAssignment, g: &SparseGraph) -> Certificate {
    let mut cert = Certificate::new(CertificateKind::TriangleFreeStructural);

    if let Some(c) = cover.conflicts().first() {
        return cert.fail(
            "P1: every G1 edge lies in exactly one clique",
            Witness::OwnershipConflict {
                edge: c.edge,
                cliques: c.cliques,
            },
        );
    }
    cert.count("p1-edges", cover.graph().m() as u64);

    let (tri, work) = cover.find_clique_triangle();
    cert.count("p2-steps", work);
    if let Some((vertices, cliques)) = tri {
        return cert.fail(
            "P2: no triangle of three distinct cliques",
            Witness::CliqueTriangle { vertices, cliques },
        );
    }

    if g.n() != cover.n() || signs.values().len() != cover.incidence_count() {
        return cert.fail(
            "P3: G, cover and signs share a vertex set",
            Witness::Count {
                what: "vertices".into(),
                expected: cover.n() as u64,
                found: g.n() as u64,
            },
        );
    }
    let expected: u64 = (0..cover.len())
        .map(|i| {
            let pos = signs.clique_signs(i).iter().filter(|&&z| z > 0).count() as u64;
            pos * (cover.clique(i).len() as u64 - pos)
        })
        .sum();
    let foreign = (0..g.n()).into_par_iter().find_map_first(|u| {
        for &v in g.neighbors(u).iter().filter(|&&v| v as usize > u) {
            let owner = cover.owner(u, v as usize);
            let opposite = owner.is_some_and(|c| {
                let members = cover.clique(c as usize);
                let su = members.binary_search(&(u as u32)).expect("owner contains u");
                let sv = members.binary_search(&v).expect("owner contains v");
                signs.sign(c, su as u32) != signs.sign(c, sv as u32)
            });
            if !opposite {
                return Some(Witness::ForeignEdge {
                    edge: [u as u32, v],
                    owner,
                });
            }
        }
        None
    });
    cert.count("p3-edges", g.m() as u64);
    if let Some(w) = foreign {
        return cert.fail("P3: every G edge joins opposite sign classes of its clique", w);
    }
    if g.m() as u64 != expected {
        return cert.fail(
            "P3: each clique contributes the complete bipartite graph |A||B|",
            Witness::Count {
                what: "edges".into(),
                expected,
                found: g.m() as u64,
            },
        );
    }
    cert
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Girth {
    Exact(u32),
    /// No cycle of length at most the cap.
    AboveCap(u32),
}

/// Exact girth up to `cap`, by truncated BFS from every vertex.
pub fn girth(g: &SparseGraph, cap: u32) -> Girth {
    match shortest_cycle(g, cap) {
        Some(c) => Girth::Exact(c.len() as u32),
        None => Girth::AboveCap(cap),
    }
}

/// Passes iff the girth is at least `min`; a failure carries a short cycle.
pub fn girth_certificate(g: &SparseGraph, min: u32) -> Certificate {
    let mut cert = Certificate::new(CertificateKind::Girth);
    cert.count("vertices", g.n() as u64);
    match shortest_cycle(g, min.saturating_sub(1)) {
        None => cert,
        Some(cycle) => cert.fail(&format!("girth >= {min}"), Witness::Cycle { vertices: cycle }),
    }
}

/// A shortest cycle of length `<= cap`, if one exists.
fn shortest_cycle(g: &SparseGraph, cap: u32) -> Option<Vec<u32>> {
    const UNSEEN: u32 = u32::MAX;
    let n = g.n();
    let best = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![UNSEEN; n], vec![UNSEEN; n], Vec::new(), VecDeque::new()),
            |(dist, parent, seen, queue), root| {
                for &v in seen.iter() {
                    dist[v as usize] = UNSEEN;
                }
                seen.clear();
                queue.clear();
                dist[root] = 0;
                parent[root] = UNSEEN;
                seen.push(root as u32);
                queue.push_back(root as u32);
                let mut best: Option<(u32, u32, u32)> = None;
                let limit = |best: &Option<(u32, u32, u32)>| best.map_or(cap, |b| b.0 - 1);
                while let Some(u) = queue.pop_front() {
                    let du = dist[u as usize];
                    // Cycles closed from here on have length >= 2 du.
                    if 2 * du > limit(&best) {
                        break;
                    }
                    for &w in g.neighbors(u as usize) {
                        if dist[w as usize] == UNSEEN {
                            dist[w as usize] = du + 1;
                            parent[w as usize] = u;
                            seen.push(w);
                            queue.push_back(w);
                        } else if parent[u as usize] != w {
                            let len = du + dist[w as usize] + 1;
                            if len <= limit(&best) {
                                best = Some((len, u, w));
                            }
                        }
                    }
                }
                best.map(|(len, u, w)| {
                    let path = |mut x: u32| {
                        let mut p = vec![x];
                        while parent[x as usize] != UNSEEN {
                            x = parent[x as usize];
                            p.push(x);
                        }
                        p
                    };
                    let (mut pu, mut pw) = (path(u), path(w));
                    // Strip the shared prefix from the root, keeping the branch point.
                    while pu.len() >= 2 && pw.len() >= 2 && pu[pu.len() - 2] == pw[pw.len() - 2] {
                        pu.pop();
                        pw.pop();
                    }
                    // u .. branch point, then back down the other side to w.
                    pw.pop();
                    let mut cycle = pu;
                    cycle.extend(pw.into_iter().rev());
                    (len, cycle)
                })
            },
        )
        .flatten()
        .min_by_key(|(len, cycle)| (*len, cycle.clone()));
    best.map(|(_, cycle)| cycle)
}
