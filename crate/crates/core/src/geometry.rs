//! The symplectic generalized quadrangle W(q).
//!
//! Points are all points of PG(3, q); lines are the totally isotropic lines
//! of the alternating form `x0 y1 - x1 y0 + x2 y3 - x3 y2`. Both tables have
//! `q^3 + q^2 + q + 1` entries, every line carries `q + 1` points and every
//! point lies on `q + 1` lines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::certify::{Certificate, CertificateKind, Witness};
use crate::error::Result;
use crate::field::{FieldElement, FieldSpec};
use crate::incidence::{self, BlockSystem};

pub type Vector4 = [FieldElement; 4];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectivePoint {
    pub index: u32,
    /// Normalized: the first nonzero coordinate is 1.
    pub coords: Vector4,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotropicLine {
    pub id: u32,
    /// Sorted ids of the `q + 1` incident points.
    pub point_ids: Vec<u32>,
    /// Reduced row echelon basis.
    pub basis: [Vector4; 2],
}

/// `q^3 + q^2 + q + 1`, the number of points (and of lines) of W(q).
pub fn quadrangle_order(q: u64) -> u64 {
    (q * q + 1) * (q + 1)
}

/// The alternating form `x0 y1 - x1 y0 + x2 y3 - x3 y2`.
pub fn symplectic_form(f: &FieldSpec, x: &Vector4, y: &Vector4) -> FieldElement {
    let a = f.sub(f.mul(x[0], y[1]), f.mul(x[1], y[0]));
    let b = f.sub(f.mul(x[2], y[3]), f.mul(x[3], y[2]));
    f.add(a, b)
}

/// Scales `v` so its first nonzero coordinate is 1. `None` for the zero vector.
pub fn normalize(f: &FieldSpec, v: &Vector4) -> Option<Vector4> {
    let lead = v.iter().copied().find(|c| !c.is_zero())?;
    let inv = f.inv(lead).ok()?;
    Some(v.map(|c| f.mul(c, inv)))
}

/// Position of a normalized point in lexicographic enumeration order.
pub fn point_index(f: &FieldSpec, coords: &Vector4) -> Option<u32> {
    let q = u64::from(f.order());
    let k = coords.iter().position(|c| !c.is_zero())?;
    if coords[k] != FieldElement::ONE {
        return None;
    }
    // Groups by leading position: (0,0,0,1) < (0,0,1,*) < (0,1,*,*) < (1,*,*,*).
    let offset = match k {
        3 => 0,
        2 => 1,
        1 => 1 + q,
        _ => 1 + q + q * q,
    };
    let rank = coords[k + 1..]
        .iter()
        .fold(0u64, |acc, c| acc * q + u64::from(c.value()));
    u32::try_from(offset + rank).ok()
}

/// All normalized points of PG(3, q) in lexicographic order of coordinates.
pub fn enumerate_points(f: &FieldSpec) -> Vec<ProjectivePoint> {
    let q = f.order();
    let mut points = Vec::with_capacity(quadrangle_order(u64::from(q)) as usize);
    let el = |v: u32| f.element(v).expect("in range");
    for lead in (0..4).rev() {
        let free = 3 - lead;
        let count = u64::from(q).pow(free as u32);
        for rank in 0..count {
            let mut coords = [FieldElement::ZERO; 4];
            coords[lead] = FieldElement::ONE;
            let mut r = rank;
            for pos in (lead + 1..4).rev() {
                coords[pos] = el((r % u64::from(q)) as u32);
                r /= u64::from(q);
            }
            points.push(ProjectivePoint {
                index: points.len() as u32,
                coords,
            });
        }
    }
    points
}

/// Every totally isotropic line, ordered lexicographically by its reduced
/// echelon basis, with resolved point ids.
pub fn enumerate_lines(f: &FieldSpec) -> Vec<IsotropicLine> {
    let q = f.order();
    let mut bases: Vec<[Vector4; 2]> = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let free1: Vec<usize> = (i + 1..4).filter(|&c| c != j).collect();
            let free2: Vec<usize> = (j + 1..4).collect();
            let slots: Vec<(usize, usize)> = free1
                .iter()
                .map(|&c| (0, c))
                .chain(free2.iter().map(|&c| (1, c)))
                .collect();
            let total = u64::from(q).pow(slots.len() as u32);
            for code in 0..total {
                let mut b1 = [FieldElement::ZERO; 4];
                let mut b2 = [FieldElement::ZERO; 4];
                b1[i] = FieldElement::ONE;
                b2[j] = FieldElement::ONE;
                let mut r = code;
                for &(row, pos) in slots.iter().rev() {
                    let digit = f.element((r % u64::from(q)) as u32).expect("in range");
                    r /= u64::from(q);
                    if row == 0 {
                        b1[pos] = digit;
                    } else {
                        b2[pos] = digit;
                    }
                }
                if symplectic_form(f, &b1, &b2).is_zero() {
                    bases.push([b1, b2]);
                }
            }
        }
    }
    bases.sort_unstable();
    bases
        .into_iter()
        .enumerate()
        .map(|(id, basis)| IsotropicLine {
            id: id as u32,
            point_ids: line_points(f, &basis),
            basis,
        })
        .collect()
}

/// Point ids of span{b1, b2}: b2 and b1 + c·b2 for every c. Both are already
/// normalized because b1 leads at an earlier position than b2.
fn line_points(f: &FieldSpec, basis: &[Vector4; 2]) -> Vec<u32> {
    let [b1, b2] = basis;
    let mut ids: Vec<u32> = f
        .elements()
        .map(|c| {
            let v: Vector4 = std::array::from_fn(|k| f.add(b1[k], f.mul(c, b2[k])));
            point_index(f, &v).expect("normalized")
        })
        .collect();
    ids.push(point_index(f, b2).expect("normalized"));
    ids.sort_unstable();
    ids
}

#[derive(Clone, Debug)]
pub struct Quadrangle {
    spec: FieldSpec,
    points: Vec<ProjectivePoint>,
    lines: Vec<IsotropicLine>,
    point_lines: Vec<Vec<u32>>,
}

impl Quadrangle {
    pub fn new(q: u64) -> Result<Self> {
        Ok(Self::build(FieldSpec::new(q)?))
    }

    pub fn build(spec: FieldSpec) -> Self {
        let points = enumerate_points(&spec);
        let lines = enumerate_lines(&spec);
        Self::from_parts(spec, points, lines)
    }

    /// Assembles a geometry from explicit tables and indexes point → lines.
    /// Nothing is validated here; see [`certify_gq`].
    pub fn from_parts(spec: FieldSpec, points: Vec<ProjectivePoint>, lines: Vec<IsotropicLine>) -> Self {
        let mut point_lines = vec![Vec::new(); points.len()];
        for line in &lines {
            for &p in &line.point_ids {
                point_lines[p as usize].push(line.id);
            }
        }
        for pl in &mut point_lines {
            pl.sort_unstable();
        }
        Quadrangle {
            spec,
            points,
            lines,
            point_lines,
        }
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn q(&self) -> u32 {
        self.spec.order()
    }

    pub fn points(&self) -> &[ProjectivePoint] {
        &self.points
    }

    pub fn lines(&self) -> &[IsotropicLine] {
        &self.lines
    }

    pub fn point_lines(&self, p: usize) -> &[u32] {
        &self.point_lines[p]
    }

    /// Decomposes into the raw tables, e.g. to plant a defect.
    pub fn into_parts(self) -> (FieldSpec, Vec<ProjectivePoint>, Vec<IsotropicLine>) {
        (self.spec, self.points, self.lines)
    }

    /// The line through two distinct points, if they are collinear.
    pub fn common_line(&self, a: usize, b: usize) -> Option<u32> {
        let (la, lb) = (&self.point_lines[a], &self.point_lines[b]);
        let (mut i, mut j) = (0, 0);
        while i < la.len() && j < lb.len() {
            match la[i].cmp(&lb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return Some(la[i]),
            }
        }
        None
    }
}

impl BlockSystem for Quadrangle {
    fn num_points(&self) -> usize {
        self.points.len()
    }
    fn num_blocks(&self) -> usize {
        self.lines.len()
    }
    fn block(&self, b: usize) -> &[u32] {
        &self.lines[b].point_ids
    }
    fn blocks_of(&self, v: usize) -> &[u32] {
        &self.point_lines[v]
    }
}

/// How much of the point–line axiom to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GqCheck {
    /// Every non-incident point–line pair.
    Exhaustive,
    /// `pairs` random non-incident pairs; the other axioms stay exhaustive.
    Sampled { pairs: usize, seed: u64 },
}

/// Verifies regularity, isotropy, that two lines meet in at most one point,
/// that no three lines form a triangle, and the quadrangle axiom: a point off
/// a line is collinear with exactly one of its points.
pub fn certify_gq(gq: &Quadrangle, check: GqCheck) -> Certificate {
    let mut cert = Certificate::new(CertificateKind::GqAxioms);
    let f = gq.spec();
    let q = gq.q() as usize;
    let n = quadrangle_order(q as u64) as usize;

    if gq.points.len() != n || gq.lines.len() != n {
        return cert.fail(
            "point and line counts equal q^3 + q^2 + q + 1",
            Witness::Count {
                what: "points/lines".into(),
                expected: n as u64,
                found: gq.points.len().max(gq.lines.len()) as u64,
            },
        );
    }
    for line in &gq.lines {
        if line.point_ids.len() != q + 1 {
            return cert.fail(
                "every line has q + 1 points",
                Witness::Degree {
                    what: "line".into(),
                    id: line.id,
                    expected: q + 1,
                    found: line.point_ids.len(),
                },
            );
        }
    }
    for (p, lines) in gq.point_lines.iter().enumerate() {
        if lines.len() != q + 1 {
            return cert.fail(
                "every point lies on q + 1 lines",
                Witness::Degree {
                    what: "point".into(),
                    id: p as u32,
                    expected: q + 1,
                    found: lines.len(),
                },
            );
        }
    }
    cert.count("regularity", (2 * n) as u64);

    for line in &gq.lines {
        let ids = &line.point_ids;
        for (a, &u) in ids.iter().enumerate() {
            for &v in &ids[a + 1..] {
                let (x, y) = (&gq.points[u as usize].coords, &gq.points[v as usize].coords);
                if !symplectic_form(f, x, y).is_zero() {
                    return cert.fail(
                        "every line is totally isotropic",
                        Witness::NotIsotropic {
                            line: line.id,
                            points: [u, v],
                        },
                    );
                }
            }
        }
    }
    cert.count("isotropy", (n * q * (q + 1) / 2) as u64);

    let (pair, work) = incidence::find_repeated_pair(gq);
    cert.count("shared-pair", work);
    if let Some(hit) = pair {
        return cert.fail(
            "two points share at most one line",
            Witness::SharedPair {
                points: hit.points,
                lines: hit.blocks,
            },
        );
    }

    let (tri, work) = incidence::find_block_triangle(gq);
    cert.count("line-triangle", work);
    if let Some(hit) = tri {
        return cert.fail(
            "no three lines pairwise meet in three distinct points",
            Witness::LineTriangle {
                points: hit.points,
                lines: hit.blocks,
            },
        );
    }

    let axiom = match check {
        GqCheck::Exhaustive => axiom_exhaustive(gq),
        GqCheck::Sampled { pairs, seed } => axiom_sampled(gq, pairs, seed),
    };
    cert.count("axiom-pairs", axiom.1);
    if let Some(w) = axiom.0 {
        return cert.fail("a point off a line is collinear with exactly one of its points", w);
    }
    cert
}

fn mark_collinear(gq: &Quadrangle, p: usize, stamp: &mut [u32]) {
    for &l in &gq.point_lines[p] {
        for &x in &gq.lines[l as usize].point_ids {
            stamp[x as usize] = p as u32;
        }
    }
}

fn collinear_on(gq: &Quadrangle, p: usize, line: usize, stamp: &[u32]) -> usize {
    gq.lines[line]
        .point_ids
        .iter()
        .filter(|&&x| stamp[x as usize] == p as u32)
        .count()
}

fn axiom_exhaustive(gq: &Quadrangle) -> (Option<Witness>, u64) {
    use rayon::prelude::*;
    let n = gq.points.len();
    let results: Vec<(Option<Witness>, u64)> = (0..n)
        .into_par_iter()
        .map_init(
            || vec![u32::MAX; n],
            |stamp, p| {
                mark_collinear(gq, p, stamp);
                let mut checked = 0;
                for line in 0..gq.lines.len() {
                    if gq.point_lines[p].binary_search(&(line as u32)).is_ok() {
                        continue;
                    }
                    checked += 1;
                    let c = collinear_on(gq, p, line, stamp);
                    if c != 1 {
                        let w = Witness::GqAxiom {
                            point: p as u32,
                            line: line as u32,
                            collinear: c,
                        };
                        return (Some(w), checked);
                    }
                }
                (None, checked)
            },
        )
        .collect();
    let checked = results.iter().map(|r| r.1).sum();
    (results.into_iter().find_map(|r| r.0), checked)
}

fn axiom_sampled(gq: &Quadrangle, pairs: usize, seed: u64) -> (Option<Witness>, u64) {
    let n = gq.points.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stamp = vec![u32::MAX; n];
    let mut checked = 0u64;
    while (checked as usize) < pairs {
        let p = rng.random_range(0..n);
        let line = rng.random_range(0..gq.lines.len());
        if gq.point_lines[p].binary_search(&(line as u32)).is_ok() {
            continue;
        }
        checked += 1;
        mark_collinear(gq, p, &mut stamp);
        let c = collinear_on(gq, p, line, &stamp);
        if c != 1 {
            let w = Witness::GqAxiom {
                point: p as u32,
                line: line as u32,
                collinear: c,
            };
            return (Some(w), checked);
        }
    }
    (None, checked)
}
