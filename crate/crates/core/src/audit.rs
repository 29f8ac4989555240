//! Parameter sheet, subset sampling, jumbledness audit of G and the
//! Monte Carlo for the quadratic form Q.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::bipartition::{incidence_sign, mix64, subset_stats, SignAssignment};
use crate::cover::CliqueCover;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::graph::{SparseGraph, VertexSet};
use crate::spectral::MixingBound;

fn ratio_string<S: Serializer>(r: &Ratio<u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

/// Exact parameters of the construction at order `q`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoryParams {
    pub q: u64,
    pub n: u64,
    pub d_incidence: u64,
    pub lambda_incidence: f64,
    #[serde(serialize_with = "ratio_string")]
    pub p_g1: Ratio<u64>,
    pub beta_g1: u64,
    #[serde(serialize_with = "ratio_string")]
    pub p_g: Ratio<u64>,
    /// `q ln n`.
    pub beta_target_shape: f64,
    #[serde(serialize_with = "ratio_string")]
    pub union_bound_failure: Ratio<u64>,
}

pub fn theory_params(q: u64) -> Result<TheoryParams> {
    FieldSpec::new(q)?;
    let n = q * q * q + q * q + q + 1;
    debug_assert_eq!(n, (q * q + 1) * (q + 1));
    Ok(TheoryParams {
        q,
        n,
        d_incidence: q + 1,
        lambda_incidence: ((2 * q) as f64).sqrt(),
        p_g1: Ratio::new(q, q * q + 1),
        beta_g1: q + 1,
        p_g: Ratio::new(q, 2 * (q * q + 1)),
        beta_target_shape: q as f64 * (n as f64).ln(),
        // Kept unreduced so it reads as 2/(n-1).
        union_bound_failure: Ratio::new_raw(2, n - 1),
    })
}

/// Derives an independent seed for item `i` of stream `stream`.
pub fn derive_seed(seed: u64, stream: u64, i: u64) -> u64 {
    mix64(seed ^ mix64(stream.wrapping_mul(0xD1B5_4A32_D192_ED03) ^ mix64(i)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Uniform,
    SingleLine,
    LineUnion,
    Neighborhood,
    SignClass,
    Full,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Uniform,
        Family::SingleLine,
        Family::LineUnion,
        Family::Neighborhood,
        Family::SignClass,
        Family::Full,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::SingleLine => "single_line",
            Family::LineUnion => "line_union",
            Family::Neighborhood => "neighborhood",
            Family::SignClass => "sign_class",
            Family::Full => "full",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s || f.name().replace('_', "-") == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown family {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub family: Family,
    pub set: VertexSet,
}

const GRID_LEVELS: usize = 24;

/// Geometric grid of sizes from 2 to `n`.
fn size_grid(n: usize) -> Vec<usize> {
    if n < 2 {
        return vec![n.max(1)];
    }
    let ratio = (n as f64 / 2.0).powf(1.0 / (GRID_LEVELS - 1) as f64);
    let mut sizes: Vec<usize> = (0..GRID_LEVELS)
        .map(|j| ((2.0 * ratio.powi(j as i32)).round() as usize).clamp(2, n))
        .collect();
    sizes.dedup();
    sizes
}

fn random_cliques(cover: &CliqueCover, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    index::sample(rng, cover.len(), count.min(cover.len())).into_vec()
}

/// Emits `count` vertex sets cycling through `families`. The full vertex set
/// is emitted at most once. Each sample draws from its own derived seed, so
/// the output does not depend on scheduling.
pub fn sample_families(
    g: &SparseGraph,
    cover: &CliqueCover,
    signs: &SignAssignment,
    count: usize,
    families: &[Family],
    seed: u64,
) -> Result<Vec<Sample>> {
    let n = g.n();
    if n == 0 || count == 0 {
        return Ok(Vec::new());
    }
    if n != cover.n() {
        return Err(Error::InvalidArgument("graph and cover disagree on n".into()));
    }
    let mut fams: Vec<Family> = families.to_vec();
    fams.sort();
    fams.dedup();
    if fams.is_empty() {
        fams = Family::ALL.to_vec();
    }
    let with_full = fams.contains(&Family::Full);
    let cycle: Vec<Family> = fams.iter().copied().filter(|&f| f != Family::Full).collect();

    // Plan: (family, index within family).
    let mut plan = Vec::with_capacity(count);
    let mut seen: BTreeMap<Family, usize> = BTreeMap::new();
    for i in 0..count {
        let fam = if with_full && i == 0 || cycle.is_empty() {
            Family::Full
        } else {
            let j = if with_full { i - 1 } else { i };
            cycle[j % cycle.len()]
        };
        if fam == Family::Full && seen.contains_key(&Family::Full) {
            break;
        }
        let k = seen.entry(fam).or_insert(0);
        plan.push((fam, *k));
        *k += 1;
    }

    let grid = size_grid(n);
    let max_lines = ((n as f64).sqrt().floor() as usize).clamp(2, cover.len().max(2));
    plan.into_par_iter()
        .enumerate()
        .map(|(i, (fam, k))| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1, i as u64));
            let ids: Vec<u32> = match fam {
                Family::Full => (0..n as u32).collect(),
                Family::Uniform => {
                    let size = grid[k % grid.len()];
                    index::sample(&mut rng, n, size).into_iter().map(|v| v as u32).collect()
                }
                Family::SingleLine => {
                    let c = rng.random_range(0..cover.len());
                    cover.clique(c).to_vec()
                }
                Family::LineUnion => {
                    let r = rng.random_range(2..=max_lines);
                    random_cliques(cover, r, &mut rng)
                        .into_iter()
                        .flat_map(|c| cover.clique(c).iter().copied())
                        .collect()
                }
                Family::Neighborhood => {
                    let v = rng.random_range(0..n);
                    let nb = g.neighbors(v);
                    if nb.is_empty() {
                        vec![v as u32]
                    } else {
                        nb.to_vec()
                    }
                }
                Family::SignClass => loop {
                    let r = rng.random_range(1..=max_lines);
                    let ids: Vec<u32> = random_cliques(cover, r, &mut rng)
                        .into_iter()
                        .flat_map(|c| {
                            let s = signs.clique_signs(c);
                            cover
                                .clique(c)
                                .iter()
                                .zip(s)
                                .filter(|(_, &z)| z > 0)
                                .map(|(&v, _)| v)
                                .collect::<Vec<_>>()
                        })
                        .collect();
                    if !ids.is_empty() {
                        break ids;
                    }
                },
            };
            Ok(Sample { family: fam, set: VertexSet::new(n, ids)? })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditRecord {
    pub family: Family,
    pub size: usize,
    pub e_g: u64,
    pub e_g1: u64,
    /// `p C(size, 2)`.
    pub expected: f64,
    /// `|e_g - p C(size, 2)| / size`.
    pub discrepancy: f64,
    /// `discrepancy / (q ln n)`.
    pub normalized: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilySummary {
    pub count: usize,
    pub max_discrepancy: f64,
    pub max_normalized: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: Option<f64>,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscrepancyReport {
    pub q: u64,
    pub n: usize,
    pub p: f64,
    pub p_exact: String,
    pub log: &'static str,
    pub label: &'static str,
    pub families: Vec<Family>,
    pub samples: usize,
    /// Largest `|e_G(X) - p C(|X|,2)| / |X|` seen.
    pub max_discrepancy: f64,
    /// Fitted constant: `max_discrepancy / (q ln n)`.
    pub c_hat: f64,
    pub per_family: BTreeMap<Family, FamilySummary>,
    pub histogram: Vec<HistogramBin>,
    /// Largest `|e_G1(X) - p1 C(|X|,2)| / ((q+1)|X|)`; at most 1.
    pub mixing_max_ratio: f64,
    pub records: Vec<AuditRecord>,
}

/// Order `q` of the quadrangle behind the cover: every clique has `q + 1`
/// vertices and `n = (q^2+1)(q+1)`.
pub fn cover_order(cover: &CliqueCover) -> Result<u64> {
    let size = cover.cliques().next().map(<[u32]>::len).unwrap_or(0);
    let q = size.saturating_sub(1) as u64;
    let ok = q >= 2
        && cover.cliques().all(|c| c.len() == size)
        && cover.n() as u64 == (q * q + 1) * (q + 1);
    if !ok {
        return Err(Error::InvalidArgument("cover is not the line system of a W(q)".into()));
    }
    Ok(q)
}

/// `|e - q/(2(q^2+1)) C(s,2)| / s`, with the numerator formed exactly.
pub fn discrepancy(q: u64, size: usize, e_g: u64) -> f64 {
    if size == 0 {
        return 0.0;
    }
    let (q, s) = (q as i128, size as i128);
    let den = 2 * (q * q + 1);
    let num = (e_g as i128 * den - q * (s * (s - 1) / 2)).abs();
    num as f64 / (den as f64 * s as f64)
}

const HISTOGRAM_WIDTH: f64 = 0.05;
const HISTOGRAM_BINS: usize = 20;

/// Audits every sample: exact identities of [`crate::SubsetStats`], the
/// mixing bound on G1, and the normalised discrepancy of G.
pub fn audit(
    g: &SparseGraph,
    cover: &CliqueCover,
    signs: &SignAssignment,
    samples: &[Sample],
) -> Result<DiscrepancyReport> {
    let q = cover_order(cover)?;
    let n = cover.n();
    let params = theory_params(q)?;
    let scale = params.beta_target_shape;
    let mixing = MixingBound::new(q);

    let rows: Vec<(AuditRecord, f64)> = samples
        .par_iter()
        .map(|sample| {
            let stats = subset_stats(&sample.set, cover, signs, g);
            stats.verify(Some(q))?;
            if !mixing.holds(stats.size as u64, stats.e_g1) {
                return Err(Error::TheoremViolation(format!(
                    "mixing bound fails: |X| = {}, e_G1(X) = {}",
                    stats.size, stats.e_g1
                )));
            }
            let s = stats.size as f64;
            let d = discrepancy(q, stats.size, stats.e_g);
            let record = AuditRecord {
                family: sample.family,
                size: stats.size,
                e_g: stats.e_g,
                e_g1: stats.e_g1,
                expected: q as f64 / (2.0 * (q * q + 1) as f64) * s * (s - 1.0) / 2.0,
                discrepancy: d,
                normalized: d / scale,
            };
            Ok((record, mixing.ratio(stats.size as u64, stats.e_g1)))
        })
        .collect::<Result<_>>()?;

    let mut per_family: BTreeMap<Family, FamilySummary> = BTreeMap::new();
    let mut histogram: Vec<HistogramBin> = (0..=HISTOGRAM_BINS)
        .map(|b| HistogramBin {
            lo: b as f64 * HISTOGRAM_WIDTH,
            hi: (b < HISTOGRAM_BINS).then(|| (b + 1) as f64 * HISTOGRAM_WIDTH),
            count: 0,
        })
        .collect();
    let mut max_discrepancy: f64 = 0.0;
    let mut mixing_max_ratio: f64 = 0.0;
    for (r, m) in &rows {
        max_discrepancy = max_discrepancy.max(r.discrepancy);
        mixing_max_ratio = mixing_max_ratio.max(*m);
        let fam = per_family.entry(r.family).or_insert(FamilySummary {
            count: 0,
            max_discrepancy: 0.0,
            max_normalized: 0.0,
        });
        fam.count += 1;
        fam.max_discrepancy = fam.max_discrepancy.max(r.discrepancy);
        fam.max_normalized = fam.max_normalized.max(r.normalized);
        let bin = ((r.normalized / HISTOGRAM_WIDTH).floor() as usize).min(HISTOGRAM_BINS);
        histogram[bin].count += 1;
    }

    Ok(DiscrepancyReport {
        q,
        n,
        p: q as f64 / (2.0 * (q * q + 1) as f64),
        p_exact: format!("{}/{}", params.p_g.numer(), params.p_g.denom()),
        log: "natural",
        label: "sampled lower bound on β",
        families: per_family.keys().copied().collect(),
        samples: rows.len(),
        max_discrepancy,
        c_hat: max_discrepancy / scale,
        per_family,
        histogram,
        mixing_max_ratio,
        records: rows.into_iter().map(|(r, _)| r).collect(),
    })
}

#[derive(Clone, Copy, Debug)]
pub enum HwMode {
    /// Fresh sign assignments, one derived seed per trial.
    Sampled { trials: u64, seed: u64 },
    /// Every sign vector on the incidences of X, each once.
    Exhaustive,
}

/// Largest number of incidences the exhaustive mode enumerates (cliques
/// meeting X in a single vertex are not enumerated).
pub const HW_EXHAUSTIVE_LIMIT: u64 = 24;

#[derive(Clone, Debug, Serialize)]
pub struct TailRow {
    pub tau: f64,
    /// Fraction of trials with `|Q| > tau`.
    pub exceedance: f64,
    /// `2 exp(-min(tau^2 / ||M||_F^2, tau / ||M||))`, without the unknown constant.
    pub reference: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HwReport {
    pub exhaustive: bool,
    pub trials: u64,
    pub size: usize,
    pub s: usize,
    pub t_total: u64,
    pub frobenius_sq: u64,
    pub operator_norm: u64,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    /// `2 ||M||_F^2`.
    pub expected_variance: f64,
    /// Exact law of Q (exhaustive mode only), ascending in Q.
    pub distribution: Option<Vec<(i64, f64)>>,
    pub tail: Vec<TailRow>,
}

/// Slots of X inside each clique meeting it, by clique id.
fn groups(cover: &CliqueCover, x: &VertexSet) -> Vec<(u32, Vec<u32>)> {
    let mut by_clique: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &v in x.members() {
        for (c, slot) in cover.incidences(v as usize) {
            by_clique.entry(c).or_default().push(slot);
        }
    }
    by_clique.into_iter().collect()
}

fn tail_rows(values: &[(i64, f64)], frob: u64, norm: u64) -> Vec<TailRow> {
    if frob == 0 {
        return Vec::new();
    }
    let sd = (frob as f64).sqrt();
    (1..=12)
        .map(|j| {
            let tau = 0.5 * j as f64 * sd;
            let exceedance = values.iter().filter(|(v, _)| (*v as f64).abs() > tau).map(|(_, w)| w).sum();
            let expo = (tau * tau / frob as f64).min(tau / norm as f64);
            TailRow { tau, exceedance, reference: 2.0 * (-expo).exp() }
        })
        .collect()
}

/// Monte Carlo (or exhaustive enumeration) of `Q = Σ_i (σ_i² − t_i)` on a
/// fixed X under fresh sign assignments.
pub fn hw_monte_carlo(cover: &CliqueCover, x: &VertexSet, mode: HwMode) -> Result<HwReport> {
    let all = groups(cover, x);
    let t_total: u64 = all.iter().map(|(_, s)| s.len() as u64).sum();
    let s_count = all.len();
    // Cliques meeting X once contribute nothing to Q.
    let groups: Vec<(u32, Vec<u32>)> = all.into_iter().filter(|(_, s)| s.len() >= 2).collect();
    let enumerated: u64 = groups.iter().map(|(_, s)| s.len() as u64).sum();
    let frob: u64 = groups.iter().map(|(_, s)| (s.len() * (s.len() - 1)) as u64).sum();
    let norm: u64 = groups.iter().map(|(_, s)| s.len() as u64 - 1).max().unwrap_or(0);
    let expected_variance = 2.0 * frob as f64;

    // Weighted values (q, weight) with weights summing to one.
    let (weighted, trials, exhaustive): (Vec<(i64, f64)>, u64, bool) = match mode {
        HwMode::Sampled { trials, seed } => {
            if trials == 0 {
                return Err(Error::InvalidArgument("trials must be at least 1".into()));
            }
            let w = 1.0 / trials as f64;
            let values: Vec<(i64, f64)> = (0..trials)
                .into_par_iter()
                .map(|i| {
                    let trial_seed = derive_seed(seed, 2, i);
                    let q: i64 = groups
                        .iter()
                        .map(|(c, slots)| {
                            let sigma: i64 = slots
                                .iter()
                                .map(|&s| i64::from(incidence_sign(trial_seed, *c, s)))
                                .sum();
                            sigma * sigma - slots.len() as i64
                        })
                        .sum();
                    (q, w)
                })
                .collect();
            (values, trials, false)
        }
        HwMode::Exhaustive => {
            if enumerated > HW_EXHAUSTIVE_LIMIT {
                return Err(Error::InvalidArgument(format!(
                    "{enumerated} incidences exceed the exhaustive limit {HW_EXHAUSTIVE_LIMIT}"
                )));
            }
            let total = 1u64 << enumerated;
            let w = 1.0 / total as f64;
            let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
            for bits in 0..total {
                let mut shift = 0;
                let mut q = 0i64;
                for (_, slots) in &groups {
                    let t = slots.len() as u32;
                    let minus = ((bits >> shift) & ((1u64 << t) - 1)).count_ones() as i64;
                    let sigma = t as i64 - 2 * minus;
                    q += sigma * sigma - t as i64;
                    shift += t;
                }
                *counts.entry(q).or_insert(0) += 1;
            }
            let values = counts.into_iter().map(|(q, c)| (q, c as f64 * w)).collect();
            (values, total, true)
        }
    };

    let mean: f64 = weighted.iter().map(|(q, w)| *q as f64 * w).sum();
    let central = |k: i32| -> f64 { weighted.iter().map(|(q, w)| (*q as f64 - mean).powi(k) * w).sum() };
    let variance = central(2);
    let (mean_se, variance_se) = if exhaustive {
        (0.0, 0.0)
    } else {
        let n = trials as f64;
        let var_unbiased = variance * n / (n - 1.0).max(1.0);
        let m4 = central(4);
        (
            (var_unbiased / n).sqrt(),
            ((m4 - variance * variance).max(0.0) / n).sqrt(),
        )
    };
    let tail = if exhaustive {
        tail_rows(&weighted, frob, norm)
    } else {
        // Collapse equal values first; the tail scan is then cheap.
        let mut agg: BTreeMap<i64, f64> = BTreeMap::new();
        for (q, w) in &weighted {
            *agg.entry(*q).or_insert(0.0) += w;
        }
        tail_rows(&agg.into_iter().collect::<Vec<_>>(), frob, norm)
    };

    Ok(HwReport {
        exhaustive,
        trials,
        size: x.len(),
        s: s_count,
        t_total,
        frobenius_sq: frob,
        operator_norm: norm,
        mean,
        mean_se,
        variance: if exhaustive { variance } else { variance * trials as f64 / (trials as f64 - 1.0).max(1.0) },
        variance_se,
        expected_variance,
        distribution: exhaustive.then_some(weighted),
        tail,
    })
}

/// Exact law of Q on X by per-clique enumeration and convolution across
/// cliques. Probabilities are exact multiples of `2^-t` computed in `f64`.
pub fn hw_exact(cover: &CliqueCover, x: &VertexSet) -> Result<Vec<(i64, f64)>> {
    let mut law: BTreeMap<i64, f64> = BTreeMap::from([(0, 1.0)]);
    for (_, slots) in groups(cover, x) {
        let t = slots.len() as u32;
        if t > 20 {
            return Err(Error::InvalidArgument(format!("clique meets X in {t} > 20 vertices")));
        }
        let mut local: BTreeMap<i64, f64> = BTreeMap::new();
        let w = 0.5f64.powi(t as i32);
        for bits in 0..(1u64 << t) {
            let sigma: i64 = (0..t).map(|k| if bits >> k & 1 == 1 { -1 } else { 1 }).sum();
            *local.entry(sigma * sigma - t as i64).or_insert(0.0) += w;
        }
        let mut next: BTreeMap<i64, f64> = BTreeMap::new();
        for (a, pa) in &law {
            for (b, pb) in &local {
                *next.entry(a + b).or_insert(0.0) += pa * pb;
            }
        }
        law = next;
    }
    Ok(law.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartition::{assign_signs, build_g};
    use crate::cover::build_g1;
    use crate::geometry::Quadrangle;

    struct World {
        cover: CliqueCover,
        signs: SignAssignment,
        g: SparseGraph,
    }

    fn world(q: u64, seed: u64) -> World {
        let cover = build_g1(&Quadrangle::new(q).unwrap()).unwrap();
        let signs = assign_signs(&cover, seed);
        let g = build_g(&cover, &signs).unwrap();
        World { cover, signs, g }
    }

    #[test]
    fn params_examples() {
        let p2 = theory_params(2).unwrap();
        assert_eq!(p2.n, 15);
        assert_eq!(p2.p_g, Ratio::new(1, 5));
        assert_eq!(p2.beta_g1, 3);
        let p8 = theory_params(8).unwrap();
        assert_eq!(p8.n, 585);
        assert_eq!(p8.p_g, Ratio::new(4, 65));
        assert_eq!(p8.p_g1, Ratio::new(8, 65));
        assert_eq!(p8.p_g * 2, p8.p_g1);
        let p32 = theory_params(32).unwrap();
        assert_eq!(p32.n, 33825);
        assert_eq!(p32.union_bound_failure, Ratio::new(2, 33824));
        assert_eq!(p32.union_bound_failure.to_string(), "2/33824");
        assert!(matches!(theory_params(6), Err(Error::UnsupportedOrder(6))));
        let json = serde_json::to_value(&p8).unwrap();
        assert_eq!(json["p_g"], "4/65");
    }

    #[test]
    fn families_contract() {
        let w = world(8, 3);
        assert!(sample_families(&w.g, &w.cover, &w.signs, 0, &Family::ALL, 1).unwrap().is_empty());
        let samples = sample_families(&w.g, &w.cover, &w.signs, 600, &Family::ALL, 1).unwrap();
        assert_eq!(samples.len(), 600);
        assert_eq!(samples.iter().filter(|s| s.family == Family::Full).count(), 1);
        for s in &samples {
            assert!(!s.set.is_empty() && s.set.len() <= 585);
            assert!(s.set.members().windows(2).all(|p| p[0] < p[1]));
            if s.family == Family::SingleLine {
                assert_eq!(s.set.len(), 9);
            }
        }
        let again = sample_families(&w.g, &w.cover, &w.signs, 600, &Family::ALL, 1).unwrap();
        assert!(samples.iter().zip(&again).all(|(a, b)| a.set.members() == b.set.members()));
        let only_full = sample_families(&w.g, &w.cover, &w.signs, 5, &[Family::Full], 1).unwrap();
        assert_eq!(only_full.len(), 1);
    }

    #[test]
    fn full_set_audit_q2() {
        for seed in [0, 1, 42] {
            let w = world(2, seed);
            let full = vec![Sample { family: Family::Full, set: VertexSet::full(15) }];
            let r = audit(&w.g, &w.cover, &w.signs, &full).unwrap();
            let rec = &r.records[0];
            assert_eq!(rec.e_g as usize, w.g.m());
            assert_eq!(rec.e_g1, 45);
            let direct = (rec.e_g as f64 - 0.2 * 105.0).abs() / 15.0;
            assert!((rec.discrepancy - direct).abs() < 1e-12);
            assert_eq!(r.p_exact, "1/5");
        }
    }

    #[test]
    fn balanced_line_edges() {
        // Any line whose signs split ceil/floor carries exactly that product of edges.
        let w = world(4, 9);
        let mut hit = false;
        for c in 0..w.cover.len() {
            let plus = w.signs.clique_signs(c).iter().filter(|&&z| z > 0).count();
            if plus == 3 || plus == 2 {
                let set = VertexSet::new(w.g.n(), w.cover.clique(c).iter().copied()).unwrap();
                let r = audit(&w.g, &w.cover, &w.signs, &[Sample { family: Family::SingleLine, set }]).unwrap();
                assert_eq!(r.records[0].e_g, 6);
                hit = true;
            }
        }
        assert!(hit);
    }

    #[test]
    fn discrepancy_is_recomputable() {
        let w = world(8, 5);
        let samples = sample_families(&w.g, &w.cover, &w.signs, 200, &Family::ALL, 2).unwrap();
        let r = audit(&w.g, &w.cover, &w.signs, &samples).unwrap();
        for rec in &r.records {
            let s = rec.size as f64;
            let direct = (rec.e_g as f64 - 4.0 / 65.0 * s * (s - 1.0) / 2.0).abs() / s;
            assert!((rec.discrepancy - direct).abs() <= 1e-9 * direct.max(1.0));
        }
        assert!(r.mixing_max_ratio <= 1.0);
        assert_eq!(r.histogram.iter().map(|b| b.count).sum::<usize>(), 200);
    }

    #[test]
    fn single_clique_exact_law() {
        let cover = CliqueCover::new(3, vec![vec![0, 1, 2]]).unwrap();
        let x = VertexSet::full(3);
        let law = hw_exact(&cover, &x).unwrap();
        assert_eq!(law, vec![(-2, 0.75), (6, 0.25)]);
        let ex = hw_monte_carlo(&cover, &x, HwMode::Exhaustive).unwrap();
        assert_eq!(ex.distribution.unwrap(), law);
        assert_eq!(ex.trials, 8);
        assert_eq!(ex.mean, 0.0);
        assert_eq!(ex.variance, 12.0);
        assert_eq!(ex.expected_variance, 12.0);
    }

    #[test]
    fn exhaustive_matches_convolution() {
        let w = world(3, 0);
        // Two lines of W(3): 8 points, at most 16 incidences on lines meeting X twice.
        let mut ids: Vec<u32> = w.cover.clique(0).to_vec();
        ids.extend_from_slice(w.cover.clique(1));
        let x = VertexSet::new(w.g.n(), ids).unwrap();
        let ex = hw_monte_carlo(&w.cover, &x, HwMode::Exhaustive).unwrap();
        let exact = hw_exact(&w.cover, &x).unwrap();
        let dist = ex.distribution.unwrap();
        assert_eq!(dist.len(), exact.len());
        for ((a, pa), (b, pb)) in dist.iter().zip(&exact) {
            assert_eq!(a, b);
            assert!((pa - pb).abs() <= f64::EPSILON);
        }
        assert!((ex.variance - ex.expected_variance).abs() < 1e-9);
    }

    #[test]
    fn monte_carlo_moments_small() {
        let w = world(4, 0);
        let x = VertexSet::full(w.g.n());
        let r = hw_monte_carlo(&w.cover, &x, HwMode::Sampled { trials: 20_000, seed: 3 }).unwrap();
        assert!(r.mean.abs() <= 4.0 * r.mean_se);
        assert!((r.variance - r.expected_variance).abs() <= 5.0 * r.variance_se);
        assert_eq!(r.tail.len(), 12);
        assert!(r.tail.windows(2).all(|p| p[0].exceedance >= p[1].exceedance));
    }
}
