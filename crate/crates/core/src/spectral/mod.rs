//! Adjacency spectra: a dense solver for small graphs, Lanczos for the
//! extremes of large ones, and the checks built on top of them.

mod dense;
mod lanczos;

use serde::Serialize;

pub use dense::symmetric_eigenvalues;

use crate::error::{Error, Result};
use crate::graph::{SparseGraph, VertexSet};

/// Largest graph handed to the dense solver.
pub const DENSE_LIMIT: usize = 2000;

/// Start-vector seed used when the caller does not supply one.
pub const DEFAULT_LANCZOS_SEED: u64 = 0x5EED_1A2C_0500_0001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Lanczos,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub method: Method,
    pub n: usize,
    /// Descending. The full spectrum for dense; the `k` largest followed by
    /// the `k` smallest for Lanczos.
    pub eigenvalues: Vec<f64>,
    /// `||A v - lambda v|| / ||v||` per entry of `eigenvalues` (Lanczos only).
    pub residuals: Option<Vec<f64>>,
    pub d: Option<usize>,
    pub bipartite: bool,
    /// Largest |eigenvalue| after dropping the principal one (and, for
    /// bipartite graphs, its mirror image).
    pub lambda: f64,
    pub iterations: usize,
}

impl SpectralReport {
    pub fn largest(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn smallest(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn second_largest(&self) -> Option<f64> {
        self.eigenvalues.get(1).copied()
    }

    pub fn max_residual(&self) -> Option<f64> {
        self.residuals.as_ref().map(|r| r.iter().cloned().fold(0.0, f64::max))
    }
}

fn non_principal_lambda(eigenvalues: &[f64], bipartite: bool) -> f64 {
    let len = eigenvalues.len();
    let end = if bipartite { len.saturating_sub(1) } else { len };
    if end <= 1 {
        return 0.0;
    }
    eigenvalues[1].abs().max(eigenvalues[end - 1].abs())
}

fn is_bipartite(g: &SparseGraph) -> bool {
    g.m() > 0 && g.bipartite_coloring().is_some()
}

/// Full spectrum by Householder tridiagonalisation and implicit QL.
pub fn dense_spectrum(g: &SparseGraph) -> Result<SpectralReport> {
    let n = g.n();
    if n > DENSE_LIMIT {
        return Err(Error::SizeLimit { n, limit: DENSE_LIMIT });
    }
    let mut a = vec![0.0; n * n];
    for u in 0..n {
        for &v in g.neighbors(u) {
            a[u * n + v as usize] = 1.0;
        }
    }
    let eigenvalues = symmetric_eigenvalues(&a, n)?;
    let bipartite = is_bipartite(g);
    Ok(SpectralReport {
        method: Method::Dense,
        n,
        lambda: non_principal_lambda(&eigenvalues, bipartite),
        eigenvalues,
        residuals: None,
        d: g.regular_degree(),
        bipartite,
        iterations: 0,
    })
}

#[derive(Clone, Debug)]
pub struct LanczosConfig {
    pub k: usize,
    pub tol: f64,
    /// Defaults to `10 k sqrt(n)`.
    pub max_iter: Option<usize>,
    pub seed: u64,
}

impl LanczosConfig {
    pub fn new(k: usize, tol: f64) -> Self {
        LanczosConfig { k, tol, max_iter: None, seed: DEFAULT_LANCZOS_SEED }
    }
}

/// The `k` largest and `k` smallest eigenvalues with residuals at most `tol`.
pub fn extreme_eigs(g: &SparseGraph, k: usize, tol: f64) -> Result<SpectralReport> {
    extreme_eigs_with(g, &LanczosConfig::new(k, tol))
}

pub fn extreme_eigs_with(g: &SparseGraph, cfg: &LanczosConfig) -> Result<SpectralReport> {
    let n = g.n();
    if n == 0 {
        return Err(Error::InvalidArgument("empty graph".into()));
    }
    if cfg.k == 0 || cfg.k > 8 {
        return Err(Error::InvalidArgument(format!("k = {} outside 1..=8", cfg.k)));
    }
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance {} must be positive", cfg.tol)));
    }
    let cap = cfg
        .max_iter
        .unwrap_or_else(|| (10.0 * cfg.k as f64 * (n as f64).sqrt()).ceil() as usize);
    let out = lanczos::run(g, cfg.k, cfg.tol, cap, cfg.seed)?;
    let bipartite = is_bipartite(g);
    Ok(SpectralReport {
        method: Method::Lanczos,
        n,
        lambda: non_principal_lambda(&out.values, bipartite),
        eigenvalues: out.values,
        residuals: Some(out.residuals),
        d: g.regular_degree(),
        bipartite,
        iterations: out.iterations,
    })
}

/// Dense below [`DENSE_LIMIT`], Lanczos above.
pub fn spectrum(g: &SparseGraph, k: usize, tol: f64) -> Result<SpectralReport> {
    if g.n() <= DENSE_LIMIT {
        dense_spectrum(g)
    } else {
        extreme_eigs(g, k, tol)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NdlVerdict {
    pub n: usize,
    pub d: u64,
    pub regular: bool,
    pub method: Method,
    pub lambda: f64,
    pub bound: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Checks that `g` is exactly `d`-regular and that its non-principal
/// eigenvalues are at most `bound + tol` in absolute value.
pub fn verify_ndl(g: &SparseGraph, d: u64, bound: f64, tol: f64) -> Result<NdlVerdict> {
    let ones = vec![1i64; g.n()];
    let regular = g.matvec_i64(&ones).iter().all(|&x| x == d as i64);
    let report = spectrum(g, 2, tol)?;
    let pass = regular && report.lambda <= bound + tol;
    Ok(NdlVerdict {
        n: g.n(),
        d,
        regular,
        method: report.method,
        lambda: report.lambda,
        bound,
        tol,
        pass,
    })
}

/// Exact form of the mixing inequality for the collinearity graph of W(q):
/// `|e(X) - q/(q^2+1) C(s,2)| <= (q+1) s`, cleared of denominators.
#[derive(Clone, Copy, Debug)]
pub struct MixingBound {
    q: u64,
}

impl MixingBound {
    pub fn new(q: u64) -> Self {
        MixingBound { q }
    }

    pub fn holds(&self, size: u64, edges: u64) -> bool {
        let q = self.q as i128;
        let s = size as i128;
        let r = q * q + 1;
        let lhs = (edges as i128 * r - q * (s * (s - 1) / 2)).abs();
        lhs <= (q + 1) * s * r
    }

    /// `|e(X) - p C(s,2)| / ((q+1) s)`; at most 1 whenever the bound holds.
    pub fn ratio(&self, size: u64, edges: u64) -> f64 {
        if size == 0 {
            return 0.0;
        }
        let q = self.q as f64;
        let s = size as f64;
        let p = q / (q * q + 1.0);
        (edges as f64 - p * s * (s - 1.0) / 2.0).abs() / ((q + 1.0) * s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MixingReport {
    pub q: u64,
    pub checked: usize,
    pub max_ratio: f64,
    pub ratios: Vec<f64>,
}

/// Asserts the mixing inequality on every sample. A violation is a bug, not
/// a statistical event, and is reported as [`Error::TheoremViolation`].
pub fn mixing_check(g1: &SparseGraph, q: u64, samples: &[VertexSet]) -> Result<MixingReport> {
    let d = q * (q + 1);
    if g1.regular_degree() != Some(d as usize) || g1.n() as u64 != (q * q + 1) * (q + 1) {
        return Err(Error::InvalidArgument(format!(
            "graph is not the {d}-regular collinearity graph of order {q}"
        )));
    }
    let bound = MixingBound::new(q);
    let mut ratios = Vec::with_capacity(samples.len());
    for (i, x) in samples.iter().enumerate() {
        let s = x.len() as u64;
        let e = g1.edges_within(x);
        if !bound.holds(s, e) {
            return Err(Error::TheoremViolation(format!(
                "mixing bound fails on sample {i}: |X| = {s}, e(X) = {e}"
            )));
        }
        ratios.push(bound.ratio(s, e));
    }
    Ok(MixingReport {
        q,
        checked: samples.len(),
        max_ratio: ratios.iter().cloned().fold(0.0, f64::max),
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{build_g1, build_incidence_graph};
    use crate::geometry::Quadrangle;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn g1(q: u64) -> SparseGraph {
        build_g1(&Quadrangle::new(q).unwrap()).unwrap().graph().clone()
    }

    fn multiplicities(ev: &[f64], targets: &[f64]) -> Vec<usize> {
        targets
            .iter()
            .map(|&t| ev.iter().filter(|&&x| close(x, t, 1e-9)).count())
            .collect()
    }

    #[test]
    fn g1_q2_dense_spectrum() {
        let r = dense_spectrum(&g1(2)).unwrap();
        assert_eq!(r.eigenvalues.len(), 15);
        assert_eq!(multiplicities(&r.eigenvalues, &[6.0, 1.0, -3.0]), vec![1, 9, 5]);
        assert!(close(r.lambda, 3.0, 1e-9));
        assert_eq!(r.d, Some(6));
        assert!(r.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn g1_q3_dense_spectrum() {
        let r = dense_spectrum(&g1(3)).unwrap();
        // Multiplicities from the trace conditions: 1 + a + b = 40,
        // 12 + 2a - 4b = 0.
        assert_eq!(multiplicities(&r.eigenvalues, &[12.0, 2.0, -4.0]), vec![1, 24, 15]);
    }

    #[test]
    fn incidence_q2_lambda() {
        let gq = Quadrangle::new(2).unwrap();
        let r = dense_spectrum(&build_incidence_graph(&gq)).unwrap();
        assert!(r.bipartite);
        assert!(close(r.lambda, 2.0, 1e-9));
        assert!(close(r.largest(), 3.0, 1e-9) && close(r.smallest(), -3.0, 1e-9));
    }

    #[test]
    fn k2_and_size_limit() {
        let k2 = SparseGraph::from_edges(2, [(0, 1)]).unwrap();
        let r = dense_spectrum(&k2).unwrap();
        assert!(close(r.eigenvalues[0], 1.0, 1e-12) && close(r.eigenvalues[1], -1.0, 1e-12));
        let big = SparseGraph::from_edges(DENSE_LIMIT + 1, [(0, 1)]).unwrap();
        assert!(matches!(dense_spectrum(&big), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn lanczos_g1_q8() {
        let r = extreme_eigs(&g1(8), 2, 1e-8).unwrap();
        assert!(close(r.largest(), 72.0, 1e-6));
        assert!(close(r.second_largest().unwrap(), 7.0, 1e-6));
        assert!(close(r.smallest(), -9.0, 1e-6));
        assert!(r.max_residual().unwrap() <= 1e-8);
        assert!(close(r.lambda, 9.0, 1e-6));
    }

    #[test]
    fn lanczos_matches_dense() {
        let gq = Quadrangle::new(3).unwrap();
        for g in [g1(3), build_incidence_graph(&gq), g1(4)] {
            let dense = dense_spectrum(&g).unwrap();
            let k = 3;
            let lz = extreme_eigs(&g, k, 1e-9).unwrap();
            let n = dense.eigenvalues.len();
            let expected: Vec<f64> = dense.eigenvalues[..k]
                .iter()
                .chain(&dense.eigenvalues[n - k..])
                .copied()
                .collect();
            for (a, b) in lz.eigenvalues.iter().zip(&expected) {
                assert!(close(*a, *b, 1e-6), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn lanczos_rejects_bad_arguments() {
        let g = g1(2);
        assert!(extreme_eigs(&g, 0, 1e-6).is_err());
        assert!(extreme_eigs(&g, 9, 1e-6).is_err());
        assert!(extreme_eigs(&g, 2, 0.0).is_err());
    }

    #[test]
    fn lanczos_on_irregular_path() {
        // P_n eigenvalues are 2 cos(j pi / (n + 1)).
        let n = 60;
        let p = SparseGraph::from_edges(n, (0..n as u32 - 1).map(|i| (i, i + 1))).unwrap();
        let r = extreme_eigs(&p, 2, 1e-9).unwrap();
        let top = 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!(close(r.largest(), top, 1e-8));
        assert!(close(r.smallest(), -top, 1e-8));
    }

    #[test]
    fn ndl_q8() {
        let g = g1(8);
        assert!(verify_ndl(&g, 72, 9.0, 1e-6).unwrap().pass);
        assert!(!verify_ndl(&g, 72, 8.9, 1e-6).unwrap().pass);
        assert!(!verify_ndl(&g, 71, 9.0, 1e-6).unwrap().pass);
        let inc = build_incidence_graph(&Quadrangle::new(8).unwrap());
        let v = verify_ndl(&inc, 9, 4.0, 1e-6).unwrap();
        assert!(v.pass && close(v.lambda, 4.0, 1e-6));
    }

    #[test]
    fn integer_matvec_regular() {
        let g = g1(4);
        let ones = vec![1i64; g.n()];
        assert!(g.matvec_i64(&ones).iter().all(|&x| x == 20));
    }

    #[test]
    fn mixing_single_line_q2() {
        let gq = Quadrangle::new(2).unwrap();
        let g = g1(2);
        let line = VertexSet::new(15, gq.lines()[0].point_ids.iter().copied()).unwrap();
        assert_eq!(g.edges_within(&line), 3);
        let empty = VertexSet::new(15, []).unwrap();
        let single = VertexSet::new(15, [4]).unwrap();
        let r = mixing_check(&g, 2, &[empty, single, line]).unwrap();
        assert_eq!(r.checked, 3);
        assert!(close(r.ratios[2], 1.8 / 9.0, 1e-12));
    }

    #[test]
    fn mixing_bound_exact_edges() {
        let b = MixingBound::new(2);
        // s = 3: |5e - 6| <= 45.
        assert!(b.holds(3, 10));
        assert!(!b.holds(3, 11));
        assert!(b.holds(0, 0));
    }

    #[test]
    fn mixing_rejects_wrong_graph() {
        assert!(mixing_check(&g1(2), 3, &[]).is_err());
    }
}
