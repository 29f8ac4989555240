//! Lanczos with full reorthogonalisation for the extreme eigenvalues of a
//! sparse adjacency matrix.
//!
//! On breakdown (an invariant Krylov subspace) the iteration restarts from a
//! fresh random vector orthogonal to the basis, so T becomes block diagonal
//! and repeated eigenvalues show up once per block.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::tql2;
use crate::error::{Error, Result};
use crate::graph::SparseGraph;

pub(crate) struct Outcome {
    /// Descending.
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Two passes of classical Gram-Schmidt against the whole basis.
fn reorthogonalize(basis: &[Vec<f64>], w: &mut [f64]) {
    for _ in 0..2 {
        for v in basis {
            let c = dot(v, w);
            axpy(-c, v, w);
        }
    }
}

fn fresh_vector(basis: &[Vec<f64>], n: usize, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    if basis.len() >= n {
        return None;
    }
    for _attempt in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let before = norm(&v);
        reorthogonalize(basis, &mut v);
        let after = norm(&v);
        if after > 1e-8 * before {
            v.iter_mut().for_each(|x| *x /= after);
            return Some(v);
        }
    }
    None
}

/// Eigen-decomposition of the tridiagonal matrix `(alpha, beta)`.
/// Returns ascending eigenvalues and a row-major `m x m` vector matrix.
fn tridiagonal_eigs(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = alpha.len();
    let mut d = alpha.to_vec();
    let mut e = vec![0.0; m];
    e[..m - 1].copy_from_slice(&beta[..m - 1]);
    let mut z = vec![0.0; m * m];
    for i in 0..m {
        z[i * m + i] = 1.0;
    }
    tql2(&mut d, &mut e, Some(&mut z))?;
    Ok((d, z))
}

fn selection(m: usize, k: usize) -> Vec<usize> {
    if 2 * k >= m {
        return (0..m).rev().collect();
    }
    (m - k..m).rev().chain((0..k).rev()).collect()
}

pub(crate) fn run(g: &SparseGraph, k: usize, tol: f64, max_iter: usize, seed: u64) -> Result<Outcome> {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (g.degree_range().1 as f64).max(1.0);
    let min_steps = (4 * k + 4).min(n);
    let max_iter = max_iter.clamp(min_steps, n);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut v = fresh_vector(&basis, n, &mut rng).expect("n > 0");
    let mut w = vec![0.0; n];

    loop {
        g.matvec(&v, &mut w);
        let a = dot(&v, &w);
        axpy(-a, &v, &mut w);
        if let (Some(&b), Some(prev)) = (beta.last(), basis.last()) {
            axpy(-b, prev, &mut w);
        }
        basis.push(std::mem::take(&mut v));
        alpha.push(a);
        reorthogonalize(&basis, &mut w);
        let b = norm(&w);
        let m = basis.len();
        let exhausted = m == n;
        let capped = m >= max_iter;
        let breakdown = b <= 1e-10 * scale;

        if exhausted || capped || (m >= min_steps && (breakdown || m.is_multiple_of(5))) {
            let (theta, y) = tridiagonal_eigs(&alpha, &beta)?;
            let sel = selection(m, k);
            let estimate_ok = sel.iter().all(|&i| (b * y[(m - 1) * m + i]).abs() <= 0.5 * tol);
            if estimate_ok || exhausted || capped {
                let mut values = Vec::with_capacity(sel.len());
                let mut residuals = Vec::with_capacity(sel.len());
                let mut x = vec![0.0; n];
                let mut ax = vec![0.0; n];
                for &i in &sel {
                    x.iter_mut().for_each(|t| *t = 0.0);
                    for (j, bj) in basis.iter().enumerate() {
                        axpy(y[j * m + i], bj, &mut x);
                    }
                    g.matvec(&x, &mut ax);
                    axpy(-theta[i], &x, &mut ax);
                    values.push(theta[i]);
                    residuals.push(norm(&ax) / norm(&x));
                }
                let worst = residuals.iter().cloned().fold(0.0, f64::max);
                if worst <= tol {
                    return Ok(Outcome { values, residuals, iterations: m });
                }
                if exhausted || capped {
                    return Err(Error::NoConvergence { iterations: m, residual: worst });
                }
            }
        }

        if breakdown {
            match fresh_vector(&basis, n, &mut rng) {
                Some(fresh) => {
                    beta.push(0.0);
                    v = fresh;
                }
                None => {
                    return Err(Error::NoConvergence { iterations: m, residual: b });
                }
            }
        } else {
            beta.push(b);
            v = w.iter().map(|x| x / b).collect();
        }
    }
}
