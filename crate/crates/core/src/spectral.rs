//! Largest eigenvalue of sparse symmetric matrices, with a dense oracle.
//!
//! [`lambda_max`] targets the largest *algebraic* eigenvalue. The matrix is
//! shifted by its Gershgorin bound `sigma = max_i sum_j |M_ij|` so that the
//! target becomes the eigenvalue of largest magnitude even when the spectrum
//! extends further below zero than above, then a restarted Lanczos iteration
//! with full reorthogonalization runs on the shifted operator. The start
//! vector is derived from a seed, so runs are bitwise reproducible.
//!
//! [`dense_eigs`] is the verification oracle: cyclic Jacobi rotations on a
//! dense copy, limited to n <= 512.

use crate::rng::SplitMix64;
use crate::weights::WeightedNetwork;
use crate::{Error, Result};

/// Maximum dimension accepted by the dense Jacobi solver.
pub const DENSE_LIMIT: usize = 512;

/// Compressed sparse rows of a symmetric matrix; entry (i,j) is stored in
/// both rows with equal value, explicit zeros are dropped.
#[derive(Clone, Debug)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseSym {
    /// Builds from undirected entries `(i, j, w)` with `i != j` (zero
    /// diagonal) or `i == j` allowed for general symmetric use.
    pub fn from_entries(n: usize, entries: &[(u32, u32, f64)]) -> Self {
        let mut degree = vec![0usize; n];
        for &(i, j, w) in entries {
            if w == 0.0 {
                continue;
            }
            degree[i as usize] += 1;
            if i != j {
                degree[j as usize] += 1;
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + degree[i];
        }
        let nnz = row_ptr[n];
        let mut cols = vec![0u32; nnz];
        let mut vals = vec![0.0; nnz];
        let mut cursor = row_ptr.clone();
        for &(i, j, w) in entries {
            if w == 0.0 {
                continue;
            }
            cols[cursor[i as usize]] = j;
            vals[cursor[i as usize]] = w;
            cursor[i as usize] += 1;
            if i != j {
                cols[cursor[j as usize]] = i;
                vals[cursor[j as usize]] = w;
                cursor[j as usize] += 1;
            }
        }
        SparseSym { n, row_ptr, cols, vals }
    }

    /// Matrix of a weighted network, optionally restricted by an edge mask.
    pub fn from_network(net: &WeightedNetwork, mask: Option<&[bool]>) -> Self {
        let entries: Vec<(u32, u32, f64)> = net
            .graph
            .edges()
            .iter()
            .zip(&net.weights)
            .enumerate()
            .filter(|(id, _)| mask.map_or(true, |m| m[*id]))
            .map(|(_, (&(i, j), &w))| (i, j, w))
            .collect();
        Self::from_entries(net.graph.n(), &entries)
    }

    /// Unweighted adjacency matrix of a graph.
    pub fn adjacency(graph: &crate::graph::RegularGraph) -> Self {
        let entries: Vec<(u32, u32, f64)> =
            graph.edges().iter().map(|&(i, j)| (i, j, 1.0)).collect();
        Self::from_entries(graph.n(), &entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Gershgorin bound: every eigenvalue lies in `[-sigma, sigma]`.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.vals[self.row_ptr[i]..self.row_ptr[i + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Largest off-diagonal magnitude; a lower bound on the top eigenvalue
    /// for symmetric matrices with zero diagonal.
    pub fn max_entry_lower_bound(&self) -> f64 {
        (0..self.n)
            .flat_map(|i| {
                let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
                self.cols[lo..hi]
                    .iter()
                    .zip(&self.vals[lo..hi])
                    .filter(move |(&c, _)| c as usize != i)
                    .map(|(_, v)| v.abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = 0.0;
            for k in lo..hi {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            y[i] = acc;
        }
    }

    /// Dense copy, for the oracle path.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                dense[i][self.cols[k] as usize] = self.vals[k];
            }
        }
        dense
    }

    /// Negated copy (for the spectral norm via `lambda_max(-M)`).
    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v = -*v;
        }
        out
    }
}

/// Largest eigenvalue and unit eigenvector with a residual certificate.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub lambda: f64,
    pub f: Vec<f64>,
    /// `||M f - lambda f||_2` at return.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Options for [`lambda_max`].
#[derive(Clone, Copy, Debug)]
pub struct LanczosOpts {
    pub tol: f64,
    pub max_iter: usize,
    /// Krylov block length between restarts.
    pub block: usize,
    /// Seed of the deterministic start vector.
    pub seed: u64,
}

impl Default for LanczosOpts {
    fn default() -> Self {
        LanczosOpts { tol: 1e-10, max_iter: 5000, block: 64, seed: 0 }
    }
}

/// Largest algebraic eigenvalue of a sparse symmetric matrix.
///
/// Converged means `residual <= tol * (|lambda| + sigma)` where `sigma` is
/// the Gershgorin bound. Non-convergence within `max_iter` Lanczos steps
/// returns the best iterate with `converged == false`, never silently.
pub fn lambda_max(m: &SparseSym, opts: LanczosOpts) -> Result<EigenPair> {
    if m.n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let sigma = m.gershgorin_bound();
    if sigma == 0.0 {
        // Zero matrix: lambda = 0 with f = e_1 by convention.
        let mut f = vec![0.0; m.n];
        f[0] = 1.0;
        return Ok(EigenPair { lambda: 0.0, f, residual: 0.0, iterations: 0, converged: true });
    }
    let n = m.n;
    let block = opts.block.max(2).min(n);
    let tol_abs = |lambda: f64| opts.tol * (lambda.abs() + sigma);

    // Deterministic start vector.
    let mut rng = SplitMix64::stream(opts.seed, &[0x1A2C, n as u64]);
    let mut v: Vec<f64> = (0..n).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
    normalize(&mut v);

    let mut iterations = 0usize;
    let mut best: Option<EigenPair> = None;
    let mut scratch = vec![0.0; n];

    while iterations < opts.max_iter {
        // One Lanczos block on the shifted operator B = M + sigma I.
        let mut basis: Vec<Vec<f64>> = vec![v.clone()];
        let mut alphas: Vec<f64> = Vec::with_capacity(block);
        let mut betas: Vec<f64> = Vec::with_capacity(block);
        let mut breakdown = false;
        for j in 0..block {
            if iterations >= opts.max_iter {
                break;
            }
            iterations += 1;
            let vj = &basis[j];
            m.matvec(vj, &mut scratch);
            let mut w: Vec<f64> = scratch.iter().zip(vj).map(|(mv, x)| mv + sigma * x).collect();
            if j > 0 {
                let beta_prev = betas[j - 1];
                let v_prev = &basis[j - 1];
                for i in 0..n {
                    w[i] -= beta_prev * v_prev[i];
                }
            }
            let alpha = dot(&w, vj);
            for i in 0..n {
                w[i] -= alpha * vj[i];
            }
            // Full reorthogonalization, two passes.
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    for i in 0..n {
                        w[i] -= c * q[i];
                    }
                }
            }
            alphas.push(alpha);
            let beta = norm(&w);
            betas.push(beta);
            if beta <= sigma * 1e-14 {
                breakdown = true; // exact invariant subspace
                break;
            }
            for x in &mut w {
                *x /= beta;
            }
            basis.push(w);
        }
        if alphas.is_empty() {
            break;
        }

        // Top Ritz pair of the tridiagonal.
        let k = alphas.len();
        let mut tri = vec![vec![0.0; k]; k];
        for j in 0..k {
            tri[j][j] = alphas[j];
            if j + 1 < k {
                tri[j][j + 1] = betas[j];
                tri[j + 1][j] = betas[j];
            }
        }
        let (evals, evecs) = jacobi_eigen(&mut tri)?;
        let s = &evecs[0]; // eigenvector of the largest shifted eigenvalue
        let theta = evals[0];

        let mut y = vec![0.0; n];
        for (j, q) in basis.iter().take(k).enumerate() {
            let c = s[j];
            for i in 0..n {
                y[i] += c * q[i];
            }
        }
        normalize(&mut y);
        let lambda = theta - sigma;
        m.matvec(&y, &mut scratch);
        let residual = {
            let mut acc = 0.0;
            for i in 0..n {
                let r = scratch[i] - lambda * y[i];
                acc += r * r;
            }
            acc.sqrt()
        };
        let converged = residual <= tol_abs(lambda);
        let better = best.as_ref().map_or(true, |b| residual < b.residual);
        if better {
            best = Some(EigenPair { lambda, f: y.clone(), residual, iterations, converged });
        }
        if converged || breakdown || k >= n {
            break;
        }
        v = y; // restart from the Ritz vector
    }

    let mut pair = best.expect("at least one Lanczos block ran");
    pair.iterations = iterations;
    fix_sign(&mut pair.f);
    Ok(pair)
}

/// `max(lambda_max(M), lambda_max(-M))`: the spectral norm.
pub fn spectral_norm(m: &SparseSym, opts: LanczosOpts) -> Result<f64> {
    let top = lambda_max(m, opts)?;
    let bottom = lambda_max(&m.negated(), opts)?;
    Ok(top.lambda.max(bottom.lambda))
}

/// All eigenvalues (descending) and matching eigenvectors of a small dense
/// symmetric matrix, by the cyclic Jacobi rotation method.
///
/// Sweeps run until the off-diagonal Frobenius norm drops below
/// `1e-12 * ||M||_F`. Input must satisfy `n <= 512`.
pub fn dense_eigs(matrix: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = matrix.len();
    if n > DENSE_LIMIT {
        return Err(Error::SizeExceeded { n, limit: DENSE_LIMIT });
    }
    let mut a = matrix.to_vec();
    for (i, row) in a.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidParameters(format!("row {i} has length {}", row.len())));
        }
    }
    jacobi_eigen(&mut a)
}

/// In-place cyclic Jacobi; returns sorted (descending) eigenvalues and row
/// eigenvectors.
fn jacobi_eigen(a: &mut [Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.len();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let frob: f64 = a.iter().flat_map(|r| r.iter().map(|x| x * x)).sum::<f64>().sqrt();
    let target = 1e-12 * frob;
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    if frob == 0.0 {
        let evals = vec![0.0; n];
        return Ok((evals, v));
    }
    const MAX_SWEEPS: usize = 64;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = {
            let mut acc = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    acc += 2.0 * a[p][q] * a[p][q];
                }
            }
            acc.sqrt()
        };
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq.abs() <= target / (n as f64) {
                    continue;
                }
                // Rotation annihilating a[p][q] (Golub & Van Loan 8.4).
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[p][k];
                    let vkq = v[q][k];
                    v[p][k] = c * vkp - s * vkq;
                    v[q][k] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let evals: Vec<f64> = order.iter().map(|&i| a[i][i]).collect();
    let evecs: Vec<Vec<f64>> = order.iter().map(|&i| v[i].clone()).collect();
    Ok((evals, evecs))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) {
    let nrm = norm(a);
    if nrm > 0.0 {
        for x in a {
            *x /= nrm;
        }
    }
}

/// Sign convention: first nonzero coordinate positive.
fn fix_sign(f: &mut [f64]) {
    if let Some(&lead) = f.iter().find(|x| **x != 0.0) {
        if lead < 0.0 {
            for x in f {
                *x = -*x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::RegularGraph;
    use crate::weights::{WeibullParams, WeightedNetwork};

    fn two_by_two(w: f64) -> SparseSym {
        SparseSym::from_entries(2, &[(0, 1, w)])
    }

    #[test]
    fn single_edge_eigenpair() {
        for &w in &[2.5, -2.5] {
            let pair = lambda_max(&two_by_two(w), LanczosOpts::default()).unwrap();
            assert!((pair.lambda - w.abs()).abs() < 1e-12);
            assert!(pair.converged);
            let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
            assert!((pair.f[0] - inv_sqrt2).abs() < 1e-9);
            assert!((pair.f[1] - w.signum() * inv_sqrt2).abs() < 1e-9);
        }
    }

    #[test]
    fn weighted_path_closed_form() {
        let (a, b) = (1.75, -0.4);
        let m = SparseSym::from_entries(3, &[(0, 1, a), (1, 2, b)]);
        let pair = lambda_max(&m, LanczosOpts::default()).unwrap();
        let expect = (a * a + b * b).sqrt();
        assert!((pair.lambda - expect).abs() < 1e-12);
        let (evals, _) = dense_eigs(&m.to_dense()).unwrap();
        assert!((evals[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn regular_graph_top_eigenpair_is_trivial() {
        let g = RegularGraph::generate(64, 3, 2).unwrap();
        let m = SparseSym::adjacency(&g);
        let pair = lambda_max(&m, LanczosOpts::default()).unwrap();
        assert!(pair.converged);
        assert!((pair.lambda - 3.0).abs() < 1e-10);
        let expect = 1.0 / (64f64).sqrt();
        for &x in &pair.f {
            assert!((x - expect).abs() < 1e-7, "component {x} vs {expect}");
        }
    }

    #[test]
    fn zero_and_empty_matrices() {
        let z = SparseSym::from_entries(3, &[]);
        let pair = lambda_max(&z, LanczosOpts::default()).unwrap();
        assert_eq!(pair.lambda, 0.0);
        assert_eq!(pair.f, vec![1.0, 0.0, 0.0]);
        assert_eq!(z.max_entry_lower_bound(), 0.0);
        let empty = SparseSym::from_entries(0, &[]);
        assert!(matches!(lambda_max(&empty, LanczosOpts::default()), Err(Error::EmptyMatrix)));
    }

    #[test]
    fn dense_oracle_examples() {
        let diag = vec![vec![3.0, 0.0], vec![0.0, -1.0]];
        let (evals, _) = dense_eigs(&diag).unwrap();
        assert_eq!(evals, vec![3.0, -1.0]);
        let swap = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let (evals, evecs) = dense_eigs(&swap).unwrap();
        assert!((evals[0] - 1.0).abs() < 1e-14);
        assert!((evals[1] + 1.0).abs() < 1e-14);
        assert!((evecs[0][0].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let big = vec![vec![0.0; DENSE_LIMIT + 1]; DENSE_LIMIT + 1];
        assert!(matches!(dense_eigs(&big), Err(Error::SizeExceeded { .. })));
    }

    #[test]
    fn lanczos_matches_dense_oracle_on_networks() {
        for (case, &alpha) in [0.5, 1.0, 4.0].iter().enumerate() {
            for trial in 0..6u64 {
                let n = 40 + 20 * (trial as usize % 3);
                let g = RegularGraph::generate(n, 3, 1000 + trial).unwrap();
                let net =
                    WeightedNetwork::weigh(g, WeibullParams::new(alpha).unwrap(), case as u64);
                let m = SparseSym::from_network(&net, None);
                let pair = lambda_max(&m, LanczosOpts::default()).unwrap();
                let (evals, _) = dense_eigs(&m.to_dense()).unwrap();
                assert!(
                    (pair.lambda - evals[0]).abs() <= 1e-8 * (1.0 + evals[0].abs()),
                    "alpha={alpha} trial={trial}: {} vs {}",
                    pair.lambda,
                    evals[0]
                );
            }
        }
    }

    #[test]
    fn spectral_norm_examples() {
        let m = two_by_two(-3.0);
        assert!((spectral_norm(&m, LanczosOpts::default()).unwrap() - 3.0).abs() < 1e-12);
        let g = RegularGraph::generate(32, 3, 5).unwrap();
        let a = SparseSym::adjacency(&g);
        assert!((spectral_norm(&a, LanczosOpts::default()).unwrap() - 3.0).abs() < 1e-9);
        let net = WeightedNetwork::weigh(
            RegularGraph::generate(32, 3, 6).unwrap(),
            WeibullParams::new(1.0).unwrap(),
            7,
        );
        let x = SparseSym::from_network(&net, None);
        let top = lambda_max(&x, LanczosOpts::default()).unwrap();
        assert!(spectral_norm(&x, LanczosOpts::default()).unwrap() >= top.lambda - 1e-12);
    }

    #[test]
    fn max_entry_bound_and_rayleigh_certificate() {
        for seed in 0..10u64 {
            let g = RegularGraph::generate(100, 3, seed).unwrap();
            let net = WeightedNetwork::weigh(g, WeibullParams::new(1.0).unwrap(), seed);
            let m = SparseSym::from_network(&net, None);
            let pair = lambda_max(&m, LanczosOpts::default()).unwrap();
            assert!(pair.converged);
            let max_entry = m.max_entry_lower_bound();
            assert!((max_entry - net.max_abs_weight()).abs() < 1e-15);
            assert!(pair.lambda >= max_entry - pair.residual);
            // Rayleigh quotient certificate.
            let mut y = vec![0.0; m.n()];
            m.matvec(&pair.f, &mut y);
            let rq: f64 = y.iter().zip(&pair.f).map(|(a, b)| a * b).sum();
            assert!(rq >= pair.lambda - 2.0 * pair.residual);
            // Unit norm and sign convention.
            let nrm: f64 = pair.f.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((nrm - 1.0).abs() < 1e-12);
            let lead = pair.f.iter().find(|x| **x != 0.0).unwrap();
            assert!(*lead > 0.0);
        }
    }

    #[test]
    fn single_edge_network_equalities() {
        // One heavy edge dominating: lambda equals the top weight on a
        // two-vertex matrix.
        let m = two_by_two(7.25);
        let pair = lambda_max(&m, LanczosOpts::default()).unwrap();
        assert!((pair.lambda - m.max_entry_lower_bound()).abs() < 1e-12);
    }
}
