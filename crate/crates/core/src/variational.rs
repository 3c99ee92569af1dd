//! The finite-depth tree variational problem behind the largest-eigenvalue
//! law of large numbers.
//!
//! For a depth-L d-regular tree the objective over nonnegative simplex
//! vectors `u` is
//!
//! ```text
//!   ( sum over directed edges (i,j) of u_i^gamma * u_j^gamma )^(1/(2 gamma))
//! ```
//!
//! where every undirected edge is counted twice. Its supremum `K_d^(L)(gamma)`
//! is nondecreasing in `L`; for `gamma >= 1` it equals `2^(1/(2 gamma) - 1)`
//! exactly, with the two-point vector `u_i = u_j = 1/2` on an edge as the
//! (for `gamma > 1` unique) maximizer. For `1/2 <= gamma < 1` there is no
//! closed form and the solver's multi-start projected gradient ascent reports
//! a certified lower bound. The law-of-large-numbers constant is
//! `h_d(alpha) = 2^(1/alpha) * K_d(beta/2)` with `1/alpha + 1/beta = 1` for
//! `alpha > 2`, and exactly 1 for `alpha <= 2`.
//!
//! The objective is not concave below `gamma = 1`, so structured starts
//! (single edge, star, level-geometric profiles) cover the maximizer shapes
//! that arise; random Dirichlet starts fill in the rest.

use crate::rng::SplitMix64;
use crate::{Error, Result};

/// Largest explicit tree the full-coordinate mode will build.
const FULL_MODE_VERTEX_LIMIT: usize = 1 << 14;

/// A d-regular tree of finite depth with breadth-first vertex indexing:
/// the root is 0, level `l >= 1` holds `d (d-1)^(l-1)` vertices.
#[derive(Clone, Debug)]
pub struct FiniteTree {
    d: usize,
    depth: usize,
    edges: Vec<(u32, u32)>,
    level_offsets: Vec<usize>,
}

impl FiniteTree {
    pub fn new(d: usize, depth: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::InvalidParameters(format!("tree degree must be >= 3, got {d}")));
        }
        let sizes = level_sizes(d, depth);
        let total: f64 = sizes.iter().sum();
        if total > FULL_MODE_VERTEX_LIMIT as f64 {
            return Err(Error::InvalidParameters(format!(
                "depth-{depth} {d}-regular tree has {total:.0} vertices, over the explicit limit {FULL_MODE_VERTEX_LIMIT}"
            )));
        }
        let mut level_offsets = vec![0usize];
        for s in &sizes {
            level_offsets.push(level_offsets.last().unwrap() + *s as usize);
        }
        let n = *level_offsets.last().unwrap();
        let mut edges = Vec::with_capacity(n.saturating_sub(1));
        let mut next_child = 1u32;
        for v in 0..n as u32 {
            let level = match level_offsets.iter().rposition(|&off| off <= v as usize) {
                Some(l) => l,
                None => 0,
            };
            if level >= depth {
                continue;
            }
            let fanout = if v == 0 { d } else { d - 1 };
            for _ in 0..fanout {
                edges.push((v, next_child));
                next_child += 1;
            }
        }
        debug_assert_eq!(next_child as usize, n);
        Ok(FiniteTree { d, depth, edges, level_offsets })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn vertex_count(&self) -> usize {
        *self.level_offsets.last().unwrap()
    }

    /// Edges as `(parent, child)`, parent < child, in BFS order.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Level of a vertex id.
    pub fn level_of(&self, v: usize) -> usize {
        self.level_offsets.iter().rposition(|&off| off <= v).unwrap()
    }

    pub fn level_offsets(&self) -> &[usize] {
        &self.level_offsets
    }
}

/// Level sizes of the depth-L d-regular tree as f64 (exact until 2^53).
pub fn level_sizes(d: usize, depth: usize) -> Vec<f64> {
    let mut sizes = Vec::with_capacity(depth + 1);
    sizes.push(1.0);
    if depth >= 1 {
        sizes.push(d as f64);
        for _ in 2..=depth {
            let last = *sizes.last().unwrap();
            sizes.push(last * (d - 1) as f64);
        }
    }
    sizes
}

/// Directed-edge objective `(sum u_i^g u_j^g over both orientations)^(1/(2g))`.
///
/// `u` must be entrywise nonnegative with `|sum(u) - 1| <= 1e-9`.
pub fn objective(tree: &FiniteTree, u: &[f64], gamma: f64) -> Result<f64> {
    objective_on_edges(tree.vertex_count(), tree.edges(), u, gamma)
}

/// Same objective over an arbitrary edge list.
pub fn objective_on_edges(n: usize, edges: &[(u32, u32)], u: &[f64], gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if u.len() != n {
        return Err(Error::InvalidParameters(format!(
            "vector length {} does not match vertex count {n}",
            u.len()
        )));
    }
    let sum: f64 = u.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::SimplexViolation(format!("coordinates sum to {sum}")));
    }
    if let Some(bad) = u.iter().find(|x| **x < 0.0) {
        return Err(Error::SimplexViolation(format!("negative coordinate {bad}")));
    }
    Ok(raw_value(edges, u, gamma))
}

/// Objective without the validation, for inner loops. Returns the
/// `1/(2 gamma)` power of the directed-edge sum.
fn raw_value(edges: &[(u32, u32)], u: &[f64], gamma: f64) -> f64 {
    directed_sum(edges, u, gamma).powf(1.0 / (2.0 * gamma))
}

fn directed_sum(edges: &[(u32, u32)], u: &[f64], gamma: f64) -> f64 {
    let undirected: f64 = edges
        .iter()
        .map(|&(i, j)| {
            let p = u[i as usize] * u[j as usize];
            if p > 0.0 {
                p.powf(gamma)
            } else {
                0.0
            }
        })
        .sum();
    2.0 * undirected
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 0.5) || !gamma.is_finite() {
        return Err(Error::Domain(format!(
            "gamma must be at least 1/2 for a finite supremum, got {gamma}"
        )));
    }
    Ok(())
}

/// Optimization mode for [`solve_kdl`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMode {
    /// Optimize every vertex coordinate of the explicit tree.
    Full,
    /// One value per level; exact if the maximizer is level-symmetric.
    LevelReduced,
    /// Full when the explicit tree is small enough, level-reduced otherwise.
    Auto,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOpts {
    pub restarts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub mode: SolveMode,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts { restarts: 16, tol: 1e-10, max_iter: 20_000, seed: 0, mode: SolveMode::Auto }
    }
}

/// Output of the simplex ascent.
#[derive(Clone, Debug)]
pub struct VariationalSolution {
    pub gamma: f64,
    /// Objective at `u`; a certified lower bound on the supremum.
    pub value: f64,
    /// Full mode: one coordinate per vertex. Level-reduced mode: the
    /// per-vertex value on each level (level masses are `u[l] * level_size`).
    pub u: Vec<f64>,
    pub mode: SolveMode,
    pub restarts_used: usize,
    pub converged: bool,
    /// Projected-gradient norm at termination of the best restart.
    pub gradient_norm: f64,
}

/// Maximizes the objective on the depth-L d-regular tree.
pub fn solve_kdl(d: usize, depth: usize, gamma: f64, opts: SolveOpts) -> Result<VariationalSolution> {
    check_gamma(gamma)?;
    if d < 3 {
        return Err(Error::InvalidParameters(format!("need d >= 3, got {d}")));
    }
    if depth < 1 {
        return Err(Error::InvalidParameters("need depth >= 1".into()));
    }
    let sizes = level_sizes(d, depth);
    let total: f64 = sizes.iter().sum();
    let mode = match opts.mode {
        SolveMode::Auto => {
            if total <= FULL_MODE_VERTEX_LIMIT as f64 && depth <= 6 {
                SolveMode::Full
            } else {
                SolveMode::LevelReduced
            }
        }
        m => m,
    };
    if mode == SolveMode::Full {
        let tree = FiniteTree::new(d, depth)?;
        let mut starts = structured_tree_starts(&tree);
        push_random_starts(&mut starts, tree.vertex_count(), opts);
        let mut sol = ascend_on_edges(tree.vertex_count(), tree.edges(), gamma, &starts, &opts);
        sol.mode = SolveMode::Full;
        Ok(sol)
    } else {
        solve_level_reduced(d, depth, gamma, opts)
    }
}

/// Maximizes the objective over an arbitrary tree (or graph) given by its
/// edge list; used directly for the general-tree results.
pub fn solve_on_tree(
    n: usize,
    edges: &[(u32, u32)],
    gamma: f64,
    opts: SolveOpts,
) -> Result<VariationalSolution> {
    check_gamma(gamma)?;
    if n == 0 {
        return Err(Error::InvalidParameters("empty vertex set".into()));
    }
    let mut starts = vec![vec![1.0 / n as f64; n]];
    if let Some(&(i, j)) = edges.first() {
        let mut edge_start = vec![0.0; n];
        edge_start[i as usize] = 0.5;
        edge_start[j as usize] = 0.5;
        starts.push(edge_start);
    }
    // Star at the max-degree vertex.
    if !edges.is_empty() {
        let mut deg = vec![0usize; n];
        for &(i, j) in edges {
            deg[i as usize] += 1;
            deg[j as usize] += 1;
        }
        let hub = (0..n).max_by_key(|&v| deg[v]).unwrap();
        let mut star = vec![0.0; n];
        star[hub] = 0.5;
        for &(i, j) in edges {
            if i as usize == hub {
                star[j as usize] = 0.5 / deg[hub] as f64;
            } else if j as usize == hub {
                star[i as usize] = 0.5 / deg[hub] as f64;
            }
        }
        starts.push(star);
    }
    push_random_starts(&mut starts, n, opts);
    Ok(ascend_on_edges(n, edges, gamma, &starts, &opts))
}

fn push_random_starts(starts: &mut Vec<Vec<f64>>, n: usize, opts: SolveOpts) {
    let mut rng = SplitMix64::stream(opts.seed, &[0xD1B1C, n as u64]);
    while starts.len() < opts.restarts {
        // Dirichlet(1, ..., 1) via normalized exponentials.
        let mut u: Vec<f64> = (0..n).map(|_| rng.next_exp()).collect();
        let s: f64 = u.iter().sum();
        for x in &mut u {
            *x /= s;
        }
        starts.push(u);
    }
}

/// Structured starts on an explicit tree: uniform, single edge at the root,
/// star around the root, and uniform-level-mass profiles mirroring the
/// deep construction that approaches the gamma = 1/2 ceiling.
fn structured_tree_starts(tree: &FiniteTree) -> Vec<Vec<f64>> {
    let n = tree.vertex_count();
    let d = tree.d();
    let mut starts = Vec::new();
    starts.push(vec![1.0 / n as f64; n]);
    let mut edge = vec![0.0; n];
    edge[0] = 0.5;
    edge[1] = 0.5;
    starts.push(edge);
    let mut star = vec![0.0; n];
    star[0] = 0.5;
    for c in 1..=d {
        star[c] = 0.5 / d as f64;
    }
    starts.push(star);
    for span in [tree.depth(), tree.depth() + 1] {
        if span >= 2 {
            starts.push(level_profile_to_full(tree, &uniform_level_masses(tree.depth(), span)));
        }
    }
    starts
}

/// Level masses 1/span on the first `span` levels, zero beyond.
fn uniform_level_masses(depth: usize, span: usize) -> Vec<f64> {
    let span = span.min(depth + 1);
    let mut masses = vec![0.0; depth + 1];
    for m in masses.iter_mut().take(span) {
        *m = 1.0 / span as f64;
    }
    masses
}

fn level_profile_to_full(tree: &FiniteTree, masses: &[f64]) -> Vec<f64> {
    let sizes = level_sizes(tree.d(), tree.depth());
    let mut u = vec![0.0; tree.vertex_count()];
    for (level, (&mass, &size)) in masses.iter().zip(&sizes).enumerate() {
        let value = if size > 0.0 { mass / size } else { 0.0 };
        let (lo, hi) = (tree.level_offsets()[level], tree.level_offsets()[level + 1]);
        for x in &mut u[lo..hi] {
            *x = value;
        }
    }
    u
}

/// Gradient ascent from each start; returns the best local maximum found,
/// renormalized onto the simplex.
///
/// The ascent runs in the square-root parameterization `u = v^2` with
/// `||v||_2 = 1`: the gradient exponent becomes `2 gamma - 1 >= 0`, so the
/// boundary singularity of the raw simplex gradient at `gamma < 1`
/// disappears, and the feasible-set projection is clamp-and-normalize.
fn ascend_on_edges(
    n: usize,
    edges: &[(u32, u32)],
    gamma: f64,
    starts: &[Vec<f64>],
    opts: &SolveOpts,
) -> VariationalSolution {
    let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(i, j) in edges {
        neighbors[i as usize].push(j);
        neighbors[j as usize].push(i);
    }
    // G(v) = sum over directed edges of (v_i v_j)^(2 gamma).
    let eval = |v: &[f64]| {
        let und: f64 = edges
            .iter()
            .map(|&(i, j)| {
                let p = v[i as usize] * v[j as usize];
                if p > 0.0 {
                    p.powf(2.0 * gamma)
                } else {
                    0.0
                }
            })
            .sum();
        2.0 * und
    };
    let grad = |v: &[f64], g: &mut Vec<f64>| {
        let q: Vec<f64> = v.iter().map(|&x| x.powf(2.0 * gamma)).collect();
        for i in 0..n {
            let s: f64 = neighbors[i].iter().map(|&j| q[j as usize]).sum();
            g[i] = 4.0 * gamma * v[i].powf(2.0 * gamma - 1.0) * s;
        }
    };
    let mut best: Option<(f64, Vec<f64>, bool, f64)> = None;
    for start in starts {
        let mut v = to_sphere(start);
        let (g_final, converged, tangent_norm) = ascend_sphere(&mut v, &eval, &grad, opts);
        if best.as_ref().map_or(true, |(bg, _, _, _)| g_final > *bg) {
            best = Some((g_final, v, converged, tangent_norm));
        }
    }
    let (_, v, converged, gradient_norm) = best.unwrap();
    let u = sphere_to_simplex(&v);
    let value = raw_value(edges, &u, gamma);
    VariationalSolution {
        gamma,
        value,
        u,
        mode: SolveMode::Full,
        restarts_used: starts.len(),
        converged,
        gradient_norm,
    }
}

/// Entrywise square root onto the nonnegative unit sphere.
fn to_sphere(u: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = u.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let nrm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nrm > 0.0 {
        for x in &mut v {
            *x /= nrm;
        }
    }
    v
}

/// Back to simplex coordinates, with the sum renormalized exactly.
fn sphere_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.iter().map(|&x| x * x).collect();
    let total: f64 = u.iter().sum();
    for x in &mut u {
        *x /= total;
    }
    u
}

/// Armijo ascent along the tangential gradient on the nonnegative unit
/// sphere; returns (objective sum, converged, tangential gradient norm).
/// Convergence: the tangential norm drops below `tol * (1 + radial part)`.
fn ascend_sphere(
    v: &mut Vec<f64>,
    eval: &dyn Fn(&[f64]) -> f64,
    grad: &dyn Fn(&[f64], &mut Vec<f64>),
    opts: &SolveOpts,
) -> (f64, bool, f64) {
    let n = v.len();
    let mut g = vec![0.0; n];
    let mut current = eval(v);
    let mut step = 1.0;
    let mut tangent_norm = f64::INFINITY;
    for _ in 0..opts.max_iter {
        grad(v, &mut g);
        let radial: f64 = g.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        let tangent: Vec<f64> = g.iter().zip(v.iter()).map(|(gi, vi)| gi - radial * vi).collect();
        tangent_norm = tangent.iter().map(|x| x * x).sum::<f64>().sqrt();
        if tangent_norm <= opts.tol * (1.0 + radial.abs()) {
            return (current, true, tangent_norm);
        }
        let mut accepted = false;
        for _ in 0..64 {
            let mut cand: Vec<f64> =
                v.iter().zip(&tangent).map(|(x, t)| (x + step * t).max(0.0)).collect();
            let nrm: f64 = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm > 0.0 {
                for x in &mut cand {
                    *x /= nrm;
                }
                let cand_val = eval(&cand);
                if cand_val.is_finite() && cand_val >= current + 1e-4 * step * tangent_norm * tangent_norm {
                    *v = cand;
                    current = cand_val;
                    accepted = true;
                    step = (step * 2.0).min(1e6);
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-18 {
                break;
            }
        }
        if !accepted {
            // No ascent direction at working precision.
            return (current, tangent_norm <= opts.tol * (1.0 + radial.abs()), tangent_norm);
        }
    }
    (current, false, tangent_norm)
}

/// Euclidean projection onto the probability simplex (Held et al.; see also
/// Duchi, Shalev-Shwartz, Singer, Chandra 2008). The projection is invariant
/// under adding a constant to every coordinate, so the input is re-centered
/// at its maximum first; this keeps the thresholding exact even when some
/// coordinates are astronomically larger than others.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let top = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = v.iter().map(|&x| x - top).collect();
    let mut sorted = shifted.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    let mut rho = 0;
    for (k, &x) in sorted.iter().enumerate() {
        cumsum += x;
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        if x - candidate > 0.0 {
            theta = candidate;
            rho = k + 1;
        }
    }
    debug_assert!(rho > 0);
    shifted.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn solve_level_reduced(
    d: usize,
    depth: usize,
    gamma: f64,
    opts: SolveOpts,
) -> Result<VariationalSolution> {
    let sizes = level_sizes(d, depth);
    let levels = depth + 1;
    // Level masses s_l = w_l^2 on the sphere; per-vertex value s_l / size_l.
    let eval = |w: &[f64]| level_directed_sum_sq(w, &sizes, gamma);
    let grad = |w: &[f64], g: &mut Vec<f64>| level_gradient_sq(w, &sizes, gamma, g);

    let mut starts: Vec<Vec<f64>> = Vec::new();
    starts.push(vec![1.0 / levels as f64; levels]);
    let mut two = vec![0.0; levels];
    two[0] = 0.5;
    two[1] = 0.5;
    starts.push(two);
    for span in [depth + 1, depth, depth / 2 + 1] {
        if span >= 2 {
            starts.push(uniform_level_masses(depth, span));
        }
    }
    // Geometric mass profiles; ratio (d-1)^(1-2 gamma) matches the scale of
    // the deep-level construction at the given gamma.
    let natural = ((d - 1) as f64).powf(1.0 - 2.0 * gamma);
    for ratio in [natural, 0.9, 0.7, 0.5] {
        let mut s: Vec<f64> = (0..levels).map(|l| ratio.powi(l as i32)).collect();
        let total: f64 = s.iter().sum();
        if total.is_finite() && total > 0.0 {
            for x in &mut s {
                *x /= total;
            }
            starts.push(s);
        }
    }
    push_random_starts(&mut starts, levels, opts);

    let mut best: Option<(f64, Vec<f64>, bool, f64)> = None;
    for start in &starts {
        let mut w = to_sphere(start);
        let (val, converged, pg) = ascend_sphere(&mut w, &eval, &grad, &opts);
        if best.as_ref().map_or(true, |(bv, _, _, _)| val > *bv) {
            best = Some((val, w, converged, pg));
        }
    }
    let (_, w, converged, pg) = best.unwrap();
    let s = sphere_to_simplex(&w);
    let value = level_directed_sum_sq(&w, &sizes, gamma).powf(1.0 / (2.0 * gamma));
    let per_vertex: Vec<f64> =
        s.iter().zip(&sizes).map(|(&mass, &size)| if size > 0.0 { mass / size } else { 0.0 }).collect();
    Ok(VariationalSolution {
        gamma,
        value,
        u: per_vertex,
        mode: SolveMode::LevelReduced,
        restarts_used: starts.len(),
        converged,
        gradient_norm: pg,
    })
}

fn level_directed_sum_sq(w: &[f64], sizes: &[f64], gamma: f64) -> f64 {
    let mut acc = 0.0;
    for l in 0..w.len() - 1 {
        let t_here = w[l] * w[l] / sizes[l];
        let t_next = w[l + 1] * w[l + 1] / sizes[l + 1];
        let p = t_here * t_next;
        if p > 0.0 {
            acc += sizes[l + 1] * p.powf(gamma);
        }
    }
    2.0 * acc
}

fn level_gradient_sq(w: &[f64], sizes: &[f64], gamma: f64, g: &mut Vec<f64>) {
    let levels = w.len();
    let q: Vec<f64> = (0..levels).map(|l| (w[l] * w[l] / sizes[l]).powf(gamma)).collect();
    for l in 0..levels {
        let mut inner = 0.0;
        if l > 0 {
            inner += sizes[l] * q[l - 1];
        }
        if l + 1 < levels {
            inner += sizes[l + 1] * q[l + 1];
        }
        // d/dw of (w^2 / size)^gamma is 2 gamma w^(2 gamma - 1) / size^gamma.
        g[l] = 2.0 * inner * 2.0 * gamma * w[l].powf(2.0 * gamma - 1.0) / sizes[l].powf(gamma);
    }
}

/// Exact value `2^(1/(2 gamma) - 1)` of the tree supremum for `gamma >= 1`.
pub fn kd_closed_form(gamma: f64) -> Result<f64> {
    if !(gamma >= 1.0) {
        return Err(Error::Domain(format!("closed form requires gamma >= 1, got {gamma}")));
    }
    Ok(2f64.powf(1.0 / (2.0 * gamma) - 1.0))
}

/// Star lower bound `d^((alpha-2)/(2 alpha))` on `h_d(alpha)` for `alpha > 2`:
/// the exact maximum over vectors supported on the root and its children.
pub fn star_bound(d: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(Error::Domain(format!("star bound requires alpha > 2, got {alpha}")));
    }
    if d < 1 {
        return Err(Error::Domain("need d >= 1".into()));
    }
    Ok((d as f64).powf((alpha - 2.0) / (2.0 * alpha)))
}

/// Construction and ceiling bounds at `gamma = 1/2`, in the undirected
/// edge-sum normalization: `lower = (sqrt(d) + (L-2) sqrt(d-1)) / L` comes
/// from the depth-L mass-spreading vector, `upper = sqrt(d-1)` is the exact
/// supremum on the infinite tree. The directed objective reported by
/// [`solve_kdl`] at `gamma = 1/2` is exactly twice these quantities.
pub fn kdl_half_bounds(d: usize, depth: usize) -> Result<(f64, f64)> {
    if d < 3 {
        return Err(Error::Domain(format!("need d >= 3, got {d}")));
    }
    if depth < 2 {
        return Err(Error::Domain(format!("need depth >= 2, got {depth}")));
    }
    let df = d as f64;
    let lf = depth as f64;
    let lower = (df.sqrt() + (lf - 2.0) * (df - 1.0).sqrt()) / lf;
    let upper = (df - 1.0).sqrt();
    Ok((lower, upper))
}

/// One row of the h_d convergence table.
#[derive(Clone, Debug)]
pub struct HdRow {
    pub depth: usize,
    /// `2^(1/alpha) * solve_kdl(d, depth, beta/2)`, before monotonization.
    pub raw: f64,
    /// Running maximum over depths up to this row.
    pub value: f64,
    pub converged: bool,
}

/// The LLN constant estimate with its convergence-in-depth table.
#[derive(Clone, Debug)]
pub struct HdResult {
    pub d: usize,
    pub alpha: f64,
    /// Conjugate half-exponent `beta/2` (zero in the trivial regime).
    pub gamma: f64,
    /// Best (largest) value over the table; a lower bound on `h_d(alpha)`.
    pub value: f64,
    /// Hard cap `2 sqrt(d-1)`, the `alpha -> infinity` limit.
    pub ceiling: f64,
    pub table: Vec<HdRow>,
}

/// Computes `h_d(alpha)`: exactly 1 for `1 < alpha <= 2`, otherwise the
/// largest tree value over depths `1..=l_max` scaled by `2^(1/alpha)`.
/// The reported value is a certified lower bound on the true constant.
pub fn h_d(d: usize, alpha: f64, l_max: usize, opts: SolveOpts) -> Result<HdResult> {
    if !(alpha > 1.0) {
        return Err(Error::Domain(format!("h_d is defined for alpha > 1, got {alpha}")));
    }
    if d < 3 {
        return Err(Error::InvalidParameters(format!("need d >= 3, got {d}")));
    }
    let ceiling = 2.0 * ((d - 1) as f64).sqrt();
    if alpha <= 2.0 {
        return Ok(HdResult { d, alpha, gamma: 0.0, value: 1.0, ceiling, table: Vec::new() });
    }
    let beta = alpha / (alpha - 1.0);
    let gamma = beta / 2.0;
    let scale = 2f64.powf(1.0 / alpha);
    let mut table = Vec::with_capacity(l_max);
    let mut running = f64::NEG_INFINITY;
    for depth in 1..=l_max.max(1) {
        let mode = if depth <= 6 { SolveMode::Auto } else { SolveMode::LevelReduced };
        let sol = solve_kdl(d, depth, gamma, SolveOpts { mode, ..opts })?;
        let raw = scale * sol.value;
        running = running.max(raw);
        table.push(HdRow { depth, raw, value: running, converged: sol.converged });
    }
    Ok(HdResult { d, alpha, gamma, value: running, ceiling, table })
}

/// Outcome of the near-maximizer certificate search.
#[derive(Clone, Debug)]
pub struct NearMaximizerReport {
    /// Edge whose endpoints both carry mass at least `1/2 - c sqrt(eps)`.
    pub edge: Option<(u32, u32)>,
    pub objective: f64,
    pub threshold: f64,
    /// Best edge by its smaller endpoint mass, for diagnostics when absent.
    pub best_edge: Option<(u32, u32)>,
    pub best_min_endpoint: f64,
}

/// For `gamma > 1`: if `u` nearly attains the two-point maximum, locate an
/// edge carrying almost all the mass. Returns the diagnostic-only report
/// when the objective is below the `(1 - eps)` threshold or no edge
/// qualifies.
pub fn near_maximizer_edge(
    n: usize,
    edges: &[(u32, u32)],
    u: &[f64],
    gamma: f64,
    eps: f64,
    c: f64,
) -> Result<NearMaximizerReport> {
    if !(gamma > 1.0) {
        return Err(Error::Domain(format!(
            "near-maximizer structure requires gamma > 1, got {gamma}"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0,1), got {eps}")));
    }
    let value = objective_on_edges(n, edges, u, gamma)?;
    let threshold = (1.0 - eps) * kd_closed_form(gamma)?;
    let cut = 0.5 - c * eps.sqrt();
    let mut best: Option<((u32, u32), f64)> = None;
    for &(i, j) in edges {
        let lo = u[i as usize].min(u[j as usize]);
        if best.as_ref().map_or(true, |(_, b)| lo > *b) {
            best = Some(((i, j), lo));
        }
    }
    let (best_edge, best_min) = match best {
        Some((e, b)) => (Some(e), b),
        None => (None, 0.0),
    };
    let edge = if value >= threshold && best_min >= cut { best_edge } else { None };
    Ok(NearMaximizerReport {
        edge,
        objective: value,
        threshold,
        best_edge,
        best_min_endpoint: best_min,
    })
}

/// Decodes a Pruefer sequence over `0..n` into the labeled tree's edges;
/// handy for exercising the general-tree results on enumerated trees.
pub fn pruefer_tree(n: usize, seq: &[usize]) -> Vec<(u32, u32)> {
    assert!(n >= 2 && seq.len() == n - 2);
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf.min(s) as u32, leaf.max(s) as u32));
        degree[leaf] = 0;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    debug_assert_eq!(rest.len(), 2);
    edges.push((rest[0].min(rest[1]) as u32, rest[0].max(rest[1]) as u32));
    edges
}
