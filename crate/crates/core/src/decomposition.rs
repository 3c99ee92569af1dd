//! Decomposition of a weighted network by weight truncation, and the
//! statistics of the top eigenvector over the resulting pieces.
//!
//! Edges with `|W| > b^(1/alpha)` form the sparse heavy network; under the
//! exact tail this keeps each edge independently with probability `e^-b`,
//! which shatters a bounded-degree graph into components of at most about
//! `3 log n / b` edges. Inside every heavy component a BFS spanning tree from
//! the lowest-id vertex separates tree edges from tree-excess edges, giving
//! the three-way split: acyclic heavy part, excess edges, and the small-weight
//! remainder. Per tree-component the module computes the weight norm `S_k`,
//! the eigenvector mass `x_k`, the directed Holder functional `F_k` (only
//! meaningful for `alpha > 1`), and the single-edge mass `M_k`.

use rayon::prelude::*;

use crate::graph::RegularGraph;
use crate::rng::derive_seed;
use crate::spectral::{lambda_max, spectral_norm, LanczosOpts, SparseSym};
use crate::weights::{WeibullParams, WeightedNetwork};
use crate::{Error, Result};

/// Truncation parameters; `b` is the level on the `|W|^alpha` scale.
#[derive(Clone, Copy, Debug)]
pub struct DecompositionParams {
    pub alpha: f64,
    pub b: f64,
    pub kappa: f64,
}

pub const DEFAULT_KAPPA: f64 = 0.05;

impl DecompositionParams {
    pub fn explicit(alpha: f64, b: f64) -> Result<Self> {
        WeibullParams::new(alpha)?;
        if !(b > 0.0) {
            return Err(Error::InvalidParameters(format!("b must be positive, got {b}")));
        }
        Ok(DecompositionParams { alpha, b, kappa: DEFAULT_KAPPA })
    }

    /// Truncation level from the size-driven schedule.
    pub fn scheduled(alpha: f64, n: usize, kappa: f64) -> Result<Self> {
        WeibullParams::new(alpha)?;
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameters(format!("kappa must be positive, got {kappa}")));
        }
        let b = schedule_b(alpha, n);
        Ok(DecompositionParams { alpha, b, kappa })
    }

    /// Fluctuation scale `a_n` matching the truncation schedule.
    pub fn a_n(&self, n: usize) -> f64 {
        let logn = (n as f64).ln();
        if self.alpha > 1.0 {
            logn.powf((self.alpha + 1.0) / (2.0 * self.alpha + 1.0) + self.kappa)
        } else {
            logn.powf(2.0 / (self.alpha + 2.0) + self.kappa)
        }
    }

    /// Refined scale: `a_n` in the heavy regime, `log n` past the transition.
    pub fn a_tilde(&self, n: usize) -> f64 {
        if self.alpha > 2.0 {
            (n as f64).ln()
        } else {
            self.a_n(n)
        }
    }

    /// Weights survive truncation when `|W|` exceeds this.
    pub fn magnitude_threshold(&self) -> f64 {
        self.b.powf(1.0 / self.alpha)
    }
}

/// Schedule `b_n`: `(log n)^(alpha/(2 alpha + 1))` above `alpha = 1`,
/// `(log n)^(alpha/(alpha + 2))` at or below.
pub fn schedule_b(alpha: f64, n: usize) -> f64 {
    let logn = (n as f64).ln();
    if alpha > 1.0 {
        logn.powf(alpha / (2.0 * alpha + 1.0))
    } else {
        logn.powf(alpha / (alpha + 2.0))
    }
}

/// Kept-edge mask: edge in the heavy part iff `|W| > b^(1/alpha)`.
pub fn truncate(net: &WeightedNetwork, params: &DecompositionParams) -> Vec<bool> {
    let threshold = params.magnitude_threshold();
    net.weights.iter().map(|w| w.abs() > threshold).collect()
}

/// One connected component of the heavy part.
#[derive(Clone, Debug)]
pub struct Component {
    pub vertices: Vec<u32>,
    /// Kept edge ids inside the component.
    pub edges: Vec<u32>,
    /// BFS spanning tree edges (from the lowest-id vertex).
    pub tree_edges: Vec<u32>,
    /// The remaining `|edges| - |vertices| + 1` tree-excess edges.
    pub excess_edges: Vec<u32>,
}

/// Three-way split of the edge set plus the component structure of the
/// heavy part. The masks partition the edges: tree + excess + small.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub params: DecompositionParams,
    /// Heavy edges (`X^(1)`): tree or excess.
    pub kept: Vec<bool>,
    /// Acyclic heavy part (`X^(1,1)`).
    pub tree_mask: Vec<bool>,
    /// Tree-excess heavy edges (`X^(1,2)`).
    pub excess_mask: Vec<bool>,
    /// Components of the heavy part with at least one edge.
    pub components: Vec<Component>,
    /// Vertices touched by no heavy edge.
    pub isolated_vertex_count: usize,
}

/// Runs truncation, component discovery, and the spanning-tree split.
pub fn decompose(net: &WeightedNetwork, params: DecompositionParams) -> Result<Decomposition> {
    let kept = truncate(net, &params);
    let comps = net.graph.components(&kept)?;
    let mut tree_mask = vec![false; kept.len()];
    let mut excess_mask = vec![false; kept.len()];
    let mut components = Vec::new();
    let mut isolated = 0usize;
    for (vertices, edge_ids) in comps.vertices.into_iter().zip(comps.edge_ids) {
        if edge_ids.is_empty() {
            isolated += vertices.len();
            continue;
        }
        let (tree_edges, excess_edges) = split_excess(&net.graph, &vertices, &edge_ids);
        for &e in &tree_edges {
            tree_mask[e as usize] = true;
        }
        for &e in &excess_edges {
            excess_mask[e as usize] = true;
        }
        components.push(Component { vertices, edges: edge_ids, tree_edges, excess_edges });
    }
    Ok(Decomposition { params, kept, tree_mask, excess_mask, components, isolated_vertex_count: isolated })
}

/// BFS spanning tree from the lowest-id vertex of one component; returns
/// `(tree_edges, excess_edges)`. The excess count is `|E| - |V| + 1`
/// regardless of the tree chosen; BFS from the minimum vertex makes the
/// split deterministic.
pub fn split_excess(
    graph: &RegularGraph,
    vertices: &[u32],
    edge_ids: &[u32],
) -> (Vec<u32>, Vec<u32>) {
    use std::collections::{HashMap, VecDeque};
    let mut adj: HashMap<u32, Vec<(u32, u32)>> = HashMap::new();
    for &e in edge_ids {
        let (u, v) = graph.edges()[e as usize];
        adj.entry(u).or_default().push((v, e));
        adj.entry(v).or_default().push((u, e));
    }
    let root = *vertices.iter().min().expect("component has vertices");
    let mut visited: HashMap<u32, ()> = HashMap::new();
    visited.insert(root, ());
    let mut tree = Vec::new();
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        if let Some(nbrs) = adj.get(&u) {
            let mut sorted = nbrs.clone();
            sorted.sort_unstable();
            for (v, e) in sorted {
                if !visited.contains_key(&v) {
                    visited.insert(v, ());
                    tree.push(e);
                    queue.push_back(v);
                }
            }
        }
    }
    tree.sort_unstable();
    let tree_set: std::collections::HashSet<u32> = tree.iter().copied().collect();
    let excess: Vec<u32> = edge_ids.iter().copied().filter(|e| !tree_set.contains(e)).collect();
    (tree, excess)
}

/// Per-component weight and eigenvector statistics.
#[derive(Clone, Debug)]
pub struct ComponentStats {
    /// Index into `Decomposition::components`.
    pub component: usize,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub excess: usize,
    /// `S_k`: l^alpha norm of the tree-edge weights.
    pub s_norm: f64,
    /// `x_k`: eigenvector mass on the component's vertices.
    pub x_mass: f64,
    /// `F_k`: directed Holder functional over tree edges (`alpha > 1` only).
    pub f_holder: Option<f64>,
    /// `M_k`: largest `f_i^2 + f_j^2` over tree edges.
    pub m_top: f64,
}

/// Computes stats for every component, sorted by `S_k` descending.
/// `f` must be a unit vector over the graph's vertices.
pub fn component_stats(
    net: &WeightedNetwork,
    dec: &Decomposition,
    f: &[f64],
    alpha: f64,
) -> Result<Vec<ComponentStats>> {
    if f.len() != net.graph.n() {
        return Err(Error::InvalidParameters("eigenvector length mismatch".into()));
    }
    let beta = if alpha > 1.0 { Some(alpha / (alpha - 1.0)) } else { None };
    let mut stats: Vec<ComponentStats> = dec
        .components
        .iter()
        .enumerate()
        .map(|(k, comp)| {
            let mut s_pow = 0.0;
            let mut f_pow = 0.0;
            let mut m_top: f64 = 0.0;
            for &e in &comp.tree_edges {
                let (i, j) = net.graph.edges()[e as usize];
                let w = net.weights[e as usize].abs();
                s_pow += w.powf(alpha);
                let (fi, fj) = (f[i as usize], f[j as usize]);
                m_top = m_top.max(fi * fi + fj * fj);
                if let Some(b) = beta {
                    let p = (fi * fj).abs();
                    if p > 0.0 {
                        f_pow += 2.0 * p.powf(b); // directed: both orientations
                    }
                }
            }
            let x_mass: f64 = comp.vertices.iter().map(|&v| f[v as usize] * f[v as usize]).sum();
            ComponentStats {
                component: k,
                vertex_count: comp.vertices.len(),
                edge_count: comp.edges.len(),
                excess: comp.excess_edges.len(),
                s_norm: s_pow.powf(1.0 / alpha),
                x_mass,
                f_holder: beta.map(|b| f_pow.powf(1.0 / b)),
                m_top,
            }
        })
        .collect();
    stats.sort_by(|a, b| b.s_norm.partial_cmp(&a.s_norm).unwrap());
    Ok(stats)
}

/// Eigenvector mass on vertices outside every heavy component.
pub fn isolated_vertex_mass(net: &WeightedNetwork, dec: &Decomposition, f: &[f64]) -> f64 {
    let mut in_component = vec![false; net.graph.n()];
    for comp in &dec.components {
        for &v in &comp.vertices {
            in_component[v as usize] = true;
        }
    }
    f.iter()
        .enumerate()
        .filter(|(v, _)| !in_component[*v])
        .map(|(_, x)| x * x)
        .sum()
}

/// Number of components whose `S_k` is at or above `threshold`.
pub fn heavy_component_count(stats: &[ComponentStats], threshold: f64) -> usize {
    stats.iter().filter(|s| s.s_norm >= threshold).count()
}

/// Localization profile of a unit vector.
#[derive(Clone, Debug)]
pub struct LocalizationReport {
    pub eps: f64,
    /// Smallest vertex set carrying l2 norm at least `1 - eps`; exact by
    /// prefix optimality of the sorted masses.
    pub min_support_size: usize,
    /// Largest `f_i^2 + f_j^2` over graph edges.
    pub top_edge_mass: f64,
    /// Greedy matching on edges by mass, truncated once it covers the
    /// `1 - eps` norm target (or the whole matching if it never does).
    pub disjoint_edges: Vec<(u32, u32, f64)>,
    /// Total mass of the reported matching.
    pub disjoint_edge_mass: f64,
}

pub fn localization_report(net: &WeightedNetwork, f: &[f64], eps: f64) -> Result<LocalizationReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameters(format!("eps must lie in (0,1), got {eps}")));
    }
    if f.len() != net.graph.n() {
        return Err(Error::InvalidParameters("eigenvector length mismatch".into()));
    }
    let mut masses: Vec<f64> = f.iter().map(|x| x * x).collect();
    masses.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let target = (1.0 - eps) * (1.0 - eps);
    let mut cum = 0.0;
    let mut min_support_size = masses.len();
    for (k, &m) in masses.iter().enumerate() {
        cum += m;
        if cum >= target {
            min_support_size = k + 1;
            break;
        }
    }

    let mut order: Vec<usize> = (0..net.graph.edge_count()).collect();
    let edge_mass = |e: usize| {
        let (i, j) = net.graph.edges()[e];
        let (fi, fj) = (f[i as usize], f[j as usize]);
        fi * fi + fj * fj
    };
    order.sort_by(|&a, &b| edge_mass(b).partial_cmp(&edge_mass(a)).unwrap());
    let top_edge_mass = order.first().map_or(0.0, |&e| edge_mass(e));
    let mut used = vec![false; net.graph.n()];
    let mut matching = Vec::new();
    let mut covered = 0.0;
    for &e in &order {
        let (i, j) = net.graph.edges()[e];
        if used[i as usize] || used[j as usize] {
            continue;
        }
        used[i as usize] = true;
        used[j as usize] = true;
        let m = edge_mass(e);
        covered += m;
        matching.push((i, j, m));
        if covered >= target {
            break;
        }
    }
    Ok(LocalizationReport {
        eps,
        min_support_size,
        top_edge_mass,
        disjoint_edges: matching,
        disjoint_edge_mass: covered,
    })
}

/// One trial of the shattering experiment.
#[derive(Clone, Debug)]
pub struct ShatteringOutcome {
    pub trial: usize,
    pub seed: u64,
    pub max_component_edges: usize,
    pub exceeded: bool,
}

#[derive(Clone, Debug)]
pub struct ShatteringSummary {
    pub n: usize,
    pub d: usize,
    pub b: f64,
    /// `floor(3 log n / b)`.
    pub bound: usize,
    pub outcomes: Vec<ShatteringOutcome>,
    pub exceedance_fraction: f64,
}

/// Percolation component-size experiment: fresh graph and weights per trial,
/// recording the largest heavy-component edge count against the bound.
/// The retention probability is `e^-b` regardless of the weight shape, so
/// the shape is fixed at 1 internally.
pub fn shattering_experiment(
    n: usize,
    d: usize,
    b: f64,
    trials: usize,
    master_seed: u64,
) -> Result<ShatteringSummary> {
    if !(b > 0.0) {
        return Err(Error::InvalidParameters("b must be positive".into()));
    }
    let bound = (3.0 * (n as f64).ln() / b).floor() as usize;
    let params = DecompositionParams::explicit(1.0, b)?;
    let outcomes: Vec<ShatteringOutcome> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = derive_seed(master_seed, &[0x54A7, trial as u64]);
            let graph = RegularGraph::generate(n, d, seed)?;
            let net = WeightedNetwork::weigh(graph, WeibullParams::new(1.0)?, seed ^ 1);
            let kept = truncate(&net, &params);
            let comps = net.graph.components(&kept)?;
            let max_edges = comps.edge_ids.iter().map(|e| e.len()).max().unwrap_or(0);
            Ok(ShatteringOutcome {
                trial,
                seed,
                max_component_edges: max_edges,
                exceeded: max_edges > bound,
            })
        })
        .collect::<Result<_>>()?;
    let exceedance_fraction =
        outcomes.iter().filter(|o| o.exceeded).count() as f64 / trials.max(1) as f64;
    Ok(ShatteringSummary { n, d, b, bound, outcomes, exceedance_fraction })
}

/// One record of the phase-transition experiment.
#[derive(Clone, Debug)]
pub struct TransitionRecord {
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub trial: usize,
    pub seed: u64,
    pub lambda: f64,
    pub residual: f64,
    pub converged: bool,
    pub max_abs_weight: f64,
    /// `lambda / (log n)^(1/alpha)`.
    pub ratio: f64,
    /// Exact lower bound `lambda >= max |W| - residual`.
    pub lemma_a2_ok: bool,
}

/// Largest-eigenvalue scaling records over a grid of sizes and shapes.
pub fn transition_experiment(
    n_list: &[usize],
    d: usize,
    alpha_list: &[f64],
    trials: usize,
    master_seed: u64,
    lanczos: LanczosOpts,
) -> Result<Vec<TransitionRecord>> {
    let mut grid = Vec::new();
    for (ni, &n) in n_list.iter().enumerate() {
        for (ai, &alpha) in alpha_list.iter().enumerate() {
            for trial in 0..trials {
                grid.push((ni, ai, n, alpha, trial));
            }
        }
    }
    grid.par_iter()
        .map(|&(ni, ai, n, alpha, trial)| {
            let seed =
                derive_seed(master_seed, &[0x7247, ni as u64, ai as u64, trial as u64]);
            let graph = RegularGraph::generate(n, d, seed)?;
            let net = WeightedNetwork::weigh(graph, WeibullParams::new(alpha)?, seed ^ 0xF00D);
            let m = SparseSym::from_network(&net, None);
            let pair = lambda_max(&m, lanczos)?;
            let max_w = net.max_abs_weight();
            let ratio = pair.lambda / (n as f64).ln().powf(1.0 / alpha);
            Ok(TransitionRecord {
                n,
                d,
                alpha,
                trial,
                seed,
                lambda: pair.lambda,
                residual: pair.residual,
                converged: pair.converged,
                max_abs_weight: max_w,
                ratio,
                lemma_a2_ok: pair.lambda >= max_w - pair.residual,
            })
        })
        .collect()
}

/// Full per-instance decomposition analysis: eigenpair, split, component
/// stats, localization, and the triangle-inequality check
/// `lambda_1(X) <= lambda_1(X_tree) + ||X_excess|| + ||X_small||`.
#[derive(Clone, Debug)]
pub struct DecompositionAnalysis {
    pub lambda: f64,
    pub residual: f64,
    pub lambda_tree: f64,
    pub norm_excess: f64,
    pub norm_small: f64,
    pub weyl_ok: bool,
    pub small_part_bounded: bool,
    pub stats: Vec<ComponentStats>,
    pub isolated_mass: f64,
    pub report: LocalizationReport,
    pub decomposition: Decomposition,
    pub eigenvector: Vec<f64>,
}

pub fn analyze(
    net: &WeightedNetwork,
    params: DecompositionParams,
    eps: f64,
    lanczos: LanczosOpts,
) -> Result<DecompositionAnalysis> {
    let dec = decompose(net, params)?;
    let full = SparseSym::from_network(net, None);
    let pair = lambda_max(&full, lanczos)?;
    let tree = SparseSym::from_network(net, Some(&dec.tree_mask));
    let lambda_tree = lambda_max(&tree, lanczos)?.lambda;
    let excess = SparseSym::from_network(net, Some(&dec.excess_mask));
    let norm_excess = spectral_norm(&excess, lanczos)?;
    let small_mask: Vec<bool> = dec.kept.iter().map(|k| !k).collect();
    let small = SparseSym::from_network(net, Some(&small_mask));
    let norm_small = spectral_norm(&small, lanczos)?;
    let slack = 4.0 * pair.residual + 1e-9 * (1.0 + pair.lambda.abs());
    let weyl_ok = pair.lambda <= lambda_tree + norm_excess + norm_small + slack;
    let small_bound = net.graph.d() as f64 * params.magnitude_threshold();
    let small_part_bounded = norm_small <= small_bound + slack;
    let stats = component_stats(net, &dec, &pair.f, params.alpha)?;
    let isolated_mass = isolated_vertex_mass(net, &dec, &pair.f);
    let report = localization_report(net, &pair.f, eps)?;
    Ok(DecompositionAnalysis {
        lambda: pair.lambda,
        residual: pair.residual,
        lambda_tree,
        norm_excess,
        norm_small,
        weyl_ok,
        small_part_bounded,
        stats,
        isolated_mass,
        report,
        decomposition: dec,
        eigenvector: pair.f,
    })
}
