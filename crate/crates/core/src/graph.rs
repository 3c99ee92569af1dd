//! Uniform simple random d-regular graphs and neighborhood structure.
//!
//! Generation uses the configuration (pairing) model with full restart on any
//! self-loop or multi-edge. Conditioning the pairing on simplicity yields the
//! exact uniform distribution over simple d-regular graphs; for fixed d the
//! acceptance probability is bounded away from zero (asymptotically
//! `exp(-(d^2-1)/4)`), so restarts are cheap.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::rng::SplitMix64;
use crate::{Error, Result};

/// Default cap on pairing restarts before giving up.
pub const DEFAULT_RETRY_CAP: usize = 10_000;

/// A simple d-regular graph with a canonical undirected edge index.
///
/// Edges are stored as `(i, j)` with `i < j` in lexicographic order; the
/// position of an edge in [`RegularGraph::edges`] is its stable edge id, so
/// per-edge weights and masks are plain arrays.
#[derive(Clone, Debug)]
pub struct RegularGraph {
    n: usize,
    d: usize,
    seed: u64,
    neighbors: Vec<Vec<u32>>,
    edges: Vec<(u32, u32)>,
}

/// Structure report for the radius-R ball around a vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct BallReport {
    pub root: usize,
    pub radius: usize,
    pub vertex_count: usize,
    pub edge_count: usize,
    /// `edge_count - vertex_count + 1`; zero exactly when the ball is a tree.
    pub excess: usize,
    pub contains_cycle: bool,
}

/// Induced subgraph of a ball: vertex ids and edge ids into the parent graph.
#[derive(Clone, Debug)]
pub struct BallSubgraph {
    pub vertices: Vec<u32>,
    pub edge_ids: Vec<u32>,
}

/// Tree-likeness census over all radius-R balls of a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeLikenessCensus {
    pub radius: usize,
    pub max_excess: usize,
    pub cyclic_vertex_count: usize,
}

/// Connected components of a masked subgraph.
#[derive(Clone, Debug)]
pub struct Components {
    /// Per component: sorted vertex ids.
    pub vertices: Vec<Vec<u32>>,
    /// Per component: edge ids of the masked edges inside it.
    pub edge_ids: Vec<Vec<u32>>,
}

impl RegularGraph {
    /// Draws a uniform simple d-regular graph on `n` vertices.
    ///
    /// Deterministic given `(n, d, seed)`. Fails on invalid parameters
    /// (`n * d` odd or `n <= d`) or when `retry_cap` restarts are exhausted,
    /// which signals pathological parameters rather than bad luck.
    pub fn generate(n: usize, d: usize, seed: u64) -> Result<Self> {
        Self::generate_with_cap(n, d, seed, DEFAULT_RETRY_CAP)
    }

    pub fn generate_with_cap(n: usize, d: usize, seed: u64, retry_cap: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidParameters("degree d must be at least 1".into()));
        }
        if n * d % 2 != 0 {
            return Err(Error::InvalidParameters(format!(
                "n*d must be even, got n={n}, d={d}"
            )));
        }
        if n <= d {
            return Err(Error::InvalidParameters(format!(
                "need n > d for a simple graph, got n={n}, d={d}"
            )));
        }
        let mut rng = SplitMix64::stream(seed, &[n as u64, d as u64]);
        // Half-edge k belongs to vertex k / d.
        let mut half_edges: Vec<u32> = (0..(n * d) as u32).collect();
        let mut attempts = 0usize;
        loop {
            attempts += 1;
            if attempts > retry_cap {
                return Err(Error::RetryBudgetExceeded { n, d, attempts: attempts - 1 });
            }
            rng.shuffle(&mut half_edges);
            if let Some(graph) = Self::try_pairing(n, d, seed, &half_edges) {
                return Ok(graph);
            }
        }
    }

    /// Pairs consecutive half-edges; `None` if the pairing is not simple.
    fn try_pairing(n: usize, d: usize, seed: u64, half_edges: &[u32]) -> Option<Self> {
        let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(n * d / 2);
        for chunk in half_edges.chunks_exact(2) {
            let (u, v) = (chunk[0] / d as u32, chunk[1] / d as u32);
            if u == v {
                return None; // self-loop
            }
            pairs.push(if u < v { (u, v) } else { (v, u) });
        }
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0] == w[1]) {
            return None; // multi-edge
        }
        let mut neighbors = vec![Vec::with_capacity(d); n];
        for &(u, v) in &pairs {
            neighbors[u as usize].push(v);
            neighbors[v as usize].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        let graph = RegularGraph { n, d, seed, neighbors, edges: pairs };
        debug_assert!(graph.check_invariants().is_ok());
        Some(graph)
    }

    /// Builds a graph from explicit edges, validating every invariant.
    pub fn from_edges(n: usize, d: usize, seed: u64, mut edges: Vec<(u32, u32)>) -> Result<Self> {
        edges.sort_unstable();
        let mut neighbors = vec![Vec::with_capacity(d); n];
        for &(u, v) in &edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidParameters(format!("edge ({u},{v}) out of range")));
            }
            neighbors[u as usize].push(v);
            neighbors[v as usize].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        let graph = RegularGraph { n, d, seed, neighbors, edges };
        graph.check_invariants()?;
        Ok(graph)
    }

    fn check_invariants(&self) -> Result<()> {
        if self.n * self.d % 2 != 0 || self.edges.len() != self.n * self.d / 2 {
            return Err(Error::InvalidParameters(format!(
                "edge count {} does not match n*d/2",
                self.edges.len()
            )));
        }
        for (v, list) in self.neighbors.iter().enumerate() {
            if list.len() != self.d {
                return Err(Error::InvalidParameters(format!(
                    "vertex {v} has degree {}, expected {}",
                    list.len(),
                    self.d
                )));
            }
            if list.iter().any(|&u| u as usize == v) {
                return Err(Error::InvalidParameters(format!("self-loop at {v}")));
            }
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParameters(format!("repeated neighbor at {v}")));
            }
        }
        for w in self.edges.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidParameters("edges not in canonical order".into()));
            }
        }
        if self.edges.iter().any(|&(u, v)| u >= v) {
            return Err(Error::InvalidParameters("edge with i >= j".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical undirected edge list; the index of an edge is its id.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[v]
    }

    /// BFS ball of radius `R` around `v`: report plus induced subgraph.
    pub fn ball(&self, v: usize, radius: usize) -> Result<(BallReport, BallSubgraph)> {
        if v >= self.n {
            return Err(Error::VertexOutOfRange { v, n: self.n });
        }
        let mut scratch = BallScratch::new(self.n);
        Ok(self.ball_with_scratch(v, radius, &mut scratch))
    }

    fn ball_with_scratch(&self, v: usize, radius: usize, scratch: &mut BallScratch) -> (BallReport, BallSubgraph) {
        scratch.stamp += 1;
        let stamp = scratch.stamp;
        let mut frontier = vec![v as u32];
        scratch.mark[v] = stamp;
        let mut vertices = vec![v as u32];
        for _ in 0..radius {
            let mut next = Vec::new();
            for &u in &frontier {
                for &w in &self.neighbors[u as usize] {
                    if scratch.mark[w as usize] != stamp {
                        scratch.mark[w as usize] = stamp;
                        next.push(w);
                        vertices.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        // Induced edges: both endpoints marked.
        let mut edge_ids = Vec::new();
        let mut edge_count = 0usize;
        for &u in &vertices {
            for &w in &self.neighbors[u as usize] {
                if w > u && scratch.mark[w as usize] == stamp {
                    edge_count += 1;
                    if let Ok(idx) = self.edges.binary_search(&(u, w)) {
                        edge_ids.push(idx as u32);
                    }
                }
            }
        }
        vertices.sort_unstable();
        edge_ids.sort_unstable();
        let excess = edge_count + 1 - vertices.len();
        let report = BallReport {
            root: v,
            radius,
            vertex_count: vertices.len(),
            edge_count,
            excess,
            contains_cycle: excess >= 1,
        };
        (report, BallSubgraph { vertices, edge_ids })
    }

    /// Exact max ball excess and cyclic-vertex count over all n balls.
    pub fn census(&self, radius: usize) -> Result<TreeLikenessCensus> {
        if radius < 1 {
            return Err(Error::InvalidParameters("census radius must be >= 1".into()));
        }
        let mut scratch = BallScratch::new(self.n);
        let mut max_excess = 0usize;
        let mut cyclic = 0usize;
        for v in 0..self.n {
            let (report, _) = self.ball_with_scratch(v, radius, &mut scratch);
            max_excess = max_excess.max(report.excess);
            if report.contains_cycle {
                cyclic += 1;
            }
        }
        Ok(TreeLikenessCensus { radius, max_excess, cyclic_vertex_count: cyclic })
    }

    /// Default census radius `floor(0.2 * log_{d-1} n)`, at least 1.
    pub fn default_census_radius(&self) -> usize {
        if self.d <= 2 {
            return 1;
        }
        let r = (0.2 * (self.n as f64).ln() / ((self.d - 1) as f64).ln()).floor();
        (r as usize).max(1)
    }

    /// Connected components of the subgraph selected by `edge_mask`.
    ///
    /// Every vertex appears in exactly one component; vertices with no masked
    /// edge come out as singletons.
    pub fn components(&self, edge_mask: &[bool]) -> Result<Components> {
        if edge_mask.len() != self.edges.len() {
            return Err(Error::MaskLengthMismatch {
                got: edge_mask.len(),
                expected: self.edges.len(),
            });
        }
        let mut uf = UnionFind::new(self.n);
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            if edge_mask[id] {
                uf.union(u as usize, v as usize);
            }
        }
        let mut slot = vec![usize::MAX; self.n];
        let mut vertices: Vec<Vec<u32>> = Vec::new();
        for v in 0..self.n {
            let root = uf.find(v);
            if slot[root] == usize::MAX {
                slot[root] = vertices.len();
                vertices.push(Vec::new());
            }
            vertices[slot[root]].push(v as u32);
        }
        let mut edge_ids: Vec<Vec<u32>> = vec![Vec::new(); vertices.len()];
        for (id, &(u, _)) in self.edges.iter().enumerate() {
            if edge_mask[id] {
                edge_ids[slot[uf.find(u as usize)]].push(id as u32);
            }
        }
        Ok(Components { vertices, edge_ids })
    }

    /// Writes the plain-text graph format: header `n d seed`, then one
    /// canonical `i j` line per edge.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = String::new();
        writeln!(buf, "{} {} {}", self.n, self.d, self.seed).unwrap();
        for &(u, v) in &self.edges {
            writeln!(buf, "{u} {v}").unwrap();
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(std::fs::File::create(path)?)
    }

    /// Reads the graph format, validating all invariants.
    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let mut lines = BufReader::new(input).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty graph file".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("bad header `{header}`, expected `n d seed`")));
        }
        let n: usize = fields[0].parse().map_err(|_| Error::Parse("bad n".into()))?;
        let d: usize = fields[1].parse().map_err(|_| Error::Parse("bad d".into()))?;
        let seed: u64 = fields[2].parse().map_err(|_| Error::Parse("bad seed".into()))?;
        let mut edges = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let u: u32 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad edge line `{line}`")))?;
            let v: u32 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad edge line `{line}`")))?;
            edges.push((u, v));
        }
        Self::from_edges(n, d, seed, edges)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }
}

struct BallScratch {
    mark: Vec<u64>,
    stamp: u64,
}

impl BallScratch {
    fn new(n: usize) -> Self {
        BallScratch { mark: vec![0; n], stamp: 0 }
    }
}

/// Union-find with path halving and union by size.
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true when the roots were distinct (the edge merged two sets).
    pub(crate) fn union(&mut self, x: usize, y: usize) -> bool {
        let (mut a, mut b) = (self.find(x), self.find(y));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

/// Measured acceptance rate of the pairing model over a fixed number of
/// attempts; used to guard against pairing bugs.
pub fn pairing_acceptance_rate(n: usize, d: usize, seed: u64, attempts: usize) -> Result<f64> {
    if d < 1 || n * d % 2 != 0 || n <= d {
        return Err(Error::InvalidParameters("bad (n, d)".into()));
    }
    let mut rng = SplitMix64::stream(seed, &[n as u64, d as u64, 0xACC]);
    let mut half_edges: Vec<u32> = (0..(n * d) as u32).collect();
    let mut accepted = 0usize;
    for _ in 0..attempts {
        rng.shuffle(&mut half_edges);
        if RegularGraph::try_pairing(n, d, seed, &half_edges).is_some() {
            accepted += 1;
        }
    }
    Ok(accepted as f64 / attempts as f64)
}

/// Exhaustively enumerates all labeled simple d-regular graphs on n vertices
/// as canonical edge lists. Only feasible for tiny n; this is the uniformity
/// oracle for the generator.
pub fn enumerate_regular_graphs(n: usize, d: usize) -> Vec<Vec<(u32, u32)>> {
    let mut all_pairs = Vec::new();
    for i in 0..n as u32 {
        for j in (i + 1)..n as u32 {
            all_pairs.push((i, j));
        }
    }
    let m = all_pairs.len();
    assert!(m <= 28, "enumeration oracle limited to n*(n-1)/2 <= 28 candidate edges");
    let mut found = Vec::new();
    for mask in 0u32..(1 << m) {
        if (mask.count_ones() as usize) != n * d / 2 {
            continue;
        }
        let mut deg = vec![0usize; n];
        for (k, &(i, j)) in all_pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                deg[i as usize] += 1;
                deg[j as usize] += 1;
            }
        }
        if deg.iter().all(|&x| x == d) {
            found.push(
                all_pairs
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect(),
            );
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k4_is_forced() {
        for seed in 0..5 {
            let g = RegularGraph::generate(4, 3, seed).unwrap();
            assert_eq!(g.edges(), &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        }
    }

    #[test]
    fn parity_and_size_errors() {
        assert!(matches!(RegularGraph::generate(5, 3, 1), Err(Error::InvalidParameters(_))));
        assert!(matches!(RegularGraph::generate(3, 3, 1), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = RegularGraph::generate(50, 3, 99).unwrap();
        let b = RegularGraph::generate(50, 3, 99).unwrap();
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn ball_examples_on_k4() {
        let g = RegularGraph::generate(4, 3, 0).unwrap();
        let (r0, s0) = g.ball(0, 0).unwrap();
        assert_eq!((r0.vertex_count, r0.edge_count, r0.excess), (1, 0, 0));
        assert!(!r0.contains_cycle);
        assert_eq!(s0.vertices, vec![0]);
        let (r1, s1) = g.ball(0, 1).unwrap();
        assert_eq!((r1.vertex_count, r1.edge_count, r1.excess), (4, 6, 3));
        assert!(r1.contains_cycle);
        assert_eq!(s1.edge_ids.len(), 6);
        assert!(matches!(g.ball(9, 1), Err(Error::VertexOutOfRange { .. })));
    }

    #[test]
    fn ball_monotone_in_radius() {
        let g = RegularGraph::generate(60, 3, 5).unwrap();
        for v in 0..10 {
            let mut prev_vertices = 0;
            let mut prev_excess = 0;
            for radius in 0..6 {
                let (r, _) = g.ball(v, radius).unwrap();
                assert!(r.vertex_count >= prev_vertices);
                assert!(r.excess >= prev_excess);
                prev_vertices = r.vertex_count;
                prev_excess = r.excess;
            }
        }
    }

    #[test]
    fn tree_ball_has_zero_excess() {
        // Depth-1 neighborhoods in a large sparse graph are almost surely trees.
        let g = RegularGraph::generate(2000, 3, 7).unwrap();
        let mut tree_balls = 0;
        for v in 0..50 {
            let (r, _) = g.ball(v, 1).unwrap();
            if r.excess == 0 {
                assert!(!r.contains_cycle);
                tree_balls += 1;
            }
        }
        assert!(tree_balls >= 45);
    }

    #[test]
    fn census_on_k4() {
        let g = RegularGraph::generate(4, 3, 0).unwrap();
        let c = g.census(1).unwrap();
        assert_eq!(c.max_excess, 3);
        assert_eq!(c.cyclic_vertex_count, 4);
        assert!(g.census(0).is_err());
    }

    #[test]
    fn components_trivial_masks() {
        let g = RegularGraph::generate(10, 3, 3).unwrap();
        let all = g.components(&vec![true; g.edge_count()]).unwrap();
        // A random cubic graph on 10 vertices is connected for this seed.
        assert_eq!(all.vertices.len(), 1);
        assert_eq!(all.edge_ids[0].len(), 15);
        let none = g.components(&vec![false; g.edge_count()]).unwrap();
        assert_eq!(none.vertices.len(), 10);
        assert!(none.edge_ids.iter().all(|e| e.is_empty()));
        assert!(g.components(&[true]).is_err());
    }

    #[test]
    fn acceptance_rate_in_sanity_band() {
        let rate = pairing_acceptance_rate(100, 3, 11, 10_000).unwrap();
        assert!((0.05..=0.60).contains(&rate), "rate {rate} outside [0.05, 0.60]");
    }

    #[test]
    fn file_roundtrip_and_validation() {
        let g = RegularGraph::generate(20, 3, 13).unwrap();
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        let h = RegularGraph::read_from(&buf[..]).unwrap();
        assert_eq!(g.edges(), h.edges());
        assert_eq!((h.n(), h.d(), h.seed()), (20, 3, 13));

        // Corrupt one edge: vertex 0 now has degree 2 and vertex 1 degree 4.
        let text = String::from_utf8(buf).unwrap();
        let bad = text.replacen("0 ", "1 ", 1);
        assert!(RegularGraph::read_from(bad.as_bytes()).is_err());
    }

    #[test]
    fn enumeration_oracle_finds_unique_cubic_on_4() {
        let graphs = enumerate_regular_graphs(4, 3);
        assert_eq!(graphs.len(), 1);
        assert_eq!(graphs[0].len(), 6);
    }
}
