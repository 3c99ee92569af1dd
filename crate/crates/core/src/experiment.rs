//! Reproducible experiment orchestration.
//!
//! A run is described by a single JSON config. Each trial draws its seed from
//! `derive_seed(master_seed, [grid_index, trial_index])` where `grid_index`
//! enumerates the parameter grid in the nested order written below per kind,
//! so outputs depend only on the config contents and never on thread count
//! or execution order. Trials execute on a rayon pool and are emitted in
//! grid-then-trial order. CSV numbers are written with 17 significant digits
//! so determinism is testable bytewise; wall-clock timing is deliberately
//! kept out of both artifacts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::decomposition::{
    self, heavy_component_count, DecompositionParams, DEFAULT_KAPPA,
};
use crate::graph::RegularGraph;
use crate::rng::derive_seed;
use crate::spectral::{lambda_max, LanczosOpts, SparseSym};
use crate::variational::{solve_kdl, SolveMode, SolveOpts};
use crate::weights::{
    format_f64, mc_sum_tail, weibull_sum_bound, TailBoundQuery, WeibullParams, WeightedNetwork,
};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Lln,
    Transition,
    Localization,
    Shattering,
    Census,
    Tailbound,
    Variational,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Lln => "lln",
            ExperimentKind::Transition => "transition",
            ExperimentKind::Localization => "localization",
            ExperimentKind::Shattering => "shattering",
            ExperimentKind::Census => "census",
            ExperimentKind::Tailbound => "tailbound",
            ExperimentKind::Variational => "variational",
        }
    }
}

fn default_eps() -> f64 {
    0.1
}
fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    5000
}
fn default_kappa() -> f64 {
    DEFAULT_KAPPA
}
fn default_true() -> bool {
    true
}
fn default_schema() -> u32 {
    SCHEMA_VERSION
}

/// Declarative description of one experiment run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub d: Vec<usize>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    /// Truncation levels (shattering) on the `|W|^alpha` scale.
    #[serde(default)]
    pub b: Vec<f64>,
    /// Tree depths (variational) or sum-tail thresholds (tailbound).
    #[serde(default)]
    pub l: Vec<f64>,
    #[serde(default)]
    pub gamma: Vec<f64>,
    /// Summand counts for the tailbound kind.
    #[serde(default)]
    pub m: Vec<usize>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Localization: also run the all-weights-one control rows.
    #[serde(default = "default_true")]
    pub include_control: bool,
    /// Localization: run the truncation decomposition per trial and record
    /// component statistics and the triangle-inequality check.
    #[serde(default)]
    pub analyze: bool,
    #[serde(default)]
    pub out_csv: Option<String>,
    #[serde(default)]
    pub out_json: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(config)
    }

    pub fn lanczos(&self) -> LanczosOpts {
        LanczosOpts { tol: self.tol, max_iter: self.max_iter, ..LanczosOpts::default() }
    }

    /// Every violated precondition, with the constraint it breaks.
    pub fn validate(&self) -> Vec<String> {
        fn need(violations: &mut Vec<String>, cond: bool, msg: &str) {
            if !cond {
                violations.push(msg.to_string());
            }
        }
        let mut violations = Vec::new();
        let v = &mut violations;
        need(v, self.trials >= 1, "trials: must be at least 1");
        need(v, self.eps > 0.0 && self.eps < 1.0, "eps: must lie in (0, 1)");
        need(v, self.tol > 0.0, "tol: must be positive");
        need(v, self.kappa > 0.0, "kappa: must be positive");
        let graph_kinds = matches!(
            self.kind,
            ExperimentKind::Lln
                | ExperimentKind::Transition
                | ExperimentKind::Localization
                | ExperimentKind::Shattering
                | ExperimentKind::Census
        );
        if graph_kinds {
            need(v, !self.n.is_empty(), "n: grid must not be empty");
            need(v, !self.d.is_empty(), "d: grid must not be empty");
            for &d in &self.d {
                need(v, d >= 1, "d: degree must be at least 1");
                for &n in &self.n {
                    if n * d % 2 != 0 {
                        v.push(format!("n,d: n*d must be even, got n={n}, d={d}"));
                    }
                    if n <= d {
                        v.push(format!("n,d: need n > d, got n={n}, d={d}"));
                    }
                }
            }
        }
        match self.kind {
            ExperimentKind::Lln | ExperimentKind::Transition => {
                need(v, !self.alpha.is_empty(), "alpha: grid must not be empty");
                for &a in &self.alpha {
                    need(v, a > 0.0, "alpha: shape must be positive");
                }
            }
            ExperimentKind::Localization => {
                need(v, 
                    !self.alpha.is_empty() || self.include_control,
                    "alpha: grid must not be empty unless include_control is set",
                );
                for &a in &self.alpha {
                    need(v, a > 0.0, "alpha: shape must be positive");
                }
            }
            ExperimentKind::Shattering => {
                need(v, !self.b.is_empty(), "b: grid must not be empty");
                for &b in &self.b {
                    need(v, b > 0.0, "b: truncation level must be positive");
                }
            }
            ExperimentKind::Census => {}
            ExperimentKind::Tailbound => {
                need(v, !self.m.is_empty(), "m: grid must not be empty");
                need(v, !self.b.is_empty(), "b: grid must not be empty");
                need(v, !self.l.is_empty(), "l: grid must not be empty");
                need(v, self.trials >= 10_000, "trials: tailbound needs at least 10^4 samples");
                for &b in &self.b {
                    need(v, b > 1.0, "b: conditioning level must exceed 1");
                }
                for &m in &self.m {
                    need(v, m >= 1, "m: must be at least 1");
                    for &l in &self.l {
                        if !(l > m as f64) {
                            v.push(format!("l: threshold must exceed m, got L={l}, m={m}"));
                        }
                    }
                }
            }
            ExperimentKind::Variational => {
                need(v, !self.d.is_empty(), "d: grid must not be empty");
                for &d in &self.d {
                    need(v, d >= 3, "d: variational problems need d >= 3");
                }
                need(v, !self.l.is_empty(), "l: depth grid must not be empty");
                for &l in &self.l {
                    if l < 1.0 || l.fract() != 0.0 {
                        v.push(format!("l: depths must be integers >= 1, got {l}"));
                    }
                }
                need(v, 
                    !self.gamma.is_empty() || !self.alpha.is_empty(),
                    "gamma: provide gamma values or alpha values",
                );
                for &g in &self.gamma {
                    if !(g >= 0.5) {
                        v.push(format!(
                            "gamma: must be at least 1/2 (the problem is finite only for gamma >= 1/2), got {g}"
                        ));
                    }
                }
                for &a in &self.alpha {
                    need(v, a > 2.0, "alpha: variational shapes must exceed 2");
                }
            }
        }
        violations
    }
}

/// One output row; unused fields stay empty in the CSV.
#[derive(Clone, Debug, Default)]
pub struct TrialRecord {
    pub kind: &'static str,
    pub grid_index: usize,
    pub trial: usize,
    pub seed: u64,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub alpha: Option<f64>,
    pub b: Option<f64>,
    pub depth: Option<usize>,
    pub gamma: Option<f64>,
    pub m: Option<usize>,
    pub threshold: Option<f64>,
    pub eps: Option<f64>,
    pub lambda: Option<f64>,
    pub residual: Option<f64>,
    pub converged: Option<bool>,
    pub max_abs_weight: Option<f64>,
    pub ratio: Option<f64>,
    pub lemma_a2_ok: Option<bool>,
    pub value: Option<f64>,
    pub min_support: Option<usize>,
    pub top_edge_mass: Option<f64>,
    pub disjoint_edges: Option<usize>,
    pub heavy_components: Option<usize>,
    pub weyl_ok: Option<bool>,
    pub dominant_aligned: Option<bool>,
    pub max_component_edges: Option<usize>,
    pub bound: Option<f64>,
    pub exceeded: Option<bool>,
    pub max_excess: Option<usize>,
    pub cyclic_vertices: Option<usize>,
    pub p_hat: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

pub const CSV_HEADER: &str = "schema_version,kind,grid_index,trial,seed,n,d,alpha,b,l,gamma,m,threshold,eps,lambda,residual,converged,max_abs_weight,ratio,lemma_a2_ok,value,min_support,top_edge_mass,disjoint_edges,heavy_components,weyl_ok,dominant_aligned,max_component_edges,bound,exceeded,max_excess,cyclic_vertices,p_hat,ci_low,ci_high";

fn cell_f(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

fn cell_u(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn cell_b(x: Option<bool>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl TrialRecord {
    pub fn csv_row(&self) -> String {
        [
            SCHEMA_VERSION.to_string(),
            self.kind.to_string(),
            self.grid_index.to_string(),
            self.trial.to_string(),
            self.seed.to_string(),
            cell_u(self.n),
            cell_u(self.d),
            cell_f(self.alpha),
            cell_f(self.b),
            cell_u(self.depth),
            cell_f(self.gamma),
            cell_u(self.m),
            cell_f(self.threshold),
            cell_f(self.eps),
            cell_f(self.lambda),
            cell_f(self.residual),
            cell_b(self.converged),
            cell_f(self.max_abs_weight),
            cell_f(self.ratio),
            cell_b(self.lemma_a2_ok),
            cell_f(self.value),
            cell_u(self.min_support),
            cell_f(self.top_edge_mass),
            cell_u(self.disjoint_edges),
            cell_u(self.heavy_components),
            cell_b(self.weyl_ok),
            cell_b(self.dominant_aligned),
            cell_u(self.max_component_edges),
            cell_f(self.bound),
            cell_b(self.exceeded),
            cell_u(self.max_excess),
            cell_u(self.cyclic_vertices),
            cell_f(self.p_hat),
            cell_f(self.ci_low),
            cell_f(self.ci_high),
        ]
        .join(",")
    }
}

/// Results of a run: the CSV text, the JSON summary, and the records.
pub struct RunArtifacts {
    pub csv: String,
    pub summary: Value,
    pub records: Vec<TrialRecord>,
}

/// Executes a validated config and, when paths are set, writes the artifacts.
pub fn run(config: &ExperimentConfig) -> Result<RunArtifacts> {
    let violations = config.validate();
    if !violations.is_empty() {
        return Err(Error::Config(violations.join("; ")));
    }
    let records = match config.kind {
        ExperimentKind::Lln | ExperimentKind::Transition => run_transition(config)?,
        ExperimentKind::Localization => run_localization(config)?,
        ExperimentKind::Shattering => run_shattering(config)?,
        ExperimentKind::Census => run_census(config)?,
        ExperimentKind::Tailbound => run_tailbound(config)?,
        ExperimentKind::Variational => run_variational(config)?,
    };
    let mut csv = String::with_capacity(64 + 128 * records.len());
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    for r in &records {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    let summary = summarize(config, &records)?;
    if let Some(path) = &config.out_csv {
        std::fs::write(path, &csv)?;
    }
    if let Some(path) = &config.out_json {
        std::fs::write(path, serde_json::to_string_pretty(&summary)?)?;
    }
    Ok(RunArtifacts { csv, summary, records })
}

/// Runs trial closures in parallel, preserving grid-then-trial order.
fn run_grid<F>(points: usize, trials: usize, f: F) -> Result<Vec<TrialRecord>>
where
    F: Fn(usize, usize) -> Result<TrialRecord> + Sync,
{
    let jobs: Vec<(usize, usize)> =
        (0..points).flat_map(|g| (0..trials).map(move |t| (g, t))).collect();
    jobs.par_iter().map(|&(g, t)| f(g, t)).collect()
}

fn run_transition(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    // Grid order: d, then n, then alpha.
    let mut points = Vec::new();
    for &d in &config.d {
        for &n in &config.n {
            for &alpha in &config.alpha {
                points.push((d, n, alpha));
            }
        }
    }
    let kind = config.kind.as_str();
    let lanczos = config.lanczos();
    run_grid(points.len(), config.trials, |g, t| {
        let (d, n, alpha) = points[g];
        let seed = derive_seed(config.master_seed, &[g as u64, t as u64]);
        let graph = RegularGraph::generate(n, d, seed)?;
        let net = WeightedNetwork::weigh(graph, WeibullParams::new(alpha)?, seed ^ 0xF00D);
        let m = SparseSym::from_network(&net, None);
        let pair = lambda_max(&m, lanczos)?;
        let max_w = net.max_abs_weight();
        Ok(TrialRecord {
            kind,
            grid_index: g,
            trial: t,
            seed,
            n: Some(n),
            d: Some(d),
            alpha: Some(alpha),
            lambda: Some(pair.lambda),
            residual: Some(pair.residual),
            converged: Some(pair.converged),
            max_abs_weight: Some(max_w),
            ratio: Some(pair.lambda / (n as f64).ln().powf(1.0 / alpha)),
            lemma_a2_ok: Some(pair.lambda >= max_w - pair.residual),
            ..TrialRecord::default()
        })
    })
}

fn run_localization(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    // Grid order: d, then n, then alpha values, then the control pseudo-point.
    let mut points: Vec<(usize, usize, Option<f64>)> = Vec::new();
    for &d in &config.d {
        for &n in &config.n {
            for &alpha in &config.alpha {
                points.push((d, n, Some(alpha)));
            }
            if config.include_control {
                points.push((d, n, None));
            }
        }
    }
    let lanczos = config.lanczos();
    run_grid(points.len(), config.trials, |g, t| {
        let (d, n, alpha) = points[g];
        let seed = derive_seed(config.master_seed, &[g as u64, t as u64]);
        let graph = RegularGraph::generate(n, d, seed)?;
        let mut rec = TrialRecord {
            kind: "localization",
            grid_index: g,
            trial: t,
            seed,
            n: Some(n),
            d: Some(d),
            alpha,
            eps: Some(config.eps),
            ..TrialRecord::default()
        };
        match alpha {
            None => {
                let net = WeightedNetwork::unit_weights(graph);
                let m = SparseSym::from_network(&net, None);
                let pair = lambda_max(&m, lanczos)?;
                let report = decomposition::localization_report(&net, &pair.f, config.eps)?;
                rec.lambda = Some(pair.lambda);
                rec.residual = Some(pair.residual);
                rec.converged = Some(pair.converged);
                rec.min_support = Some(report.min_support_size);
                rec.top_edge_mass = Some(report.top_edge_mass);
                rec.disjoint_edges = Some(report.disjoint_edges.len());
                rec.max_abs_weight = Some(1.0);
                rec.lemma_a2_ok = Some(pair.lambda >= 1.0 - pair.residual);
            }
            Some(alpha) => {
                let net =
                    WeightedNetwork::weigh(graph, WeibullParams::new(alpha)?, seed ^ 0xF00D);
                if config.analyze {
                    let params = DecompositionParams::scheduled(alpha, n, config.kappa)?;
                    let analysis = decomposition::analyze(&net, params, config.eps, lanczos)?;
                    let max_w = net.max_abs_weight();
                    rec.lambda = Some(analysis.lambda);
                    rec.residual = Some(analysis.residual);
                    rec.converged = Some(true);
                    rec.max_abs_weight = Some(max_w);
                    rec.lemma_a2_ok = Some(analysis.lambda >= max_w - analysis.residual);
                    rec.min_support = Some(analysis.report.min_support_size);
                    rec.top_edge_mass = Some(analysis.report.top_edge_mass);
                    rec.disjoint_edges = Some(analysis.report.disjoint_edges.len());
                    let heavy_cut = (n as f64).ln().powf(1.0 / alpha) * 0.5;
                    rec.heavy_components = Some(heavy_component_count(&analysis.stats, heavy_cut));
                    rec.weyl_ok = Some(analysis.weyl_ok);
                    // The component with the largest S carries the largest x?
                    rec.dominant_aligned = Some(
                        analysis
                            .stats
                            .first()
                            .map(|top| {
                                analysis.stats.iter().all(|s| s.x_mass <= top.x_mass + 1e-12)
                            })
                            .unwrap_or(false),
                    );
                    rec.b = Some(params.b);
                } else {
                    let m = SparseSym::from_network(&net, None);
                    let pair = lambda_max(&m, lanczos)?;
                    let report = decomposition::localization_report(&net, &pair.f, config.eps)?;
                    let max_w = net.max_abs_weight();
                    rec.lambda = Some(pair.lambda);
                    rec.residual = Some(pair.residual);
                    rec.converged = Some(pair.converged);
                    rec.max_abs_weight = Some(max_w);
                    rec.lemma_a2_ok = Some(pair.lambda >= max_w - pair.residual);
                    rec.min_support = Some(report.min_support_size);
                    rec.top_edge_mass = Some(report.top_edge_mass);
                    rec.disjoint_edges = Some(report.disjoint_edges.len());
                }
                rec.ratio = Some(rec.lambda.unwrap() / (n as f64).ln().powf(1.0 / alpha));
            }
        }
        Ok(rec)
    })
}

fn run_shattering(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    // Grid order: d, then n, then b.
    let mut points = Vec::new();
    for &d in &config.d {
        for &n in &config.n {
            for &b in &config.b {
                points.push((d, n, b));
            }
        }
    }
    run_grid(points.len(), config.trials, |g, t| {
        let (d, n, b) = points[g];
        let seed = derive_seed(config.master_seed, &[g as u64, t as u64]);
        let graph = RegularGraph::generate(n, d, seed)?;
        let net = WeightedNetwork::weigh(graph, WeibullParams::new(1.0)?, seed ^ 0xF00D);
        let params = DecompositionParams::explicit(1.0, b)?;
        let kept = decomposition::truncate(&net, &params);
        let comps = net.graph.components(&kept)?;
        let max_edges = comps.edge_ids.iter().map(|e| e.len()).max().unwrap_or(0);
        let bound = (3.0 * (n as f64).ln() / b).floor();
        Ok(TrialRecord {
            kind: "shattering",
            grid_index: g,
            trial: t,
            seed,
            n: Some(n),
            d: Some(d),
            b: Some(b),
            max_component_edges: Some(max_edges),
            bound: Some(bound),
            exceeded: Some(max_edges as f64 > bound),
            ..TrialRecord::default()
        })
    })
}

fn run_census(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let mut points = Vec::new();
    for &d in &config.d {
        for &n in &config.n {
            points.push((d, n));
        }
    }
    run_grid(points.len(), config.trials, |g, t| {
        let (d, n) = points[g];
        let seed = derive_seed(config.master_seed, &[g as u64, t as u64]);
        let graph = RegularGraph::generate(n, d, seed)?;
        let radius = graph.default_census_radius();
        let census = graph.census(radius)?;
        let bound = ((d - 1) as f64).powi(4 * radius as i32);
        Ok(TrialRecord {
            kind: "census",
            grid_index: g,
            trial: t,
            seed,
            n: Some(n),
            d: Some(d),
            depth: Some(radius),
            max_excess: Some(census.max_excess),
            cyclic_vertices: Some(census.cyclic_vertex_count),
            bound: Some(bound),
            exceeded: Some((census.cyclic_vertex_count as f64) > bound),
            ..TrialRecord::default()
        })
    })
}

fn run_tailbound(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    // Grid order: m, then b, then threshold; one row per grid point with
    // `trials` Monte Carlo samples inside.
    let alpha = config.alpha.first().copied().unwrap_or(1.0);
    let mut points = Vec::new();
    for &m in &config.m {
        for &b in &config.b {
            for &l in &config.l {
                points.push((m, b, l));
            }
        }
    }
    run_grid(points.len(), 1, |g, _| {
        let (m, b, l) = points[g];
        let seed = derive_seed(config.master_seed, &[g as u64, 0]);
        let est = mc_sum_tail(alpha, m, l, b, config.trials as u64, seed)?;
        let analytic = weibull_sum_bound(TailBoundQuery { m, l, b, c: 1.0 })?;
        Ok(TrialRecord {
            kind: "tailbound",
            grid_index: g,
            trial: 0,
            seed,
            alpha: Some(alpha),
            b: Some(b),
            m: Some(m),
            threshold: Some(l),
            p_hat: Some(est.p_hat),
            ci_low: Some(est.ci_low),
            ci_high: Some(est.ci_high),
            bound: Some(analytic),
            exceeded: Some(est.ci_high > analytic.min(1.0) + 1e-12),
            ..TrialRecord::default()
        })
    })
}

fn run_variational(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    // Grid order: d, then explicit gammas, then alpha-derived gammas, then
    // depth; one deterministic row per point.
    let mut points: Vec<(usize, f64, Option<f64>, usize)> = Vec::new();
    for &d in &config.d {
        for &gamma in &config.gamma {
            for &l in &config.l {
                points.push((d, gamma, None, l as usize));
            }
        }
        for &alpha in &config.alpha {
            let beta = alpha / (alpha - 1.0);
            for &l in &config.l {
                points.push((d, beta / 2.0, Some(alpha), l as usize));
            }
        }
    }
    run_grid(points.len(), 1, |g, _| {
        let (d, gamma, alpha, depth) = points[g];
        let seed = derive_seed(config.master_seed, &[g as u64, 0]);
        let opts = SolveOpts { seed, tol: config.tol, mode: SolveMode::Auto, ..SolveOpts::default() };
        let sol = solve_kdl(d, depth, gamma, opts)?;
        let ratio = alpha.map(|a| 2f64.powf(1.0 / a) * sol.value);
        Ok(TrialRecord {
            kind: "variational",
            grid_index: g,
            trial: 0,
            seed,
            d: Some(d),
            alpha,
            gamma: Some(gamma),
            depth: Some(depth),
            value: Some(sol.value),
            converged: Some(sol.converged),
            ratio,
            ..TrialRecord::default()
        })
    })
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

fn stats_json(values: &[f64]) -> Value {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    json!({
        "count": sorted.len(),
        "median": quantile(&sorted, 0.5),
        "q1": quantile(&sorted, 0.25),
        "q3": quantile(&sorted, 0.75),
        "min": sorted.first().copied().unwrap_or(f64::NAN),
        "max": sorted.last().copied().unwrap_or(f64::NAN),
    })
}

/// JSON summary: config echo, per-group statistics, and the embedded
/// property checks.
fn summarize(config: &ExperimentConfig, records: &[TrialRecord]) -> Result<Value> {
    let mut groups: Vec<Value> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for r in records {
        if !seen.insert(r.grid_index) {
            continue;
        }
        let in_group: Vec<&TrialRecord> =
            records.iter().filter(|x| x.grid_index == r.grid_index).collect();
        let mut g = serde_json::Map::new();
        g.insert("grid_index".into(), json!(r.grid_index));
        if let Some(n) = r.n {
            g.insert("n".into(), json!(n));
        }
        if let Some(d) = r.d {
            g.insert("d".into(), json!(d));
        }
        if let Some(a) = r.alpha {
            g.insert("alpha".into(), json!(a));
        } else if r.kind == "localization" {
            g.insert("control".into(), json!(true));
        }
        if let Some(b) = r.b {
            g.insert("b".into(), json!(b));
        }
        if let Some(depth) = r.depth {
            g.insert("l".into(), json!(depth));
        }
        if let Some(gamma) = r.gamma {
            g.insert("gamma".into(), json!(gamma));
        }
        if let Some(m) = r.m {
            g.insert("m".into(), json!(m));
        }
        if let Some(t) = r.threshold {
            g.insert("threshold".into(), json!(t));
        }
        let collect = |f: fn(&TrialRecord) -> Option<f64>| -> Vec<f64> {
            in_group.iter().filter_map(|x| f(x)).collect()
        };
        let ratios = collect(|x| x.ratio);
        if !ratios.is_empty() {
            g.insert("ratio".into(), stats_json(&ratios));
        }
        let lambdas = collect(|x| x.lambda);
        if !lambdas.is_empty() {
            g.insert("lambda".into(), stats_json(&lambdas));
        }
        let supports = collect(|x| x.min_support.map(|v| v as f64));
        if !supports.is_empty() {
            g.insert("min_support".into(), stats_json(&supports));
        }
        let values = collect(|x| x.value);
        if !values.is_empty() {
            g.insert("value".into(), stats_json(&values));
        }
        let max_edges = collect(|x| x.max_component_edges.map(|v| v as f64));
        if !max_edges.is_empty() {
            g.insert("max_component_edges".into(), stats_json(&max_edges));
        }
        let exceeded = in_group.iter().filter(|x| x.exceeded == Some(true)).count();
        if in_group.iter().any(|x| x.exceeded.is_some()) {
            g.insert("exceeded_count".into(), json!(exceeded));
            g.insert(
                "exceeded_fraction".into(),
                json!(exceeded as f64 / in_group.len() as f64),
            );
        }
        if let Some(p) = r.p_hat {
            g.insert("p_hat".into(), json!(p));
            g.insert("ci_low".into(), json!(r.ci_low));
            g.insert("ci_high".into(), json!(r.ci_high));
            g.insert("analytic_bound".into(), json!(r.bound));
        }
        groups.push(Value::Object(g));
    }

    let lemma_a2_violations =
        records.iter().filter(|r| r.lemma_a2_ok == Some(false)).count();
    let weyl_violations = records.iter().filter(|r| r.weyl_ok == Some(false)).count();
    let unconverged = records.iter().filter(|r| r.converged == Some(false)).count();
    let bound_violations = records
        .iter()
        .filter(|r| r.kind == "tailbound" && r.exceeded == Some(true))
        .count();

    // Variational: convergence-in-depth sequences per (d, gamma).
    let mut sequences: Vec<Value> = Vec::new();
    if config.kind == ExperimentKind::Variational {
        let mut keys = std::collections::BTreeSet::new();
        for r in records {
            keys.insert((r.d.unwrap_or(0), r.gamma.map(|g| g.to_bits()).unwrap_or(0)));
        }
        for (d, gbits) in keys {
            let gamma = f64::from_bits(gbits);
            let mut rows: Vec<(usize, f64)> = records
                .iter()
                .filter(|r| r.d == Some(d) && r.gamma.map(|g| g.to_bits()) == Some(gbits))
                .map(|r| (r.depth.unwrap_or(0), r.value.unwrap_or(f64::NAN)))
                .collect();
            rows.sort_by_key(|&(l, _)| l);
            sequences.push(json!({
                "d": d,
                "gamma": gamma,
                "depths": rows.iter().map(|&(l, _)| l).collect::<Vec<_>>(),
                "values": rows.iter().map(|&(_, v)| v).collect::<Vec<_>>(),
            }));
        }
    }

    let mut summary = json!({
        "schema_version": SCHEMA_VERSION,
        "kind": config.kind.as_str(),
        "config": serde_json::to_value(config)?,
        "rows": records.len(),
        "groups": groups,
        "checks": {
            "lemma_a2_violations": lemma_a2_violations,
            "weyl_violations": weyl_violations,
            "unconverged": unconverged,
            "tailbound_violations": bound_violations,
        },
    });
    if !sequences.is_empty() {
        summary["convergence_in_depth"] = Value::Array(sequences);
    }
    Ok(summary)
}
