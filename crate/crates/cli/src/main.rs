//! `wrg`: command-line surface over the weighted regular graph library.
//!
//! Subcommands: `gen`, `eigen`, `variational`, `decompose`, `tailbound`,
//! `experiment`. Exit codes: 0 success, 2 config/usage error, 3 runtime
//! error.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wrg_core::decomposition::{analyze, DecompositionParams};
use wrg_core::experiment::{run as run_experiment, ExperimentConfig};
use wrg_core::graph::RegularGraph;
use wrg_core::spectral::{lambda_max, LanczosOpts, SparseSym};
use wrg_core::variational::{solve_kdl, SolveMode, SolveOpts};
use wrg_core::weights::{
    format_f64, mc_sum_tail, weibull_sum_bound, TailBoundQuery, WeibullParams, WeightedNetwork,
};
use wrg_core::Error;

#[derive(Parser)]
#[command(name = "wrg", version, about = "Spectra of weighted random d-regular graphs")]
struct Cli {
    /// Worker threads for parallel trials (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Output path; two-artifact commands write `<out>.csv` and `<out>.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stream printed to stdout when --out is not given.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a uniform simple d-regular graph (optionally weighted).
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Attach Weibull weights with this shape and write the network format.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest eigenvalue of a weighted network.
    Eigen {
        /// Network file to read; otherwise a fresh instance is generated.
        #[arg(long, conflicts_with_all = ["n", "d", "alpha"])]
        input: Option<PathBuf>,
        #[arg(long, required_unless_present = "input")]
        n: Option<usize>,
        #[arg(long, required_unless_present = "input")]
        d: Option<usize>,
        #[arg(long, required_unless_present = "input")]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 5000)]
        max_iter: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tree variational values over a depth range.
    Variational {
        #[arg(long, default_value_t = 3)]
        d: usize,
        /// Exponents gamma >= 1/2 (comma separated).
        #[arg(long, value_delimiter = ',')]
        gamma: Vec<f64>,
        /// Weight shapes alpha > 2; each contributes gamma = beta/2.
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        l_max: usize,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Truncation decomposition and component statistics of one instance.
    Decompose {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        alpha: f64,
        /// Explicit truncation level on the |W|^alpha scale.
        #[arg(long, conflicts_with = "schedule")]
        b: Option<f64>,
        /// Use the size-driven truncation schedule instead of --b.
        #[arg(long)]
        schedule: bool,
        #[arg(long, default_value_t = 0.05)]
        kappa: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo check of the conditioned Weibull sum-tail bound.
    Tailbound {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        b: Vec<f64>,
        /// Thresholds L (comma separated), each exceeding m.
        #[arg(long, value_delimiter = ',', required = true)]
        l: Vec<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a canned experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Reduced,
    Auto,
}

impl From<ModeArg> for SolveMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => SolveMode::Full,
            ModeArg::Reduced => SolveMode::LevelReduced,
            ModeArg::Auto => SolveMode::Auto,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Config(_) | Error::Parse(_) | Error::InvalidParameters(_) | Error::Domain(_) => 2,
                _ => 3,
            };
            ExitCode::from(code)
        }
    }
}

fn emit_two(output: &OutputArgs, csv: &str, summary: &serde_json::Value) -> Result<(), Error> {
    match &output.out {
        Some(prefix) => {
            std::fs::write(prefix.with_extension("csv"), csv)?;
            std::fs::write(prefix.with_extension("json"), serde_json::to_string_pretty(summary)?)?;
        }
        None => match output.format {
            Format::Csv => print!("{csv}"),
            Format::Json => println!("{}", serde_json::to_string_pretty(summary)?),
        },
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Gen { n, d, seed, alpha, out } => {
            let graph = RegularGraph::generate(n, d, seed)?;
            let mut buf = Vec::new();
            match alpha {
                Some(alpha) => {
                    let net = WeightedNetwork::weigh(graph, WeibullParams::new(alpha)?, seed);
                    net.write_to(&mut buf)?;
                }
                None => graph.write_to(&mut buf)?,
            }
            let text = String::from_utf8(buf).expect("ascii output");
            match &out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Eigen { input, n, d, alpha, seed, tol, max_iter, output } => {
            let net = match input {
                Some(path) => WeightedNetwork::load(&path)?,
                None => {
                    let graph = RegularGraph::generate(n.unwrap(), d.unwrap(), seed)?;
                    WeightedNetwork::weigh(graph, WeibullParams::new(alpha.unwrap())?, seed)
                }
            };
            let m = SparseSym::from_network(&net, None);
            let pair = lambda_max(&m, LanczosOpts { tol, max_iter, ..LanczosOpts::default() })?;
            let max_w = net.max_abs_weight();
            let n = net.graph.n();
            let alpha = net.params.alpha;
            let ratio = pair.lambda / (n as f64).ln().powf(1.0 / alpha);
            let summary = serde_json::json!({
                "n": n,
                "d": net.graph.d(),
                "alpha": alpha,
                "seed": net.seed,
                "lambda": pair.lambda,
                "residual": pair.residual,
                "iterations": pair.iterations,
                "converged": pair.converged,
                "max_abs_weight": max_w,
                "ratio": ratio,
                "lemma_a2_ok": pair.lambda >= max_w - pair.residual,
            });
            let mut csv = String::from(
                "n,d,alpha,seed,lambda,residual,iterations,converged,max_abs_weight,ratio\n",
            );
            writeln!(
                csv,
                "{n},{},{},{},{},{},{},{},{},{}",
                net.graph.d(),
                format_f64(alpha),
                net.seed,
                format_f64(pair.lambda),
                format_f64(pair.residual),
                pair.iterations,
                pair.converged,
                format_f64(max_w),
                format_f64(ratio)
            )
            .unwrap();
            emit_two(&output, &csv, &summary)
        }
        Command::Variational { d, gamma, alpha, l_max, mode, tol, seed, output } => {
            if gamma.is_empty() && alpha.is_empty() {
                return Err(Error::Config("gamma: provide --gamma or --alpha values".into()));
            }
            let mut rows = String::from("d,l,gamma,alpha,value,converged,restarts\n");
            let mut sequences = Vec::new();
            let mut jobs: Vec<(f64, Option<f64>)> = gamma.iter().map(|&g| (g, None)).collect();
            for &a in &alpha {
                if !(a > 2.0) {
                    return Err(Error::Config(format!(
                        "alpha: variational shapes must exceed 2, got {a}"
                    )));
                }
                jobs.push((a / (a - 1.0) / 2.0, Some(a)));
            }
            for (gamma, alpha) in jobs {
                let mut values = Vec::new();
                for depth in 1..=l_max {
                    let opts = SolveOpts { tol, seed, mode: mode.into(), ..SolveOpts::default() };
                    let sol = solve_kdl(d, depth, gamma, opts)?;
                    writeln!(
                        rows,
                        "{d},{depth},{},{},{},{},{}",
                        format_f64(gamma),
                        alpha.map(format_f64).unwrap_or_default(),
                        format_f64(sol.value),
                        sol.converged,
                        sol.restarts_used
                    )
                    .unwrap();
                    values.push(sol.value);
                }
                sequences.push(serde_json::json!({
                    "d": d,
                    "gamma": gamma,
                    "alpha": alpha,
                    "values": values,
                    "best": values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                }));
            }
            let summary = serde_json::json!({
                "d": d,
                "l_max": l_max,
                "convergence_in_depth": sequences,
            });
            emit_two(&output, &rows, &summary)
        }
        Command::Decompose { n, d, alpha, b, schedule, kappa, eps, seed, output } => {
            let params = match (b, schedule) {
                (Some(b), false) => DecompositionParams::explicit(alpha, b)?,
                (None, true) => DecompositionParams::scheduled(alpha, n, kappa)?,
                (None, false) => return Err(Error::Config("b: provide --b or --schedule".into())),
                (Some(_), true) => unreachable!("clap conflicts_with"),
            };
            let graph = RegularGraph::generate(n, d, seed)?;
            let net = WeightedNetwork::weigh(graph, WeibullParams::new(alpha)?, seed);
            let analysis = analyze(&net, params, eps, LanczosOpts::default())?;
            let mut csv =
                String::from("component,vertices,edges,excess,s_norm,x_mass,f_holder,m_top\n");
            for s in &analysis.stats {
                writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{}",
                    s.component,
                    s.vertex_count,
                    s.edge_count,
                    s.excess,
                    format_f64(s.s_norm),
                    format_f64(s.x_mass),
                    s.f_holder.map(format_f64).unwrap_or_default(),
                    format_f64(s.m_top)
                )
                .unwrap();
            }
            let dec = &analysis.decomposition;
            let summary = serde_json::json!({
                "n": n, "d": d, "alpha": alpha, "seed": seed,
                "b": params.b,
                "magnitude_threshold": params.magnitude_threshold(),
                "lambda": analysis.lambda,
                "residual": analysis.residual,
                "lambda_tree_part": analysis.lambda_tree,
                "norm_excess_part": analysis.norm_excess,
                "norm_small_part": analysis.norm_small,
                "weyl_ok": analysis.weyl_ok,
                "small_part_bounded": analysis.small_part_bounded,
                "kept_edges": dec.kept.iter().filter(|&&k| k).count(),
                "excess_edges": dec.excess_mask.iter().filter(|&&k| k).count(),
                "components": dec.components.len(),
                "isolated_vertices": dec.isolated_vertex_count,
                "isolated_mass": analysis.isolated_mass,
                "min_support": analysis.report.min_support_size,
                "top_edge_mass": analysis.report.top_edge_mass,
                "disjoint_edges": analysis.report.disjoint_edges.len(),
                "eps": eps,
            });
            emit_two(&output, &csv, &summary)
        }
        Command::Tailbound { alpha, m, b, l, trials, seed, output } => {
            let mut csv = String::from("m,b,l,p_hat,ci_low,ci_high,bound,within_bound\n");
            let mut worst: f64 = f64::INFINITY;
            let mut all_within = true;
            for (i, &m_val) in m.iter().enumerate() {
                for (j, &b_val) in b.iter().enumerate() {
                    for (k, &l_val) in l.iter().enumerate() {
                        let stream =
                            wrg_core::rng::derive_seed(seed, &[i as u64, j as u64, k as u64]);
                        let est = mc_sum_tail(alpha, m_val, l_val, b_val, trials, stream)?;
                        let bound = weibull_sum_bound(TailBoundQuery {
                            m: m_val,
                            l: l_val,
                            b: b_val,
                            c: 1.0,
                        })?;
                        let within = est.ci_high <= bound.min(1.0) + 1e-12;
                        all_within &= within;
                        worst = worst.min(bound.min(1.0) - est.ci_high);
                        writeln!(
                            csv,
                            "{m_val},{},{},{},{},{},{},{within}",
                            format_f64(b_val),
                            format_f64(l_val),
                            format_f64(est.p_hat),
                            format_f64(est.ci_low),
                            format_f64(est.ci_high),
                            format_f64(bound)
                        )
                        .unwrap();
                    }
                }
            }
            let summary = serde_json::json!({
                "alpha": alpha,
                "trials": trials,
                "all_within_bound": all_within,
                "min_margin": worst,
            });
            emit_two(&output, &csv, &summary)
        }
        Command::Experiment { config, output } => {
            let text = std::fs::read_to_string(&config)?;
            let parsed = ExperimentConfig::from_json(&text)?;
            let violations = parsed.validate();
            if !violations.is_empty() {
                return Err(Error::Config(violations.join("; ")));
            }
            let artifacts = run_experiment(&parsed)?;
            // run() already wrote any config-specified paths; mirror to
            // --out / stdout as requested.
            if output.out.is_some() || parsed.out_csv.is_none() {
                emit_two(&output, &artifacts.csv, &artifacts.summary)?;
            }
            Ok(())
        }
    }
}
