//! Property tests against independent oracles.

use proptest::prelude::*;
use wrg_core::graph::RegularGraph;
use wrg_core::rng::SplitMix64;
use wrg_core::variational::project_simplex;

/// Independent DFS component labeling over a masked edge list.
fn dfs_components(n: usize, edges: &[(u32, u32)], mask: &[bool]) -> Vec<Vec<u32>> {
    let mut adj = vec![Vec::new(); n];
    for (id, &(u, v)) in edges.iter().enumerate() {
        if mask[id] {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start as u32];
        seen[start] = true;
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &w in &adj[v as usize] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out.sort();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn components_agree_with_dfs_oracle(
        n in 4usize..13,
        d in 1usize..4,
        seed in any::<u64>(),
        mask_seed in any::<u64>(),
    ) {
        prop_assume!(n * d % 2 == 0 && n > d);
        let g = RegularGraph::generate(n, d, seed).unwrap();
        let mut rng = SplitMix64::new(mask_seed);
        let mask: Vec<bool> = (0..g.edge_count()).map(|_| rng.next_bool()).collect();
        let comps = g.components(&mask).unwrap();
        let mut got: Vec<Vec<u32>> = comps.vertices;
        got.sort();
        let expect = dfs_components(n, g.edges(), &mask);
        prop_assert_eq!(got, expect);
        // Edge lists stay inside their component and cover the mask.
        let masked_total = mask.iter().filter(|&&m| m).count();
        let listed_total: usize = comps.edge_ids.iter().map(|e| e.len()).sum();
        prop_assert_eq!(masked_total, listed_total);
    }

    #[test]
    fn simplex_projection_is_feasible_and_optimal(
        v in prop::collection::vec(-5.0f64..5.0, 1..40),
        probe_seed in any::<u64>(),
    ) {
        let p = project_simplex(&v);
        let sum: f64 = p.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        // No random simplex point is closer to v than the projection.
        let dist = |a: &[f64]| -> f64 {
            a.iter().zip(&v).map(|(x, y)| (x - y) * (x - y)).sum()
        };
        let base = dist(&p);
        let mut rng = SplitMix64::new(probe_seed);
        for _ in 0..20 {
            let mut q: Vec<f64> = (0..v.len()).map(|_| rng.next_exp()).collect();
            let s: f64 = q.iter().sum();
            for x in &mut q {
                *x /= s;
            }
            prop_assert!(dist(&q) >= base - 1e-9);
        }
    }

    #[test]
    fn ball_reports_are_monotone(
        n in 6usize..40,
        seed in any::<u64>(),
        v in 0usize..6,
    ) {
        prop_assume!(n % 2 == 0);
        let g = RegularGraph::generate(n, 3, seed).unwrap();
        let mut prev = g.ball(v, 0).unwrap().0;
        for radius in 1..5 {
            let (cur, sub) = g.ball(v, radius).unwrap();
            prop_assert!(cur.vertex_count >= prev.vertex_count);
            prop_assert!(cur.edge_count >= prev.edge_count);
            prop_assert!(cur.excess >= prev.excess);
            prop_assert_eq!(cur.contains_cycle, cur.excess >= 1);
            prop_assert_eq!(cur.vertex_count, sub.vertices.len());
            prev = cur;
        }
    }
}
