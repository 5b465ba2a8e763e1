use std::collections::BTreeSet;

use proptest::prelude::*;

use meshwave_core::mesh::{compute_routes, surviving_routes, FailedSet};
use meshwave_core::scenario::{AreaTag, Link, Medium, Node, NodeKind, Topology};

const INF: u32 = u32::MAX;

fn build(n: usize, edges: &[(usize, usize)]) -> Topology {
    let nodes = (0..n).map(|i| Node { id: i as u32, kind: NodeKind::MeshRouter, area: AreaTag::Rural }).collect();
    let links = edges
        .iter()
        .filter(|(a, b)| a != b)
        .map(|&(a, b)| Link { a: a as u32, b: b as u32, medium: Medium::Wireless, capacity_mbps: 10.0, delay_ms: 1.0 })
        .collect();
    Topology { nodes, links }
}

/// Floyd–Warshall on the same edge list.
fn brute_force(n: usize, edges: &[(usize, usize)], skip: Option<(usize, usize)>) -> Vec<Vec<u32>> {
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(a, b) in edges {
        if a == b || skip == Some((a.min(b), a.max(b))) {
            continue;
        }
        d[a][b] = 1;
        d[b][a] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] != INF && d[k][j] != INF && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn arb_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..=12).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..30)))
}

proptest! {
    #[test]
    fn hop_counts_match_floyd_warshall((n, edges) in arb_graph()) {
        let s = compute_routes(&build(n, &edges), 0.05);
        let d = brute_force(n, &edges, None);
        let (mut sum, mut pairs) = (0u64, 0u64);
        for i in 0..n {
            for j in 0..n {
                let h = s.hops(i as u32, j as u32);
                if d[i][j] == INF {
                    prop_assert_eq!(h, None);
                } else {
                    prop_assert_eq!(h, Some(d[i][j]));
                    if i != j {
                        sum += u64::from(d[i][j]);
                        pairs += 1;
                    }
                    let p = s.path(i as u32, j as u32).unwrap();
                    prop_assert_eq!(p.len() as u32, d[i][j] + 1);
                }
            }
        }
        let mean = if pairs == 0 { 0.0 } else { sum as f64 / pairs as f64 };
        prop_assert!((s.d_mesh - mean).abs() < 1e-12);
    }

    #[test]
    fn removing_a_link_never_shortens_surviving_pairs((n, edges) in arb_graph(), pick in 0usize..30) {
        let real: Vec<(usize, usize)> = edges.iter().copied().filter(|(a, b)| a != b).collect();
        prop_assume!(!real.is_empty());
        let (a, b) = real[pick % real.len()];
        let key = (a.min(b), a.max(b));
        let topo = build(n, &edges);
        let before = compute_routes(&topo, 0.05);
        let failed = FailedSet { nodes: BTreeSet::new(), links: [(key.0 as u32, key.1 as u32)].into() };
        let after = surviving_routes(&before, &topo, &failed);
        let oracle = brute_force(n, &edges, Some(key));
        let (mut sb, mut sa, mut k) = (0u64, 0u64, 0u64);
        for i in 0..n as u32 {
            for j in 0..n as u32 {
                prop_assert_eq!(after.hops(i, j), (oracle[i as usize][j as usize] != INF).then(|| oracle[i as usize][j as usize]));
                if let (Some(x), Some(y)) = (before.hops(i, j), after.hops(i, j)) {
                    prop_assert!(y >= x);
                    if i != j {
                        sb += u64::from(x);
                        sa += u64::from(y);
                        k += 1;
                    }
                }
            }
        }
        if k > 0 {
            prop_assert!(sa as f64 / k as f64 >= sb as f64 / k as f64);
        }
    }
}
