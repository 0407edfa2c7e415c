use std::collections::BTreeSet;

use feynlab::graph::{aut_order, canonical_key, enumerate_by_adjacency, enumerate_graphs, EnumerateOptions, Graph, GraphClass};
use proptest::prelude::*;

fn double_factorial(n: u64) -> u64 {
    (1..=n).rev().step_by(2).product::<u64>().max(1)
}

fn factorial(n: u64) -> u64 {
    (1..=n).product::<u64>().max(1)
}

/// Σ_classes |G|/|Aut| over all classes on a fixed degree multiset equals the number of
/// perfect matchings, where G permutes half-edges within vertices and equal-degree vertices.
#[test]
fn orbit_stabilizer_counts() {
    for degrees in [vec![3, 3], vec![4], vec![3, 3, 4], vec![4, 4], vec![3, 3, 3, 3], vec![2, 4]] {
        let h: usize = degrees.iter().sum();
        let v = degrees.len();
        let distinct: BTreeSet<usize> = degrees.iter().copied().collect();
        let excess = (h / 2) as i64 - v as i64;
        let opts = EnumerateOptions::new(excess, &distinct.iter().copied().collect::<Vec<_>>()).vertex_limit(v);
        let classes: Vec<GraphClass> = enumerate_graphs(&opts)
            .unwrap()
            .into_iter()
            .filter(|c| {
                let mut d: Vec<usize> = (0..c.representative.vertices().len()).map(|k| c.representative.degree(k)).collect();
                d.sort_unstable();
                let mut want = degrees.clone();
                want.sort_unstable();
                d == want
            })
            .collect();
        let mut group = degrees.iter().map(|&d| factorial(d as u64)).product::<u64>();
        for d in &distinct {
            group *= factorial(degrees.iter().filter(|x| *x == d).count() as u64);
        }
        let total: u64 = classes.iter().map(|c| group / c.aut_order).sum();
        assert_eq!(total, double_factorial(h as u64 - 1), "degrees {degrees:?}");
        for c in &classes {
            assert_eq!(factorial(h as u64) % c.aut_order, 0);
        }
    }
}

#[test]
fn census_through_excess_two() {
    let opts = EnumerateOptions::new(2, &[3]).tadpoles(false);
    let a: BTreeSet<Vec<u8>> = enumerate_graphs(&opts).unwrap().into_iter().map(|c| c.canonical_key).collect();
    let b: BTreeSet<Vec<u8>> = enumerate_by_adjacency(&opts).unwrap().into_iter().map(|c| c.canonical_key).collect();
    assert_eq!(a, b);
    assert!(a.contains(&canonical_key(&Graph::theta()).unwrap()));
}

#[test]
fn loop_count_is_excess_plus_components() {
    let classes = enumerate_graphs(&EnumerateOptions::new(2, &[3, 4])).unwrap();
    assert!(!classes.is_empty());
    for c in classes {
        assert_eq!(c.loop_count, c.excess + c.representative.components() as i64);
    }
}

#[test]
fn graph_json_is_order_insensitive() {
    let a: Graph = serde_json::from_str(r#"{"half_edges":6,"vertices":[[3,4,5],[0,1,2]],"leaves":[],"edges":[[1,4],[3,0],[2,5]]}"#).unwrap();
    let b: Graph = serde_json::from_str(r#"{"half_edges":6,"vertices":[[0,1,2],[3,4,5]],"leaves":[],"edges":[[0,3],[1,4],[2,5]]}"#).unwrap();
    assert_eq!(a, b);
    let back: Graph = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
    assert_eq!(back, a);
}

fn arb_graph() -> impl Strategy<Value = (Graph, Vec<usize>)> {
    // two or three vertices of valence 3 or 4, a random matching and a random relabeling
    (prop::collection::vec(3usize..=4, 2..=3), any::<u64>(), any::<u64>()).prop_filter_map("odd", |(degs, ms, ps)| {
        let h: usize = degs.iter().sum();
        if h % 2 != 0 {
            return None;
        }
        let mut blocks = Vec::new();
        let mut next = 0;
        for d in &degs {
            blocks.push((next..next + d).collect::<Vec<_>>());
            next += d;
        }
        let mut rest: Vec<usize> = (0..h).collect();
        let mut seed = ms;
        let mut edges = Vec::new();
        while !rest.is_empty() {
            let a = rest.remove(0);
            let k = (seed % rest.len() as u64) as usize;
            seed = seed / rest.len() as u64 + 7;
            edges.push((a, rest.remove(k)));
        }
        let mut perm: Vec<usize> = (0..h).collect();
        let mut s = ps;
        for i in (1..h).rev() {
            let j = (s % (i as u64 + 1)) as usize;
            s = s / (i as u64 + 1) + 13;
            perm.swap(i, j);
        }
        Some((Graph::new(h, blocks, vec![], edges, None).unwrap(), perm))
    })
}

proptest! {
    #[test]
    fn relabeling_preserves_key_and_aut((g, perm) in arb_graph()) {
        let r = g.relabel(&perm);
        prop_assert_eq!(canonical_key(&g).unwrap(), canonical_key(&r).unwrap());
        prop_assert_eq!(aut_order(&g).unwrap(), aut_order(&r).unwrap());
    }
}
