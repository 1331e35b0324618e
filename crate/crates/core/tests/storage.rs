mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use rand::Rng;
use tgraph_core::{
    bucket_of, build_graph, graph_stats, EdgeEvent, TemporalGraph, TimeGranularity, Timestamp,
};

use common::{random_events, rng};

#[test]
fn sort_matches_reference_sort_of_time_and_input_index() {
    let mut r = rng(1);
    let ev = random_events(&mut r, 10_000, 0, 500, 0, 2_000, 1, 0).edges;
    // payload tags each event with its input position
    let tagged: Vec<EdgeEvent> = ev
        .iter()
        .enumerate()
        .map(|(i, e)| EdgeEvent::new(e.t, e.src, e.dst).with_feat(vec![i as f64]))
        .collect();
    let g = build_graph(&tagged, &[], TimeGranularity::Second, None).unwrap();

    let mut reference: Vec<(Timestamp, usize)> = ev.iter().enumerate().map(|(i, e)| (e.t, i)).collect();
    reference.sort();
    let stored: Vec<(Timestamp, usize)> = (0..g.num_edges())
        .map(|i| (g.edges().t[i], g.edges().feat[i] as usize))
        .collect();
    assert_eq!(stored, reference);
}

fn linear_lower_bound(t: &[Timestamp], q: Timestamp) -> usize {
    t.iter().position(|&x| x >= q).unwrap_or(t.len())
}

#[test]
fn lower_bound_matches_linear_scan() {
    let mut r = rng(2);
    for &n in &[0usize, 1, 17, 1_000, 100_000] {
        let ev = random_events(&mut r, n, 0, 100, 5, 50_000, 0, 0).edges;
        let g = build_graph(&ev, &[], TimeGranularity::Second, None).unwrap();
        let t = &g.edges().t;
        let mut queries: Vec<Timestamp> = t.iter().copied().collect::<HashSet<_>>().into_iter().collect();
        queries.extend([4, 0, 60_000]);
        if let (Some(lo), Some(hi)) = (g.t_min(), g.t_max()) {
            queries.extend([lo - 1, hi + 1]);
        }
        let step = (queries.len() / 2_000).max(1);
        for &q in queries.iter().step_by(step) {
            assert_eq!(g.lower_bound(q), linear_lower_bound(t, q), "n={n} q={q}");
        }
    }
}

#[test]
fn rebuilding_from_columns_is_identity() {
    let mut r = rng(3);
    let ev = random_events(&mut r, 3_000, 300, 80, 0, 500, 2, 3);
    let g = build_graph(&ev.edges, &ev.nodes, TimeGranularity::Minute, None).unwrap();
    let again = TemporalGraph::from_columns(
        g.edges().clone(),
        g.node_events().clone(),
        g.granularity(),
        None,
    )
    .unwrap();
    assert_eq!(again, g);
}

#[test]
fn bucket_of_matches_big_integer_division() {
    use num_bigint::BigInt;
    let mut r = rng(4);
    let gs = TimeGranularity::REAL_TIME;
    for _ in 0..1_000 {
        let a = r.random_range(0..gs.len());
        let b = r.random_range(a..gs.len());
        let (native, coarse) = (gs[a], gs[b]);
        let anchor: Timestamp = r.random_range(0..1_000_000_000);
        let t: Timestamp = anchor + r.random_range(0..4_000_000_000_000);
        let num = BigInt::from(t - anchor) * BigInt::from(native.seconds().unwrap());
        let expected = num / BigInt::from(coarse.seconds().unwrap());
        let got = bucket_of(t, anchor, native, coarse).unwrap();
        assert_eq!(BigInt::from(got), expected, "{native}->{coarse} t={t} anchor={anchor}");
    }
}

#[test]
fn stats_match_brute_force() {
    let mut r = rng(5);
    let ev = random_events(&mut r, 2_000, 100, 60, 0, 700, 0, 0);
    let g = build_graph(&ev.edges, &ev.nodes, TimeGranularity::Second, None).unwrap();
    let split: Timestamp = 450;
    let s = graph_stats(&g, Some(split)).unwrap();

    let nodes: HashSet<u32> = ev
        .edges
        .iter()
        .flat_map(|e| [e.src, e.dst])
        .chain(ev.nodes.iter().map(|n| n.node))
        .collect();
    let pairs: HashSet<(u32, u32)> = ev.edges.iter().map(|e| (e.src, e.dst)).collect();
    let steps: HashSet<Timestamp> = ev.edges.iter().map(|e| e.t).chain(ev.nodes.iter().map(|n| n.t)).collect();
    let before: HashSet<_> = ev.edges.iter().filter(|e| e.t < split).map(|e| (e.src, e.dst)).collect();
    let after: HashSet<_> = ev.edges.iter().filter(|e| e.t >= split).map(|e| (e.src, e.dst)).collect();
    let surprise = after.difference(&before).count() as f64 / after.len() as f64;

    assert_eq!(s.num_nodes, nodes.len());
    assert_eq!(s.num_edges, 2_000);
    assert_eq!(s.num_unique_edges, pairs.len());
    assert_eq!(s.num_unique_steps, steps.len());
    assert_eq!(s.surprise, Some(surprise));
    assert!(s.num_unique_edges <= s.num_edges);
    assert!(s.num_unique_steps <= s.num_edges + s.num_node_events);
}

proptest! {
    #[test]
    fn build_is_sorted_and_stable(ts in proptest::collection::vec(0i64..20, 0..200)) {
        let ev: Vec<_> = ts
            .iter()
            .enumerate()
            .map(|(i, &t)| EdgeEvent::new(t, i as u32, 0))
            .collect();
        let g = build_graph(&ev, &[], TimeGranularity::Second, None).unwrap();
        let e = g.edges();
        for i in 1..e.len() {
            prop_assert!(e.t[i - 1] <= e.t[i]);
            if e.t[i - 1] == e.t[i] {
                // src carries the input index
                prop_assert!(e.src[i - 1] < e.src[i]);
            }
        }
        for &t in e.t.iter() {
            let first = g.edge_index().first_row(t).unwrap();
            prop_assert_eq!(first, e.t.iter().position(|&x| x == t).unwrap());
        }
    }
}
