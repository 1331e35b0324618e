#![allow(dead_code)]

pub mod recipes;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tgraph_core::{build_graph, EdgeEvent, NodeEvent, TemporalGraph, TimeGranularity, Timestamp};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub struct RandomGraph {
    pub edges: Vec<EdgeEvent>,
    pub nodes: Vec<NodeEvent>,
}

/// Random events with timestamps in `[t0, t0 + span)`, unsorted.
#[allow(clippy::too_many_arguments)]
pub fn random_events(
    rng: &mut ChaCha8Rng,
    num_edges: usize,
    num_node_events: usize,
    num_nodes: u32,
    t0: Timestamp,
    span: Timestamp,
    edge_dim: usize,
    node_dim: usize,
) -> RandomGraph {
    let edges = (0..num_edges)
        .map(|_| EdgeEvent {
            t: t0 + rng.random_range(0..span),
            src: rng.random_range(0..num_nodes),
            dst: rng.random_range(0..num_nodes),
            // small integers keep sums exact regardless of association
            feat: (0..edge_dim).map(|_| rng.random_range(-50..50) as f64 * 0.25).collect(),
        })
        .collect();
    let nodes = (0..num_node_events)
        .map(|_| NodeEvent {
            t: t0 + rng.random_range(0..span),
            node: rng.random_range(0..num_nodes),
            feat: (0..node_dim).map(|_| rng.random::<f64>()).collect(),
        })
        .collect();
    RandomGraph { edges, nodes }
}

pub fn random_graph(
    rng: &mut ChaCha8Rng,
    num_edges: usize,
    num_node_events: usize,
    num_nodes: u32,
    span: Timestamp,
    g: TimeGranularity,
) -> TemporalGraph {
    let r = random_events(rng, num_edges, num_node_events, num_nodes, 0, span, 2, 1);
    build_graph(&r.edges, &r.nodes, g, None).unwrap()
}

/// Edge stream in time order with random gaps (possibly zero).
pub fn random_stream(rng: &mut ChaCha8Rng, n: usize, num_nodes: u32) -> TemporalGraph {
    let mut t = 0;
    let edges: Vec<_> = (0..n)
        .map(|_| {
            t += rng.random_range(0..3);
            EdgeEvent::new(t, rng.random_range(0..num_nodes), rng.random_range(0..num_nodes))
        })
        .collect();
    build_graph(&edges, &[], TimeGranularity::Second, None).unwrap()
}
