//! Synthetic workloads shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tgraph_core::{build_graph, EdgeEvent, TemporalGraph, TimeGranularity};

/// Uniformly random edges over `span` seconds, one feature per edge.
pub fn random_graph(num_edges: usize, num_nodes: u32, span: i64, seed: u64) -> TemporalGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<_> = (0..num_edges)
        .map(|_| {
            EdgeEvent::new(
                rng.random_range(0..span),
                rng.random_range(0..num_nodes),
                rng.random_range(0..num_nodes),
            )
            .with_feat(vec![rng.random()])
        })
        .collect();
    build_graph(&edges, &[], TimeGranularity::Second, None).expect("valid synthetic graph")
}

/// A LastFM-sized stream: 1.29M edges among ~2k nodes over four years.
pub fn lastfm_scale() -> TemporalGraph {
    random_graph(1_293_103, 1_980, 4 * 365 * 86_400, 7)
}
