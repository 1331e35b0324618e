//! Temporal graph engine.
//!
//! One immutable, time-sorted event store serves both continuous-time
//! processing (fixed-size event batches) and discrete-time processing
//! (fixed-span snapshots, or an explicitly discretized graph). Batches are
//! enriched by typed hooks whose declared inputs and outputs are validated
//! into a dependency order before anything runs.

pub mod attrs;
pub mod discretize;
pub mod error;
pub mod eval;
pub mod granularity;
pub mod graph;
pub mod hooks;
pub mod io;
pub mod loader;
pub mod naive;
pub mod sampling;

pub use attrs::{Attr, AttrMap, Neighbor};
pub use discretize::{discretize, Discretized, ReductionOp, TimeOrigin};
pub use error::{Error, Result};
pub use eval::{
    edgebank_replay, growth_labels, mrr, ndcg_at_k, persistent_forecast, persistent_forecast_ndcg,
    sample_uniform_negatives, EdgeBank, ForecastSummary, LabelStream, NegativeSet, NodeUniverse,
    RankingSummary,
};
pub use granularity::{bucket_of, compare_granularity, TimeGranularity};
pub use graph::{
    build_graph, graph_stats, EdgeColumns, EdgeEvent, GraphStats, NodeEvent, NodeEventColumns,
    NodeId, StaticNodeFeatures, TemporalGraph, Timestamp,
};
pub use hooks::{validate_recipe, Hook, HookContract, HookHandle, HookManager, Recipe};
pub use io::{chronological_split, load_csv, load_labels, DatasetManifest, IdMap, Split, SplitSpec};
pub use loader::{
    iterate_by_events, iterate_by_time, materialize, slice_view, BatchSlice, BatchSpec, DataLoader,
    GraphView, MaterializedBatch,
};
pub use sampling::{HopLayer, RecencyBuffer, TemporalAdjacency};

/// Library version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
