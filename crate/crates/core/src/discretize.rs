//! Discretization of a temporal graph onto a coarser time grid.
//!
//! Events are bucketed by `floor((t - t_min) / ticks(coarse, native))`.
//! Edge events sharing `(bucket, src, dst)` and node events sharing
//! `(bucket, node)` collapse to one representative whose feature is the
//! reduction of the class features in time order. Output timestamps are
//! bucket indices; [`TimeOrigin`] maps them back to native time.
//!
//! The input is already time-sorted, so every bucket is a contiguous run of
//! rows. Each run is grouped with one sort of packed pair keys instead of a
//! hash map.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{pair_key, EdgeColumns, NodeEventColumns, TemporalGraph, Timestamp};
use crate::granularity::{TickRatio, TimeGranularity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ReductionOp {
    First,
    #[default]
    Last,
    Sum,
    Mean,
    Max,
    Count,
}

impl ReductionOp {
    pub const ALL: [ReductionOp; 6] = [
        ReductionOp::First,
        ReductionOp::Last,
        ReductionOp::Sum,
        ReductionOp::Mean,
        ReductionOp::Max,
        ReductionOp::Count,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReductionOp::First => "first",
            ReductionOp::Last => "last",
            ReductionOp::Sum => "sum",
            ReductionOp::Mean => "mean",
            ReductionOp::Max => "max",
            ReductionOp::Count => "count",
        }
    }

    /// Whether the reduction reads feature values.
    pub fn needs_features(self) -> bool {
        matches!(self, ReductionOp::Sum | ReductionOp::Mean | ReductionOp::Max)
    }

    /// Output feature width for an input width.
    pub fn output_dim(self, input_dim: usize) -> usize {
        match self {
            ReductionOp::Count => 1,
            _ => input_dim,
        }
    }

    /// Reduces `rows` (in time order) into `out`. `rows` is non-empty.
    pub fn reduce<'a, I>(self, dim: usize, mut rows: I, count: usize, out: &mut Vec<f64>)
    where
        I: Iterator<Item = &'a [f64]>,
    {
        match self {
            ReductionOp::Count => out.push(count as f64),
            ReductionOp::First => out.extend_from_slice(rows.next().unwrap_or(&[])),
            ReductionOp::Last => out.extend_from_slice(rows.last().unwrap_or(&[])),
            ReductionOp::Sum | ReductionOp::Mean => {
                let start = out.len();
                out.resize(start + dim, 0.0);
                for row in rows {
                    for (acc, v) in out[start..].iter_mut().zip(row) {
                        *acc += v;
                    }
                }
                if self == ReductionOp::Mean {
                    for acc in &mut out[start..] {
                        *acc /= count as f64;
                    }
                }
            }
            ReductionOp::Max => {
                let start = out.len();
                out.resize(start + dim, f64::NEG_INFINITY);
                for row in rows {
                    for (acc, &v) in out[start..].iter_mut().zip(row) {
                        *acc = acc.max(v);
                    }
                }
            }
        }
    }
}

impl fmt::Display for ReductionOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReductionOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReductionOp::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Validation(format!("unknown reduction `{s}`")))
    }
}

/// Maps bucket indices of a discretized graph back to the source time axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeOrigin {
    /// Source timestamp of bucket 0 (the source graph's `t_min`).
    pub anchor: Timestamp,
    /// Granularity of the source graph.
    pub source: TimeGranularity,
    pub coarse: TimeGranularity,
}

impl TimeOrigin {
    /// First source timestamp falling into bucket `k`.
    pub fn bucket_start(&self, k: u64) -> Timestamp {
        let ratio = TickRatio::new(self.source, self.coarse).expect("validated on construction");
        self.anchor + ratio.bucket_start(k) as Timestamp
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discretized {
    pub graph: TemporalGraph,
    /// `None` for an empty input graph.
    pub origin: Option<TimeOrigin>,
}

impl Discretized {
    /// Number of buckets spanned from bucket 0 to the last occupied one.
    pub fn num_buckets(&self) -> usize {
        self.graph.t_max().map_or(0, |k| k as usize + 1)
    }
}

/// Discretizes `graph` to `coarse`, reducing each equivalence class with `reduce`.
pub fn discretize(
    graph: &TemporalGraph,
    coarse: TimeGranularity,
    reduce: ReductionOp,
) -> Result<Discretized> {
    let native = graph.granularity();
    let ratio = TickRatio::new(native, coarse)?;

    let edges = graph.edges();
    let nodes = graph.node_events();
    if reduce.needs_features() {
        if !edges.is_empty() && edges.feat_dim == 0 {
            return Err(Error::ReductionRequiresFeatures(reduce.as_str(), "edge"));
        }
        if !nodes.is_empty() && nodes.feat_dim == 0 {
            return Err(Error::ReductionRequiresFeatures(reduce.as_str(), "node"));
        }
    }

    let Some(anchor) = graph.t_min() else {
        let empty = TemporalGraph::from_columns(
            EdgeColumns::with_dim(reduce.output_dim(edges.feat_dim)),
            NodeEventColumns::with_dim(reduce.output_dim(nodes.feat_dim)),
            coarse,
            graph.static_feats().cloned(),
        )?;
        return Ok(Discretized {
            graph: empty,
            origin: None,
        });
    };

    let out_edges = reduce_edges(edges, anchor, ratio, reduce);
    let out_nodes = reduce_nodes(nodes, anchor, ratio, reduce);
    let out = TemporalGraph::from_columns(out_edges, out_nodes, coarse, graph.static_feats().cloned())?;
    Ok(Discretized {
        graph: out,
        origin: Some(TimeOrigin {
            anchor,
            source: native,
            coarse,
        }),
    })
}

/// Yields `(bucket, start_row, end_row)` for each run of rows sharing a bucket.
fn bucket_runs(
    t: &[Timestamp],
    anchor: Timestamp,
    ratio: TickRatio,
) -> impl Iterator<Item = (u64, usize, usize)> + '_ {
    let mut start = 0;
    std::iter::from_fn(move || {
        if start >= t.len() {
            return None;
        }
        let k = ratio.bucket((t[start] - anchor) as u64);
        // rows are time-sorted: the run ends at the first timestamp of bucket k + 1
        let next_t = anchor + ratio.bucket_start(k + 1) as Timestamp;
        let end = start + t[start..].partition_point(|&x| x < next_t);
        let run = (k, start, end);
        start = end;
        Some(run)
    })
}

fn reduce_edges(
    edges: &EdgeColumns,
    anchor: Timestamp,
    ratio: TickRatio,
    reduce: ReductionOp,
) -> EdgeColumns {
    let dim = edges.feat_dim;
    let out_dim = reduce.output_dim(dim);
    let mut out = EdgeColumns::with_dim(out_dim);
    // sparse streams keep most events distinct; size for the worst case
    out.t.reserve(edges.len());
    out.src.reserve(edges.len());
    out.dst.reserve(edges.len());
    out.feat.reserve(edges.len() * out_dim);
    let mut keys: Vec<(u64, u32)> = Vec::new();
    for (k, a, b) in bucket_runs(&edges.t, anchor, ratio) {
        keys.clear();
        keys.extend((a..b).map(|i| (pair_key(edges.src[i], edges.dst[i]), i as u32)));
        // (key, row) pairs are unique, so an unstable sort keeps time order within a key
        keys.sort_unstable();
        for group in keys.chunk_by(|x, y| x.0 == y.0) {
            let first = group[0].1 as usize;
            out.t.push(k as Timestamp);
            out.src.push(edges.src[first]);
            out.dst.push(edges.dst[first]);
            let rows = group.iter().map(|&(_, i)| edges.feat_row(i as usize));
            reduce.reduce(dim, rows, group.len(), &mut out.feat);
        }
    }
    out
}

fn reduce_nodes(
    nodes: &NodeEventColumns,
    anchor: Timestamp,
    ratio: TickRatio,
    reduce: ReductionOp,
) -> NodeEventColumns {
    let dim = nodes.feat_dim;
    let mut out = NodeEventColumns::with_dim(reduce.output_dim(dim));
    let mut keys: Vec<(u32, u32)> = Vec::new();
    for (k, a, b) in bucket_runs(&nodes.t, anchor, ratio) {
        keys.clear();
        keys.extend((a..b).map(|i| (nodes.node[i], i as u32)));
        keys.sort_unstable();
        for group in keys.chunk_by(|x, y| x.0 == y.0) {
            out.t.push(k as Timestamp);
            out.node.push(group[0].0);
            let rows = group.iter().map(|&(_, i)| nodes.feat_row(i as usize));
            reduce.reduce(dim, rows, group.len(), &mut out.feat);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, graph_stats, EdgeEvent, NodeEvent};
    use TimeGranularity::*;

    const H: i64 = 3600;

    #[test]
    fn hourly_to_daily_count() {
        let ev = vec![
            EdgeEvent::new(H, 0, 1),
            EdgeEvent::new(5 * H, 0, 1),
            EdgeEvent::new(30 * H, 0, 2),
        ];
        // native Second; anchored at the first event (1h)
        let graph = build_graph(&ev, &[], Second, None).unwrap();
        let d = discretize(&graph, Day, ReductionOp::Count).unwrap();
        let e = d.graph.edges();
        assert_eq!(e.t, vec![0, 1]);
        assert_eq!(e.src, vec![0, 0]);
        assert_eq!(e.dst, vec![1, 2]);
        assert_eq!(e.feat, vec![2.0, 1.0]);
        assert_eq!(d.graph.granularity(), Day);
        assert_eq!(d.num_buckets(), 2);
        assert_eq!(d.origin.unwrap().bucket_start(1), H + 86_400);
    }

    #[test]
    fn reductions_over_class() {
        let ev = vec![
            EdgeEvent::new(0, 0, 1).with_feat(vec![1.0, 5.0]),
            EdgeEvent::new(10, 0, 1).with_feat(vec![3.0, -1.0]),
            EdgeEvent::new(20, 0, 1).with_feat(vec![2.0, 2.0]),
        ];
        let graph = build_graph(&ev, &[], Second, None).unwrap();
        let feat = |r| discretize(&graph, Minute, r).unwrap().graph.edges().feat.clone();
        assert_eq!(feat(ReductionOp::First), vec![1.0, 5.0]);
        assert_eq!(feat(ReductionOp::Last), vec![2.0, 2.0]);
        assert_eq!(feat(ReductionOp::Sum), vec![6.0, 6.0]);
        assert_eq!(feat(ReductionOp::Mean), vec![2.0, 2.0]);
        assert_eq!(feat(ReductionOp::Max), vec![3.0, 5.0]);
        assert_eq!(feat(ReductionOp::Count), vec![3.0]);
    }

    #[test]
    fn intra_bucket_order_is_src_dst() {
        let ev = vec![
            EdgeEvent::new(0, 3, 1),
            EdgeEvent::new(1, 0, 9),
            EdgeEvent::new(2, 0, 2),
            EdgeEvent::new(61, 1, 1),
        ];
        let graph = build_graph(&ev, &[], Second, None).unwrap();
        let d = discretize(&graph, Minute, ReductionOp::Last).unwrap();
        let e = d.graph.edges();
        assert_eq!(e.t, vec![0, 0, 0, 1]);
        assert_eq!(e.src, vec![0, 0, 3, 1]);
        assert_eq!(e.dst, vec![2, 9, 1, 1]);
    }

    #[test]
    fn identity_discretization() {
        let ev = vec![
            EdgeEvent::new(7, 1, 2).with_feat(vec![0.5]),
            EdgeEvent::new(9, 0, 2).with_feat(vec![1.5]),
            EdgeEvent::new(12, 2, 0).with_feat(vec![2.5]),
        ];
        let graph = build_graph(&ev, &[], Hour, None).unwrap();
        for r in [ReductionOp::First, ReductionOp::Last] {
            let d = discretize(&graph, Hour, r).unwrap();
            let e = d.graph.edges();
            assert_eq!(e.t, vec![0, 2, 5]);
            assert_eq!(e.src, graph.edges().src);
            assert_eq!(e.dst, graph.edges().dst);
            assert_eq!(e.feat, graph.edges().feat);
        }
    }

    #[test]
    fn errors() {
        let ev = vec![EdgeEvent::new(0, 0, 1)];
        let ordered = build_graph(&ev, &[], EventOrdered, None).unwrap();
        assert!(matches!(
            discretize(&ordered, Day, ReductionOp::Last),
            Err(Error::ExcludedGranularity(EventOrdered))
        ));
        let daily = build_graph(&ev, &[], Day, None).unwrap();
        assert!(matches!(
            discretize(&daily, Hour, ReductionOp::Last),
            Err(Error::GranularityOrder { .. })
        ));
        assert!(discretize(&daily, EventOrdered, ReductionOp::Last).is_err());
        for r in [ReductionOp::Sum, ReductionOp::Mean, ReductionOp::Max] {
            assert!(matches!(
                discretize(&daily, Week, r),
                Err(Error::ReductionRequiresFeatures(..))
            ));
        }
        for r in [ReductionOp::First, ReductionOp::Last, ReductionOp::Count] {
            assert!(discretize(&daily, Week, r).is_ok());
        }
    }

    #[test]
    fn node_events_grouped_by_bucket_and_node() {
        let nodes = vec![
            NodeEvent { t: 0, node: 2, feat: vec![1.0] },
            NodeEvent { t: 30, node: 1, feat: vec![2.0] },
            NodeEvent { t: 40, node: 2, feat: vec![4.0] },
            NodeEvent { t: 70, node: 2, feat: vec![8.0] },
        ];
        let graph = build_graph(&[], &nodes, Second, None).unwrap();
        let d = discretize(&graph, Minute, ReductionOp::Sum).unwrap();
        let n = d.graph.node_events();
        assert_eq!(n.t, vec![0, 0, 1]);
        assert_eq!(n.node, vec![1, 2, 2]);
        assert_eq!(n.feat, vec![2.0, 5.0, 8.0]);
    }

    #[test]
    fn empty_graph() {
        let graph = build_graph(&[], &[], Second, None).unwrap();
        let d = discretize(&graph, Day, ReductionOp::Count).unwrap();
        assert_eq!(d.graph.num_edges(), 0);
        assert_eq!(d.origin, None);
        assert_eq!(d.num_buckets(), 0);
    }

    #[test]
    fn idempotent_and_monotone() {
        let ev: Vec<_> = (0..500)
            .map(|i| EdgeEvent::new(i * 977 % 200_000, (i % 7) as u32, (i % 5) as u32))
            .collect();
        let graph = build_graph(&ev, &[], Second, None).unwrap();
        let once = discretize(&graph, Hour, ReductionOp::Last).unwrap().graph;
        let twice = discretize(&once, Hour, ReductionOp::Last).unwrap().graph;
        assert_eq!(once.edges(), twice.edges());

        let mut prev = usize::MAX;
        for g in [Second, Minute, Hour, Day, Week, Month, Year] {
            let d = discretize(&graph, g, ReductionOp::Count).unwrap().graph;
            let steps = graph_stats(&d, None).unwrap().num_unique_steps;
            assert!(steps <= prev, "{g}: {steps} > {prev}");
            prev = steps;
            let total: f64 = d.edges().feat.iter().sum();
            assert_eq!(total as usize, graph.num_edges());
        }
    }
}
