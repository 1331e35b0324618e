//! Immutable, time-sorted columnar event storage.
//!
//! Edge events and node events live in two sets of parallel columns, each
//! sorted by timestamp with input order kept among equal timestamps. A cached
//! index of distinct timestamps backs the binary searches that every view
//! and batch boundary goes through.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::granularity::TimeGranularity;

/// Integral time tick in the graph's native granularity.
pub type Timestamp = i64;
/// Dense node identifier.
pub type NodeId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeEvent {
    pub t: Timestamp,
    pub src: NodeId,
    pub dst: NodeId,
    pub feat: Vec<f64>,
}

impl EdgeEvent {
    pub fn new(t: Timestamp, src: NodeId, dst: NodeId) -> Self {
        EdgeEvent {
            t,
            src,
            dst,
            feat: Vec::new(),
        }
    }

    pub fn with_feat(mut self, feat: Vec<f64>) -> Self {
        self.feat = feat;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeEvent {
    pub t: Timestamp,
    pub node: NodeId,
    pub feat: Vec<f64>,
}

/// Row-major `n x dim` matrix of per-node features, row `i` belongs to node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticNodeFeatures {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl StaticNodeFeatures {
    pub fn new(rows: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * dim {
            return Err(Error::Validation(format!(
                "static features: {} values do not fill a {rows}x{dim} matrix",
                data.len()
            )));
        }
        Ok(StaticNodeFeatures { rows, dim, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, node: NodeId) -> &[f64] {
        let i = node as usize * self.dim;
        &self.data[i..i + self.dim]
    }
}

/// Parallel edge columns. `feat` is row-major with `feat_dim` values per edge.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdgeColumns {
    pub t: Vec<Timestamp>,
    pub src: Vec<NodeId>,
    pub dst: Vec<NodeId>,
    pub feat: Vec<f64>,
    pub feat_dim: usize,
}

impl EdgeColumns {
    pub fn with_dim(feat_dim: usize) -> Self {
        EdgeColumns {
            feat_dim,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn push(&mut self, t: Timestamp, src: NodeId, dst: NodeId, feat: &[f64]) {
        self.t.push(t);
        self.src.push(src);
        self.dst.push(dst);
        self.feat.extend_from_slice(feat);
    }

    pub fn feat_row(&self, i: usize) -> &[f64] {
        &self.feat[i * self.feat_dim..(i + 1) * self.feat_dim]
    }

    pub fn event(&self, i: usize) -> EdgeEvent {
        EdgeEvent {
            t: self.t[i],
            src: self.src[i],
            dst: self.dst[i],
            feat: self.feat_row(i).to_vec(),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if self.src.len() != n || self.dst.len() != n {
            return Err(Error::Validation(format!(
                "edge columns have unequal lengths (t={n}, src={}, dst={})",
                self.src.len(),
                self.dst.len()
            )));
        }
        if self.feat.len() != n * self.feat_dim {
            return Err(Error::DimensionMismatch {
                what: "edge features",
                expected: n * self.feat_dim,
                found: self.feat.len(),
                index: 0,
            });
        }
        validate_times(&self.t)
    }

    fn permute(&mut self, perm: &[usize]) {
        self.t = perm.iter().map(|&i| self.t[i]).collect();
        self.src = perm.iter().map(|&i| self.src[i]).collect();
        self.dst = perm.iter().map(|&i| self.dst[i]).collect();
        self.feat = permute_rows(&self.feat, self.feat_dim, perm);
    }
}

/// Parallel node-event columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeEventColumns {
    pub t: Vec<Timestamp>,
    pub node: Vec<NodeId>,
    pub feat: Vec<f64>,
    pub feat_dim: usize,
}

impl NodeEventColumns {
    pub fn with_dim(feat_dim: usize) -> Self {
        NodeEventColumns {
            feat_dim,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn push(&mut self, t: Timestamp, node: NodeId, feat: &[f64]) {
        self.t.push(t);
        self.node.push(node);
        self.feat.extend_from_slice(feat);
    }

    pub fn feat_row(&self, i: usize) -> &[f64] {
        &self.feat[i * self.feat_dim..(i + 1) * self.feat_dim]
    }

    pub fn event(&self, i: usize) -> NodeEvent {
        NodeEvent {
            t: self.t[i],
            node: self.node[i],
            feat: self.feat_row(i).to_vec(),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if self.node.len() != n {
            return Err(Error::Validation(format!(
                "node event columns have unequal lengths (t={n}, node={})",
                self.node.len()
            )));
        }
        if self.feat.len() != n * self.feat_dim {
            return Err(Error::DimensionMismatch {
                what: "node event features",
                expected: n * self.feat_dim,
                found: self.feat.len(),
                index: 0,
            });
        }
        validate_times(&self.t)
    }

    fn permute(&mut self, perm: &[usize]) {
        self.t = perm.iter().map(|&i| self.t[i]).collect();
        self.node = perm.iter().map(|&i| self.node[i]).collect();
        self.feat = permute_rows(&self.feat, self.feat_dim, perm);
    }
}

fn validate_times(t: &[Timestamp]) -> Result<()> {
    match t.iter().position(|&t| t < 0) {
        Some(i) => Err(Error::Validation(format!(
            "negative timestamp {} at event {i}",
            t[i]
        ))),
        None => Ok(()),
    }
}

fn permute_rows(data: &[f64], dim: usize, perm: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(data.len());
    for &i in perm {
        out.extend_from_slice(&data[i * dim..(i + 1) * dim]);
    }
    out
}

/// Stable sort permutation by timestamp, `None` when already sorted.
fn sort_permutation(t: &[Timestamp]) -> Option<Vec<usize>> {
    if t.windows(2).all(|w| w[0] <= w[1]) {
        return None;
    }
    let mut perm: Vec<usize> = (0..t.len()).collect();
    perm.sort_by_key(|&i| t[i]);
    Some(perm)
}

/// Distinct timestamps of a sorted column with the first row of each.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimestampIndex {
    keys: Vec<Timestamp>,
    offsets: Vec<usize>,
    len: usize,
}

impl TimestampIndex {
    fn build(t: &[Timestamp]) -> Self {
        let mut keys = Vec::new();
        let mut offsets = Vec::new();
        for (i, &ts) in t.iter().enumerate() {
            if keys.last() != Some(&ts) {
                keys.push(ts);
                offsets.push(i);
            }
        }
        TimestampIndex {
            keys,
            offsets,
            len: t.len(),
        }
    }

    /// Smallest row `i` with `t[i] >= t`, or the row count.
    pub fn lower_bound(&self, t: Timestamp) -> usize {
        let k = self.keys.partition_point(|&key| key < t);
        self.offsets.get(k).copied().unwrap_or(self.len)
    }

    /// First row of the given timestamp, if present.
    pub fn first_row(&self, t: Timestamp) -> Option<usize> {
        self.keys.binary_search(&t).ok().map(|k| self.offsets[k])
    }

    pub fn distinct(&self) -> &[Timestamp] {
        &self.keys
    }
}

/// Immutable temporal graph: the single source of truth every view and
/// batch refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalGraph {
    edges: EdgeColumns,
    node_events: NodeEventColumns,
    granularity: TimeGranularity,
    static_feats: Option<StaticNodeFeatures>,
    edge_index: TimestampIndex,
    node_index: TimestampIndex,
    num_nodes: usize,
    max_node_id: Option<NodeId>,
}

/// Builds a graph from event lists, stably sorting by timestamp.
pub fn build_graph(
    edge_events: &[EdgeEvent],
    node_events: &[NodeEvent],
    granularity: TimeGranularity,
    static_feats: Option<StaticNodeFeatures>,
) -> Result<TemporalGraph> {
    let edge_dim = edge_events.first().map_or(0, |e| e.feat.len());
    let mut edges = EdgeColumns::with_dim(edge_dim);
    for (i, e) in edge_events.iter().enumerate() {
        if e.feat.len() != edge_dim {
            return Err(Error::DimensionMismatch {
                what: "edge features",
                expected: edge_dim,
                found: e.feat.len(),
                index: i,
            });
        }
        edges.push(e.t, e.src, e.dst, &e.feat);
    }

    let node_dim = node_events.first().map_or(0, |e| e.feat.len());
    let mut nodes = NodeEventColumns::with_dim(node_dim);
    for (i, e) in node_events.iter().enumerate() {
        if e.feat.len() != node_dim {
            return Err(Error::DimensionMismatch {
                what: "node event features",
                expected: node_dim,
                found: e.feat.len(),
                index: i,
            });
        }
        nodes.push(e.t, e.node, &e.feat);
    }

    TemporalGraph::from_columns(edges, nodes, granularity, static_feats)
}

impl TemporalGraph {
    /// Builds a graph from columns, stably sorting each event class by time.
    pub fn from_columns(
        mut edges: EdgeColumns,
        mut node_events: NodeEventColumns,
        granularity: TimeGranularity,
        static_feats: Option<StaticNodeFeatures>,
    ) -> Result<Self> {
        edges.validate()?;
        node_events.validate()?;
        if let Some(perm) = sort_permutation(&edges.t) {
            edges.permute(&perm);
        }
        if let Some(perm) = sort_permutation(&node_events.t) {
            node_events.permute(&perm);
        }

        let (num_nodes, max_node_id) = count_nodes(&edges, &node_events);
        if let Some(feats) = &static_feats {
            let needed = max_node_id.map_or(0, |m| m as usize + 1);
            if feats.rows() != num_nodes || feats.rows() < needed {
                return Err(Error::Validation(format!(
                    "static features have {} rows but the graph has {num_nodes} nodes (max id {})",
                    feats.rows(),
                    needed.saturating_sub(1)
                )));
            }
        }

        let edge_index = TimestampIndex::build(&edges.t);
        let node_index = TimestampIndex::build(&node_events.t);
        Ok(TemporalGraph {
            edges,
            node_events,
            granularity,
            static_feats,
            edge_index,
            node_index,
            num_nodes,
            max_node_id,
        })
    }

    pub fn edges(&self) -> &EdgeColumns {
        &self.edges
    }

    pub fn node_events(&self) -> &NodeEventColumns {
        &self.node_events
    }

    pub fn granularity(&self) -> TimeGranularity {
        self.granularity
    }

    pub fn static_feats(&self) -> Option<&StaticNodeFeatures> {
        self.static_feats.as_ref()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_node_events(&self) -> usize {
        self.node_events.len()
    }

    /// Number of distinct node ids across all events.
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// One past the largest node id, i.e. the length of any dense per-node table.
    pub fn node_id_bound(&self) -> usize {
        self.max_node_id.map_or(0, |m| m as usize + 1)
    }

    pub fn edge_index(&self) -> &TimestampIndex {
        &self.edge_index
    }

    pub fn node_index(&self) -> &TimestampIndex {
        &self.node_index
    }

    /// Earliest timestamp over edge and node events.
    pub fn t_min(&self) -> Option<Timestamp> {
        let e = self.edges.t.first().copied();
        let n = self.node_events.t.first().copied();
        e.into_iter().chain(n).min()
    }

    /// Latest timestamp over edge and node events.
    pub fn t_max(&self) -> Option<Timestamp> {
        let e = self.edges.t.last().copied();
        let n = self.node_events.t.last().copied();
        e.into_iter().chain(n).max()
    }

    /// Smallest edge row with timestamp `>= t`, or `num_edges()`.
    pub fn lower_bound(&self, t: Timestamp) -> usize {
        self.edge_index.lower_bound(t)
    }

    /// Smallest node-event row with timestamp `>= t`, or `num_node_events()`.
    pub fn node_lower_bound(&self, t: Timestamp) -> usize {
        self.node_index.lower_bound(t)
    }
}

fn count_nodes(edges: &EdgeColumns, nodes: &NodeEventColumns) -> (usize, Option<NodeId>) {
    let max = edges
        .src
        .iter()
        .chain(&edges.dst)
        .chain(&nodes.node)
        .copied()
        .max();
    let Some(max) = max else {
        return (0, None);
    };
    let mut seen = vec![false; max as usize + 1];
    let mut count = 0;
    for &id in edges.src.iter().chain(&edges.dst).chain(&nodes.node) {
        let slot = &mut seen[id as usize];
        if !*slot {
            *slot = true;
            count += 1;
        }
    }
    (count, Some(max))
}

/// Pair key used for unique-edge set semantics.
#[inline]
pub(crate) fn pair_key(src: NodeId, dst: NodeId) -> u64 {
    ((src as u64) << 32) | dst as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub num_nodes: usize,
    pub num_edges: usize,
    pub num_node_events: usize,
    pub num_unique_edges: usize,
    pub num_unique_steps: usize,
    pub surprise: Option<f64>,
}

/// Dataset statistics. With a split time, `surprise` is the fraction of
/// distinct pairs at or after the split that never occur before it.
pub fn graph_stats(graph: &TemporalGraph, split_time: Option<Timestamp>) -> Result<GraphStats> {
    let edges = graph.edges();
    let unique_edges: HashSet<u64> = edges
        .src
        .iter()
        .zip(&edges.dst)
        .map(|(&s, &d)| pair_key(s, d))
        .collect();

    let num_unique_steps = merged_distinct(
        graph.edge_index().distinct(),
        graph.node_index().distinct(),
    );

    let surprise = match split_time {
        None => None,
        Some(split) => {
            let (lo, hi) = match (graph.t_min(), graph.t_max()) {
                (Some(lo), Some(hi)) => (lo, hi),
                _ => {
                    return Err(Error::OutOfRange(
                        "split time",
                        format!("{split} on an empty graph"),
                    ))
                }
            };
            if split < lo || split > hi {
                return Err(Error::OutOfRange(
                    "split time",
                    format!("{split} not in [{lo}, {hi}]"),
                ));
            }
            Some(surprise(edges, graph.lower_bound(split)))
        }
    };

    Ok(GraphStats {
        num_nodes: graph.num_nodes(),
        num_edges: graph.num_edges(),
        num_node_events: graph.num_node_events(),
        num_unique_edges: unique_edges.len(),
        num_unique_steps,
        surprise,
    })
}

fn surprise(edges: &EdgeColumns, split_row: usize) -> f64 {
    let pairs = |r: std::ops::Range<usize>| -> HashSet<u64> {
        r.map(|i| pair_key(edges.src[i], edges.dst[i])).collect()
    };
    let before = pairs(0..split_row);
    let after = pairs(split_row..edges.len());
    if after.is_empty() {
        return 0.0;
    }
    let unseen = after.iter().filter(|p| !before.contains(p)).count();
    unseen as f64 / after.len() as f64
}

fn merged_distinct(a: &[Timestamp], b: &[Timestamp]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x == y => {
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => i += 1,
            (Some(_), None) => i += 1,
            _ => j += 1,
        }
        n += 1;
    }
    n
}
