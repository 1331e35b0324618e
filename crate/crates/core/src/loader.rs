//! Graph views and the two iteration modes over them.
//!
//! A [`GraphView`] is a borrowed window `[start, end)` over a
//! [`TemporalGraph`]; it holds row ranges, never event data. Iterating by
//! events yields batches of exactly `n` events (edge and node events merged
//! in time order, edges first on ties). Iterating by time yields one batch
//! per half-open span `[start + k*span, start + (k+1)*span)`, empty spans
//! included.

use std::ops::Range;

use crate::attrs::{self, Attr, AttrMap, Dense};
use crate::error::{Error, Result};
use crate::graph::{TemporalGraph, Timestamp};
use crate::granularity::{TickRatio, TimeGranularity};
use crate::hooks::HookManager;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchSpec {
    ByEvents(usize),
    ByTime(TimeGranularity),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphView<'g> {
    graph: &'g TemporalGraph,
    start: Timestamp,
    end: Timestamp,
    iter_granularity: TimeGranularity,
    edge_rows: Range<usize>,
    node_rows: Range<usize>,
}

impl<'g> GraphView<'g> {
    /// View over the whole graph, `[t_min, t_max + 1)`.
    pub fn full(graph: &'g TemporalGraph) -> Self {
        let (start, end) = match (graph.t_min(), graph.t_max()) {
            (Some(lo), Some(hi)) => (lo, hi + 1),
            _ => (0, 0),
        };
        GraphView {
            graph,
            start,
            end,
            iter_granularity: graph.granularity(),
            edge_rows: 0..graph.num_edges(),
            node_rows: 0..graph.num_node_events(),
        }
    }

    pub fn graph(&self) -> &'g TemporalGraph {
        self.graph
    }

    pub fn interval(&self) -> (Timestamp, Timestamp) {
        (self.start, self.end)
    }

    pub fn iter_granularity(&self) -> TimeGranularity {
        self.iter_granularity
    }

    pub fn with_iter_granularity(mut self, granularity: TimeGranularity) -> Self {
        self.iter_granularity = granularity;
        self
    }

    pub fn edge_rows(&self) -> Range<usize> {
        self.edge_rows.clone()
    }

    pub fn node_rows(&self) -> Range<usize> {
        self.node_rows.clone()
    }

    pub fn num_events(&self) -> usize {
        self.edge_rows.len() + self.node_rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.num_events() == 0
    }

    /// Sub-view over `[t_start, t_end)`, which must lie inside this view.
    pub fn slice(&self, t_start: Timestamp, t_end: Timestamp) -> Result<GraphView<'g>> {
        if t_start > t_end || t_start < self.start || t_end > self.end {
            return Err(Error::OutOfRange(
                "view slice",
                format!(
                    "[{t_start}, {t_end}) not contained in [{}, {})",
                    self.start, self.end
                ),
            ));
        }
        Ok(GraphView {
            graph: self.graph,
            start: t_start,
            end: t_end,
            iter_granularity: self.iter_granularity,
            edge_rows: self.graph.lower_bound(t_start)..self.graph.lower_bound(t_end),
            node_rows: self.graph.node_lower_bound(t_start)..self.graph.node_lower_bound(t_end),
        })
    }

    fn last_event_time(&self) -> Option<Timestamp> {
        let e = (!self.edge_rows.is_empty()).then(|| self.graph.edges().t[self.edge_rows.end - 1]);
        let n = (!self.node_rows.is_empty())
            .then(|| self.graph.node_events().t[self.node_rows.end - 1]);
        e.into_iter().chain(n).max()
    }

    pub fn batches(&self, spec: BatchSpec) -> Result<Batches<'g>> {
        match spec {
            BatchSpec::ByEvents(n) => iterate_by_events(self, n).map(Batches::Events),
            BatchSpec::ByTime(span) => iterate_by_time(self, span).map(Batches::Time),
        }
    }

    /// Snapshots at the view's iteration granularity.
    pub fn snapshots(&self) -> Result<TimeBatches<'g>> {
        iterate_by_time(self, self.iter_granularity)
    }
}

/// Free-function form of [`GraphView::slice`].
pub fn slice_view<'g>(view: &GraphView<'g>, t_start: Timestamp, t_end: Timestamp) -> Result<GraphView<'g>> {
    view.slice(t_start, t_end)
}

/// A contiguous run of edge rows and node-event rows.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSlice<'g> {
    graph: &'g TemporalGraph,
    pub edge_rows: Range<usize>,
    pub node_rows: Range<usize>,
    /// Half-open time range the batch covers.
    pub interval: (Timestamp, Timestamp),
}

impl<'g> BatchSlice<'g> {
    pub fn graph(&self) -> &'g TemporalGraph {
        self.graph
    }

    pub fn num_edges(&self) -> usize {
        self.edge_rows.len()
    }

    pub fn num_events(&self) -> usize {
        self.edge_rows.len() + self.node_rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.num_events() == 0
    }

    pub fn src(&self) -> &'g [u32] {
        &self.graph.edges().src[self.edge_rows.clone()]
    }

    pub fn dst(&self) -> &'g [u32] {
        &self.graph.edges().dst[self.edge_rows.clone()]
    }

    pub fn time(&self) -> &'g [Timestamp] {
        &self.graph.edges().t[self.edge_rows.clone()]
    }

    pub fn node_times(&self) -> &'g [Timestamp] {
        &self.graph.node_events().t[self.node_rows.clone()]
    }

    /// Built-in attributes copied out of the storage columns.
    pub fn builtin_attrs(&self) -> AttrMap {
        let edges = self.graph.edges();
        let nodes = self.graph.node_events();
        let er = self.edge_rows.clone();
        let nr = self.node_rows.clone();
        let mut map = AttrMap::new();
        map.insert(attrs::SRC.into(), Attr::Ids(edges.src[er.clone()].to_vec()));
        map.insert(attrs::DST.into(), Attr::Ids(edges.dst[er.clone()].to_vec()));
        map.insert(attrs::TIME.into(), Attr::Times(edges.t[er.clone()].to_vec()));
        let d = edges.feat_dim;
        map.insert(
            attrs::EDGE_FEAT.into(),
            Attr::Dense(Dense::matrix(er.len(), d, edges.feat[er.start * d..er.end * d].to_vec())),
        );
        let nd = nodes.feat_dim;
        map.insert(
            attrs::NODE_EVENTS.into(),
            Attr::NodeEvents {
                t: nodes.t[nr.clone()].to_vec(),
                node: nodes.node[nr.clone()].to_vec(),
                feat: Dense::matrix(nr.len(), nd, nodes.feat[nr.start * nd..nr.end * nd].to_vec()),
            },
        );
        map
    }
}

/// Fixed-event-count batches.
#[derive(Debug, Clone)]
pub struct EventBatches<'g> {
    graph: &'g TemporalGraph,
    size: usize,
    edge: usize,
    edge_end: usize,
    node: usize,
    node_end: usize,
}

pub fn iterate_by_events<'g>(view: &GraphView<'g>, n: usize) -> Result<EventBatches<'g>> {
    if n == 0 {
        return Err(Error::Validation("batch size must be at least 1".into()));
    }
    Ok(EventBatches {
        graph: view.graph,
        size: n,
        edge: view.edge_rows.start,
        edge_end: view.edge_rows.end,
        node: view.node_rows.start,
        node_end: view.node_rows.end,
    })
}

impl<'g> Iterator for EventBatches<'g> {
    type Item = BatchSlice<'g>;

    fn next(&mut self) -> Option<Self::Item> {
        let et = &self.graph.edges().t;
        let nt = &self.graph.node_events().t;
        let (e0, n0) = (self.edge, self.node);
        if e0 == self.edge_end && n0 == self.node_end {
            return None;
        }
        if n0 == self.node_end {
            self.edge = (e0 + self.size).min(self.edge_end);
        } else if e0 == self.edge_end {
            self.node = (n0 + self.size).min(self.node_end);
        } else {
            for _ in 0..self.size {
                let take_edge = match (self.edge < self.edge_end, self.node < self.node_end) {
                    (true, true) => et[self.edge] <= nt[self.node],
                    (true, false) => true,
                    (false, true) => false,
                    (false, false) => break,
                };
                if take_edge {
                    self.edge += 1;
                } else {
                    self.node += 1;
                }
            }
        }
        let first = [et.get(e0).filter(|_| e0 < self.edge), nt.get(n0).filter(|_| n0 < self.node)]
            .into_iter()
            .flatten()
            .min()
            .copied()
            .unwrap_or_default();
        let last = [
            (self.edge > e0).then(|| et[self.edge - 1]),
            (self.node > n0).then(|| nt[self.node - 1]),
        ]
        .into_iter()
        .flatten()
        .max()
        .unwrap_or(first);
        Some(BatchSlice {
            graph: self.graph,
            edge_rows: e0..self.edge,
            node_rows: n0..self.node,
            interval: (first, last + 1),
        })
    }
}

/// Fixed-time-span batches.
#[derive(Debug, Clone)]
pub struct TimeBatches<'g> {
    view: GraphView<'g>,
    ratio: TickRatio,
    next: u64,
    count: u64,
}

impl TimeBatches<'_> {
    pub fn num_batches(&self) -> usize {
        self.count as usize
    }
}

pub fn iterate_by_time<'g>(view: &GraphView<'g>, span: TimeGranularity) -> Result<TimeBatches<'g>> {
    let ratio = TickRatio::new(view.graph.granularity(), span)?;
    let count = match view.last_event_time() {
        Some(last) => ratio.bucket((last - view.start) as u64) + 1,
        None => 0,
    };
    Ok(TimeBatches {
        view: view.clone(),
        ratio,
        next: 0,
        count,
    })
}

impl<'g> Iterator for TimeBatches<'g> {
    type Item = BatchSlice<'g>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.count {
            return None;
        }
        let k = self.next;
        self.next += 1;
        let lo = self.view.start + self.ratio.bucket_start(k) as Timestamp;
        let hi = self.view.start + self.ratio.bucket_start(k + 1) as Timestamp;
        let g = self.view.graph;
        let clamp = |r: usize, rows: &Range<usize>| r.clamp(rows.start, rows.end);
        let er = &self.view.edge_rows;
        let nr = &self.view.node_rows;
        Some(BatchSlice {
            graph: g,
            edge_rows: clamp(g.lower_bound(lo), er)..clamp(g.lower_bound(hi), er),
            node_rows: clamp(g.node_lower_bound(lo), nr)..clamp(g.node_lower_bound(hi), nr),
            interval: (lo, hi),
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.count - self.next) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for TimeBatches<'_> {}

pub enum Batches<'g> {
    Events(EventBatches<'g>),
    Time(TimeBatches<'g>),
}

impl<'g> Iterator for Batches<'g> {
    type Item = BatchSlice<'g>;

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            Batches::Events(it) => it.next(),
            Batches::Time(it) => it.next(),
        }
    }
}

/// An event slice plus its named attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterializedBatch {
    pub edge_rows: Range<usize>,
    pub node_rows: Range<usize>,
    pub interval: (Timestamp, Timestamp),
    pub attrs: AttrMap,
}

impl MaterializedBatch {
    pub fn from_slice(slice: &BatchSlice<'_>) -> Self {
        MaterializedBatch {
            edge_rows: slice.edge_rows.clone(),
            node_rows: slice.node_rows.clone(),
            interval: slice.interval,
            attrs: slice.builtin_attrs(),
        }
    }

    pub fn num_edges(&self) -> usize {
        self.edge_rows.len()
    }

    pub fn src(&self) -> Result<&[u32]> {
        attrs::ids(&self.attrs, attrs::SRC)
    }

    pub fn dst(&self) -> Result<&[u32]> {
        attrs::ids(&self.attrs, attrs::DST)
    }

    pub fn time(&self) -> Result<&[Timestamp]> {
        attrs::times(&self.attrs, attrs::TIME)
    }

    pub fn negatives(&self) -> Result<&[Vec<u32>]> {
        attrs::id_lists(&self.attrs, attrs::NEGATIVES)
    }
}

/// Populates built-ins and runs the hooks registered under `key`.
pub fn materialize(
    slice: &BatchSlice<'_>,
    manager: &mut HookManager,
    key: &str,
) -> Result<MaterializedBatch> {
    let batch = MaterializedBatch::from_slice(slice);
    manager.execute(key, batch)
}

/// Iterator adaptor yielding materialized batches for one activation key.
pub struct DataLoader<'g, 'm> {
    batches: Batches<'g>,
    manager: &'m mut HookManager,
    key: String,
}

impl<'g, 'm> DataLoader<'g, 'm> {
    pub fn new(
        view: &GraphView<'g>,
        spec: BatchSpec,
        manager: &'m mut HookManager,
        key: impl Into<String>,
    ) -> Result<Self> {
        Ok(DataLoader {
            batches: view.batches(spec)?,
            manager,
            key: key.into(),
        })
    }
}

impl Iterator for DataLoader<'_, '_> {
    type Item = Result<MaterializedBatch>;

    fn next(&mut self) -> Option<Self::Item> {
        let slice = self.batches.next()?;
        Some(materialize(&slice, self.manager, &self.key))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, EdgeEvent, NodeEvent};
    use TimeGranularity::*;

    fn chain(ts: &[Timestamp], g: TimeGranularity) -> TemporalGraph {
        let ev: Vec<_> = ts.iter().map(|&t| EdgeEvent::new(t, 0, 1)).collect();
        build_graph(&ev, &[], g, None).unwrap()
    }

    fn sizes<'g>(it: impl Iterator<Item = BatchSlice<'g>>) -> Vec<usize> {
        it.map(|b| b.num_events()).collect()
    }

    #[test]
    fn by_events_sizes() {
        let g = chain(&(0..10).collect::<Vec<_>>(), Second);
        let v = GraphView::full(&g);
        assert_eq!(sizes(iterate_by_events(&v, 3).unwrap()), vec![3, 3, 3, 1]);
        assert_eq!(sizes(iterate_by_events(&v, 10).unwrap()), vec![10]);
        assert_eq!(sizes(iterate_by_events(&v, 50).unwrap()), vec![10]);
        assert!(iterate_by_events(&v, 0).is_err());
    }

    #[test]
    fn by_time_half_open() {
        // spans of 5 seconds are not a granularity; use minutes over 12s ticks
        let g = chain(&(0..=10).map(|t| t * 12).collect::<Vec<_>>(), Second);
        let v = GraphView::full(&g);
        let batches: Vec<_> = iterate_by_time(&v, Minute).unwrap().collect();
        assert_eq!(sizes(batches.iter().cloned()), vec![5, 5, 1]);
        assert_eq!(batches[0].interval, (0, 60));
        assert_eq!(batches[2].interval, (120, 180));
    }

    #[test]
    fn by_time_emits_empty_batches() {
        let g = chain(&[0, 3 * 3600], Second);
        let v = GraphView::full(&g);
        assert_eq!(sizes(iterate_by_time(&v, Hour).unwrap()), vec![1, 0, 0, 1]);
        let single = chain(&[42], Second);
        assert_eq!(sizes(iterate_by_time(&GraphView::full(&single), Day).unwrap()), vec![1]);
    }

    #[test]
    fn event_ordered_by_time_rejected() {
        let g = chain(&[0, 1, 2], EventOrdered);
        let v = GraphView::full(&g);
        assert!(matches!(
            iterate_by_time(&v, Hour),
            Err(Error::ExcludedGranularity(EventOrdered))
        ));
        let g = chain(&[0, 1, 2], Second);
        assert!(iterate_by_time(&GraphView::full(&g), EventOrdered).is_err());
    }

    #[test]
    fn slicing() {
        let g = chain(&[1, 3, 3, 7], Second);
        let full = GraphView::full(&g);
        assert_eq!(full.interval(), (1, 8));
        assert_eq!(full.slice(1, 8).unwrap(), full);
        let empty = full.slice(5, 5).unwrap();
        assert!(empty.is_empty());
        assert_eq!(iterate_by_events(&empty, 2).unwrap().count(), 0);
        assert_eq!(iterate_by_time(&empty, Second).unwrap().count(), 0);
        let mid = full.slice(3, 7).unwrap();
        assert_eq!(mid.edge_rows(), 1..3);
        assert!(full.slice(0, 4).is_err());
        assert!(mid.slice(2, 5).is_err());
        assert!(full.slice(6, 5).is_err());
    }

    #[test]
    fn mixed_events_merge_edges_first() {
        let ev = vec![EdgeEvent::new(1, 0, 1), EdgeEvent::new(2, 0, 1)];
        let nodes = vec![
            NodeEvent { t: 1, node: 0, feat: vec![] },
            NodeEvent { t: 3, node: 1, feat: vec![] },
        ];
        let g = build_graph(&ev, &nodes, Second, None).unwrap();
        let v = GraphView::full(&g);
        let b: Vec<_> = iterate_by_events(&v, 1).unwrap().collect();
        let kinds: Vec<_> = b.iter().map(|s| (s.edge_rows.len(), s.node_rows.len())).collect();
        assert_eq!(kinds, vec![(1, 0), (0, 1), (1, 0), (0, 1)]);
        assert_eq!(b[3].interval, (3, 4));
        let b: Vec<_> = iterate_by_events(&v, 3).unwrap().collect();
        assert_eq!(b[0].edge_rows, 0..2);
        assert_eq!(b[0].node_rows, 0..1);
        assert_eq!(b[0].interval, (1, 3));
    }

    #[test]
    fn builtin_attrs_only_without_hooks() {
        let g = chain(&[1, 2, 3], Second);
        let v = GraphView::full(&g);
        let mut m = HookManager::new();
        let batches: Vec<_> = DataLoader::new(&v, BatchSpec::ByEvents(2), &mut m, "train")
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        let keys: Vec<_> = batches[0].attrs.keys().cloned().collect();
        let mut expect = attrs::builtin_names();
        expect.sort();
        assert_eq!(keys, expect);
        assert_eq!(batches[1].time().unwrap(), &[3]);
    }
}
