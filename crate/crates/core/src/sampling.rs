//! Temporal neighborhood queries.
//!
//! [`RecencyBuffer`] keeps the `k` most recent neighbors of every node in a
//! flat ring buffer (`node * k + slot`) and is fed batch by batch.
//! [`TemporalAdjacency`] is a CSR index of every edge in both directions,
//! time-sorted per node, for uniform sampling of neighbors strictly before a
//! cut time.

use std::collections::HashMap;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attrs::Neighbor;
use crate::error::{Error, Result};
use crate::graph::{NodeId, TemporalGraph, Timestamp};
use crate::loader::GraphView;

#[derive(Debug, Clone)]
pub struct RecencyBuffer {
    capacity: usize,
    nbr: Vec<NodeId>,
    time: Vec<Timestamp>,
    edge: Vec<usize>,
    /// Next slot to write per node.
    cursor: Vec<u32>,
    fill: Vec<u32>,
    max_t: Option<Timestamp>,
}

impl RecencyBuffer {
    pub fn new(capacity: usize, num_nodes: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Validation("recency buffer capacity must be at least 1".into()));
        }
        Ok(RecencyBuffer {
            capacity,
            nbr: vec![0; num_nodes * capacity],
            time: vec![0; num_nodes * capacity],
            edge: vec![0; num_nodes * capacity],
            cursor: vec![0; num_nodes],
            fill: vec![0; num_nodes],
            max_t: None,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Latest inserted timestamp.
    pub fn max_time(&self) -> Option<Timestamp> {
        self.max_t
    }

    fn grow(&mut self, node: NodeId) {
        let n = node as usize + 1;
        if n > self.cursor.len() {
            let n = n.max(self.cursor.len() * 2);
            self.cursor.resize(n, 0);
            self.fill.resize(n, 0);
            self.nbr.resize(n * self.capacity, 0);
            self.time.resize(n * self.capacity, 0);
            self.edge.resize(n * self.capacity, 0);
        }
    }

    #[inline]
    fn insert(&mut self, node: NodeId, nbr: NodeId, t: Timestamp, row: usize) {
        let n = node as usize;
        let slot = n * self.capacity + self.cursor[n] as usize;
        self.nbr[slot] = nbr;
        self.time[slot] = t;
        self.edge[slot] = row;
        self.cursor[n] = ((self.cursor[n] as usize + 1) % self.capacity) as u32;
        if (self.fill[n] as usize) < self.capacity {
            self.fill[n] += 1;
        }
    }

    /// Inserts a batch of edges in both directions. Timestamps must not go
    /// backwards, within the batch or relative to earlier batches.
    pub fn update(
        &mut self,
        src: &[NodeId],
        dst: &[NodeId],
        t: &[Timestamp],
        rows: &[usize],
    ) -> Result<()> {
        let n = t.len();
        if src.len() != n || dst.len() != n || rows.len() != n {
            return Err(Error::Validation("recency update columns have unequal lengths".into()));
        }
        let mut prev = self.max_t;
        for &ts in t {
            if let Some(p) = prev {
                if ts < p {
                    return Err(Error::StreamOrder { t: ts, max_t: p });
                }
            }
            prev = Some(ts);
        }
        if let Some(&m) = src.iter().chain(dst).max() {
            self.grow(m);
        }
        for i in 0..n {
            self.insert(src[i], dst[i], t[i], rows[i]);
            self.insert(dst[i], src[i], t[i], rows[i]);
        }
        self.max_t = prev;
        Ok(())
    }

    fn lookup(&self, node: NodeId, want: usize) -> Vec<Neighbor> {
        let n = node as usize;
        if n >= self.cursor.len() {
            return Vec::new();
        }
        let take = want.min(self.fill[n] as usize);
        let base = n * self.capacity;
        let cur = self.cursor[n] as usize;
        (1..=take)
            .map(|back| {
                let slot = base + (cur + self.capacity - back) % self.capacity;
                Neighbor {
                    node: self.nbr[slot],
                    t: self.time[slot],
                    edge: self.edge[slot],
                }
            })
            .collect()
    }

    /// Most recent `want` neighbors per seed, newest first. Repeated seeds
    /// are looked up once.
    pub fn query(&self, seeds: &[NodeId], want: usize) -> Result<Vec<Vec<Neighbor>>> {
        if want > self.capacity {
            return Err(Error::Capacity {
                want,
                capacity: self.capacity,
            });
        }
        let mut first_seen: HashMap<NodeId, usize> = HashMap::with_capacity(seeds.len());
        let mut out: Vec<Vec<Neighbor>> = Vec::with_capacity(seeds.len());
        for (i, &s) in seeds.iter().enumerate() {
            match first_seen.get(&s) {
                Some(&j) => {
                    let dup = out[j].clone();
                    out.push(dup);
                }
                None => {
                    first_seen.insert(s, i);
                    out.push(self.lookup(s, want));
                }
            }
        }
        Ok(out)
    }

    pub fn clear(&mut self) {
        self.cursor.fill(0);
        self.fill.fill(0);
        self.max_t = None;
    }
}

/// Per-node time-sorted incidence lists over a fixed set of edges.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalAdjacency {
    offsets: Vec<usize>,
    nbr: Vec<NodeId>,
    time: Vec<Timestamp>,
    edge: Vec<usize>,
}

impl TemporalAdjacency {
    pub fn from_graph(graph: &TemporalGraph) -> Self {
        Self::from_view(&GraphView::full(graph))
    }

    /// Adjacency over the edges visible in `view`.
    pub fn from_view(view: &GraphView<'_>) -> Self {
        let edges = view.graph().edges();
        let rows = view.edge_rows();
        let n = view.graph().node_id_bound();
        let mut degree = vec![0usize; n + 1];
        for i in rows.clone() {
            degree[edges.src[i] as usize + 1] += 1;
            degree[edges.dst[i] as usize + 1] += 1;
        }
        for i in 1..degree.len() {
            degree[i] += degree[i - 1];
        }
        let offsets = degree;
        let total = offsets[n];
        let mut next = offsets.clone();
        let mut nbr = vec![0; total];
        let mut time = vec![0; total];
        let mut edge = vec![0; total];
        // rows are time-sorted, so appending in row order keeps each list sorted
        for i in rows {
            for (a, b) in [(edges.src[i], edges.dst[i]), (edges.dst[i], edges.src[i])] {
                let slot = next[a as usize];
                next[a as usize] += 1;
                nbr[slot] = b;
                time[slot] = edges.t[i];
                edge[slot] = i;
            }
        }
        TemporalAdjacency {
            offsets,
            nbr,
            time,
            edge,
        }
    }

    pub fn num_entries(&self) -> usize {
        self.nbr.len()
    }

    /// All entries of `node`, oldest first.
    pub fn neighbors(&self, node: NodeId) -> Vec<Neighbor> {
        let r = self.range(node);
        r.map(|i| self.entry(i)).collect()
    }

    fn range(&self, node: NodeId) -> std::ops::Range<usize> {
        let n = node as usize;
        if n + 1 >= self.offsets.len() {
            return 0..0;
        }
        self.offsets[n]..self.offsets[n + 1]
    }

    fn entry(&self, i: usize) -> Neighbor {
        Neighbor {
            node: self.nbr[i],
            t: self.time[i],
            edge: self.edge[i],
        }
    }

    /// Up to `want` neighbors of `node` strictly before `cut`, newest first.
    pub fn sample(&self, node: NodeId, cut: Timestamp, want: usize, rng: &mut ChaCha8Rng) -> Vec<Neighbor> {
        let r = self.range(node);
        let candidates = self.time[r.clone()].partition_point(|&t| t < cut);
        if candidates <= want {
            return (r.start..r.start + candidates).rev().map(|i| self.entry(i)).collect();
        }
        let mut picked: Vec<usize> = index::sample(rng, candidates, want).into_iter().collect();
        picked.sort_unstable_by(|a, b| b.cmp(a));
        picked.into_iter().map(|i| self.entry(r.start + i)).collect()
    }

    /// Uniform sample without replacement of up to `want` neighbors per seed,
    /// all cut at `t`.
    pub fn uniform_query(&self, seeds: &[NodeId], t: Timestamp, want: usize, rng_seed: u64) -> Vec<Vec<Neighbor>> {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        seeds.iter().map(|&s| self.sample(s, t, want, &mut rng)).collect()
    }

    /// Layered k-hop sampling. Hop 1 samples each seed before `t`; hop `h`
    /// samples each hop-`h-1` neighbor before the time of the edge that
    /// reached it.
    pub fn multihop_query(
        &self,
        seeds: &[NodeId],
        t: Timestamp,
        fanouts: &[usize],
        rng_seed: u64,
    ) -> Result<Vec<HopLayer>> {
        if fanouts.is_empty() {
            return Err(Error::Validation("multihop query needs at least one fanout".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut layers: Vec<HopLayer> = Vec::with_capacity(fanouts.len());
        let mut queries: Vec<(NodeId, Timestamp)> = seeds.iter().map(|&s| (s, t)).collect();
        for &fanout in fanouts {
            let neighbors: Vec<Vec<Neighbor>> = queries
                .iter()
                .map(|&(node, cut)| self.sample(node, cut, fanout, &mut rng))
                .collect();
            let next = neighbors.iter().flatten().map(|n| (n.node, n.t)).collect();
            layers.push(HopLayer { queries, neighbors });
            queries = next;
        }
        Ok(layers)
    }
}

/// One hop of a multihop query: the `(node, cut)` pairs queried and the
/// neighbors sampled for each.
#[derive(Debug, Clone, PartialEq)]
pub struct HopLayer {
    pub queries: Vec<(NodeId, Timestamp)>,
    pub neighbors: Vec<Vec<Neighbor>>,
}
