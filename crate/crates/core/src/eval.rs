//! Non-neural baselines, negative sampling and ranking metrics.

use std::collections::{HashMap, HashSet};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{pair_key, NodeId, Timestamp};
use crate::hooks::HookManager;
use crate::loader::{BatchSpec, DataLoader, GraphView};

/// Memorizes every `(src, dst)` pair seen so far (unlimited memory).
#[derive(Debug, Clone, Default)]
pub struct EdgeBank {
    pairs: HashSet<u64>,
}

impl EdgeBank {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, src: NodeId, dst: NodeId) -> bool {
        self.pairs.contains(&pair_key(src, dst))
    }

    /// 1.0 for remembered pairs, 0.0 otherwise.
    pub fn predict(&self, queries: &[(NodeId, NodeId)]) -> Vec<f64> {
        queries
            .iter()
            .map(|&(s, d)| if self.contains(s, d) { 1.0 } else { 0.0 })
            .collect()
    }

    pub fn update(&mut self, src: &[NodeId], dst: &[NodeId]) {
        self.pairs.extend(src.iter().zip(dst).map(|(&s, &d)| pair_key(s, d)));
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
    }
}

/// Time-stamped label vectors per node.
#[derive(Debug, Clone)]
pub struct LabelStream {
    dim: usize,
    per_node: HashMap<NodeId, Vec<(Timestamp, Vec<f64>)>>,
}

impl LabelStream {
    pub fn new(dim: usize) -> Self {
        LabelStream {
            dim,
            per_node: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn push(&mut self, t: Timestamp, node: NodeId, label: Vec<f64>) -> Result<()> {
        if label.len() != self.dim {
            return Err(Error::DimensionMismatch {
                what: "label",
                expected: self.dim,
                found: label.len(),
                index: 0,
            });
        }
        let list = self.per_node.entry(node).or_default();
        // keep each node's labels sorted; equal times keep arrival order
        let at = list.partition_point(|(lt, _)| *lt <= t);
        list.insert(at, (t, label));
        Ok(())
    }

    /// Nodes with at least one label.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.per_node.keys().copied()
    }

    /// Every stored `(node, t, label)`, each node's labels in time order.
    pub fn observations(&self) -> impl Iterator<Item = (NodeId, Timestamp, &[f64])> + '_ {
        self.per_node
            .iter()
            .flat_map(|(&n, list)| list.iter().map(move |(t, l)| (n, *t, l.as_slice())))
    }

    /// Most recent label of `node` strictly before `t`.
    pub fn latest_before(&self, node: NodeId, t: Timestamp) -> Option<&[f64]> {
        let list = self.per_node.get(&node)?;
        let i = list.partition_point(|(lt, _)| *lt < t);
        (i > 0).then(|| list[i - 1].1.as_slice())
    }
}

/// Predicts the node's most recent observed label, or zeros if none.
pub fn persistent_forecast(history: &LabelStream, node: NodeId, t: Timestamp) -> Vec<f64> {
    history
        .latest_before(node, t)
        .map_or_else(|| vec![0.0; history.dim()], <[f64]>::to_vec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastSummary {
    pub mean_ndcg: f64,
    pub queries: usize,
}

/// Scores persistent forecasts for every label observed at or after `from`
/// with NDCG@k. Each forecast only sees labels strictly earlier than its
/// query, so the whole stream can be passed in.
pub fn persistent_forecast_ndcg(labels: &LabelStream, from: Timestamp, k: usize) -> Result<ForecastSummary> {
    let mut total = 0.0;
    let mut queries = 0;
    for (node, t, truth) in labels.observations().filter(|&(_, t, _)| t >= from) {
        total += ndcg_at_k(&persistent_forecast(labels, node, t), truth, k)?;
        queries += 1;
    }
    Ok(ForecastSummary {
        mean_ndcg: if queries == 0 { 0.0 } else { total / queries as f64 },
        queries,
    })
}

/// Reciprocal rank of the positive among the negatives, ties averaged:
/// `rank = 1 + #greater + #equal / 2`.
pub fn mrr(pos_score: f64, neg_scores: &[f64]) -> Result<f64> {
    if !pos_score.is_finite() || neg_scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Validation("scores must be finite".into()));
    }
    let greater = neg_scores.iter().filter(|&&n| n > pos_score).count();
    let equal = neg_scores.iter().filter(|&&n| n == pos_score).count();
    let rank = 1.0 + greater as f64 + equal as f64 / 2.0;
    Ok(1.0 / rank)
}

/// NDCG@k with linear gain. Ties in `pred_scores` keep index order.
pub fn ndcg_at_k(pred_scores: &[f64], true_relevance: &[f64], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Validation("k must be at least 1".into()));
    }
    if pred_scores.len() != true_relevance.len() {
        return Err(Error::Validation(format!(
            "prediction length {} differs from relevance length {}",
            pred_scores.len(),
            true_relevance.len()
        )));
    }
    if true_relevance.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::Validation("relevance must be finite and non-negative".into()));
    }
    if pred_scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Validation("prediction scores must not be NaN".into()));
    }
    let dcg = |order: &[usize]| -> f64 {
        order
            .iter()
            .take(k)
            .enumerate()
            .map(|(i, &j)| true_relevance[j] / ((i + 2) as f64).log2())
            .sum()
    };
    let mut by_pred: Vec<usize> = (0..pred_scores.len()).collect();
    by_pred.sort_by(|&a, &b| pred_scores[b].total_cmp(&pred_scores[a]));
    let mut ideal: Vec<usize> = (0..true_relevance.len()).collect();
    ideal.sort_by(|&a, &b| true_relevance[b].total_cmp(&true_relevance[a]));
    let idcg = dcg(&ideal);
    if idcg == 0.0 {
        return Ok(0.0);
    }
    Ok(dcg(&by_pred) / idcg)
}

/// `label[i] = 1` iff snapshot `i + 1` has strictly more edges than snapshot `i`.
pub fn growth_labels(counts: &[usize]) -> Vec<u8> {
    counts.windows(2).map(|w| u8::from(w[1] > w[0])).collect()
}

/// Candidate negative destinations, one list per positive edge.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NegativeSet {
    pub lists: Vec<Vec<NodeId>>,
}

/// Sorted, de-duplicated set of nodes negatives are drawn from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeUniverse(Vec<NodeId>);

impl NodeUniverse {
    pub fn new(mut nodes: Vec<NodeId>) -> Result<Self> {
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.is_empty() {
            return Err(Error::Validation("node universe is empty".into()));
        }
        Ok(NodeUniverse(nodes))
    }

    /// Nodes `0..n`.
    pub fn dense(n: usize) -> Result<Self> {
        Self::new((0..n as NodeId).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `q` distinct nodes other than `exclude`, uniformly at random.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, exclude: NodeId, q: usize) -> Result<Vec<NodeId>> {
        if q >= self.0.len() {
            return Err(Error::Exhaustion {
                q,
                universe: self.0.len(),
            });
        }
        let out = match self.0.binary_search(&exclude) {
            Ok(p) => index::sample(rng, self.0.len() - 1, q)
                .into_iter()
                .map(|i| self.0[if i >= p { i + 1 } else { i }])
                .collect(),
            Err(_) => index::sample(rng, self.0.len(), q)
                .into_iter()
                .map(|i| self.0[i])
                .collect(),
        };
        Ok(out)
    }
}

pub fn sample_uniform_negatives(
    rng_seed: u64,
    positives: &[(NodeId, NodeId, Timestamp)],
    universe: &NodeUniverse,
    q: usize,
) -> Result<NegativeSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let lists = positives
        .iter()
        .map(|&(_, dst, _)| universe.draw(&mut rng, dst, q))
        .collect::<Result<_>>()?;
    Ok(NegativeSet { lists })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankingSummary {
    pub mean_mrr: f64,
    pub queries: usize,
}

/// One-vs-many EdgeBank evaluation over `view`: every batch is scored
/// against its `negatives` attribute before its edges enter the bank.
pub fn edgebank_replay(
    bank: &mut EdgeBank,
    view: &GraphView<'_>,
    spec: BatchSpec,
    manager: &mut HookManager,
    key: &str,
) -> Result<RankingSummary> {
    let mut total = 0.0;
    let mut queries = 0;
    for batch in DataLoader::new(view, spec, manager, key)? {
        let batch = batch?;
        let (src, dst) = (batch.src()?, batch.dst()?);
        let negatives = batch.negatives()?;
        if negatives.len() != src.len() {
            return Err(Error::Validation(format!(
                "batch has {} positives but {} negative lists",
                src.len(),
                negatives.len()
            )));
        }
        for i in 0..src.len() {
            let pos = bank.predict(&[(src[i], dst[i])])[0];
            let queries_i: Vec<_> = negatives[i].iter().map(|&n| (src[i], n)).collect();
            total += mrr(pos, &bank.predict(&queries_i))?;
            queries += 1;
        }
        bank.update(src, dst);
    }
    Ok(RankingSummary {
        mean_mrr: if queries == 0 { 0.0 } else { total / queries as f64 },
        queries,
    })
}
