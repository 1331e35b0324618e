//! Hooks shipped with the engine: negative samplers and neighbor samplers.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Hook, HookContract};
use crate::attrs::{self, Attr, AttrMap};
use crate::error::{Error, Result};
use crate::eval::NodeUniverse;
use crate::graph::{NodeId, Timestamp};
use crate::loader::MaterializedBatch;
use crate::sampling::{RecencyBuffer, TemporalAdjacency};

fn single(name: &str, attr: Attr) -> AttrMap {
    AttrMap::from([(name.to_string(), attr)])
}

/// Draws `q` uniform negatives per positive edge. The RNG is reseeded on reset.
pub struct UniformNegativesHook {
    contract: HookContract,
    universe: NodeUniverse,
    q: usize,
    seed: u64,
    rng: ChaCha8Rng,
}

impl UniformNegativesHook {
    pub fn new(universe: NodeUniverse, q: usize, seed: u64) -> Result<Self> {
        if q >= universe.len() {
            return Err(Error::Exhaustion {
                q,
                universe: universe.len(),
            });
        }
        Ok(UniformNegativesHook {
            contract: HookContract::new("uniform-negatives")
                .produces([attrs::NEGATIVES])
                .stateful(true),
            universe,
            q,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }
}

impl Hook for UniformNegativesHook {
    fn contract(&self) -> &HookContract {
        &self.contract
    }

    fn run(&mut self, batch: &MaterializedBatch) -> Result<AttrMap> {
        let lists = batch
            .dst()?
            .iter()
            .map(|&d| self.universe.draw(&mut self.rng, d, self.q))
            .collect::<Result<_>>()?;
        Ok(single(attrs::NEGATIVES, Attr::IdLists(lists)))
    }

    fn reset(&mut self) {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
    }
}

/// Where precomputed negative lists come from.
#[derive(Debug, Clone)]
pub struct NegativeSource {
    /// Edge row of the first positive the lists refer to.
    pub first_row: usize,
    pub lists: Vec<Vec<NodeId>>,
}

/// Serves fixed negatives loaded up front, one list per edge row starting
/// at `first_row`. Requires nothing beyond the built-ins.
pub struct PrecomputedNegativesHook {
    contract: HookContract,
    source: Arc<NegativeSource>,
}

impl PrecomputedNegativesHook {
    pub fn new(source: NegativeSource) -> Self {
        PrecomputedNegativesHook {
            contract: HookContract::new("precomputed-negatives").produces([attrs::NEGATIVES]),
            source: Arc::new(source),
        }
    }
}

impl Hook for PrecomputedNegativesHook {
    fn contract(&self) -> &HookContract {
        &self.contract
    }

    fn run(&mut self, batch: &MaterializedBatch) -> Result<AttrMap> {
        let s = &self.source;
        let rows = batch.edge_rows.clone();
        if rows.is_empty() {
            return Ok(single(attrs::NEGATIVES, Attr::IdLists(Vec::new())));
        }
        if rows.start < s.first_row || rows.end > s.first_row + s.lists.len() {
            return Err(Error::OutOfRange(
                "negatives",
                format!(
                    "edge rows {rows:?} not covered by lists for rows {}..{}",
                    s.first_row,
                    s.first_row + s.lists.len()
                ),
            ));
        }
        let lists = s.lists[rows.start - s.first_row..rows.end - s.first_row].to_vec();
        Ok(single(attrs::NEGATIVES, Attr::IdLists(lists)))
    }
}

/// Collects `src`, `dst` and optionally every negative as query seeds.
fn batch_seeds(batch: &MaterializedBatch, with_negatives: bool) -> Result<Vec<NodeId>> {
    let mut seeds: Vec<NodeId> = batch.src()?.to_vec();
    seeds.extend_from_slice(batch.dst()?);
    if with_negatives {
        seeds.extend(batch.negatives()?.iter().flatten());
    }
    Ok(seeds)
}

/// Most-recent neighbor sampler. Queries the buffer for the batch seeds,
/// then inserts the batch edges, so neighbors always precede the batch.
pub struct RecencyNeighborHook {
    contract: HookContract,
    buffer: RecencyBuffer,
    want: usize,
    with_negatives: bool,
}

impl RecencyNeighborHook {
    pub fn new(capacity: usize, want: usize, num_nodes: usize, with_negatives: bool) -> Result<Self> {
        if want > capacity {
            return Err(Error::Capacity { want, capacity });
        }
        let mut contract = HookContract::new("recency-neighbors")
            .produces([attrs::NEIGHBORS])
            .stateful(true);
        if with_negatives {
            contract = contract.requires([attrs::NEGATIVES]);
        }
        Ok(RecencyNeighborHook {
            contract,
            buffer: RecencyBuffer::new(capacity, num_nodes)?,
            want,
            with_negatives,
        })
    }
}

impl Hook for RecencyNeighborHook {
    fn contract(&self) -> &HookContract {
        &self.contract
    }

    fn run(&mut self, batch: &MaterializedBatch) -> Result<AttrMap> {
        let seeds = batch_seeds(batch, self.with_negatives)?;
        let lists = self.buffer.query(&seeds, self.want)?;
        let rows: Vec<usize> = batch.edge_rows.clone().collect();
        self.buffer.update(batch.src()?, batch.dst()?, batch.time()?, &rows)?;
        Ok(single(attrs::NEIGHBORS, Attr::Neighborhood { seeds, lists }))
    }

    fn reset(&mut self) {
        self.buffer.clear();
    }
}

/// Uniform historical neighbor sampler over a fixed adjacency. Each seed
/// derived from positive edge `i` is cut at that edge's timestamp.
pub struct UniformNeighborHook {
    contract: HookContract,
    adjacency: Arc<TemporalAdjacency>,
    want: usize,
    seed: u64,
    with_negatives: bool,
}

impl UniformNeighborHook {
    pub fn new(adjacency: Arc<TemporalAdjacency>, want: usize, seed: u64, with_negatives: bool) -> Self {
        let mut contract = HookContract::new("uniform-neighbors").produces([attrs::NEIGHBORS]);
        if with_negatives {
            contract = contract.requires([attrs::NEGATIVES]);
        }
        UniformNeighborHook {
            contract,
            adjacency,
            want,
            seed,
            with_negatives,
        }
    }
}

impl Hook for UniformNeighborHook {
    fn contract(&self) -> &HookContract {
        &self.contract
    }

    fn run(&mut self, batch: &MaterializedBatch) -> Result<AttrMap> {
        let time = batch.time()?;
        let seeds = batch_seeds(batch, self.with_negatives)?;
        let n = time.len();
        let mut cuts: Vec<Timestamp> = time.to_vec();
        cuts.extend_from_slice(time);
        if self.with_negatives {
            for (i, l) in batch.negatives()?.iter().enumerate() {
                cuts.extend(std::iter::repeat_n(time[i], l.len()));
            }
        }
        debug_assert_eq!(cuts.len(), seeds.len());
        debug_assert!(n * 2 <= seeds.len());
        // seeded per batch so the hook stays stateless
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (batch.edge_rows.start as u64).rotate_left(32));
        let lists = seeds
            .iter()
            .zip(&cuts)
            .map(|(&s, &cut)| self.adjacency.sample(s, cut, self.want, &mut rng))
            .collect();
        Ok(single(attrs::NEIGHBORS, Attr::Neighborhood { seeds, lists }))
    }
}
