//! Straightforward dictionary-based discretization.
//!
//! Groups every event into a hash map keyed by `(bucket, src, dst)` (or
//! `(bucket, node)`), collects owned feature vectors per class and reduces
//! them afterwards. It shares no code with [`crate::discretize`] beyond the
//! granularity tick table and is used as the reference in tests and in the
//! discretization benchmark.

use std::collections::HashMap;

use crate::discretize::ReductionOp;
use crate::error::{Error, Result};
use crate::graph::{EdgeEvent, NodeEvent, TemporalGraph, Timestamp};
use crate::granularity::TimeGranularity;

/// Discretized events in canonical `(bucket, src, dst)` / `(bucket, node)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveOutput {
    pub edges: Vec<EdgeEvent>,
    pub node_events: Vec<NodeEvent>,
}

pub fn discretize(
    graph: &TemporalGraph,
    coarse: TimeGranularity,
    reduce: ReductionOp,
) -> Result<NaiveOutput> {
    let native = graph.granularity();
    let native_secs = native.seconds().ok_or(Error::ExcludedGranularity(native))? as u128;
    let coarse_secs = coarse.seconds().ok_or(Error::ExcludedGranularity(coarse))? as u128;
    if coarse_secs < native_secs {
        return Err(Error::GranularityOrder { native, coarse });
    }

    let edges = graph.edges();
    let nodes = graph.node_events();
    let anchor = edges.t.iter().chain(&nodes.t).copied().min().unwrap_or(0);
    let bucket = |t: Timestamp| -> i64 {
        ((t - anchor) as u128 * native_secs / coarse_secs) as i64
    };

    let mut edge_classes: HashMap<(i64, u32, u32), Vec<Vec<f64>>> = HashMap::new();
    for i in 0..edges.len() {
        let e = edges.event(i);
        edge_classes
            .entry((bucket(e.t), e.src, e.dst))
            .or_default()
            .push(e.feat);
    }
    let mut node_classes: HashMap<(i64, u32), Vec<Vec<f64>>> = HashMap::new();
    for i in 0..nodes.len() {
        let e = nodes.event(i);
        node_classes
            .entry((bucket(e.t), e.node))
            .or_default()
            .push(e.feat);
    }

    let mut out_edges: Vec<EdgeEvent> = edge_classes
        .into_iter()
        .map(|((k, src, dst), feats)| -> Result<EdgeEvent> {
            Ok(EdgeEvent {
                t: k,
                src,
                dst,
                feat: reduce_class(reduce, &feats, "edge")?,
            })
        })
        .collect::<Result<_>>()?;
    out_edges.sort_by_key(|e| (e.t, e.src, e.dst));

    let mut out_nodes: Vec<NodeEvent> = node_classes
        .into_iter()
        .map(|((k, node), feats)| -> Result<NodeEvent> {
            Ok(NodeEvent {
                t: k,
                node,
                feat: reduce_class(reduce, &feats, "node")?,
            })
        })
        .collect::<Result<_>>()?;
    out_nodes.sort_by_key(|e| (e.t, e.node));

    Ok(NaiveOutput {
        edges: out_edges,
        node_events: out_nodes,
    })
}

fn reduce_class(reduce: ReductionOp, feats: &[Vec<f64>], what: &'static str) -> Result<Vec<f64>> {
    let dim = feats[0].len();
    let needs = matches!(reduce, ReductionOp::Sum | ReductionOp::Mean | ReductionOp::Max);
    if needs && dim == 0 {
        return Err(Error::ReductionRequiresFeatures(reduce.as_str(), what));
    }
    let mut out = vec![0.0; dim];
    match reduce {
        ReductionOp::Count => return Ok(vec![feats.len() as f64]),
        ReductionOp::First => return Ok(feats[0].clone()),
        ReductionOp::Last => return Ok(feats[feats.len() - 1].clone()),
        ReductionOp::Sum => {
            for f in feats {
                for j in 0..dim {
                    out[j] += f[j];
                }
            }
        }
        ReductionOp::Mean => {
            for f in feats {
                for j in 0..dim {
                    out[j] += f[j];
                }
            }
            for v in &mut out {
                *v /= feats.len() as f64;
            }
        }
        ReductionOp::Max => {
            out = feats[0].clone();
            for f in &feats[1..] {
                for j in 0..dim {
                    if f[j] > out[j] {
                        out[j] = f[j];
                    }
                }
            }
        }
    }
    Ok(out)
}
