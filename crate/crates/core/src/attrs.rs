//! Named batch attributes.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{NodeId, Timestamp};

pub const SRC: &str = "src";
pub const DST: &str = "dst";
pub const TIME: &str = "time";
pub const EDGE_FEAT: &str = "edge_feat";
pub const NODE_EVENTS: &str = "node_events";
pub const NEGATIVES: &str = "negatives";
pub const NEIGHBORS: &str = "neighbors";

/// Attributes every materialized batch starts with.
pub const BUILTINS: [&str; 5] = [SRC, DST, TIME, EDGE_FEAT, NODE_EVENTS];

pub fn builtin_names() -> Vec<String> {
    BUILTINS.iter().map(|s| s.to_string()).collect()
}

/// Row-major dense tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(rows * cols, data.len());
        Dense {
            shape: vec![rows, cols],
            data,
        }
    }
}

/// One sampled temporal neighbor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Neighbor {
    pub node: NodeId,
    pub t: Timestamp,
    /// Row of the edge in the source graph's edge columns.
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Attr {
    Ids(Vec<NodeId>),
    Times(Vec<Timestamp>),
    Dense(Dense),
    /// One id list per positive edge of the batch.
    IdLists(Vec<Vec<NodeId>>),
    NodeEvents {
        t: Vec<Timestamp>,
        node: Vec<NodeId>,
        feat: Dense,
    },
    /// Neighbor lists aligned with `seeds`.
    Neighborhood {
        seeds: Vec<NodeId>,
        lists: Vec<Vec<Neighbor>>,
    },
}

pub type AttrMap = BTreeMap<String, Attr>;

pub(crate) fn ids<'a>(attrs: &'a AttrMap, name: &str) -> Result<&'a [NodeId]> {
    match attrs.get(name) {
        Some(Attr::Ids(v)) => Ok(v),
        _ => Err(Error::Attribute(name.to_string())),
    }
}

pub(crate) fn times<'a>(attrs: &'a AttrMap, name: &str) -> Result<&'a [Timestamp]> {
    match attrs.get(name) {
        Some(Attr::Times(v)) => Ok(v),
        _ => Err(Error::Attribute(name.to_string())),
    }
}

pub(crate) fn id_lists<'a>(attrs: &'a AttrMap, name: &str) -> Result<&'a [Vec<NodeId>]> {
    match attrs.get(name) {
        Some(Attr::IdLists(v)) => Ok(v),
        _ => Err(Error::Attribute(name.to_string())),
    }
}
