//! CSV ingestion, dataset manifests and chronological splits.
//!
//! A manifest is a small `key = value` file naming the edge CSV and the
//! optional node-event, static-feature and negatives files. Relative paths
//! resolve against the manifest's directory. Node labels are arbitrary
//! strings mapped to dense ids in first-appearance order.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::LabelStream;
use crate::granularity::TimeGranularity;
use crate::graph::{
    EdgeColumns, NodeEventColumns, NodeId, StaticNodeFeatures, TemporalGraph, Timestamp,
};
use crate::hooks::NegativeSource;
use crate::loader::GraphView;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub edges: PathBuf,
    pub node_events: Option<PathBuf>,
    pub static_features: Option<PathBuf>,
    pub negatives: Option<PathBuf>,
    pub granularity: TimeGranularity,
    pub src_col: String,
    pub dst_col: String,
    pub t_col: String,
}

impl DatasetManifest {
    /// Manifest for an edge file with the default `src,dst,t` columns.
    pub fn for_edges(edges: impl Into<PathBuf>, granularity: TimeGranularity) -> Self {
        DatasetManifest {
            edges: edges.into(),
            node_events: None,
            static_features: None,
            negatives: None,
            granularity,
            src_col: "src".into(),
            dst_col: "dst".into(),
            t_col: "t".into(),
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut kv: HashMap<String, String> = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Manifest(format!("line {}: expected `key = value`", n + 1)))?;
            let k = k.trim().to_string();
            const KEYS: [&str; 8] = [
                "edges", "node_events", "static_features", "negatives", "granularity", "src_col",
                "dst_col", "t_col",
            ];
            if !KEYS.contains(&k.as_str()) {
                return Err(Error::Manifest(format!("line {}: unknown key `{k}`", n + 1)));
            }
            kv.insert(k, v.trim().trim_matches('"').to_string());
        }
        let path = |k: &str| kv.get(k).map(|p| base.join(p));
        let edges = path("edges").ok_or_else(|| Error::Manifest("missing `edges`".into()))?;
        let granularity = match kv.get("granularity") {
            Some(g) => g.parse()?,
            None => TimeGranularity::Second,
        };
        let col = |k: &str, d: &str| kv.get(k).cloned().unwrap_or_else(|| d.to_string());
        Ok(DatasetManifest {
            edges,
            node_events: path("node_events"),
            static_features: path("static_features"),
            negatives: path("negatives"),
            granularity,
            src_col: col("src_col", "src"),
            dst_col: col("dst_col", "dst"),
            t_col: col("t_col", "t"),
        })
    }
}

/// Bidirectional map between string node labels and dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdMap {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn intern(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len() as NodeId;
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn get(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: NodeId) -> Option<&str> {
        self.labels.get(id as usize).map(String::as_str)
    }
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Schema {
            path: path.to_path_buf(),
            column: name.to_string(),
        })
}

fn open(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn row_error(path: &Path, record: &csv::StringRecord, message: String) -> Error {
    Error::Row {
        path: path.to_path_buf(),
        line: record.position().map_or(0, |p| p.line()),
        message,
    }
}

fn parse_time(path: &Path, rec: &csv::StringRecord, i: usize) -> Result<Timestamp> {
    let raw = &rec[i];
    raw.parse::<Timestamp>()
        .map_err(|_| row_error(path, rec, format!("unparsable timestamp `{raw}`")))
}

fn parse_feats(path: &Path, rec: &csv::StringRecord, cols: &[usize], out: &mut Vec<f64>) -> Result<()> {
    for &c in cols {
        let raw = &rec[c];
        let v = raw
            .parse::<f64>()
            .map_err(|_| row_error(path, rec, format!("unparsable feature `{raw}`")))?;
        out.push(v);
    }
    Ok(())
}

/// Loads the dataset described by `manifest`.
pub fn load_csv(manifest: &DatasetManifest) -> Result<(TemporalGraph, IdMap)> {
    let mut ids = IdMap::new();

    let path = manifest.edges.as_path();
    let mut rdr = open(path)?;
    let headers = rdr.headers()?.clone();
    let src_i = column(&headers, &manifest.src_col, path)?;
    let dst_i = column(&headers, &manifest.dst_col, path)?;
    let t_i = column(&headers, &manifest.t_col, path)?;
    let feat_cols: Vec<usize> = (0..headers.len())
        .filter(|c| ![src_i, dst_i, t_i].contains(c))
        .collect();
    let mut edges = EdgeColumns::with_dim(feat_cols.len());
    let mut rec = csv::StringRecord::new();
    while rdr.read_record(&mut rec)? {
        let t = parse_time(path, &rec, t_i)?;
        let src = ids.intern(&rec[src_i]);
        let dst = ids.intern(&rec[dst_i]);
        edges.t.push(t);
        edges.src.push(src);
        edges.dst.push(dst);
        parse_feats(path, &rec, &feat_cols, &mut edges.feat)?;
    }

    let mut nodes = NodeEventColumns::default();
    if let Some(path) = manifest.node_events.as_deref() {
        let mut rdr = open(path)?;
        let headers = rdr.headers()?.clone();
        let node_i = column(&headers, "node", path)?;
        let t_i = column(&headers, &manifest.t_col, path)?;
        let feat_cols: Vec<usize> = (0..headers.len()).filter(|c| ![node_i, t_i].contains(c)).collect();
        nodes.feat_dim = feat_cols.len();
        while rdr.read_record(&mut rec)? {
            let t = parse_time(path, &rec, t_i)?;
            nodes.t.push(t);
            nodes.node.push(ids.intern(&rec[node_i]));
            parse_feats(path, &rec, &feat_cols, &mut nodes.feat)?;
        }
    }

    let static_feats = match manifest.static_features.as_deref() {
        Some(path) => Some(load_static(path, &ids)?),
        None => None,
    };

    let graph = TemporalGraph::from_columns(edges, nodes, manifest.granularity, static_feats)?;
    Ok((graph, ids))
}

fn load_static(path: &Path, ids: &IdMap) -> Result<StaticNodeFeatures> {
    let mut rdr = open(path)?;
    let headers = rdr.headers()?.clone();
    let node_i = column(&headers, "node", path)?;
    let feat_cols: Vec<usize> = (0..headers.len()).filter(|&c| c != node_i).collect();
    let dim = feat_cols.len();
    let mut data = vec![0.0; ids.len() * dim];
    let mut seen = vec![false; ids.len()];
    let mut rec = csv::StringRecord::new();
    let mut row = Vec::with_capacity(dim);
    while rdr.read_record(&mut rec)? {
        let id = ids
            .get(&rec[node_i])
            .ok_or_else(|| row_error(path, &rec, format!("node `{}` appears in no event", &rec[node_i])))?;
        row.clear();
        parse_feats(path, &rec, &feat_cols, &mut row)?;
        data[id as usize * dim..(id as usize + 1) * dim].copy_from_slice(&row);
        seen[id as usize] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::Validation(format!(
            "{}: no static features for node `{}`",
            path.display(),
            ids.label(missing as NodeId).unwrap_or("?")
        )));
    }
    StaticNodeFeatures::new(ids.len(), dim, data)
}

fn label(ids: &IdMap, id: NodeId) -> String {
    ids.label(id).map_or_else(|| id.to_string(), str::to_string)
}

/// Writes the edge columns as `src,dst,t,f0,..` using the id map's labels.
pub fn write_edges_csv(graph: &TemporalGraph, ids: &IdMap, path: &Path) -> Result<()> {
    let edges = graph.edges();
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["src".to_string(), "dst".into(), "t".into()];
    header.extend((0..edges.feat_dim).map(|i| format!("f{i}")));
    w.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for i in 0..edges.len() {
        row.clear();
        row.push(label(ids, edges.src[i]));
        row.push(label(ids, edges.dst[i]));
        row.push(edges.t[i].to_string());
        row.extend(edges.feat_row(i).iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Writes node events as `node,t,f0,..`.
pub fn write_node_events_csv(graph: &TemporalGraph, ids: &IdMap, path: &Path) -> Result<()> {
    let nodes = graph.node_events();
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["node".to_string(), "t".into()];
    header.extend((0..nodes.feat_dim).map(|i| format!("f{i}")));
    w.write_record(&header)?;
    for i in 0..nodes.len() {
        let mut row = vec![label(ids, nodes.node[i]), nodes.t[i].to_string()];
        row.extend(nodes.feat_row(i).iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Writes the edges of a view (e.g. one split) as CSV.
pub fn write_view_csv(view: &GraphView<'_>, ids: &IdMap, path: &Path) -> Result<()> {
    let edges = view.graph().edges();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut header = vec!["src".to_string(), "dst".into(), "t".into()];
    header.extend((0..edges.feat_dim).map(|i| format!("f{i}")));
    w.write_record(&header)?;
    for i in view.edge_rows() {
        let mut row = vec![label(ids, edges.src[i]), label(ids, edges.dst[i]), edges.t[i].to_string()];
        row.extend(edges.feat_row(i).iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    let mut inner = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    inner.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a negatives file: line `i` lists the negative destination labels of
/// positive edge `first_row + i`.
pub fn load_negatives(path: &Path, ids: &IdMap, first_row: usize) -> Result<NegativeSource> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lists = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let list = line
            .split_whitespace()
            .map(|l| {
                ids.get(l).ok_or_else(|| Error::Row {
                    path: path.to_path_buf(),
                    line: n as u64 + 1,
                    message: format!("unknown node `{l}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        lists.push(list);
    }
    Ok(NegativeSource { first_row, lists })
}

/// Reads node labels in long form, columns `t,node,target,weight`: one row
/// per non-zero entry of the label vector of `node` at `t`. Label vectors are
/// indexed by node id, so targets must be known nodes.
pub fn load_labels(path: &Path, ids: &IdMap) -> Result<LabelStream> {
    let mut rdr = open(path)?;
    let headers = rdr.headers()?.clone();
    let t_i = column(&headers, "t", path)?;
    let node_i = column(&headers, "node", path)?;
    let target_i = column(&headers, "target", path)?;
    let weight_i = column(&headers, "weight", path)?;
    let lookup = |rec: &csv::StringRecord, i: usize| {
        ids.get(&rec[i])
            .ok_or_else(|| row_error(path, rec, format!("unknown node `{}`", &rec[i])))
    };
    let mut grouped: BTreeMap<(Timestamp, NodeId), Vec<f64>> = BTreeMap::new();
    let mut rec = csv::StringRecord::new();
    while rdr.read_record(&mut rec)? {
        let t = parse_time(path, &rec, t_i)?;
        let node = lookup(&rec, node_i)?;
        let target = lookup(&rec, target_i)?;
        let mut w = Vec::with_capacity(1);
        parse_feats(path, &rec, &[weight_i], &mut w)?;
        if w[0] < 0.0 {
            return Err(row_error(path, &rec, format!("negative weight {}", w[0])));
        }
        grouped.entry((t, node)).or_insert_with(|| vec![0.0; ids.len()])[target as usize] += w[0];
    }
    let mut labels = LabelStream::new(ids.len());
    for ((t, node), v) in grouped {
        labels.push(t, node, v)?;
    }
    Ok(labels)
}

/// Resolved chronological split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub ratios: [f64; 3],
    /// First timestamp of the validation and test splits.
    pub boundaries: [Timestamp; 2],
}

pub const DEFAULT_RATIOS: [f64; 3] = [0.70, 0.15, 0.15];

#[derive(Debug, Clone)]
pub struct Split<'g> {
    pub spec: SplitSpec,
    pub train: GraphView<'g>,
    pub val: GraphView<'g>,
    pub test: GraphView<'g>,
}

pub fn parse_ratios(s: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Validation(format!("invalid ratios `{s}`")))?;
    <[f64; 3]>::try_from(parts).map_err(|_| Error::Validation(format!("expected three ratios, got `{s}`")))
}

/// Splits the edges at `floor(ratio * num_edges)` boundaries, each moved
/// forward past any timestamp it would cut through.
pub fn chronological_split(graph: &TemporalGraph, ratios: [f64; 3]) -> Result<Split<'_>> {
    if ratios.iter().any(|r| r.is_nan() || *r <= 0.0) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
        return Err(Error::Validation(format!(
            "split ratios {ratios:?} must be positive and sum to 1"
        )));
    }
    let t = &graph.edges().t;
    let n = t.len();
    let cut = |frac: f64| -> usize {
        let b = ((frac * n as f64) + 1e-9).floor() as usize;
        let b = b.min(n);
        if b == 0 || b == n || t[b - 1] != t[b] {
            b
        } else {
            graph.lower_bound(t[b - 1] + 1)
        }
    };
    let b1 = cut(ratios[0]);
    let b2 = cut(ratios[0] + ratios[1]).max(b1);
    if b1 == 0 || b2 == b1 || b2 >= n {
        return Err(Error::DegenerateSplit(format!(
            "boundaries at rows {b1} and {b2} of {n} leave an empty split"
        )));
    }
    let full = GraphView::full(graph);
    let (lo, hi) = full.interval();
    let (t1, t2) = (t[b1], t[b2]);
    Ok(Split {
        spec: SplitSpec {
            ratios,
            boundaries: [t1, t2],
        },
        train: full.slice(lo, t1)?,
        val: full.slice(t1, t2)?,
        test: full.slice(t2, hi)?,
    })
}
