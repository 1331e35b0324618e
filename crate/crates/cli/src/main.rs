use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand};
use tgraph_core::hooks::{PrecomputedNegativesHook, UniformNegativesHook};
use tgraph_core::io::{load_negatives, parse_ratios, write_edges_csv, write_node_events_csv, write_view_csv};
use tgraph_core::{
    chronological_split, discretize, edgebank_replay, graph_stats, growth_labels, iterate_by_time,
    load_csv, naive, BatchSpec, DatasetManifest, EdgeBank, GraphView, HookHandle, HookManager,
    IdMap, NodeUniverse, ReductionOp, TemporalGraph, TimeGranularity,
};

#[derive(Parser)]
#[command(name = "tgraph", version, about = "Temporal graph toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Dataset {
    /// Dataset manifest (`key = value` lines; see README)
    manifest: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Print dataset statistics
    Stats {
        #[command(flatten)]
        data: Dataset,
        /// Split ratios; adds the surprise of the test split
        #[arg(long, value_name = "R,R,R")]
        split: Option<String>,
    },
    /// Coarsen timestamps and reduce duplicate events per bucket
    Discretize {
        #[command(flatten)]
        data: Dataset,
        #[arg(long)]
        granularity: TimeGranularity,
        #[arg(long, default_value = "last")]
        reduce: ReductionOp,
        /// Output edge CSV; node events, if any, go next to it as `<stem>.nodes.csv`
        #[arg(long)]
        out: PathBuf,
    },
    /// Write chronological train/val/test edge CSVs
    Split {
        #[command(flatten)]
        data: Dataset,
        #[arg(long, default_value = "0.70,0.15,0.15")]
        ratios: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Evaluate the EdgeBank baseline with one-vs-many MRR
    Edgebank {
        #[command(flatten)]
        data: Dataset,
        #[arg(long, default_value = "0.70,0.15,0.15")]
        ratios: String,
        /// Negatives for the test edges, one line per edge (overrides the manifest)
        #[arg(long, conflicts_with = "uniform_negatives")]
        negatives: Option<PathBuf>,
        /// Negatives for the validation edges, one line per edge
        #[arg(long, conflicts_with = "uniform_negatives")]
        val_negatives: Option<PathBuf>,
        /// Draw this many uniform negatives per edge instead of reading a file
        #[arg(long, value_name = "Q")]
        uniform_negatives: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        batch_size: usize,
    },
    /// Per-snapshot edge counts and next-snapshot growth labels
    GrowthLabels {
        #[command(flatten)]
        data: Dataset,
        #[arg(long, default_value = "day")]
        granularity: TimeGranularity,
    },
    /// Time discretization against the naive dictionary implementation
    BenchDiscretize {
        #[command(flatten)]
        data: Dataset,
        #[arg(long, default_value = "hour")]
        granularity: TimeGranularity,
        #[arg(long, default_value = "last")]
        reduce: ReductionOp,
    },
}

fn load(data: &Dataset) -> Result<(DatasetManifest, TemporalGraph, IdMap)> {
    let manifest = DatasetManifest::from_file(&data.manifest)?;
    let (graph, ids) = load_csv(&manifest)?;
    Ok((manifest, graph, ids))
}

fn elapsed_line(start: Instant) {
    println!("# time: {:.3} s", start.elapsed().as_secs_f64());
}

fn stats(data: &Dataset, split: Option<&str>) -> Result<()> {
    let start = Instant::now();
    let (_, graph, _) = load(data)?;
    let split_time = match split {
        Some(r) => Some(chronological_split(&graph, parse_ratios(r)?)?.spec.boundaries[1]),
        None => None,
    };
    let s = graph_stats(&graph, split_time)?;
    println!("nodes: {}", s.num_nodes);
    println!("edges: {}", s.num_edges);
    println!("node events: {}", s.num_node_events);
    println!("unique edges: {}", s.num_unique_edges);
    println!("unique steps: {}", s.num_unique_steps);
    if let Some(x) = s.surprise {
        println!("surprise: {x:.4}");
    }
    elapsed_line(start);
    Ok(())
}

fn nodes_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.nodes.csv"))
}

fn run_discretize(data: &Dataset, granularity: TimeGranularity, reduce: ReductionOp, out: &Path) -> Result<()> {
    let (_, graph, ids) = load(data)?;
    let start = Instant::now();
    let d = discretize(&graph, granularity, reduce)?;
    let took = start.elapsed();
    write_edges_csv(&d.graph, &ids, out)?;
    if d.graph.num_node_events() > 0 {
        write_node_events_csv(&d.graph, &ids, &nodes_path(out))?;
    }
    println!("buckets: {}", d.num_buckets());
    println!("edges: {}", d.graph.num_edges());
    println!("node events: {}", d.graph.num_node_events());
    if let Some(origin) = d.origin {
        println!("anchor: {}", origin.anchor);
    }
    println!("# time: {:.3} s", took.as_secs_f64());
    Ok(())
}

fn split(data: &Dataset, ratios: &str, out_dir: &Path) -> Result<()> {
    let (_, graph, ids) = load(data)?;
    let s = chronological_split(&graph, parse_ratios(ratios)?)?;
    std::fs::create_dir_all(out_dir).map_err(|e| anyhow!("creating {}: {e}", out_dir.display()))?;
    for (name, view) in [("train", &s.train), ("val", &s.val), ("test", &s.test)] {
        write_view_csv(view, &ids, &out_dir.join(format!("{name}.csv")))?;
        println!("{name}: {} edges from t={}", view.edge_rows().len(), view.interval().0);
    }
    Ok(())
}

struct NegativeOptions {
    test: Option<PathBuf>,
    val: Option<PathBuf>,
    uniform: Option<usize>,
    seed: u64,
}

fn negatives_hook(
    view: &GraphView<'_>,
    file: Option<&Path>,
    ids: &IdMap,
    opts: &NegativeOptions,
) -> Result<Option<HookHandle>> {
    if let Some(path) = file {
        let source = load_negatives(path, ids, view.edge_rows().start)?;
        if source.lists.len() != view.edge_rows().len() {
            bail!(
                "{}: {} lines for {} edges",
                path.display(),
                source.lists.len(),
                view.edge_rows().len()
            );
        }
        return Ok(Some(HookHandle::new(PrecomputedNegativesHook::new(source))));
    }
    match opts.uniform {
        Some(q) => {
            let universe = NodeUniverse::dense(view.graph().node_id_bound())?;
            Ok(Some(HookHandle::new(UniformNegativesHook::new(universe, q, opts.seed)?)))
        }
        None => Ok(None),
    }
}

fn edgebank(data: &Dataset, ratios: &str, mut opts: NegativeOptions, batch_size: usize) -> Result<()> {
    let start = Instant::now();
    let (manifest, graph, ids) = load(data)?;
    let s = chronological_split(&graph, parse_ratios(ratios)?)?;
    if opts.test.is_none() && opts.uniform.is_none() {
        opts.test = manifest.negatives.clone();
    }
    if opts.test.is_none() && opts.val.is_none() && opts.uniform.is_none() {
        // no negatives anywhere: fall back to uniform sampling
        opts.uniform = Some(100);
    }
    let spec = BatchSpec::ByEvents(batch_size);
    let mut bank = EdgeBank::new();
    let rows = s.train.edge_rows();
    bank.update(&graph.edges().src[rows.clone()], &graph.edges().dst[rows]);

    let mut hooks = HookManager::new();
    for (key, view, file) in [("val", &s.val, &opts.val), ("test", &s.test, &opts.test)] {
        match negatives_hook(view, file.as_deref(), &ids, &opts)? {
            Some(hook) => {
                hooks.register(key, hook)?;
                let r = edgebank_replay(&mut bank, view, spec, &mut hooks, key)?;
                println!("{key} mrr: {:.4} ({} queries)", r.mean_mrr, r.queries);
            }
            None => {
                // still replay the edges so the bank sees them before the next split
                let rows = view.edge_rows();
                bank.update(&graph.edges().src[rows.clone()], &graph.edges().dst[rows]);
                println!("{key} mrr: n/a (no negatives)");
            }
        }
    }
    println!("bank size: {}", bank.len());
    elapsed_line(start);
    Ok(())
}

fn growth(data: &Dataset, granularity: TimeGranularity) -> Result<()> {
    let (_, graph, _) = load(data)?;
    let counts: Vec<usize> = iterate_by_time(&GraphView::full(&graph), granularity)?
        .map(|b| b.num_edges())
        .collect();
    let labels = growth_labels(&counts);
    let join = |v: Vec<String>| v.join(" ");
    println!("counts: {}", join(counts.iter().map(usize::to_string).collect()));
    println!("labels: {}", join(labels.iter().map(u8::to_string).collect()));
    Ok(())
}

fn bench(data: &Dataset, granularity: TimeGranularity, reduce: ReductionOp) -> Result<()> {
    let (_, graph, _) = load(data)?;
    let t = Instant::now();
    let engine = discretize(&graph, granularity, reduce)?;
    let engine_s = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let oracle = naive::discretize(&graph, granularity, reduce)?;
    let naive_s = t.elapsed().as_secs_f64();
    if engine.graph.num_edges() != oracle.edges.len() || engine.graph.num_node_events() != oracle.node_events.len() {
        bail!("engine and naive outputs differ in size");
    }
    println!("events: {}", graph.num_edges() + graph.num_node_events());
    println!("engine: {engine_s:.4} s");
    println!("naive: {naive_s:.4} s");
    println!("speedup: {:.1}x", naive_s / engine_s.max(1e-9));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats { data, split } => stats(&data, split.as_deref()),
        Command::Discretize { data, granularity, reduce, out } => run_discretize(&data, granularity, reduce, &out),
        Command::Split { data, ratios, out_dir } => split(&data, &ratios, &out_dir),
        Command::Edgebank { data, ratios, negatives, val_negatives, uniform_negatives, seed, batch_size } => {
            let opts = NegativeOptions {
                test: negatives,
                val: val_negatives,
                uniform: uniform_negatives,
                seed,
            };
            edgebank(&data, &ratios, opts, batch_size)
        }
        Command::GrowthLabels { data, granularity } => growth(&data, granularity),
        Command::BenchDiscretize { data, granularity, reduce } => bench(&data, granularity, reduce),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // library errors already spell out their cause
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
