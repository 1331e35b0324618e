use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use tgraph_bench::{lastfm_scale, random_graph};
use tgraph_core::{
    discretize, iterate_by_events, iterate_by_time, naive, GraphView, RecencyBuffer, ReductionOp,
    TemporalAdjacency, TimeGranularity,
};

fn discretization(c: &mut Criterion) {
    let g = lastfm_scale();
    let mut group = c.benchmark_group("discretize");
    group.sample_size(10);
    group.throughput(Throughput::Elements(g.num_edges() as u64));
    for coarse in [TimeGranularity::Hour, TimeGranularity::Day] {
        group.bench_with_input(BenchmarkId::new("engine", coarse), &coarse, |b, &c| {
            b.iter(|| discretize(black_box(&g), c, ReductionOp::Last).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("naive", coarse), &coarse, |b, &c| {
            b.iter(|| naive::discretize(black_box(&g), c, ReductionOp::Last).unwrap())
        });
    }
    group.finish();
}

fn iteration(c: &mut Criterion) {
    let g = random_graph(200_000, 10_000, 30 * 86_400, 1);
    let view = GraphView::full(&g);
    let mut group = c.benchmark_group("iterate");
    group.throughput(Throughput::Elements(g.num_edges() as u64));
    group.bench_function("by_events_200", |b| {
        b.iter(|| iterate_by_events(&view, 200).unwrap().map(|s| s.num_edges()).sum::<usize>())
    });
    group.bench_function("by_time_hour", |b| {
        b.iter(|| iterate_by_time(&view, TimeGranularity::Hour).unwrap().map(|s| s.num_edges()).sum::<usize>())
    });
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let g = random_graph(200_000, 10_000, 30 * 86_400, 2);
    let e = g.edges();
    let rows: Vec<usize> = (0..g.num_edges()).collect();
    let mut group = c.benchmark_group("sampling");
    group.throughput(Throughput::Elements(g.num_edges() as u64));
    for k in [10, 64] {
        group.bench_with_input(BenchmarkId::new("recency_update", k), &k, |b, &k| {
            b.iter(|| {
                let mut buf = RecencyBuffer::new(k, 10_000).unwrap();
                for chunk in rows.chunks(200) {
                    let r = chunk[0]..chunk[chunk.len() - 1] + 1;
                    buf.update(&e.src[r.clone()], &e.dst[r.clone()], &e.t[r], chunk).unwrap();
                }
                buf
            })
        });
    }
    let mut buf = RecencyBuffer::new(20, 10_000).unwrap();
    buf.update(&e.src, &e.dst, &e.t, &rows).unwrap();
    let seeds: Vec<u32> = e.src[..2_000].to_vec();
    group.throughput(Throughput::Elements(seeds.len() as u64));
    group.bench_function("recency_query_2000x20", |b| b.iter(|| buf.query(black_box(&seeds), 20).unwrap()));
    let adj = TemporalAdjacency::from_graph(&g);
    let cut = e.t[e.len() / 2];
    group.bench_function("uniform_query_2000x20", |b| {
        b.iter(|| adj.uniform_query(black_box(&seeds), cut, 20, 3))
    });
    group.finish();
}

criterion_group!(benches, discretization, iteration, sampling);
criterion_main!(benches);
