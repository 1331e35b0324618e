mod common;

use std::fs;

use rand::Rng;
use tgraph_core::io::{write_edges_csv, write_node_events_csv, write_view_csv};
use tgraph_core::{
    build_graph, chronological_split, load_csv, DatasetManifest, EdgeEvent, TimeGranularity,
    Timestamp,
};

use common::{random_events, rng};

#[test]
fn csv_round_trip_is_identity() {
    let mut r = rng(60);
    let ev = random_events(&mut r, 800, 50, 40, 0, 10_000, 2, 1);
    let g = build_graph(&ev.edges, &ev.nodes, TimeGranularity::Second, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut ids = tgraph_core::IdMap::new();
    for i in 0..g.node_id_bound() {
        ids.intern(&format!("n{i}"));
    }
    let e = dir.path().join("e.csv");
    let n = dir.path().join("n.csv");
    write_edges_csv(&g, &ids, &e).unwrap();
    write_node_events_csv(&g, &ids, &n).unwrap();
    let mut m = DatasetManifest::for_edges(&e, TimeGranularity::Second);
    m.node_events = Some(n.clone());
    let (g2, ids2) = load_csv(&m).unwrap();

    // ids are reassigned by first appearance; compare through the labels
    let label = |ids: &tgraph_core::IdMap, id| ids.label(id).unwrap().to_string();
    assert_eq!(g2.edges().t, g.edges().t);
    assert_eq!(g2.edges().feat, g.edges().feat);
    assert_eq!(g2.node_events().feat, g.node_events().feat);
    for i in 0..g.num_edges() {
        assert_eq!(label(&ids2, g2.edges().src[i]), label(&ids, g.edges().src[i]));
        assert_eq!(label(&ids2, g2.edges().dst[i]), label(&ids, g.edges().dst[i]));
    }

    // second round trip reproduces columns exactly
    let e3 = dir.path().join("e3.csv");
    let n3 = dir.path().join("n3.csv");
    write_edges_csv(&g2, &ids2, &e3).unwrap();
    write_node_events_csv(&g2, &ids2, &n3).unwrap();
    let mut m3 = DatasetManifest::for_edges(&e3, TimeGranularity::Second);
    m3.node_events = Some(n3);
    let (g3, _) = load_csv(&m3).unwrap();
    assert_eq!(g3, g2);
    assert_eq!(fs::read(&e3).unwrap(), fs::read(&e).unwrap());
}

#[test]
fn split_properties_on_random_graphs() {
    let mut r = rng(61);
    for _ in 0..200 {
        let n = r.random_range(3..400);
        let span: Timestamp = r.random_range(1..600);
        let ev: Vec<_> = (0..n).map(|_| EdgeEvent::new(r.random_range(0..span), 0, 1)).collect();
        let g = build_graph(&ev, &[], TimeGranularity::Second, None).unwrap();
        let t = &g.edges().t;
        let ratios = [0.70, 0.15, 0.15];
        let Ok(s) = chronological_split(&g, ratios) else {
            continue;
        };
        let (tr, va, te) = (s.train.edge_rows(), s.val.edge_rows(), s.test.edge_rows());
        assert_eq!(tr.start, 0);
        assert_eq!(tr.end, va.start);
        assert_eq!(va.end, te.start);
        assert_eq!(te.end, n);
        assert!(!tr.is_empty() && !va.is_empty() && !te.is_empty());
        assert!(t[tr.end - 1] < t[va.start]);
        assert!(t[va.end - 1] < t[te.start]);

        // each boundary sits at most one timestamp group past its target
        for (target, b) in [(0.70, va.start), (0.85, te.start)] {
            let want = (target * n as f64 + 1e-9).floor() as usize;
            assert!(b >= want);
            let group_end = t.iter().position(|&x| x > t[want.saturating_sub(1)]).unwrap_or(n);
            assert!(b <= group_end.max(want), "boundary {b} target {want}");
        }
    }
}

#[test]
fn split_views_write_three_csvs() {
    let ev: Vec<_> = (0..100).map(|t| EdgeEvent::new(t, (t % 5) as u32, 7)).collect();
    let g = build_graph(&ev, &[], TimeGranularity::Second, None).unwrap();
    let s = chronological_split(&g, [0.7, 0.15, 0.15]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let ids = tgraph_core::IdMap::new();
    let mut lines = 0;
    for (name, v) in [("train", &s.train), ("val", &s.val), ("test", &s.test)] {
        let p = dir.path().join(format!("{name}.csv"));
        write_view_csv(v, &ids, &p).unwrap();
        lines += fs::read_to_string(&p).unwrap().lines().count() - 1;
    }
    assert_eq!(lines, 100);
}

#[test]
fn labels_feed_persistent_forecast() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("e.csv");
    fs::write(&edges, "src,dst,t\na,b,1\nb,c,2\nc,a,3\n").unwrap();
    let labels = dir.path().join("l.csv");
    fs::write(&labels, "t,node,target,weight\n1,a,b,0.5\n1,a,c,0.5\n2,a,b,1.0\n3,a,c,1.0\n3,b,a,1.0\n").unwrap();
    let (_, ids) = load_csv(&DatasetManifest::for_edges(&edges, TimeGranularity::Second)).unwrap();
    let stream = tgraph_core::load_labels(&labels, &ids).unwrap();
    assert_eq!(stream.dim(), 3);
    let a = ids.get("a").unwrap();
    assert_eq!(stream.latest_before(a, 2).unwrap(), &[0.0, 0.5, 0.5]);

    // from t=2 with k=1 (ties keep index order):
    // a@2 forecast [0,.5,.5] ranks b first -> 1; a@3 forecast [0,1,0] ranks b, truth is c -> 0;
    // b@3 unseen, zero forecast ranks a first, truth is a -> 1
    let s = tgraph_core::persistent_forecast_ndcg(&stream, 2, 1).unwrap();
    assert_eq!(s.queries, 3);
    assert!((s.mean_ndcg - 2.0 / 3.0).abs() < 1e-12);

    fs::write(&labels, "t,node,target,weight\n1,a,zz,1\n").unwrap();
    assert!(matches!(tgraph_core::load_labels(&labels, &ids), Err(tgraph_core::Error::Row { .. })));
}
