use rgmst::experiments::{self, Experiment, ExperimentConfig, Status};
use rgmst::exploration::bfw;
use rgmst::graphgen::{CapacitySource, GraphSnapshot};
use rgmst::metrics::{component_stats_with, graph_diameter, tree_diameter, StatsOptions};
use rgmst::mst::{forest_process, kruskal};
use rgmst::{Error, WeightVector};

fn small(kind: Experiment) -> ExperimentConfig {
    ExperimentConfig {
        n_grid: vec![1024, 2048, 4096, 8192],
        replicates: 8,
        ..ExperimentConfig::for_experiment(kind)
    }
}

#[test]
fn means_grow_with_n() {
    for (kind, stat) in [(Experiment::Diameter, "diameter"), (Experiment::Typical, "typical_distance")] {
        let out = experiments::run(&small(kind)).unwrap();
        let means: Vec<f64> = out.scaling.unwrap().points.iter().map(|p| p.mean).collect();
        let inversions = means.windows(2).filter(|w| w[1] < w[0]).count();
        assert!(inversions <= 1, "{stat}: {means:?}");
    }
}

#[test]
fn tree_distances_dominate_graph_distances() {
    let v = WeightVector::make_constant(3000).unwrap();
    for s in 0..5 {
        let src = CapacitySource::poissonized(&v, 2.0 / 3000.0, s).unwrap();
        let g = src.snapshot(2.0 / 3000.0).unwrap();
        let forest = kruskal(&g);
        let giant = forest.largest_component();
        let nodes: Vec<u32> = (0..3000).filter(|&x| forest.labels()[x as usize] == giant).collect();
        let sub = g.induced(&nodes);
        assert!(tree_diameter(&forest.largest_tree()) >= graph_diameter(&sub));
    }
}

#[test]
fn forest_process_ends_in_the_diameter_tree() {
    let n = 2000;
    let v = WeightVector::make_constant(n).unwrap();
    let p = 8.0 * (n as f64).ln() / n as f64;
    let src = CapacitySource::poissonized(&v, p, 3).unwrap();
    let ps: Vec<f64> = [0.5, 1.0, 2.0, 8.0 * (n as f64).ln()].iter().map(|c| c / n as f64).collect();
    let forests = forest_process(&src, &ps).unwrap();
    for w in forests.windows(2) {
        assert!(w[1].contains_edges_of(&w[0]));
    }
    let last = forests.last().unwrap();
    assert!(last.is_spanning_tree());
    assert_eq!(last.edge_pairs(), kruskal(&src.snapshot(p).unwrap()).edge_pairs());
}

#[test]
fn exploration_forest_spans_the_same_components() {
    let v = WeightVector::make_constant(500).unwrap();
    let g = CapacitySource::exact_capacities(&v, 9).unwrap().snapshot(1.2 / 500.0).unwrap();
    let t = bfw(&g, &v, 4).unwrap();
    let mut a = t.component_sizes();
    a.sort_unstable_by(|x, y| y.cmp(x));
    let b: Vec<usize> = component_stats_with(&g, &v, StatsOptions::default()).iter().map(|c| c.size).collect();
    assert_eq!(a, b);
    assert_eq!(t.forest().unwrap().component_count(), b.len());
}

#[test]
fn edge_list_round_trip_through_text() {
    let v = WeightVector::make_constant(200).unwrap();
    let g = CapacitySource::exact_capacities(&v, 1).unwrap().snapshot(0.01).unwrap();
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf, "exact", 1).unwrap();
    let (h, mode, seed) = GraphSnapshot::read_edge_list(&buf[..]).unwrap();
    assert_eq!((mode.as_str(), seed), ("exact", 1));
    assert_eq!(h.edges(), g.edges());
}

#[test]
fn campaign_rows_cover_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        out_dir: dir.path().join("nested/out"),
        ..small(Experiment::Diameter)
    };
    let rep = experiments::run_campaign(&cfg).unwrap();
    let rows = &rep.outcome.rows;
    let diam: Vec<_> = rows.iter().filter(|r| r.statistic == "diameter").collect();
    assert_eq!(diam.len(), cfg.n_grid.len() * cfg.replicates);
    assert!(diam.iter().all(|r| r.status == Status::Ok));
    assert_eq!(rep.summary["replicates"], 8);
    assert!(rep.summary["slope"].as_f64().unwrap() > 0.0);
    // merge order is (n, replicate)
    let keys: Vec<(usize, usize)> = diam.iter().map(|r| (r.n, r.replicate)).collect();
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    assert_eq!(keys, sorted);
}

#[test]
fn invalid_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        out_dir: dir.path().join("out"),
        replicates: 0,
        ..small(Experiment::Diameter)
    };
    assert!(matches!(experiments::run_campaign(&cfg), Err(Error::Config(_))));
    assert!(!dir.path().join("out").exists());
}
