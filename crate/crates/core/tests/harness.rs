use std::fs;

use facewalk::geometry::pt;
use facewalk::harness::{
    emit_results, emit_route_figure, render_svg, run_experiment, ExperimentConfig, FigurePath,
    OutputFormat, Preset, Scheduling,
};
use facewalk::routing::Algorithm;
use facewalk::topology::GeometricGraph;

fn tiny(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        node_counts: vec![30],
        u_values: vec![0.8],
        graphs_per_density: 1,
        pairs_per_graph: 1,
        algorithms: vec![Algorithm::Face2, Algorithm::TwoFace],
        ..ExperimentConfig::preset(Preset::Desk, seed)
    }
}

fn scratch_dir(name: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("facewalk-harness-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    d
}

#[test]
fn one_graph_one_pair_two_rows() {
    let res = run_experiment(&tiny(4)).unwrap();
    assert_eq!(res.metrics.len(), 2);
    assert_eq!(res.metrics[0].algorithm, Algorithm::Face2);
    assert_eq!(res.metrics[1].algorithm, Algorithm::TwoFace);
    assert!(res.metrics.iter().all(|m| m.delivered));
    assert!(res.violations.is_empty());
    assert_eq!(res.aggregates.len(), 1);
}

#[test]
fn invalid_config_is_rejected() {
    let mut c = tiny(1);
    c.u_values = vec![0.0];
    assert!(run_experiment(&c).is_err());
    let mut c = tiny(1);
    c.pairs_per_graph = 0;
    assert!(run_experiment(&c).is_err());
}

#[test]
fn reruns_are_byte_identical() {
    let mut c = tiny(11);
    c.node_counts = vec![40, 60];
    c.u_values = vec![0.9, 0.5];
    c.graphs_per_density = 3;
    c.pairs_per_graph = 4;
    c.algorithms = Algorithm::ALL.to_vec();
    c.scheduling = Scheduling::Random;
    let (a, b) = (scratch_dir("a"), scratch_dir("b"));
    emit_results(&run_experiment(&c).unwrap(), &a, OutputFormat::Csv).unwrap();
    emit_results(&run_experiment(&c).unwrap(), &b, OutputFormat::Csv).unwrap();
    for f in ["metrics.csv", "aggregates.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    c.master_seed += 1;
    let other = scratch_dir("c");
    emit_results(&run_experiment(&c).unwrap(), &other, OutputFormat::Csv).unwrap();
    assert_ne!(
        fs::read(a.join("metrics.csv")).unwrap(),
        fs::read(other.join("metrics.csv")).unwrap()
    );
}

#[test]
fn json_output_parses_back() {
    let dir = scratch_dir("json");
    emit_results(&run_experiment(&tiny(5)).unwrap(), &dir, OutputFormat::Json).unwrap();
    let m: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(m.as_array().unwrap().len(), 2);
    assert_eq!(m[1]["algorithm"], "2face");
    let a: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("aggregates.json")).unwrap()).unwrap();
    assert_eq!(a["comparisons"][0]["bi"], "2face");
}

#[test]
fn figure_of_a_route() {
    let g = GeometricGraph::from_edges(
        vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0)],
        &[(0, 1), (1, 2), (2, 3), (3, 0)],
    )
    .unwrap();
    let paths = [
        FigurePath {
            label: "L".into(),
            nodes: vec![0, 3, 2],
        },
        FigurePath {
            label: "R & co".into(),
            nodes: vec![0, 1, 2],
        },
    ];
    let fig = emit_route_figure(&g, &paths, &[]).unwrap();
    let svg = render_svg(&fig);
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert_eq!(svg.matches("<circle").count(), 4);
    assert!(svg.contains("R &amp; co"));
    let json = serde_json::to_string(&fig).unwrap();
    assert_eq!(
        serde_json::from_str::<facewalk::harness::RouteFigure>(&json).unwrap(),
        fig
    );
}
