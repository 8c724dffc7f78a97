//! Experiment sweeps over generated graphs, metric aggregation and output.

mod emit;
mod figure;
mod metrics;

use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::SchedulePolicy;
use crate::routing::{run_algorithm, Algorithm, Network, RunOptions};
use crate::topology::{
    decompose_faces, gabriel_planarize, generate_unit_disk, pair_is_degenerate, GeometricGraph,
    NodeId, TopologyError,
};
use crate::traversal::{Hand, TraversalError};

pub use emit::{emit_results, write_aggregates_csv, write_metrics_csv, EmitError, OutputFormat};
pub use figure::{emit_route_figure, render_svg, FigureError, FigurePath, RouteFigure, TraceEdge};
pub use metrics::{
    aggregate, break_even, break_even_mean, pair_comparisons, pooled, summarize, AggregateRow,
    AlgorithmSummary, Comparison, ComparisonStats, PairComparison, RouteMetrics, COMPARISONS,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown preset `{0}`; expected desk or full")]
    UnknownPreset(String),
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("connectivity radius {u} outside (0, {area_side}]")]
    Radius { u: f64, area_side: f64 },
    #[error("{pairs} pairs per graph exceed the {available} ordered pairs of {n} nodes")]
    TooManyPairs {
        pairs: usize,
        n: usize,
        available: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Desk,
    Full,
}

impl FromStr for Preset {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desk" => Ok(Preset::Desk),
            "full" => Ok(Preset::Full),
            other => Err(ConfigError::UnknownPreset(other.to_string())),
        }
    }
}

/// How each run is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Scheduling {
    Fifo,
    /// A random schedule per run, seeded from the master seed.
    #[default]
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub node_counts: Vec<usize>,
    pub area_side: f64,
    pub u_values: Vec<f64>,
    pub graphs_per_density: usize,
    pub pairs_per_graph: usize,
    pub master_seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// A cell is dropped once this many generated graphs were disconnected.
    pub max_rejections: usize,
    pub session_k: usize,
    pub scheduling: Scheduling,
}

impl ExperimentConfig {
    pub fn preset(p: Preset, master_seed: u64) -> Self {
        match p {
            Preset::Desk => ExperimentConfig {
                node_counts: vec![40, 80],
                u_values: vec![0.9, 0.5, 0.3],
                graphs_per_density: 5,
                pairs_per_graph: 10,
                ..Self::full(master_seed)
            },
            Preset::Full => Self::full(master_seed),
        }
    }

    fn full(master_seed: u64) -> Self {
        ExperimentConfig {
            node_counts: (40..=180).step_by(20).collect(),
            area_side: 2.0,
            u_values: vec![0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2],
            graphs_per_density: 20,
            pairs_per_graph: 20,
            master_seed,
            algorithms: Algorithm::ALL.to_vec(),
            max_rejections: 500,
            session_k: 5,
            scheduling: Scheduling::Random,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            (
                "node_counts",
                !self.node_counts.is_empty() && self.node_counts.iter().all(|&n| n >= 2),
            ),
            ("u_values", !self.u_values.is_empty()),
            (
                "area_side",
                self.area_side > 0.0 && self.area_side.is_finite(),
            ),
            ("graphs_per_density", self.graphs_per_density > 0),
            ("pairs_per_graph", self.pairs_per_graph > 0),
            ("algorithms", !self.algorithms.is_empty()),
            ("session_k", self.session_k > 0),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, ok)| !ok) {
            return Err(ConfigError::NotPositive(name));
        }
        for &u in &self.u_values {
            if !(u > 0.0 && u <= self.area_side) {
                return Err(ConfigError::Radius {
                    u,
                    area_side: self.area_side,
                });
            }
        }
        for &n in &self.node_counts {
            let available = n * (n - 1);
            if self.pairs_per_graph > available {
                return Err(ConfigError::TooManyPairs {
                    pairs: self.pairs_per_graph,
                    n,
                    available,
                });
            }
        }
        Ok(())
    }
}

/// A generated graph with everything needed to route on it.
#[derive(Debug, Clone)]
pub struct PreparedGraph {
    pub graph_id: u64,
    pub full: GeometricGraph,
    pub planar: GeometricGraph,
    pub fd: crate::topology::FaceDecomposition,
    pub pairs: Vec<(NodeId, NodeId)>,
    pub seed: u64,
}

impl PreparedGraph {
    pub fn network(&self) -> Network<'_> {
        Network {
            full: &self.full,
            planar: &self.planar,
            fd: &self.fd,
        }
    }
}

/// Generation outcome of one (n, u) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub n: usize,
    pub u: f64,
    pub graphs: usize,
    pub rejections: usize,
    pub exhausted: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub metrics: Vec<RouteMetrics>,
    pub aggregates: Vec<AggregateRow>,
    pub summaries: Vec<AlgorithmSummary>,
    pub cells: Vec<CellReport>,
    /// Broken protocol guarantees, one line each.
    pub violations: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("graph {graph_id}, pair {src}->{dst}, {algorithm}: {source}")]
    Route {
        graph_id: u64,
        src: usize,
        dst: usize,
        algorithm: Algorithm,
        source: TraversalError,
    },
}

/// Generator seeded for one cell of the sweep.
fn cell_rng(master: u64, cell: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(cell as u64 + 1);
    rng
}

/// Samples distinct ordered pairs, redrawing any pair whose segment runs
/// through another node.
pub fn sample_pairs(g: &GeometricGraph, count: usize, seed: u64) -> Vec<(NodeId, NodeId)> {
    let n = g.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<(NodeId, NodeId)> = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count && tries < 100 * count + 1000 {
        tries += 1;
        let picked = sample(&mut rng, n, 2);
        let (s, d) = (NodeId(picked.index(0)), NodeId(picked.index(1)));
        if out.contains(&(s, d)) || pair_is_degenerate(g, s, d) {
            continue;
        }
        out.push((s, d));
    }
    out
}

/// Generates the connected graphs of one cell.
pub fn generate_cell(
    config: &ExperimentConfig,
    cell: usize,
    n: usize,
    u: f64,
) -> Result<(Vec<PreparedGraph>, CellReport), TopologyError> {
    let mut rng = cell_rng(config.master_seed, cell);
    let mut graphs = Vec::new();
    let mut rejections = 0;
    while graphs.len() < config.graphs_per_density {
        if rejections > config.max_rejections {
            let report = CellReport {
                n,
                u,
                graphs: 0,
                rejections,
                exhausted: true,
            };
            return Ok((Vec::new(), report));
        }
        let seed: u64 = rng.gen();
        let Ok(full) = generate_unit_disk(n, config.area_side, u, seed) else {
            rejections += 1;
            continue;
        };
        let planar = gabriel_planarize(&full);
        let fd = decompose_faces(&planar)?;
        let pairs = sample_pairs(&planar, config.pairs_per_graph, seed);
        let graph_id = (cell * config.graphs_per_density + graphs.len()) as u64;
        graphs.push(PreparedGraph {
            graph_id,
            full,
            planar,
            fd,
            pairs,
            seed,
        });
    }
    let report = CellReport {
        n,
        u,
        graphs: graphs.len(),
        rejections,
        exhausted: false,
    };
    Ok((graphs, report))
}

/// Routes every configured algorithm on every pair of one graph.
pub fn route_graph(
    config: &ExperimentConfig,
    pg: &PreparedGraph,
    n: usize,
    u: f64,
) -> Result<(Vec<RouteMetrics>, Vec<String>), ExperimentError> {
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(pg.seed ^ config.master_seed);
    for (pair_id, &(s, d)) in pg.pairs.iter().enumerate() {
        let planar_hops = pg.planar.hops_from(s)[d.0].unwrap_or(0);
        let full_hops = pg.full.hops_from(s)[d.0].unwrap_or(0);
        for &alg in &config.algorithms {
            let policy = match config.scheduling {
                Scheduling::Fifo => SchedulePolicy::Fifo,
                Scheduling::Random => SchedulePolicy::Random(rng.gen()),
            };
            let opts = RunOptions {
                policy,
                hand: Hand::R,
                session_k: config.session_k,
            };
            let run = run_algorithm(alg, pg.network(), s, d, opts, None).map_err(|source| {
                ExperimentError::Route {
                    graph_id: pg.graph_id,
                    src: s.0,
                    dst: d.0,
                    algorithm: alg,
                    source,
                }
            })?;
            if let Some(v) = run.violation() {
                violations.push(format!("graph {} pair {}->{}: {v}", pg.graph_id, s.0, d.0));
            }
            rows.push(RouteMetrics {
                graph_id: pg.graph_id,
                n,
                u,
                pair_id,
                src: s.0,
                dst: d.0,
                algorithm: alg,
                delivered: run.delivered(),
                path_hops: run.outcome.path_hops(),
                preferred_hops: run.preferred_hops,
                total_messages: run.total_messages,
                causal_latency: run.outcome.stats.delivery_causal_depth,
                shortest_planar_hops: planar_hops,
                shortest_full_hops: full_hops,
            });
        }
    }
    Ok((rows, violations))
}

/// Runs the whole sweep. Output order depends only on the configuration.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    config.validate()?;
    let cells: Vec<(usize, usize, f64)> = config
        .node_counts
        .iter()
        .flat_map(|&n| config.u_values.iter().map(move |&u| (n, u)))
        .enumerate()
        .map(|(i, (n, u))| (i, n, u))
        .collect();
    let generated: Vec<(Vec<PreparedGraph>, CellReport)> = cells
        .par_iter()
        .map(|&(i, n, u)| generate_cell(config, i, n, u))
        .collect::<Result<_, _>>()?;
    let jobs: Vec<(&PreparedGraph, usize, f64)> = generated
        .iter()
        .flat_map(|(gs, rep)| gs.iter().map(move |g| (g, rep.n, rep.u)))
        .collect();
    let routed: Vec<(Vec<RouteMetrics>, Vec<String>)> = jobs
        .par_iter()
        .map(|&(g, n, u)| route_graph(config, g, n, u))
        .collect::<Result<_, _>>()?;
    let mut metrics: Vec<RouteMetrics> = Vec::new();
    let mut violations = Vec::new();
    for (rows, v) in routed {
        metrics.extend(rows);
        violations.extend(v);
    }
    metrics.sort_by(|a, b| {
        (a.graph_id, a.pair_id, a.algorithm).cmp(&(b.graph_id, b.pair_id, b.algorithm))
    });
    Ok(ExperimentResult {
        aggregates: aggregate(&metrics),
        summaries: summarize(&metrics),
        cells: generated.into_iter().map(|(_, r)| r).collect(),
        config: config.clone(),
        metrics,
        violations,
    })
}
