use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::routing::Algorithm;

use super::{AggregateRow, AlgorithmSummary, CellReport, ExperimentResult, RouteMetrics};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}`; expected csv or json")),
        }
    }
}

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EmitError + '_ {
    move |source| EmitError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_csv<T: Serialize>(rows: &[T], path: &Path, header: &[&str]) -> Result<(), EmitError> {
    let csv_err = |source| EmitError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err)?;
    // written by hand so an empty table still gets its header
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub const METRICS_HEADER: [&str; 14] = [
    "graph_id",
    "n",
    "u",
    "pair_id",
    "src",
    "dst",
    "algorithm",
    "delivered",
    "path_hops",
    "preferred_hops",
    "total_messages",
    "causal_latency",
    "shortest_planar_hops",
    "shortest_full_hops",
];

const AGGREGATE_HEADER: [&str; 15] = [
    "n",
    "u",
    "single",
    "bi",
    "pairs",
    "mean_single_hops",
    "mean_preferred_hops",
    "mean_hop_ratio",
    "improvement",
    "mean_single_messages",
    "mean_bi_messages",
    "overhead",
    "break_even_k",
    "mean_pair_break_even_k",
    "break_even_defined",
];

pub fn write_metrics_csv(rows: &[RouteMetrics], path: &Path) -> Result<(), EmitError> {
    write_csv(rows, path, &METRICS_HEADER)
}

/// Flat CSV image of an aggregate row; the csv writer cannot flatten.
#[derive(Serialize)]
struct AggregateRecord(
    usize,
    f64,
    Algorithm,
    Algorithm,
    usize,
    f64,
    f64,
    f64,
    f64,
    f64,
    f64,
    f64,
    Option<f64>,
    Option<f64>,
    usize,
);

pub fn write_aggregates_csv(rows: &[AggregateRow], path: &Path) -> Result<(), EmitError> {
    let records: Vec<AggregateRecord> = rows
        .iter()
        .map(|r| {
            let s = &r.stats;
            AggregateRecord(
                r.n,
                r.u,
                r.single,
                r.bi,
                s.pairs,
                s.mean_single_hops,
                s.mean_preferred_hops,
                s.mean_hop_ratio,
                s.improvement,
                s.mean_single_messages,
                s.mean_bi_messages,
                s.overhead,
                s.break_even_k,
                s.mean_pair_break_even_k,
                s.break_even_defined,
            )
        })
        .collect();
    write_csv(&records, path, &AGGREGATE_HEADER)
}

fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<(), EmitError> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|source| EmitError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    writeln!(f).map_err(io_err(path))
}

#[derive(Serialize)]
struct AggregateFile<'a> {
    comparisons: &'a [AggregateRow],
    algorithms: &'a [AlgorithmSummary],
    cells: &'a [CellReport],
}

/// Writes `metrics.{csv,json}` and `aggregates.{csv,json}` into `dir`,
/// returning the paths written.
pub fn emit_results(
    result: &ExperimentResult,
    dir: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>, EmitError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let written = match format {
        OutputFormat::Csv => {
            let m = dir.join("metrics.csv");
            let a = dir.join("aggregates.csv");
            write_metrics_csv(&result.metrics, &m)?;
            write_aggregates_csv(&result.aggregates, &a)?;
            vec![m, a]
        }
        OutputFormat::Json => {
            let m = dir.join("metrics.json");
            let a = dir.join("aggregates.json");
            write_json(&result.metrics, &m)?;
            write_json(
                &AggregateFile {
                    comparisons: &result.aggregates,
                    algorithms: &result.summaries,
                    cells: &result.cells,
                },
                &a,
            )?;
            vec![m, a]
        }
    };
    Ok(written)
}
