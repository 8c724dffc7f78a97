use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use facewalk::harness::{
    emit_results, emit_route_figure, render_svg, run_experiment, ExperimentConfig, FigurePath,
    OutputFormat, Preset,
};
use facewalk::kernel::{KernelError, SchedulePolicy};
use facewalk::routing::{run_algorithm, Algorithm, Network, RunOptions};
use facewalk::topology::{
    decompose_faces, gabriel_planarize, generate_unit_disk, read_graph, write_graph, NodeId,
};
use facewalk::traversal::{Hand, TraceEvent, TraversalError};

#[derive(Parser)]
#[command(
    name = "facewalk",
    version,
    about = "Geometric routing with bi-directional face traversal"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a connected unit-disk graph.
    Gen {
        #[arg(long)]
        n: usize,
        /// Connectivity radius.
        #[arg(long)]
        u: f64,
        /// Side of the square deployment area.
        #[arg(long, default_value_t = 2.0)]
        area: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the Gabriel subgraph instead of the full graph.
        #[arg(long)]
        planarize: bool,
        /// Seeds tried after `--seed` before giving up on connectivity.
        #[arg(long, default_value_t = 500)]
        max_tries: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Route one pair and optionally write a JSON Lines trace.
    Route {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "2face")]
        alg: String,
        #[arg(long)]
        src: usize,
        #[arg(long)]
        dst: usize,
        #[arg(long, value_enum, default_value_t = HandArg::R)]
        hand: HandArg,
        /// Random schedule seed; FIFO when omitted.
        #[arg(long)]
        schedule_seed: Option<u64>,
        /// Messages per session for `--alg session`.
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a parameter sweep and write metrics and aggregates.
    Experiment {
        #[arg(long, default_value = "desk")]
        preset: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Draw a graph with highlighted paths as SVG.
    Trace {
        #[arg(long)]
        graph: PathBuf,
        /// JSON array of `{"label", "nodes"}` objects.
        #[arg(long)]
        paths: Option<PathBuf>,
        /// JSON Lines trace from `route --trace`.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        svg: PathBuf,
        /// Also write the plot data as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum HandArg {
    L,
    R,
}

enum Failure {
    Config(String),
    Protocol(String),
}

impl Failure {
    fn config(e: impl std::fmt::Display) -> Self {
        Failure::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen {
            n,
            u,
            area,
            seed,
            planarize,
            max_tries,
            out,
        } => gen(n, u, area, seed, planarize, max_tries, &out),
        Command::Route {
            graph,
            alg,
            src,
            dst,
            hand,
            schedule_seed,
            k,
            trace,
        } => route(
            &graph,
            &alg,
            src,
            dst,
            hand,
            schedule_seed,
            k,
            trace.as_deref(),
        ),
        Command::Experiment {
            preset,
            seed,
            out,
            format,
        } => experiment(&preset, seed, &out, &format),
        Command::Trace {
            graph,
            paths,
            trace,
            svg,
            json,
        } => draw(
            &graph,
            paths.as_deref(),
            trace.as_deref(),
            &svg,
            json.as_deref(),
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Protocol(m)) => {
            eprintln!("protocol violation: {m}");
            ExitCode::from(2)
        }
    }
}

fn gen(
    n: usize,
    u: f64,
    area: f64,
    seed: u64,
    planarize: bool,
    max_tries: u64,
    out: &Path,
) -> Result<(), Failure> {
    if n < 2 {
        return Err(Failure::config("--n must be at least 2"));
    }
    if !(area > 0.0 && area.is_finite()) || !(u > 0.0 && u <= area) {
        return Err(Failure::config(format!(
            "need 0 < u <= area, got u={u} area={area}"
        )));
    }
    let g = (0..=max_tries)
        .find_map(|i| generate_unit_disk(n, area, u, seed.wrapping_add(i)).ok())
        .ok_or_else(|| {
            Failure::config(format!(
                "no connected graph within {max_tries} seeds after {seed}"
            ))
        })?;
    let g = if planarize { gabriel_planarize(&g) } else { g };
    write_graph(&g, out).map_err(Failure::config)?;
    eprintln!(
        "wrote {} nodes, {} edges (seed {})",
        g.node_count(),
        g.edge_count(),
        g.meta().seed
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn route(
    graph: &Path,
    alg: &str,
    src: usize,
    dst: usize,
    hand: HandArg,
    schedule_seed: Option<u64>,
    k: usize,
    trace: Option<&Path>,
) -> Result<(), Failure> {
    let algorithm: Algorithm = alg.parse().map_err(Failure::config)?;
    let full = read_graph(graph).map_err(Failure::config)?;
    let planar = if full.is_planar() {
        full.clone()
    } else {
        gabriel_planarize(&full)
    };
    let fd = decompose_faces(&planar).map_err(Failure::config)?;
    let net = Network {
        full: &full,
        planar: &planar,
        fd: &fd,
    };
    let opts = RunOptions {
        policy: schedule_seed.map_or(SchedulePolicy::Fifo, SchedulePolicy::Random),
        hand: match hand {
            HandArg::L => Hand::L,
            HandArg::R => Hand::R,
        },
        session_k: k,
    };

    let mut events: Vec<TraceEvent> = Vec::new();
    let mut sink = |e: TraceEvent| events.push(e);
    let sink_ref: Option<&mut dyn FnMut(TraceEvent)> = if trace.is_some() {
        Some(&mut sink)
    } else {
        None
    };
    let run = match run_algorithm(algorithm, net, NodeId(src), NodeId(dst), opts, sink_ref) {
        Ok(r) => r,
        Err(e @ TraversalError::Kernel(KernelError::StepBudgetExceeded { .. })) => {
            return Err(Failure::Protocol(format!("{algorithm}: {e}")));
        }
        Err(e) => return Err(Failure::config(e)),
    };
    if let Some(path) = trace {
        let f = fs::File::create(path)
            .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(f);
        for e in &events {
            serde_json::to_writer(&mut w, e).map_err(Failure::config)?;
            writeln!(w).map_err(Failure::config)?;
        }
        w.flush().map_err(Failure::config)?;
    }

    let summary = serde_json::json!({
        "algorithm": algorithm,
        "src": src,
        "dst": dst,
        "delivered": run.delivered(),
        "path": run.outcome.path.iter().map(|n| n.0).collect::<Vec<_>>(),
        "path_hops": run.outcome.path_hops(),
        "preferred_hops": run.preferred_hops,
        "total_messages": run.total_messages,
        "causal_latency": run.outcome.stats.delivery_causal_depth,
        "livelock": run.livelock,
        "audit": run.outcome.audit,
        "session": run.session,
    });
    let text = serde_json::to_string_pretty(&summary).map_err(Failure::config)?;
    // a closed pipe downstream is not an error of the run
    let _ = writeln!(std::io::stdout(), "{text}");
    match run.violation() {
        Some(v) => Err(Failure::Protocol(v)),
        None => Ok(()),
    }
}

fn experiment(preset: &str, seed: u64, out: &Path, format: &str) -> Result<(), Failure> {
    let preset: Preset = preset.parse().map_err(Failure::config)?;
    let format: OutputFormat = format.parse().map_err(Failure::config)?;
    let config = ExperimentConfig::preset(preset, seed);
    let result = run_experiment(&config).map_err(Failure::config)?;
    let written = emit_results(&result, out, format).map_err(Failure::config)?;
    for c in result.cells.iter().filter(|c| c.exhausted) {
        eprintln!(
            "cell n={} u={} skipped after {} disconnected graphs",
            c.n, c.u, c.rejections
        );
    }
    for p in &written {
        eprintln!("wrote {}", p.display());
    }
    if result.violations.is_empty() {
        Ok(())
    } else {
        for v in &result.violations {
            eprintln!("{v}");
        }
        Err(Failure::Protocol(format!(
            "{} runs broke a guarantee",
            result.violations.len()
        )))
    }
}

fn draw(
    graph: &Path,
    paths: Option<&Path>,
    trace: Option<&Path>,
    svg: &Path,
    json: Option<&Path>,
) -> Result<(), Failure> {
    let g = read_graph(graph).map_err(Failure::config)?;
    let read = |p: &Path| {
        fs::read_to_string(p).map_err(|e| Failure::config(format!("{}: {e}", p.display())))
    };
    let figure_paths: Vec<FigurePath> = match paths {
        Some(p) => serde_json::from_str(&read(p)?)
            .map_err(|e| Failure::config(format!("{}: {e}", p.display())))?,
        None => Vec::new(),
    };
    let mut events = Vec::new();
    if let Some(p) = trace {
        let f = fs::File::open(p).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?;
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(Failure::config)?;
            if line.trim().is_empty() {
                continue;
            }
            let e: TraceEvent = serde_json::from_str(&line)
                .map_err(|e| Failure::config(format!("{}:{}: {e}", p.display(), i + 1)))?;
            events.push(e);
        }
    }
    let fig = emit_route_figure(&g, &figure_paths, &events).map_err(Failure::config)?;
    fs::write(svg, render_svg(&fig))
        .map_err(|e| Failure::config(format!("{}: {e}", svg.display())))?;
    if let Some(p) = json {
        let text = serde_json::to_string_pretty(&fig).map_err(Failure::config)?;
        fs::write(p, text).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}
