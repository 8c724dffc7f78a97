//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use facewalk::geometry::pt;
use facewalk::harness::{
    emit_results, generate_cell, pooled, run_experiment, ExperimentConfig, ExperimentResult,
    OutputFormat, PreparedGraph, Preset, Scheduling, COMPARISONS,
};
use facewalk::kernel::SchedulePolicy;
use facewalk::routing::{route_session, Algorithm, SessionDirectory};
use facewalk::topology::{decompose_faces, GeometricGraph, NodeId};
use facewalk::traversal::{route_2face, Hand, TwoFace, TwoFaceOptions};

const DESK_SEED: u64 = 1;

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!(
            "criterion {id:>2} {name:<28} {} {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
}

fn sweep_config() -> ExperimentConfig {
    ExperimentConfig {
        node_counts: vec![40, 80, 120],
        u_values: vec![0.9, 0.6, 0.45],
        graphs_per_density: 7,
        pairs_per_graph: 10,
        algorithms: vec![
            Algorithm::TwoFace,
            Algorithm::G2fg,
            Algorithm::Gfg,
            Algorithm::Face1,
            Algorithm::Face2,
        ],
        scheduling: Scheduling::Random,
        ..ExperimentConfig::preset(Preset::Desk, 7)
    }
}

fn sweep_graphs(c: &ExperimentConfig) -> Vec<PreparedGraph> {
    let mut out = Vec::new();
    let mut cell = 0;
    for &n in &c.node_counts {
        for &u in &c.u_values {
            out.extend(generate_cell(c, cell, n, u).expect("generation").0);
            cell += 1;
        }
    }
    out
}

fn delivery(r: &mut Report, c: &ExperimentConfig) {
    let t = Instant::now();
    let res = run_experiment(c).expect("sweep");
    let graphs = res.cells.iter().map(|c| c.graphs).sum::<usize>();
    let failed = res.metrics.iter().filter(|m| !m.delivered).count();
    let secs = t.elapsed().as_secs_f64();
    r.line(
        1,
        "delivery guarantee",
        graphs >= 60 && failed == 0 && res.violations.is_empty() && secs < 300.0,
        format!(
            "{graphs} graphs, {} runs, {failed} undelivered, {} violations, {secs:.1}s",
            res.metrics.len(),
            res.violations.len()
        ),
    );
}

fn accounting_and_bounds(r: &mut Report, graphs: &[PreparedGraph]) {
    let (mut runs, mut audit_bad, mut msg_bad, mut depth_bad) = (0, 0, 0, 0);
    let mut worst_msg = 0.0f64;
    let mut worst_depth = 0.0f64;
    for pg in graphs {
        let e = pg.planar.edge_count() as f64;
        let v = pg.planar.node_count() as f64;
        for &(s, d) in &pg.pairs {
            let out = route_2face(&pg.planar, &pg.fd, s, d, SchedulePolicy::Fifo).expect("2face");
            runs += 1;
            if !out.audit.as_ref().is_some_and(|a| a.holds()) {
                audit_bad += 1;
            }
            let m = out.stats.total_messages as f64;
            let depth = out
                .stats
                .delivery_causal_depth
                .map_or(f64::INFINITY, f64::from);
            worst_msg = worst_msg.max(m / e);
            worst_depth = worst_depth.max(depth / v);
            if m > 4.0 * e {
                msg_bad += 1;
            }
            if depth > 4.0 * v {
                depth_bad += 1;
            }
        }
    }
    r.line(
        2,
        "exactly-once accounting",
        audit_bad == 0,
        format!("{runs} runs, {audit_bad} failed the per-corner and spawn/annihilation audit"),
    );
    r.line(
        3,
        "message and depth bounds",
        msg_bad == 0 && depth_bad == 0,
        format!("max messages/|E| {worst_msg:.2} (<= 4), max depth/|V| {worst_depth:.2} (<= 4)"),
    );
}

fn desk_run(seed: u64) -> ExperimentResult {
    run_experiment(&ExperimentConfig::preset(Preset::Desk, seed)).expect("desk run")
}

fn improvement_and_break_even(r: &mut Report, res: &ExperimentResult) {
    let stats: Vec<_> = COMPARISONS
        .iter()
        .map(|c| (c, pooled(&res.metrics, c)))
        .collect();
    let ratio_ok = |i: usize| {
        stats[i]
            .1
            .as_ref()
            .is_some_and(|s| (1.5..=4.0).contains(&s.mean_hop_ratio))
    };
    let describe = |i: usize| match &stats[i].1 {
        Some(s) => format!(
            "{}/{} {:.2} over {} pairs",
            stats[i].0.single, stats[i].0.bi, s.mean_hop_ratio, s.pairs
        ),
        None => format!("{}/{} no pairs", stats[i].0.single, stats[i].0.bi),
    };
    r.line(
        4,
        "improvement band [1.5, 4]",
        ratio_ok(0) && ratio_ok(1),
        format!("{}; {} (stuck pairs)", describe(0), describe(1)),
    );

    let k = |i: usize| stats[i].1.as_ref().and_then(|s| s.break_even_k);
    let fmt_k = |x: Option<f64>| x.map_or("undefined".to_string(), |k| format!("{k:.0}"));
    let primary = k(0);
    r.line(
        5,
        "break-even band [1.5, 6]",
        primary.is_some_and(|k| (1.5..=6.0).contains(&k)),
        format!(
            "face2/2face k={}; also gfg/g2fg k={}, face2/session k={}",
            fmt_k(primary),
            fmt_k(k(1)),
            fmt_k(k(2))
        ),
    );
}

fn near_optimality(r: &mut Report, res: &ExperimentResult) {
    let ratios: Vec<f64> = res
        .metrics
        .iter()
        .filter(|m| m.algorithm == Algorithm::TwoFace)
        .filter_map(|m| {
            Some(f64::from(m.preferred_hops?) / f64::from(m.shortest_planar_hops.max(1)))
        })
        .collect();
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
    r.line(
        6,
        "near-optimal preferred path",
        !ratios.is_empty() && min >= 1.0 && mean <= 2.0,
        format!("{} pairs, mean {mean:.3}, min {min:.3}", ratios.len()),
    );
}

fn statelessness(r: &mut Report, graphs: &[PreparedGraph]) {
    let (mut sessions, mut dirty) = (0, 0);
    let mut dir = SessionDirectory::new();
    for pg in graphs.iter().step_by(3) {
        for &(s, d) in &pg.pairs {
            let before = dir.snapshot();
            let rep = route_session(
                &pg.planar,
                &pg.fd,
                s,
                d,
                5,
                &mut dir,
                SchedulePolicy::Random(sessions),
            )
            .expect("session");
            sessions += 1;
            if dir.snapshot() != before || !rep.stateless || !rep.all_delivered() {
                dirty += 1;
            }
        }
    }
    r.line(
        7,
        "session statelessness",
        dirty == 0 && dir.is_empty(),
        format!("{sessions} sessions of 5 messages, {dirty} left state behind"),
    );
}

fn scheduler_robustness(r: &mut Report, graphs: &[PreparedGraph]) {
    let mut runs = 0;
    let mut bad = Vec::new();
    for pg in graphs.iter().take(20) {
        let (s, d) = pg.pairs[0];
        let e = pg.planar.edge_count() as u64;
        let policies =
            std::iter::once(SchedulePolicy::Fifo).chain((0..50).map(SchedulePolicy::Random));
        for p in policies {
            let out = route_2face(&pg.planar, &pg.fd, s, d, p).expect("2face");
            runs += 1;
            if !out.delivered || out.stats.total_messages > 4 * e {
                bad.push(format!("graph {} {:?}", pg.graph_id, p));
            }
        }
    }
    r.line(
        8,
        "scheduler robustness",
        bad.is_empty() && runs == 20 * 51,
        match bad.first() {
            Some(b) => format!(
                "{runs} runs over 20 instances, {} failed, first {b}",
                bad.len()
            ),
            None => format!("{runs} runs over 20 instances, none failed"),
        },
    );
}

fn reproducibility(r: &mut Report, first: &ExperimentResult) {
    let base = std::env::temp_dir().join(format!("facewalk-acceptance-{}", std::process::id()));
    let dirs: [PathBuf; 2] = [base.join("a"), base.join("b")];
    let second = desk_run(DESK_SEED);
    emit_results(first, &dirs[0], OutputFormat::Csv).expect("emit");
    emit_results(&second, &dirs[1], OutputFormat::Csv).expect("emit");
    let same = ["metrics.csv", "aggregates.csv"].iter().all(|f| {
        fs::read(dirs[0].join(f)).expect("read") == fs::read(dirs[1].join(f)).expect("read")
    });
    let rows = first.metrics.len();
    let _ = fs::remove_dir_all(&base);
    r.line(
        9,
        "reproducibility",
        same,
        format!("two desk runs, seed {DESK_SEED}, {rows} metric rows, byte-identical: {same}"),
    );
}

/// The worked example: outer cycle s-a-b-c-e-d-k-i-s split by the chain
/// c-h-g-f-i into F1 (source side) and F2. The pendant w at h and the relay
/// nodes on s-i and i-k set the FIFO timing so each meeting lands where the
/// narrative puts it.
fn worked_example(r: &mut Report) {
    const NAMES: [&str; 16] = [
        "s", "a", "b", "c", "d", "e", "f", "g", "h", "i", "k", "w", "m1", "m2", "j1", "j2",
    ];
    let g = GeometricGraph::from_edges(
        vec![
            pt(0.0, 0.0),
            pt(0.5, 2.5),
            pt(2.5, 3.0),
            pt(5.0, 1.0),
            pt(12.0, 0.0),
            pt(8.0, 4.0),
            pt(7.8, 1.8),
            pt(7.0, 1.0),
            pt(4.2, -0.8),
            pt(9.0, -1.5),
            pt(11.5, -2.5),
            pt(4.8, -0.2),
            pt(2.0, -2.5),
            pt(6.0, -3.0),
            pt(9.5, -4.0),
            pt(10.5, -4.5),
        ],
        &[
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 8),
            (8, 7),
            (7, 6),
            (6, 9),
            (9, 13),
            (13, 12),
            (12, 0),
            (3, 5),
            (5, 4),
            (4, 10),
            (10, 15),
            (15, 14),
            (14, 9),
            (8, 11),
        ],
    )
    .expect("fixture");
    let fd = decompose_faces(&g).expect("faces");
    let mut tf = TwoFace::new(&g, &fd, NodeId(0), NodeId(4), TwoFaceOptions::default());
    let out = tf.run(SchedulePolicy::Fifo, None).expect("run");
    let name = |n: &NodeId| NAMES[n.0];
    let mut sites: Vec<&str> = out.annihilation_sites.iter().map(name).collect();
    sites.sort();
    let mut spawns: Vec<&str> = out.spawn_nodes.iter().map(name).collect();
    spawns.sort();
    let path: Vec<&str> = out.path.iter().map(name).collect();
    let hand = out.delivery.and_then(|d| d.hand);
    let ok = sites == ["g", "h", "k"]
        && spawns == ["c", "i", "s"]
        && path.ends_with(&["c", "e", "d"])
        && hand == Some(Hand::L)
        && out.audit.is_some_and(|a| a.holds());
    r.line(
        10,
        "worked example",
        ok,
        format!(
            "annihilations at {sites:?}, entry points {spawns:?}, delivered by {} via {}",
            hand.map_or("-".to_string(), |h| h.to_string()),
            path.join("-")
        ),
    );
}

fn main() -> ExitCode {
    let mut r = Report { failed: 0 };
    let sweep = sweep_config();
    let graphs = sweep_graphs(&sweep);
    delivery(&mut r, &sweep);
    accounting_and_bounds(&mut r, &graphs);
    let desk = desk_run(DESK_SEED);
    improvement_and_break_even(&mut r, &desk);
    near_optimality(&mut r, &desk);
    statelessness(&mut r, &graphs);
    scheduler_robustness(&mut r, &graphs);
    reproducibility(&mut r, &desk);
    worked_example(&mut r);
    if r.failed == 0 {
        println!("all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{} criteria failed", r.failed);
        ExitCode::FAILURE
    }
}
