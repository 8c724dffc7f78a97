mod common;

use facewalk::geometry::pt;
use facewalk::kernel::SchedulePolicy;
use facewalk::routing::{
    compass_step, greedy_step, route_compass, route_g2fg, route_gfg, route_greedy, route_session,
    run_algorithm, Algorithm, AlgorithmParseError, GreedyStep, Network, RunOptions,
    SessionDirectory,
};
use facewalk::topology::{
    decompose_faces, gabriel_planarize, generate_unit_disk, GeometricGraph, NodeId,
};
use facewalk::traversal::{route_2face, Hand};

fn star() -> GeometricGraph {
    // center 0, destination 5 far to the right
    GeometricGraph::from_edges(
        vec![
            pt(0.0, 0.0),
            pt(1.0, 0.2),
            pt(0.0, 1.0),
            pt(-1.0, 0.0),
            pt(0.0, -1.0),
            pt(3.0, 0.0),
        ],
        &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 5)],
    )
    .unwrap()
}

#[test]
fn greedy_picks_closest_neighbor() {
    let g = star();
    assert_eq!(
        greedy_step(&g, NodeId(0), NodeId(5)),
        GreedyStep::NextHop(NodeId(1))
    );
    assert_eq!(
        greedy_step(&g, NodeId(1), NodeId(5)),
        GreedyStep::NextHop(NodeId(5))
    );
    // every neighbor of 2 is farther from 4 than... only 0, which is closer
    assert_eq!(
        greedy_step(&g, NodeId(2), NodeId(4)),
        GreedyStep::NextHop(NodeId(0))
    );
}

#[test]
fn greedy_reports_local_minimum() {
    let g = star();
    // from 3 the only neighbor is 0, which is farther from 3's own leaf side
    assert_eq!(
        greedy_step(&g, NodeId(1), NodeId(3)),
        GreedyStep::NextHop(NodeId(0))
    );
    assert_eq!(
        greedy_step(&g, NodeId(5), NodeId(2)),
        GreedyStep::NextHop(NodeId(1))
    );
    let cup = dumbbell();
    assert_eq!(
        greedy_step(&cup, NodeId(1), NodeId(7)),
        GreedyStep::LocalMinimum
    );
    let out = route_greedy(&cup, NodeId(0), NodeId(7), SchedulePolicy::Fifo).unwrap();
    assert!(!out.delivered);
    assert_eq!(out.stats.total_messages, 1);
}

#[test]
fn compass_breaks_ties_toward_smaller_id() {
    let a = 30f64.to_radians();
    let g = GeometricGraph::from_edges(
        vec![
            pt(0.0, 0.0),
            pt(a.cos(), -a.sin()),
            pt(a.cos(), a.sin()),
            pt(5.0, 0.0),
        ],
        &[(0, 1), (0, 2), (1, 3), (2, 3)],
    )
    .unwrap();
    assert_eq!(compass_step(&g, NodeId(0), NodeId(3)), NodeId(1));
    let out = route_compass(&g, NodeId(0), NodeId(3), SchedulePolicy::Fifo).unwrap();
    assert_eq!(out.path, [NodeId(0), NodeId(1), NodeId(3)]);
}

#[test]
fn compass_livelock_is_reported() {
    let full = generate_unit_disk(10, 2.0, 1.0, 1).unwrap();
    let planar = gabriel_planarize(&full);
    let fd = decompose_faces(&planar).unwrap();
    assert!(route_compass(&planar, NodeId(0), NodeId(4), SchedulePolicy::Fifo).is_err());
    // on the planar graph as the full one, the dispatcher flags the loop
    let net = Network {
        full: &planar,
        planar: &planar,
        fd: &fd,
    };
    let run = run_algorithm(
        Algorithm::Compass,
        net,
        NodeId(0),
        NodeId(4),
        RunOptions::default(),
        None,
    )
    .unwrap();
    assert!(run.livelock);
    assert!(!run.delivered());
    assert!(run.violation().is_none());
    // face traversal delivers on the same pair
    assert!(
        route_2face(&planar, &fd, NodeId(0), NodeId(4), SchedulePolicy::Fifo)
            .unwrap()
            .delivered
    );
}

/// A cup around node 1 that traps greedy forwarding from 0 toward 7.
fn dumbbell() -> GeometricGraph {
    GeometricGraph::from_edges(
        vec![
            pt(0.0, 0.0),
            pt(2.0, 0.1),
            pt(1.0, 2.0),
            pt(1.0, -2.0),
            pt(4.0, 3.0),
            pt(4.0, -3.0),
            pt(7.0, 0.5),
            pt(10.0, 0.0),
        ],
        &[
            (0, 1),
            (1, 2),
            (1, 3),
            (0, 2),
            (0, 3),
            (2, 4),
            (3, 5),
            (4, 6),
            (5, 6),
            (6, 7),
        ],
    )
    .unwrap()
}

#[test]
fn gfg_recovers_once_around_a_void() {
    let g = dumbbell();
    let fd = decompose_faces(&g).unwrap();
    for hand in [Hand::L, Hand::R] {
        let out = route_gfg(
            &g,
            &g,
            &fd,
            NodeId(0),
            NodeId(7),
            hand,
            SchedulePolicy::Fifo,
        )
        .unwrap();
        assert!(out.delivered, "{hand}");
        assert_eq!(out.face_entries, 1, "{hand}");
        assert_eq!(out.path_hops(), Some(5));
    }
    let out = route_g2fg(&g, &g, &fd, NodeId(0), NodeId(7), SchedulePolicy::Fifo).unwrap();
    assert!(out.delivered);
    assert_eq!(out.face_entries, 1);
    assert!(out.audit.unwrap().holds());
}

#[test]
fn g2fg_matches_gfg_without_local_minima() {
    for inst in common::instances(40, 0.9, 6, 6, 40) {
        for &(s, d) in &inst.pairs {
            let greedy = route_greedy(&inst.full, s, d, SchedulePolicy::Fifo).unwrap();
            if !greedy.delivered {
                continue;
            }
            let a = route_gfg(
                &inst.full,
                &inst.planar,
                &inst.fd,
                s,
                d,
                Hand::R,
                SchedulePolicy::Fifo,
            )
            .unwrap();
            let b = route_g2fg(
                &inst.full,
                &inst.planar,
                &inst.fd,
                s,
                d,
                SchedulePolicy::Fifo,
            )
            .unwrap();
            assert_eq!(a.path, greedy.path);
            assert_eq!(b.path, greedy.path);
            assert_eq!(a.stats.total_messages, b.stats.total_messages);
            assert_eq!(b.face_entries, 0);
        }
    }
}

#[test]
fn algorithm_ids_parse() {
    for a in Algorithm::ALL {
        assert_eq!(a.id().parse::<Algorithm>().unwrap(), a);
    }
    for r in Algorithm::RESERVED {
        assert_eq!(
            r.parse::<Algorithm>(),
            Err(AlgorithmParseError::Reserved(r.into()))
        );
    }
    assert!(matches!(
        "bogus".parse::<Algorithm>(),
        Err(AlgorithmParseError::Unknown(_))
    ));
}

#[test]
fn delivery_holds_under_any_schedule() {
    for inst in common::instances(50, 0.5, 4, 4, 900) {
        let net = Network {
            full: &inst.full,
            planar: &inst.planar,
            fd: &inst.fd,
        };
        for &(s, d) in &inst.pairs {
            let policies =
                std::iter::once(SchedulePolicy::Fifo).chain((0..50).map(SchedulePolicy::Random));
            for policy in policies {
                for alg in [
                    Algorithm::TwoFace,
                    Algorithm::G2fg,
                    Algorithm::Face2,
                    Algorithm::Gfg,
                ] {
                    let opts = RunOptions {
                        policy,
                        ..RunOptions::default()
                    };
                    let run = run_algorithm(alg, net, s, d, opts, None).unwrap();
                    assert!(
                        run.violation().is_none(),
                        "{alg} {s}->{d} {policy:?}: {:?}",
                        run.violation()
                    );
                }
            }
        }
    }
}

#[test]
fn sessions_leave_no_state() {
    for inst in common::instances(60, 0.45, 4, 5, 1200) {
        for &(s, d) in &inst.pairs {
            for seed in 0..5 {
                let mut dir = SessionDirectory::new();
                let rep = route_session(
                    &inst.planar,
                    &inst.fd,
                    s,
                    d,
                    5,
                    &mut dir,
                    SchedulePolicy::Random(seed),
                )
                .unwrap();
                assert!(rep.all_delivered());
                assert!(rep.stateless);
                assert_eq!(rep.residual_entries, 0);
                assert_eq!(rep.repeats.len(), 4);
                for r in &rep.repeats {
                    assert_eq!(r.path_hops(), rep.preferred_hops());
                }
            }
        }
    }
}
