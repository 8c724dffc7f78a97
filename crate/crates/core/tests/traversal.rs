mod common;

use facewalk::geometry::pt;
use facewalk::kernel::SchedulePolicy;
use facewalk::routing::{route_session, SessionDirectory};
use facewalk::topology::{decompose_faces, shortest_path_hops, GeometricGraph, NodeId};
use facewalk::traversal::{route_2face, route_face1, route_face2, Hand};

fn square() -> GeometricGraph {
    GeometricGraph::from_edges(
        vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0)],
        &[(0, 1), (1, 2), (2, 3), (3, 0)],
    )
    .unwrap()
}

#[test]
fn square_adjacent_pair() {
    let g = square();
    let fd = decompose_faces(&g).unwrap();
    let out = route_2face(&g, &fd, NodeId(0), NodeId(1), SchedulePolicy::Fifo).unwrap();
    assert!(out.delivered);
    assert_eq!(out.path_hops(), Some(1));
    assert!(out.stats.total_messages <= 8);
    assert!(out.audit.unwrap().holds());
}

#[test]
fn square_face2_hands_partition_cycle() {
    let g = square();
    let fd = decompose_faces(&g).unwrap();
    let (s, d) = (NodeId(0), NodeId(2));
    let l = route_face2(&g, &fd, s, d, Hand::L, SchedulePolicy::Fifo).unwrap();
    let r = route_face2(&g, &fd, s, d, Hand::R, SchedulePolicy::Fifo).unwrap();
    assert_eq!(l.path, [NodeId(0), NodeId(3), NodeId(2)]);
    assert_eq!(r.path, [NodeId(0), NodeId(1), NodeId(2)]);
    assert_eq!(l.path_hops().unwrap() + r.path_hops().unwrap(), 4);
}

#[test]
fn adjacent_destination_is_one_hop_for_either_hand() {
    let g = square();
    let fd = decompose_faces(&g).unwrap();
    for hand in [Hand::L, Hand::R] {
        let out = route_face2(&g, &fd, NodeId(0), NodeId(1), hand, SchedulePolicy::Fifo).unwrap();
        assert_eq!(out.path_hops(), Some(1));
        let out = route_face1(&g, &fd, NodeId(0), NodeId(1), hand, SchedulePolicy::Fifo).unwrap();
        assert_eq!(out.path_hops(), Some(1));
    }
}

#[test]
fn pendant_source_sends_both_tokens_one_way() {
    let g = GeometricGraph::from_edges(
        vec![
            pt(0.0, 0.0),
            pt(1.0, 0.0),
            pt(1.0, 1.0),
            pt(0.0, 1.0),
            pt(-1.0, -0.5),
        ],
        &[(0, 1), (1, 2), (2, 3), (3, 0), (4, 0)],
    )
    .unwrap();
    let fd = decompose_faces(&g).unwrap();
    let out = route_2face(&g, &fd, NodeId(4), NodeId(2), SchedulePolicy::Fifo).unwrap();
    assert!(out.delivered);
    assert!(out.audit.unwrap().holds());
    assert_eq!(out.path[..2], [NodeId(4), NodeId(0)]);
}

#[test]
fn random_instances_deliver_and_obey_bounds() {
    let mut runs = 0;
    let mut ratio_sum = 0.0;
    for (i, inst) in common::instances(60, 0.45, 12, 8, 100).iter().enumerate() {
        let e = inst.planar.edge_count() as u64;
        let v = inst.planar.node_count() as u32;
        for &(s, d) in &inst.pairs {
            let out = route_2face(&inst.planar, &inst.fd, s, d, SchedulePolicy::Fifo).unwrap();
            assert!(out.delivered, "graph {i} pair {s}->{d}");
            let audit = out.audit.clone().unwrap();
            assert!(audit.holds(), "graph {i} pair {s}->{d}: {audit:?}");
            assert!(out.stats.total_messages <= 4 * e);
            assert!(out.stats.delivery_causal_depth.unwrap() <= 4 * v);
            let short = shortest_path_hops(&inst.planar, s, d).unwrap();
            assert!(out.path_hops().unwrap() >= short);
            for hand in [Hand::L, Hand::R] {
                let f2 =
                    route_face2(&inst.planar, &inst.fd, s, d, hand, SchedulePolicy::Fifo).unwrap();
                assert!(f2.delivered, "face2 {hand} graph {i} pair {s}->{d}");
                let f1 =
                    route_face1(&inst.planar, &inst.fd, s, d, hand, SchedulePolicy::Fifo).unwrap();
                assert!(f1.delivered, "face1 {hand} graph {i} pair {s}->{d}");
                assert!(f1.stats.total_messages <= 3 * e);
            }
            let f2 =
                route_face2(&inst.planar, &inst.fd, s, d, Hand::R, SchedulePolicy::Fifo).unwrap();
            ratio_sum += f2.path_hops().unwrap() as f64 / out.path_hops().unwrap() as f64;
            runs += 1;
        }
    }
    eprintln!("mean face2/2face hops {:.3}", ratio_sum / runs as f64);
}

#[test]
fn traceback_retraces_delivery() {
    for inst in common::instances(50, 0.5, 6, 6, 300) {
        let mut dir = SessionDirectory::new();
        for &(s, d) in &inst.pairs {
            let rep = route_session(
                &inst.planar,
                &inst.fd,
                s,
                d,
                4,
                &mut dir,
                SchedulePolicy::Fifo,
            )
            .unwrap();
            assert!(rep.all_delivered());
            assert_eq!(rep.traceback.preferred_path, rep.first.path);
            for r in &rep.repeats {
                assert_eq!(r.path, rep.first.path);
            }
            assert!(rep.stateless);
            assert!(dir.is_empty());
        }
    }
}

#[test]
fn hand_symmetry_under_reflection() {
    for inst in common::instances(40, 0.6, 5, 5, 500) {
        let mirrored = inst.planar.reflected();
        let mfd = decompose_faces(&mirrored).unwrap();
        for &(s, d) in &inst.pairs {
            let r =
                route_face2(&inst.planar, &inst.fd, s, d, Hand::R, SchedulePolicy::Fifo).unwrap();
            let l = route_face2(&mirrored, &mfd, s, d, Hand::L, SchedulePolicy::Fifo).unwrap();
            assert_eq!(r.path, l.path);
            assert_eq!(r.stats, l.stats);
        }
    }
}
