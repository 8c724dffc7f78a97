#![allow(dead_code)]

use facewalk::topology::{
    decompose_faces, gabriel_planarize, generate_unit_disk, pair_is_degenerate, FaceDecomposition,
    GeometricGraph, NodeId,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub full: GeometricGraph,
    pub planar: GeometricGraph,
    pub fd: FaceDecomposition,
    pub pairs: Vec<(NodeId, NodeId)>,
}

/// Connected unit-disk graphs with their Gabriel subgraphs and sampled pairs.
pub fn instances(n: usize, u: f64, count: usize, pairs: usize, seed: u64) -> Vec<Instance> {
    let mut out = Vec::new();
    let mut s = seed;
    while out.len() < count {
        s += 1;
        let Ok(full) = generate_unit_disk(n, 2.0, u, s) else {
            continue;
        };
        let planar = gabriel_planarize(&full);
        let fd = decompose_faces(&planar).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let mut ps = Vec::new();
        while ps.len() < pairs {
            let a = NodeId(rng.gen_range(0..n));
            let b = NodeId(rng.gen_range(0..n));
            if a == b || ps.contains(&(a, b)) || pair_is_degenerate(&planar, a, b) {
                continue;
            }
            ps.push((a, b));
        }
        out.push(Instance {
            full,
            planar,
            fd,
            pairs: ps,
        });
    }
    out
}
