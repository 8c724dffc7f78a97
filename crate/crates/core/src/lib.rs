//! Geometric routing over planarized unit-disk graphs: bi-directional face
//! traversal, its single-direction baselines, and an experiment harness.

pub mod geometry;
pub mod harness;
pub mod kernel;
pub mod routing;
pub mod topology;
pub mod traversal;
