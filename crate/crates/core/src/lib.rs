//! Floor-plan reconstruction from corner depth captures.
//!
//! Each capture (depth raster, edge mask, pose) of a room corner is
//! back-projected, reduced to a right-angle wedge and placed in the session
//! plan. Wedges are assembled into Manhattan rooms, aligned to the floor's
//! convex boundary, and door detections are mapped onto walls.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assemble;
pub mod backproject;
pub mod cli;
pub mod doors;
pub mod error;
pub mod evaluate;
pub mod geom;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod plan_io;
pub mod regularize;
pub mod svg;
pub mod synth;
pub mod types;

pub use error::{Error, Result};
pub use geom::{Quaternion, Vec2, Vec3};
pub use pipeline::{reconstruct, Config, Reconstruction};
pub use types::*;
