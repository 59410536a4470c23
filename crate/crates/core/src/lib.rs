//! Point-cloud semantic annotation and terrain data fusion.
//!
//! The crate covers three workflows over georeferenced photogrammetric
//! point clouds:
//!
//! * rule-based annotation of ground / building / tree classes driven by
//!   per-point geometric and color features,
//! * evaluation of a predicted labeling against ground truth
//!   (precision / recall / F1 / IOU tables),
//! * fusion of two overlapping clouds via coarse georeference alignment,
//!   two-pass ICP and an optional semantic ground-border refinement.

pub mod cli;
pub mod cloud;
pub mod components;
pub mod config;
pub mod error;
pub mod eval;
pub mod features;
pub mod fusion;
pub mod io;
pub mod rulepipe;
pub mod segment;
pub mod spatial;
pub mod synth;
pub mod transform;
pub mod voxel;

pub use cloud::{ClassLabel, Point, PointCloud};
pub use error::{Error, Result};
pub use transform::RigidTransform;
