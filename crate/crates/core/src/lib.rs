//! Memory-efficient tree maps for binary shapes and an assignment-free
//! shape-assembly controller for simulated robot swarms.
//!
//! A binary 2D image (or 3D voxel grid) is encoded as a quadtree/octree whose
//! uniform regions collapse into single leaves, then embedded into metric
//! space and handed to a swarm of kinematic robots. Each robot senses nearby
//! map leaves and neighbors, and steers itself into the shape without any
//! target assignment. The crate is organised bottom-up:
//!
//! - [`image`]: binary images/voxel grids with power-of-two sides
//! - [`tree`]: tree-map encoding, merging, and the memory model
//! - [`embed`]: metric embedding, point location, attraction weights
//! - [`neighbor`]: the dense neighbor-cell grid used for local sensing
//! - [`control`]: the per-robot forming/avoiding velocity controller
//! - [`sim`]: synchronous world stepping and trajectory logging
//! - [`metrics`]: entering rate/time, uniformity, memory reports
//! - [`shapes`]: procedural test shapes (disk, ring, letters, pyramid, helix)
//! - [`io`]: PGM/VOX3 shape files, tree dumps, configs, trajectories

pub mod control;
pub mod embed;
pub mod error;
pub mod image;
pub mod io;
pub mod metrics;
pub mod neighbor;
pub mod shapes;
pub mod sim;
pub mod tree;

pub use control::{ControlParams, Candidate, EPSILON};
pub use embed::EmbeddedMap;
pub use error::{Error, Result};
pub use image::{BinaryImage, Color};
pub use metrics::{MemoryReport, MetricsReport};
pub use neighbor::{CellKind, NeighborMap};
pub use sim::{SimConfig, TrajectoryLog, WorldState};
pub use tree::{full_grid_bytes, NodeId, NodeKind, TreeMap, TreeNode};

/// Vector in the simulation space; `D` is 2 or 3.
pub type Vect<const D: usize> = nalgebra::SVector<f64, D>;
