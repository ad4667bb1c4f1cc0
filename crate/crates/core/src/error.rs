//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced while building maps, parsing files, or running simulations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension {0} is not supported (expected 2 or 3)")]
    Dimension(usize),

    #[error("image side {0} must be a power of two and at least 2")]
    ImageSide(usize),

    #[error("voxel buffer holds {got} values but side {side} in {dim}D needs {want}")]
    VoxelCount { side: usize, dim: usize, got: usize, want: usize },

    #[error("maximum depth {0} must lie between 1 and 24")]
    MaxDepth(u32),

    #[error("map depth {d_map} exceeds the tree depth {d_max}")]
    MapDepth { d_map: u32, d_max: u32 },

    #[error("shape has no black pixels")]
    AllWhite,

    #[error("parameter {name} = {value} is out of range: {why}")]
    Parameter { name: &'static str, value: f64, why: &'static str },

    #[error("could not place robot {robot} after {attempts} attempts; the start box is too crowded for spacing {spacing}")]
    Packing { robot: usize, attempts: u32, spacing: f64 },

    #[error("robot {robot} produced a non-finite velocity at step {step}")]
    NonFiniteVelocity { robot: usize, step: u64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {msg}")]
    FileFormat { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Convenience constructor for file parsing failures.
    pub fn file(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::FileFormat { path: path.into(), msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
