//! File formats: shape rasters (PGM/VOX3), tree dumps, run configs,
//! trajectory CSVs, and metrics JSON.
//!
//! Every writer goes through [`write_atomic`], so a crash mid-write never
//! leaves a truncated file under the final name.

pub mod config;
pub mod dump;
pub mod pgm;
pub mod shape;
pub mod traj;
pub mod vox;

pub use config::{config_hash, load_config, parse_config};
pub use shape::{load_shape, sniff_dimension};

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes `bytes` to `path` atomically: a temp file in the same directory is
/// renamed over the target only once fully written. Missing parent
/// directories are created.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let context = |e: std::io::Error| Error::file(path, format!("cannot write: {e}"));
    std::fs::create_dir_all(dir).map_err(context)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(context)?;
    tmp.write_all(bytes).map_err(context)?;
    tmp.persist(path).map_err(|e| context(e.error))?;
    Ok(())
}

/// Reads a whole file, attaching the path to any failure.
pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::file(path, format!("cannot read: {e}")))
}
