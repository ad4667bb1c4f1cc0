//! Run configuration files.
//!
//! A config is a flat text document: one `key = value` per line, `#` starts a
//! comment, blank lines are ignored. Unknown and duplicate keys are errors so
//! typos cannot silently fall back to defaults. The `shape` path is resolved
//! relative to the config file's directory.
//!
//! Required keys: `dim`, `shape`, `d_max`, `n_robot`, `n_steps`, `kappa1`,
//! `kappa2`, `r_avoid`, `r_sense`, `v_max`. Optional: `d_map` (default
//! `d_max - 2`), `dt` (0.01), `seed` (0), `alpha_z` (0), `record_every` (1),
//! and `init_min`/`init_max` (comma-separated floats, set together).

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::read_file;
use crate::sim::SimConfig;

const KEYS: &[&str] = &[
    "alpha_z",
    "d_map",
    "d_max",
    "dim",
    "dt",
    "init_max",
    "init_min",
    "kappa1",
    "kappa2",
    "n_robot",
    "n_steps",
    "r_avoid",
    "r_sense",
    "record_every",
    "seed",
    "shape",
    "v_max",
];

/// Reads and parses a config file; `shape` resolves against the file's
/// directory.
pub fn load_config(path: &Path) -> Result<SimConfig> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::file(path, "config is not valid UTF-8"))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base)
}

/// Parses config text; relative `shape` paths resolve against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<SimConfig> {
    let mut seen: BTreeMap<&str, String> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        let key = key.trim();
        let value = value.trim();
        let Some(&canon) = KEYS.iter().find(|&&k| k == key) else {
            return Err(Error::Config(format!("line {}: unknown key {key:?}", lineno + 1)));
        };
        if seen.insert(canon, value.to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {key:?}", lineno + 1)));
        }
    }

    let required = |key: &str| -> Result<&String> {
        seen.get(key).ok_or_else(|| Error::Config(format!("missing required key {key:?}")))
    };
    let shape = base.join(required("shape")?);
    let config = SimConfig {
        dim: parse_num(required("dim")?, "dim")?,
        shape,
        d_max: parse_num(required("d_max")?, "d_max")?,
        d_map: seen.get("d_map").map(|v| parse_num(v, "d_map")).transpose()?,
        n_robot: parse_num(required("n_robot")?, "n_robot")?,
        n_steps: parse_num(required("n_steps")?, "n_steps")?,
        dt: opt_num(&seen, "dt")?.unwrap_or(0.01),
        seed: opt_num(&seen, "seed")?.unwrap_or(0),
        kappa1: parse_num(required("kappa1")?, "kappa1")?,
        kappa2: parse_num(required("kappa2")?, "kappa2")?,
        r_avoid: parse_num(required("r_avoid")?, "r_avoid")?,
        r_sense: parse_num(required("r_sense")?, "r_sense")?,
        alpha_z: opt_num(&seen, "alpha_z")?.unwrap_or(0.0),
        v_max: parse_num(required("v_max")?, "v_max")?,
        init_min: seen.get("init_min").map(|v| parse_list(v, "init_min")).transpose()?,
        init_max: seen.get("init_max").map(|v| parse_list(v, "init_max")).transpose()?,
        record_every: opt_num(&seen, "record_every")?.unwrap_or(1),
    };
    Ok(config)
}

fn parse_num<T: std::str::FromStr>(value: &str, key: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("key {key:?}: cannot parse {value:?}")))
}

fn opt_num<T: std::str::FromStr>(seen: &BTreeMap<&str, String>, key: &str) -> Result<Option<T>> {
    seen.get(key).map(|v| parse_num(v, key)).transpose()
}

fn parse_list(value: &str, key: &str) -> Result<Vec<f64>> {
    value.split(',').map(|v| parse_num(v.trim(), key)).collect()
}

/// Canonical text of the effective configuration: every key on one line in
/// sorted order, defaults filled in, floats in shortest-roundtrip form.
pub fn canonical_string(config: &SimConfig) -> String {
    let list = |v: &Option<Vec<f64>>| match v {
        Some(xs) => xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(","),
        None => "none".to_string(),
    };
    format!(
        "alpha_z={:?}\nd_map={}\nd_max={}\ndim={}\ndt={:?}\ninit_max={}\ninit_min={}\n\
         kappa1={:?}\nkappa2={:?}\nn_robot={}\nn_steps={}\nr_avoid={:?}\nr_sense={:?}\n\
         record_every={}\nseed={}\nshape={}\nv_max={:?}\n",
        config.alpha_z,
        config.d_map_effective(),
        config.d_max,
        config.dim,
        config.dt,
        list(&config.init_max),
        list(&config.init_min),
        config.kappa1,
        config.kappa2,
        config.n_robot,
        config.n_steps,
        config.r_avoid,
        config.r_sense,
        config.record_every,
        config.seed,
        config.shape.display(),
        config.v_max,
    )
}

/// FNV-1a (64-bit) hash of the canonical config text, as 16 hex digits.
/// Stamped into trajectory headers so offline metric runs can detect a
/// mismatched config.
pub fn config_hash(config: &SimConfig) -> String {
    format!("{:016x}", fnv1a64(canonical_string(config).as_bytes()))
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
