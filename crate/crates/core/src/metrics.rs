//! Run metrics: map memory, entering rate/time, placement uniformity.

use rayon::prelude::*;
use serde::Serialize;

use crate::control::{eta_at, ControlParams};
use crate::embed::EmbeddedMap;
use crate::neighbor::NeighborMap;
use crate::sim::{TrajectoryLog, WorldState};
use crate::tree::{full_grid_bytes, TreeMap};

/// Memory cost of a tree map against the dense grid at the same resolution.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MemoryReport {
    pub tree_bytes: f64,
    pub full_grid_bytes: f64,
    pub reduction_ratio: f64,
}

/// Tree-vs-grid memory at the tree's own resolution (`2^d_max` per axis).
pub fn memory_report<const D: usize>(tree: &TreeMap<D>) -> MemoryReport {
    let side = 1usize << tree.d_max();
    let tree_bytes = tree.memory_bytes();
    let grid = full_grid_bytes(side, D);
    MemoryReport { tree_bytes, full_grid_bytes: grid, reduction_ratio: grid / tree_bytes }
}

/// Metrics of one simulation step.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepRecord {
    pub step: u64,
    /// Percentage of robots inside sensed black space.
    pub entering_rate: f64,
    /// Spread of nearest-neighbor distances (sum of squared deviations).
    pub m3: f64,
    /// Robots without any neighbor in sensing range, excluded from `m3`.
    pub m3_excluded: usize,
}

/// Percentage of robots whose position lies inside some sensed black leaf
/// (the controller's own entry test, `eta <= 1`).
pub fn entering_rate<const D: usize>(
    world: &WorldState<D>,
    map: &EmbeddedMap<D>,
    nmap: &NeighborMap<'_, D>,
    params: &ControlParams<D>,
) -> f64 {
    let n_in = world
        .positions
        .par_iter()
        .filter(|p| eta_at(map, nmap, p, params.r_sense) <= 1.0)
        .count();
    100.0 * n_in as f64 / world.positions.len() as f64
}

/// First step at which every robot was inside the shape, if any.
pub fn entering_time(records: &[StepRecord]) -> Option<u64> {
    records.iter().find(|r| r.entering_rate >= 100.0).map(|r| r.step)
}

/// Sum of squared deviations of each robot's nearest-neighbor distance from
/// the swarm mean. Robots with no neighbor within `r_sense` are excluded;
/// the second value counts them.
pub fn uniformity<const D: usize>(world: &WorldState<D>, params: &ControlParams<D>) -> (f64, usize) {
    let n = world.positions.len();
    let nearest: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = world.positions[i];
            let mut best: Option<f64> = None;
            for (j, q) in world.positions.iter().enumerate() {
                if j == i {
                    continue;
                }
                let d = (q - p).norm();
                if d <= params.r_sense && best.map(|b| d < b).unwrap_or(true) {
                    best = Some(d);
                }
            }
            best
        })
        .collect();
    let included: Vec<f64> = nearest.iter().flatten().copied().collect();
    let excluded = n - included.len();
    if included.is_empty() {
        return (0.0, excluded);
    }
    let mean = included.iter().sum::<f64>() / included.len() as f64;
    let m3 = included.iter().map(|r| (r - mean) * (r - mean)).sum();
    (m3, excluded)
}

/// Log-scale uniformity score: `-log10(m3 / n_robot)`, infinite when the
/// spread vanishes entirely.
pub fn final_uniformity(m3: f64, n_robot: usize) -> f64 {
    if m3 <= 0.0 {
        f64::INFINITY
    } else {
        -(m3 / n_robot as f64).log10()
    }
}

/// All step metrics at once (shared by the runner's per-step logging).
pub fn step_record<const D: usize>(
    world: &WorldState<D>,
    map: &EmbeddedMap<D>,
    nmap: &NeighborMap<'_, D>,
    params: &ControlParams<D>,
) -> StepRecord {
    let (m3, m3_excluded) = uniformity(world, params);
    StepRecord {
        step: world.step,
        entering_rate: entering_rate(world, map, nmap, params),
        m3,
        m3_excluded,
    }
}

/// Summary of a finished run, flat enough to serialize straight to JSON.
/// `final_uniformity` is `None` when the spread is exactly zero (the score
/// would be infinite, which JSON cannot carry).
#[derive(Clone, Debug, Serialize)]
pub struct MetricsReport {
    pub n_robot: usize,
    pub seed: u64,
    pub config_hash: String,
    #[serde(flatten)]
    pub memory: MemoryReport,
    pub entering_time: Option<u64>,
    pub final_entering_rate: f64,
    pub final_m3: f64,
    pub final_m3_excluded: usize,
    pub final_uniformity: Option<f64>,
    pub entering_rate: Vec<f64>,
    pub m3: Vec<f64>,
}

impl MetricsReport {
    /// Combines a run's per-step records with its map's memory report.
    pub fn new<const D: usize>(log: &TrajectoryLog<D>, memory: MemoryReport) -> Self {
        let last = log.metrics.last().expect("a run has at least its initial record");
        let fu = final_uniformity(last.m3, log.n_robot);
        Self {
            n_robot: log.n_robot,
            seed: log.seed,
            config_hash: log.config_hash.clone(),
            memory,
            entering_time: entering_time(&log.metrics),
            final_entering_rate: last.entering_rate,
            final_m3: last.m3,
            final_m3_excluded: last.m3_excluded,
            final_uniformity: fu.is_finite().then_some(fu),
            entering_rate: log.metrics.iter().map(|r| r.entering_rate).collect(),
            m3: log.metrics.iter().map(|r| r.m3).collect(),
        }
    }
}
