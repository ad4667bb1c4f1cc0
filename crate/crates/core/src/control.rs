//! Per-robot velocity controller.
//!
//! Every robot blends two velocities from purely local information: a forming
//! velocity that pulls it toward attractive regions of the map (real leaves
//! while approaching, free virtual cells once inside black space), and an
//! avoiding velocity that pushes it away from close neighbors. No robot is
//! assigned a target; the shape emerges from the weighting alone.

use crate::embed::EmbeddedMap;
use crate::neighbor::NeighborMap;
use crate::tree::{NodeId, NodeKind};
use crate::Vect;

/// Numerical floor for distances and weight sums.
pub const EPSILON: f64 = 1e-9;

/// Controller gains and radii. `alpha` stretches avoidance per axis (used to
/// keep extra vertical clearance in 3D); zero means plain Euclidean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlParams<const D: usize> {
    pub kappa1: f64,
    pub kappa2: f64,
    pub r_avoid: f64,
    pub r_sense: f64,
    pub v_max: f64,
    pub alpha: Vect<D>,
}

impl<const D: usize> ControlParams<D> {
    pub fn new(kappa1: f64, kappa2: f64, r_avoid: f64, r_sense: f64, v_max: f64) -> Self {
        Self { kappa1, kappa2, r_avoid, r_sense, v_max, alpha: Vect::<D>::zeros() }
    }

    /// Sets the vertical avoidance stretch (a no-op outside 3D).
    pub fn with_alpha_z(mut self, alpha_z: f64) -> Self {
        if D == 3 {
            self.alpha[2] = alpha_z;
        }
        self
    }
}

/// An attraction target: a box the robot may steer toward.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate<const D: usize> {
    pub center: Vect<D>,
    pub size: Vect<D>,
    /// Area (2D) or volume (3D) of the box.
    pub measure: f64,
}

impl<const D: usize> Candidate<D> {
    pub fn new(center: Vect<D>, size: Vect<D>) -> Self {
        Self { center, size, measure: size.iter().product() }
    }

    /// Candidate for a tree leaf's box.
    pub fn for_leaf(map: &EmbeddedMap<D>, id: NodeId) -> Self {
        Self::new(map.node_center(id), map.node_size(id))
    }

    /// Chebyshev-style distance scaled by the box: `max_a |2(c_a - p_a)| / size_a`.
    /// At most 1 exactly when `p` lies in the closed box.
    pub fn scaled_inf_dist(&self, p: &Vect<D>) -> f64 {
        let mut m = 0.0f64;
        for a in 0..D {
            m = m.max((2.0 * (self.center[a] - p[a])).abs() / self.size[a]);
        }
        m
    }
}

/// Smooth bump: 1 below 0, raised-cosine falloff on (0, 1), 0 beyond.
pub fn phi(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < 1.0 {
        (1.0 + (std::f64::consts::PI * x).cos()) / 2.0
    } else {
        0.0
    }
}

/// Repulsion gain: `1/s - 1` for scaled distances up to 1, 0 beyond.
/// The argument is clamped below by [`EPSILON`] so the gain stays finite.
pub fn mu(s: f64) -> f64 {
    if s > 1.0 {
        0.0
    } else {
        1.0 / s.max(EPSILON) - 1.0
    }
}

/// Scaled distance from `p` to the nearest sensed box: at most 1 exactly
/// when `p` is inside one of them; infinite when nothing is sensed.
pub fn eta<const D: usize>(p: &Vect<D>, sensed: &[Candidate<D>]) -> f64 {
    sensed.iter().map(|c| c.scaled_inf_dist(p)).fold(f64::INFINITY, f64::min)
}

/// Convenience: η at a position, sensing through the neighbor grid.
pub fn eta_at<const D: usize>(
    map: &EmbeddedMap<D>,
    nmap: &NeighborMap<'_, D>,
    p: &Vect<D>,
    r_sense: f64,
) -> f64 {
    let cands: Vec<Candidate<D>> = nmap
        .sense_black_leaves(p, r_sense)
        .into_iter()
        .map(|id| Candidate::for_leaf(map, id))
        .collect();
    eta(p, &cands)
}

/// Walks the tree toward black mass and returns the reached black leaf.
///
/// Inside the map the walk starts at the parent of the robot's current leaf
/// and always takes the child with the largest attraction weight (ties break
/// to the nearer box center, then the lower child index). Outside the map it
/// starts at the root and takes the nearest child that holds any black at
/// all. On merged trees the walk always ends on a black leaf.
pub fn tree_search_candidate<const D: usize>(map: &EmbeddedMap<D>, p: &Vect<D>) -> NodeId {
    let id = match map.locate_leaf(p) {
        Some(leaf) => {
            let start = map.tree().node(leaf).parent.unwrap_or(NodeId::ROOT);
            descend_max_beta(map, start, p)
        }
        None => descend_nearest_black(map, NodeId::ROOT, p),
    };
    debug_assert!(
        map.tree().node(id).color().map(|c| c.is_black()).unwrap_or(false),
        "tree search must end on a black leaf"
    );
    id
}

fn descend_max_beta<const D: usize>(map: &EmbeddedMap<D>, start: NodeId, p: &Vect<D>) -> NodeId {
    let mut id = start;
    while let NodeKind::Internal(children) = &map.tree().node(id).kind {
        let mut best = children[0];
        let mut best_beta = map.beta(best);
        let mut best_d2 = (map.node_center(best) - p).norm_squared();
        for &c in &children[1..] {
            let b = map.beta(c);
            let d2 = (map.node_center(c) - p).norm_squared();
            if b > best_beta || (b == best_beta && d2 < best_d2) {
                best = c;
                best_beta = b;
                best_d2 = d2;
            }
        }
        id = best;
    }
    id
}

fn descend_nearest_black<const D: usize>(
    map: &EmbeddedMap<D>,
    start: NodeId,
    p: &Vect<D>,
) -> NodeId {
    let mut id = start;
    while let NodeKind::Internal(children) = &map.tree().node(id).kind {
        let mut best: Option<(NodeId, f64)> = None;
        for &c in children.iter() {
            if map.beta(c) <= 0.0 {
                continue;
            }
            let d2 = (map.node_center(c) - p).norm_squared();
            if best.map(|(_, bd)| d2 < bd).unwrap_or(true) {
                best = Some((c, d2));
            }
        }
        // the current node holds black, so some child does too
        id = best.expect("internal node with positive attraction").0;
    }
    id
}

/// Free cells of the finest grid the robot may settle on: depth-`d_max`
/// cells whose centers are within `r_sense` of `p`, lie in a sensed black
/// leaf, and are not already claimed by a neighbor (center closer than
/// `r_avoid / 2`). Cells come out in x-fastest grid order.
pub fn virtual_candidates<const D: usize>(
    map: &EmbeddedMap<D>,
    p: &Vect<D>,
    sensed: &[NodeId],
    neighbors: &[Vect<D>],
    params: &ControlParams<D>,
) -> Vec<Candidate<D>> {
    let d_max = map.tree().d_max();
    let side = map.side_at(d_max);
    let origin = map.origin();
    let n = 1i64 << d_max;
    let r = params.r_sense;
    let r2 = r * r;
    let excl2 = (params.r_avoid / 2.0) * (params.r_avoid / 2.0);

    let mut lo = [0i64; D];
    let mut hi = [0i64; D];
    for a in 0..D {
        lo[a] = (((p[a] - r) - origin[a]) / side).floor().max(0.0) as i64;
        hi[a] = ((((p[a] + r) - origin[a]) / side).floor() as i64).min(n - 1);
        if lo[a] > hi[a] {
            return Vec::new();
        }
    }

    let mut out = Vec::new();
    let mut cache: Option<NodeId> = None;
    let mut cursor = lo;
    'cells: loop {
        let mut center = Vect::<D>::zeros();
        for a in 0..D {
            center[a] = origin[a] + (cursor[a] as f64 + 0.5) * side;
        }
        if (center - p).norm_squared() <= r2
            && !neighbors.iter().any(|q| (center - q).norm_squared() < excl2)
        {
            // black iff the center lies in one of the sensed black leaves;
            // consecutive cells usually share a leaf, so try the last hit first
            let hit = match cache {
                Some(id) if leaf_contains(map, id, &center) => true,
                _ => match sensed.iter().find(|&&id| leaf_contains(map, id, &center)) {
                    Some(&id) => {
                        cache = Some(id);
                        true
                    }
                    None => false,
                },
            };
            if hit {
                out.push(Candidate::new(center, Vect::<D>::repeat(side)));
            }
        }
        for a in 0..D {
            cursor[a] += 1;
            if cursor[a] <= hi[a] {
                continue 'cells;
            }
            cursor[a] = lo[a];
        }
        break;
    }
    out
}

/// Half-open box membership, consistent with [`EmbeddedMap::locate_leaf`].
fn leaf_contains<const D: usize>(map: &EmbeddedMap<D>, id: NodeId, p: &Vect<D>) -> bool {
    let min = map.node_min(id);
    let side = map.side_at(map.tree().node(id).depth);
    (0..D).all(|a| p[a] >= min[a] && p[a] < min[a] + side)
}

/// The attraction blend: `kappa1 * sum(w (c - p)) / sum(w)`, or zero when
/// there is nothing to blend or the weights vanish.
pub fn weighted_attraction<const D: usize>(
    p: &Vect<D>,
    weighted: &[(Candidate<D>, f64)],
    kappa1: f64,
) -> Vect<D> {
    let mut num = Vect::<D>::zeros();
    let mut den = 0.0;
    for (c, w) in weighted {
        num += (c.center - p) * *w;
        den += w;
    }
    if weighted.is_empty() || den <= EPSILON {
        Vect::<D>::zeros()
    } else {
        num * (kappa1 / den)
    }
}

/// Forming velocity: outside the map or away from black space the robot
/// tracks real leaves weighted by size over distance; once inside sensed
/// black space it drifts toward free virtual cells weighted by closeness.
pub fn forming_velocity<const D: usize>(
    map: &EmbeddedMap<D>,
    nmap: &NeighborMap<'_, D>,
    p: &Vect<D>,
    neighbors: &[(usize, Vect<D>)],
    params: &ControlParams<D>,
) -> Vect<D> {
    let size_over_dist = |id: NodeId| {
        let c = Candidate::for_leaf(map, id);
        let w = c.measure / (c.center - p).norm().max(EPSILON);
        (c, w)
    };

    if !map.contains(p) {
        let target = tree_search_candidate(map, p);
        return weighted_attraction(p, &[size_over_dist(target)], params.kappa1);
    }

    let sensed = nmap.sense_black_leaves(p, params.r_sense);
    let cands: Vec<Candidate<D>> =
        sensed.iter().map(|&id| Candidate::for_leaf(map, id)).collect();
    if eta(p, &cands) > 1.0 {
        // approaching: sensed leaves plus the tree-search target, deduplicated
        let mut ids = sensed;
        let target = tree_search_candidate(map, p);
        if let Err(pos) = ids.binary_search(&target) {
            ids.insert(pos, target);
        }
        let weighted: Vec<_> = ids.into_iter().map(size_over_dist).collect();
        weighted_attraction(p, &weighted, params.kappa1)
    } else {
        // settled in black space: spread over free cells nearby
        let positions: Vec<Vect<D>> = neighbors.iter().map(|&(_, q)| q).collect();
        let virt = virtual_candidates(map, p, &sensed, &positions, params);
        let weighted: Vec<_> = virt
            .into_iter()
            .map(|c| {
                let w = phi((c.center - p).norm() / params.r_sense);
                (c, w)
            })
            .collect();
        weighted_attraction(p, &weighted, params.kappa1)
    }
}

/// Avoidance velocity with per-axis downwash scaling: each neighbor within
/// the scaled avoidance radius pushes the robot along their separation.
/// Coincident robots repel along a deterministic pseudo-random direction.
pub fn avoiding_velocity<const D: usize>(
    robot: usize,
    p: &Vect<D>,
    neighbors: &[(usize, Vect<D>)],
    params: &ControlParams<D>,
) -> Vect<D> {
    let mut v = Vect::<D>::zeros();
    for &(j, q) in neighbors {
        let mut d = p - q;
        if d.norm() < EPSILON {
            d = coincident_direction::<D>(robot, j) * EPSILON;
        }
        let scaled = Vect::<D>::from_fn(|a, _| d[a] / (1.0 + params.alpha[a]));
        let s = scaled.norm() / params.r_avoid;
        v += d * (params.kappa2 * mu(s));
    }
    v
}

/// Full control law: forming plus avoiding, clipped to `v_max`.
pub fn control<const D: usize>(
    map: &EmbeddedMap<D>,
    nmap: &NeighborMap<'_, D>,
    robot: usize,
    p: &Vect<D>,
    neighbors: &[(usize, Vect<D>)],
    params: &ControlParams<D>,
) -> Vect<D> {
    let v = forming_velocity(map, nmap, p, neighbors, params)
        + avoiding_velocity(robot, p, neighbors, params);
    let n = v.norm();
    if n > params.v_max {
        v * (params.v_max / n)
    } else {
        v
    }
}

/// Unit repulsion direction for two coincident robots, a pure function of
/// the id pair: `dir(i, j) == -dir(j, i)` and stable across calls.
fn coincident_direction<const D: usize>(i: usize, j: usize) -> Vect<D> {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let mut state = ((lo as u64) << 32) ^ (hi as u64) ^ 0x5851_F42D_4C95_7F2D;
    loop {
        let mut v = Vect::<D>::zeros();
        for a in 0..D {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            v[a] = (splitmix64(state) as f64 / u64::MAX as f64) * 2.0 - 1.0;
        }
        let n = v.norm();
        if n > 1e-3 {
            let u = v / n;
            return if i == lo { u } else { -u };
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{BinaryImage, Color};
    use crate::tree::TreeMap;
    use approx::assert_relative_eq;

    #[test]
    fn phi_is_a_raised_cosine_bump() {
        assert_eq!(phi(-1.0), 1.0);
        assert_eq!(phi(0.0), 1.0);
        assert_relative_eq!(phi(0.5), 0.5, max_relative = 1e-12);
        assert_eq!(phi(1.0), 0.0);
        assert_eq!(phi(2.0), 0.0);
        let mut prev = 1.0;
        for k in 1..=100 {
            let v = phi(k as f64 / 100.0);
            assert!(v <= prev, "phi must not increase");
            prev = v;
        }
    }

    #[test]
    fn mu_matches_hand_values() {
        assert_relative_eq!(mu(0.25), 3.0, max_relative = 1e-12);
        assert_relative_eq!(mu(0.5), 1.0, max_relative = 1e-12);
        assert_eq!(mu(1.0), 0.0);
        assert_eq!(mu(2.0), 0.0);
        assert!(mu(0.0).is_finite()); // clamped by EPSILON
    }

    #[test]
    fn eta_measures_scaled_box_distance() {
        let c = Candidate::new(Vect::<2>::new(1.0, 1.0), Vect::<2>::new(2.0, 2.0));
        assert_eq!(eta(&Vect::<2>::new(1.0, 1.0), &[c]), 0.0);
        assert_relative_eq!(eta(&Vect::<2>::new(2.0, 1.0), &[c]), 1.0, max_relative = 1e-12);
        assert_relative_eq!(eta(&Vect::<2>::new(2.5, 1.0), &[c]), 1.5, max_relative = 1e-12);
        assert_eq!(eta(&Vect::<2>::new(0.0, 0.0), &[]), f64::INFINITY);
    }

    #[test]
    fn weighted_attraction_blends_by_weight() {
        // two boxes: unit box at (1,0) and a 2x2 box at (-2,0), seen from
        // the origin with size-over-distance weights 1 and 2
        let a = Candidate::new(Vect::<2>::new(1.0, 0.0), Vect::<2>::repeat(1.0));
        let b = Candidate::new(Vect::<2>::new(-2.0, 0.0), Vect::<2>::repeat(2.0));
        let p = Vect::<2>::zeros();
        let wa = a.measure / 1.0;
        let wb = b.measure / 2.0;
        let v = weighted_attraction(&p, &[(a, wa), (b, wb)], 20.0);
        assert_relative_eq!(v[0], -20.0, max_relative = 1e-9);
        assert_relative_eq!(v[1], 0.0, max_relative = 1e-9);
        // no candidates, or zero weights: rest
        assert_eq!(weighted_attraction::<2>(&p, &[], 20.0), Vect::<2>::zeros());
        assert_eq!(weighted_attraction(&p, &[(a, 0.0)], 20.0), Vect::<2>::zeros());
    }

    #[test]
    fn avoiding_matches_hand_values() {
        let params = ControlParams::<2>::new(20.0, 25.0, 0.6, 1.5, 10.0);
        // neighbor 0.3 away: s = 0.5, mu = 1, v = 25 * (-0.3, 0)
        let v = avoiding_velocity(0, &Vect::<2>::zeros(), &[(1, Vect::<2>::new(0.3, 0.0))], &params);
        assert_relative_eq!(v[0], -7.5, max_relative = 1e-9);
        assert_relative_eq!(v[1], 0.0, max_relative = 1e-9);
        // outside the avoidance radius: nothing
        let v = avoiding_velocity(0, &Vect::<2>::zeros(), &[(1, Vect::<2>::new(0.7, 0.0))], &params);
        assert_eq!(v, Vect::<2>::zeros());
    }

    #[test]
    fn avoiding_downwash_stretches_z() {
        let params = ControlParams::<3>::new(20.0, 25.0, 0.5, 0.8, 10.0).with_alpha_z(0.5);
        // neighbor 0.45 below: scaled distance 0.3, s = 0.6, mu = 2/3,
        // v = 25 * (2/3) * (0, 0, 0.45) = (0, 0, 7.5)
        let below = Vect::<3>::new(0.0, 0.0, -0.45);
        let v = avoiding_velocity(0, &Vect::<3>::zeros(), &[(1, below)], &params);
        assert_relative_eq!(v[2], 7.5, max_relative = 1e-9);
        assert_relative_eq!(v[0], 0.0, max_relative = 1e-9);
        // the same separation sideways is unscaled (s = 0.9), so the push
        // is much weaker: 25 * (1/0.9 - 1) * (-0.45, 0, 0)
        let side = Vect::<3>::new(0.45, 0.0, 0.0);
        let v = avoiding_velocity(0, &Vect::<3>::zeros(), &[(1, side)], &params);
        assert_relative_eq!(v[0], -25.0 * (1.0 / 0.9 - 1.0) * 0.45, max_relative = 1e-9);
        assert_relative_eq!(v[2], 0.0, max_relative = 1e-9);
    }

    #[test]
    fn coincident_robots_repel_deterministically() {
        let params = ControlParams::<2>::new(20.0, 25.0, 0.6, 1.5, 10.0);
        let p = Vect::<2>::new(1.0, 1.0);
        let v12 = avoiding_velocity(1, &p, &[(2, p)], &params);
        let v21 = avoiding_velocity(2, &p, &[(1, p)], &params);
        assert!(v12.norm() > 0.0);
        assert_relative_eq!((v12 + v21).norm(), 0.0, epsilon = 1e-9);
        assert_eq!(v12, avoiding_velocity(1, &p, &[(2, p)], &params));
        // different pairs get different directions
        let v13 = avoiding_velocity(1, &p, &[(3, p)], &params);
        assert!((v12.normalize() - v13.normalize()).norm() > 1e-6);
    }

    /// 4x4 map, black pixels at (0,0) and (3,3), embedded at the origin.
    fn two_pixel_map() -> EmbeddedMap<2> {
        let mut img = BinaryImage::<2>::blank(4).unwrap();
        img.set([0, 0], Color::Black);
        img.set([3, 3], Color::Black);
        let tree = TreeMap::encode(&img, 2).unwrap().merge();
        EmbeddedMap::embed(tree, 2, 0.6, 0.0, Vect::<2>::zeros()).unwrap()
    }

    #[test]
    fn tree_search_outside_walks_to_nearest_black() {
        let map = two_pixel_map();
        let c = map.c_pixel();
        // below the lower-left corner: nearest black is the (0,0) pixel
        let p = Vect::<2>::new(0.5 * c, -1.0);
        let id = tree_search_candidate(&map, &p);
        assert_eq!(map.tree().node(id).coords, [0, 0]);
        // beyond the upper-right corner: the (3,3) pixel
        let p = Vect::<2>::new(4.5 * c, 5.0 * c);
        let id = tree_search_candidate(&map, &p);
        assert_eq!(map.tree().node(id).coords, [3, 3]);
    }

    #[test]
    fn tree_search_inside_starts_local() {
        let map = two_pixel_map();
        let c = map.c_pixel();
        // inside the white pixel (1,1): its parent quadrant holds (0,0)
        let p = Vect::<2>::new(1.5 * c, 1.5 * c);
        let id = tree_search_candidate(&map, &p);
        assert_eq!(map.tree().node(id).coords, [0, 0]);
        let p = Vect::<2>::new(2.5 * c, 2.5 * c);
        let id = tree_search_candidate(&map, &p);
        assert_eq!(map.tree().node(id).coords, [3, 3]);
    }

    #[test]
    fn virtual_cells_skip_occupied_and_white() {
        let img = BinaryImage::<2>::from_fn(2, |_| Color::Black).unwrap();
        let tree = TreeMap::encode(&img, 1).unwrap().merge();
        let map = EmbeddedMap::embed(tree, 4, 0.6, 0.0, Vect::<2>::zeros()).unwrap();
        let params = ControlParams::<2>::new(20.0, 25.0, 0.6, 10.0, 10.0);
        let p = map.node_center(NodeId::ROOT);
        let sensed: Vec<NodeId> = map.black_leaf_ids().collect();
        // every cell is black and free: all four centers, x-fastest order
        let cells = virtual_candidates(&map, &p, &sensed, &[], &params);
        assert_eq!(cells.len(), 4);
        let s = map.side_at(1);
        assert_relative_eq!(cells[0].center[0], 0.5 * s, max_relative = 1e-12);
        assert_relative_eq!(cells[1].center[0], 1.5 * s, max_relative = 1e-12);
        assert_relative_eq!(cells[1].center[1], 0.5 * s, max_relative = 1e-12);
        // a neighbor parked on a center claims that cell
        let taken = cells[2].center;
        let remaining = virtual_candidates(&map, &p, &sensed, &[taken], &params);
        assert_eq!(remaining.len(), 3);
        assert!(remaining.iter().all(|c| (c.center - taken).norm() > 0.0));
        // a neighbor at exactly r_avoid/2 claims nothing (the exclusion is strict)
        let at_edge = cells[0].center - Vect::<2>::new(0.3, 0.0);
        let cells = virtual_candidates(&map, &p, &sensed, &[at_edge], &params);
        assert_eq!(cells.len(), 4);
    }

    #[test]
    fn forming_outside_pulls_toward_the_map() {
        let map = two_pixel_map();
        let nmap = NeighborMap::build(&map, 1).unwrap();
        let params = ControlParams::<2>::new(20.0, 25.0, 0.6, 1.5, 10.0);
        let c = map.c_pixel();
        let p = Vect::<2>::new(0.5 * c, -2.0 * c);
        let v = forming_velocity(&map, &nmap, &p, &[], &params);
        // single candidate: the weights cancel, v = kappa1 * (center - p)
        let target = map.node_center(tree_search_candidate(&map, &p));
        assert_relative_eq!(v[0], 20.0 * (target[0] - p[0]), max_relative = 1e-9);
        assert_relative_eq!(v[1], 20.0 * (target[1] - p[1]), max_relative = 1e-9);
        assert!(v[1] > 0.0, "must pull upward into the map");
    }

    #[test]
    fn forming_settled_robot_rests_when_cells_are_taken() {
        let img = BinaryImage::<2>::from_fn(2, |_| Color::Black).unwrap();
        let tree = TreeMap::encode(&img, 1).unwrap().merge();
        let map = EmbeddedMap::embed(tree, 4, 0.6, 0.0, Vect::<2>::zeros()).unwrap();
        let nmap = NeighborMap::build(&map, 0).unwrap();
        let params = ControlParams::<2>::new(20.0, 25.0, 0.6, 10.0, 10.0);
        let s = map.side_at(1);
        // all four cell centers occupied by neighbors sitting on them
        let neighbors: Vec<(usize, Vect<2>)> = [(0.5, 0.5), (1.5, 0.5), (0.5, 1.5), (1.5, 1.5)]
            .iter()
            .enumerate()
            .map(|(j, &(x, y))| (j + 1, Vect::<2>::new(x * s, y * s)))
            .collect();
        let p = neighbors[0].1; // robot 0 sits exactly on a center
        let v = forming_velocity(&map, &nmap, &p, &neighbors[1..], &params);
        assert_eq!(v, Vect::<2>::zeros());
    }

    #[test]
    fn control_clips_to_v_max() {
        let map = two_pixel_map();
        let nmap = NeighborMap::build(&map, 1).unwrap();
        let params = ControlParams::<2>::new(20.0, 25.0, 0.6, 1.5, 10.0);
        let p = Vect::<2>::new(0.0, -50.0); // far away: raw pull is huge
        let v = control(&map, &nmap, 0, &p, &[], &params);
        assert_relative_eq!(v.norm(), 10.0, max_relative = 1e-9);
        // near a free cell the command stays below the cap
        let q = map.node_center(tree_search_candidate(&map, &p));
        let v = control(&map, &nmap, 0, &q, &[], &params);
        assert!(v.norm() <= 10.0 + 1e-12);
    }
}
