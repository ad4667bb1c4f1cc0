//! Metric embedding of tree maps.
//!
//! Embedding gives every tree node a physical box. The pixel edge length is
//! chosen so that the black region offers exactly as much area (volume) as
//! `n_robot` robots occupy at their avoidance footprint, which makes the
//! packing density independent of shape and swarm size. Each node also gets
//! an attraction weight `beta`: the fraction of black at the tree's own
//! resolution below it, averaged upward from the leaves.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tree::{NodeId, NodeKind, TreeMap};
use crate::Vect;

/// Space one robot claims: a disk of diameter `r_avoid` in 2D, in 3D an
/// ellipsoid whose vertical semi-axis is stretched by `1 + alpha_z`.
pub fn robot_footprint<const D: usize>(r_avoid: f64, alpha_z: f64) -> f64 {
    let r = r_avoid / 2.0;
    match D {
        2 => PI * r * r,
        3 => 4.0 / 3.0 * PI * r * r * ((1.0 + alpha_z) * r),
        _ => panic!("unsupported dimension {D}"),
    }
}

/// Edge length of one shape cell so that `n_black` cells hold `n_robot`
/// robots: `(footprint * n_robot / n_black)^(1/D)`.
pub fn pixel_size<const D: usize>(
    r_avoid: f64,
    alpha_z: f64,
    n_robot: usize,
    n_black: u64,
) -> f64 {
    let s_r = robot_footprint::<D>(r_avoid, alpha_z);
    (s_r * n_robot as f64 / n_black as f64).powf(1.0 / D as f64)
}

/// A tree map placed in metric space.
#[derive(Clone, Debug)]
pub struct EmbeddedMap<const D: usize> {
    tree: TreeMap<D>,
    origin: Vect<D>,
    c_pixel: f64,
    beta: Vec<f64>,
    n_black: u64,
}

impl<const D: usize> EmbeddedMap<D> {
    /// Embeds `tree` with its minimum corner at `origin`.
    ///
    /// Fails if the tree has no black leaves (nothing to assemble) or the
    /// robot parameters are degenerate.
    pub fn embed(
        tree: TreeMap<D>,
        n_robot: usize,
        r_avoid: f64,
        alpha_z: f64,
        origin: Vect<D>,
    ) -> Result<Self> {
        if n_robot == 0 {
            return Err(Error::Parameter {
                name: "n_robot",
                value: 0.0,
                why: "need at least one robot",
            });
        }
        if !(r_avoid.is_finite() && r_avoid > 0.0) {
            return Err(Error::Parameter {
                name: "r_avoid",
                value: r_avoid,
                why: "must be finite and positive",
            });
        }
        if !(alpha_z.is_finite() && alpha_z >= 0.0) {
            return Err(Error::Parameter {
                name: "alpha_z",
                value: alpha_z,
                why: "must be finite and non-negative",
            });
        }
        if origin.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter {
                name: "origin",
                value: f64::NAN,
                why: "must be finite",
            });
        }
        let n_black = tree.black_cells();
        if n_black == 0 {
            return Err(Error::AllWhite);
        }
        let c_pixel = pixel_size::<D>(r_avoid, alpha_z, n_robot, n_black);

        // attraction weights, deepest nodes first so children are ready
        let mut beta = vec![0.0f64; tree.node_count()];
        let mut order: Vec<usize> = (0..tree.node_count()).collect();
        order.sort_by(|&a, &b| tree.nodes()[b].depth.cmp(&tree.nodes()[a].depth));
        for i in order {
            beta[i] = match &tree.nodes()[i].kind {
                NodeKind::Leaf(c) => c.bit() as f64,
                NodeKind::Internal(children) => {
                    children.iter().map(|c| beta[c.index()]).sum::<f64>() / children.len() as f64
                }
            };
        }

        Ok(Self { tree, origin, c_pixel, beta, n_black })
    }

    #[inline]
    pub fn tree(&self) -> &TreeMap<D> {
        &self.tree
    }

    #[inline]
    pub fn origin(&self) -> Vect<D> {
        self.origin
    }

    /// Edge length of one cell at depth `d_max`.
    #[inline]
    pub fn c_pixel(&self) -> f64 {
        self.c_pixel
    }

    /// Black cells at the tree's resolution; the mass the swarm fills.
    #[inline]
    pub fn n_black(&self) -> u64 {
        self.n_black
    }

    /// Attraction weight of a node: mean blackness of its subtree's leaves.
    #[inline]
    pub fn beta(&self, id: NodeId) -> f64 {
        self.beta[id.index()]
    }

    /// Edge length of the root box: `2^d_max * c_pixel`.
    #[inline]
    pub fn root_side(&self) -> f64 {
        (1u64 << self.tree.d_max()) as f64 * self.c_pixel
    }

    #[inline]
    pub fn max_corner(&self) -> Vect<D> {
        self.origin + Vect::<D>::repeat(self.root_side())
    }

    /// Edge length of any node box at `depth` (exact halving per level).
    #[inline]
    pub fn side_at(&self, depth: u32) -> f64 {
        self.root_side() / (1u64 << depth) as f64
    }

    /// Minimum corner of a node's box.
    pub fn node_min(&self, id: NodeId) -> Vect<D> {
        let node = self.tree.node(id);
        let side = self.side_at(node.depth);
        Vect::<D>::from_fn(|a, _| self.origin[a] + node.coords[a] as f64 * side)
    }

    /// Center of a node's box.
    pub fn node_center(&self, id: NodeId) -> Vect<D> {
        let node = self.tree.node(id);
        let side = self.side_at(node.depth);
        Vect::<D>::from_fn(|a, _| self.origin[a] + (node.coords[a] as f64 + 0.5) * side)
    }

    /// Side lengths of a node's box (cubic, one entry per axis).
    pub fn node_size(&self, id: NodeId) -> Vect<D> {
        Vect::<D>::repeat(self.side_at(self.tree.node(id).depth))
    }

    /// Minimum corner of grid cell `coords` at `depth`.
    pub fn cell_min(&self, depth: u32, coords: [u32; D]) -> Vect<D> {
        let side = self.side_at(depth);
        Vect::<D>::from_fn(|a, _| self.origin[a] + coords[a] as f64 * side)
    }

    /// Center of grid cell `coords` at `depth`.
    pub fn cell_center(&self, depth: u32, coords: [u32; D]) -> Vect<D> {
        let side = self.side_at(depth);
        Vect::<D>::from_fn(|a, _| self.origin[a] + (coords[a] as f64 + 0.5) * side)
    }

    /// Whether `p` lies in the root box (closed bounds; false for NaN).
    pub fn contains(&self, p: &Vect<D>) -> bool {
        let max = self.max_corner();
        (0..D).all(|a| p[a] >= self.origin[a] && p[a] <= max[a])
    }

    /// The leaf whose box contains `p`, or `None` outside the root box.
    ///
    /// Boxes are half-open per axis; a point exactly on an internal face
    /// belongs to the higher cell, and the global maximum faces clamp inward
    /// so every contained point resolves to exactly one leaf.
    pub fn locate_leaf(&self, p: &Vect<D>) -> Option<NodeId> {
        if !self.contains(p) {
            return None;
        }
        let mut id = NodeId::ROOT;
        loop {
            match &self.tree.node(id).kind {
                NodeKind::Leaf(_) => return Some(id),
                NodeKind::Internal(children) => {
                    let center = self.node_center(id);
                    let mut k = 0usize;
                    for a in 0..D {
                        if p[a] >= center[a] {
                            k |= 1 << a;
                        }
                    }
                    id = children[k];
                }
            }
        }
    }

    /// Grid coordinates of the depth-`depth` cell containing `p`, or `None`
    /// outside the root box. Pure arithmetic, no tree walk.
    pub fn locate_at_depth(&self, p: &Vect<D>, depth: u32) -> Option<[u32; D]> {
        if !self.contains(p) {
            return None;
        }
        let side = self.side_at(depth);
        let hi = (1u64 << depth) - 1;
        let mut out = [0u32; D];
        for (a, oa) in out.iter_mut().enumerate() {
            let raw = ((p[a] - self.origin[a]) / side).floor();
            *oa = raw.clamp(0.0, hi as f64) as u32;
        }
        Some(out)
    }

    /// Ids of all black leaves.
    pub fn black_leaf_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.tree
            .iter()
            .filter(|(_, n)| n.color().map(|c| c.is_black()).unwrap_or(false))
            .map(|(id, _)| id)
    }
}
