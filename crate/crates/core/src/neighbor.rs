//! Dense neighbor-cell grid for local sensing.
//!
//! The grid slices the root box into `2^d_map` cells per axis and links each
//! cell to the tree node covering it, so a sensing query touches only the
//! cells under the sensing ball instead of walking the whole tree. Cells are
//! plain links; queries allocate only their result vector and the grid itself
//! never changes after construction.

use crate::embed::EmbeddedMap;
use crate::error::{Error, Result};
use crate::tree::{NodeId, NodeKind};
use crate::Vect;

/// How a grid cell relates to the tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellKind {
    /// The cell coincides with a leaf at exactly `d_map`.
    Leaf,
    /// The cell coincides with an internal node; leaves below are expanded
    /// on demand during queries.
    Subtree,
    /// The cell lies inside a leaf shallower than `d_map`.
    InsideLeaf,
}

/// One cell: its kind plus the node it links to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NeighborCell {
    pub kind: CellKind,
    pub node: NodeId,
}

/// Uniform grid over an embedded map at depth `d_map`, stored x-fastest.
pub struct NeighborMap<'m, const D: usize> {
    map: &'m EmbeddedMap<D>,
    d_map: u32,
    cells: Vec<NeighborCell>,
}

impl<'m, const D: usize> NeighborMap<'m, D> {
    /// Builds the grid by one root-to-cell descent per cell.
    pub fn build(map: &'m EmbeddedMap<D>, d_map: u32) -> Result<Self> {
        let d_max = map.tree().d_max();
        if d_map > d_max {
            return Err(Error::MapDepth { d_map, d_max });
        }
        if d_map as usize * D > 30 {
            return Err(Error::Parameter {
                name: "d_map",
                value: d_map as f64,
                why: "grid would exceed 2^30 cells",
            });
        }
        let n = 1usize << d_map;
        let total = n.pow(D as u32);
        let tree = map.tree();
        let mut cells = Vec::with_capacity(total);
        for i in 0..total {
            let coords = unflatten::<D>(i, n);
            let mut id = NodeId::ROOT;
            let mut depth = 0u32;
            let cell = loop {
                match &tree.node(id).kind {
                    NodeKind::Leaf(_) => {
                        let kind =
                            if depth == d_map { CellKind::Leaf } else { CellKind::InsideLeaf };
                        break NeighborCell { kind, node: id };
                    }
                    NodeKind::Internal(children) => {
                        if depth == d_map {
                            break NeighborCell { kind: CellKind::Subtree, node: id };
                        }
                        let shift = d_map - depth - 1;
                        let mut k = 0usize;
                        for (a, ca) in coords.iter().enumerate() {
                            k |= ((ca >> shift) & 1) << a;
                        }
                        id = children[k];
                        depth += 1;
                    }
                }
            };
            cells.push(cell);
        }
        Ok(Self { map, d_map, cells })
    }

    #[inline]
    pub fn d_map(&self) -> u32 {
        self.d_map
    }

    #[inline]
    pub fn map(&self) -> &EmbeddedMap<D> {
        self.map
    }

    /// Cells per axis.
    #[inline]
    pub fn cells_per_axis(&self) -> usize {
        1usize << self.d_map
    }

    #[inline]
    pub fn cells(&self) -> &[NeighborCell] {
        &self.cells
    }

    #[inline]
    pub fn cell(&self, coords: [u32; D]) -> NeighborCell {
        let n = self.cells_per_axis();
        let mut c = [0usize; D];
        for (a, ca) in c.iter_mut().enumerate() {
            *ca = coords[a] as usize;
        }
        self.cells[flatten::<D>(c, n)]
    }

    /// Black leaves whose boxes intersect the closed ball `B(p, r_sense)`,
    /// deduplicated and sorted by node id.
    ///
    /// Only grid cells under the ball's bounding box are visited; `Subtree`
    /// cells expand their leaves on the fly.
    pub fn sense_black_leaves(&self, p: &Vect<D>, r_sense: f64) -> Vec<NodeId> {
        if p.iter().any(|v| !v.is_finite()) {
            return Vec::new();
        }
        let side = self.map.side_at(self.d_map);
        let origin = self.map.origin();
        let n = 1i64 << self.d_map;
        let r2 = r_sense * r_sense;
        let mut lo = [0i64; D];
        let mut hi = [0i64; D];
        for a in 0..D {
            lo[a] = (((p[a] - r_sense) - origin[a]) / side).floor().max(0.0) as i64;
            hi[a] = ((((p[a] + r_sense) - origin[a]) / side).floor() as i64).min(n - 1);
            if lo[a] > hi[a] {
                return Vec::new();
            }
        }

        let mut found: Vec<NodeId> = Vec::new();
        let mut cursor = lo;
        'cells: loop {
            let mut coords = [0u32; D];
            let mut min = Vect::<D>::zeros();
            for a in 0..D {
                coords[a] = cursor[a] as u32;
                min[a] = origin[a] + cursor[a] as f64 * side;
            }
            if dist2_point_box(p, &min, side) <= r2 {
                let cell = self.cell(coords);
                match cell.kind {
                    CellKind::Leaf | CellKind::InsideLeaf => found.push(cell.node),
                    CellKind::Subtree => self.collect_leaves(cell.node, &mut found),
                }
            }
            // advance lexicographically, x fastest
            for a in 0..D {
                cursor[a] += 1;
                if cursor[a] <= hi[a] {
                    continue 'cells;
                }
                cursor[a] = lo[a];
            }
            break;
        }

        found.sort_unstable();
        found.dedup();
        found.retain(|&id| {
            let node = self.map.tree().node(id);
            let black = node.color().map(|c| c.is_black()).unwrap_or(false);
            black && {
                let min = self.map.node_min(id);
                dist2_point_box(p, &min, self.map.side_at(node.depth)) <= r2
            }
        });
        found
    }

    fn collect_leaves(&self, id: NodeId, out: &mut Vec<NodeId>) {
        match &self.map.tree().node(id).kind {
            NodeKind::Leaf(_) => out.push(id),
            NodeKind::Internal(children) => {
                for &c in children.iter() {
                    self.collect_leaves(c, out);
                }
            }
        }
    }
}

/// Squared distance from `p` to the closed cubic box at `min` with edge `side`.
fn dist2_point_box<const D: usize>(p: &Vect<D>, min: &Vect<D>, side: f64) -> f64 {
    let mut d2 = 0.0;
    for a in 0..D {
        let lo = min[a];
        let hi = min[a] + side;
        let d = if p[a] < lo {
            lo - p[a]
        } else if p[a] > hi {
            p[a] - hi
        } else {
            0.0
        };
        d2 += d * d;
    }
    d2
}

#[inline]
fn flatten<const D: usize>(coords: [usize; D], n: usize) -> usize {
    let mut idx = 0usize;
    for a in (0..D).rev() {
        idx = idx * n + coords[a];
    }
    idx
}

#[inline]
fn unflatten<const D: usize>(mut idx: usize, n: usize) -> [usize; D] {
    let mut coords = [0usize; D];
    for c in coords.iter_mut() {
        *c = idx % n;
        idx /= n;
    }
    coords
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{BinaryImage, Color};
    use crate::tree::TreeMap;
    use std::collections::BTreeSet;

    /// 8x8 image: upper-right quadrant solid black plus one pixel at (0,0).
    fn mixed_map() -> EmbeddedMap<2> {
        let img = BinaryImage::<2>::from_fn(8, |c| {
            if (c[0] >= 4 && c[1] >= 4) || (c[0] == 0 && c[1] == 0) {
                Color::Black
            } else {
                Color::White
            }
        })
        .unwrap();
        let tree = TreeMap::encode(&img, 3).unwrap().merge();
        EmbeddedMap::embed(tree, 17, 0.6, 0.0, Vect::<2>::zeros()).unwrap()
    }

    #[test]
    fn build_classifies_cells() {
        let map = mixed_map();
        let nmap = NeighborMap::build(&map, 2).unwrap();
        assert_eq!(nmap.cells().len(), 16);
        // the solid quadrant is one depth-1 leaf: its four cells sit inside it
        let inside = nmap.cell([2, 2]);
        assert_eq!(inside.kind, CellKind::InsideLeaf);
        assert_eq!(map.tree().node(inside.node).depth, 1);
        assert!(map.tree().node(inside.node).color().unwrap().is_black());
        // the pixel quadrant still has structure below d_map
        let sub = nmap.cell([0, 0]);
        assert_eq!(sub.kind, CellKind::Subtree);
        assert!(!map.tree().node(sub.node).is_leaf());
        // a white depth-2 leaf coincides with its cell
        let leaf = nmap.cell([1, 1]);
        assert_eq!(leaf.kind, CellKind::Leaf);
        assert_eq!(map.tree().node(leaf.node).depth, 2);
    }

    #[test]
    fn cells_cover_every_leaf() {
        let map = mixed_map();
        for d_map in 0..=3 {
            let nmap = NeighborMap::build(&map, d_map).unwrap();
            let mut linked = BTreeSet::new();
            for cell in nmap.cells() {
                match cell.kind {
                    CellKind::Leaf | CellKind::InsideLeaf => {
                        linked.insert(cell.node);
                    }
                    CellKind::Subtree => {
                        let mut leaves = Vec::new();
                        nmap.collect_leaves(cell.node, &mut leaves);
                        linked.extend(leaves);
                    }
                }
            }
            let all: BTreeSet<NodeId> =
                map.tree().iter().filter(|(_, n)| n.is_leaf()).map(|(id, _)| id).collect();
            assert_eq!(linked, all, "d_map = {d_map}");
        }
    }

    #[test]
    fn sense_matches_brute_force() {
        let map = mixed_map();
        let nmap = NeighborMap::build(&map, 2).unwrap();
        let side = map.root_side();
        for (qx, qy, r) in [
            (0.1, 0.1, 0.3),
            (0.5, 0.5, 0.45),
            (0.9, 0.9, 0.2),
            (0.5, 0.0, 0.6),
            (-0.2, -0.2, 0.25),
            (0.5, 0.5, 3.0),
        ] {
            let p = Vect::<2>::new(qx * side, qy * side);
            let got = nmap.sense_black_leaves(&p, r);
            let want: Vec<NodeId> = map
                .black_leaf_ids()
                .filter(|&id| {
                    let depth = map.tree().node(id).depth;
                    dist2_point_box(&p, &map.node_min(id), map.side_at(depth)) <= r * r
                })
                .collect();
            assert_eq!(got, want, "query ({qx}, {qy}, {r})");
        }
    }

    #[test]
    fn sense_far_away_is_empty() {
        let map = mixed_map();
        let nmap = NeighborMap::build(&map, 2).unwrap();
        let p = Vect::<2>::repeat(-100.0);
        assert!(nmap.sense_black_leaves(&p, 1.0).is_empty());
        assert!(nmap.sense_black_leaves(&Vect::<2>::new(f64::NAN, 0.0), 1.0).is_empty());
    }

    #[test]
    fn build_rejects_depth_beyond_tree() {
        let map = mixed_map();
        assert!(matches!(
            NeighborMap::build(&map, 4),
            Err(Error::MapDepth { d_map: 4, d_max: 3 })
        ));
    }
}
