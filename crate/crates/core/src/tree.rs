//! Tree maps: quadtree (2D) / octree (3D) encodings of binary shapes.
//!
//! The encoder subdivides the image recursively: uniform blocks become leaves,
//! mixed blocks split until `d_max`, where the strict majority color wins
//! (ties go white). The root always subdivides so the map never degenerates to
//! a single node. [`TreeMap::merge`] collapses sibling leaf sets of one color
//! bottom-up, which matters after majority rounding has recolored deep blocks.
//!
//! Nodes live in an arena in BFS order (root at index 0, parents before
//! children); both the encoder and `merge` re-establish that layout, so two
//! structurally equal trees compare equal field by field.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::image::{BinaryImage, Color};

/// Bytes charged per link in the memory model.
pub const LINK_BYTES: f64 = 4.0;
/// Bytes charged per stored color (one bit).
pub const COLOR_BYTES: f64 = 0.125;

/// Index of a node in its tree's arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn new(index: usize) -> Self {
        NodeId(index as u32)
    }
}

/// Payload of a node: either a solid color or links to its 2^D children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Leaf(Color),
    Internal(Box<[NodeId]>),
}

/// One node of a tree map.
///
/// `coords` are the block coordinates among the `2^depth` blocks per axis at
/// this node's depth, so geometry never has to walk the tree. Child `k` of a
/// node covers the half with the higher coordinate on axis `a` iff bit `a` of
/// `k` is set (x = bit 0, y = bit 1, z = bit 2).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode<const D: usize> {
    pub parent: Option<NodeId>,
    pub depth: u32,
    pub coords: [u32; D],
    pub kind: NodeKind,
}

impl<const D: usize> TreeNode<D> {
    #[inline]
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf(_))
    }

    /// Leaf color, if this is a leaf.
    #[inline]
    pub fn color(&self) -> Option<Color> {
        match self.kind {
            NodeKind::Leaf(c) => Some(c),
            NodeKind::Internal(_) => None,
        }
    }

    /// Child links, if this is an internal node.
    #[inline]
    pub fn children(&self) -> Option<&[NodeId]> {
        match &self.kind {
            NodeKind::Leaf(_) => None,
            NodeKind::Internal(c) => Some(c),
        }
    }
}

/// A quadtree/octree map of a binary shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeMap<const D: usize> {
    d_max: u32,
    nodes: Vec<TreeNode<D>>,
    n_middle: usize,
    n_leaf: usize,
}

impl<const D: usize> TreeMap<D> {
    /// Encodes `image` into a tree of depth at most `d_max`.
    ///
    /// The root subdivides unconditionally; deeper blocks become leaves when
    /// uniform, or at depth `d_max` with their strict-majority color (a tie
    /// rounds to white). If `d_max` exceeds the pixel depth the tree simply
    /// bottoms out at single-pixel leaves and stays lossless.
    pub fn encode(image: &BinaryImage<D>, d_max: u32) -> Result<Self> {
        if D != 2 && D != 3 {
            return Err(Error::Dimension(D));
        }
        if !(1..=20).contains(&d_max) {
            return Err(Error::MaxDepth(d_max));
        }
        let counts = BlockCounts::new(image);
        let n_div = 1usize << D;
        let mut nodes: Vec<TreeNode<D>> = vec![TreeNode {
            parent: None,
            depth: 0,
            coords: [0; D],
            kind: NodeKind::Internal(Box::from([])),
        }];
        let mut queue = VecDeque::from([NodeId::ROOT]);
        while let Some(id) = queue.pop_front() {
            let depth = nodes[id.index()].depth;
            let coords = nodes[id.index()].coords;
            let child_depth = depth + 1;
            let volume = counts.volume(child_depth);
            let mut children = Vec::with_capacity(n_div);
            for k in 0..n_div {
                let mut c = [0u32; D];
                for (a, ca) in c.iter_mut().enumerate() {
                    *ca = coords[a] * 2 + ((k >> a) & 1) as u32;
                }
                let black = counts.black(child_depth, c, image);
                let kind = if black == 0 {
                    NodeKind::Leaf(Color::White)
                } else if black == volume {
                    NodeKind::Leaf(Color::Black)
                } else if child_depth == d_max {
                    let majority = if 2 * black > volume { Color::Black } else { Color::White };
                    NodeKind::Leaf(majority)
                } else {
                    NodeKind::Internal(Box::from([]))
                };
                let cid = NodeId::new(nodes.len());
                let internal = matches!(kind, NodeKind::Internal(_));
                nodes.push(TreeNode { parent: Some(id), depth: child_depth, coords: c, kind });
                if internal {
                    queue.push_back(cid);
                }
                children.push(cid);
            }
            nodes[id.index()].kind = NodeKind::Internal(children.into_boxed_slice());
        }
        let (n_middle, n_leaf) = count_kinds(&nodes);
        Ok(Self { d_max, nodes, n_middle, n_leaf })
    }

    /// Collapses every non-root internal node whose children are all leaves
    /// of one color, bottom-up until nothing changes, then renumbers the
    /// arena back into BFS order. Idempotent; the root is never collapsed.
    pub fn merge(mut self) -> Self {
        let mut order: Vec<usize> = (1..self.nodes.len()).collect();
        order.sort_by(|&a, &b| self.nodes[b].depth.cmp(&self.nodes[a].depth));
        for idx in order {
            let NodeKind::Internal(children) = &self.nodes[idx].kind else { continue };
            let mut colors = children.iter().map(|c| self.nodes[c.index()].color());
            if let Some(color) = colors.next().flatten() {
                if colors.all(|c| c == Some(color)) {
                    self.nodes[idx].kind = NodeKind::Leaf(color);
                }
            }
        }
        self.rebuild()
    }

    /// Rebuilds the arena in BFS order, dropping unreachable nodes.
    fn rebuild(&self) -> Self {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            order.push(i);
            if let NodeKind::Internal(children) = &self.nodes[i].kind {
                queue.extend(children.iter().map(|c| c.index()));
            }
        }
        let mut remap = vec![u32::MAX; self.nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new as u32;
        }
        let nodes: Vec<TreeNode<D>> = order
            .iter()
            .map(|&old| {
                let n = &self.nodes[old];
                let kind = match &n.kind {
                    NodeKind::Leaf(c) => NodeKind::Leaf(*c),
                    NodeKind::Internal(children) => NodeKind::Internal(
                        children.iter().map(|c| NodeId(remap[c.index()])).collect(),
                    ),
                };
                TreeNode {
                    parent: n.parent.map(|p| NodeId(remap[p.index()])),
                    depth: n.depth,
                    coords: n.coords,
                    kind,
                }
            })
            .collect();
        let (n_middle, n_leaf) = count_kinds(&nodes);
        Self { d_max: self.d_max, nodes, n_middle, n_leaf }
    }

    /// Bytes of the link/color memory model:
    /// `n_div*4 + n_middle*(n_div+1)*4 + n_leaf*(4 + 1/8)`.
    ///
    /// The root contributes its `n_div` child links; every other internal
    /// node adds a parent link plus `n_div` child links; every leaf adds a
    /// parent link and a one-bit color. All terms are exact in an `f64`.
    pub fn memory_bytes(&self) -> f64 {
        let n_div = (1usize << D) as f64;
        n_div * LINK_BYTES
            + self.n_middle as f64 * (n_div + 1.0) * LINK_BYTES
            + self.n_leaf as f64 * (LINK_BYTES + COLOR_BYTES)
    }

    /// Paints the map onto a `2^d_max`-sided raster.
    pub fn rasterize(&self) -> Result<BinaryImage<D>> {
        let side = 1usize << self.d_max;
        let mut img = BinaryImage::blank(side)?;
        for node in &self.nodes {
            if node.color() != Some(Color::Black) {
                continue;
            }
            let scale = 1usize << (self.d_max - node.depth);
            let mut lo = [0usize; D];
            for (la, ca) in lo.iter_mut().zip(&node.coords) {
                *la = *ca as usize * scale;
            }
            for i in 0..scale.pow(D as u32) {
                let mut c = lo;
                let mut rest = i;
                for ca in c.iter_mut() {
                    *ca += rest % scale;
                    rest /= scale;
                }
                img.set(c, Color::Black);
            }
        }
        Ok(img)
    }

    /// Number of black cells at the tree's own resolution (`2^d_max` per
    /// axis): each black leaf at depth `d` covers `2^((d_max-d)*D)` cells.
    pub fn black_cells(&self) -> u64 {
        self.nodes
            .iter()
            .filter(|n| n.color() == Some(Color::Black))
            .map(|n| 1u64 << ((self.d_max - n.depth) as u64 * D as u64))
            .sum()
    }

    #[inline]
    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    #[inline]
    pub fn nodes(&self) -> &[TreeNode<D>] {
        &self.nodes
    }

    #[inline]
    pub fn node(&self, id: NodeId) -> &TreeNode<D> {
        &self.nodes[id.index()]
    }

    #[inline]
    pub fn root(&self) -> &TreeNode<D> {
        &self.nodes[0]
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn n_middle(&self) -> usize {
        self.n_middle
    }

    #[inline]
    pub fn n_leaf(&self) -> usize {
        self.n_leaf
    }

    /// Iterates over `(id, node)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &TreeNode<D>)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId::new(i), n))
    }

    /// Builds a tree from raw parts, restoring the derived node counts.
    /// The caller (the dump loader) must supply a BFS-ordered arena.
    pub(crate) fn from_parts(d_max: u32, nodes: Vec<TreeNode<D>>) -> Self {
        let (n_middle, n_leaf) = count_kinds(&nodes);
        Self { d_max, nodes, n_middle, n_leaf }
    }
}

/// Bytes a dense grid of `side^dim` cells costs at one 4-byte word per cell.
pub fn full_grid_bytes(side: usize, dim: usize) -> f64 {
    (side as f64).powi(dim as i32) * 4.0
}

fn count_kinds<const D: usize>(nodes: &[TreeNode<D>]) -> (usize, usize) {
    let n_leaf = nodes.iter().filter(|n| n.is_leaf()).count();
    let n_internal = nodes.len() - n_leaf;
    (n_internal.saturating_sub(1), n_leaf) // the root is not a middle node
}

/// Per-level black-cell counts, coarse levels derived from fine ones.
///
/// Level `d` holds one count per `2^d`-per-axis block. The finest level
/// (single pixels) is not stored; those queries read the image directly.
struct BlockCounts<const D: usize> {
    d_pix: u32,
    levels: Vec<Vec<u64>>,
}

impl<const D: usize> BlockCounts<D> {
    fn new(image: &BinaryImage<D>) -> Self {
        let d_pix = image.depth();
        let mut levels: Vec<Vec<u64>> =
            (0..d_pix).map(|d| vec![0u64; (1usize << d).pow(D as u32)]).collect();
        if d_pix >= 1 {
            let d = (d_pix - 1) as usize;
            let n = 1usize << d;
            for i in 0..levels[d].len() {
                let block = unflatten::<D>(i, n);
                let mut sum = 0u64;
                for k in 0..(1usize << D) {
                    let mut p = [0usize; D];
                    for (a, pa) in p.iter_mut().enumerate() {
                        *pa = block[a] * 2 + ((k >> a) & 1);
                    }
                    sum += image.get(p).bit() as u64;
                }
                levels[d][i] = sum;
            }
            for d in (0..(d_pix - 1) as usize).rev() {
                let n = 1usize << d;
                for i in 0..levels[d].len() {
                    let block = unflatten::<D>(i, n);
                    let mut sum = 0u64;
                    for k in 0..(1usize << D) {
                        let mut c = [0usize; D];
                        for (a, ca) in c.iter_mut().enumerate() {
                            *ca = block[a] * 2 + ((k >> a) & 1);
                        }
                        sum += levels[d + 1][flatten::<D>(c, n * 2)];
                    }
                    levels[d][i] = sum;
                }
            }
        }
        Self { d_pix, levels }
    }

    /// Black pixels inside the block `coords` at depth `d` (`d <= d_pix`).
    fn black(&self, d: u32, coords: [u32; D], image: &BinaryImage<D>) -> u64 {
        if d == self.d_pix {
            let mut p = [0usize; D];
            for (a, pa) in p.iter_mut().enumerate() {
                *pa = coords[a] as usize;
            }
            image.get(p).bit() as u64
        } else {
            let n = 1usize << d;
            let mut c = [0usize; D];
            for (a, ca) in c.iter_mut().enumerate() {
                *ca = coords[a] as usize;
            }
            self.levels[d as usize][flatten::<D>(c, n)]
        }
    }

    /// Pixels per block at depth `d` (clamped to single pixels below d_pix).
    fn volume(&self, d: u32) -> u64 {
        let per_axis = 1u64 << self.d_pix.saturating_sub(d);
        per_axis.pow(D as u32)
    }
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
