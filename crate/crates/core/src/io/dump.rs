//! Compact binary dumps of tree maps.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "SWTM"  magic
//! u8      version (1)
//! u8      dimension (2 or 3)
//! u8      d_max
//! u32     node count
//! nodes in BFS order, node 0 is the root:
//!   u32   parent (0xFFFF_FFFF for the root)
//!   u8    flags: bit 0 = leaf, bit 1 = black (leaves only)
//!   u32 * 2^dim   child ids (internal nodes only)
//! ```
//!
//! Depth and coordinates are not stored; the loader rebuilds them from the
//! links and rejects files whose link structure is not a tree.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Color;
use crate::io::{read_file, write_atomic};
use crate::tree::{NodeId, NodeKind, TreeMap, TreeNode};

const MAGIC: &[u8; 4] = b"SWTM";
const VERSION: u8 = 1;
const NO_PARENT: u32 = u32::MAX;

const FLAG_LEAF: u8 = 0b01;
const FLAG_BLACK: u8 = 0b10;

/// Serializes a tree map.
pub fn write_tree<const D: usize>(path: &Path, tree: &TreeMap<D>) -> Result<()> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(D as u8);
    out.push(tree.d_max() as u8);
    out.extend_from_slice(&(tree.node_count() as u32).to_le_bytes());
    for (_, node) in tree.iter() {
        let parent = node.parent.map(|p| p.index() as u32).unwrap_or(NO_PARENT);
        out.extend_from_slice(&parent.to_le_bytes());
        match &node.kind {
            NodeKind::Leaf(color) => {
                let mut flags = FLAG_LEAF;
                if color.is_black() {
                    flags |= FLAG_BLACK;
                }
                out.push(flags);
            }
            NodeKind::Internal(children) => {
                out.push(0);
                for c in children.iter() {
                    out.extend_from_slice(&(c.index() as u32).to_le_bytes());
                }
            }
        }
    }
    write_atomic(path, &out)
}

/// Dimension stored in a dump, for dispatching without a full load.
pub fn read_dimension(path: &Path) -> Result<usize> {
    let bytes = read_file(path)?;
    let (_, dim, _, _) = parse_header(&bytes, path)?;
    Ok(dim)
}

/// Loads and validates a tree map dump.
pub fn read_tree<const D: usize>(path: &Path) -> Result<TreeMap<D>> {
    let bytes = read_file(path)?;
    let (mut pos, dim, d_max, count) = parse_header(&bytes, path)?;
    if dim != D {
        return Err(Error::file(path, format!("is a {dim}D map but a {D}D one is needed")));
    }
    let n_div = 1usize << D;

    // pass 1: raw links
    struct Raw {
        parent: u32,
        leaf: bool,
        black: bool,
        children: Vec<u32>,
    }
    let mut raw: Vec<Raw> = Vec::with_capacity(count);
    for i in 0..count {
        let parent = read_u32(&bytes, &mut pos, path)?;
        let flags = read_u8(&bytes, &mut pos, path)?;
        if flags & !(FLAG_LEAF | FLAG_BLACK) != 0 {
            return Err(Error::file(path, format!("node {i}: unknown flags {flags:#04x}")));
        }
        let leaf = flags & FLAG_LEAF != 0;
        if !leaf && flags & FLAG_BLACK != 0 {
            return Err(Error::file(path, format!("node {i}: color flag on internal node")));
        }
        let mut children = Vec::new();
        if !leaf {
            for _ in 0..n_div {
                children.push(read_u32(&bytes, &mut pos, path)?);
            }
        }
        if i == 0 {
            if parent != NO_PARENT {
                return Err(Error::file(path, "node 0 must be the root"));
            }
            if leaf {
                return Err(Error::file(path, "the root cannot be a leaf"));
            }
        } else if parent as usize >= i {
            // BFS order puts parents strictly before children; this also
            // rules out cycles and a second root
            return Err(Error::file(path, format!("node {i}: parent {parent} out of order")));
        }
        raw.push(Raw { parent, leaf, black: flags & FLAG_BLACK != 0, children });
    }
    if pos != bytes.len() {
        return Err(Error::file(path, "trailing bytes after the last node"));
    }

    // pass 2: link consistency, then depth/coords top-down
    let mut seen_as_child = vec![false; count];
    for (i, node) in raw.iter().enumerate() {
        for &c in &node.children {
            let c = c as usize;
            if c >= count || c == 0 {
                return Err(Error::file(path, format!("node {i}: invalid child id {c}")));
            }
            if seen_as_child[c] {
                return Err(Error::file(path, format!("node {c} linked twice")));
            }
            if raw[c].parent as usize != i {
                return Err(Error::file(path, format!("node {c}: parent link mismatch")));
            }
            seen_as_child[c] = true;
        }
    }
    if let Some(orphan) = (1..count).find(|&i| !seen_as_child[i]) {
        return Err(Error::file(path, format!("node {orphan} is unreachable")));
    }

    let mut nodes: Vec<TreeNode<D>> = Vec::with_capacity(count);
    for (i, r) in raw.iter().enumerate() {
        let (depth, coords) = if i == 0 {
            (0, [0u32; D])
        } else {
            let parent = &nodes[r.parent as usize];
            let slot = raw[r.parent as usize]
                .children
                .iter()
                .position(|&c| c as usize == i)
                .expect("checked above");
            let mut coords = [0u32; D];
            for (a, ca) in coords.iter_mut().enumerate() {
                *ca = parent.coords[a] * 2 + ((slot >> a) & 1) as u32;
            }
            (parent.depth + 1, coords)
        };
        if depth > d_max {
            return Err(Error::file(path, format!("node {i} deeper than d_max {d_max}")));
        }
        let kind = if r.leaf {
            NodeKind::Leaf(if r.black { Color::Black } else { Color::White })
        } else {
            NodeKind::Internal(r.children.iter().map(|&c| NodeId::new(c as usize)).collect())
        };
        let parent = (i != 0).then(|| NodeId::new(r.parent as usize));
        nodes.push(TreeNode { parent, depth, coords, kind });
    }
    Ok(TreeMap::from_parts(d_max, nodes))
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<(usize, usize, u32, usize)> {
    if bytes.len() < 11 || &bytes[0..4] != MAGIC {
        return Err(Error::file(path, "not a tree map dump"));
    }
    if bytes[4] != VERSION {
        return Err(Error::file(path, format!("unsupported version {}", bytes[4])));
    }
    let dim = bytes[5] as usize;
    if dim != 2 && dim != 3 {
        return Err(Error::file(path, format!("unsupported dimension {dim}")));
    }
    let d_max = bytes[6] as u32;
    if !(1..=20).contains(&d_max) {
        return Err(Error::file(path, format!("d_max {d_max} out of range 1..=20")));
    }
    let count = u32::from_le_bytes([bytes[7], bytes[8], bytes[9], bytes[10]]) as usize;
    if count == 0 {
        return Err(Error::file(path, "empty tree"));
    }
    Ok((11, dim, d_max, count))
}

fn read_u8(bytes: &[u8], pos: &mut usize, path: &Path) -> Result<u8> {
    let v = bytes.get(*pos).copied().ok_or_else(|| Error::file(path, "file truncated"))?;
    *pos += 1;
    Ok(v)
}

fn read_u32(bytes: &[u8], pos: &mut usize, path: &Path) -> Result<u32> {
    let end = *pos + 4;
    let slice = bytes.get(*pos..end).ok_or_else(|| Error::file(path, "file truncated"))?;
    *pos = end;
    Ok(u32::from_le_bytes(slice.try_into().unwrap()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::BinaryImage;

    fn sample_tree() -> TreeMap<2> {
        let img = BinaryImage::<2>::from_fn(8, |c| {
            if c[0] / 4 == 1 && c[1] / 4 == 1 || c[0] == 0 && c[1] == 0 {
                Color::Black
            } else {
                Color::White
            }
        })
        .unwrap();
        TreeMap::encode(&img, 3).unwrap().merge()
    }

    #[test]
    fn roundtrips_exactly() {
        let tree = sample_tree();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("map.swtm");
        write_tree(&file, &tree).unwrap();
        assert_eq!(read_dimension(&file).unwrap(), 2);
        let back: TreeMap<2> = read_tree(&file).unwrap();
        assert_eq!(back, tree);
    }

    #[test]
    fn rejects_corruption() {
        let tree = sample_tree();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("map.swtm");
        write_tree(&file, &tree).unwrap();
        let good = std::fs::read(&file).unwrap();

        let cases: Vec<(&str, Vec<u8>)> = vec![
            ("bad magic", {
                let mut b = good.clone();
                b[0] = b'X';
                b
            }),
            ("bad version", {
                let mut b = good.clone();
                b[4] = 9;
                b
            }),
            ("bad dim", {
                let mut b = good.clone();
                b[5] = 5;
                b
            }),
            ("truncated", good[..good.len() - 3].to_vec()),
            ("trailing", {
                let mut b = good.clone();
                b.push(0);
                b
            }),
            ("root marked leaf", {
                let mut b = good.clone();
                b[15] = FLAG_LEAF; // root flags byte (after header + parent)
                b
            }),
        ];
        for (what, bytes) in cases {
            std::fs::write(&file, &bytes).unwrap();
            assert!(read_tree::<2>(&file).is_err(), "{what} should fail");
        }
    }

    #[test]
    fn rejects_wrong_dimension_request() {
        let tree = sample_tree();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("map.swtm");
        write_tree(&file, &tree).unwrap();
        assert!(read_tree::<3>(&file).is_err());
    }
}
