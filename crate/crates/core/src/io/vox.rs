//! VOX3: a minimal text format for 3D voxel grids.
//!
//! Header `VOX3 nx ny nz`, then `nx*ny*nz` whitespace-separated `0`/`1`
//! values with x fastest, then y, then z. `#` starts a comment to the end of
//! the line.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{BinaryImage, Color};
use crate::io::write_atomic;

/// A decoded VOX3 before padding: dimensions plus black flags, x fastest.
pub(crate) struct RawVox {
    pub dims: [usize; 3],
    pub black: Vec<bool>,
}

pub(crate) fn parse(bytes: &[u8], path: &Path) -> Result<RawVox> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::file(path, "not valid UTF-8 text"))?;
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace());
    if tokens.next() != Some("VOX3") {
        return Err(Error::file(path, "not a VOX3 file"));
    }
    let mut dims = [0usize; 3];
    for (a, d) in dims.iter_mut().enumerate() {
        *d = tokens
            .next()
            .and_then(|t| t.parse::<usize>().ok())
            .ok_or_else(|| Error::file(path, format!("invalid dimension {a}")))?;
        if *d == 0 {
            return Err(Error::file(path, "grid has zero voxels"));
        }
    }
    let count = dims[0] * dims[1] * dims[2];
    let mut black = Vec::with_capacity(count);
    for tok in tokens.by_ref() {
        match tok {
            "0" => black.push(false),
            "1" => black.push(true),
            other => return Err(Error::file(path, format!("invalid voxel value '{other}'"))),
        }
        if black.len() == count {
            break;
        }
    }
    if black.len() != count {
        return Err(Error::file(
            path,
            format!("expected {count} voxel values, found {}", black.len()),
        ));
    }
    if tokens.next().is_some() {
        return Err(Error::file(path, "trailing data after voxel values"));
    }
    Ok(RawVox { dims, black })
}

/// Writes a VOX3 file, one x-row of values per line.
pub fn write(path: &Path, img: &BinaryImage<3>) -> Result<()> {
    let side = img.side();
    let mut out = format!("VOX3 {side} {side} {side}\n");
    for z in 0..side {
        for y in 0..side {
            for x in 0..side {
                let sep = if x == 0 { "" } else { " " };
                let v = if img.get([x, y, z]) == Color::Black { '1' } else { '0' };
                let _ = write!(out, "{sep}{v}");
            }
            out.push('\n');
        }
    }
    write_atomic(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path() -> std::path::PathBuf {
        std::path::PathBuf::from("test.vox")
    }

    #[test]
    fn parses_with_comments_and_layout() {
        let src = b"VOX3 2 1 2 # tiny\n1 0 # z = 0\n0 1\n";
        let raw = parse(src, &path()).unwrap();
        assert_eq!(raw.dims, [2, 1, 2]);
        assert_eq!(raw.black, vec![true, false, false, true]);
    }

    #[test]
    fn rejects_malformed_grids() {
        assert!(parse(b"VOX 2 2 2\n", &path()).is_err());
        assert!(parse(b"VOX3 2 0 2\n", &path()).is_err());
        assert!(parse(b"VOX3 1 1 1\n2\n", &path()).is_err());
        assert!(parse(b"VOX3 1 1 2\n1\n", &path()).is_err()); // short
        assert!(parse(b"VOX3 1 1 1\n1 1\n", &path()).is_err()); // trailing
    }

    #[test]
    fn roundtrips_through_write() {
        let img = BinaryImage::<3>::from_fn(4, |c| {
            if c[0] == c[1] && c[1] == c[2] { Color::Black } else { Color::White }
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("x.vox");
        write(&file, &img).unwrap();
        let raw = parse(&std::fs::read(&file).unwrap(), &file).unwrap();
        assert_eq!(raw.dims, [4, 4, 4]);
        let want: Vec<bool> = img.voxels().iter().map(|&c| c == Color::Black).collect();
        assert_eq!(raw.black, want);
    }
}
