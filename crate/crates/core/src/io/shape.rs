//! Shape loading: format sniffing plus centered power-of-two padding.
//!
//! Shape files may have any dimensions; the loader pads them with white into
//! the smallest enclosing power-of-two cube, keeping the content centered
//! (extra low-side margin when the split is odd).

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{BinaryImage, Color};
use crate::io::{pgm, read_file, vox};

/// Spatial dimension of a shape file, from its magic bytes.
pub fn sniff_dimension(path: &Path) -> Result<usize> {
    let bytes = read_file(path)?;
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        Ok(2)
    } else if bytes.starts_with(b"VOX3") {
        Ok(3)
    } else {
        Err(Error::file(path, "unrecognized shape format (expected PGM P2/P5 or VOX3)"))
    }
}

/// Loads a shape file as a `D`-dimensional binary image.
pub fn load_shape<const D: usize>(path: &Path) -> Result<BinaryImage<D>> {
    let bytes = read_file(path)?;
    let found = if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        2
    } else if bytes.starts_with(b"VOX3") {
        3
    } else {
        return Err(Error::file(path, "unrecognized shape format (expected PGM P2/P5 or VOX3)"));
    };
    if found != D {
        return Err(Error::file(path, format!("is a {found}D shape but a {D}D one is needed")));
    }
    let (dims, black) = if found == 2 {
        let raw = pgm::parse(&bytes, path)?;
        (vec![raw.width, raw.height], raw.black)
    } else {
        let raw = vox::parse(&bytes, path)?;
        (raw.dims.to_vec(), raw.black)
    };
    let mut d = [0usize; D];
    d.copy_from_slice(&dims);
    pad_centered(d, &black)
}

/// Pads raw content into a centered power-of-two cube.
fn pad_centered<const D: usize>(dims: [usize; D], black: &[bool]) -> Result<BinaryImage<D>> {
    let side = dims.iter().copied().max().unwrap_or(0).next_power_of_two().max(2);
    let mut lo = [0usize; D];
    for a in 0..D {
        lo[a] = (side - dims[a]) / 2;
    }
    let mut stride = [0usize; D];
    let mut s = 1usize;
    for a in 0..D {
        stride[a] = s;
        s *= dims[a];
    }
    BinaryImage::from_fn(side, |c| {
        let mut idx = 0usize;
        for a in 0..D {
            let Some(i) = c[a].checked_sub(lo[a]) else { return Color::White };
            if i >= dims[a] {
                return Color::White;
            }
            idx += i * stride[a];
        }
        if black[idx] {
            Color::Black
        } else {
            Color::White
        }
    })
}
