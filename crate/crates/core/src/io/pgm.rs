//! PGM (portable graymap) reading and writing for 2D shapes.
//!
//! Both the ASCII (`P2`) and binary (`P5`) variants are accepted; `#`
//! comments may appear anywhere in the header. A pixel counts as black when
//! it is darker than half the maximum value (`2 * v < maxval`).

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{BinaryImage, Color};
use crate::io::write_atomic;

/// A decoded PGM before padding: dimensions plus black flags, x fastest.
pub(crate) struct RawPgm {
    pub width: usize,
    pub height: usize,
    pub black: Vec<bool>,
}

pub(crate) fn parse(bytes: &[u8], path: &Path) -> Result<RawPgm> {
    let mut pos = 0usize;
    let magic = token(bytes, &mut pos, path)?;
    let binary = match magic.as_slice() {
        b"P2" => false,
        b"P5" => true,
        _ => return Err(Error::file(path, "not a PGM file (expected P2 or P5)")),
    };
    let width = int_token(bytes, &mut pos, path, "width")?;
    let height = int_token(bytes, &mut pos, path, "height")?;
    let maxval = int_token(bytes, &mut pos, path, "maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::file(path, "image has zero pixels"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::file(path, format!("maxval {maxval} out of range 1..=65535")));
    }
    let count = width * height;
    let mut black = Vec::with_capacity(count);
    if binary {
        // exactly one whitespace byte separates the header from the samples
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(Error::file(path, "missing separator before binary samples"));
        }
        pos += 1;
        let wide = maxval > 255;
        let bpp = if wide { 2 } else { 1 };
        let data = &bytes[pos..];
        if data.len() < count * bpp {
            return Err(Error::file(
                path,
                format!("expected {} sample bytes, found {}", count * bpp, data.len()),
            ));
        }
        for i in 0..count {
            let v = if wide {
                u16::from_be_bytes([data[2 * i], data[2 * i + 1]]) as usize
            } else {
                data[i] as usize
            };
            black.push(2 * v < maxval);
        }
    } else {
        for _ in 0..count {
            let v = int_token(bytes, &mut pos, path, "sample")?;
            black.push(2 * v < maxval);
        }
    }
    Ok(RawPgm { width, height, black })
}

/// Writes a binary (`P5`) PGM: black pixels as 0, white as 255.
pub fn write(path: &Path, img: &BinaryImage<2>) -> Result<()> {
    let side = img.side();
    let mut out = format!("P5\n{side} {side}\n255\n").into_bytes();
    out.extend(img.voxels().iter().map(|&c| if c == Color::Black { 0u8 } else { 255u8 }));
    write_atomic(path, &out)
}

/// Next whitespace/comment-delimited token.
fn token(bytes: &[u8], pos: &mut usize, path: &Path) -> Result<Vec<u8>> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::file(path, "unexpected end of header"));
    }
    Ok(bytes[start..*pos].to_vec())
}

fn int_token(bytes: &[u8], pos: &mut usize, path: &Path, what: &str) -> Result<usize> {
    let tok = token(bytes, pos, path)?;
    std::str::from_utf8(&tok)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| Error::file(path, format!("invalid {what}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path() -> std::path::PathBuf {
        std::path::PathBuf::from("test.pgm")
    }

    #[test]
    fn parses_ascii_with_comments() {
        let src = b"P2 # comment\n2 2\n255\n0 255 # pixels\n128 10\n";
        let raw = parse(src, &path()).unwrap();
        assert_eq!((raw.width, raw.height), (2, 2));
        // black iff 2v < 255: 0 yes, 255 no, 128 no (256 >= 255), 10 yes
        assert_eq!(raw.black, vec![true, false, false, true]);
    }

    #[test]
    fn parses_binary_and_wide_samples() {
        let mut src = b"P5\n2 1\n255\n".to_vec();
        src.extend([0u8, 200u8]);
        let raw = parse(&src, &path()).unwrap();
        assert_eq!(raw.black, vec![true, false]);
        // 16-bit big-endian samples when maxval > 255
        let mut src = b"P5\n2 1\n65535\n".to_vec();
        src.extend(0u16.to_be_bytes());
        src.extend(40000u16.to_be_bytes());
        let raw = parse(&src, &path()).unwrap();
        assert_eq!(raw.black, vec![true, false]);
    }

    #[test]
    fn threshold_is_strictly_darker_than_half() {
        // maxval 4: values 0,1 black (2v < 4); 2,3,4 white
        let src = b"P2\n5 1\n4\n0 1 2 3 4\n";
        let raw = parse(src, &path()).unwrap();
        assert_eq!(raw.black, vec![true, true, false, false, false]);
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(parse(b"P6\n1 1\n255\n0", &path()).is_err());
        assert!(parse(b"P2\n2 2\n255\n0 0 0\n", &path()).is_err()); // short
        assert!(parse(b"P2\n0 2\n255\n", &path()).is_err());
        assert!(parse(b"P5\n1 1\n70000\n\x00\x00", &path()).is_err());
        let mut short = b"P5\n2 2\n255\n".to_vec();
        short.push(0);
        assert!(parse(&short, &path()).is_err());
    }

    #[test]
    fn roundtrips_through_write() {
        let img = BinaryImage::<2>::from_fn(4, |c| {
            if (c[0] + c[1]) % 3 == 0 { Color::Black } else { Color::White }
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("x.pgm");
        write(&file, &img).unwrap();
        let raw = parse(&std::fs::read(&file).unwrap(), &file).unwrap();
        assert_eq!((raw.width, raw.height), (4, 4));
        let want: Vec<bool> = img.voxels().iter().map(|&c| c == Color::Black).collect();
        assert_eq!(raw.black, want);
    }
}
