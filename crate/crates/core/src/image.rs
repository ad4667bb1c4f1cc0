//! Binary images and voxel grids with power-of-two sides.

use crate::error::{Error, Result};

/// Pixel/voxel color. `Black` marks the target shape, `White` free space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Color {
    White,
    Black,
}

impl Color {
    /// 1 for black, 0 for white; handy for counting and averaging.
    #[inline]
    pub fn bit(self) -> u32 {
        match self {
            Color::White => 0,
            Color::Black => 1,
        }
    }

    #[inline]
    pub fn is_black(self) -> bool {
        self == Color::Black
    }
}

/// A cubic binary raster with side `2^k` (k >= 1), `D` = 2 or 3.
///
/// Values are stored row-major with x fastest: index = x + side*(y + side*z).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryImage<const D: usize> {
    side: usize,
    voxels: Vec<Color>,
}

impl<const D: usize> BinaryImage<D> {
    /// Wraps a voxel buffer, validating dimension, side, and length.
    pub fn new(side: usize, voxels: Vec<Color>) -> Result<Self> {
        if D != 2 && D != 3 {
            return Err(Error::Dimension(D));
        }
        if !side.is_power_of_two() || side < 2 {
            return Err(Error::ImageSide(side));
        }
        let want = side.pow(D as u32);
        if voxels.len() != want {
            return Err(Error::VoxelCount { side, dim: D, got: voxels.len(), want });
        }
        Ok(Self { side, voxels })
    }

    /// Builds an image by evaluating `f` at every coordinate.
    pub fn from_fn(side: usize, mut f: impl FnMut([usize; D]) -> Color) -> Result<Self> {
        if D != 2 && D != 3 {
            return Err(Error::Dimension(D));
        }
        if !side.is_power_of_two() || side < 2 {
            return Err(Error::ImageSide(side));
        }
        let mut voxels = vec![Color::White; side.pow(D as u32)];
        let mut coords = [0usize; D];
        for (i, v) in voxels.iter_mut().enumerate() {
            let mut rest = i;
            for c in coords.iter_mut() {
                *c = rest % side;
                rest /= side;
            }
            *v = f(coords);
        }
        Ok(Self { side, voxels })
    }

    /// An all-white image.
    pub fn blank(side: usize) -> Result<Self> {
        Self::from_fn(side, |_| Color::White)
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    /// log2 of the side.
    #[inline]
    pub fn depth(&self) -> u32 {
        self.side.trailing_zeros()
    }

    #[inline]
    fn index(&self, coords: [usize; D]) -> usize {
        let mut idx = 0usize;
        for a in (0..D).rev() {
            debug_assert!(coords[a] < self.side);
            idx = idx * self.side + coords[a];
        }
        idx
    }

    #[inline]
    pub fn get(&self, coords: [usize; D]) -> Color {
        self.voxels[self.index(coords)]
    }

    #[inline]
    pub fn set(&mut self, coords: [usize; D], color: Color) {
        let i = self.index(coords);
        self.voxels[i] = color;
    }

    pub fn voxels(&self) -> &[Color] {
        &self.voxels
    }

    /// Number of black voxels.
    pub fn black_count(&self) -> u64 {
        self.voxels.iter().map(|v| v.bit() as u64).sum()
    }
}
