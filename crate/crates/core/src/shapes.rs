//! Procedural test shapes.
//!
//! All shapes are defined in normalized coordinates and sampled at pixel
//! centers, so the same shape scales cleanly to any power-of-two side. The
//! block letters and the pyramid keep every boundary on a multiple of 1/8th
//! (1/16th for the pyramid) of the side: at sufficient depth the tree
//! captures them exactly, which makes their encodings compact and their
//! pixel counts easy to reason about in tests.

use crate::error::{Error, Result};
use crate::image::{BinaryImage, Color};

/// Built-in 2D shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape2 {
    Disk,
    Ring,
    LetterT,
    LetterH,
}

/// Built-in 3D shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape3 {
    Pyramid,
    Helix,
}

fn color(black: bool) -> Color {
    if black {
        Color::Black
    } else {
        Color::White
    }
}

/// Normalized pixel-center coordinate.
#[inline]
fn center(i: usize, side: usize) -> f64 {
    (i as f64 + 0.5) / side as f64
}

/// Half-open rectangle test in normalized eighths.
#[inline]
fn in_rect(q: [f64; 2], r: [f64; 4]) -> bool {
    let [x0, x1, y0, y1] = r;
    q[0] >= x0 / 8.0 && q[0] < x1 / 8.0 && q[1] >= y0 / 8.0 && q[1] < y1 / 8.0
}

/// Generates a 2D shape at the given power-of-two side.
pub fn generate_2d(shape: Shape2, side: usize) -> Result<BinaryImage<2>> {
    if side < 8 {
        return Err(Error::Parameter {
            name: "side",
            value: side as f64,
            why: "2D shapes need side >= 8",
        });
    }
    BinaryImage::from_fn(side, |c| {
        let q = [center(c[0], side), center(c[1], side)];
        let dx = q[0] - 0.5;
        let dy = q[1] - 0.5;
        let r = (dx * dx + dy * dy).sqrt();
        let black = match shape {
            Shape2::Disk => r <= 0.35,
            Shape2::Ring => (0.22..=0.38).contains(&r),
            Shape2::LetterT => {
                in_rect(q, [1.0, 7.0, 5.0, 7.0]) || in_rect(q, [3.0, 5.0, 1.0, 5.0])
            }
            Shape2::LetterH => {
                in_rect(q, [1.0, 3.0, 1.0, 7.0])
                    || in_rect(q, [5.0, 7.0, 1.0, 7.0])
                    || in_rect(q, [3.0, 5.0, 3.0, 5.0])
            }
        };
        color(black)
    })
}

/// Generates a 3D shape at the given power-of-two side.
pub fn generate_3d(shape: Shape3, side: usize) -> Result<BinaryImage<3>> {
    match shape {
        Shape3::Pyramid => pyramid(side),
        Shape3::Helix => helix(side),
    }
}

/// Hollow stepped pyramid: six square slabs of shrinking width stacked in z,
/// with a chamber of 2u x 2u x u (u = side/16) recessed into the underside of
/// the base, open to the outside below. The opening matters: in a sealed
/// cavity a robot settles into a stable off-wall equilibrium where it never
/// registers as entered, and with hundreds of robots jostling through the
/// interior one eventually ends up inside no matter how thick the walls are.
/// Every boundary is a multiple of side/16, so the octree captures the shape
/// exactly at depth 4.
fn pyramid(side: usize) -> Result<BinaryImage<3>> {
    if side < 16 || !side.is_power_of_two() {
        return Err(Error::Parameter {
            name: "side",
            value: side as f64,
            why: "the pyramid needs a power-of-two side >= 16",
        });
    }
    let u = side / 16;
    let c = side / 2;
    BinaryImage::from_fn(side, |p| {
        let [x, y, z] = p;
        if z < 2 * u || z >= 14 * u {
            return Color::White;
        }
        let level = (z - 2 * u) / (2 * u); // 0..=5
        let w = (7 - level) * u;
        let slab = x >= c - w && x < c + w && y >= c - w && y < c + w;
        let chamber =
            x >= c - u && x < c + u && y >= c - u && y < c + u && z >= 2 * u && z < 3 * u;
        color(slab && !chamber)
    })
}

/// Helical tube: 2.5 turns around the vertical axis, drawn by stamping
/// spheres along the parametric centerline.
fn helix(side: usize) -> Result<BinaryImage<3>> {
    if side < 16 || !side.is_power_of_two() {
        return Err(Error::Parameter {
            name: "side",
            value: side as f64,
            why: "the helix needs a power-of-two side >= 16",
        });
    }
    let turns = 2.5;
    let loop_radius = 0.28;
    let tube_radius = 0.08;
    let mut img = BinaryImage::blank(side)?;
    let s = side as f64;
    let steps = (side as u32 * 40) as usize;
    let stamp = (tube_radius * s).ceil() as i64 + 1;
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let angle = 2.0 * std::f64::consts::PI * turns * t;
        let cx = (0.5 + loop_radius * angle.cos()) * s;
        let cy = (0.5 + loop_radius * angle.sin()) * s;
        let cz = (0.15 + 0.7 * t) * s;
        let r2 = (tube_radius * s) * (tube_radius * s);
        for dz in -stamp..=stamp {
            for dy in -stamp..=stamp {
                for dx in -stamp..=stamp {
                    let vx = cx.floor() as i64 + dx;
                    let vy = cy.floor() as i64 + dy;
                    let vz = cz.floor() as i64 + dz;
                    if vx < 0 || vy < 0 || vz < 0 {
                        continue;
                    }
                    let (vx, vy, vz) = (vx as usize, vy as usize, vz as usize);
                    if vx >= side || vy >= side || vz >= side {
                        continue;
                    }
                    let ddx = vx as f64 + 0.5 - cx;
                    let ddy = vy as f64 + 0.5 - cy;
                    let ddz = vz as f64 + 0.5 - cz;
                    if ddx * ddx + ddy * ddy + ddz * ddz <= r2 {
                        img.set([vx, vy, vz], Color::Black);
                    }
                }
            }
        }
    }
    Ok(img)
}
