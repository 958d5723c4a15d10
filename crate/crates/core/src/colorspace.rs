//! Full-range BT.601 RGB <-> YCbCr, as used by JFIF, plus the 128 level shift.
//!
//! Planes stay real-valued and unclamped; chroma of saturated colors may
//! leave [0, 255] slightly (pure red gives Cr = 255.5).

use rayon::prelude::*;

use crate::io::RgbImage;
use crate::{Error, Result};

pub const LEVEL_SHIFT: f64 = 128.0;

/// Rows are Y, Cb, Cr; columns are R, G, B. The +128 chroma offset is
/// applied separately.
pub const RGB_TO_YCC: [[f64; 3]; 3] = [
    [0.299, 0.587, 0.114],
    [-0.168736, -0.331264, 0.5],
    [0.5, -0.418688, -0.081312],
];

const CHROMA_OFFSET: [f64; 3] = [0.0, 128.0, 128.0];

/// Exact inverse of [`RGB_TO_YCC`] (adjugate over determinant), so the
/// real-valued round trip is the identity up to float error.
pub fn ycc_to_rgb_matrix() -> [[f64; 3]; 3] {
    let m = &RGB_TO_YCC;
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let det = m[0][0] * adj[0][0] + m[0][1] * adj[1][0] + m[0][2] * adj[2][0];
    adj.map(|row| row.map(|v| v / det))
}

#[derive(Debug, Clone, PartialEq)]
pub struct YccPlanes {
    height: usize,
    width: usize,
    /// Y, Cb, Cr; each `height * width`, row-major.
    planes: [Vec<f64>; 3],
    shifted: bool,
}

impl YccPlanes {
    pub fn new(height: usize, width: usize, planes: [Vec<f64>; 3], shifted: bool) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Dimensions(format!("{height}x{width} planes")));
        }
        if planes.iter().any(|p| p.len() != height * width) {
            return Err(Error::Dimensions(format!(
                "every plane must hold {height}x{width} samples"
            )));
        }
        Ok(Self {
            height,
            width,
            planes,
            shifted,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn planes(&self) -> &[Vec<f64>; 3] {
        &self.planes
    }

    pub fn into_planes(self) -> [Vec<f64>; 3] {
        self.planes
    }

    pub fn is_shifted(&self) -> bool {
        self.shifted
    }

    /// Subtracts 128 from every sample.
    pub fn level_shift(self) -> Result<Self> {
        if self.shifted {
            return Err(Error::ShiftState("level-shifted"));
        }
        Ok(self.offset(-LEVEL_SHIFT, true))
    }

    /// Adds the 128 back.
    pub fn unshift(self) -> Result<Self> {
        if !self.shifted {
            return Err(Error::ShiftState("unshifted"));
        }
        Ok(self.offset(LEVEL_SHIFT, false))
    }

    fn offset(mut self, delta: f64, shifted: bool) -> Self {
        for plane in &mut self.planes {
            plane.iter_mut().for_each(|v| *v += delta);
        }
        self.shifted = shifted;
        self
    }
}

pub fn rgb_to_ycc_pixel(rgb: [u8; 3]) -> [f64; 3] {
    let [r, g, b] = rgb.map(f64::from);
    std::array::from_fn(|c| {
        let row = &RGB_TO_YCC[c];
        row[0] * r + row[1] * g + row[2] * b + CHROMA_OFFSET[c]
    })
}

/// Unclamped, unrounded inverse of [`rgb_to_ycc_pixel`].
pub fn ycc_to_rgb_pixel(ycc: [f64; 3], inv: &[[f64; 3]; 3]) -> [f64; 3] {
    let d = [ycc[0], ycc[1] - 128.0, ycc[2] - 128.0];
    inv.map(|row| row[0] * d[0] + row[1] * d[1] + row[2] * d[2])
}

pub fn clamp_to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

pub fn rgb_to_ycc(image: &RgbImage) -> YccPlanes {
    let (h, w) = (image.height(), image.width());
    let mut planes = [vec![0.0; h * w], vec![0.0; h * w], vec![0.0; h * w]];
    let [py, pb, pr] = &mut planes;
    py.par_chunks_mut(w)
        .zip(pb.par_chunks_mut(w))
        .zip(pr.par_chunks_mut(w))
        .zip(image.data().par_chunks(w * 3))
        .for_each(|(((ys, cbs), crs), row)| {
            for (x, px) in row.chunks_exact(3).enumerate() {
                let [y, cb, cr] = rgb_to_ycc_pixel([px[0], px[1], px[2]]);
                ys[x] = y;
                cbs[x] = cb;
                crs[x] = cr;
            }
        });
    YccPlanes {
        height: h,
        width: w,
        planes,
        shifted: false,
    }
}

/// Converts back to 8-bit RGB with rounding and clamping. Level-shifted
/// planes are unshifted on the fly.
pub fn ycc_to_rgb(planes: &YccPlanes) -> RgbImage {
    let inv = ycc_to_rgb_matrix();
    let bias = if planes.shifted { LEVEL_SHIFT } else { 0.0 };
    let (h, w) = (planes.height, planes.width);
    let mut data = vec![0u8; h * w * 3];
    data.par_chunks_mut(w * 3).enumerate().for_each(|(y, row)| {
        for x in 0..w {
            let i = y * w + x;
            let ycc = [0, 1, 2].map(|c| planes.planes[c][i] + bias);
            let rgb = ycc_to_rgb_pixel(ycc, &inv);
            for c in 0..3 {
                row[x * 3 + c] = clamp_to_u8(rgb[c]);
            }
        }
    });
    RgbImage::new(h, w, data).expect("dimensions carried over from valid planes")
}
