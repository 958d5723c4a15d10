#![allow(dead_code)]

use std::f64::consts::PI;

use dctseg::io::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Direct evaluation of the 2-D DCT-II double sum with the orthonormal
/// normalizing factors. Deliberately naive: 64 terms per coefficient.
pub fn naive_dct(g: &[f64; 64]) -> [f64; 64] {
    let cos_table: Vec<f64> = (0..64)
        .map(|i| {
            let (k, n) = (i / 8, i % 8);
            ((2 * n + 1) as f64 * k as f64 * PI / 16.0).cos()
        })
        .collect();
    let alpha = |k: usize| if k == 0 { 1.0 / 2f64.sqrt() } else { 1.0 };
    let mut out = [0.0; 64];
    for u in 0..8 {
        for v in 0..8 {
            let mut acc = 0.0;
            for x in 0..8 {
                for y in 0..8 {
                    acc += g[x * 8 + y] * cos_table[u * 8 + x] * cos_table[v * 8 + y];
                }
            }
            out[u * 8 + v] = 0.25 * alpha(u) * alpha(v) * acc;
        }
    }
    out
}

pub fn random_block(rng: &mut impl Rng, lo: f64, hi: f64) -> [f64; 64] {
    std::array::from_fn(|_| rng.gen_range(lo..=hi))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smooth colour gradients overlaid with a few sinusoids.
pub fn gradient_scene(h: usize, w: usize) -> RgbImage {
    RgbImage::from_fn(h, w, |y, x| {
        let (fy, fx) = (y as f64 / h as f64, x as f64 / w as f64);
        let r = 255.0 * fx;
        let g = 255.0 * fy;
        let b = 128.0 + 100.0 * (fx * 12.0).sin() * (fy * 7.0).cos();
        [r, g, b].map(|v| v.clamp(0.0, 255.0) as u8)
    })
    .unwrap()
}

/// Flat-coloured rectangles and discs with sensor-like noise: hard edges
/// that push energy into high frequencies.
pub fn shapes_scene(h: usize, w: usize, seed: u64) -> RgbImage {
    let mut rng = rng(seed);
    let shapes: Vec<(usize, f64, f64, f64, [f64; 3])> = (0..40)
        .map(|i| {
            (
                i % 2,
                rng.gen_range(0.0..h as f64),
                rng.gen_range(0.0..w as f64),
                rng.gen_range(4.0..(h as f64 / 3.0).max(5.0)),
                [rng.gen_range(0.0..255.0), rng.gen_range(0.0..255.0), rng.gen_range(0.0..255.0)],
            )
        })
        .collect();
    RgbImage::from_fn(h, w, |y, x| {
        let mut c = [90.0, 110.0, 100.0];
        for &(kind, cy, cx, size, col) in &shapes {
            let (dy, dx) = (y as f64 - cy, x as f64 - cx);
            let inside = if kind == 0 {
                dy.abs() < size && dx.abs() < size * 1.5
            } else {
                dy * dy + dx * dx < size * size
            };
            if inside {
                c = col;
            }
        }
        let n: f64 = rng.gen_range(-6.0..6.0);
        c.map(|v| (v + n).clamp(0.0, 255.0) as u8)
    })
    .unwrap()
}

/// Multi-octave value noise, a rough stand-in for natural texture.
pub fn texture_scene(h: usize, w: usize, seed: u64) -> RgbImage {
    let mut rng = rng(seed);
    let octaves: Vec<(usize, Vec<[f64; 3]>)> = [64usize, 16, 4]
        .iter()
        .map(|&cell| {
            let gh = h / cell + 2;
            let gw = w / cell + 2;
            let grid = (0..gh * gw)
                .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            (cell, grid)
        })
        .collect();
    RgbImage::from_fn(h, w, |y, x| {
        let mut c = [128.0; 3];
        for (i, (cell, grid)) in octaves.iter().enumerate() {
            let gw = w / cell + 2;
            let (fy, fx) = (y as f64 / *cell as f64, x as f64 / *cell as f64);
            let (iy, ix) = (fy as usize, fx as usize);
            let (ty, tx) = (fy - iy as f64, fx - ix as f64);
            let amp = 90.0 / (1 << i) as f64;
            for ch in 0..3 {
                let at = |yy: usize, xx: usize| grid[yy * gw + xx][ch];
                let top = at(iy, ix) * (1.0 - tx) + at(iy, ix + 1) * tx;
                let bot = at(iy + 1, ix) * (1.0 - tx) + at(iy + 1, ix + 1) * tx;
                c[ch] += amp * (top * (1.0 - ty) + bot * ty);
            }
        }
        c.map(|v| v.clamp(0.0, 255.0) as u8)
    })
    .unwrap()
}
