//! 8x8 block partitioning and the orthonormal 2-D type-II DCT.
//!
//! Blocks are `[f64; 64]` in row-major order: spatial sample `g[x][y]` sits
//! at `x * 8 + y` and coefficient `G[u][v]` at `u * 8 + v`, so `u` is the
//! vertical frequency.
//!
//! ```text
//! G[u][v] = 1/4 · a(u) · a(v) · Σx Σy g[x][y] · cos((2x+1)uπ/16) · cos((2y+1)vπ/16)
//! a(0) = 1/√2, a(k) = 1 otherwise
//! ```
//!
//! The transform is evaluated separably (rows, then columns) against a
//! precomputed basis, which is 16x cheaper than the direct double sum.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::LazyLock;

use rayon::prelude::*;

use crate::colorspace::YccPlanes;
use crate::{Error, Result};

pub const BLOCK: usize = 8;
pub const BLOCK_LEN: usize = 64;

pub type Block8 = [f64; BLOCK_LEN];

/// `BASIS[u][x] = a(u)/2 · cos((2x+1)uπ/16)`, an orthogonal matrix.
static BASIS: LazyLock<[[f64; BLOCK]; BLOCK]> = LazyLock::new(|| {
    std::array::from_fn(|u| {
        let a = if u == 0 { FRAC_1_SQRT_2 } else { 1.0 };
        std::array::from_fn(|x| 0.5 * a * ((2 * x + 1) as f64 * u as f64 * PI / 16.0).cos())
    })
});

pub fn forward_dct(block: &Block8) -> Block8 {
    let c = &*BASIS;
    // tmp[u][y] = Σx c[u][x] g[x][y]
    let mut tmp = [0.0; BLOCK_LEN];
    for u in 0..BLOCK {
        for x in 0..BLOCK {
            let k = c[u][x];
            for y in 0..BLOCK {
                tmp[u * BLOCK + y] += k * block[x * BLOCK + y];
            }
        }
    }
    let mut out = [0.0; BLOCK_LEN];
    for u in 0..BLOCK {
        for v in 0..BLOCK {
            out[u * BLOCK + v] = (0..BLOCK).map(|y| tmp[u * BLOCK + y] * c[v][y]).sum();
        }
    }
    out
}

pub fn inverse_dct(coeffs: &Block8) -> Block8 {
    let c = &*BASIS;
    // tmp[x][v] = Σu c[u][x] G[u][v]
    let mut tmp = [0.0; BLOCK_LEN];
    for x in 0..BLOCK {
        for u in 0..BLOCK {
            let k = c[u][x];
            for v in 0..BLOCK {
                tmp[x * BLOCK + v] += k * coeffs[u * BLOCK + v];
            }
        }
    }
    let mut out = [0.0; BLOCK_LEN];
    for x in 0..BLOCK {
        for y in 0..BLOCK {
            out[x * BLOCK + y] = (0..BLOCK).map(|v| tmp[x * BLOCK + v] * c[v][y]).sum();
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Spatial,
    Frequency,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Spatial => "spatial",
            Domain::Frequency => "frequency",
        }
    }
}

/// `blocks_y × blocks_x` blocks, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGrid<T> {
    pub blocks_y: usize,
    pub blocks_x: usize,
    pub blocks: Vec<[T; BLOCK_LEN]>,
}

impl<T> BlockGrid<T> {
    pub fn block(&self, by: usize, bx: usize) -> &[T; BLOCK_LEN] {
        &self.blocks[by * self.blocks_x + bx]
    }

    pub fn block_mut(&mut self, by: usize, bx: usize) -> &mut [T; BLOCK_LEN] {
        &mut self.blocks[by * self.blocks_x + bx]
    }
}

pub fn grid_dims(height: usize, width: usize) -> (usize, usize) {
    (height.div_ceil(BLOCK), width.div_ceil(BLOCK))
}

/// Splits a row-major plane into 8x8 blocks. Partial edge blocks are padded
/// by replicating the last row and column.
pub fn partition(plane: &[f64], height: usize, width: usize) -> BlockGrid<f64> {
    assert!(height >= 1 && width >= 1, "plane must be at least 1x1");
    assert_eq!(plane.len(), height * width, "plane length does not match dims");
    let (blocks_y, blocks_x) = grid_dims(height, width);
    let blocks = (0..blocks_y * blocks_x)
        .into_par_iter()
        .map(|i| {
            let (by, bx) = (i / blocks_x, i % blocks_x);
            std::array::from_fn(|k| {
                let y = (by * BLOCK + k / BLOCK).min(height - 1);
                let x = (bx * BLOCK + k % BLOCK).min(width - 1);
                plane[y * width + x]
            })
        })
        .collect();
    BlockGrid {
        blocks_y,
        blocks_x,
        blocks,
    }
}

/// Inverse of [`partition`]; padding outside `height × width` is dropped.
pub fn reassemble(grid: &BlockGrid<f64>, height: usize, width: usize) -> Vec<f64> {
    assert_eq!(grid_dims(height, width), (grid.blocks_y, grid.blocks_x));
    let mut plane = vec![0.0; height * width];
    plane.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        let (by, r) = (y / BLOCK, y % BLOCK);
        for (x, v) in row.iter_mut().enumerate() {
            *v = grid.block(by, x / BLOCK)[r * BLOCK + x % BLOCK];
        }
    });
    plane
}

/// Per-channel (Y, Cb, Cr) block grids for one image.
///
/// `T` is `f64` for real-valued samples/coefficients and `i32` for
/// quantization levels.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffPlanes<T> {
    height: usize,
    width: usize,
    domain: Domain,
    channels: Vec<BlockGrid<T>>,
}

impl<T> CoeffPlanes<T> {
    pub fn new(height: usize, width: usize, domain: Domain, channels: Vec<BlockGrid<T>>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Dimensions(format!("{height}x{width} image")));
        }
        if channels.is_empty() || channels.len() > 3 {
            return Err(Error::Dimensions(format!(
                "expected 1 to 3 channels, got {}",
                channels.len()
            )));
        }
        let (by, bx) = grid_dims(height, width);
        for ch in &channels {
            if ch.blocks_y != by || ch.blocks_x != bx || ch.blocks.len() != by * bx {
                return Err(Error::Dimensions(format!(
                    "{height}x{width} image needs a {by}x{bx} block grid"
                )));
            }
        }
        Ok(Self {
            height,
            width,
            domain,
            channels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn blocks_y(&self) -> usize {
        self.channels[0].blocks_y
    }

    pub fn blocks_x(&self) -> usize {
        self.channels[0].blocks_x
    }

    pub fn channels(&self) -> &[BlockGrid<T>] {
        &self.channels
    }

    pub fn channels_mut(&mut self) -> &mut [BlockGrid<T>] {
        &mut self.channels
    }

    pub fn expect_domain(&self, expected: Domain) -> Result<()> {
        if self.domain != expected {
            return Err(Error::Domain {
                expected: expected.name(),
                found: self.domain.name(),
            });
        }
        Ok(())
    }

    /// Applies `f` to every block of every channel in parallel.
    pub fn map_blocks<U, F>(&self, domain: Domain, f: F) -> CoeffPlanes<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&[T; BLOCK_LEN]) -> [U; BLOCK_LEN] + Sync,
    {
        let channels = self
            .channels
            .iter()
            .map(|g| BlockGrid {
                blocks_y: g.blocks_y,
                blocks_x: g.blocks_x,
                blocks: g.blocks.par_iter().map(&f).collect(),
            })
            .collect();
        CoeffPlanes {
            height: self.height,
            width: self.width,
            domain,
            channels,
        }
    }
}

impl CoeffPlanes<f64> {
    /// Partitions the three planes into spatial-domain blocks. The planes
    /// should already be level-shifted.
    pub fn from_ycc(planes: &YccPlanes) -> Self {
        let (h, w) = (planes.height(), planes.width());
        let channels = planes.planes().iter().map(|p| partition(p, h, w)).collect();
        CoeffPlanes {
            height: h,
            width: w,
            domain: Domain::Spatial,
            channels,
        }
    }

    /// Reassembles a three-channel spatial grid into level-shifted planes.
    pub fn to_ycc(&self) -> Result<YccPlanes> {
        self.expect_domain(Domain::Spatial)?;
        if self.channels.len() != 3 {
            return Err(Error::Dimensions(format!(
                "YCbCr needs 3 channels, have {}",
                self.channels.len()
            )));
        }
        let planes = [0, 1, 2].map(|c| reassemble(&self.channels[c], self.height, self.width));
        YccPlanes::new(self.height, self.width, planes, true)
    }

    pub fn forward(&self) -> Result<Self> {
        self.expect_domain(Domain::Spatial)?;
        Ok(self.map_blocks(Domain::Frequency, forward_dct))
    }

    pub fn inverse(&self) -> Result<Self> {
        self.expect_domain(Domain::Frequency)?;
        Ok(self.map_blocks(Domain::Spatial, inverse_dct))
    }
}
