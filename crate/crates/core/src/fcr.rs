//! Frequency Component Rearrangement.
//!
//! Each 8x8 coefficient block becomes a 64-deep channel vector at its block
//! position, so an `h × w` image yields an `(⌈h/8⌉, ⌈w/8⌉, 64·planes)` tensor.
//! Channels are plane-major (all Y sub-bands, then Cb, then Cr) and, within a
//! plane, follow a [`FrequencyOrder`].

use rayon::prelude::*;

use crate::blockdct::{grid_dims, BlockGrid, CoeffPlanes, Domain, BLOCK, BLOCK_LEN};
use crate::io::{Payload, TensorFile, TensorMeta};
use crate::select::{SelectionShape, SelectionSpec};
use crate::{Error, Result};

/// Zigzag scan position -> row-major block index.
#[rustfmt::skip]
pub const ZIGZAG_TO_NATURAL: [usize; BLOCK_LEN] = [
     0,  1,  8, 16,  9,  2,  3, 10,
    17, 24, 32, 25, 18, 11,  4,  5,
    12, 19, 26, 33, 40, 48, 41, 34,
    27, 20, 13,  6,  7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36,
    29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46,
    53, 60, 61, 54, 47, 55, 62, 63,
];

pub const NATURAL_TO_ZIGZAG: [usize; BLOCK_LEN] = {
    let mut table = [0; BLOCK_LEN];
    let mut i = 0;
    while i < BLOCK_LEN {
        table[ZIGZAG_TO_NATURAL[i]] = i;
        i += 1;
    }
    table
};

/// Bit of the ordering tag byte marking a square (top-left k×k) selection.
pub const SQUARE_SELECTION_FLAG: u8 = 0x80;

/// Maps a sub-band `(u, v)` to its channel offset within a plane's 64.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyOrder {
    /// JPEG zigzag scan; low frequencies get low channel indices.
    #[default]
    Zigzag,
    /// Row-major `u * 8 + v`.
    Raster,
}

impl FrequencyOrder {
    pub fn tag(self) -> u8 {
        match self {
            FrequencyOrder::Zigzag => 1,
            FrequencyOrder::Raster => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(FrequencyOrder::Zigzag),
            2 => Some(FrequencyOrder::Raster),
            _ => None,
        }
    }

    /// Channel offset of the coefficient at row-major block index `natural`.
    pub fn channel_of(self, natural: usize) -> usize {
        match self {
            FrequencyOrder::Zigzag => NATURAL_TO_ZIGZAG[natural],
            FrequencyOrder::Raster => natural,
        }
    }

    pub fn channel_of_uv(self, u: usize, v: usize) -> usize {
        self.channel_of(u * BLOCK + v)
    }

    /// Row-major block index held by channel offset `channel`.
    pub fn natural_of(self, channel: usize) -> usize {
        match self {
            FrequencyOrder::Zigzag => ZIGZAG_TO_NATURAL[channel],
            FrequencyOrder::Raster => channel,
        }
    }
}

/// A rearranged coefficient tensor, `(H, W, C)` channel-last.
#[derive(Debug, Clone, PartialEq)]
pub struct FcrTensor<T> {
    dims: [usize; 3],
    data: Vec<T>,
    order: FrequencyOrder,
    /// Source plane count before any selection.
    planes: usize,
    selection: Option<SelectionSpec>,
    quality: Option<u8>,
    image_height: usize,
    image_width: usize,
}

impl<T> FcrTensor<T> {
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn order(&self) -> FrequencyOrder {
        self.order
    }

    pub fn planes(&self) -> usize {
        self.planes
    }

    pub fn selection(&self) -> Option<&SelectionSpec> {
        self.selection.as_ref()
    }

    pub fn quality(&self) -> Option<u8> {
        self.quality
    }

    pub fn set_quality(&mut self, quality: Option<u8>) {
        self.quality = quality;
    }

    pub fn image_dims(&self) -> (usize, usize) {
        (self.image_height, self.image_width)
    }

    pub fn at(&self, y: usize, x: usize, c: usize) -> &T {
        &self.data[(y * self.dims[1] + x) * self.dims[2] + c]
    }

    /// For each output channel, the full-layout channel (`plane·64 + offset`)
    /// it came from.
    pub fn source_channels(&self) -> Vec<usize> {
        match &self.selection {
            Some(sel) => sel.channels(),
            None => (0..self.planes * BLOCK_LEN).collect(),
        }
    }

    /// Whether every sub-band of every source plane is present.
    pub fn is_full(&self) -> bool {
        self.dims[2] == self.planes * BLOCK_LEN
    }

    pub(crate) fn from_parts(
        dims: [usize; 3],
        data: Vec<T>,
        order: FrequencyOrder,
        planes: usize,
        selection: Option<SelectionSpec>,
        quality: Option<u8>,
        image_dims: (usize, usize),
    ) -> Self {
        debug_assert_eq!(data.len(), dims.iter().product::<usize>());
        Self {
            dims,
            data,
            order,
            planes,
            selection,
            quality,
            image_height: image_dims.0,
            image_width: image_dims.1,
        }
    }

    pub fn map<U, F: Fn(&T) -> U>(&self, f: F) -> FcrTensor<U> {
        FcrTensor {
            dims: self.dims,
            data: self.data.iter().map(f).collect(),
            order: self.order,
            planes: self.planes,
            selection: self.selection,
            quality: self.quality,
            image_height: self.image_height,
            image_width: self.image_width,
        }
    }

    fn meta(&self) -> TensorMeta {
        let (selection, square) = match &self.selection {
            Some(s) => (s.counts(), s.shape() == SelectionShape::Square),
            None => ([0; 3], false),
        };
        TensorMeta {
            quality_factor: self.quality.map_or(0, u16::from),
            selection,
            height: self.image_height as u32,
            width: self.image_width as u32,
            ordering: self.order.tag() | if square { SQUARE_SELECTION_FLAG } else { 0 },
        }
    }
}

/// Rearranges frequency-domain blocks into a channel-last tensor.
pub fn fcr<T>(planes: &CoeffPlanes<T>, order: FrequencyOrder) -> Result<FcrTensor<T>>
where
    T: Copy + Default + Send + Sync,
{
    planes.expect_domain(Domain::Frequency)?;
    let (by_n, bx_n) = (planes.blocks_y(), planes.blocks_x());
    let nplanes = planes.channels().len();
    let c = nplanes * BLOCK_LEN;
    let mut data = vec![T::default(); by_n * bx_n * c];
    data.par_chunks_mut(bx_n * c).enumerate().for_each(|(by, row)| {
        for bx in 0..bx_n {
            let cell = &mut row[bx * c..(bx + 1) * c];
            for (p, grid) in planes.channels().iter().enumerate() {
                let block = grid.block(by, bx);
                for (k, &v) in block.iter().enumerate() {
                    cell[p * BLOCK_LEN + order.channel_of(k)] = v;
                }
            }
        }
    });
    Ok(FcrTensor {
        dims: [by_n, bx_n, c],
        data,
        order,
        planes: nplanes,
        selection: None,
        quality: None,
        image_height: planes.height(),
        image_width: planes.width(),
    })
}

/// Undoes [`fcr`]. Selected tensors are accepted only with `zero_fill`, in
/// which case every dropped sub-band comes back as `T::default()`.
pub fn inverse_fcr<T>(tensor: &FcrTensor<T>, zero_fill: bool) -> Result<CoeffPlanes<T>>
where
    T: Copy + Default + Send + Sync,
{
    if !tensor.is_full() && !zero_fill {
        return Err(Error::Layout(format!(
            "tensor holds {} of {} channels; enable zero-fill to invert a selection",
            tensor.dims[2],
            tensor.planes * BLOCK_LEN
        )));
    }
    let [h, w, c] = tensor.dims;
    if (h, w) != grid_dims(tensor.image_height, tensor.image_width) {
        return Err(Error::Dimensions(format!(
            "{h}x{w} tensor cannot come from a {}x{} image",
            tensor.image_height, tensor.image_width
        )));
    }
    let sources = tensor.source_channels();
    let order = tensor.order;
    let channels = (0..tensor.planes)
        .map(|p| {
            let picks: Vec<(usize, usize)> = sources
                .iter()
                .enumerate()
                .filter(|(_, &s)| s / BLOCK_LEN == p)
                .map(|(i, &s)| (i, order.natural_of(s % BLOCK_LEN)))
                .collect();
            let blocks = (0..h * w)
                .into_par_iter()
                .map(|cell| {
                    let vec = &tensor.data[cell * c..(cell + 1) * c];
                    let mut block = [T::default(); BLOCK_LEN];
                    for &(i, natural) in &picks {
                        block[natural] = vec[i];
                    }
                    block
                })
                .collect();
            BlockGrid {
                blocks_y: h,
                blocks_x: w,
                blocks,
            }
        })
        .collect();
    CoeffPlanes::new(
        tensor.image_height,
        tensor.image_width,
        Domain::Frequency,
        channels,
    )
}

impl FcrTensor<f64> {
    /// Stores as f32, multiplying every value by `scale` first.
    pub fn to_tensor_file(&self, scale: f64) -> TensorFile {
        TensorFile {
            dims: self.dims.map(|d| d as u32),
            meta: self.meta(),
            payload: Payload::F32(self.data.iter().map(|&v| (v * scale) as f32).collect()),
        }
    }
}

impl FcrTensor<i32> {
    /// Stores quantization levels as i16.
    pub fn to_tensor_file(&self) -> Result<TensorFile> {
        let data = self
            .data
            .iter()
            .map(|&v| {
                i16::try_from(v).map_err(|_| Error::Tensor(format!("level {v} does not fit in i16")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TensorFile {
            dims: self.dims.map(|d| d as u32),
            meta: self.meta(),
            payload: Payload::I16(data),
        })
    }
}

/// A tensor file decoded back into a typed rearranged tensor.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedTensor {
    /// f32 payload: coefficient units, divided back by `scale`.
    Real(FcrTensor<f64>),
    /// i16 payload: quantization levels.
    Levels(FcrTensor<i32>),
}

impl LoadedTensor {
    pub fn from_tensor_file(file: &TensorFile, scale: f64) -> Result<Self> {
        let meta = &file.meta;
        let order = FrequencyOrder::from_tag(meta.ordering & !SQUARE_SELECTION_FLAG).ok_or_else(|| {
            Error::Layout(format!(
                "ordering tag {:#04x} is not a frequency-channel layout",
                meta.ordering
            ))
        })?;
        let [d0, d1, d2] = file.dims.map(|d| d as usize);
        let (planes, selection) = if meta.has_selection() {
            let [ny, ncb, ncr] = meta.selection;
            let sel = if meta.ordering & SQUARE_SELECTION_FLAG != 0 {
                SelectionSpec::square(ny, ncb, ncr)?
            } else {
                SelectionSpec::prefix(ny, ncb, ncr)?
            };
            (3, Some(sel.with_order(order)))
        } else {
            if d2 % BLOCK_LEN != 0 || !(1..=3).contains(&(d2 / BLOCK_LEN)) {
                return Err(Error::Layout(format!(
                    "{d2} channels without selection metadata is not 64, 128 or 192"
                )));
            }
            (d2 / BLOCK_LEN, None)
        };
        let image_dims = (meta.height as usize, meta.width as usize);
        if (d0, d1) != grid_dims(image_dims.0, image_dims.1) {
            return Err(Error::Tensor(format!(
                "{d0}x{d1} block grid is inconsistent with a {}x{} image",
                image_dims.0, image_dims.1
            )));
        }
        let quality = match meta.quality_factor {
            0 => None,
            q @ 1..=100 => Some(q as u8),
            q => return Err(Error::Tensor(format!("quality factor {q} in header"))),
        };
        let dims = [d0, d1, d2];
        Ok(match &file.payload {
            Payload::F32(v) => LoadedTensor::Real(FcrTensor::from_parts(
                dims,
                v.iter().map(|&x| f64::from(x) / scale).collect(),
                order,
                planes,
                selection,
                quality,
                image_dims,
            )),
            Payload::I16(v) => LoadedTensor::Levels(FcrTensor::from_parts(
                dims,
                v.iter().map(|&x| i32::from(x)).collect(),
                order,
                planes,
                selection,
                quality,
                image_dims,
            )),
        })
    }
}
