//! Low-frequency component selection over the 192-channel FCR layout, and
//! the non-rearranged condensed layout that keeps each block's top-left
//! k×k corner in place.

use rayon::prelude::*;

use crate::blockdct::{CoeffPlanes, Domain, BLOCK, BLOCK_LEN};
use crate::fcr::{FcrTensor, FrequencyOrder};
use crate::io::{Payload, TensorFile, TensorMeta};
use crate::{Error, Result};

/// Which coefficients "the first n" refers to within a plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionShape {
    /// The first n channels of the frequency order.
    #[default]
    Prefix,
    /// The top-left √n × √n square of the block; n must be a perfect square.
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectionSpec {
    counts: [u8; 3],
    shape: SelectionShape,
    order: FrequencyOrder,
}

impl SelectionSpec {
    fn build(counts: [u8; 3], shape: SelectionShape) -> Result<Self> {
        if let Some(&n) = counts.iter().find(|&&n| usize::from(n) > BLOCK_LEN) {
            return Err(Error::Selection(format!("{n} components exceeds the 64 per plane")));
        }
        if counts.iter().all(|&n| n == 0) {
            return Err(Error::Selection("at least one component must be selected".into()));
        }
        if shape == SelectionShape::Square {
            if let Some(&n) = counts.iter().find(|&&n| square_side(n).is_none()) {
                return Err(Error::Selection(format!(
                    "square selection needs perfect-square counts, got {n}"
                )));
            }
        }
        Ok(Self {
            counts,
            shape,
            order: FrequencyOrder::Zigzag,
        })
    }

    pub fn prefix(ny: u8, ncb: u8, ncr: u8) -> Result<Self> {
        Self::build([ny, ncb, ncr], SelectionShape::Prefix)
    }

    pub fn square(ny: u8, ncb: u8, ncr: u8) -> Result<Self> {
        Self::build([ny, ncb, ncr], SelectionShape::Square)
    }

    /// Same counts against a different frequency-to-channel map.
    pub fn with_order(mut self, order: FrequencyOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_shape(self, shape: SelectionShape) -> Result<Self> {
        Ok(Self::build(self.counts, shape)?.with_order(self.order))
    }

    pub fn counts(&self) -> [u8; 3] {
        self.counts
    }

    pub fn shape(&self) -> SelectionShape {
        self.shape
    }

    pub fn order(&self) -> FrequencyOrder {
        self.order
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|&n| usize::from(n)).sum()
    }

    /// Indices into the 192-channel layout, strictly increasing.
    pub fn channels(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.total());
        for (plane, &n) in self.counts.iter().enumerate() {
            let base = plane * BLOCK_LEN;
            match self.shape {
                SelectionShape::Prefix => out.extend(base..base + usize::from(n)),
                SelectionShape::Square => {
                    let side = square_side(n).expect("validated at construction");
                    let mut offs: Vec<usize> = (0..side * side)
                        .map(|i| self.order.channel_of_uv(i / side, i % side))
                        .collect();
                    offs.sort_unstable();
                    out.extend(offs.into_iter().map(|o| base + o));
                }
            }
        }
        out
    }
}

fn square_side(n: u8) -> Option<usize> {
    (0..=BLOCK).find(|s| s * s == usize::from(n))
}

pub fn make_selection(ny: u8, ncb: u8, ncr: u8) -> Result<SelectionSpec> {
    SelectionSpec::prefix(ny, ncb, ncr)
}

/// Copies the selected channels of a full three-plane tensor.
pub fn apply_selection<T: Copy + Send + Sync>(
    tensor: &FcrTensor<T>,
    spec: &SelectionSpec,
) -> Result<FcrTensor<T>> {
    if tensor.order() != spec.order() {
        return Err(Error::Layout(format!(
            "tensor uses {:?} ordering, selection expects {:?}",
            tensor.order(),
            spec.order()
        )));
    }
    if tensor.planes() != 3 || !tensor.is_full() {
        return Err(Error::Layout(format!(
            "selection needs the full 192-channel tensor, got {} channels",
            tensor.dims()[2]
        )));
    }
    let [h, w, c] = tensor.dims();
    let picks = spec.channels();
    let data: Vec<T> = tensor
        .data()
        .par_chunks(c)
        .flat_map_iter(|cell| picks.iter().map(move |&i| cell[i]))
        .collect();
    Ok(FcrTensor::from_parts(
        [h, w, picks.len()],
        data,
        tensor.order(),
        3,
        Some(*spec),
        tensor.quality(),
        tensor.image_dims(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub counts: [u8; 3],
}

impl Preset {
    pub fn total(&self) -> usize {
        self.counts.iter().map(|&n| usize::from(n)).sum()
    }

    pub fn selection(&self) -> SelectionSpec {
        let [y, cb, cr] = self.counts;
        SelectionSpec::prefix(y, cb, cr).expect("catalog entries are valid")
    }
}

const TABLE3: [Preset; 10] = [
    Preset { name: "DCT-EDANet", counts: [64, 64, 64] },
    Preset { name: "M-64-0-0", counts: [64, 0, 0] },
    Preset { name: "M-49-9-9", counts: [49, 9, 9] },
    Preset { name: "M-36-16-16", counts: [36, 16, 16] },
    Preset { name: "M-25-25-25", counts: [25, 25, 25] },
    Preset { name: "DCT-EDANet-1/4coef", counts: [16, 16, 16] },
    Preset { name: "M-16-4-4", counts: [16, 4, 4] },
    Preset { name: "M-16-1-1", counts: [16, 1, 1] },
    Preset { name: "M-9-4-4", counts: [9, 4, 4] },
    Preset { name: "M-0-0-16", counts: [0, 0, 16] },
];

/// The ten component-selection configurations, full input first.
pub fn table3_catalog() -> &'static [Preset] {
    &TABLE3
}

pub fn preset(name: &str) -> Result<Preset> {
    TABLE3
        .iter()
        .find(|p| p.name == name)
        .copied()
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

/// Blocks condensed to their top-left k×k corners, laid out spatially:
/// `(blocks_y·k, blocks_x·k, planes)` channel-last.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedTensor<T> {
    pub dims: [usize; 3],
    pub data: Vec<T>,
    pub keep: usize,
    pub quality: Option<u8>,
    pub image_height: usize,
    pub image_width: usize,
}

pub fn condense_nonfcr<T>(planes: &CoeffPlanes<T>, keep: usize) -> Result<CondensedTensor<T>>
where
    T: Copy + Default + Send + Sync,
{
    planes.expect_domain(Domain::Frequency)?;
    if keep == 0 || BLOCK % keep != 0 {
        return Err(Error::Selection(format!("condensed size {keep} does not divide 8")));
    }
    let (h, w) = (planes.blocks_y() * keep, planes.blocks_x() * keep);
    let nch = planes.channels().len();
    let mut data = vec![T::default(); h * w * nch];
    data.par_chunks_mut(w * nch).enumerate().for_each(|(y, row)| {
        let (by, u) = (y / keep, y % keep);
        for x in 0..w {
            let (bx, v) = (x / keep, x % keep);
            for (c, grid) in planes.channels().iter().enumerate() {
                row[x * nch + c] = grid.block(by, bx)[u * BLOCK + v];
            }
        }
    });
    Ok(CondensedTensor {
        dims: [h, w, nch],
        data,
        keep,
        quality: None,
        image_height: planes.height(),
        image_width: planes.width(),
    })
}

impl<T> CondensedTensor<T> {
    fn meta(&self) -> TensorMeta {
        TensorMeta {
            quality_factor: self.quality.map_or(0, u16::from),
            selection: [0; 3],
            height: self.image_height as u32,
            width: self.image_width as u32,
            // spatial layout, no frequency-channel map
            ordering: 0,
        }
    }
}

impl CondensedTensor<f64> {
    pub fn to_tensor_file(&self, scale: f64) -> TensorFile {
        TensorFile {
            dims: self.dims.map(|d| d as u32),
            meta: self.meta(),
            payload: Payload::F32(self.data.iter().map(|&v| (v * scale) as f32).collect()),
        }
    }
}

impl CondensedTensor<i32> {
    pub fn to_tensor_file(&self) -> Result<TensorFile> {
        let data = self
            .data
            .iter()
            .map(|&v| i16::try_from(v).map_err(|_| Error::Tensor(format!("level {v} does not fit in i16"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(TensorFile {
            dims: self.dims.map(|d| d as u32),
            meta: self.meta(),
            payload: Payload::I16(data),
        })
    }
}
