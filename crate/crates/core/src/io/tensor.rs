//! FCRT: a small self-describing container for rank-3, channel-last tensors.
//!
//! Layout (little-endian throughout, no padding):
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `b"FCRT"`                         |
//! | 4      | 1    | format version (1)                      |
//! | 5      | 1    | dtype: 1 = f32, 2 = i16                 |
//! | 6      | 12   | dims d0, d1, d2 as u32                  |
//! | 18     | 2    | quality factor as u16 (0 = unquantized) |
//! | 20     | 3    | selection counts nY, nCb, nCr as u8     |
//! | 23     | 8    | original image height, width as u32     |
//! | 31     | 1    | frequency ordering tag                  |
//! | 32     | ...  | d0·d1·d2 elements, row-major            |

use std::path::Path;

use super::write_atomic;
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"FCRT";
pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DType {
    F32,
    I16,
}

impl DType {
    pub fn code(self) -> u8 {
        match self {
            DType::F32 => 1,
            DType::I16 => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(DType::F32),
            2 => Some(DType::I16),
            _ => None,
        }
    }

    pub fn width(self) -> usize {
        match self {
            DType::F32 => 4,
            DType::I16 => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    F32(Vec<f32>),
    I16(Vec<i16>),
}

impl Payload {
    pub fn dtype(&self) -> DType {
        match self {
            Payload::F32(_) => DType::F32,
            Payload::I16(_) => DType::I16,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Payload::F32(v) => v.len(),
            Payload::I16(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Element `i` widened to f64.
    pub fn get(&self, i: usize) -> f64 {
        match self {
            Payload::F32(v) => f64::from(v[i]),
            Payload::I16(v) => f64::from(v[i]),
        }
    }
}

/// Per-tensor metadata carried in the fixed header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TensorMeta {
    /// 0 when the coefficients were not quantized.
    pub quality_factor: u16,
    /// (nY, nCb, nCr); all zero when no selection metadata is present.
    pub selection: [u8; 3],
    pub height: u32,
    pub width: u32,
    pub ordering: u8,
}

impl TensorMeta {
    pub fn has_selection(&self) -> bool {
        self.selection.iter().any(|&n| n != 0)
    }

    pub fn selection_total(&self) -> u32 {
        self.selection.iter().map(|&n| u32::from(n)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorFile {
    pub dims: [u32; 3],
    pub meta: TensorMeta,
    pub payload: Payload,
}

impl TensorFile {
    pub fn element_count(&self) -> u64 {
        self.dims.iter().map(|&d| u64::from(d)).product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::Dimensions(format!(
                "tensor dims {:?} contain a zero axis",
                self.dims
            )));
        }
        if self.element_count() != self.payload.len() as u64 {
            return Err(Error::Tensor(format!(
                "dims {:?} describe {} elements but payload holds {}",
                self.dims,
                self.element_count(),
                self.payload.len()
            )));
        }
        if self.meta.has_selection() && self.meta.selection_total() != self.dims[2] {
            return Err(Error::Tensor(format!(
                "selection {:?} sums to {} but channel axis is {}",
                self.meta.selection,
                self.meta.selection_total(),
                self.dims[2]
            )));
        }
        Ok(())
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.payload.len() * self.payload.dtype().width()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.validate()?;
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&MAGIC);
        out.push(FORMAT_VERSION);
        out.push(self.payload.dtype().code());
        for d in self.dims {
            out.extend_from_slice(&d.to_le_bytes());
        }
        out.extend_from_slice(&self.meta.quality_factor.to_le_bytes());
        out.extend_from_slice(&self.meta.selection);
        out.extend_from_slice(&self.meta.height.to_le_bytes());
        out.extend_from_slice(&self.meta.width.to_le_bytes());
        out.push(self.meta.ordering);
        debug_assert_eq!(out.len(), HEADER_LEN);
        match &self.payload {
            Payload::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            Payload::I16(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Tensor(format!(
                "{} bytes is shorter than the {HEADER_LEN}-byte header",
                bytes.len()
            )));
        }
        if bytes[..4] != MAGIC {
            return Err(Error::Tensor("bad magic".into()));
        }
        if bytes[4] != FORMAT_VERSION {
            return Err(Error::TensorVersion(bytes[4]));
        }
        let dtype = DType::from_code(bytes[5])
            .ok_or_else(|| Error::Tensor(format!("unknown dtype code {}", bytes[5])))?;
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let dims = [u32_at(6), u32_at(10), u32_at(14)];
        let meta = TensorMeta {
            quality_factor: u16::from_le_bytes([bytes[18], bytes[19]]),
            selection: [bytes[20], bytes[21], bytes[22]],
            height: u32_at(23),
            width: u32_at(27),
            ordering: bytes[31],
        };

        let count: u64 = dims.iter().map(|&d| u64::from(d)).product();
        let body = &bytes[HEADER_LEN..];
        if body.len() as u64 != count * dtype.width() as u64 {
            return Err(Error::Tensor(format!(
                "dims {dims:?} need {} payload bytes, file has {}",
                count * dtype.width() as u64,
                body.len()
            )));
        }
        let payload = match dtype {
            DType::F32 => Payload::F32(
                body.chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            ),
            DType::I16 => Payload::I16(
                body.chunks_exact(2)
                    .map(|c| i16::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            ),
        };
        let t = TensorFile {
            dims,
            meta,
            payload,
        };
        t.validate()?;
        Ok(t)
    }
}

pub fn write_tensor(tensor: &TensorFile, path: impl AsRef<Path>) -> Result<()> {
    let bytes = tensor.to_bytes()?;
    write_atomic(path.as_ref(), &bytes)
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<TensorFile> {
    TensorFile::from_bytes(&std::fs::read(path)?)
}
