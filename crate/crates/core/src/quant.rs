//! Quality-factor scaled JPEG quantization.
//!
//! One base table is used for all three channels. The scaling is
//!
//! ```text
//! m = 5000 / qf        if qf < 50
//!     200 - 2·qf       otherwise
//! Q = max(1, floor((Qb·m + 50) / 100))
//! V = round(U / Q)     (ties away from zero)
//! ```
//!
//! `m` is real-valued; the floor is evaluated in exact integer arithmetic.

use crate::blockdct::{Block8, CoeffPlanes, Domain, BLOCK_LEN};
use crate::{Error, Result};

/// Base luminance table, row-major.
#[rustfmt::skip]
pub const BASE_TABLE: [u16; BLOCK_LEN] = [
    16, 11, 10, 16,  24,  40,  51,  61,
    12, 12, 14, 19,  26,  58,  60,  55,
    14, 13, 16, 24,  40,  57,  69,  56,
    14, 17, 22, 29,  51,  87,  80,  62,
    18, 22, 37, 56,  68, 109, 103,  77,
    24, 35, 55, 64,  81, 104, 113,  92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103,  99,
];

pub type QuantBlock = [i32; BLOCK_LEN];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantSpec {
    quality: u8,
    table: [u16; BLOCK_LEN],
}

impl QuantSpec {
    pub fn quality(&self) -> u8 {
        self.quality
    }

    pub fn table(&self) -> &[u16; BLOCK_LEN] {
        &self.table
    }

    /// The scale multiplier `m` as a real number.
    pub fn multiplier(&self) -> f64 {
        multiplier(self.quality)
    }
}

fn multiplier(qf: u8) -> f64 {
    if qf < 50 {
        5000.0 / f64::from(qf)
    } else {
        200.0 - 2.0 * f64::from(qf)
    }
}

pub fn build_qmatrix(qf: i64) -> Result<QuantSpec> {
    if !(1..=100).contains(&qf) {
        return Err(Error::QualityFactor(qf));
    }
    let table = BASE_TABLE.map(|base| {
        let base = i64::from(base);
        // floor((base·m + 50) / 100), with m = 5000/qf rewritten over a common
        // denominator so no rounding happens before the floor
        let q = if qf < 50 {
            (base * 5000 + 50 * qf) / (100 * qf)
        } else {
            (base * (200 - 2 * qf) + 50) / 100
        };
        q.max(1) as u16
    });
    Ok(QuantSpec {
        quality: qf as u8,
        table,
    })
}

pub fn quantize_block(coeffs: &Block8, spec: &QuantSpec) -> QuantBlock {
    std::array::from_fn(|i| (coeffs[i] / f64::from(spec.table[i])).round() as i32)
}

pub fn dequantize_block(levels: &QuantBlock, spec: &QuantSpec) -> Block8 {
    std::array::from_fn(|i| f64::from(levels[i]) * f64::from(spec.table[i]))
}

pub fn quantize_planes(planes: &CoeffPlanes<f64>, spec: &QuantSpec) -> Result<CoeffPlanes<i32>> {
    planes.expect_domain(Domain::Frequency)?;
    Ok(planes.map_blocks(Domain::Frequency, |b| quantize_block(b, spec)))
}

pub fn dequantize_planes(planes: &CoeffPlanes<i32>, spec: &QuantSpec) -> Result<CoeffPlanes<f64>> {
    planes.expect_domain(Domain::Frequency)?;
    Ok(planes.map_blocks(Domain::Frequency, |b| dequantize_block(b, spec)))
}
