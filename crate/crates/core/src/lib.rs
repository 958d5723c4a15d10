//! Compressed-domain preprocessing for DCT-domain semantic segmentation.
//!
//! The pipeline mirrors the lossy front half of a baseline JPEG encoder
//! without chroma subsampling or entropy coding:
//!
//! ```text
//! RGB -> YCbCr -> level shift -> 8x8 blocks -> DCT -> [quantize] -> FCR -> [select]
//! ```
//!
//! Frequency Component Rearrangement ([`fcr`]) turns every 8x8 coefficient
//! block into a 64-deep channel vector so that the spatial axes of the
//! resulting tensor carry only block positions and the channel axis carries
//! frequency. Every stage has an exact (or bounded-error) inverse so tensors
//! can be decoded back into images for verification.
//!
//! [`netshape`] is a separate calculator for feature-map shapes and
//! multiply-add counts of convolutional networks described in JSON.

pub mod blockdct;
pub mod colorspace;
mod error;
pub mod fcr;
pub mod io;
pub mod netshape;
pub mod pipeline;
pub mod quant;
pub mod select;

pub use error::{Error, Result};
