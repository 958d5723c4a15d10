//! Binary PPM (P6) with an 8-bit maxval.

use super::RgbImage;
use crate::{Error, Result};

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.buf.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.buf.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn read_number(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.buf.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Ppm(format!("expected {what} in header")));
        }
        std::str::from_utf8(&self.buf[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Ppm(format!("{what} out of range")))
    }
}

pub fn read_ppm(bytes: &[u8]) -> Result<RgbImage> {
    let magic = bytes
        .get(..2)
        .ok_or_else(|| Error::Ppm("stream too short for magic".into()))?;
    match magic {
        b"P6" => {}
        [b'P', b'1'..=b'7'] => {
            return Err(Error::UnsupportedFormat(format!(
                "{} (only binary RGB P6 is supported)",
                String::from_utf8_lossy(magic)
            )))
        }
        _ => return Err(Error::Ppm("missing P6 magic".into())),
    }

    let mut cur = Cursor { buf: bytes, pos: 2 };
    let width = cur.read_number("width")?;
    let height = cur.read_number("height")?;
    let maxval = cur.read_number("maxval")?;
    if maxval != 255 {
        return Err(Error::Ppm(format!("maxval {maxval} is not 255")));
    }
    if width == 0 || height == 0 {
        return Err(Error::Dimensions(format!("{width}x{height} PPM")));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::Ppm("missing whitespace after maxval".into())),
    }

    let len = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::Ppm(format!("{width}x{height} overflows")))?;
    let payload = &bytes[cur.pos..];
    if payload.len() < len {
        return Err(Error::Ppm(format!(
            "truncated raster: need {len} bytes, have {}",
            payload.len()
        )));
    }
    RgbImage::new(height, width, payload[..len].to_vec())
}

pub fn write_ppm(image: &RgbImage) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", image.width(), image.height());
    let mut out = Vec::with_capacity(header.len() + image.data().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(image.data());
    out
}
