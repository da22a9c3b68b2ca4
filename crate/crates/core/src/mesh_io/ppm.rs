//! Binary PPM (P6, maxval 255).

use thiserror::Error;

use super::mesh::{RasterImage, Rgb};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PpmError {
    #[error("not a binary PPM (expected magic P6)")]
    BadMagic,
    #[error("malformed header: {0}")]
    BadHeader(&'static str),
    #[error("unsupported maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u64),
    #[error("image dimensions must be at least 1x1")]
    ZeroDimension,
    #[error("truncated pixel data: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
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

    fn number(&mut self) -> Result<u64, PpmError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PpmError::BadHeader("expected a decimal number"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(PpmError::BadHeader("number out of range"))
    }
}

pub fn read_ppm(bytes: &[u8]) -> Result<RasterImage, PpmError> {
    if !bytes.starts_with(b"P6") {
        return Err(PpmError::BadMagic);
    }
    let mut header = Header { bytes, pos: 2 };
    if !header
        .bytes
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(PpmError::BadMagic);
    }
    let width = header.number()?;
    let height = header.number()?;
    let maxval = header.number()?;
    if maxval != 255 {
        return Err(PpmError::UnsupportedMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(PpmError::ZeroDimension);
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(header.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(PpmError::BadHeader("missing whitespace after maxval"));
    }
    let data = &bytes[header.pos + 1..];
    let expected = usize::try_from(width)
        .ok()
        .and_then(|w| w.checked_mul(usize::try_from(height).ok()?))
        .and_then(|n| n.checked_mul(3))
        .ok_or(PpmError::BadHeader("dimensions overflow"))?;
    if data.len() < expected {
        return Err(PpmError::Truncated {
            expected,
            got: data.len(),
        });
    }
    let pixels: Vec<Rgb> = data[..expected]
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    Ok(RasterImage::new(width as usize, height as usize, pixels).expect("dimensions checked"))
}

/// Serializes with the canonical header `P6\n<w> <h>\n255\n`.
pub fn write_ppm(image: &RasterImage) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", image.width(), image.height());
    let mut out = Vec::with_capacity(header.len() + image.pixels().len() * 3);
    out.extend_from_slice(header.as_bytes());
    for p in image.pixels() {
        out.extend_from_slice(p);
    }
    out
}
