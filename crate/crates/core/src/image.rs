//! Grayscale image model and Netpbm graymap (PGM) I/O.
//!
//! Pixels are stored row-major: the pixel in row `y`, column `x` lives at
//! flat index `y * width + x`. All indices are 0-based.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// An 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "image must be at least 1x1, got {width}x{height}"
            )));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::Dimension(format!("{width}x{height} overflows")))?;
        if pixels.len() != expected {
            return Err(Error::shape(
                format!("{expected} pixels ({width}x{height})"),
                format!("{} pixels", pixels.len()),
            ));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[flat_index(x, y, self.width)]
    }

    /// Intensity histogram, 256 bins.
    pub fn histogram(&self) -> [usize; 256] {
        let mut hist = [0usize; 256];
        for &p in &self.pixels {
            hist[p as usize] += 1;
        }
        hist
    }

    pub fn flatten(&self) -> FlatVector<u8> {
        FlatVector {
            values: self.pixels.clone(),
            height: self.height,
            width: self.width,
        }
    }

    pub fn unflatten(v: FlatVector<u8>) -> Result<Self> {
        Self::new(v.width, v.height, v.values)
    }
}

/// Row-major flat index of column `x`, row `y`.
#[inline]
pub fn flat_index(x: usize, y: usize, width: usize) -> usize {
    y * width + x
}

/// A flattened matrix that remembers the shape it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatVector<T> {
    pub values: Vec<T>,
    pub height: usize,
    pub width: usize,
}

impl<T> FlatVector<T> {
    pub fn new(values: Vec<T>, height: usize, width: usize) -> Result<Self> {
        if values.len() != height * width {
            return Err(Error::shape(
                format!("{} values ({width}x{height})", height * width),
                format!("{} values", values.len()),
            ));
        }
        Ok(Self { values, height, width })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }
}

/// Reads a P2 or P5 graymap from disk.
pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let bytes = fs::read(path)?;
    decode_pgm(&bytes)
}

/// Writes `img` as a binary (P5) graymap with maxval 255.
pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pgm(img))?;
    Ok(())
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.len() + 20);
    write!(out, "P5\n{} {}\n255\n", img.width, img.height).expect("write to Vec");
    out.extend_from_slice(&img.pixels);
    out
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    /// Skips whitespace and `#` comments (which run to the end of the line).
    fn skip_separators(&mut self) {
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

    fn next_uint(&mut self, what: &str) -> Result<u32> {
        self.skip_separators();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.bytes.get(start) {
                None => Error::format(start, format!("unexpected end of file reading {what}")),
                Some(_) => Error::format(start, format!("expected decimal {what}")),
            });
        }
        if self
            .bytes
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            return Err(Error::format(self.pos, format!("junk after {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse::<u32>()
            .map_err(|_| Error::format(start, format!("{what} out of range")))
    }
}

/// Parses an in-memory P2/P5 graymap.
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        Some(m) => {
            return Err(Error::format(
                0,
                format!("bad magic {:?}, expected P2 or P5", String::from_utf8_lossy(m)),
            ))
        }
        None => return Err(Error::format(0, "file too short for magic number")),
    };
    if bytes.get(2).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
        return Err(Error::format(2, "magic number not followed by whitespace"));
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width_at = cur.pos;
    let width = cur.next_uint("width")? as usize;
    let height = cur.next_uint("height")? as usize;
    if width == 0 || height == 0 {
        return Err(Error::format(width_at, format!("zero dimension {width}x{height}")));
    }
    let maxval_at = cur.pos;
    let maxval = cur.next_uint("maxval")?;
    if maxval > 255 {
        return Err(Error::UnsupportedDepth(maxval));
    }
    if maxval == 0 {
        return Err(Error::format(maxval_at, "maxval must be at least 1"));
    }
    let n = width * height;

    let pixels = if binary {
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err(Error::format(cur.pos, "missing whitespace after maxval")),
        }
        let start = cur.pos;
        let raster = bytes.get(start..start + n).ok_or_else(|| {
            Error::format(
                bytes.len(),
                format!("truncated raster: need {n} bytes, found {}", bytes.len() - start),
            )
        })?;
        if let Some(i) = raster.iter().position(|&p| u32::from(p) > maxval) {
            return Err(Error::format(start + i, format!("sample exceeds maxval {maxval}")));
        }
        raster.to_vec()
    } else {
        let mut pixels = Vec::with_capacity(n);
        for _ in 0..n {
            cur.skip_separators();
            let at = cur.pos;
            let v = cur.next_uint("sample")?;
            if v > maxval {
                return Err(Error::format(at, format!("sample {v} exceeds maxval {maxval}")));
            }
            pixels.push(v as u8);
        }
        pixels
    };
    GrayImage::new(width, height, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_graymap() {
        let img = decode_pgm(b"P2 2 2 255\n0 255 128 64\n").unwrap();
        assert_eq!(img, GrayImage::new(2, 2, vec![0, 255, 128, 64]).unwrap());
    }

    #[test]
    fn ascii_with_comments() {
        let img = decode_pgm(b"P2\n# made by hand\n3 1\n# max\n9\n1 2 # trailing\n 9\n").unwrap();
        assert_eq!(img.pixels(), &[1, 2, 9]);
    }

    #[test]
    fn binary_256() {
        let mut bytes = b"P5\n256 256\n255\n".to_vec();
        bytes.extend((0..65536u32).map(|i| (i % 251) as u8));
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!((img.width(), img.height()), (256, 256));
        assert_eq!(img.get(3, 1), ((256 + 3) % 251) as u8);
    }

    #[test]
    fn rejects_ppm_magic() {
        let err = decode_pgm(b"P6\n1 1\n255\n\0\0\0").unwrap_err();
        assert!(matches!(err, Error::Format { offset: 0, .. }), "{err}");
    }

    #[test]
    fn rejects_sixteen_bit() {
        let err = decode_pgm(b"P5 1 1 65535\n\0\0").unwrap_err();
        assert!(matches!(err, Error::UnsupportedDepth(65535)));
    }

    #[test]
    fn truncated_raster_reports_offset() {
        let err = decode_pgm(b"P5\n2 2\n255\n\x01\x02").unwrap_err();
        match err {
            Error::Format { offset, .. } => assert_eq!(offset, 13),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn malformed_width_reports_offset() {
        let err = decode_pgm(b"P2\nx 2 255\n").unwrap_err();
        assert!(matches!(err, Error::Format { offset: 3, .. }), "{err}");
    }

    #[test]
    fn sample_over_maxval() {
        assert!(decode_pgm(b"P2 1 1 15 16").is_err());
        assert!(decode_pgm(b"P5 1 1 15\n\x10").is_err());
    }

    #[test]
    fn encode_single_black_pixel() {
        let img = GrayImage::new(1, 1, vec![0]).unwrap();
        assert_eq!(encode_pgm(&img), b"P5\n1 1\n255\n\x00");
    }

    #[test]
    fn encode_header_is_width_then_height() {
        let img = GrayImage::new(2, 3, vec![1, 2, 3, 4, 5, 6]).unwrap();
        assert!(encode_pgm(&img).starts_with(b"P5\n2 3\n255\n"));
    }

    #[test]
    fn row_major_flattening() {
        let img = GrayImage::new(2, 2, vec![10, 20, 30, 40]).unwrap();
        let flat = img.flatten();
        assert_eq!(flat.values, vec![10, 20, 30, 40]);
        assert_eq!(flat.shape(), (2, 2));
        assert_eq!(flat_index(3, 2, 4), 11);
    }

    #[test]
    fn unflatten_length_mismatch() {
        let v = FlatVector {
            values: vec![1u8, 2, 3],
            height: 2,
            width: 2,
        };
        assert!(matches!(GrayImage::unflatten(v), Err(Error::Shape { .. })));
        assert!(FlatVector::new(vec![0.0; 5], 2, 3).is_err());
    }

    #[test]
    fn zero_sized_images_rejected() {
        assert!(GrayImage::new(0, 3, vec![]).is_err());
        assert!(decode_pgm(b"P5 0 1 255\n").is_err());
    }
}
