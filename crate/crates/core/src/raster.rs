//! Binary feature masks and their on-disk encodings.
//!
//! Masks are read from binary PGM (`P5`) or PNG. Any nonzero sample decodes
//! as a feature pixel. Masks are written as 8-bit grayscale with feature
//! pixels stored as 255 and background as 0, so a save/load cycle is exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Row-major boolean raster. `true` marks a feature pixel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        check_dimensions(width, height)?;
        if pixels.len() != width * height {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: "pixel buffer length differs from width * height",
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// A mask with every pixel set to `value`.
    pub fn filled(width: usize, height: usize, value: bool) -> Result<Self> {
        check_dimensions(width, height)?;
        Ok(Self {
            width,
            height,
            pixels: vec![value; width * height],
        })
    }

    /// Builds a mask by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        check_dimensions(width, height)?;
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Callers must have validated the dimensions already.
    pub(crate) fn from_parts(width: usize, height: usize, pixels: Vec<bool>) -> Self {
        debug_assert!(width >= 1 && height >= 1 && pixels.len() == width * height);
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.pixels.iter().any(|&p| p)
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<bool> {
        self.pixels
    }

    pub fn row(&self, y: usize) -> &[bool] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    /// Pixel at column `x`, row `y`. Panics when out of bounds.
    pub fn get(&self, x: usize, y: usize) -> bool {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        self.pixels[y * self.width + x]
    }

    pub fn count_ones(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    /// True if every feature pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dimensions() == other.dimensions()
            && self.pixels.iter().zip(&other.pixels).all(|(&a, &b)| !a || b)
    }

    /// Pixelwise `self & !other`.
    pub fn and_not(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a || b)
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> Result<BinaryMask> {
        ensure_same_shape(self, other)?;
        let pixels = self.pixels.iter().zip(&other.pixels).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_parts(self.width, self.height, pixels))
    }

    /// Shifts the content by whole pixels; `(1, 0)` moves every feature one
    /// column to the right. Vacated pixels become background.
    pub fn shifted(&self, dx: i64, dy: i64) -> BinaryMask {
        let (w, h) = (self.width as i64, self.height as i64);
        let mut pixels = vec![false; self.pixels.len()];
        for y in 0..h {
            let sy = y - dy;
            if !(0..h).contains(&sy) {
                continue;
            }
            for x in 0..w {
                let sx = x - dx;
                if (0..w).contains(&sx) {
                    pixels[(y * w + x) as usize] = self.pixels[(sy * w + sx) as usize];
                }
            }
        }
        Self::from_parts(self.width, self.height, pixels)
    }

    /// 8-bit samples in the canonical 0/255 encoding.
    pub fn to_samples(&self) -> Vec<u8> {
        self.pixels.iter().map(|&p| if p { 255 } else { 0 }).collect()
    }
}

fn check_dimensions(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: "width and height must be at least 1",
        });
    }
    if width.checked_mul(height).is_none() {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: "pixel count overflows",
        });
    }
    Ok(())
}

pub(crate) fn ensure_same_shape(a: &BinaryMask, b: &BinaryMask) -> Result<()> {
    if a.dimensions() != b.dimensions() {
        return Err(Error::DimensionMismatch {
            left: a.dimensions(),
            right: b.dimensions(),
        });
    }
    Ok(())
}

/// Co-registered pre- and post-event masks of identical shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterPair {
    before: BinaryMask,
    after: BinaryMask,
}

impl RasterPair {
    pub fn before(&self) -> &BinaryMask {
        &self.before
    }

    pub fn after(&self) -> &BinaryMask {
        &self.after
    }

    pub fn dimensions(&self) -> (usize, usize) {
        self.before.dimensions()
    }

    pub fn into_parts(self) -> (BinaryMask, BinaryMask) {
        (self.before, self.after)
    }
}

pub fn make_pair(before: BinaryMask, after: BinaryMask) -> Result<RasterPair> {
    ensure_same_shape(&before, &after)?;
    Ok(RasterPair { before, after })
}

/// Reads a mask from a binary PGM or PNG file, detected by magic bytes.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"P5") {
        decode_pgm(&bytes).map_err(|reason| Error::CorruptHeader {
            path: path.to_path_buf(),
            reason,
        })
    } else if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(path, &bytes)
    } else {
        Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
        })
    }
}

/// Writes the mask as PNG when the extension is `.png`, otherwise as PGM.
pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let is_png = path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("png"));
    if is_png {
        let img = image::GrayImage::from_raw(mask.width as u32, mask.height as u32, mask.to_samples())
            .expect("sample buffer matches dimensions");
        img.save_with_format(path, image::ImageFormat::Png)
            .map_err(|source| Error::Image {
                path: path.to_path_buf(),
                source,
            })
    } else {
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&encode_pgm(mask)).map_err(|e| Error::io(path, e))
    }
}

pub fn encode_pgm(mask: &BinaryMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width, mask.height).into_bytes();
    out.extend(mask.to_samples());
    out
}

/// Decodes a binary PGM image; nonzero samples become feature pixels.
pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<BinaryMask, String> {
    let mut cursor = HeaderCursor { bytes, pos: 2 };
    let width = cursor.next_number("width")?;
    let height = cursor.next_number("height")?;
    let maxval = cursor.next_number("maxval")?;
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err("missing whitespace after maxval".into()),
    }
    if width == 0 || height == 0 {
        return Err(format!("zero dimension {width}x{height}"));
    }
    if !(1..=65535).contains(&maxval) {
        return Err(format!("maxval {maxval} outside 1..=65535"));
    }
    let sample_bytes = if maxval < 256 { 1 } else { 2 };
    let count = width
        .checked_mul(height)
        .ok_or_else(|| format!("dimensions {width}x{height} overflow"))?;
    let data = &bytes[cursor.pos..];
    if data.len() < count * sample_bytes {
        return Err(format!(
            "raster truncated: expected {} bytes, found {}",
            count * sample_bytes,
            data.len()
        ));
    }
    let pixels = data
        .chunks_exact(sample_bytes)
        .take(count)
        .map(|s| s.iter().any(|&b| b != 0))
        .collect();
    Ok(BinaryMask::from_parts(width, height, pixels))
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn next_number(&mut self, what: &str) -> std::result::Result<usize, String> {
        let start_len = self.pos;
        self.skip_whitespace_and_comments();
        if self.pos == start_len {
            return Err(format!("expected whitespace before {what}"));
        }
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(format!("missing {what}"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("{what} out of range"))
    }
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<BinaryMask> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let gray = img.to_luma8();
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::CorruptHeader {
            path: path.to_path_buf(),
            reason: format!("zero dimension {w}x{h}"),
        });
    }
    let pixels = gray.into_raw().into_iter().map(|s| s != 0).collect();
    Ok(BinaryMask::from_parts(w, h, pixels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pgm(header: &str, samples: &[u8]) -> Vec<u8> {
        let mut v = header.as_bytes().to_vec();
        v.extend_from_slice(samples);
        v
    }

    #[test]
    fn decodes_nonzero_as_feature() {
        let m = decode_pgm(&pgm("P5 2 2 255\n", &[0, 255, 0, 255])).unwrap();
        assert_eq!(m.pixels(), &[false, true, false, true]);
        // antialiased values still count
        let m = decode_pgm(&pgm("P5 3 1 255\n", &[0, 7, 0])).unwrap();
        assert_eq!(m.pixels(), &[false, true, false]);
    }

    #[test]
    fn decodes_all_zero() {
        let m = decode_pgm(&pgm("P5\n3 1\n255\n", &[0, 0, 0])).unwrap();
        assert_eq!(m.dimensions(), (3, 1));
        assert_eq!(m.count_ones(), 0);
    }

    #[test]
    fn header_comments_are_skipped() {
        let m = decode_pgm(&pgm("P5\n# made by hand\n2 1 # trailing\n255\n", &[1, 0])).unwrap();
        assert_eq!(m.pixels(), &[true, false]);
    }

    #[test]
    fn sixteen_bit_samples() {
        let m = decode_pgm(&pgm("P5 2 1 65535\n", &[0, 0, 0, 1])).unwrap();
        assert_eq!(m.pixels(), &[false, true]);
    }

    #[test]
    fn rejects_bad_headers() {
        assert!(decode_pgm(b"P5 2 2 255\n\x00").unwrap_err().contains("truncated"));
        assert!(decode_pgm(b"P5 0 2 255\n").unwrap_err().contains("zero dimension"));
        assert!(decode_pgm(b"P5 2 x 255\n").is_err());
        assert!(decode_pgm(b"P5 2 2 0\n\0\0\0\0").is_err());
        assert!(decode_pgm(b"P52 2 255\n\0\0\0\0").is_err());
    }

    #[test]
    fn encodes_canonical_samples() {
        let m = BinaryMask::filled(4, 4, false).unwrap();
        let bytes = encode_pgm(&m);
        assert_eq!(&bytes[..11], b"P5\n4 4\n255\n");
        assert_eq!(&bytes[11..], &[0u8; 16]);
        let m = BinaryMask::filled(2, 3, true).unwrap();
        assert_eq!(&encode_pgm(&m)[11..], &[255u8; 6]);
    }

    #[test]
    fn pair_requires_equal_shapes() {
        let a = BinaryMask::filled(4, 4, false).unwrap();
        assert!(make_pair(a.clone(), a.clone()).is_ok());
        let b = BinaryMask::filled(4, 5, false).unwrap();
        let err = make_pair(a, b).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { left: (4, 4), right: (4, 5) }));
        let big = BinaryMask::filled(256, 256, true).unwrap();
        assert!(make_pair(big.clone(), big).is_ok());
    }

    #[test]
    fn constructor_enforces_invariants() {
        assert!(BinaryMask::new(0, 3, vec![]).is_err());
        assert!(BinaryMask::new(2, 2, vec![true; 3]).is_err());
        assert!(BinaryMask::new(2, 2, vec![true; 4]).is_ok());
    }

    #[test]
    fn shift_fills_background() {
        let m = BinaryMask::new(3, 2, vec![true, false, true, false, true, false]).unwrap();
        let s = m.shifted(1, 0);
        assert_eq!(s.pixels(), &[false, true, false, false, false, true]);
        let s = m.shifted(0, -1);
        assert_eq!(s.pixels(), &[false, true, false, false, false, false]);
    }

    #[test]
    fn load_reports_path_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nope.pgm");
        let err = load_mask(&p).unwrap_err();
        assert!(err.to_string().contains("nope.pgm"));

        let p = dir.path().join("text.pgm");
        fs::write(&p, b"hello").unwrap();
        assert!(matches!(load_mask(&p).unwrap_err(), Error::UnsupportedFormat { .. }));

        let p = dir.path().join("bad.pgm");
        fs::write(&p, b"P5 4 4 255\n\0").unwrap();
        let err = load_mask(&p).unwrap_err();
        assert!(matches!(err, Error::CorruptHeader { .. }));
        assert!(err.to_string().contains("bad.pgm"));
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.png");
        let m = BinaryMask::from_fn(5, 3, |x, y| (x + y) % 2 == 0).unwrap();
        save_mask(&m, &p).unwrap();
        assert_eq!(load_mask(&p).unwrap(), m);
    }
}
