//! Grayscale image ingestion, emission and gray-level quantization.
//!
//! Images are 8-bit grayscale, stored row-major with 0-based pixel values.
//! The canonical on-disk format is binary PGM ("P5") with maxval 255.

use crate::error::{Error, Result};

/// An 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    /// Builds an image from row-major pixel data.
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Pixel at column `x`, row `y` (both 0-based).
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }
}

/// A raster quantized to gray levels `1..=levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedImage {
    width: usize,
    height: usize,
    levels: u16,
    pixels: Vec<u16>,
}

impl QuantizedImage {
    /// Builds a quantized image, checking every pixel lies in `[1, levels]`.
    pub fn new(width: usize, height: usize, levels: u16, pixels: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if levels < 2 {
            return Err(Error::InvalidArgument(format!(
                "levels must be at least 2, got {levels}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        if let Some(bad) = pixels.iter().find(|&&v| v < 1 || v > levels) {
            return Err(Error::InvalidArgument(format!(
                "quantized pixel {bad} outside [1, {levels}]"
            )));
        }
        Ok(Self {
            width,
            height,
            levels,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of gray levels; pixel values lie in `1..=levels()`.
    pub fn levels(&self) -> u16 {
        self.levels
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    /// Gray level at column `x`, row `y` (both 0-based).
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.pixels[y * self.width + x]
    }
}

/// Quantizes an 8-bit image onto gray levels `1..=levels`.
///
/// The map is `q(v) = floor(v * levels / 256) + 1`: monotone, endpoint-exact
/// (0 maps to 1, 255 maps to `levels`) and onto `[1, levels]` for full-range
/// input.
pub fn quantize(image: &GrayImage, levels: u16) -> Result<QuantizedImage> {
    if !(2..=256).contains(&levels) {
        return Err(Error::InvalidArgument(format!(
            "levels must lie in [2, 256], got {levels}"
        )));
    }
    let pixels = image
        .pixels()
        .iter()
        .map(|&v| (v as u32 * levels as u32 / 256) as u16 + 1)
        .collect();
    QuantizedImage::new(image.width(), image.height(), levels, pixels)
}

/// Decodes a binary PGM ("P5") stream with maxval at most 255.
///
/// Header comments (`#` to end of line) are accepted; errors report the byte
/// offset where decoding stopped.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take_token()?;
    if magic != b"P5" {
        return Err(Error::Decode {
            offset: 0,
            reason: format!(
                "unsupported magic {:?}, expected \"P5\"",
                String::from_utf8_lossy(&magic)
            ),
        });
    }
    let width = cur.take_number("width")?;
    let height = cur.take_number("height")?;
    if width == 0 || height == 0 {
        return Err(Error::Decode {
            offset: cur.pos,
            reason: format!("dimensions must be positive, got {width}x{height}"),
        });
    }
    let maxval_at = cur.pos;
    let maxval = cur.take_number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Decode {
            offset: maxval_at,
            reason: format!("maxval {maxval} outside [1, 255]"),
        });
    }
    // Exactly one whitespace byte separates the header from the payload.
    match cur.bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => {
            return Err(Error::Decode {
                offset: cur.pos,
                reason: "expected single whitespace byte before pixel payload".into(),
            })
        }
    }
    let need = width * height;
    let have = cur.bytes.len() - cur.pos;
    if have < need {
        return Err(Error::Decode {
            offset: cur.bytes.len(),
            reason: format!("truncated payload: expected {need} pixel bytes, found {have}"),
        });
    }
    let pixels = cur.bytes[cur.pos..cur.pos + need].to_vec();
    GrayImage::new(width, height, pixels)
}

/// Encodes an image as a canonical binary PGM stream:
/// `"P5\n{width} {height}\n255\n"` followed by the raw pixel payload.
pub fn write_pgm(image: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", image.width(), image.height());
    let mut out = Vec::with_capacity(header.len() + image.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(image.pixels());
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_separators(&mut self) {
        loop {
            match self.bytes.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'#') => {
                    while let Some(&b) = self.bytes.get(self.pos) {
                        self.pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                _ => return,
            }
        }
    }

    fn take_token(&mut self) -> Result<Vec<u8>> {
        self.skip_separators();
        let start = self.pos;
        while let Some(b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || *b == b'#' {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::Decode {
                offset: start,
                reason: "unexpected end of header".into(),
            });
        }
        Ok(self.bytes[start..self.pos].to_vec())
    }

    fn take_number(&mut self, what: &str) -> Result<usize> {
        self.skip_separators();
        let start = self.pos;
        let token = self.take_token()?;
        std::str::from_utf8(&token)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Decode {
                offset: start,
                reason: format!("invalid {what} field {:?}", String::from_utf8_lossy(&token)),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_minimal_p5() {
        let mut bytes = b"P5 2 2 255\n".to_vec();
        bytes.extend_from_slice(&[0, 128, 255, 7]);
        let img = read_pgm(&bytes).unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[0, 128, 255, 7]);
    }

    #[test]
    fn writes_canonical_header() {
        let img = GrayImage::new(1, 1, vec![0]).unwrap();
        assert_eq!(write_pgm(&img), b"P5\n1 1\n255\n\x00");
    }

    #[test]
    fn payload_size_matches_dimensions() {
        let img = GrayImage::new(2, 3, vec![9; 6]).unwrap();
        let bytes = write_pgm(&img);
        let header_len = b"P5\n2 3\n255\n".len();
        assert_eq!(bytes.len() - header_len, 6);
    }

    #[test]
    fn rejects_other_magics() {
        let err = read_pgm(b"P6\n1 1\n255\nxyz").unwrap_err();
        assert!(err.to_string().contains("unsupported magic"), "{err}");
    }

    #[test]
    fn rejects_wide_maxval() {
        let err = read_pgm(b"P5\n1 1\n65535\n\x00\x00").unwrap_err();
        assert!(err.to_string().contains("maxval"), "{err}");
    }

    #[test]
    fn rejects_truncated_payload() {
        let err = read_pgm(b"P5\n2 2\n255\n\x01\x02").unwrap_err();
        assert!(err.to_string().contains("truncated"), "{err}");
    }

    #[test]
    fn accepts_header_comments() {
        let mut bytes = b"P5\n# a comment\n2 1 255\n".to_vec();
        bytes.extend_from_slice(&[3, 4]);
        let img = read_pgm(&bytes).unwrap();
        assert_eq!(img.pixels(), &[3, 4]);
    }

    #[test]
    fn quantize_endpoints_and_midpoint() {
        let img = GrayImage::new(3, 1, vec![0, 127, 255]).unwrap();
        let q = quantize(&img, 51).unwrap();
        assert_eq!(q.pixels(), &[1, 26, 51]);
    }

    #[test]
    fn quantize_rejects_bad_levels() {
        let img = GrayImage::new(1, 1, vec![0]).unwrap();
        assert!(quantize(&img, 1).is_err());
        assert!(quantize(&img, 257).is_err());
    }

    #[test]
    fn quantize_is_onto_for_full_ramp() {
        let img = GrayImage::new(256, 1, (0..=255).collect()).unwrap();
        for levels in [2u16, 3, 51, 128, 256] {
            let q = quantize(&img, levels).unwrap();
            let seen: std::collections::BTreeSet<u16> = q.pixels().iter().copied().collect();
            assert_eq!(seen.len(), levels as usize, "levels={levels}");
            assert_eq!(*seen.iter().next().unwrap(), 1);
            assert_eq!(*seen.iter().last().unwrap(), levels);
        }
    }

    proptest! {
        #[test]
        fn quantize_is_monotone(v1 in 0u8..=255, v2 in 0u8..=255, levels in 2u16..=256) {
            let img = GrayImage::new(2, 1, vec![v1.min(v2), v1.max(v2)]).unwrap();
            let q = quantize(&img, levels).unwrap();
            prop_assert!(q.pixels()[0] <= q.pixels()[1]);
            prop_assert!(q.pixels().iter().all(|&p| (1..=levels).contains(&p)));
        }

        #[test]
        fn pgm_round_trip_is_bit_exact(
            w in 1usize..12,
            h in 1usize..12,
            seed in any::<u64>(),
        ) {
            use rand::Rng;
            let mut rng = crate::rng::seeded(seed);
            let pixels: Vec<u8> = (0..w * h).map(|_| rng.gen()).collect();
            let img = GrayImage::new(w, h, pixels).unwrap();
            let bytes = write_pgm(&img);
            let back = read_pgm(&bytes).unwrap();
            prop_assert_eq!(&back, &img);
            prop_assert_eq!(write_pgm(&back), bytes);
        }
    }
}
