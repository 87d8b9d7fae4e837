//! 8-bit image files: binary PGM (P5) and PPM (P6), optional PNG input, and
//! plain-text matrix dumps.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::metrics::BinaryMask;

/// Row-major 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::Format(format!(
                "{width}x{height} image needs {} bytes, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    /// Rounds and clamps each value to `0..=255`.
    pub fn from_field(field: &ScalarField) -> GrayImage {
        GrayImage {
            width: field.width(),
            height: field.height(),
            pixels: field.values().iter().map(|&v| quantize(v)).collect(),
        }
    }

    /// Min-max stretch onto `0..=255`; a constant field maps to 0.
    pub fn stretched(field: &ScalarField) -> GrayImage {
        let (lo, hi) = (field.min(), field.max());
        let span = hi - lo;
        let scaled = field.map(|v| if span > 0.0 { 255.0 * (v - lo) / span } else { 0.0 });
        GrayImage::from_field(&scaled)
    }

    pub fn from_mask(mask: &BinaryMask) -> GrayImage {
        GrayImage {
            width: mask.width(),
            height: mask.height(),
            pixels: mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect(),
        }
    }

    /// Raw byte values as a field.
    pub fn to_field(&self) -> Result<ScalarField> {
        ScalarField::new(
            self.width,
            self.height,
            self.pixels.iter().map(|&p| p as f64).collect(),
        )
    }

    /// Segmentation input: values in `1..=255`, zeros floored to 1.
    pub fn to_positive_field(&self) -> Result<ScalarField> {
        ScalarField::new(
            self.width,
            self.height,
            self.pixels.iter().map(|&p| p.max(1) as f64).collect(),
        )
    }

    /// Pixels above mid-grey.
    pub fn to_mask(&self) -> BinaryMask {
        BinaryMask::from_fn(self.width, self.height, |i, j| self.pixels[i * self.width + j] >= 128)
    }
}

pub fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Byte cursor over a netpbm header.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format("bad netpbm header".into()))
    }
}

/// Parses a binary netpbm buffer with the given magic and channel count.
fn decode_pnm(bytes: &[u8], magic: &[u8; 2], channels: usize) -> Result<(usize, usize, Vec<u8>)> {
    if bytes.len() < 2 || &bytes[..2] != magic {
        return Err(Error::Format(format!(
            "expected {} magic",
            String::from_utf8_lossy(magic)
        )));
    }
    let mut h = Header { bytes, pos: 2 };
    let width = h.number()?;
    let height = h.number()?;
    let maxval = h.number()?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!("unsupported maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(h.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Format("missing raster separator".into()));
    }
    let data = &bytes[h.pos + 1..];
    let need = width * height * channels;
    if data.len() < need {
        return Err(Error::Format(format!(
            "raster truncated: need {need} bytes, got {}",
            data.len()
        )));
    }
    let mut px = data[..need].to_vec();
    if maxval != 255 {
        for p in &mut px {
            *p = ((*p as usize * 255 + maxval / 2) / maxval).min(255) as u8;
        }
    }
    Ok((width, height, px))
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let (w, h, px) = decode_pnm(bytes, b"P5", 1)?;
    GrayImage::new(w, h, px)
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

/// Interleaved RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u8; 3]>,
}

pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    for p in &img.pixels {
        out.extend_from_slice(p);
    }
    out
}

pub fn decode_ppm(bytes: &[u8]) -> Result<RgbImage> {
    let (width, height, px) = decode_pnm(bytes, b"P6", 3)?;
    Ok(RgbImage {
        width,
        height,
        pixels: px.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
    })
}

/// Grey copy of `base` with the mask's inner boundary painted red.
pub fn overlay(base: &GrayImage, mask: &BinaryMask) -> RgbImage {
    let (w, h) = (base.width, base.height);
    let inside = |i: isize, j: isize| {
        i >= 0 && j >= 0 && (i as usize) < h && (j as usize) < w && mask.get(i as usize, j as usize)
    };
    let mut pixels = Vec::with_capacity(w * h);
    for i in 0..h {
        for j in 0..w {
            let (ii, jj) = (i as isize, j as isize);
            let edge = mask.get(i, j)
                && [(ii - 1, jj), (ii + 1, jj), (ii, jj - 1), (ii, jj + 1)]
                    .iter()
                    .any(|&(a, b)| !inside(a, b));
            let g = base.pixels[i * w + j];
            pixels.push(if edge { [255, 0, 0] } else { [g, g, g] });
        }
    }
    RgbImage {
        width: w,
        height: h,
        pixels,
    }
}

pub fn read_gray(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    if bytes.starts_with(b"P5") {
        return decode_pgm(&bytes);
    }
    decode_other(&bytes)
}

#[cfg(feature = "png")]
fn decode_other(bytes: &[u8]) -> Result<GrayImage> {
    let img = image::load_from_memory(bytes).map_err(|e| Error::Format(e.to_string()))?;
    let gray = img.to_luma8();
    let (w, h) = gray.dimensions();
    GrayImage::new(w as usize, h as usize, gray.into_raw())
}

#[cfg(not(feature = "png"))]
fn decode_other(_: &[u8]) -> Result<GrayImage> {
    Err(Error::Format("only binary PGM (P5) input is supported".into()))
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    Ok(fs::write(path, encode_pgm(img))?)
}

pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<()> {
    Ok(fs::write(path, encode_ppm(img))?)
}

/// One row per line, space separated, shortest round-trip decimal form.
pub fn encode_matrix(field: &ScalarField) -> String {
    let mut out = String::new();
    for row in field.values().chunks(field.width()) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn decode_matrix(text: &str) -> Result<ScalarField> {
    let mut values = Vec::new();
    let mut width = None;
    let mut height = 0;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Format(format!("bad number `{t}`"))))
            .collect::<Result<_>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => return Err(Error::Format("ragged matrix rows".into())),
            _ => {}
        }
        values.extend(row);
        height += 1;
    }
    ScalarField::new(width.unwrap_or(0), height, values)
}

pub fn write_matrix(path: &Path, field: &ScalarField) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(encode_matrix(field).as_bytes())?;
    Ok(())
}
