//! Segmentation quality scores: Dice overlap against a reference mask and a
//! region-uniformity score that needs no reference.

use crate::error::{Error, Result};
use crate::grid::ScalarField;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::ValueCount {
                width,
                height,
                expected: width * height,
                actual: bits.len(),
            });
        }
        Ok(BinaryMask {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for i in 0..height {
            for j in 0..width {
                bits.push(f(i, j));
            }
        }
        BinaryMask {
            width,
            height,
            bits,
        }
    }

    /// `{p : field[p] > level}`.
    pub fn threshold(field: &ScalarField, level: f64) -> Self {
        BinaryMask {
            width: field.width(),
            height: field.height(),
            bits: field.values().iter().map(|&v| v > level).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.width + j]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn invert(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// Number of 4-connected inside/outside pixel pairs; a discrete perimeter.
    pub fn perimeter(&self) -> usize {
        let mut n = 0;
        for i in 0..self.height {
            for j in 0..self.width {
                let here = self.get(i, j);
                if j + 1 < self.width && here != self.get(i, j + 1) {
                    n += 1;
                }
                if i + 1 < self.height && here != self.get(i + 1, j) {
                    n += 1;
                }
            }
        }
        n
    }

    pub fn to_field(&self) -> ScalarField {
        ScalarField::new(
            self.width,
            self.height,
            self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        )
        .expect("mask shape is at least 2x2 when converted")
    }

    fn check_shape(&self, w: usize, h: usize) -> Result<()> {
        if self.width == w && self.height == h {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(self.width, self.height, w, h))
        }
    }
}

/// Dice similarity `2 |A ∩ B| / (|A| + |B|)`.
pub fn dsc(cs: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    cs.check_shape(gt.width, gt.height)?;
    let both = cs.bits.iter().zip(&gt.bits).filter(|(a, b)| **a && **b).count();
    let total = cs.count() + gt.count();
    if total == 0 {
        return Err(Error::EmptyRegion("Dice is undefined for two empty masks"));
    }
    Ok(2.0 * both as f64 / total as f64)
}

/// Normalisation of the within-region sum of squares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PpNormalization {
    /// Divide by the total sum of squared deviations from the global mean.
    #[default]
    TotalVariance,
    /// No normalisation (`C = 1`).
    Unit,
}

/// Region uniformity `1 - (1/C) Σ_regions Σ_x (f(x) - mean_region)^2` for the
/// two-region partition given by `mask`.
pub fn pp_uniformity(f: &ScalarField, mask: &BinaryMask, norm: PpNormalization) -> Result<f64> {
    mask.check_shape(f.width(), f.height())?;
    let mut sums = [0.0f64; 2];
    let mut counts = [0usize; 2];
    for (&v, &m) in f.values().iter().zip(&mask.bits) {
        let r = m as usize;
        sums[r] += v;
        counts[r] += 1;
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::EmptyRegion("uniformity needs two non-empty regions"));
    }
    let means = [sums[0] / counts[0] as f64, sums[1] / counts[1] as f64];
    let global = f.mean();
    let mut within = 0.0;
    let mut total = 0.0;
    for (&v, &m) in f.values().iter().zip(&mask.bits) {
        let d = v - means[m as usize];
        within += d * d;
        total += (v - global) * (v - global);
    }
    let c = match norm {
        PpNormalization::TotalVariance => total,
        PpNormalization::Unit => 1.0,
    };
    if c == 0.0 {
        // constant image: every partition is perfectly uniform
        return Ok(1.0);
    }
    Ok(1.0 - within / c)
}
