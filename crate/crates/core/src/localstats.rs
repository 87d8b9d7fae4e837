//! Spatially varying region means and the local fitting field `eta`.
//!
//! For a soft membership `h` in `[0, 1]` the inside/outside means are
//! Gaussian-weighted local averages of the image, and `eta` is the pointwise
//! difference of the smoothed speckle log-likelihood terms
//! `log C + f / C` between the two regions. Negative `eta` favours the
//! inside region.

use crate::filters::{convolve, Kernel2D};
use crate::grid::ScalarField;

/// Lower bound applied to region-mean denominators and to the means themselves.
pub const POSITIVITY_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RegionStats {
    pub c1: ScalarField,
    pub c2: ScalarField,
}

impl RegionStats {
    pub fn swapped(&self) -> RegionStats {
        RegionStats {
            c1: self.c2.clone(),
            c2: self.c1.clone(),
        }
    }
}

/// How the outside-region term of `eta` divides the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EtaMode {
    /// `f / C2` in the outside term, mirroring the inside term.
    #[default]
    Mirrored,
    /// `f / C1` in both terms, as the formula is sometimes printed.
    Literal,
}

pub fn update_region_means(f: &ScalarField, h: &ScalarField, k: &Kernel2D) -> RegionStats {
    let hf = h.zip_map(f, |m, v| m * v);
    let outside = h.map(|m| 1.0 - m);
    let of = outside.zip_map(f, |m, v| m * v);
    let ratio = |num: &ScalarField, den: &ScalarField| {
        num.zip_map(den, |n, d| (n / d.max(POSITIVITY_FLOOR)).max(POSITIVITY_FLOOR))
    };
    let c1 = ratio(&convolve(&hf, k), &convolve(h, k));
    let c2 = ratio(&convolve(&of, k), &convolve(&outside, k));
    RegionStats { c1, c2 }
}

pub fn eta_field(f: &ScalarField, stats: &RegionStats, k: &Kernel2D, mode: EtaMode) -> ScalarField {
    let log1 = convolve(&stats.c1.map(f64::ln), k);
    let inv1 = convolve(&stats.c1.map(f64::recip), k);
    let log2 = convolve(&stats.c2.map(f64::ln), k);
    let inv2 = match mode {
        EtaMode::Mirrored => convolve(&stats.c2.map(f64::recip), k),
        EtaMode::Literal => inv1.clone(),
    };
    let vals: Vec<f64> = (0..f.len())
        .map(|p| {
            let x = f.values()[p];
            log1.values()[p] + x * inv1.values()[p] - log2.values()[p] - x * inv2.values()[p]
        })
        .collect();
    ScalarField::new(f.width(), f.height(), vals).expect("shape copied from a valid field")
}
