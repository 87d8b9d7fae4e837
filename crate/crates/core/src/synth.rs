//! Synthetic speckled test scenes.
//!
//! A phantom is a two-level piecewise-constant image, multiplied by a smooth
//! shading field and then by unit-mean Gamma speckle with `L` looks.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::metrics::BinaryMask;

/// Looks value treated as "no speckle" by [`make_phantom`].
pub const NOISE_FREE: u32 = 0;

/// i.i.d. `Gamma(shape = L, scale = 1/L)` samples: mean 1, variance `1/L`.
pub fn gamma_speckle(width: usize, height: usize, looks: u32, seed: u64) -> Result<ScalarField> {
    if looks < 1 {
        return Err(Error::param("looks must be at least 1"));
    }
    let l = looks as f64;
    let dist = Gamma::new(l, 1.0 / l).map_err(|e| Error::param(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..width * height).map(|_| dist.sample(&mut rng)).collect();
    ScalarField::new(width, height, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Disk,
    Ring,
    TwoBlob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShadingProfile {
    Flat,
    /// Linear left-to-right ramp from `1 - a` to `1 + a`.
    Ramp,
    /// Centred bump from `1 + a` at the centre to `1 - a` at the corners.
    Radial,
}

macro_rules! named_enum {
    ($ty:ident { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn name(self) -> &'static str {
                match self { $($ty::$variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($name => Ok($ty::$variant),)+
                    other => Err(Error::param(format!(
                        concat!("unknown ", stringify!($ty), " `{}`"), other
                    ))),
                }
            }
        }
    };
}

named_enum!(Layout { Disk => "disk", Ring => "ring", TwoBlob => "two-blob" });
named_enum!(ShadingProfile { Flat => "flat", Ramp => "ramp", Radial => "radial" });

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub width: usize,
    pub height: usize,
    pub layout: Layout,
    /// Grey level of the object.
    pub foreground: f64,
    /// Grey level of the background.
    pub background: f64,
    pub shading: ShadingProfile,
    /// Shading half-range `a` in `[0, 1)`.
    pub amplitude: f64,
    /// Number of looks; [`NOISE_FREE`] disables speckle.
    pub looks: u32,
    pub seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec {
            width: 125,
            height: 125,
            layout: Layout::Disk,
            foreground: 160.0,
            background: 60.0,
            shading: ShadingProfile::Radial,
            amplitude: 0.5,
            looks: 8,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Phantom {
    pub clean: ScalarField,
    pub shading: ScalarField,
    pub observed: ScalarField,
    pub truth_mask: BinaryMask,
    pub looks: u32,
    pub seed: u64,
}

fn centre(n: usize) -> f64 {
    (n as f64 - 1.0) / 2.0
}

/// Object membership for each layout, in pixel coordinates.
pub fn layout_mask(layout: Layout, width: usize, height: usize) -> BinaryMask {
    let (ci, cj) = (centre(height), centre(width));
    let m = width.min(height) as f64;
    let dist2 = |i: usize, j: usize, ai: f64, aj: f64| (i as f64 - ai).powi(2) + (j as f64 - aj).powi(2);
    match layout {
        Layout::Disk => {
            let r = disk_radius(width, height);
            BinaryMask::from_fn(width, height, |i, j| dist2(i, j, ci, cj) <= r * r)
        }
        Layout::Ring => {
            let (r_in, r_out) = (0.16 * m, 0.36 * m);
            BinaryMask::from_fn(width, height, |i, j| {
                let d = dist2(i, j, ci, cj);
                d >= r_in * r_in && d <= r_out * r_out
            })
        }
        Layout::TwoBlob => {
            let r = 0.2 * m;
            let off = 0.24 * m;
            BinaryMask::from_fn(width, height, |i, j| {
                dist2(i, j, ci - off, cj - off) <= r * r || dist2(i, j, ci + off, cj + off) <= r * r
            })
        }
    }
}

pub fn disk_radius(width: usize, height: usize) -> f64 {
    0.3 * width.min(height) as f64
}

pub fn shading_field(profile: ShadingProfile, amplitude: f64, width: usize, height: usize) -> Result<ScalarField> {
    let a = amplitude;
    match profile {
        ShadingProfile::Flat => ScalarField::filled(width, height, 1.0),
        ShadingProfile::Ramp => {
            ScalarField::from_fn(width, height, |_, j| 1.0 - a + 2.0 * a * j as f64 / (width - 1) as f64)
        }
        ShadingProfile::Radial => {
            let (ci, cj) = (centre(height), centre(width));
            let rmax = (ci * ci + cj * cj).sqrt();
            ScalarField::from_fn(width, height, |i, j| {
                let rho = ((i as f64 - ci).powi(2) + (j as f64 - cj).powi(2)).sqrt() / rmax;
                // raised cosine from 1+a at the centre to 1-a at the corners
                1.0 - a + a * (1.0 + (PI * rho).cos())
            })
        }
    }
}

pub fn make_phantom(spec: &PhantomSpec) -> Result<Phantom> {
    if !(spec.foreground > 0.0 && spec.background > 0.0) {
        return Err(Error::param("grey levels must be positive"));
    }
    if spec.foreground > 255.0 || spec.background > 255.0 {
        return Err(Error::param("grey levels must not exceed 255"));
    }
    if !(0.0..1.0).contains(&spec.amplitude) {
        return Err(Error::param("shading amplitude must lie in [0, 1)"));
    }
    let (w, h) = (spec.width, spec.height);
    let truth_mask = layout_mask(spec.layout, w, h);
    let clean = ScalarField::from_fn(w, h, |i, j| {
        if truth_mask.get(i, j) {
            spec.foreground
        } else {
            spec.background
        }
    })?;
    let shading = shading_field(spec.shading, spec.amplitude, w, h)?;
    let shaded = clean.zip_map(&shading, |c, s| c * s);
    let observed = if spec.looks == NOISE_FREE {
        shaded
    } else {
        shaded.zip_map(&gamma_speckle(w, h, spec.looks, spec.seed)?, |v, n| v * n)
    };
    Ok(Phantom {
        clean,
        shading,
        observed,
        truth_mask,
        looks: spec.looks,
        seed: spec.seed,
    })
}
