//! Smoothing kernels, replicate-padded convolution, the regularised
//! Heaviside/delta pair and the edge-stopping field `g`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{grad_forward, ScalarField};

/// A square `(2r+1) x (2r+1)` kernel normalised to unit mass.
///
/// Every kernel built here is separable; `factor` holds the normalised 1-D
/// profile and `weights` its outer product, so both convolution paths see the
/// same taps.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    radius: usize,
    weights: Vec<f64>,
    factor: Vec<f64>,
}

impl Kernel2D {
    fn from_profile(profile: Vec<f64>) -> Kernel2D {
        let total: f64 = profile.iter().sum();
        let factor: Vec<f64> = profile.iter().map(|p| p / total).collect();
        let n = factor.len();
        let mut weights = Vec::with_capacity(n * n);
        for a in &factor {
            for b in &factor {
                weights.push(a * b);
            }
        }
        Kernel2D {
            radius: n / 2,
            weights,
            factor,
        }
    }

    /// The single-tap kernel; convolution with it is the identity.
    pub fn identity() -> Kernel2D {
        Kernel2D::from_profile(vec![1.0])
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.radius
    }

    #[inline]
    pub fn size(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Normalised 1-D factor of the separable kernel.
    pub fn factor(&self) -> &[f64] {
        &self.factor
    }

    /// Tap at offset `(di, dj)`, each in `-r..=r`.
    pub fn weight(&self, di: isize, dj: isize) -> f64 {
        let r = self.radius as isize;
        let n = self.size();
        self.weights[((di + r) as usize) * n + (dj + r) as usize]
    }
}

/// Default truncation radius for a Gaussian of standard deviation `sigma`.
pub fn default_gaussian_radius(sigma: f64) -> usize {
    ((1.5 * sigma).ceil() as usize).max(1)
}

pub fn gaussian_kernel(sigma: f64, radius: usize) -> Result<Kernel2D> {
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(Error::param(format!("gaussian sigma must be positive, got {sigma}")));
    }
    if radius < 1 {
        return Err(Error::param("gaussian radius must be at least 1"));
    }
    let r = radius as isize;
    let profile = (-r..=r)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    Ok(Kernel2D::from_profile(profile))
}

/// Unnormalised 1-D ISEF profile `exp(-|x|/sigma) / (2 sigma)` over `size` taps.
pub fn isef_profile(sigma: f64, size: usize) -> Vec<f64> {
    let r = (size / 2) as isize;
    (-r..=r)
        .map(|d| (-(d.abs() as f64) / sigma).exp() / (2.0 * sigma))
        .collect()
}

/// Separable infinite symmetric exponential filter of odd `size`.
pub fn isef_kernel(sigma: f64, size: usize) -> Result<Kernel2D> {
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(Error::param(format!("ISEF scale must be positive, got {sigma}")));
    }
    if size.is_multiple_of(2) {
        return Err(Error::param(format!("ISEF size must be odd, got {size}")));
    }
    Ok(Kernel2D::from_profile(isef_profile(sigma, size)))
}

fn clamped_offsets(len: usize, radius: usize) -> Vec<usize> {
    // index table for positions -r .. len+r, clamped into 0..len
    let r = radius as isize;
    (-r..len as isize + r)
        .map(|p| p.clamp(0, len as isize - 1) as usize)
        .collect()
}

/// Replicate-padded convolution, evaluated separably (rows, then columns).
pub fn convolve(f: &ScalarField, k: &Kernel2D) -> ScalarField {
    if k.radius == 0 {
        return f.scale(k.factor[0] * k.factor[0]);
    }
    let (w, h) = (f.width(), f.height());
    let taps = &k.factor;
    let n = taps.len();
    let cols = clamped_offsets(w, k.radius);
    let rows = clamped_offsets(h, k.radius);

    let src = f.values();
    let mut tmp = vec![0.0; w * h];
    for i in 0..h {
        let row = &src[i * w..(i + 1) * w];
        let out = &mut tmp[i * w..(i + 1) * w];
        for (j, o) in out.iter_mut().enumerate() {
            let idx = &cols[j..j + n];
            let mut acc = 0.0;
            for (t, &c) in taps.iter().zip(idx) {
                acc += t * row[c];
            }
            *o = acc;
        }
    }

    let mut out = f.zeros_like();
    let dst = out.values_mut();
    let mut acc = vec![0.0; w];
    for i in 0..h {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for (t, &r) in taps.iter().zip(&rows[i..i + n]) {
            let line = &tmp[r * w..(r + 1) * w];
            for (a, v) in acc.iter_mut().zip(line) {
                *a += t * v;
            }
        }
        dst[i * w..(i + 1) * w].copy_from_slice(&acc);
    }
    out
}

/// Direct 2-D summation over every tap; the reference for [`convolve`].
pub fn convolve_direct(f: &ScalarField, k: &Kernel2D) -> ScalarField {
    let r = k.radius as isize;
    ScalarField::from_fn(f.width(), f.height(), |i, j| {
        let mut acc = 0.0;
        for di in -r..=r {
            for dj in -r..=r {
                acc += k.weight(di, dj) * f.get_clamped(i as isize + di, j as isize + dj);
            }
        }
        acc
    })
    .expect("shape copied from a valid field")
}

/// `H_eps(phi) = (1 + (2/pi) atan(phi/eps)) / 2`.
#[inline]
pub fn heaviside_eps(phi: f64, eps: f64) -> f64 {
    0.5 * (1.0 + (2.0 / PI) * (phi / eps).atan())
}

/// `delta_eps(phi) = eps / (pi (eps^2 + phi^2))`, the derivative of [`heaviside_eps`].
#[inline]
pub fn delta_eps(phi: f64, eps: f64) -> f64 {
    eps / (PI * (eps * eps + phi * phi))
}

/// `g = 1 / (1 + beta |grad (isef * f)|^2)`.
pub fn edge_detector(f: &ScalarField, beta: f64, isef: &Kernel2D) -> ScalarField {
    let smooth = convolve(f, isef);
    let grad = grad_forward(&smooth);
    grad.gx
        .zip_map(&grad.gy, |gx, gy| 1.0 / (1.0 + beta * (gx * gx + gy * gy)))
}
