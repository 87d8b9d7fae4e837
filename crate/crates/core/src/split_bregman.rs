//! Split Bregman solver for the convex relaxation
//!
//! ```text
//! min_{0 <= phi <= 1}  |∇x phi|_g + |∇y phi|_g + mu <phi, eta>
//! ```
//!
//! The gradients are split off into `d = (dx, dy)` with Bregman variables
//! `b`. Each outer pass performs one projected Gauss-Seidel sweep for `phi`,
//! a weighted soft-threshold for `d`, the Bregman update for `b`, and then
//! refreshes the local region means from the new `phi`.

use crate::config::{Solver, SolverConfig};
use crate::error::Result;
use crate::grid::{div_adjoint, grad_forward, laplacian_neighbors, GradPair, ScalarField};
use crate::localstats::{eta_field, update_region_means, RegionStats};
use crate::metrics::BinaryMask;
use crate::solver::{iterate, Prepared, SegmentationResult};

/// Soft threshold `sgn(x) max(|x| - threshold, 0)`.
#[inline]
pub fn shrink(x: f64, threshold: f64) -> f64 {
    if x > threshold {
        x - threshold
    } else if x < -threshold {
        x + threshold
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct SbState {
    pub phi: ScalarField,
    pub d: GradPair,
    pub b: GradPair,
    pub stats: RegionStats,
    pub iter: usize,
}

/// One in-place, row-major projected Gauss-Seidel sweep of the `phi`
/// subproblem with `d` and `b` held fixed.
pub fn sb_phi_update(
    phi: &ScalarField,
    d: &GradPair,
    b: &GradPair,
    eta: &ScalarField,
    mu: f64,
    lambda: f64,
) -> ScalarField {
    let source = div_adjoint(&d.zip_map(b, |dv, bv| dv - bv));
    let mut out = phi.clone();
    for i in 0..phi.height() {
        for j in 0..phi.width() {
            let beta = 0.25
                * (laplacian_neighbors(&out, i, j) - mu * eta.get(i, j) / lambda + source.get(i, j));
            out.set(i, j, beta.clamp(0.0, 1.0));
        }
    }
    out
}

/// `d = shrink(∇phi + b, g / lambda)` with a per-pixel threshold.
pub fn sb_d_update(phi: &ScalarField, b: &GradPair, g: &ScalarField, lambda: f64) -> GradPair {
    let grad = grad_forward(phi);
    let axis = |gr: &ScalarField, bv: &ScalarField| {
        let shifted = gr.zip_map(bv, |a, c| a + c);
        shifted.zip_map(g, |x, w| shrink(x, w / lambda))
    };
    GradPair {
        gx: axis(&grad.gx, &b.gx),
        gy: axis(&grad.gy, &b.gy),
    }
}

/// `b + ∇phi - d`.
pub fn sb_bregman_update(b: &GradPair, phi: &ScalarField, d: &GradPair) -> GradPair {
    let grad = grad_forward(phi);
    let sum = b.zip_map(&grad, |bv, gv| bv + gv);
    sum.zip_map(d, |s, dv| s - dv)
}

impl SbState {
    pub fn init(prep: &Prepared) -> SbState {
        let phi = prep.image.clone();
        let stats = update_region_means(&prep.image, &phi, &prep.kernel);
        SbState {
            d: GradPair::zeros_like(&phi),
            b: GradPair::zeros_like(&phi),
            phi,
            stats,
            iter: 0,
        }
    }

    /// One outer pass; returns the `eta` used for it.
    pub fn step(&mut self, prep: &Prepared, cfg: &SolverConfig) -> ScalarField {
        let eta = eta_field(&prep.image, &self.stats, &prep.kernel, cfg.eta_mode);
        self.phi = sb_phi_update(&self.phi, &self.d, &self.b, &eta, cfg.mu, cfg.lambda);
        let d = sb_d_update(&self.phi, &self.b, &prep.edge, cfg.lambda);
        self.b = sb_bregman_update(&self.b, &self.phi, &d);
        self.d = d;
        self.stats = update_region_means(&prep.image, &self.phi, &prep.kernel);
        self.iter += 1;
        eta
    }
}

pub fn run_sb_lacm(f: &ScalarField, cfg: &SolverConfig) -> Result<SegmentationResult> {
    let prep = Prepared::new(f, cfg)?;
    let mut state = SbState::init(&prep);
    let (iterations, residuals) = iterate(
        &mut state,
        cfg,
        |s| &s.phi,
        |s| {
            s.step(&prep, cfg);
        },
    );
    Ok(SegmentationResult {
        solver: Solver::SplitBregman,
        mask: BinaryMask::threshold(&state.phi, cfg.gamma),
        phi: state.phi,
        iterations,
        elapsed: Default::default(),
        residuals,
    })
}
