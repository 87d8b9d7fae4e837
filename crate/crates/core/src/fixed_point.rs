//! Proximal fixed-point solvers for the convex relaxation.
//!
//! Adding a proximity term `(alpha/2) |phi - phi_k|^2` turns each outer step
//! into a box-constrained, edge-weighted ROF problem
//!
//! ```text
//! min_{0 <= phi <= 1}  |∇x phi|_g + |∇y phi|_g + (alpha/2) |phi - z|^2,
//! z = phi_k - mu eta / alpha
//! ```
//!
//! which is handled by a relaxed fixed-point iteration on the per-axis dual
//! variables `b`: `b <- t b + (1-t) (I - shrink)(∇phi + b)` followed by
//! `phi <- clip(z - (lambda/alpha) ∇ᵀ b)`. The iteration is nonexpansive for
//! `lambda / alpha < 1/4`.
//!
//! `FP2` additionally splits the data term into its own variable with a
//! Bregman-style correction `c`.

use crate::config::{ShrinkWeighting, Solver, SolverConfig};
use crate::error::Result;
use crate::grid::{div_adjoint, grad_forward, GradPair, ScalarField};
use crate::localstats::{eta_field, update_region_means, RegionStats};
use crate::metrics::BinaryMask;
use crate::solver::{iterate, Prepared, SegmentationResult};

/// `(I - shrink_threshold)(x) = sgn(x) min(|x|, threshold)`.
#[inline]
pub fn shrink_complement(x: f64, threshold: f64) -> f64 {
    x.clamp(-threshold, threshold)
}

/// Relaxed dual update on both axes.
pub fn fp_b_update(
    phi: &ScalarField,
    b_prev: &GradPair,
    g: &ScalarField,
    t: f64,
    lambda: f64,
    weighting: ShrinkWeighting,
) -> GradPair {
    let grad = grad_forward(phi);
    let axis = |gr: &ScalarField, bp: &ScalarField| {
        let vals = (0..gr.len())
            .map(|p| {
                let thr = match weighting {
                    ShrinkWeighting::EdgeWeighted => g.values()[p] / lambda,
                    ShrinkWeighting::Uniform => 1.0 / lambda,
                };
                let prev = bp.values()[p];
                t * prev + (1.0 - t) * shrink_complement(gr.values()[p] + prev, thr)
            })
            .collect();
        ScalarField::new(gr.width(), gr.height(), vals).expect("shape copied from a valid field")
    };
    GradPair {
        gx: axis(&grad.gx, &b_prev.gx),
        gy: axis(&grad.gy, &b_prev.gy),
    }
}

/// `clip(center - (lambda/alpha) ∇ᵀ b)`, the primal half of the ROF iteration.
pub fn rof_primal(center: &ScalarField, b: &GradPair, alpha: f64, lambda: f64) -> ScalarField {
    let div = div_adjoint(b);
    let step = lambda / alpha;
    center.zip_map(&div, |z, d| (z - step * d).clamp(0.0, 1.0))
}

pub fn fp1_phi_update(
    phi: &ScalarField,
    eta: &ScalarField,
    b: &GradPair,
    mu: f64,
    alpha: f64,
    lambda: f64,
) -> ScalarField {
    let center = phi.zip_map(eta, |p, e| p - mu * e / alpha);
    rof_primal(&center, b, alpha, lambda)
}

/// Data-term split: returns `(varphi, c)` with
/// `varphi = clip(phi - c_prev - (mu/alpha) eta)` and `c = c_prev + varphi - phi`.
pub fn fp2_varphi_update(
    phi: &ScalarField,
    c_prev: &ScalarField,
    eta: &ScalarField,
    mu: f64,
    alpha: f64,
) -> (ScalarField, ScalarField) {
    let n = phi.len();
    let mut varphi = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    for p in 0..n {
        let (ph, cp) = (phi.values()[p], c_prev.values()[p]);
        let v = (ph - cp - mu * eta.values()[p] / alpha).clamp(0.0, 1.0);
        varphi.push(v);
        c.push(cp + v - ph);
    }
    let (w, h) = (phi.width(), phi.height());
    (
        ScalarField::new(w, h, varphi).expect("shape copied from a valid field"),
        ScalarField::new(w, h, c).expect("shape copied from a valid field"),
    )
}

/// `clip(phi + c - (lambda/alpha) ∇ᵀ b)`.
pub fn fp2_phi_update(
    phi: &ScalarField,
    c: &ScalarField,
    b: &GradPair,
    alpha: f64,
    lambda: f64,
) -> ScalarField {
    let center = phi.zip_map(c, |p, cv| p + cv);
    rof_primal(&center, b, alpha, lambda)
}

/// A single weighted ROF problem with a fixed prox centre, iterated in place.
#[derive(Debug, Clone)]
pub struct WrofProblem<'a> {
    pub center: ScalarField,
    pub g: &'a ScalarField,
    pub alpha: f64,
    pub lambda: f64,
    pub t: f64,
    pub weighting: ShrinkWeighting,
}

impl WrofProblem<'_> {
    pub fn step(&self, phi: &mut ScalarField, b: &mut GradPair) {
        *b = fp_b_update(phi, b, self.g, self.t, self.lambda, self.weighting);
        *phi = rof_primal(&self.center, b, self.alpha, self.lambda);
    }
}

#[derive(Debug, Clone)]
pub struct FpState {
    pub phi: ScalarField,
    pub b: GradPair,
    /// Splitting correction; stays zero for FP1.
    pub c: ScalarField,
    pub stats: RegionStats,
    pub iter: usize,
}

impl FpState {
    pub fn init(prep: &Prepared) -> FpState {
        let phi = prep.image.clone();
        FpState {
            b: GradPair::zeros_like(&phi),
            c: phi.zeros_like(),
            stats: update_region_means(&prep.image, &phi, &prep.kernel),
            phi,
            iter: 0,
        }
    }

    fn check_dual_bound(&self, cfg: &SolverConfig) {
        // g <= 1, so every shrink threshold is at most 1/lambda
        let bound = 1.0 / cfg.lambda;
        debug_assert!(
            self.b.max_abs() <= bound + 1.0,
            "dual variable escaped its box: {} > {}",
            self.b.max_abs(),
            bound + 1.0
        );
    }

    pub fn step_fp1(&mut self, prep: &Prepared, cfg: &SolverConfig) {
        let eta = eta_field(&prep.image, &self.stats, &prep.kernel, cfg.eta_mode);
        self.b = fp_b_update(
            &self.phi,
            &self.b,
            &prep.edge,
            cfg.relaxation,
            cfg.lambda,
            cfg.shrink_weighting,
        );
        self.phi = fp1_phi_update(&self.phi, &eta, &self.b, cfg.mu, cfg.alpha, cfg.lambda);
        self.finish(prep, cfg);
    }

    pub fn step_fp2(&mut self, prep: &Prepared, cfg: &SolverConfig) {
        let eta = eta_field(&prep.image, &self.stats, &prep.kernel, cfg.eta_mode);
        let (_varphi, c) = fp2_varphi_update(&self.phi, &self.c, &eta, cfg.mu, cfg.alpha);
        self.c = c;
        self.b = fp_b_update(
            &self.phi,
            &self.b,
            &prep.edge,
            cfg.relaxation,
            cfg.lambda,
            cfg.shrink_weighting,
        );
        self.phi = fp2_phi_update(&self.phi, &self.c, &self.b, cfg.alpha, cfg.lambda);
        self.finish(prep, cfg);
    }

    fn finish(&mut self, prep: &Prepared, cfg: &SolverConfig) {
        self.check_dual_bound(cfg);
        self.stats = update_region_means(&prep.image, &self.phi, &prep.kernel);
        self.iter += 1;
    }
}

fn run(f: &ScalarField, cfg: &SolverConfig, solver: Solver) -> Result<SegmentationResult> {
    let prep = Prepared::new(f, cfg)?;
    let mut state = FpState::init(&prep);
    let (iterations, residuals) = iterate(
        &mut state,
        cfg,
        |s| &s.phi,
        |s| match solver {
            Solver::Fp2 => s.step_fp2(&prep, cfg),
            _ => s.step_fp1(&prep, cfg),
        },
    );
    Ok(SegmentationResult {
        solver,
        mask: BinaryMask::threshold(&state.phi, cfg.gamma),
        phi: state.phi,
        iterations,
        elapsed: Default::default(),
        residuals,
    })
}

pub fn run_fp1(f: &ScalarField, cfg: &SolverConfig) -> Result<SegmentationResult> {
    run(f, cfg, Solver::Fp1)
}

pub fn run_fp2(f: &ScalarField, cfg: &SolverConfig) -> Result<SegmentationResult> {
    run(f, cfg, Solver::Fp2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::split_bregman::shrink;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut impl Rng, w: usize, h: usize, lo: f64, hi: f64) -> ScalarField {
        ScalarField::from_fn(w, h, |_, _| rng.random_range(lo..hi)).unwrap()
    }

    fn random_pair(rng: &mut impl Rng, w: usize, h: usize, lo: f64, hi: f64) -> GradPair {
        GradPair {
            gx: random(rng, w, h, lo, hi),
            gy: random(rng, w, h, lo, hi),
        }
    }

    #[test]
    fn complement_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // dyadic samples keep every sum and difference exactly representable
        let scale = (1u64 << 20) as f64;
        for _ in 0..10_000 {
            let x = rng.random_range(-(10 << 20)..(10 << 20)) as f64 / scale;
            let th = rng.random_range(0..(5 << 20)) as f64 / scale;
            assert_eq!(shrink(x, th) + shrink_complement(x, th), x);
        }
    }

    #[test]
    fn b_update_below_threshold_and_full_relaxation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let phi = random(&mut rng, 6, 5, 0.4, 0.45);
        let prev = random_pair(&mut rng, 6, 5, -0.01, 0.01);
        let g = phi.filled_like(1.0);
        let b = fp_b_update(&phi, &prev, &g, 0.0, 1.0, ShrinkWeighting::EdgeWeighted);
        let grad = grad_forward(&phi);
        let expect = grad.zip_map(&prev, |a, c| a + c);
        assert_eq!(b, expect);

        let b = fp_b_update(&phi, &prev, &g, 1.0, 1.0, ShrinkWeighting::EdgeWeighted);
        assert_eq!(b, prev);
    }

    #[test]
    fn b_update_matches_scalar_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (w, h) = (7, 6);
        let phi = random(&mut rng, w, h, 0.0, 1.0);
        let prev = random_pair(&mut rng, w, h, -1.5, 1.5);
        let g = random(&mut rng, w, h, 0.05, 1.0);
        let (t, lambda) = (1e-5, 1.0);
        for weighting in [ShrinkWeighting::EdgeWeighted, ShrinkWeighting::Uniform] {
            let b = fp_b_update(&phi, &prev, &g, t, lambda, weighting);
            for i in 0..h {
                for j in 0..w {
                    let thr = match weighting {
                        ShrinkWeighting::EdgeWeighted => g.get(i, j) / lambda,
                        ShrinkWeighting::Uniform => 1.0 / lambda,
                    };
                    let gx = if j + 1 < w { phi.get(i, j + 1) - phi.get(i, j) } else { 0.0 };
                    let gy = if i + 1 < h { phi.get(i + 1, j) - phi.get(i, j) } else { 0.0 };
                    let xb = gx + prev.gx.get(i, j);
                    let yb = gy + prev.gy.get(i, j);
                    let ex = t * prev.gx.get(i, j) + (1.0 - t) * (xb - shrink(xb, thr));
                    let ey = t * prev.gy.get(i, j) + (1.0 - t) * (yb - shrink(yb, thr));
                    assert!((b.gx.get(i, j) - ex).abs() < 1e-15);
                    assert!((b.gy.get(i, j) - ey).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn fp1_phi_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let phi = random(&mut rng, 5, 5, 0.0, 1.0);
        let zero = GradPair::zeros_like(&phi);
        assert_eq!(fp1_phi_update(&phi, &phi.zeros_like(), &zero, 2.0, 12.0, 1.0), phi);

        // mu eta / alpha == phi drives every pixel to zero
        let eta = phi.scale(12.0 / 2.0);
        let out = fp1_phi_update(&phi, &eta, &zero, 2.0, 12.0, 1.0);
        assert!(out.values().iter().all(|&v| v.abs() < 1e-15));

        let eta = random(&mut rng, 5, 5, -1.0, 1.0);
        let b = random_pair(&mut rng, 5, 5, -1.0, 1.0);
        let out = fp1_phi_update(&phi, &eta, &b, 8.0, 12.0, 1.0);
        let div = div_adjoint(&b);
        for p in 0..phi.len() {
            let e = (phi.values()[p] - 8.0 * eta.values()[p] / 12.0 - div.values()[p] / 12.0)
                .clamp(0.0, 1.0);
            assert!((out.values()[p] - e).abs() < 1e-15);
        }
    }

    #[test]
    fn fp2_varphi_cases() {
        let phi = ScalarField::new(2, 2, vec![0.2, 0.9, 1.5, 0.0]).unwrap();
        let zero = phi.zeros_like();
        let (v, c) = fp2_varphi_update(&phi, &zero, &zero, 4.0, 12.0);
        assert_eq!(v.values(), &[0.2, 0.9, 1.0, 0.0]);
        assert_eq!(c.values(), &[0.0, 0.0, -0.5, 0.0]);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = random(&mut rng, 4, 6, 0.0, 1.0);
        let cp = random(&mut rng, 4, 6, -0.3, 0.3);
        let eta = random(&mut rng, 4, 6, -1.0, 1.0);
        let (v, c) = fp2_varphi_update(&phi, &cp, &eta, 4.0, 12.0);
        for p in 0..phi.len() {
            let ev = (phi.values()[p] - cp.values()[p] - 4.0 / 12.0 * eta.values()[p]).clamp(0.0, 1.0);
            assert!((v.values()[p] - ev).abs() < 1e-15);
            assert!((c.values()[p] - (cp.values()[p] + ev - phi.values()[p])).abs() < 1e-15);
        }
    }

    #[test]
    fn fp2_phi_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let phi = random(&mut rng, 5, 4, 0.0, 1.0);
        let zero = GradPair::zeros_like(&phi);
        assert_eq!(fp2_phi_update(&phi, &phi.zeros_like(), &zero, 12.0, 1.0), phi);
        let c = random(&mut rng, 5, 4, -0.5, 0.5);
        let out = fp2_phi_update(&phi, &c, &zero, 12.0, 1.0);
        for p in 0..phi.len() {
            assert_eq!(out.values()[p], (phi.values()[p] + c.values()[p]).clamp(0.0, 1.0));
        }
        let b = random_pair(&mut rng, 5, 4, -1.0, 1.0);
        let out = fp2_phi_update(&phi, &c, &b, 12.0, 1.0);
        let div = div_adjoint(&b);
        for p in 0..phi.len() {
            let e = (phi.values()[p] + c.values()[p] - div.values()[p] / 12.0).clamp(0.0, 1.0);
            assert!((out.values()[p] - e).abs() < 1e-15);
        }
    }
}
