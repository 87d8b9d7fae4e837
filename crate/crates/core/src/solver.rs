//! Shared solver plumbing: input normalisation, the fields every solver
//! precomputes, and the common result type.

use std::time::{Duration, Instant};

use crate::config::{Solver, SolverConfig};
use crate::error::{Error, Result};
use crate::filters::{edge_detector, gaussian_kernel, isef_kernel, Kernel2D};
use crate::grid::ScalarField;
use crate::metrics::BinaryMask;
use crate::{fixed_point, levelset, split_bregman};

#[derive(Debug, Clone)]
pub struct SegmentationResult {
    pub solver: Solver,
    /// Final level-set or relaxed indicator function.
    pub phi: ScalarField,
    /// Segmented region: `phi > 0` for the level set, `phi > gamma` otherwise.
    pub mask: BinaryMask,
    pub iterations: usize,
    pub elapsed: Duration,
    /// L2 change of the iterate after each iteration.
    pub residuals: Vec<f64>,
}

impl SegmentationResult {
    pub fn final_residual(&self) -> Option<f64> {
        self.residuals.last().copied()
    }
}

/// Image scaled to unit maximum together with the kernels and edge map
/// derived from it.
///
/// Every downstream quantity is computed on the unit-max image, which makes
/// the solvers independent of the image's intensity scale.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub image: ScalarField,
    pub kernel: Kernel2D,
    pub edge: ScalarField,
}

impl Prepared {
    pub fn new(f: &ScalarField, cfg: &SolverConfig) -> Result<Prepared> {
        if !f.values().iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::param("input image must be strictly positive and finite"));
        }
        let peak = f.max();
        let image = f.map(|v| v / peak);
        let kernel = gaussian_kernel(cfg.sigma, cfg.gaussian_radius())?;
        let isef = isef_kernel(cfg.isef_sigma, cfg.isef_size)?;
        let edge = edge_detector(&image, cfg.beta, &isef);
        Ok(Prepared {
            image,
            kernel,
            edge,
        })
    }
}

/// Iteration driver shared by all solvers: repeats `step` until the L2
/// change falls below `vol` or `max_iter` is reached.
pub(crate) fn iterate<S>(
    state: &mut S,
    cfg: &SolverConfig,
    phi_of: impl Fn(&S) -> &ScalarField,
    mut step: impl FnMut(&mut S),
) -> (usize, Vec<f64>) {
    let mut residuals = Vec::new();
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        let before = phi_of(state).clone();
        step(state);
        iterations += 1;
        let r = phi_of(state).distance(&before);
        residuals.push(r);
        if r < cfg.vol {
            break;
        }
    }
    (iterations, residuals)
}

pub fn segment(solver: Solver, f: &ScalarField, cfg: &SolverConfig) -> Result<SegmentationResult> {
    cfg.validate(solver)?;
    let start = Instant::now();
    let mut result = match solver {
        Solver::LevelSet => levelset::run_levelset(f, cfg)?,
        Solver::SplitBregman => split_bregman::run_sb_lacm(f, cfg)?,
        Solver::Fp1 => fixed_point::run_fp1(f, cfg)?,
        Solver::Fp2 => fixed_point::run_fp2(f, cfg)?,
    };
    result.elapsed = start.elapsed();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive_images() {
        let cfg = SolverConfig::default();
        let mut f = ScalarField::filled(8, 8, 10.0).unwrap();
        f.set(3, 3, 0.0);
        assert!(Prepared::new(&f, &cfg).is_err());
        f.set(3, 3, f64::NAN);
        assert!(Prepared::new(&f, &cfg).is_err());
    }

    #[test]
    fn normalises_to_unit_max() {
        let cfg = SolverConfig::default();
        let f = ScalarField::from_fn(10, 10, |i, j| 1.0 + (i * j) as f64).unwrap();
        let p = Prepared::new(&f, &cfg).unwrap();
        assert_eq!(p.image.max(), 1.0);
        assert_eq!(p.edge.width(), 10);
    }
}
