//! Non-convex level-set evolution of the local-statistics model.
//!
//! The flow is
//!
//! ```text
//! dphi/dt = delta_eps(phi) (theta div(g ∇phi/|∇phi|) - mu eta)
//!         + nu (lap phi - div(∇phi/|∇phi|))
//! ```
//!
//! integrated with explicit Euler steps. The region means are refreshed from
//! `H_eps(phi)` after every step.

use crate::config::{Rect, Solver, SolverConfig};
use crate::error::{Error, Result};
use crate::filters::{delta_eps, heaviside_eps, Kernel2D};
use crate::grid::{laplacian_neighbors, ScalarField};
use crate::localstats::{eta_field, update_region_means, RegionStats};
use crate::metrics::BinaryMask;
use crate::solver::{iterate, Prepared, SegmentationResult};

/// Regularisation added under the square root of `|∇phi|`.
pub const GRAD_EPS: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LevelSetState {
    pub phi: ScalarField,
    pub stats: RegionStats,
    pub iter: usize,
}

/// `+1` inside `rect`, `-1` elsewhere.
pub fn binary_step(width: usize, height: usize, rect: Rect) -> Result<ScalarField> {
    if rect.rows == 0 || rect.cols == 0 {
        return Err(Error::param("initial rectangle is empty"));
    }
    if rect.top + rect.rows > height || rect.left + rect.cols > width {
        return Err(Error::param(format!(
            "initial rectangle {rect:?} exceeds the {width}x{height} image"
        )));
    }
    if rect.rows == height && rect.cols == width {
        return Err(Error::param("initial rectangle covers the whole image"));
    }
    ScalarField::from_fn(width, height, |i, j| if rect.contains(i, j) { 1.0 } else { -1.0 })
}

pub fn membership(phi: &ScalarField, eps: f64) -> ScalarField {
    phi.map(|v| heaviside_eps(v, eps))
}

impl LevelSetState {
    pub fn init_binary(f: &ScalarField, rect: Rect, kernel: &Kernel2D, eps: f64) -> Result<Self> {
        let phi = binary_step(f.width(), f.height(), rect)?;
        let stats = update_region_means(f, &membership(&phi, eps), kernel);
        Ok(LevelSetState {
            phi,
            stats,
            iter: 0,
        })
    }
}

/// Central differences `(u[+1] - u[-1]) / 2` along x and y, replicate padded.
pub fn central_gradient(u: &ScalarField) -> (ScalarField, ScalarField) {
    let mut gx = u.zeros_like();
    let mut gy = u.zeros_like();
    for i in 0..u.height() {
        for j in 0..u.width() {
            let (ii, jj) = (i as isize, j as isize);
            gx.set(i, j, 0.5 * (u.get_clamped(ii, jj + 1) - u.get_clamped(ii, jj - 1)));
            gy.set(i, j, 0.5 * (u.get_clamped(ii + 1, jj) - u.get_clamped(ii - 1, jj)));
        }
    }
    (gx, gy)
}

/// Unit normal `∇phi / |∇phi|` and its divergence (mean curvature).
pub fn normal_and_curvature(phi: &ScalarField) -> (ScalarField, ScalarField, ScalarField) {
    let (px, py) = central_gradient(phi);
    let mag = px.zip_map(&py, |a, b| (a * a + b * b + GRAD_EPS).sqrt());
    let nx = px.zip_map(&mag, |a, m| a / m);
    let ny = py.zip_map(&mag, |a, m| a / m);
    let (nxx, _) = central_gradient(&nx);
    let (_, nyy) = central_gradient(&ny);
    let kappa = nxx.zip_map(&nyy, |a, b| a + b);
    (nx, ny, kappa)
}

/// Right-hand side of the flow for a given `eta`.
pub fn flow_rhs(phi: &ScalarField, eta: &ScalarField, g: &ScalarField, cfg: &SolverConfig) -> ScalarField {
    let (nx, ny, kappa) = normal_and_curvature(phi);
    let (gx, gy) = central_gradient(g);
    ScalarField::from_fn(phi.width(), phi.height(), |i, j| {
        let p = phi.get(i, j);
        let k = kappa.get(i, j);
        let edge = g.get(i, j) * k + gx.get(i, j) * nx.get(i, j) + gy.get(i, j) * ny.get(i, j);
        let lap = laplacian_neighbors(phi, i, j) - 4.0 * p;
        delta_eps(p, cfg.eps) * (cfg.theta * edge - cfg.mu * eta.get(i, j)) + cfg.nu * (lap - k)
    })
    .expect("shape copied from a valid field")
}

/// One explicit Euler step followed by a region-mean refresh.
pub fn evolve_step(
    state: &LevelSetState,
    f: &ScalarField,
    g: &ScalarField,
    kernel: &Kernel2D,
    cfg: &SolverConfig,
) -> LevelSetState {
    let eta = eta_field(f, &state.stats, kernel, cfg.eta_mode);
    let rhs = flow_rhs(&state.phi, &eta, g, cfg);
    let phi = state.phi.zip_map(&rhs, |p, r| p + cfg.dt * r);
    let stats = update_region_means(f, &membership(&phi, cfg.eps), kernel);
    LevelSetState {
        phi,
        stats,
        iter: state.iter + 1,
    }
}

pub fn run_levelset(f: &ScalarField, cfg: &SolverConfig) -> Result<SegmentationResult> {
    let prep = Prepared::new(f, cfg)?;
    let rect = cfg
        .init_rect
        .unwrap_or_else(|| Rect::centered(f.width(), f.height()));
    let mut state = LevelSetState::init_binary(&prep.image, rect, &prep.kernel, cfg.eps)?;
    let (iterations, residuals) = iterate(
        &mut state,
        cfg,
        |s| &s.phi,
        |s| *s = evolve_step(s, &prep.image, &prep.edge, &prep.kernel, cfg),
    );
    Ok(SegmentationResult {
        solver: Solver::LevelSet,
        mask: BinaryMask::threshold(&state.phi, 0.0),
        phi: state.phi,
        iterations,
        elapsed: Default::default(),
        residuals,
    })
}
