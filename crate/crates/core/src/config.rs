//! Solver selection and every numeric tunable shared by the solvers.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::filters::default_gaussian_radius;
use crate::localstats::EtaMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Solver {
    /// Gradient-descent level-set evolution.
    LevelSet,
    /// Convex relaxation solved by split Bregman iterations.
    SplitBregman,
    /// Convex relaxation solved by the proximal fixed-point scheme.
    Fp1,
    /// Fixed-point scheme with an extra splitting of the data term.
    Fp2,
}

impl Solver {
    pub const ALL: [Solver; 4] = [Solver::LevelSet, Solver::SplitBregman, Solver::Fp1, Solver::Fp2];

    pub fn name(self) -> &'static str {
        match self {
            Solver::LevelSet => "levelset",
            Solver::SplitBregman => "sb",
            Solver::Fp1 => "fp1",
            Solver::Fp2 => "fp2",
        }
    }

    pub fn is_convex(self) -> bool {
        !matches!(self, Solver::LevelSet)
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "levelset" | "lacm" => Ok(Solver::LevelSet),
            "sb" | "split-bregman" => Ok(Solver::SplitBregman),
            "fp1" => Ok(Solver::Fp1),
            "fp2" => Ok(Solver::Fp2),
            other => Err(Error::param(format!("unknown solver `{other}`"))),
        }
    }
}

/// Which parameter set to start from. `Heavy` targets single-look speckle,
/// `Light` targets multi-look (L = 8) data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseLevel {
    Heavy,
    Light,
}

/// Threshold used by the fixed-point dual update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShrinkWeighting {
    /// Per-pixel `g / lambda`, consistent with the edge-weighted TV.
    #[default]
    EdgeWeighted,
    /// Uniform `1 / lambda`.
    Uniform,
}

/// Inclusive-exclusive pixel rectangle: rows `top..top+rows`, columns `left..left+cols`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub top: usize,
    pub left: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Rect {
    pub fn new(top: usize, left: usize, rows: usize, cols: usize) -> Rect {
        Rect {
            top,
            left,
            rows,
            cols,
        }
    }

    /// The middle half of a `width x height` image.
    pub fn centered(width: usize, height: usize) -> Rect {
        Rect::new(height / 4, width / 4, (height / 2).max(1), (width / 2).max(1))
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i >= self.top && i < self.top + self.rows && j >= self.left && j < self.left + self.cols
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Edge-weighted length term weight (level set only).
    pub theta: f64,
    /// Data-fitting weight.
    pub mu: f64,
    /// Distance-regularisation weight (level set only).
    pub nu: f64,
    /// Split Bregman penalty, or dual step for the fixed-point solvers.
    pub lambda: f64,
    /// Proximal weight of the fixed-point solvers.
    pub alpha: f64,
    /// Relaxation factor `t` of the fixed-point dual update.
    pub relaxation: f64,
    /// Heaviside/delta smoothing width.
    pub eps: f64,
    /// Edge-detector sensitivity.
    pub beta: f64,
    /// Standard deviation of the local-statistics Gaussian.
    pub sigma: f64,
    /// Gaussian truncation radius; `None` means `ceil(1.5 sigma)`.
    pub kernel_radius: Option<usize>,
    pub isef_sigma: f64,
    pub isef_size: usize,
    /// Threshold on the relaxed function for the convex solvers.
    pub gamma: f64,
    /// Explicit Euler step of the level-set flow.
    pub dt: f64,
    /// Stop once the L2 change of the iterate drops below this.
    pub vol: f64,
    pub max_iter: usize,
    pub eta_mode: EtaMode,
    pub shrink_weighting: ShrinkWeighting,
    /// Level-set initial region; `None` uses the centred half-size box.
    pub init_rect: Option<Rect>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::preset(Solver::Fp1, NoiseLevel::Light)
    }
}

impl SolverConfig {
    fn base() -> SolverConfig {
        SolverConfig {
            theta: 10.0,
            mu: 100.0,
            nu: 0.2,
            lambda: 1.0,
            alpha: 12.0,
            relaxation: 1e-5,
            eps: 1.0,
            beta: 20.0,
            sigma: 15.0,
            kernel_radius: None,
            isef_sigma: 1.2,
            isef_size: 15,
            gamma: 0.5,
            dt: 1.0,
            vol: 1.0,
            max_iter: 300,
            eta_mode: EtaMode::Mirrored,
            shrink_weighting: ShrinkWeighting::EdgeWeighted,
            init_rect: None,
        }
    }

    /// Reference parameter sets for each solver on 125x125 speckled scenes.
    pub fn preset(solver: Solver, noise: NoiseLevel) -> SolverConfig {
        let heavy = noise == NoiseLevel::Heavy;
        let mut cfg = SolverConfig::base();
        match solver {
            Solver::LevelSet => {
                cfg.theta = if heavy { 200.0 } else { 10.0 };
                cfg.mu = 100.0;
                cfg.max_iter = 200;
            }
            Solver::SplitBregman => {
                cfg.lambda = 1000.0;
                cfg.mu = if heavy { 0.06 } else { 0.2 } * cfg.lambda;
            }
            Solver::Fp1 => {
                cfg.mu = if heavy { 2.0 } else { 8.0 };
            }
            Solver::Fp2 => {
                cfg.mu = if heavy { 1.0 } else { 4.0 };
            }
        }
        cfg
    }

    pub fn gaussian_radius(&self) -> usize {
        self.kernel_radius
            .unwrap_or_else(|| default_gaussian_radius(self.sigma))
    }

    pub fn validate(&self, solver: Solver) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(format!("{name} must be positive, got {v}")))
            }
        }
        fn non_negative(name: &str, v: f64) -> Result<()> {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(format!("{name} must be non-negative, got {v}")))
            }
        }
        positive("eps", self.eps)?;
        positive("sigma", self.sigma)?;
        positive("isef-sigma", self.isef_sigma)?;
        non_negative("beta", self.beta)?;
        non_negative("mu", self.mu)?;
        non_negative("vol", self.vol)?;
        if self.isef_size.is_multiple_of(2) {
            return Err(Error::param(format!(
                "isef-size must be odd, got {}",
                self.isef_size
            )));
        }
        if self.kernel_radius == Some(0) {
            return Err(Error::param("kernel-radius must be at least 1"));
        }
        match solver {
            Solver::LevelSet => {
                non_negative("theta", self.theta)?;
                non_negative("nu", self.nu)?;
                positive("dt", self.dt)?;
            }
            Solver::SplitBregman => {
                positive("lambda", self.lambda)?;
                unit_open("gamma", self.gamma)?;
            }
            Solver::Fp1 | Solver::Fp2 => {
                positive("lambda", self.lambda)?;
                positive("alpha", self.alpha)?;
                unit_open("gamma", self.gamma)?;
                unit_open("t", self.relaxation)?;
                let ratio = self.lambda / self.alpha;
                if ratio >= 0.25 {
                    return Err(Error::param(format!(
                        "lambda/alpha must be below 1/4, got {ratio}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn unit_open(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must lie in (0, 1), got {v}")))
    }
}
