//! Standard benchmark scenes and the parameter sets used on them.

use std::fmt::Write as _;

use crate::config::{NoiseLevel, Solver, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::metrics::{dsc, pp_uniformity, PpNormalization};
use crate::pnm::quantize;
use crate::solver::segment;
use crate::synth::{make_phantom, Phantom, PhantomSpec};

pub const BENCH_HEADER: &str = "solver,image,looks,iterations,seconds,dsc,pp";

/// Looks of the two benchmark scenes.
pub const BENCH_LOOKS: [u32; 2] = [1, 8];

/// Disk on a radially shaded background, 160 inside and 60 outside.
pub fn standard_spec(looks: u32, seed: u64) -> PhantomSpec {
    PhantomSpec {
        looks,
        seed,
        ..PhantomSpec::default()
    }
}

/// Values as an 8-bit file would store them: rounded to `1..=255`.
pub fn as_8bit(f: &ScalarField) -> ScalarField {
    f.map(|v| quantize(v).max(1) as f64)
}

pub fn noise_level(looks: u32) -> NoiseLevel {
    if looks == 1 {
        NoiseLevel::Heavy
    } else {
        NoiseLevel::Light
    }
}

/// The published parameter set for the noise level matching `looks`.
pub fn reference_config(solver: Solver, looks: u32) -> SolverConfig {
    SolverConfig::preset(solver, noise_level(looks))
}

/// Parameters used for the benchmark scenes.
///
/// Single-look speckle needs a weaker data term than the reference set for
/// the split Bregman and first fixed-point solvers: with the reference
/// weights their relaxed optimum is close to a pixelwise classification.
pub fn tuned_config(solver: Solver, looks: u32) -> SolverConfig {
    let mut cfg = reference_config(solver, looks);
    if looks == 1 {
        match solver {
            Solver::SplitBregman => {
                cfg.lambda = 5.0;
                cfg.mu = 0.5;
            }
            Solver::Fp1 => {
                cfg.mu = 1.0;
                cfg.alpha = 24.0;
            }
            Solver::LevelSet | Solver::Fp2 => {}
        }
    }
    cfg
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub solver: Solver,
    pub image: String,
    pub looks: u32,
    pub iterations: usize,
    pub seconds: f64,
    pub dsc: f64,
    pub pp: f64,
}

impl BenchRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{:.4},{:.6},{:.6}",
            self.solver, self.image, self.looks, self.iterations, self.seconds, self.dsc, self.pp
        )
    }
}

pub fn bench_image_name(spec: &PhantomSpec) -> String {
    format!("{}-{}-L{}", spec.layout, spec.shading, spec.looks)
}

pub fn run_case(solver: Solver, phantom: &Phantom, name: &str, cfg: &SolverConfig) -> Result<BenchRow> {
    let f = as_8bit(&phantom.observed);
    let r = segment(solver, &f, cfg)?;
    Ok(BenchRow {
        solver,
        image: name.to_string(),
        looks: phantom.looks,
        iterations: r.iterations,
        seconds: r.elapsed.as_secs_f64(),
        dsc: dsc(&r.mask, &phantom.truth_mask)?,
        pp: pp_uniformity(&f, &r.mask, PpNormalization::TotalVariance)
            .or_else(|e| match e {
                // a one-region result has no uniformity score
                Error::EmptyRegion(_) => Ok(f64::NAN),
                e => Err(e),
            })?,
    })
}

/// Every solver in `solvers` on each scene, rows ordered scene-major.
pub fn run_bench(solvers: &[Solver], specs: &[PhantomSpec]) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for spec in specs {
        let phantom = make_phantom(spec)?;
        let name = bench_image_name(spec);
        for &s in solvers {
            rows.push(run_case(s, &phantom, &name, &tuned_config(s, spec.looks))?);
        }
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BENCH_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.csv());
    }
    out
}
