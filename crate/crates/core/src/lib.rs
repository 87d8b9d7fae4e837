//! Segmentation of speckled images with local-statistics active contours.
//!
//! Four solvers share one model: a gradient-descent level-set evolution and
//! three solvers for its convex relaxation (split Bregman and two proximal
//! fixed-point schemes). Supporting modules provide the discrete operators,
//! filters, synthetic speckled phantoms, evaluation metrics and file I/O.

pub mod cli;
pub mod config;
pub mod error;
pub mod filters;
pub mod fixed_point;
pub mod grid;
pub mod levelset;
pub mod localstats;
pub mod metrics;
pub mod pnm;
pub mod solver;
pub mod split_bregman;
pub mod suite;
pub mod synth;

pub use config::{NoiseLevel, Rect, ShrinkWeighting, Solver, SolverConfig};
pub use error::{Error, Result};
pub use grid::{GradPair, ScalarField};
pub use localstats::EtaMode;
pub use metrics::{dsc, pp_uniformity, BinaryMask, PpNormalization};
pub use solver::{segment, SegmentationResult};
pub use synth::{make_phantom, Phantom, PhantomSpec};
