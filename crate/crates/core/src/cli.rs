//! Command-line driver: phantom synthesis, segmentation, scoring and the
//! benchmark table. All file I/O of the crate happens here.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{NoiseLevel, Rect, ShrinkWeighting, Solver, SolverConfig};
use crate::error::{Error, Result};
use crate::localstats::EtaMode;
use crate::metrics::{dsc, pp_uniformity, PpNormalization};
use crate::pnm::{self, GrayImage};
use crate::solver::segment;
use crate::suite;
use crate::synth::{make_phantom, Layout, PhantomSpec, ShadingProfile, NOISE_FREE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lacm", version, about = "Speckled image segmentation with local-statistics active contours")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a shaded, speckled phantom with its ground truth.
    Synth(SynthArgs),
    /// Segment an 8-bit grayscale image.
    Segment(Box<SegmentArgs>),
    /// Score a mask against a reference mask and the image.
    Metrics(MetricsArgs),
    /// Run every solver on the standard phantoms and print a CSV table.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value = "disk", value_parser = parse_from_str::<Layout>)]
    pub layout: Layout,
    /// Width and height in pixels.
    #[arg(long, default_value_t = 125, value_parser = clap::value_parser!(u64).range(2..))]
    pub size: u64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    pub looks: u32,
    /// Skip the speckle (overrides --looks).
    #[arg(long)]
    pub noise_free: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 160.0)]
    pub foreground: f64,
    #[arg(long, default_value_t = 60.0)]
    pub background: f64,
    #[arg(long, default_value = "radial", value_parser = parse_from_str::<ShadingProfile>)]
    pub shading: ShadingProfile,
    #[arg(long, default_value_t = 0.5)]
    pub amplitude: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NoiseArg {
    Heavy,
    Light,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EtaArg {
    Mirrored,
    Literal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ShrinkArg {
    Weighted,
    Uniform,
}

/// Numeric knobs; every field overrides the preset and the config file.
#[derive(Debug, Default, Args)]
pub struct Knobs {
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Relaxation factor t of the fixed-point dual update.
    #[arg(long, visible_alias = "t")]
    pub relaxation: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub kernel_radius: Option<usize>,
    #[arg(long)]
    pub isef_sigma: Option<f64>,
    #[arg(long)]
    pub isef_size: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub vol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum)]
    pub eta_mode: Option<EtaArg>,
    #[arg(long, value_enum)]
    pub shrink: Option<ShrinkArg>,
    /// Level-set start box as `top,left,rows,cols`.
    #[arg(long, value_parser = parse_rect)]
    pub init_rect: Option<Rect>,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "fp1", value_parser = parse_from_str::<Solver>)]
    pub solver: Solver,
    /// Which preset the knobs start from.
    #[arg(long, value_enum, default_value = "light")]
    pub noise: NoiseArg,
    /// `key = value` lines overriding the preset; `#` starts a comment.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub knobs: Knobs,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Computed segmentation mask.
    #[arg(long)]
    pub cs: PathBuf,
    /// Reference mask.
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub image: PathBuf,
    /// Report the unnormalised within-region sum of squares.
    #[arg(long)]
    pub raw_pp: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated subset of levelset, sb, fp1, fp2.
    #[arg(long, value_delimiter = ',', value_parser = parse_from_str::<Solver>)]
    pub solvers: Option<Vec<Solver>>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also write the table to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_from_str<T: std::str::FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_rect(s: &str) -> std::result::Result<Rect, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| format!("bad rectangle `{s}`: {e}"))?;
    match parts[..] {
        [top, left, rows, cols] => Ok(Rect::new(top, left, rows, cols)),
        _ => Err(format!("rectangle needs four numbers, got `{s}`")),
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::param(format!("{key}: cannot parse `{value}`: {e}")))
}

/// Applies one `key = value` setting. Keys match the flag names; `_` and
/// `-` are interchangeable.
pub fn apply_setting(cfg: &mut SolverConfig, key: &str, value: &str) -> Result<()> {
    let key = key.trim().replace('_', "-");
    let value = value.trim();
    let k = key.as_str();
    match k {
        "theta" => cfg.theta = parse_value(k, value)?,
        "mu" => cfg.mu = parse_value(k, value)?,
        "nu" => cfg.nu = parse_value(k, value)?,
        "lambda" => cfg.lambda = parse_value(k, value)?,
        "alpha" => cfg.alpha = parse_value(k, value)?,
        "relaxation" | "t" => cfg.relaxation = parse_value(k, value)?,
        "eps" => cfg.eps = parse_value(k, value)?,
        "beta" => cfg.beta = parse_value(k, value)?,
        "sigma" => cfg.sigma = parse_value(k, value)?,
        "kernel-radius" => cfg.kernel_radius = Some(parse_value(k, value)?),
        "isef-sigma" => cfg.isef_sigma = parse_value(k, value)?,
        "isef-size" => cfg.isef_size = parse_value(k, value)?,
        "gamma" => cfg.gamma = parse_value(k, value)?,
        "dt" => cfg.dt = parse_value(k, value)?,
        "vol" => cfg.vol = parse_value(k, value)?,
        "max-iter" => cfg.max_iter = parse_value(k, value)?,
        "eta-mode" => {
            cfg.eta_mode = match value {
                "mirrored" => EtaMode::Mirrored,
                "literal" => EtaMode::Literal,
                _ => return Err(Error::param(format!("eta-mode: unknown `{value}`"))),
            }
        }
        "shrink" => {
            cfg.shrink_weighting = match value {
                "weighted" => ShrinkWeighting::EdgeWeighted,
                "uniform" => ShrinkWeighting::Uniform,
                _ => return Err(Error::param(format!("shrink: unknown `{value}`"))),
            }
        }
        "init-rect" => cfg.init_rect = Some(parse_rect(value).map_err(Error::param)?),
        _ => return Err(Error::param(format!("unknown config key `{key}`"))),
    }
    Ok(())
}

pub fn apply_config_text(cfg: &mut SolverConfig, text: &str) -> Result<()> {
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::param(format!("config line {}: expected `key = value`", n + 1)))?;
        apply_setting(cfg, key, value)?;
    }
    Ok(())
}

impl Knobs {
    pub fn apply(&self, cfg: &mut SolverConfig) {
        macro_rules! set {
            ($($field:ident),+) => { $(if let Some(v) = self.$field { cfg.$field = v; })+ };
        }
        set!(theta, mu, nu, lambda, alpha, relaxation, eps, beta, sigma, isef_sigma, isef_size, gamma, dt, vol, max_iter);
        if let Some(r) = self.kernel_radius {
            cfg.kernel_radius = Some(r);
        }
        if let Some(m) = self.eta_mode {
            cfg.eta_mode = match m {
                EtaArg::Mirrored => EtaMode::Mirrored,
                EtaArg::Literal => EtaMode::Literal,
            };
        }
        if let Some(s) = self.shrink {
            cfg.shrink_weighting = match s {
                ShrinkArg::Weighted => ShrinkWeighting::EdgeWeighted,
                ShrinkArg::Uniform => ShrinkWeighting::Uniform,
            };
        }
        if self.init_rect.is_some() {
            cfg.init_rect = self.init_rect;
        }
    }
}

/// Preset, then config file, then flags.
pub fn resolve_config(args: &SegmentArgs) -> Result<SolverConfig> {
    let noise = match args.noise {
        NoiseArg::Heavy => NoiseLevel::Heavy,
        NoiseArg::Light => NoiseLevel::Light,
    };
    let mut cfg = SolverConfig::preset(args.solver, noise);
    if let Some(path) = &args.config {
        apply_config_text(&mut cfg, &fs::read_to_string(path)?)?;
    }
    args.knobs.apply(&mut cfg);
    cfg.validate(args.solver)?;
    Ok(cfg)
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path)?;
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs) -> Result<Vec<PathBuf>> {
    let size = args.size as usize;
    let spec = PhantomSpec {
        width: size,
        height: size,
        layout: args.layout,
        foreground: args.foreground,
        background: args.background,
        shading: args.shading,
        amplitude: args.amplitude,
        looks: if args.noise_free { NOISE_FREE } else { args.looks },
        seed: args.seed,
    };
    let phantom = make_phantom(&spec)?;
    create_dir(&args.out)?;
    let files = [
        ("observed.pgm", GrayImage::from_field(&suite::as_8bit(&phantom.observed))),
        ("clean.pgm", GrayImage::from_field(&phantom.clean)),
        ("truth.pgm", GrayImage::from_mask(&phantom.truth_mask)),
    ];
    let mut written = Vec::new();
    for (name, img) in &files {
        let path = args.out.join(name);
        pnm::write_pgm(&path, img)?;
        written.push(path);
    }
    let manifest = format!(
        "layout = {}\nwidth = {}\nheight = {}\nforeground = {}\nbackground = {}\nshading = {}\namplitude = {}\nlooks = {}\nseed = {}\n",
        spec.layout,
        spec.width,
        spec.height,
        spec.foreground,
        spec.background,
        spec.shading,
        spec.amplitude,
        spec.looks,
        spec.seed
    );
    let path = args.out.join("manifest.txt");
    fs::write(&path, manifest)?;
    written.push(path);
    Ok(written)
}

pub fn cmd_segment(args: &SegmentArgs) -> Result<String> {
    let cfg = resolve_config(args)?;
    let input = pnm::read_gray(&args.input)?;
    let f = input.to_positive_field()?;
    let result = segment(args.solver, &f, &cfg)?;
    create_dir(&args.out)?;
    pnm::write_pgm(&args.out.join("mask.pgm"), &GrayImage::from_mask(&result.mask))?;
    pnm::write_pgm(&args.out.join("phi.pgm"), &GrayImage::stretched(&result.phi))?;
    pnm::write_matrix(&args.out.join("phi.txt"), &result.phi)?;
    pnm::write_ppm(&args.out.join("overlay.ppm"), &pnm::overlay(&input, &result.mask))?;
    let residual = result
        .final_residual()
        .map_or_else(|| "none".to_string(), |r| format!("{r:.6}"));
    let report = format!(
        "solver={} iterations={} seconds={:.4} residual={}",
        result.solver,
        result.iterations,
        result.elapsed.as_secs_f64(),
        residual
    );
    fs::write(args.out.join("report.txt"), format!("{report}\n"))?;
    Ok(report)
}

pub fn cmd_metrics(args: &MetricsArgs) -> Result<String> {
    let cs = pnm::read_gray(&args.cs)?.to_mask();
    let gt = pnm::read_gray(&args.gt)?.to_mask();
    let image = pnm::read_gray(&args.image)?.to_field()?;
    if (cs.width(), cs.height()) != (image.width(), image.height()) {
        return Err(Error::DimensionMismatch(cs.width(), cs.height(), image.width(), image.height()));
    }
    let norm = if args.raw_pp {
        PpNormalization::Unit
    } else {
        PpNormalization::TotalVariance
    };
    let d = dsc(&cs, &gt)?;
    let pp = pp_uniformity(&image, &cs, norm)?;
    Ok(format!("dsc,pp\n{d},{pp}"))
}

pub fn cmd_bench(args: &BenchArgs) -> Result<String> {
    let solvers = args.solvers.clone().unwrap_or_else(|| Solver::ALL.to_vec());
    let specs: Vec<PhantomSpec> = suite::BENCH_LOOKS
        .iter()
        .map(|&l| suite::standard_spec(l, args.seed))
        .collect();
    let table = suite::bench_csv(&suite::run_bench(&solvers, &specs)?);
    if let Some(path) = &args.out {
        fs::write(path, &table)?;
    }
    Ok(table.trim_end().to_string())
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Format(_) => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

pub fn execute(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Synth(a) => {
            let files = cmd_synth(a)?;
            Ok(files
                .iter()
                .map(|p| p.display().to_string())
                .collect::<Vec<_>>()
                .join("\n"))
        }
        Command::Segment(a) => cmd_segment(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            if !out.is_empty() {
                println!("{out}");
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
