use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use proxhull::applications::{
    denoise, inpaint, intersection_filter, local_maxima, medial_axis_map, medial_axis_of_set, salt_pepper,
    suplevel_mask, NoiseSpec,
};
use proxhull::convex_baseline::{
    average_transform_convex, local_lower_transform_convex, local_upper_transform_convex, lower_transform_convex,
    upper_transform_convex, BaselineParams, DiffNorm,
};
use proxhull::io::{read_field, read_mask, write_field, write_mask};
use proxhull::moreau::{moreau_lower_iterative, moreau_upper};
use proxhull::study::{rows_to_csv, run_study, Scheme, StudyConfig, StudyOracle};
use proxhull::transforms::{
    average_transform, local_lower_transform, local_upper_transform, lower_transform, upper_transform, TransformResult,
};
use proxhull::{BinaryMask, EnvelopeParams, ScalarField, StopRule};

/// Discrete Moreau envelopes and compensated convex transforms on grids.
///
/// Fields are read from and written to CSV (`# dims=…, spacing=…` header)
/// or 8-bit PGM, chosen by file extension. Reports go to stdout as JSON
/// unless `--report` names a file.
#[derive(Parser, Debug)]
#[command(name = "proxhull", version, about)]
struct Cli {
    /// Worker threads for envelope sweeps (default: all cores)
    #[arg(long, global = true, env = "PROXHULL_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lower or upper Moreau envelope
    Envelope(EnvelopeCmd),
    /// Compensated convex transforms
    Transform(TransformCmd),
    /// Quadratic multiscale medial axis map
    MedialAxis(MedialAxisCmd),
    /// Intersection extraction filter of a binary set
    Intersect(IntersectCmd),
    /// Restore damaged pixels with the average transform
    Inpaint(InpaintCmd),
    /// Corrupt an image with salt & pepper noise and restore it
    Denoise(DenoiseCmd),
    /// Iteration counts and errors against the closed-form prototypes
    Study(StudyCmd),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Input field (.csv or .pgm)
    #[arg(short, long)]
    input: PathBuf,
    /// JSON `{dims, spacing}` for header-less CSV, or spacing for PGM
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Override the grid spacing of the input
    #[arg(long)]
    spacing: Option<f64>,
}

impl InputArgs {
    fn field(&self) -> Result<ScalarField> {
        let f = read_field(&self.input, self.sidecar.as_deref())
            .with_context(|| format!("reading {}", self.input.display()))?;
        Ok(match self.spacing {
            Some(h) => f.with_spacing(h)?,
            None => f,
        })
    }

    fn mask(&self) -> Result<(BinaryMask, f64)> {
        let f = self.field()?;
        let m = BinaryMask::new(f.dims().to_vec(), f.values().iter().map(|&v| v != 0.0).collect())?;
        Ok((m, f.spacing()))
    }
}

/// `tol=EPS`, `exact` or `iters=M`.
#[derive(Debug, Clone, Copy)]
struct StopArg(StopRule);

impl FromStr for StopArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "exact" {
            return Ok(Self(StopRule::ExactBound));
        }
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| format!("expected tol=EPS, iters=M or exact, got {s:?}"))?;
        match key {
            "tol" => value
                .parse()
                .map(|e| Self(StopRule::Tolerance(e)))
                .map_err(|e| format!("bad tolerance {value:?}: {e}")),
            "iters" => value
                .parse()
                .map(|m| Self(StopRule::Iterations(m)))
                .map_err(|e| format!("bad iteration count {value:?}: {e}")),
            _ => Err(format!("unknown stop rule {key:?}")),
        }
    }
}

#[derive(Args, Debug)]
struct EnvelopeArgs {
    /// Curvature module λ
    #[arg(short, long, allow_negative_numbers = true)]
    lambda: f64,
    /// Stopping rule: tol=EPS, iters=M or exact
    #[arg(long, default_value = "tol=1e-7")]
    stop: StopArg,
}

impl EnvelopeArgs {
    fn params(&self) -> EnvelopeParams {
        EnvelopeParams::new(self.lambda).with_stop(self.stop.0)
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output field (.csv or .pgm)
    #[arg(short, long)]
    output: PathBuf,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum EnvelopeKind {
    Lower,
    Upper,
}

#[derive(Args, Debug)]
struct EnvelopeCmd {
    kind: EnvelopeKind,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    env: EnvelopeArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum TransformKind {
    Lower,
    Upper,
    LocalLower,
    LocalUpper,
    Average,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Moreau,
    Convex,
}

#[derive(Args, Debug)]
struct TransformCmd {
    kind: TransformKind,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    env: EnvelopeArgs,
    #[arg(long, value_enum, default_value = "moreau")]
    scheme: SchemeArg,
    /// Damaged cells for `average` (nonzero = damaged); default: none
    #[arg(long)]
    damaged: Option<PathBuf>,
    /// Extension constant M for `average` (default: sup_K |f| + λ(h·max dim)² + 1)
    #[arg(long)]
    big_m: Option<f64>,
    /// Iteration cap for the convex scheme
    #[arg(long, default_value_t = 1_000_000)]
    max_iterations: usize,
    /// Use the L² change between iterates in the convex scheme
    #[arg(long)]
    l2: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct MedialAxisCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    env: EnvelopeArgs,
    /// Treat the input as a shape (nonzero cells) and use its squared
    /// distance to the background
    #[arg(long)]
    from_mask: bool,
    /// Drop the (1 + λ) factor
    #[arg(long)]
    no_scale_factor: bool,
    /// Also write the suplevel set {map > t}
    #[arg(long, requires = "suplevel_output")]
    threshold: Option<f64>,
    #[arg(long)]
    suplevel_output: Option<PathBuf>,
    /// Output map (.csv or .pgm)
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct IntersectCmd {
    /// Binary set (nonzero = in the set)
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    env: EnvelopeArgs,
    /// Use 4λ for the inner upper transform as well
    #[arg(long)]
    inner_4lambda: bool,
    /// Also write local maxima above this fraction of the global maximum
    #[arg(long, requires = "maxima_output")]
    maxima_fraction: Option<f64>,
    #[arg(long)]
    maxima_output: Option<PathBuf>,
    /// Output filter (.csv or .pgm)
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct RestoreArgs {
    /// Extension constant M (default: sup_K |f| + λ(h·max dim)² + 1)
    #[arg(long)]
    big_m: Option<f64>,
}

#[derive(Args, Debug)]
struct InpaintCmd {
    #[command(flatten)]
    input: InputArgs,
    /// Damaged cells (nonzero = damaged)
    #[arg(long)]
    damaged: PathBuf,
    #[command(flatten)]
    env: EnvelopeArgs,
    #[command(flatten)]
    restore: RestoreArgs,
    /// Clean image for PSNR scoring
    #[arg(long)]
    reference: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct DenoiseCmd {
    /// Clean image; noise is added, then removed
    #[command(flatten)]
    input: InputArgs,
    /// Fraction of corrupted cells
    #[arg(long)]
    density: f64,
    /// Noise seed
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    env: EnvelopeArgs,
    #[command(flatten)]
    restore: RestoreArgs,
    /// Also write the corrupted image
    #[arg(long)]
    noisy_output: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum OracleArg {
    Ex1d,
    Ex2d,
    #[value(name = "ex1d_inf", alias = "ex1d-inf")]
    Ex1dInf,
    #[value(name = "ex2d_inf", alias = "ex2d-inf")]
    Ex2dInf,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum StudyScheme {
    Moreau,
    Convex,
    Both,
}

#[derive(Args, Debug)]
struct StudyCmd {
    #[arg(long, value_enum)]
    oracle: OracleArg,
    /// Grid sizes, comma separated
    #[arg(long = "h", value_delimiter = ',', required = true)]
    spacings: Vec<f64>,
    /// Curvature modules, comma separated
    #[arg(long = "lambda", value_delimiter = ',', required = true)]
    lambdas: Vec<f64>,
    #[arg(long, value_enum, default_value = "moreau")]
    scheme: StudyScheme,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Extension width a for the *_inf oracles
    #[arg(long, default_value_t = 1.0)]
    pad_a: f64,
    /// Stand-in for +∞ in the *_inf oracles
    #[arg(long, default_value_t = 1e3)]
    big_m: f64,
    /// Seconds allowed per convex row before it is reported as "-"
    #[arg(long, default_value_t = 300.0)]
    convex_time_limit: f64,
    /// CSV output (default: stdout)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Files written so far, removed again if the command fails.
#[derive(Default)]
struct Outputs {
    written: Vec<PathBuf>,
}

impl Outputs {
    fn field(&mut self, path: &Path, f: &ScalarField) -> Result<()> {
        self.written.push(path.to_path_buf());
        write_field(path, f).with_context(|| format!("writing {}", path.display()))
    }

    fn mask(&mut self, path: &Path, m: &BinaryMask) -> Result<()> {
        self.written.push(path.to_path_buf());
        write_mask(path, m).with_context(|| format!("writing {}", path.display()))
    }

    fn text(&mut self, path: &Path, s: &str) -> Result<()> {
        self.written.push(path.to_path_buf());
        fs::write(path, s).with_context(|| format!("writing {}", path.display()))
    }

    fn report(&mut self, path: Option<&Path>, value: &impl serde::Serialize) -> Result<()> {
        let json = serde_json::to_string_pretty(value)?;
        match path {
            Some(p) => self.text(p, &(json + "\n")),
            None => {
                println!("{json}");
                Ok(())
            }
        }
    }

    fn discard(self) {
        for p in self.written {
            let _ = fs::remove_file(p);
        }
    }
}

fn baseline(stop: StopRule, max_iterations: usize, l2: bool) -> Result<BaselineParams> {
    let p = BaselineParams::default()
        .with_max_iterations(max_iterations)
        .with_norm(if l2 { DiffNorm::L2 } else { DiffNorm::Linf });
    Ok(match stop {
        StopRule::Tolerance(eps) => p.with_tol(eps),
        StopRule::Iterations(m) => p.with_tol(f64::MIN_POSITIVE).with_max_iterations(m),
        StopRule::ExactBound => bail!("the convex scheme has no exact iteration bound; use tol= or iters="),
    })
}

fn load_damaged(path: &Path, f: &ScalarField) -> Result<BinaryMask> {
    let damaged = read_mask(path, None).with_context(|| format!("reading {}", path.display()))?;
    if damaged.dims() != f.dims() {
        bail!("mask dims {:?} do not match image dims {:?}", damaged.dims(), f.dims());
    }
    Ok(damaged.complement())
}

fn cmd_envelope(c: &EnvelopeCmd, out: &mut Outputs) -> Result<()> {
    let f = c.input.field()?;
    let p = c.env.params();
    let (g, report) = match c.kind {
        EnvelopeKind::Lower => moreau_lower_iterative(&f, &p)?,
        EnvelopeKind::Upper => moreau_upper(&f, &p)?,
    };
    out.field(&c.out.output, &g)?;
    out.report(c.out.report.as_deref(), &report)
}

fn cmd_transform(c: &TransformCmd, out: &mut Outputs) -> Result<()> {
    let f = c.input.field()?;
    let p = c.env.params();
    let known = match (&c.damaged, c.kind) {
        (Some(path), TransformKind::Average) => load_damaged(path, &f)?,
        (Some(_), _) => bail!("--damaged only applies to the average transform"),
        (None, _) => BinaryMask::full(f.dims())?,
    };
    let r: TransformResult = match c.scheme {
        SchemeArg::Moreau => match c.kind {
            TransformKind::Lower => lower_transform(&f, &p)?,
            TransformKind::Upper => upper_transform(&f, &p)?,
            TransformKind::LocalLower => local_lower_transform(&f, &p)?,
            TransformKind::LocalUpper => local_upper_transform(&f, &p)?,
            TransformKind::Average => average_transform(&f, &known, c.big_m, &p)?,
        },
        SchemeArg::Convex => {
            let bp = baseline(p.stop, c.max_iterations, c.l2)?;
            let l = p.lambda;
            match c.kind {
                TransformKind::Lower => lower_transform_convex(&f, l, &bp)?,
                TransformKind::Upper => upper_transform_convex(&f, l, &bp)?,
                TransformKind::LocalLower => local_lower_transform_convex(&f, l, &bp)?,
                TransformKind::LocalUpper => local_upper_transform_convex(&f, l, &bp)?,
                TransformKind::Average => average_transform_convex(&f, &known, l, c.big_m, &bp)?,
            }
        }
    };
    out.field(&c.out.output, r.field())?;
    out.report(c.out.report.as_deref(), &r.summary())
}

fn cmd_medial_axis(c: &MedialAxisCmd, out: &mut Outputs) -> Result<()> {
    let p = c.env.params();
    let scale = !c.no_scale_factor;
    let map = if c.from_mask {
        let (shape, h) = c.input.mask()?;
        medial_axis_of_set(&shape, h, c.env.lambda, scale, &p)?
    } else {
        medial_axis_map(&c.input.field()?, c.env.lambda, scale, &p)?
    };
    out.field(&c.output, &map)?;
    if let (Some(t), Some(path)) = (c.threshold, &c.suplevel_output) {
        out.mask(path, &suplevel_mask(&map, t))?;
    }
    Ok(())
}

fn cmd_intersect(c: &IntersectCmd, out: &mut Outputs) -> Result<()> {
    let (set, h) = c.input.mask()?;
    let filt = intersection_filter(&set, h, c.env.lambda, &c.env.params(), c.inner_4lambda)?;
    out.field(&c.output, &filt)?;
    if let (Some(frac), Some(path)) = (c.maxima_fraction, &c.maxima_output) {
        let peaks = local_maxima(&filt, frac * filt.max());
        out.mask(path, &peaks)?;
    }
    Ok(())
}

fn cmd_inpaint(c: &InpaintCmd, out: &mut Outputs) -> Result<()> {
    let f = c.input.field()?;
    let known = load_damaged(&c.damaged, &f)?;
    let (restored, mut report) = inpaint(&f, &known, c.env.lambda, c.restore.big_m, &c.env.params())?;
    if let Some(path) = &c.reference {
        let clean = read_field(path, None).with_context(|| format!("reading {}", path.display()))?;
        report.score(&clean, &f, &restored)?;
    }
    out.field(&c.out.output, &restored)?;
    out.report(c.out.report.as_deref(), &report)
}

fn cmd_denoise(c: &DenoiseCmd, out: &mut Outputs) -> Result<()> {
    let clean = c.input.field()?;
    let (noisy, known) = salt_pepper(&clean, &NoiseSpec::new(c.density, c.seed))?;
    if !known.any() {
        bail!("every pixel was corrupted; nothing to restore from");
    }
    let (restored, mut report) = denoise(&noisy, &known, c.env.lambda, c.restore.big_m, &c.env.params())?;
    report.score(&clean, &noisy, &restored)?;
    if let Some(path) = &c.noisy_output {
        out.field(path, &noisy)?;
    }
    out.field(&c.out.output, &restored)?;
    out.report(c.out.report.as_deref(), &report)
}

fn cmd_study(c: &StudyCmd, out: &mut Outputs) -> Result<()> {
    let oracle = match c.oracle {
        OracleArg::Ex1d => StudyOracle::Ex1d,
        OracleArg::Ex2d => StudyOracle::Ex2d,
        OracleArg::Ex1dInf => StudyOracle::Ex1dInf,
        OracleArg::Ex2dInf => StudyOracle::Ex2dInf,
    };
    if !(c.convex_time_limit >= 0.0 && c.convex_time_limit.is_finite()) {
        bail!("convex time limit must be a non-negative number of seconds");
    }
    let mut cfg = StudyConfig::new(oracle, c.spacings.clone(), c.lambdas.clone());
    cfg.schemes = match c.scheme {
        StudyScheme::Moreau => vec![Scheme::Moreau],
        StudyScheme::Convex => vec![Scheme::Convex],
        StudyScheme::Both => vec![Scheme::Moreau, Scheme::Convex],
    };
    cfg.tol = c.tol;
    cfg.pad_a = c.pad_a;
    cfg.big_m = c.big_m;
    cfg.convex_time_limit = Some(Duration::from_secs_f64(c.convex_time_limit));
    let csv = rows_to_csv(&run_study(&cfg)?);
    match &c.output {
        Some(path) => out.text(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn run(cli: &Cli, out: &mut Outputs) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow!("configuring thread pool: {e}"))?;
    }
    match &cli.command {
        Command::Envelope(c) => cmd_envelope(c, out),
        Command::Transform(c) => cmd_transform(c, out),
        Command::MedialAxis(c) => cmd_medial_axis(c, out),
        Command::Intersect(c) => cmd_intersect(c, out),
        Command::Inpaint(c) => cmd_inpaint(c, out),
        Command::Denoise(c) => cmd_denoise(c, out),
        Command::Study(c) => cmd_study(c, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = Outputs::default();
    match run(&cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            out.discard();
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
