//! `basinkernel`: render basins, evaluate kernels, generate basis vectors and
//! run the verification suite from the command line.

mod args;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use basinkernel::cuntz::{self, BasisRecord, Word};
use basinkernel::dynamics::{GridSpec, IterConfig};
use basinkernel::kernel::{eval_kernel, KernelConfig};
use basinkernel::verify::{self, SuiteConfig, Tolerances};
use basinkernel::{dynamics, par, raster, Complex64, Exec, FamilyIndex, FamilyMember};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::args::{parse_complex, parse_member};

#[derive(Parser, Debug)]
#[command(name = "basinkernel", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render the basin of 0 as a PGM or PPM image.
    Basin(BasinArgs),
    /// Evaluate the product kernel at point pairs, as CSV.
    Kernel(KernelArgs),
    /// Generate basis vectors b_v as JSON.
    Basis(BasisArgs),
    /// Run the verification suite and write CSV/JSON reports.
    Verify(VerifyArgs),
    /// Coefficient distances of b_v along a path a_k -> a_lim, as CSV.
    Continuity(ContinuityArgs),
}

#[derive(Args, Debug)]
struct FamilyArgs {
    /// Family index n (degree 2^(n+2)).
    #[arg(long, default_value_t = 0)]
    n: u32,
    /// Parameter a as `re,im` or `re`.
    #[arg(long, default_value = "1,0", value_parser = parse_complex, allow_hyphen_values = true)]
    a: Complex64,
}

impl FamilyArgs {
    fn member(&self) -> Result<FamilyMember> {
        Ok(FamilyMember::new(self.n, self.a)?)
    }
}

#[derive(Args, Debug)]
struct IterArgs {
    #[arg(long, default_value_t = IterConfig::default().max_iters)]
    max_iters: usize,
    #[arg(long, default_value_t = IterConfig::default().escape_radius)]
    escape_radius: f64,
    #[arg(long, default_value_t = IterConfig::default().convergence_radius)]
    convergence_radius: f64,
    #[arg(long, default_value_t = IterConfig::default().series_tail_eps)]
    series_tail_eps: f64,
}

impl IterArgs {
    fn config(&self) -> Result<IterConfig> {
        let cfg = IterConfig {
            max_iters: self.max_iters,
            escape_radius: self.escape_radius,
            convergence_radius: self.convergence_radius,
            series_tail_eps: self.series_tail_eps,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ImageFormat {
    Pgm,
    Ppm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BasinTest {
    Limit,
    Series,
}

#[derive(Args, Debug)]
struct BasinArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value = "0,0", value_parser = parse_complex, allow_hyphen_values = true)]
    center: Complex64,
    #[arg(long, default_value_t = 2.0)]
    half_width: f64,
    /// Image width in pixels.
    #[arg(long, default_value_t = 512)]
    px: usize,
    /// Image height in pixels; defaults to `--px`.
    #[arg(long)]
    height: Option<usize>,
    /// Membership test used for shading.
    #[arg(long, value_enum, default_value_t = BasinTest::Limit)]
    test: BasinTest,
    /// Output format; inferred from the `--output` extension when omitted.
    #[arg(long, value_enum)]
    format: Option<ImageFormat>,
    #[arg(short, long, default_value = "basin.pgm")]
    output: PathBuf,
    #[command(flatten)]
    iter: IterArgs,
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// First point (repeatable, paired with `--w` in order).
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    z: Vec<Complex64>,
    /// Second point (repeatable).
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    w: Vec<Complex64>,
    /// CSV file with header `z_re,z_im,w_re,w_im`; rows are appended after
    /// any `--z/--w` pairs.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = KernelConfig::default().max_factors)]
    max_factors: usize,
    #[arg(long, default_value_t = KernelConfig::default().tail_eps)]
    tail_eps: f64,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BasisArgs {
    #[arg(long, default_value_t = 0)]
    n: u32,
    /// Word over {0,1}; the empty string gives the constant 1.
    #[arg(long, default_value = "")]
    word: String,
    /// Emit every canonical word up to `--max-len` as a JSON array.
    #[arg(long, requires = "max_len")]
    all: bool,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = SuiteConfig::default().seed)]
    seed: u64,
    /// Override every tolerance with one value.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Family member `n:re,im` (repeatable); the default corners when omitted.
    #[arg(long = "member", value_parser = parse_member, allow_hyphen_values = true)]
    members: Vec<(u32, Complex64)>,
    #[arg(long, default_value_t = SuiteConfig::default().grid_px)]
    grid_px: usize,
    /// CSV report path; the CSV goes to stdout when neither report path is given.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON report path (includes residual sequences and notes).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Run every check on the calling thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PathKind {
    /// a_k = a_lim (1 + 1/k)
    Harmonic,
    /// a_k = a_lim (1 + 10^-k)
    Geometric,
    /// a_k = a_lim
    Constant,
}

#[derive(Args, Debug)]
struct ContinuityArgs {
    #[arg(long, default_value_t = 0)]
    n: u32,
    #[arg(long)]
    word: String,
    #[arg(long, default_value = "1,0", value_parser = parse_complex, allow_hyphen_values = true)]
    a_lim: Complex64,
    #[arg(long, value_enum, default_value_t = PathKind::Harmonic)]
    path: PathKind,
    #[arg(long, default_value_t = 10)]
    steps: u32,
    /// Disk radius for the sup-norm bound; 1 gives the plain coefficient distance.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    configure_threads()?;
    match cli.command {
        Command::Basin(a) => cmd_basin(&a),
        Command::Kernel(a) => cmd_kernel(&a),
        Command::Basis(a) => cmd_basis(&a),
        Command::Verify(a) => return cmd_verify(&a),
        Command::Continuity(a) => cmd_continuity(&a),
    }?;
    Ok(ExitCode::SUCCESS)
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("BASINKERNEL_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().with_context(|| {
        format!("BASINKERNEL_THREADS must be a non-negative integer, got {raw:?}")
    })?;
    par::configure_threads(threads)?;
    Ok(())
}

fn cmd_basin(args: &BasinArgs) -> Result<()> {
    let fm = args.family.member()?;
    let cfg = args.iter.config()?;
    let grid = GridSpec::new(
        args.center,
        args.half_width,
        args.px,
        args.height.unwrap_or(args.px),
    )?;
    let format = match args.format {
        Some(f) => f,
        None => match args.output.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("ppm") => ImageFormat::Ppm,
            Some(e) if e.eq_ignore_ascii_case("pgm") => ImageFormat::Pgm,
            _ => bail!(
                "cannot infer the image format from {:?}; pass --format",
                args.output
            ),
        },
    };
    let img = match args.test {
        BasinTest::Limit => dynamics::render_basin(&fm, &grid, &cfg, Exec::Parallel)?,
        BasinTest::Series => dynamics::render_basin_series(&fm, &grid, &cfg, Exec::Parallel)?,
    };
    let mut buf = Vec::new();
    match format {
        ImageFormat::Pgm => raster::write_pgm(&img, &mut buf)?,
        ImageFormat::Ppm => raster::write_ppm(&img, &mut buf)?,
    }
    output::write_atomic(&args.output, &buf)
}

fn cmd_kernel(args: &KernelArgs) -> Result<()> {
    let fm = args.family.member()?;
    let cfg = KernelConfig {
        max_factors: args.max_factors,
        tail_eps: args.tail_eps,
    };
    cfg.validate()?;
    if args.z.len() != args.w.len() {
        bail!(
            "--z given {} times but --w {} times",
            args.z.len(),
            args.w.len()
        );
    }
    let mut pairs: Vec<(Complex64, Complex64)> =
        args.z.iter().copied().zip(args.w.iter().copied()).collect();
    if let Some(path) = &args.input {
        pairs.extend(output::read_point_pairs(path)?);
    }
    if pairs.is_empty() {
        bail!("no points: pass --z/--w pairs or --input");
    }
    let values = par::map_slice(&pairs, Exec::Parallel, |&(z, w)| {
        eval_kernel(&fm, z, w, &cfg)
    });
    let rows = pairs
        .iter()
        .zip(&values)
        .map(|(&(z, w), k)| output::KernelRow::new(z, w, k));
    let buf = output::kernel_csv(rows)?;
    output::emit(args.output.as_deref(), &buf)
}

fn cmd_basis(args: &BasisArgs) -> Result<()> {
    let index = FamilyIndex::new(args.n)?;
    let json = if args.all {
        let max_len = args.max_len.unwrap_or_default();
        let records = cuntz::enumerate_canonical(max_len)?
            .iter()
            .map(|v| Ok(BasisRecord::new(index, &cuntz::basis_vector(index, v)?)))
            .collect::<Result<Vec<_>>>()?;
        serde_json::to_string_pretty(&records)?
    } else {
        let word: Word = args.word.parse()?;
        let bv = cuntz::basis_vector(index, &word)?;
        serde_json::to_string_pretty(&BasisRecord::new(index, &bv))?
    };
    output::emit(args.output.as_deref(), format!("{json}\n").as_bytes())
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let members = if args.members.is_empty() {
        verify::default_corners()
    } else {
        args.members
            .iter()
            .map(|&(n, a)| FamilyMember::new(n, a))
            .collect::<basinkernel::Result<Vec<_>>>()?
    };
    let mut cfg = SuiteConfig {
        seed: args.seed,
        grid_px: args.grid_px,
        ..SuiteConfig::default()
    };
    if let Some(t) = args.tolerance {
        if t.is_nan() || t < 0.0 {
            bail!("--tolerance must be non-negative, got {t}");
        }
        cfg.tolerances = Tolerances::uniform(t);
    }
    GridSpec::square(Complex64::new(0.0, 0.0), cfg.grid_half_width, cfg.grid_px)?;
    let exec = if args.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };

    let reports = verify::run_all(&members, &cfg, exec);
    let csv = verify::reports_to_csv(&reports);
    let json = verify::reports_to_json(&reports);
    if let Some(path) = &args.csv {
        output::write_atomic(path, csv.as_bytes())?;
    }
    if let Some(path) = &args.json {
        output::write_atomic(path, format!("{json}\n").as_bytes())?;
    }
    if args.csv.is_none() && args.json.is_none() {
        print!("{csv}");
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed).collect();
    for r in &failed {
        eprintln!(
            "FAIL {} n={:?} a={:?}: max_residual {:e} > {:e}",
            r.check_name, r.params.n, r.params.a, r.max_residual, r.params.tolerance
        );
    }
    eprintln!("{} checks, {} failed", reports.len(), failed.len());
    Ok(if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_continuity(args: &ContinuityArgs) -> Result<()> {
    let index = FamilyIndex::new(args.n)?;
    let word: Word = args.word.parse()?;
    let lim = args.a_lim;
    let path: Vec<Complex64> = match args.path {
        PathKind::Harmonic => (1..=args.steps)
            .map(|k| lim * (1.0 + 1.0 / f64::from(k)))
            .collect(),
        PathKind::Geometric => verify::geometric_path(lim, args.steps),
        PathKind::Constant => vec![lim; args.steps as usize],
    };
    let d = cuntz::continuity_modulus(index, &word, &path, lim, args.radius)?;
    let buf = output::continuity_csv(&path, &d)?;
    output::emit(args.output.as_deref(), &buf)
}
