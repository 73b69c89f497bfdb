mod output;

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcinterp::error_analysis::{
    rand1_grid, rand2_grid, table1_benchmark, Pattern, Scheme, Signal, Table1Row,
};
use mcinterp::generic::{GenericGrid, SampleFunctional};
use mcinterp::image::{
    degrade, recover, test_image, DamageMask, DerivativeSource, GrayImage, Method, RecoveryConfig, RecoveryReport,
};
use mcinterp::signals::{example_signal, example_signal_derivative, TestFunction};
use mcinterp::{Error, SpectralSupport, TrigPolynomial};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use output::{Format, Outputs, Table};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::SingularChannelMatrix { .. }
            | Error::VanishingDenominator { .. }
            | Error::IllConditionedGrid { .. }
            | Error::SingularSystem { .. }
            | Error::InsufficientTailDecay { .. }
            | Error::ZeroVariance => CliError::Numerical(msg),
            Error::Io(m) => CliError::Io(m),
            _ => CliError::Validation(msg),
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

#[derive(Parser)]
#[command(name = "mcinterp", version, about = "Trigonometric interpolation from nonuniform and multichannel samples")]
struct Cli {
    /// Seed for every random draw (grids, masks, trials).
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Delimiter of tabular outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a signal, reconstruct it and write dense values.
    Reconstruct(ReconstructArgs),
    /// Write the Er sequence of one formula over a frequency window.
    ErrorProfile(ProfileArgs),
    /// Run the relative-error benchmark on the test function.
    Table1(Table1Args),
    /// Recover erased pixels of a PGM image.
    Image(ImageArgs),
    /// Write the built-in synthetic test image as PGM.
    TestImage(TestImageArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PatternArg {
    Rn1,
    Rn2,
    Gn1,
    Gn2,
    U1,
    U2,
}

impl From<PatternArg> for Pattern {
    fn from(p: PatternArg) -> Self {
        match p {
            PatternArg::Rn1 => Pattern::Rn1,
            PatternArg::Rn2 => Pattern::Rn2,
            PatternArg::Gn1 => Pattern::Gn1,
            PatternArg::Gn2 => Pattern::Gn2,
            PatternArg::U1 => Pattern::U1,
            PatternArg::U2 => Pattern::U2,
        }
    }
}

#[derive(Args)]
struct SchemeArgs {
    #[arg(long, value_enum)]
    pattern: PatternArg,
    /// Offset α for rn1/rn2 (default π/N).
    #[arg(long)]
    alpha: Option<f64>,
    /// Node file for gn1/gn2: one value in [0, 2π) per line, strictly increasing.
    #[arg(long)]
    nodes: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SignalArg {
    Example,
    Testfn,
    Coeffs,
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Total number of samples N; the band then has N frequencies.
    #[arg(long)]
    samples: Option<usize>,
    /// First frequency of the band (default 1 - N/2, or -(N/2) for odd N).
    #[arg(long, allow_hyphen_values = true)]
    n1: Option<i64>,
    #[arg(long, value_enum, default_value_t = SignalArg::Example)]
    signal: SignalArg,
    /// Coefficient file `n, re, im` for `--signal coeffs`.
    #[arg(long)]
    coeffs: Option<PathBuf>,
    #[arg(long, default_value_t = 512)]
    eval_points: usize,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long, allow_hyphen_values = true, default_value_t = -31)]
    n1: i64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 32)]
    n2: i64,
    /// Window length, either a count or a multiple of the band size such as `3mu`.
    #[arg(long, default_value = "3mu")]
    window: String,
    /// First frequency of the window (default n2 + 1).
    #[arg(long, allow_hyphen_values = true)]
    start: Option<i64>,
}

#[derive(Args)]
struct Table1Args {
    #[arg(long, value_delimiter = ',', default_values_t = [36usize, 54, 72, 108])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Patterns to run (default: all six).
    #[arg(long, value_enum, value_delimiter = ',')]
    patterns: Vec<PatternArg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Gn1crt,
    Gn2crt,
    Medcrt,
    Crtmed,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DerivativeArg {
    Estimate,
    Reference,
}

#[derive(Args)]
struct ImageArgs {
    #[arg(long)]
    input: PathBuf,
    /// Erase this fraction of pixels (input is then the undamaged reference).
    #[arg(long, conflicts_with = "mask")]
    degrade: Option<f64>,
    /// Damage mask PGM, 0 = known, 255 = missing (input is then the damaged image).
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Undamaged image for metrics when `--mask` is used.
    #[arg(long, requires = "mask")]
    reference: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    method: MethodArg,
    #[arg(long, default_value_t = mcinterp::image::DEFAULT_BLOCK)]
    block: usize,
    #[arg(long, default_value_t = mcinterp::image::DEFAULT_CRT_ITERS)]
    crt_iters: usize,
    /// Derivative samples for GN2: estimated from known pixels or taken from the reference.
    #[arg(long, value_enum, default_value_t = DerivativeArg::Estimate)]
    derivative: DerivativeArg,
    /// Median of known neighbours only, instead of the plain 3x3 median.
    #[arg(long)]
    mask_aware_median: bool,
}

#[derive(Args)]
struct TestImageArgs {
    #[arg(long, default_value_t = 256)]
    size: usize,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_nodes(path: &Path) -> Result<GenericGrid, CliError> {
    let nodes = read_text(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(i, l)| {
            l.trim_end_matches(',')
                .parse::<f64>()
                .map_err(|_| invalid(format!("{}: line {}: not a number: {l}", path.display(), i + 1)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GenericGrid::new(nodes)?)
}

struct ExampleSignal;

impl Signal for ExampleSignal {
    fn value(&self, t: f64) -> Complex64 {
        Complex64::new(example_signal(t), 0.0)
    }
    fn derivative(&self, t: f64) -> Complex64 {
        Complex64::new(example_signal_derivative(t), 0.0)
    }
}

/// Build the scheme for `pattern` on a band of `mu` frequencies starting at `n1`.
/// Generic patterns take their grid from the node file or draw it from `seed`.
fn build_scheme(args: &SchemeArgs, grid: Option<GenericGrid>, n1: i64, mu: usize, seed: u64) -> Result<Scheme, CliError> {
    let pattern = Pattern::from(args.pattern);
    if args.alpha.is_some() && !matches!(pattern, Pattern::Rn1 | Pattern::Rn2) {
        return Err(invalid("--alpha applies to rn1 and rn2 only"));
    }
    let needs_even = !matches!(pattern, Pattern::U1 | Pattern::Gn1);
    if needs_even && !mu.is_multiple_of(2) {
        return Err(invalid(format!("{pattern} needs an even number of samples, got {mu}")));
    }
    let support = SpectralSupport::with_len(n1, mu)?;
    let alpha = args.alpha.unwrap_or(PI / mu as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scheme = match pattern {
        Pattern::Rn1 => Scheme::rn1(mu / 2, alpha, support)?,
        Pattern::Rn2 => Scheme::rn2(mu / 2, alpha, support)?,
        Pattern::U1 => Scheme::u1(support)?,
        Pattern::U2 => Scheme::u2(mu / 2, support)?,
        Pattern::Gn1 => {
            let g = match grid {
                Some(g) => g,
                None => rand1_grid(mu, &mut rng)?,
            };
            Scheme::gn1(&g, support)?
        }
        Pattern::Gn2 => {
            let g = match grid {
                Some(g) => g,
                None => rand2_grid(mu, &mut rng)?,
            };
            Scheme::gn2(&g, n1)?
        }
    };
    Ok(scheme)
}

fn default_n1(mu: usize) -> i64 {
    if mu.is_multiple_of(2) {
        1 - (mu / 2) as i64
    } else {
        -((mu / 2) as i64)
    }
}

/// Node file (if any) and the band size it implies together with `--samples`.
fn resolve_grid(args: &SchemeArgs, samples: Option<usize>) -> Result<(Option<GenericGrid>, usize), CliError> {
    let generic = matches!(args.pattern, PatternArg::Gn1 | PatternArg::Gn2);
    match (&args.nodes, samples) {
        (Some(_), _) if !generic => Err(invalid("--nodes applies to gn1 and gn2 only")),
        (Some(path), s) => {
            let g = read_nodes(path)?;
            let mu = if args.pattern == PatternArg::Gn2 { 2 * g.len() } else { g.len() };
            if let Some(s) = s {
                if s != mu {
                    return Err(invalid(format!("--samples {s} disagrees with {mu} samples from the node file")));
                }
            }
            Ok((Some(g), mu))
        }
        (None, Some(0)) => Err(invalid("--samples must be positive")),
        (None, Some(s)) => Ok((None, s)),
        (None, None) => Err(invalid("--samples (or --nodes for gn1/gn2) is required")),
    }
}

fn cmd_reconstruct(cli: &Cli, a: &ReconstructArgs) -> Result<Outputs, CliError> {
    if a.coeffs.is_some() != (a.signal == SignalArg::Coeffs) {
        return Err(invalid("--coeffs goes together with --signal coeffs"));
    }
    let (grid, mu) = resolve_grid(&a.scheme, a.samples)?;
    if a.eval_points < mu {
        return Err(invalid(format!("--eval-points {} is below the band size {mu}", a.eval_points)));
    }
    let coeffs = match &a.coeffs {
        Some(p) => Some(TrigPolynomial::from_csv(&read_text(p)?)?),
        None => None,
    };
    let signal: &dyn Signal = match (a.signal, &coeffs) {
        (SignalArg::Example, _) => &ExampleSignal,
        (SignalArg::Testfn, _) => &TestFunction,
        (SignalArg::Coeffs, Some(p)) => p,
        (SignalArg::Coeffs, None) => unreachable!("checked above"),
    };
    let n1 = a.n1.unwrap_or(default_n1(mu));
    let scheme = build_scheme(&a.scheme, grid, n1, mu, cli.seed)?;
    let rec = scheme.reconstruct_signal(signal)?;
    let dense = rec.eval_dense(a.eval_points)?;

    let mut table = Table::new(cli.format, &["t", "f", "fhat"]);
    let (mut max_err, mut sq) = (0.0f64, 0.0);
    for (j, fh) in dense.iter().enumerate() {
        let t = std::f64::consts::TAU * j as f64 / a.eval_points as f64;
        let f = signal.value(t);
        let e = (f - fh).norm();
        max_err = max_err.max(e);
        sq += e * e;
        table.row(&[format!("{t:.17e}"), format!("{:.17e}", f.re), format!("{:.17e}", fh.re)]);
    }
    let mut samples = Table::new(cli.format, &["kind", "t", "re", "im"]);
    for f in scheme.functionals() {
        let (kind, t) = match *f {
            SampleFunctional::Value(t) => ("value", t),
            SampleFunctional::Derivative(t) => ("derivative", t),
        };
        let v = signal.sample(f);
        samples.row(&[kind.to_string(), format!("{t:.17e}"), format!("{:.17e}", v.re), format!("{:.17e}", v.im)]);
    }
    println!(
        "pattern={} mu={mu} n1={n1} max_abs_error={max_err:.6e} rms_error={:.6e}",
        scheme.pattern(),
        (sq / a.eval_points as f64).sqrt()
    );
    let ext = cli.format.ext();
    let mut out = Outputs::new(&cli.out);
    out.add(format!("reconstruction.{ext}"), table.into_bytes());
    out.add(format!("samples.{ext}"), samples.into_bytes());
    Ok(out)
}

fn parse_window(s: &str, mu: usize) -> Result<usize, CliError> {
    let s = s.trim();
    let n = if let Some(k) = s.strip_suffix("mu") {
        let k: usize = if k.is_empty() { Ok(1) } else { k.parse() }.map_err(|_| invalid(format!("bad --window {s}")))?;
        k * mu
    } else {
        s.parse().map_err(|_| invalid(format!("bad --window {s}")))?
    };
    if n == 0 {
        return Err(invalid("--window must be positive"));
    }
    Ok(n)
}

fn cmd_error_profile(cli: &Cli, a: &ProfileArgs) -> Result<Outputs, CliError> {
    let support = SpectralSupport::new(a.n1, a.n2)?;
    let mu = support.len();
    let (grid, _) = resolve_grid(&a.scheme, Some(mu))?;
    let len = parse_window(&a.window, mu)?;
    let start = a.start.unwrap_or(a.n2 + 1);
    let end = start + len as i64 - 1;
    if start <= a.n2 && end >= a.n1 {
        return Err(invalid(format!("window {start}..={end} overlaps the band {}..={}", a.n1, a.n2)));
    }
    let scheme = build_scheme(&a.scheme, grid, a.n1, mu, cli.seed)?;
    let profile = scheme.profile(start..=end);
    let mut table = Table::new(cli.format, &["n", "Er", "logEr"]);
    for (n, e) in profile.n.iter().zip(&profile.er) {
        table.row(&[n.to_string(), format!("{e:.17e}"), format!("{:.17e}", e.ln())]);
    }
    let mut out = Outputs::new(&cli.out);
    out.add(format!("error_profile.{}", cli.format.ext()), table.into_bytes());
    Ok(out)
}

fn cmd_table1(cli: &Cli, a: &Table1Args) -> Result<Outputs, CliError> {
    if a.trials == 0 {
        return Err(invalid("--trials must be positive"));
    }
    if let Some(&n) = a.sizes.iter().find(|&&n| n < 2 || n % 2 != 0) {
        return Err(invalid(format!("sizes must be even and at least 2, got {n}")));
    }
    let patterns: Vec<Pattern> = if a.patterns.is_empty() {
        Pattern::ALL.to_vec()
    } else {
        a.patterns.iter().map(|&p| p.into()).collect()
    };
    let mut table = Table::new(cli.format, &Table1Row::HEADER);
    for &n in &a.sizes {
        for &p in &patterns {
            let row = table1_benchmark(n, p, a.trials, cli.seed)?;
            table.row(&row.fields());
        }
    }
    let mut out = Outputs::new(&cli.out);
    out.add(format!("table1.{}", cli.format.ext()), table.into_bytes());
    Ok(out)
}

fn cmd_image(cli: &Cli, a: &ImageArgs) -> Result<Outputs, CliError> {
    if a.degrade.is_none() && a.mask.is_none() {
        return Err(invalid("exactly one of --degrade and --mask is required"));
    }
    let input = GrayImage::read_pgm(&a.input)?;
    let mut out = Outputs::new(&cli.out);
    let (damaged, mask, reference) = match (a.degrade, &a.mask) {
        (Some(f), None) => {
            let (d, m) = degrade(&input, f, cli.seed)?;
            out.add("damaged.pgm", mcinterp::pgm::encode(&d.to_raster()));
            out.add("mask.pgm", mcinterp::pgm::encode(&m.to_raster()));
            (d, m, Some(input))
        }
        (None, Some(p)) => {
            let m = DamageMask::read_pgm(p)?;
            if !m.fits(&input) {
                return Err(invalid("mask and input image differ in size"));
            }
            let r = match &a.reference {
                Some(r) => Some(GrayImage::read_pgm(r)?),
                None => None,
            };
            (input, m, r)
        }
        _ => return Err(invalid("exactly one of --degrade and --mask is required")),
    };
    let derivative = match (a.derivative, &reference) {
        (DerivativeArg::Estimate, _) => DerivativeSource::Estimate,
        (DerivativeArg::Reference, Some(r)) => DerivativeSource::Reference(r.clone()),
        (DerivativeArg::Reference, None) => {
            return Err(invalid("--derivative reference needs --degrade or --reference"));
        }
    };
    let cfg = RecoveryConfig {
        block_size: a.block,
        crt_max_iters: a.crt_iters,
        derivative,
        mask_aware_median: a.mask_aware_median,
        ..RecoveryConfig::default()
    };
    let methods: Vec<Method> = match a.method {
        MethodArg::Gn1crt => vec![Method::Gn1Crt],
        MethodArg::Gn2crt => vec![Method::Gn2Crt],
        MethodArg::Medcrt => vec![Method::MedCrt],
        MethodArg::Crtmed => vec![Method::CrtMed],
        MethodArg::All => Method::ALL.to_vec(),
    };
    let mut table = Table::new(cli.format, &RecoveryReport::HEADER);
    for m in methods {
        let r = recover(&damaged, &mask, m, &cfg, reference.as_ref())?;
        if let Some(pre) = &r.before_crt {
            let kept = (0..damaged.len()).all(|i| mask.missing()[i] || pre.data()[i] == damaged.data()[i]);
            println!(
                "{}: {} pixels erased, before CRT known pixels {} and output {} the input",
                m.name(),
                mask.count(),
                if kept { "kept" } else { "changed" },
                if pre == &damaged { "equals" } else { "differs from" }
            );
        }
        if !r.report.crt_converged {
            eprintln!("{}: CRT stopped after {} iterations without reaching a fixpoint", m.name(), r.report.crt_iters);
        }
        table.row(&r.report.fields());
        out.add(format!("recovered_{}.pgm", m.name()), mcinterp::pgm::encode(&r.image.to_raster()));
    }
    out.add(format!("metrics.{}", cli.format.ext()), table.into_bytes());
    Ok(out)
}

fn cmd_test_image(cli: &Cli, a: &TestImageArgs) -> Result<Outputs, CliError> {
    let img = test_image(a.size, cli.seed)?;
    let mut out = Outputs::new(&cli.out);
    out.add("test_image.pgm", mcinterp::pgm::encode(&img.to_raster()));
    Ok(out)
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("MCINTERP_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| invalid(format!("MCINTERP_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| invalid(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let outputs = match &cli.command {
        Command::Reconstruct(a) => cmd_reconstruct(cli, a)?,
        Command::ErrorProfile(a) => cmd_error_profile(cli, a)?,
        Command::Table1(a) => cmd_table1(cli, a)?,
        Command::Image(a) => cmd_image(cli, a)?,
        Command::TestImage(a) => cmd_test_image(cli, a)?,
    };
    for p in outputs.commit()? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mcinterp: {e}");
            ExitCode::from(e.code())
        }
    }
}
