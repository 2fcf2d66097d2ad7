//! The `sinf` command line.
//!
//! Every subcommand writes CSV (or `key=value` lines for the two metadata
//! commands) to stdout or `--out`. Floats use `%.12g`. Errors produce a
//! single stderr line `error: kind=<kind> exit=<code> msg=<text>`.
//!
//! Diagnostic CSV columns:
//!
//! * `diagnose lemma32`: `ideal,norm,dual_min_scaled,r,norm_r2,count`.
//!   `ideal` lists prime factors as `p` (inert) or `p/root`, joined by `*`;
//!   `dual_min_scaled` is `N(a) * lambda_1(dual)^2`; `count` is the number of
//!   nonzero dual vectors of length `<= r`.
//! * `diagnose lemma33`: `ideal,norm,H,count,predicted,rel_err,threshold,exact_branch`.
//!   `count` is `sum over eta in a of w(eta/H)`, `predicted` is
//!   `H^2 w^(0) / N(a)`, `exact_branch` is 1 when `N(a) >= threshold`, where
//!   only `eta = 0` can contribute and `count = w(0)`.
//! * `diagnose condensation`: `ideal,norm,points,in_ideal,mismatches`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::arith::ls_slope;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::ideals::{
    condensation_sum, dual_lattice_count, dual_minimum_scaled, enumerate_squarefree_ideals,
    ideal_lattice, ideal_smoothed_count, smoothed_count_threshold, SplitType, SquarefreeIdeal,
};
use crate::output::{csv_field, fmt_g};
use crate::primes::{build_grid, PrefixGrid};
use crate::singular::{montgomery_table, residue_rk, singular_sums_smoothed, SingularSeries, MAX_CUTOFF};
use crate::smoothing::TestFunction;
use crate::stats::{variance_profile, z_baseline, Sampler};

const EXIT_HELP: &str = "\
Exit codes:
  0  success
  1  other failure (overflow, quadrature, malformed grid file, ...)
  2  usage error or invalid argument
  3  invalid field specification
  4  work budget exceeded
  5  query outside the grid extent
  6  I/O error

Fields are written D=<int>[,half]; `half` selects the basis {1, (1+sqrt D)/2}
and is required exactly when D = 1 mod 4.";

#[derive(Parser, Debug)]
#[command(
    name = "sinf",
    version,
    about = "Singular series over quadratic fields and variance of primes in short intervals",
    after_help = EXIT_HELP
)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Seed for every random choice (jittered sampling).
    #[arg(long, global = true, default_value_t = 0, value_name = "SEED")]
    seed: u64,

    /// File of `key = value` lines; each key becomes `--key=value` unless given on the command line.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Discriminant, basis and residue of the Dedekind zeta function.
    FieldInfo(ResidueArgs),
    /// Residue of zeta_K at s = 1 with a rigorous error bound, as CSV.
    Residue(ResidueArgs),
    /// Prime elements in sup-norm boxes.
    #[command(subcommand)]
    Primes(PrimesCommand),
    /// Truncated singular series at one shift.
    Sstar(SstarArgs),
    /// Smoothed sums of S(eta) - 1 against -w(0) r_K log H^2.
    SumSingular(SumSingularArgs),
    /// Integer baseline sum_{h<=H} (S(h) - 1)(1 - h/H) at dyadic H.
    Montgomery(MontgomeryArgs),
    /// V/E against 1 - delta for boxes of half-width H = X^delta.
    Variance(VarianceArgs),
    /// Integer variances V_N and V_Lambda at H = floor(X^delta).
    VarianceZ(VarianceZArgs),
    /// Lattice and Ramanujan-sum diagnostics.
    #[command(subcommand)]
    Diagnose(DiagnoseCommand),
}

#[derive(Args, Debug)]
struct FieldArg {
    /// Field, e.g. D=-1 or D=5,half.
    #[arg(long, value_name = "D=<int>[,half]")]
    field: String,
}

impl FieldArg {
    fn parse(&self) -> Result<FieldSpec> {
        self.field.parse()
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file (default: stdout).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Metadata JSON path (default: <out>.meta.json; none when writing to stdout).
    #[arg(long, value_name = "PATH")]
    meta: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ResidueArgs {
    #[command(flatten)]
    field: FieldArg,

    /// Absolute error tolerance for the residue (dimensionless).
    #[arg(long, default_value_t = 1e-8, value_name = "TOL")]
    tol: f64,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Subcommand, Debug)]
enum PrimesCommand {
    /// Number of prime elements alpha with sup|m(alpha) - center| <= H.
    Count(PrimesCountArgs),
    /// Build the prefix-count grid of [-R, R]^2 and save it.
    Grid(PrimesGridArgs),
}

#[derive(Args, Debug)]
struct PrimesCountArgs {
    #[command(flatten)]
    field: FieldArg,

    /// Box center in basis coordinates, `x,y` (real).
    #[arg(long, value_name = "X,Y", allow_hyphen_values = true)]
    center: String,

    /// Box half-width in coordinate units (real, >= 0).
    #[arg(long = "H", value_name = "H")]
    height: f64,

    /// Reuse a saved grid instead of building one.
    #[arg(long, value_name = "PATH")]
    grid: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PrimesGridArgs {
    #[command(flatten)]
    field: FieldArg,

    /// Grid half-width R in coordinate units (integer).
    #[arg(long, value_name = "R")]
    extent: i64,

    /// Binary grid file to write.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,

    /// Metadata JSON path (default: <out>.meta.json).
    #[arg(long, value_name = "PATH")]
    meta: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SstarArgs {
    #[command(flatten)]
    field: FieldArg,

    /// Shift in basis coordinates, `k1,k2` (integers, not both 0).
    #[arg(long, value_name = "K1,K2", allow_hyphen_values = true)]
    eta: String,

    /// Largest prime-ideal norm kept in the Euler product.
    #[arg(long, default_value_t = 100_000, value_name = "P")]
    cutoff: u64,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WeightArg {
    Square,
    Disc,
    Triangle,
}

impl WeightArg {
    fn function(self) -> TestFunction {
        match self {
            WeightArg::Square => TestFunction::square(),
            WeightArg::Disc => TestFunction::disc(),
            WeightArg::Triangle => TestFunction::triangle(),
        }
    }

    fn planar(self) -> Result<TestFunction> {
        match self {
            WeightArg::Triangle => Err(Error::InvalidArgument(
                "--w triangle applies only to the integer baseline".into(),
            )),
            other => Ok(other.function()),
        }
    }
}

#[derive(Args, Debug)]
struct SumSingularArgs {
    #[command(flatten)]
    field: FieldArg,

    /// Heights H (coordinate units, >= 2), comma separated or lo:hi:step.
    #[arg(long = "H", value_name = "H[,H...]")]
    heights: String,

    /// Test function: square (sup-norm autocorrelation) or disc (Euclidean).
    #[arg(long, value_enum, default_value = "disc", value_name = "KIND")]
    w: WeightArg,

    /// Euler-product cutoff P (default: norm bound of the support, so only
    /// the tail factors of shifts are truncated).
    #[arg(long, value_name = "P")]
    cutoff: Option<u64>,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct MontgomeryArgs {
    /// Largest height (integer); rows at powers of two from --Hmin.
    #[arg(long = "Hmax", default_value_t = 131_072, value_name = "H")]
    hmax: u64,

    /// Smallest height (integer, >= 2).
    #[arg(long = "Hmin", default_value_t = 2, value_name = "H")]
    hmin: u64,

    /// Rows with H at least this enter the slope fit.
    #[arg(long = "fit-min", default_value_t = 1024, value_name = "H")]
    fit_min: u64,

    /// Euler-product cutoff P over rational primes.
    #[arg(long, default_value_t = 1_000_000, value_name = "P")]
    cutoff: u64,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SamplerArg {
    Exhaustive,
    Jitter,
}

#[derive(Args, Debug)]
struct VarianceArgs {
    #[command(flatten)]
    field: FieldArg,

    /// Sampling radius X in coordinate units (integer).
    #[arg(long = "X", default_value_t = 1000, value_name = "X")]
    x: i64,

    /// Exponents delta in (0, 1): lo:hi:step or a comma list.
    #[arg(long, default_value = "0.1:0.9:0.1", value_name = "DELTAS")]
    deltas: String,

    /// Center sampler.
    #[arg(long, value_enum, default_value = "exhaustive", value_name = "KIND")]
    sampler: SamplerArg,

    /// Strata per unit cell side for the jitter sampler.
    #[arg(long, default_value_t = 2, value_name = "Q")]
    q: u32,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct VarianceZArgs {
    /// Range of the integer centers, 0 <= x < X.
    #[arg(long = "X", default_value_t = 100_000, value_name = "X")]
    x: u64,

    /// Exponents delta in (0, 1): lo:hi:step or a comma list.
    #[arg(long, default_value = "0.5", value_name = "DELTAS")]
    deltas: String,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Subcommand, Debug)]
enum DiagnoseCommand {
    /// Dual-lattice point counts of squarefree ideals.
    Lemma32(Lemma32Args),
    /// Smoothed lattice-point counts of squarefree ideals.
    Lemma33(Lemma33Args),
    /// Check sum_{q | c} c_q(eta) = N c [eta in c] over a box of shifts.
    Condensation(CondensationArgs),
}

#[derive(Args, Debug)]
struct Lemma32Args {
    #[command(flatten)]
    field: FieldArg,

    /// Largest ideal norm.
    #[arg(long = "max-norm", default_value_t = 50, value_name = "N")]
    max_norm: u64,

    /// Radii (Euclidean, in dual coordinates), comma separated.
    #[arg(long, default_value = "0.05,0.1,0.2,0.5,1", value_name = "R[,R...]")]
    radii: String,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct Lemma33Args {
    #[command(flatten)]
    field: FieldArg,

    /// Height H (coordinate units).
    #[arg(long = "H", default_value_t = 50.0, value_name = "H")]
    height: f64,

    /// Test function: square or disc.
    #[arg(long, value_enum, default_value = "square", value_name = "KIND")]
    w: WeightArg,

    /// Largest ideal norm.
    #[arg(long = "max-norm", default_value_t = 100, value_name = "N")]
    max_norm: u64,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct CondensationArgs {
    #[command(flatten)]
    field: FieldArg,

    /// Largest norm of c.
    #[arg(long = "max-norm", default_value_t = 200, value_name = "N")]
    max_norm: u64,

    /// Shifts range over [-B, B]^2 in basis coordinates.
    #[arg(long = "box", default_value_t = 20, value_name = "B")]
    half_width: i64,

    #[command(flatten)]
    output: OutputArgs,
}

/// Exit status for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) => 2,
        Error::InvalidField(_) => 3,
        Error::Budget { .. } => 4,
        Error::OutOfExtent { .. } => 5,
        Error::Io(_) => 6,
        _ => 1,
    }
}

fn error_line(kind: &str, code: i32, msg: &str) -> String {
    let msg = msg.split_whitespace().collect::<Vec<_>>().join(" ");
    format!("error: kind={kind} exit={code} msg={msg}")
}

/// Runs the CLI on `args` (program name first) with the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit streams, for embedding and tests.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match apply_config(args) {
        Ok(a) => a,
        Err(e) => {
            let code = exit_code(&e);
            let _ = writeln!(stderr, "{}", error_line(e.kind(), code, &e.to_string()));
            return code;
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(stderr, "{}", e.render());
                    2
                }
                _ => {
                    let rendered = e.render().to_string();
                    let first = rendered.lines().next().unwrap_or("usage error");
                    let first = first.trim_start_matches("error: ");
                    let _ = writeln!(stderr, "{}", error_line("usage", 2, first));
                    2
                }
            };
        }
    };
    let echoed: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    // stdout output is buffered so the work can run inside a sized pool
    let mut buf = Vec::new();
    let result = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
            .and_then(|pool| pool.install(|| dispatch(&cli, &echoed, &mut buf))),
        None => dispatch(&cli, &echoed, &mut buf),
    };
    let result = result.and_then(|()| Ok(stdout.write_all(&buf)?));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(&e);
            let _ = writeln!(stderr, "{}", error_line(e.kind(), code, &e.to_string()));
            code
        }
    }
}

/// Appends `--key=value` for every config entry whose flag is absent from `args`.
fn apply_config(mut args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        } else if s == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path)?;
    let given: Vec<String> = args
        .iter()
        .filter_map(|a| {
            let s = a.to_string_lossy();
            s.strip_prefix("--").map(|f| f.split('=').next().unwrap_or_default().to_string())
        })
        .collect();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("{}:{}: expected key = value", path.display(), lineno + 1))
        })?;
        let (key, value) = (key.trim().trim_start_matches("--"), value.trim());
        if key == "config" || given.iter().any(|g| g == key) {
            continue;
        }
        args.push(format!("--{key}={value}").into());
    }
    Ok(args)
}

/// Parses `lo:hi:step` or a comma list of reals.
pub fn parse_real_list(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("expected lo:hi:step or a comma list, got {s:?}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let (lo, hi, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || !(hi >= lo) {
            return Err(bad());
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        // round away the binary noise of lo + i*step
        Ok((0..n)
            .map(|i| format!("{:.12}", lo + i as f64 * step).parse().unwrap())
            .collect())
    } else {
        s.split(',').map(num).collect()
    }
}

fn parse_pair<T: std::str::FromStr>(s: &str, what: &str) -> Result<(T, T)> {
    let bad = || Error::InvalidArgument(format!("{what} must be two comma-separated numbers, got {s:?}"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

struct Sink<'a> {
    file: Option<(PathBuf, BufWriter<File>)>,
    stdout: &'a mut dyn Write,
    meta: Option<PathBuf>,
}

impl<'a> Sink<'a> {
    fn open(output: &OutputArgs, stdout: &'a mut dyn Write) -> Result<Self> {
        let file = match &output.out {
            Some(p) => Some((p.clone(), BufWriter::new(File::create(p)?))),
            None => None,
        };
        let meta = output.meta.clone().or_else(|| output.out.as_deref().map(sidecar_path));
        Ok(Sink { file, stdout, meta })
    }

    fn line(&mut self, s: &str) -> Result<()> {
        match &mut self.file {
            Some((_, f)) => writeln!(f, "{s}")?,
            None => writeln!(self.stdout, "{s}")?,
        }
        Ok(())
    }

    fn finish(mut self, meta: Value) -> Result<()> {
        if let Some((_, f)) = &mut self.file {
            f.flush()?;
        }
        if let Some(path) = &self.meta {
            write_meta(path, &meta)?;
        }
        Ok(())
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_meta(path: &Path, meta: &Value) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, meta).map_err(io::Error::from)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

fn base_meta(cli: &Cli, echoed: &[String], command: &str) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cli.seed,
        "args": echoed,
    })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Some(a), Value::Object(b)) = (a.as_object_mut(), b) {
        a.extend(b);
    }
    a
}

fn dispatch(cli: &Cli, echoed: &[String], stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::FieldInfo(a) => field_info(a, stdout),
        Command::Residue(a) => residue(cli, echoed, a, stdout),
        Command::Primes(PrimesCommand::Count(a)) => primes_count(a, stdout),
        Command::Primes(PrimesCommand::Grid(a)) => primes_grid(cli, echoed, a, stdout),
        Command::Sstar(a) => sstar(cli, echoed, a, stdout),
        Command::SumSingular(a) => sum_singular(cli, echoed, a, stdout),
        Command::Montgomery(a) => montgomery(cli, echoed, a, stdout),
        Command::Variance(a) => variance(cli, echoed, a, stdout),
        Command::VarianceZ(a) => variance_z(cli, echoed, a, stdout),
        Command::Diagnose(DiagnoseCommand::Lemma32(a)) => lemma32(cli, echoed, a, stdout),
        Command::Diagnose(DiagnoseCommand::Lemma33(a)) => lemma33(cli, echoed, a, stdout),
        Command::Diagnose(DiagnoseCommand::Condensation(a)) => condensation(cli, echoed, a, stdout),
    }
}

fn field_info(a: &ResidueArgs, stdout: &mut dyn Write) -> Result<()> {
    let field = a.field.parse()?;
    let r = residue_rk(&field, a.tol)?;
    let (t, n) = field.min_poly();
    let omega = match field.basis() {
        crate::field::BasisKind::SqrtD => "sqrt(D)",
        crate::field::BasisKind::HalfBasis => "(1+sqrt(D))/2",
    };
    let mut sink = Sink::open(&a.output, stdout)?;
    sink.line(&format!("field={field}"))?;
    sink.line(&format!("D={}", field.d()))?;
    sink.line(&format!("d_K={}", field.discriminant()))?;
    sink.line(&format!("basis=1,{omega}"))?;
    sink.line(&format!("min_poly=x^2 - {t}x - {n}"))?;
    sink.line(&format!("signature={}", if field.is_real() { "real" } else { "imaginary" }))?;
    sink.line(&format!("residue={}", fmt_g(r.value)))?;
    sink.line(&format!("residue_error={}", fmt_g(r.error_bound)))?;
    sink.line(&format!("residue_method={}", r.method))?;
    sink.finish(json!({
        "command": "field-info",
        "version": env!("CARGO_PKG_VERSION"),
        "field": field.label(),
        "residue": r.value,
        "residue_error": r.error_bound,
    }))
}

fn residue(cli: &Cli, echoed: &[String], a: &ResidueArgs, stdout: &mut dyn Write) -> Result<()> {
    let field = a.field.parse()?;
    let r = residue_rk(&field, a.tol)?;
    let mut sink = Sink::open(&a.output, stdout)?;
    sink.line("field,residue,error_bound,terms,method")?;
    sink.line(&format!(
        "{},{},{},{},{}",
        csv_field(&field.label()),
        fmt_g(r.value),
        fmt_g(r.error_bound),
        r.terms,
        r.method
    ))?;
    let meta = merge(
        base_meta(cli, echoed, "residue"),
        json!({"field": field.label(), "residue": r.value, "residue_error": r.error_bound}),
    );
    sink.finish(meta)
}

fn primes_count(a: &PrimesCountArgs, stdout: &mut dyn Write) -> Result<()> {
    let field = a.field.parse()?;
    let (x, y): (f64, f64) = parse_pair(&a.center, "--center")?;
    if !(a.height >= 0.0) || !x.is_finite() || !y.is_finite() {
        return Err(Error::InvalidArgument("center and H must be finite, H >= 0".into()));
    }
    let grid = match &a.grid {
        Some(path) => {
            let g = PrefixGrid::load(path)?;
            if g.field() != field {
                return Err(Error::FieldMismatch(g.field().label(), field.label()));
            }
            g
        }
        None => {
            let reach = x.abs().max(y.abs()) + a.height;
            build_grid(&field, reach.ceil() as i64 + 1)?
        }
    };
    writeln!(stdout, "{}", grid.count_primes_box((x, y), a.height)?)?;
    Ok(())
}

fn primes_grid(cli: &Cli, echoed: &[String], a: &PrimesGridArgs, stdout: &mut dyn Write) -> Result<()> {
    let field = a.field.parse()?;
    let grid = build_grid(&field, a.extent)?;
    grid.save(&a.out)?;
    writeln!(stdout, "field,extent,total_count,total_weight")?;
    writeln!(
        stdout,
        "{},{},{},{}",
        csv_field(&field.label()),
        a.extent,
        grid.total_count(),
        fmt_g(grid.total_weight())
    )?;
    let meta = merge(
        base_meta(cli, echoed, "primes grid"),
        json!({"field": field.label(), "grid_extent": a.extent, "total_count": grid.total_count()}),
    );
    write_meta(&a.meta.clone().unwrap_or_else(|| sidecar_path(&a.out)), &meta)
}

fn sstar(cli: &Cli, echoed: &[String], a: &SstarArgs, stdout: &mut dyn Write) -> Result<()> {
    let field = a.field.parse()?;
    let (k1, k2): (i64, i64) = parse_pair(&a.eta, "--eta")?;
    let series = SingularSeries::new(&field, a.cutoff)?;
    let v = series.eval(&field.element(k1, k2))?;
    let mut sink = Sink::open(&a.output, stdout)?;
    sink.line("field,k1,k2,cutoff,value,tail_bound")?;
    sink.line(&format!(
        "{},{k1},{k2},{},{},{}",
        csv_field(&field.label()),
        v.cutoff,
        fmt_g(v.value),
        fmt_g(v.tail_bound)
    ))?;
    let meta = merge(base_meta(cli, echoed, "sstar"), json!({"field": field.label(), "cutoff": v.cutoff}));
    sink.finish(meta)
}

/// Cutoff making every factor with `N p` below the largest shift norm exact.
fn default_cutoff(field: &FieldSpec, w: &TestFunction, hmax: f64) -> u64 {
    let c = smoothed_count_threshold(field, w, hmax).ceil() as u64;
    c.clamp(100_000, MAX_CUTOFF)
}

fn sum_singular(cli: &Cli, echoed: &[String], a: &SumSingularArgs, stdout: &mut dyn Write) -> Result<()> {
    let field = a.field.parse()?;
    let w = a.w.planar()?;
    let heights = parse_real_list(&a.heights)?;
    if let Some(h) = heights.iter().find(|h| !(**h >= 2.0)) {
        return Err(Error::InvalidArgument(format!("H must be at least 2, got {h}")));
    }
    let hmax = heights.iter().cloned().fold(0.0, f64::max);
    let cutoff = a.cutoff.unwrap_or_else(|| default_cutoff(&field, &w, hmax));
    let sums = singular_sums_smoothed(&field, &w, &heights, cutoff)?;
    let residue = residue_rk(&field, 1e-10)?;
    let mut sink = Sink::open(&a.output, stdout)?;
    sink.line("H,sum,target,ratio")?;
    for s in &sums {
        sink.line(&format!(
            "{},{},{},{}",
            fmt_g(s.height),
            fmt_g(s.sum),
            fmt_g(s.target),
            fmt_g(s.ratio())
        ))?;
    }
    let meta = merge(
        base_meta(cli, echoed, "sum-singular"),
        json!({
            "field": field.label(),
            "w": w.kind().name(),
            "cutoff": cutoff,
            "residue": residue.value,
            "residue_error": residue.error_bound,
            "uncertainty": sums.iter().map(|s| s.uncertainty).collect::<Vec<_>>(),
        }),
    );
    sink.finish(meta)
}

fn montgomery(cli: &Cli, echoed: &[String], a: &MontgomeryArgs, stdout: &mut dyn Write) -> Result<()> {
    if a.hmin < 2 || a.hmax < a.hmin {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= Hmin <= Hmax, got {} and {}",
            a.hmin, a.hmax
        )));
    }
    let mut heights = vec![];
    let mut h = a.hmin;
    while h <= a.hmax {
        heights.push(h);
        h = h.checked_mul(2).ok_or(Error::Overflow("dyadic heights"))?;
    }
    let sums = montgomery_table(&heights, a.cutoff)?;
    let mut sink = Sink::open(&a.output, stdout)?;
    sink.line("H,sum")?;
    for (h, s) in heights.iter().zip(&sums) {
        sink.line(&format!("{h},{}", fmt_g(*s)))?;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = heights
        .iter()
        .zip(&sums)
        .filter(|(h, _)| **h >= a.fit_min)
        .map(|(h, s)| ((*h as f64).ln(), *s))
        .unzip();
    let slope = if xs.len() >= 2 { ls_slope(&xs, &ys) } else { f64::NAN };
    sink.line(&format!("# slope={} fit_rows={}", fmt_g(slope), xs.len()))?;
    let meta = merge(
        base_meta(cli, echoed, "montgomery"),
        json!({"cutoff": a.cutoff, "slope": slope, "fit_min": a.fit_min}),
    );
    sink.finish(meta)
}

fn variance(cli: &Cli, echoed: &[String], a: &VarianceArgs, stdout: &mut dyn Write) -> Result<()> {
    let field = a.field.parse()?;
    let deltas = parse_real_list(&a.deltas)?;
    let sampler = match a.sampler {
        SamplerArg::Exhaustive => Sampler::Exhaustive,
        SamplerArg::Jitter => {
            if a.q == 0 {
                return Err(Error::InvalidArgument("--q must be positive".into()));
            }
            Sampler::StratifiedJitter { q: a.q, seed: cli.seed }
        }
    };
    let profile = variance_profile(&field, a.x, &deltas, sampler)?;
    let mut sink = Sink::open(&a.output, stdout)?;
    sink.line("field,X,delta,H,n_samples,E,V,ratio,target")?;
    for r in &profile.rows {
        sink.line(&format!(
            "{},{},{},{},{},{},{},{},{}",
            csv_field(&r.field),
            r.x,
            fmt_g(r.delta),
            fmt_g(r.height),
            r.n_samples,
            fmt_g(r.e),
            fmt_g(r.v),
            fmt_g(r.ratio),
            fmt_g(r.target)
        ))?;
    }
    let meta = merge(
        base_meta(cli, echoed, "variance"),
        json!({
            "field": field.label(),
            "sampler": sampler,
            "cutoff": Value::Null,
            "residue": profile.residue,
            "residue_error": profile.residue_error,
            "grid_extent": profile.grid_extent,
        }),
    );
    sink.finish(meta)
}

fn variance_z(cli: &Cli, echoed: &[String], a: &VarianceZArgs, stdout: &mut dyn Write) -> Result<()> {
    let deltas = parse_real_list(&a.deltas)?;
    let rows = deltas.iter().map(|&d| z_baseline(a.x, d)).collect::<Result<Vec<_>>>()?;
    let mut sink = Sink::open(&a.output, stdout)?;
    sink.line("X,H,delta,E,V_prime,V_lambda,ratio_prime,ratio_lambda,relative_gap")?;
    for r in &rows {
        sink.line(&format!(
            "{},{},{},{},{},{},{},{},{}",
            r.x,
            r.height,
            fmt_g(r.delta),
            fmt_g(r.e),
            fmt_g(r.v_prime),
            fmt_g(r.v_lambda),
            fmt_g(r.ratio_prime),
            fmt_g(r.ratio_lambda),
            fmt_g(r.relative_gap)
        ))?;
    }
    sink.finish(base_meta(cli, echoed, "variance-z"))
}

/// `p` for inert factors, `p/root` otherwise, joined by `*`; `1` for the unit ideal.
pub fn ideal_label(q: &SquarefreeIdeal) -> String {
    if q.is_unit() {
        return "1".into();
    }
    q.factors()
        .iter()
        .map(|f| match (f.split_type(), f.root()) {
            (SplitType::Inert, _) | (_, None) => f.p().to_string(),
            (_, Some(r)) => format!("{}/{}", f.p(), r),
        })
        .collect::<Vec<_>>()
        .join("*")
}

fn lemma32(cli: &Cli, echoed: &[String], a: &Lemma32Args, stdout: &mut dyn Write) -> Result<()> {
    let field = a.field.parse()?;
    let radii = parse_real_list(&a.radii)?;
    let mut sink = Sink::open(&a.output, stdout)?;
    sink.line("ideal,norm,dual_min_scaled,r,norm_r2,count")?;
    for q in enumerate_squarefree_ideals(&field, a.max_norm) {
        let lattice = ideal_lattice(&q);
        let m = dual_minimum_scaled(&lattice);
        for &r in &radii {
            let count = dual_lattice_count(&lattice, r)?;
            sink.line(&format!(
                "{},{},{},{},{},{count}",
                ideal_label(&q),
                q.norm(),
                fmt_g(m),
                fmt_g(r),
                fmt_g(q.norm() as f64 * r * r)
            ))?;
        }
    }
    sink.finish(merge(base_meta(cli, echoed, "diagnose lemma32"), json!({"field": field.label()})))
}

fn lemma33(cli: &Cli, echoed: &[String], a: &Lemma33Args, stdout: &mut dyn Write) -> Result<()> {
    let field = a.field.parse()?;
    let w = a.w.planar()?;
    let threshold = smoothed_count_threshold(&field, &w, a.height);
    let mut sink = Sink::open(&a.output, stdout)?;
    sink.line("ideal,norm,H,count,predicted,rel_err,threshold,exact_branch")?;
    for q in enumerate_squarefree_ideals(&field, a.max_norm) {
        let count = ideal_smoothed_count(&q, &w, a.height)?;
        let predicted = a.height * a.height * w.fourier_at_zero() / q.norm() as f64;
        sink.line(&format!(
            "{},{},{},{},{},{},{},{}",
            ideal_label(&q),
            q.norm(),
            fmt_g(a.height),
            fmt_g(count),
            fmt_g(predicted),
            fmt_g((count - predicted) / predicted),
            fmt_g(threshold),
            u8::from(q.norm() as f64 >= threshold)
        ))?;
    }
    sink.finish(merge(
        base_meta(cli, echoed, "diagnose lemma33"),
        json!({"field": field.label(), "w": w.kind().name()}),
    ))
}

fn condensation(cli: &Cli, echoed: &[String], a: &CondensationArgs, stdout: &mut dyn Write) -> Result<()> {
    let field = a.field.parse()?;
    if a.half_width < 0 {
        return Err(Error::InvalidArgument("--box must be nonnegative".into()));
    }
    let b = a.half_width;
    let mut sink = Sink::open(&a.output, stdout)?;
    sink.line("ideal,norm,points,in_ideal,mismatches")?;
    for c in enumerate_squarefree_ideals(&field, a.max_norm) {
        let lattice = ideal_lattice(&c);
        let (mut points, mut inside, mut bad) = (0u64, 0u64, 0u64);
        for k2 in -b..=b {
            for k1 in -b..=b {
                let eta = field.element(k1, k2);
                let member = lattice.contains(k1, k2);
                let want = if member { c.norm() as i64 } else { 0 };
                points += 1;
                inside += u64::from(member);
                bad += u64::from(condensation_sum(&c, &eta) != want);
            }
        }
        sink.line(&format!("{},{},{points},{inside},{bad}", ideal_label(&c), c.norm()))?;
    }
    sink.finish(merge(base_meta(cli, echoed, "diagnose condensation"), json!({"field": field.label()})))
}
