//! `exh`: command-line front end for the exhaustion quadrature library.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use exhaustion::bench::{bench_csv, bench_matched_evals, default_suite, BenchCase, BenchRow, Method};
use exhaustion::diffraction::{
    field_exhaustion, group_velocity_spectrum, Aperture, DiffractionError, Evanescent, FieldPoint, Levels2, WaveParams,
};
use exhaustion::expr::{parse, ExprAst};
use exhaustion::improper::{integrate_semi_infinite, ImproperResult, TailPolicy};
use exhaustion::report::{csv_field, emit_report, fmt17, Format};
use exhaustion::series::{Series, SeriesArgs, SeriesId};
use exhaustion::{integrate_bounds, threads_from_env, Integrand, Interval, QuadError, QuadOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

const GRAMMAR: &str = "\
Expression grammar (for --fn):
  numbers     1, 2.5, 1e-3, .5
  variable    x
  constants   pi, e
  functions   sin cos tan exp ln sqrt abs, called as name(expr)
  operators   + - * / ^ and unary minus, with parentheses for grouping

Precedence, loosest first: + -, then * /, then unary minus, then ^.
^ is right-associative, so 2^3^2 = 2^9 = 512. Unary minus binds looser
than ^, so -2^2 = -(2^2) = -4.

Exit codes: 0 converged, 2 estimate did not converge, 3 input or parse
error, 4 non-finite sample. EXH_THREADS sets the worker count for level
sums (0 or unset = serial); results are bit-identical either way.";

#[derive(Parser)]
#[command(name = "exh", version, about = "Dyadic exhaustion quadrature, series and diffraction fields")]
#[command(after_long_help = GRAMMAR)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate an expression over [a, b]
    Integrate(IntegrateArgs),
    /// Integrate an expression over [0, inf) in blocks
    Improper(ImproperArgs),
    /// Evaluate a catalog series
    Series(SeriesCmd),
    /// Sample the diffracted field on a z-slice
    Diffract(DiffractArgs),
    /// Error versus evaluation count against composite rules
    Bench(BenchArgs),
}

#[derive(Args)]
struct QuadFlags {
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = exhaustion::quadrature::DEFAULT_MAX_LEVEL)]
    max_level: u32,
    #[arg(long, default_value_t = 1)]
    min_level: u32,
    #[arg(long, default_value = "json")]
    format: Format,
}

impl QuadFlags {
    fn options(&self) -> QuadOptions {
        QuadOptions {
            tol: self.tol,
            min_level: self.min_level,
            max_level: self.max_level,
            threads: threads_from_env(),
        }
    }
}

#[derive(Args)]
struct IntegrateArgs {
    /// Integrand in x, e.g. "exp(-x^2)"
    #[arg(long = "fn", allow_hyphen_values = true)]
    func: String,
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    #[command(flatten)]
    quad: QuadFlags,
}

#[derive(Args)]
struct ImproperArgs {
    #[arg(long = "fn", allow_hyphen_values = true)]
    func: String,
    /// Block width
    #[arg(long, default_value_t = 1.0)]
    block: f64,
    #[arg(long, default_value_t = 1e-10)]
    tail_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_blocks: usize,
    #[command(flatten)]
    quad: QuadFlags,
}

#[derive(Args)]
struct SeriesCmd {
    /// sinc_product, sinc_sum, sin, cos, sine_integral (si), exp, gaussian, ln, factorial (gamma)
    #[arg(long)]
    id: String,
    #[arg(long)]
    levels: u32,
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    #[arg(long, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum ApertureKind {
    Unit,
    Rect,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvanescentArg {
    Decay,
    Zero,
}

#[derive(Args)]
struct DiffractArgs {
    #[arg(long, value_enum)]
    aperture: ApertureKind,
    /// Rectangle width along x
    #[arg(long, default_value_t = 1.0)]
    wx: f64,
    /// Rectangle width along y
    #[arg(long, default_value_t = 1.0)]
    wy: f64,
    /// Wavenumber
    #[arg(long)]
    k: f64,
    /// Wave speed; the carrier frequency is k * c
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 0.0)]
    t: f64,
    /// Slice plane, written z=<value>
    #[arg(long, value_parser = parse_slice)]
    slice: f64,
    /// Half-width of the square sampled in x and y
    #[arg(long)]
    extent: f64,
    /// Samples per axis
    #[arg(long)]
    samples: usize,
    /// Refinement levels per axis
    #[arg(long, default_value_t = 8)]
    levels: u32,
    #[arg(long, value_enum, default_value = "decay")]
    evanescent: EvanescentArg,
    /// Also write the plane-wave spectrum CSV here
    #[arg(long)]
    spectrum: Option<PathBuf>,
    /// Levels per axis for the spectrum file
    #[arg(long, default_value_t = 4)]
    spectrum_levels: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Default,
    Random,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "default")]
    suite: Suite,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Seed for the random polynomial suite
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Size of the random suite
    #[arg(long, default_value_t = 5)]
    count: usize,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("non-finite sample f({x}) = {value} at level {level}")]
    NonFinite { x: f64, value: f64, level: u32 },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 3,
            CliError::NonFinite { .. } => 4,
        }
    }
}

impl From<QuadError> for CliError {
    fn from(e: QuadError) -> Self {
        match e {
            QuadError::NonFiniteSample { x, value, level } => CliError::NonFinite { x, value, level },
            other => CliError::Input(other.to_string()),
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn parse_slice(s: &str) -> Result<f64, String> {
    let value = s.strip_prefix("z=").ok_or_else(|| format!("expected z=<value>, got {s:?}"))?;
    value.trim().parse().map_err(|e| format!("bad z value {value:?}: {e}"))
}

fn integrand(text: &str) -> Result<Integrand<'static>, CliError> {
    let ast: ExprAst = parse(text).map_err(|e| CliError::Input(format!("cannot parse {text:?}: {e}")))?;
    Ok(Integrand::new(text, move |x| ast.eval(x)))
}

/// Output text plus whether the estimate met its tolerance.
struct Outcome {
    text: String,
    converged: bool,
}

fn run_integrate(args: &IntegrateArgs) -> Result<Outcome, CliError> {
    let f = integrand(&args.func)?;
    let result = integrate_bounds(&f, args.a, args.b, &args.quad.options())?;
    Ok(Outcome {
        text: emit_report(&result, args.quad.format),
        converged: result.converged,
    })
}

fn improper_csv(r: &ImproperResult) -> String {
    let mut out = String::from("block,lo,hi,value,error_estimate,levels_used,converged\n");
    for b in &r.blocks {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            b.p,
            csv_field(b.lo),
            csv_field(b.hi),
            csv_field(b.value),
            csv_field(b.error_estimate),
            b.levels_used,
            b.converged
        );
    }
    out
}

fn run_improper(args: &ImproperArgs) -> Result<Outcome, CliError> {
    let f = integrand(&args.func)?;
    let policy = TailPolicy {
        block_width: args.block,
        tail_tol: args.tail_tol,
        max_blocks: args.max_blocks,
        ..TailPolicy::default()
    };
    let result = integrate_semi_infinite(&f, &policy, &args.quad.options())?;
    let text = match args.quad.format {
        Format::Json => serde_json::to_string_pretty(&result).map_err(input_err)? + "\n",
        Format::Csv => improper_csv(&result),
    };
    Ok(Outcome {
        text,
        converged: result.summary.converged,
    })
}

fn run_series(args: &SeriesCmd) -> Result<Outcome, CliError> {
    let id: SeriesId = args.id.parse().map_err(input_err)?;
    let params = SeriesArgs {
        x: args.x,
        a: args.a,
        b: args.b,
        p: args.p,
    };
    let series = Series::from_args(id, params).map_err(input_err)?;
    let value = series.eval(args.levels).map_err(input_err)?;
    let text = match args.format {
        Format::Json => format!(
            "{{\n  \"id\": \"{}\",\n  \"levels\": {},\n  \"value\": {}\n}}\n",
            id.name(),
            args.levels,
            fmt17(value)
        ),
        Format::Csv => format!("id,levels,value\n{},{},{}\n", id.name(), args.levels, csv_field(value)),
    };
    Ok(Outcome {
        text,
        converged: value.is_finite(),
    })
}

fn diffraction_err(e: DiffractionError) -> CliError {
    match e {
        DiffractionError::NonFiniteTransform { kx, value, .. } => CliError::NonFinite { x: kx, value, level: 0 },
        other => input_err(other),
    }
}

fn spectrum_csv(ap: &Aperture, wave: WaveParams, levels: Levels2) -> Result<String, CliError> {
    let components = group_velocity_spectrum(ap, wave, levels).map_err(diffraction_err)?;
    let mut out = String::from("n,m,p,q,kx,ky,weight,kz,group_speed_z,evanescent\n");
    let opt = |v: Option<f64>| v.map(csv_field).unwrap_or_default();
    for c in &components {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            c.n,
            c.m,
            c.p,
            c.q,
            csv_field(c.kx),
            csv_field(c.ky),
            csv_field(c.weight),
            opt(c.kz),
            opt(c.group_speed_z),
            c.evanescent
        );
    }
    Ok(out)
}

fn run_diffract(args: &DiffractArgs) -> Result<Outcome, CliError> {
    let wave = WaveParams::from_wavenumber(args.k, args.c).map_err(diffraction_err)?;
    let ap = match args.aperture {
        ApertureKind::Unit => Aperture::unit(),
        ApertureKind::Rect => Aperture::rectangular(args.wx, args.wy).map_err(diffraction_err)?,
    };
    let mode = match args.evanescent {
        EvanescentArg::Decay => Evanescent::Decay,
        EvanescentArg::Zero => Evanescent::Zero,
    };
    if args.samples == 0 || !(args.extent >= 0.0) || !args.extent.is_finite() {
        return Err(CliError::Input("need --samples >= 1 and a finite --extent >= 0".into()));
    }
    let coord = |i: usize| {
        if args.samples == 1 {
            0.0
        } else {
            -args.extent + 2.0 * args.extent * i as f64 / (args.samples - 1) as f64
        }
    };
    let mut out = String::from("x,y,z,re_phi,im_phi,abs_phi\n");
    for j in 0..args.samples {
        for i in 0..args.samples {
            let (x, y) = (coord(i), coord(j));
            let pt = FieldPoint::new(x, y, args.slice, args.t);
            let phi = field_exhaustion(&ap, pt, wave, Levels2::square(args.levels), mode).map_err(diffraction_err)?;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                csv_field(x),
                csv_field(y),
                csv_field(args.slice),
                csv_field(phi.re),
                csv_field(phi.im),
                csv_field(phi.norm())
            );
        }
    }
    if let Some(path) = &args.spectrum {
        let csv = spectrum_csv(&ap, wave, Levels2::square(args.spectrum_levels))?;
        fs::write(path, csv).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(Outcome { text: out, converged: true })
}

/// Polynomials of degree <= 6 with coefficients in [-1, 1] on [a, a + w].
fn random_suite(seed: u64, count: usize) -> Vec<BenchCase<'static>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let degree = rng.gen_range(1..=6);
            let coeffs: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let a: f64 = rng.gen_range(-2.0..2.0);
            let b = a + rng.gen_range(0.5..3.0);
            let antiderivative = |x: f64| {
                coeffs
                    .iter()
                    .enumerate()
                    .rev()
                    .fold(0.0, |acc, (k, c)| acc * x + c / (k + 1) as f64)
                    * x
            };
            let exact = antiderivative(b) - antiderivative(a);
            let eval = coeffs.clone();
            BenchCase {
                f: Integrand::new(format!("poly{i}"), move |x| eval.iter().rev().fold(0.0, |acc, c| acc * x + c)),
                interval: Interval::new(a, b).expect("finite ordered bounds"),
                exact,
            }
        })
        .collect()
}

fn bench_json(rows: &[BenchRow]) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(rows).map_err(input_err)? + "\n")
}

fn run_bench(args: &BenchArgs) -> Result<Outcome, CliError> {
    let cases = match args.suite {
        Suite::Default => default_suite(),
        Suite::Random => random_suite(args.seed, args.count),
    };
    let mut rows = Vec::new();
    for case in &cases {
        rows.extend(bench_matched_evals(case, &Method::ALL)?);
    }
    let text = match args.format {
        Format::Csv => bench_csv(&rows),
        Format::Json => bench_json(&rows)?,
    };
    Ok(Outcome { text, converged: true })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match &cli.command {
        Command::Integrate(a) => run_integrate(a),
        Command::Improper(a) => run_improper(a),
        Command::Series(a) => run_series(a),
        Command::Diffract(a) => run_diffract(a),
        Command::Bench(a) => run_bench(a),
    };
    match outcome {
        Ok(o) => {
            print!("{}", o.text);
            if o.converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            if let CliError::NonFinite { x, value, level } = e {
                let diag = serde_json::json!({
                    "termination": "non_finite_sample",
                    "x": x,
                    "value": value.to_string(),
                    "level": level,
                });
                println!("{diag}");
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
