//! `padwav`: command-line front end for the p-adic wavelet library.
//!
//! Exit codes: 0 success, 1 a verification failed (a JSON report is still
//! written), 2 bad usage or unreadable input.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use padic_wavelets::cauchy::{
    omega_coefficients, omega_tail_bound, omega_tail_bound_exact, residual, solve, uniform_grid, EvolutionKind, EvolutionProblem,
};
use padic_wavelets::io::{
    from_json, to_json, write_field_csv, write_trajectory_csv, EigenReportDto, FamilyDto, FieldDto, IndexDto,
    SchwartzDto, SymbolDto, TrajectoryDto,
};
use padic_wavelets::padic::{format_rational, parse_rational};
use padic_wavelets::pseudodiff::{apply, eigen_apply, eigencheck, SymbolSpec};
use padic_wavelets::schwartz::DEFAULT_TOL;
use padic_wavelets::wavelets::{
    analyze, gram_report, synthesize, wavelet, CoefficientField, FamilySpec, WaveletIndex, Window,
};
use padic_wavelets::{Ball, SchwartzFunction};

#[derive(Parser)]
#[command(name = "padwav", version, about = "p-adic wavelet bases, Fourier multipliers and evolution equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and check wavelet bases.
    #[command(subcommand)]
    Basis(BasisCommand),
    /// Fourier transform of a function file.
    Fourier {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        inverse: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Pseudo-differential operators.
    #[command(subcommand)]
    Op(OpCommand),
    /// Solve a Cauchy problem mode by mode.
    Evolve {
        kind: EvolveKind,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        symbol: SymbolArgs,
        /// `omega` for the unit-ball indicator, or a field/function JSON file.
        #[arg(long, default_value = "omega")]
        u0: String,
        #[arg(long, default_value_t = 1.0)]
        tmax: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Nonlinearity degree `m` in `u |u|^{2m}` (semilinear only).
        #[arg(long, default_value_t = 1)]
        degree: u32,
        /// Also report the finite-difference residual of the solution.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Wavelet coefficients of a function file.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Function from a coefficient file.
    Synthesize {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Subcommand)]
enum BasisCommand {
    /// A single wavelet as a function.
    Synth {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        index: IndexArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Gram matrix of the family on a window against the identity.
    Verify {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Truncated Parseval sum of the initial data.
    Parseval {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value = "omega")]
        u0: String,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Subcommand)]
enum OpCommand {
    /// Apply a symbol to a function file or, diagonally, to a coefficient file.
    Apply {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        symbol: SymbolArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Check that wavelets are eigenfunctions of a symbol.
    Eigencheck {
        #[command(flatten)]
        symbol: SymbolArgs,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        index: IndexArgs,
        /// Check every index of this coefficient file instead of `--s/--j/--a`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EvolveKind {
    Linear,
    Schrodinger,
    Semilinear,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyKind {
    Theta,
    Psi,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Suppress the summary on standard error.
    #[arg(long)]
    quiet: bool,
    /// Seed for randomized options.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance for verification reports.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long, default_value_t = 2)]
    p: u32,
    /// Dimension; defaults to the number of entries in `--m`.
    #[arg(long)]
    n: Option<usize>,
    /// `m_k`, comma separated; a single value is repeated `n` times.
    #[arg(long, default_value = "1")]
    m: String,
    #[arg(long, value_enum, default_value_t = FamilyKind::Theta)]
    family: FamilyKind,
    #[arg(long, default_value_t = 1)]
    nu: u32,
    /// JSON list `[{"s": "num/den", "values": [{"re", "im"}, ...]}]` for the psi family.
    #[arg(long)]
    gammas: Option<PathBuf>,
    /// Draw unit-modulus gammas from `--seed` for every frequency without one.
    #[arg(long)]
    random_gammas: bool,
}

#[derive(Args)]
struct WindowArgs {
    #[arg(long, default_value_t = -2, allow_hyphen_values = true)]
    jmin: i64,
    #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
    jmax: i64,
    #[arg(long, default_value_t = 2)]
    shift_depth: u32,
}

#[derive(Args)]
struct IndexArgs {
    /// Frequency `s`, one rational per coordinate, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    /// Scales `j`, comma separated.
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    j: String,
    /// Shift `a`, comma separated.
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    a: String,
}

#[derive(Args)]
struct SymbolArgs {
    /// Symbol JSON file.
    #[arg(long)]
    symbol: Option<PathBuf>,
    /// Taibleson exponent, e.g. `1.5` or `1+1i`; used when `--symbol` is absent.
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    alpha: String,
}

/// Outcome of a command that verified something.
enum Verdict {
    Ok,
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Failed) => ExitCode::from(1),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("padwav: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| c.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe))
}

fn run(command: Command) -> anyhow::Result<Verdict> {
    match command {
        Command::Basis(BasisCommand::Synth { family, index, out }) => {
            let spec = family.spec(out.seed)?;
            let idx = index.index(&spec)?;
            let f = wavelet(&spec, &idx)?;
            emit_json(&out, &SchwartzDto::from_function(&f))?;
            Ok(Verdict::Ok)
        }
        Command::Basis(BasisCommand::Verify { family, window, out }) => basis_verify(&family, &window, &out),
        Command::Basis(BasisCommand::Parseval { family, u0, window, out }) => basis_parseval(&family, &u0, &window, &out),
        Command::Fourier { input, inverse, out } => {
            let f = read_function(&input)?;
            let g = if inverse { f.fourier_inverse()? } else { f.fourier()? };
            emit_json(&out, &SchwartzDto::from_function(&g))?;
            Ok(Verdict::Ok)
        }
        Command::Op(OpCommand::Apply { input, symbol, out }) => {
            let sym = symbol.spec()?;
            match read_input(&input)? {
                Input::Function(f) => emit_json(&out, &SchwartzDto::from_function(&apply(&sym, &f)?))?,
                Input::Field(field) => emit_field(&out, &eigen_apply(&sym, &field)?)?,
            }
            Ok(Verdict::Ok)
        }
        Command::Op(OpCommand::Eigencheck { symbol, family, index, input, out }) => {
            op_eigencheck(&symbol, &family, &index, input.as_deref(), &out)
        }
        Command::Evolve { kind, family, symbol, u0, tmax, steps, degree, check, window, out } => {
            let kind = match kind {
                EvolveKind::Linear => EvolutionKind::Linear,
                EvolveKind::Schrodinger => EvolutionKind::Schrodinger,
                EvolveKind::Semilinear => EvolutionKind::Semilinear { degree },
            };
            evolve(kind, &family, &symbol, &u0, tmax, steps, check, &window, &out)
        }
        Command::Analyze { input, family, window, out } => {
            let f = read_function(&input)?;
            let spec = family.spec(out.seed)?;
            let analysis = analyze(&f, &spec, &window.window()?)?;
            if !out.quiet {
                eprintln!(
                    "{} coefficients, window complete: {}, zero integral: {}",
                    analysis.field.len(),
                    analysis.complete,
                    analysis.lizorkin
                );
            }
            emit_field(&out, &analysis.field)?;
            Ok(Verdict::Ok)
        }
        Command::Synthesize { input, out } => {
            let field = read_field(&input)?;
            emit_json(&out, &SchwartzDto::from_function(&synthesize(&field)?))?;
            Ok(Verdict::Ok)
        }
    }
}

impl FamilyArgs {
    fn spec(&self, seed: u64) -> anyhow::Result<FamilySpec> {
        let mut m: Vec<u32> =
            split(&self.m).iter().map(|s| s.parse::<u32>().with_context(|| format!("bad --m entry {s:?}"))).collect::<Result<_, _>>()?;
        match (self.n, m.len()) {
            (Some(n), 1) => m = vec![m[0]; n],
            (Some(n), len) if n != len => bail!("--n {n} does not match {len} entries in --m"),
            _ => {}
        }
        let spec = match self.family {
            FamilyKind::Theta => FamilySpec::theta(self.p, m)?,
            FamilyKind::Psi => {
                let mut gammas = BTreeMap::new();
                if let Some(path) = &self.gammas {
                    let list: Vec<padic_wavelets::io::GammaDto> = from_json(&read_text(path)?)?;
                    for g in list {
                        gammas.insert(parse_rational(&g.s)?, g.values.into_iter().map(Complex64::from).collect());
                    }
                }
                if self.random_gammas {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let base = FamilySpec::theta(self.p, m.clone())?;
                    let size = (self.p as usize).pow(self.nu);
                    for s in base.frequencies() {
                        for sk in s.coords() {
                            gammas.entry(sk.clone()).or_insert_with(|| {
                                (0..size)
                                    .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
                                    .collect()
                            });
                        }
                    }
                }
                FamilySpec::psi(self.p, m, self.nu, gammas)?
            }
        };
        Ok(spec)
    }
}

impl WindowArgs {
    fn window(&self) -> anyhow::Result<Window> {
        Ok(Window::new(self.jmin, self.jmax, self.shift_depth)?)
    }
}

impl IndexArgs {
    fn index(&self, spec: &FamilySpec) -> anyhow::Result<WaveletIndex> {
        let s = match &self.s {
            Some(s) => s.clone(),
            None => spec.frequencies()[0].coords().iter().map(format_rational).collect::<Vec<_>>().join(","),
        };
        let s = split(&s);
        let j = split(&self.j)
            .iter()
            .map(|x| x.parse::<i64>().with_context(|| format!("bad --j entry {x:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        let a = split(&self.a);
        let dim = spec.n;
        let j = widen(j, dim);
        let idx = WaveletIndex::parse(spec.p, &widen(s, dim), &j, &widen(a, dim))?;
        spec.validate_index(&idx)?;
        Ok(idx)
    }
}

impl SymbolArgs {
    fn spec(&self) -> anyhow::Result<SymbolSpec> {
        match &self.symbol {
            Some(path) => Ok(from_json::<SymbolDto>(&read_text(path)?)?.to_symbol()?),
            None => {
                let alpha: Complex64 =
                    self.alpha.parse().map_err(|_| anyhow!("bad --alpha {:?}; expected e.g. 1.5 or 1+1i", self.alpha))?;
                Ok(SymbolSpec::taibleson(alpha))
            }
        }
    }
}

/// A single value stands for all `dim` coordinates.
fn widen<T: Clone>(v: Vec<T>, dim: usize) -> Vec<T> {
    if v.len() == 1 {
        vec![v[0].clone(); dim]
    } else {
        v
    }
}

fn split(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect()
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

enum Input {
    Function(SchwartzFunction),
    Field(CoefficientField),
}

/// A coefficient file (has `family`) or a function file (has `terms`).
fn read_input(path: &Path) -> anyhow::Result<Input> {
    let text = read_text(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
    if value.get("family").is_some() {
        Ok(Input::Field(serde_json::from_value::<FieldDto>(value)?.to_field()?))
    } else {
        Ok(Input::Function(serde_json::from_value::<SchwartzDto>(value)?.to_function()?))
    }
}

fn read_function(path: &Path) -> anyhow::Result<SchwartzFunction> {
    match read_input(path)? {
        Input::Function(f) => Ok(f),
        Input::Field(_) => bail!("{} holds coefficients, expected a function", path.display()),
    }
}

fn read_field(path: &Path) -> anyhow::Result<CoefficientField> {
    match read_input(path)? {
        Input::Field(f) => Ok(f),
        Input::Function(_) => bail!("{} holds a function, expected coefficients", path.display()),
    }
}

fn sink(out: &OutputArgs) -> anyhow::Result<Box<dyn Write>> {
    Ok(match &out.out {
        Some(path) => Box::new(fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json<T: Serialize>(out: &OutputArgs, value: &T) -> anyhow::Result<()> {
    if out.format == Format::Csv {
        bail!("this command only writes JSON");
    }
    let mut w = sink(out)?;
    writeln!(w, "{}", to_json(value)?)?;
    Ok(())
}

fn emit_field(out: &OutputArgs, field: &CoefficientField) -> anyhow::Result<()> {
    match out.format {
        Format::Json => emit_json(out, &FieldDto::from_field(field)),
        Format::Csv => Ok(write_field_csv(field, sink(out)?)?),
    }
}

fn basis_verify(family: &FamilyArgs, window: &WindowArgs, out: &OutputArgs) -> anyhow::Result<Verdict> {
    let spec = family.spec(out.seed)?;
    let report = gram_report(&spec, &window.window()?)?;
    let ok = report.max_defect <= out.tol;
    let worst = report.worst.as_ref().map(|(x, y)| [IndexDto::from_index(x), IndexDto::from_index(y)]);
    emit_json(
        out,
        &json!({
            "orthonormal": ok,
            "family": FamilyDto::from_spec(&spec),
            "window": {"jmin": window.jmin, "jmax": window.jmax, "shift_depth": window.shift_depth},
            "count": report.count,
            "max_defect": report.max_defect,
            "tol": out.tol,
            "worst_pair": worst,
        }),
    )?;
    if !out.quiet {
        eprintln!("{} wavelets, max |G - I| = {:e}", report.count, report.max_defect);
    }
    Ok(if ok { Verdict::Ok } else { Verdict::Failed })
}

fn unit_ball_indicator(spec: &FamilySpec) -> anyhow::Result<SchwartzFunction> {
    Ok(SchwartzFunction::indicator(&Ball::unit(spec.p, spec.n)?))
}

fn basis_parseval(family: &FamilyArgs, u0: &str, window: &WindowArgs, out: &OutputArgs) -> anyhow::Result<Verdict> {
    let spec = family.spec(out.seed)?;
    let win = window.window()?;
    let omega = u0 == "omega";
    let f = if omega { unit_ball_indicator(&spec)? } else { read_function(Path::new(u0))? };
    let analysis = analyze(&f, &spec, &win)?;
    let partial = analysis.field.norm_sq();
    let norm = f.norm_sq();
    let mut report = json!({
        "family": FamilyDto::from_spec(&spec),
        "jmax": window.jmax,
        "partial_sum": partial,
        "norm_sq": norm,
        "window_complete": analysis.complete,
    });
    let tol = out.tol.max(1e-12);
    let ok = if omega {
        if spec.n != 1 || !spec.is_theta() {
            bail!("the closed form covers the one-dimensional theta family");
        }
        if window.jmin > spec.m[0] as i64 {
            bail!("--jmin must be at most m = {} to see every coefficient", spec.m[0]);
        }
        let tail = omega_tail_bound_exact(spec.p, spec.m[0], window.jmax);
        let (closed_f, closed) = num_rational_one_minus(&tail);
        report["closed_form"] = json!(closed);
        report["tail"] = json!(format_rational(&tail));
        report["deviation"] = json!((partial - closed_f).abs());
        (partial - closed_f).abs() <= tol
    } else if analysis.complete {
        (partial - norm).abs() <= tol * norm.max(1.0)
    } else {
        partial <= norm + tol * norm.max(1.0)
    };
    report["ok"] = json!(ok);
    emit_json(out, &report)?;
    if !out.quiet {
        eprintln!("partial sum {partial} of {norm}");
    }
    Ok(if ok { Verdict::Ok } else { Verdict::Failed })
}

/// `1 - tail` as a float and as `"num/den"`.
fn num_rational_one_minus(tail: &BigRational) -> (f64, String) {
    let closed = BigRational::one() - tail;
    (closed.to_f64().unwrap_or(f64::NAN), format_rational(&closed))
}

fn op_eigencheck(
    symbol: &SymbolArgs,
    family: &FamilyArgs,
    index: &IndexArgs,
    input: Option<&Path>,
    out: &OutputArgs,
) -> anyhow::Result<Verdict> {
    let sym = symbol.spec()?;
    let (spec, indices) = match input {
        Some(path) => {
            let field = read_field(path)?;
            let idx: Vec<WaveletIndex> = field.iter().map(|(i, _)| i.clone()).collect();
            (field.spec.clone(), idx)
        }
        None => {
            let spec = family.spec(out.seed)?;
            let idx = index.index(&spec)?;
            (spec, vec![idx])
        }
    };
    let reports = indices.iter().map(|idx| eigencheck(&sym, &spec, idx)).collect::<Result<Vec<_>, _>>()?;
    let ok = reports.iter().all(|r| r.passed());
    let dtos: Vec<EigenReportDto> = reports.iter().map(EigenReportDto::from_report).collect();
    if input.is_none() {
        emit_json(out, &dtos[0])?;
    } else {
        emit_json(out, &json!({"ok": ok, "reports": dtos}))?;
    }
    if !out.quiet && !ok {
        eprintln!("not an eigenfunction");
    }
    Ok(if ok { Verdict::Ok } else { Verdict::Failed })
}

#[allow(clippy::too_many_arguments)]
fn evolve(
    kind: EvolutionKind,
    family: &FamilyArgs,
    symbol: &SymbolArgs,
    u0: &str,
    tmax: f64,
    steps: usize,
    check: bool,
    window: &WindowArgs,
    out: &OutputArgs,
) -> anyhow::Result<Verdict> {
    let sym = symbol.spec()?;
    let times = uniform_grid(tmax, steps)?;
    let win = window.window()?;
    let (initial, tail) = if u0 == "omega" {
        let spec = family.spec(out.seed)?;
        let field = omega_coefficients(&spec, window.jmax)?;
        // sum of squares of the discarded coefficients of prod_k 1_{Z_p}
        let kept: f64 = spec
            .m
            .iter()
            .map(|&mk| 1.0 - omega_tail_bound(spec.p, mk, window.jmax))
            .product();
        (field, Some(1.0 - kept))
    } else {
        match read_input(Path::new(u0))? {
            Input::Field(field) => (field, None),
            Input::Function(f) => {
                let spec = family.spec(out.seed)?;
                let analysis = analyze(&f, &spec, &win)?;
                if !analysis.complete && !out.quiet {
                    eprintln!("warning: the analysis window may miss coefficients of u0");
                }
                (analysis.field, None)
            }
        }
    };
    let prob = EvolutionProblem::new(kind, sym, initial, times)?.with_truncation(win, tail);
    let traj = solve(&prob)?;
    if check {
        let report = residual(&traj, &prob, &[])?;
        if !out.quiet {
            eprintln!("max residual {:e} over {} interior times", report.max, report.sample_times.len());
        }
    }
    match out.format {
        Format::Json => emit_json(out, &TrajectoryDto::from_trajectory(&traj))?,
        Format::Csv => write_trajectory_csv(&traj, sink(out)?)?,
    }
    Ok(Verdict::Ok)
}
