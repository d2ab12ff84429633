use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use twinrep_core::{
    algebra_basis, cleared_poly, common_eigenlines, decide, delta, delta_direct, image_matrices,
    roots_of_p, verify_relations, AnyMatrix, Backend, Error, Exact, Family1, Field, Float,
    GeneratorImage, IntPoly, Matrix, RepSpec, Scalar, Sign, Status, Subspace, Tolerance,
};

const EXIT_OK: u8 = 0;
const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_ERROR: u8 = 2;
const EXIT_REDUCIBLE: u8 = 10;

#[derive(Parser)]
#[command(name = "twinrep", version, about = "Homogeneous 2-local representations of twin groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the generator images of a representation.
    Gen(GenArgs),
    /// Check the defining relations on generator images.
    Verify(VerifyArgs),
    /// Reduce the first family by its invariant line.
    Reduce(ReduceArgs),
    /// Evaluate the determinant Δ.
    Delta(DeltaArgs),
    /// Decide irreducibility of the reduced first family.
    Decide(DecideArgs),
    /// Nonzero roots of the cleared polynomial.
    Roots(RootsArgs),
    /// Algebra-dimension irreducibility test.
    Oracle(OracleArgs),
    /// Decide over a grid of parameters, as CSV.
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct FamilyArgs {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
    family: u8,
    #[arg(long)]
    n: usize,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<i64>,
    #[arg(long)]
    backend: Option<Backend>,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    #[arg(long, allow_hyphen_values = true)]
    b: String,
    #[arg(long)]
    backend: Option<Backend>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Images of the reduced representation (family 1 only).
    #[arg(long)]
    reduced: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// JSON file with generator images, as printed by `gen`, or a list of matrices.
    #[arg(long)]
    images: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisChoice {
    Std,
    #[value(name = "B")]
    B,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_enum, default_value = "std")]
    basis: BasisChoice,
    #[arg(long, default_value = "json")]
    out: String,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum DeltaMode {
    Closed,
    Direct,
    Both,
}

#[derive(Args)]
struct DeltaArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_enum, default_value = "both")]
    mode: DeltaMode,
}

#[derive(Args)]
struct DecideArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    emit_witness: bool,
}

#[derive(Args)]
struct RootsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    backend: Option<Backend>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    reduced: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Smallest n (inclusive).
    #[arg(long)]
    n: usize,
    /// Largest n (inclusive); defaults to `--n`.
    #[arg(long)]
    n_max: Option<usize>,
    /// Comma-separated list of values of a; replaces the grid.
    #[arg(long, allow_hyphen_values = true)]
    points: Option<String>,
    #[arg(long, allow_hyphen_values = true, default_value_t = -2.0)]
    re_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
    re_max: f64,
    #[arg(long, default_value_t = 5)]
    re_steps: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    im_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    im_max: f64,
    #[arg(long, default_value_t = 1)]
    im_steps: usize,
    #[arg(long, allow_hyphen_values = true, default_value = "1+0i")]
    b: String,
    #[arg(long)]
    backend: Option<Backend>,
    #[arg(long)]
    with_oracle: bool,
    #[arg(long, default_value_t = 1_000_000)]
    max_points: usize,
}

type CliResult = Result<u8, Error>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    ExitCode::from(code)
}

fn run(command: Command) -> CliResult {
    let tol = Tolerance::from_env()?;
    match command {
        Command::Gen(args) => cmd_gen(args, tol),
        Command::Verify(args) => cmd_verify(args, tol),
        Command::Reduce(args) => cmd_reduce(args, tol),
        Command::Delta(args) => cmd_delta(args, tol),
        Command::Decide(args) => cmd_decide(args, tol),
        Command::Roots(args) => cmd_roots(args, tol),
        Command::Oracle(args) => cmd_oracle(args, tol),
        Command::Sweep(args) => cmd_sweep(args, tol),
    }
}

macro_rules! dispatch {
    ($backend:expr, $f:ident ( $($arg:expr),* $(,)? )) => {
        match $backend {
            Backend::Exact => $f::<Exact>($($arg),*),
            Backend::Float => $f::<Float>($($arg),*),
        }
    };
}

fn print_json(value: &Value) -> io::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)
}

fn emit(value: Value) -> Result<(), Error> {
    print_json(&value).map_err(|e| Error::Json(e.to_string()))
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable output")
}

fn parse_scalar(name: &str, text: &str) -> Result<Scalar, Error> {
    text.parse::<Scalar>()
        .map_err(|e| Error::Precondition(format!("--{name}: {e}")))
}

fn required<'a>(name: &str, v: &'a Option<String>, family: u8) -> Result<&'a str, Error> {
    v.as_deref().ok_or_else(|| {
        Error::Precondition(format!("family {family} needs --{name}"))
    })
}

/// Explicit choice, else exact when every input is exact.
fn pick_backend(explicit: Option<Backend>, inputs: &[&Scalar]) -> Backend {
    explicit.unwrap_or_else(|| {
        if inputs.iter().all(|s| s.backend() == Backend::Exact) {
            Backend::Exact
        } else {
            Backend::Float
        }
    })
}

struct ParsedFamily {
    family: u8,
    n: usize,
    a: Option<Scalar>,
    b: Option<Scalar>,
    c: Option<Scalar>,
    sign: Option<Sign>,
    backend: Backend,
}

impl ParsedFamily {
    fn parse(args: &FamilyArgs) -> Result<Self, Error> {
        let (mut a, mut b, mut c, mut sign) = (None, None, None, None);
        match args.family {
            1 => {
                a = Some(parse_scalar("a", required("a", &args.a, 1)?)?);
                b = Some(parse_scalar("b", required("b", &args.b, 1)?)?);
            }
            2 => {
                c = Some(parse_scalar("c", required("c", &args.c, 2)?)?);
                let s = args
                    .sign
                    .ok_or_else(|| Error::Precondition("family 2 needs --sign".into()))?;
                sign = Some(Sign::from_i64(s)?);
            }
            _ => {}
        }
        let inputs: Vec<&Scalar> = [&a, &b, &c].into_iter().flatten().collect();
        Ok(Self {
            family: args.family,
            n: args.n,
            backend: pick_backend(args.backend, &inputs),
            a,
            b,
            c,
            sign,
        })
    }

    fn spec<F: Field>(&self, tol: Tolerance) -> Result<RepSpec<F>, Error> {
        let get = |s: &Option<Scalar>| F::from_scalar(s.as_ref().expect("parsed"));
        match self.family {
            1 => RepSpec::family1(self.n, get(&self.a)?, get(&self.b)?, tol),
            2 => RepSpec::family2(self.n, get(&self.c)?, self.sign.expect("parsed")),
            _ => RepSpec::family3(self.n),
        }
    }

    fn family1<F: Field>(&self, tol: Tolerance) -> Result<Family1<F>, Error> {
        if self.family != 1 {
            return Err(Error::Precondition("--reduced applies to family 1 only".into()));
        }
        let a = F::from_scalar(self.a.as_ref().expect("parsed"))?;
        let b = F::from_scalar(self.b.as_ref().expect("parsed"))?;
        Family1::new(self.n, a, b, tol)
    }

    fn images<F: Field>(&self, reduced: bool, tol: Tolerance) -> Result<Vec<GeneratorImage<F>>, Error> {
        if reduced {
            Ok(self.family1::<F>(tol)?.reduced_generators())
        } else {
            Ok(self.spec::<F>(tol)?.generators())
        }
    }
}

struct ParsedParams {
    n: usize,
    a: Scalar,
    b: Scalar,
    backend: Backend,
}

impl ParsedParams {
    fn parse(args: &ParamArgs) -> Result<Self, Error> {
        let a = parse_scalar("a", &args.a)?;
        let b = parse_scalar("b", &args.b)?;
        let backend = pick_backend(args.backend, &[&a, &b]);
        Ok(Self { n: args.n, a, b, backend })
    }

    fn family1<F: Field>(&self, tol: Tolerance) -> Result<Family1<F>, Error> {
        Family1::new(self.n, F::from_scalar(&self.a)?, F::from_scalar(&self.b)?, tol)
    }
}

fn subspace_json<F: Field>(s: &Subspace<F>) -> Value {
    json!({ "dim": s.dim(), "basis": to_json(&s.as_matrix()) })
}

fn cmd_gen(args: GenArgs, tol: Tolerance) -> CliResult {
    let p = ParsedFamily::parse(&args.family)?;
    fn go<F: Field>(p: &ParsedFamily, reduced: bool, tol: Tolerance) -> CliResult {
        let images = p.images::<F>(reduced, tol)?;
        emit(json!({
            "family": p.family,
            "n": p.n,
            "backend": F::BACKEND,
            "reduced": reduced,
            "images": to_json(&images),
        }))?;
        Ok(EXIT_OK)
    }
    dispatch!(p.backend, go(&p, args.reduced, tol))
}

fn read_images(path: &PathBuf) -> Result<Vec<AnyMatrix>, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Json(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Json(e.to_string()))?;
    let list = match value {
        Value::Array(items) => items,
        Value::Object(mut obj) => match obj.remove("images") {
            Some(Value::Array(items)) => items,
            _ => return Err(Error::Json("expected an \"images\" array".into())),
        },
        _ => return Err(Error::Json("expected an array of matrices".into())),
    };
    list.into_iter()
        .map(|item| {
            let m = match item {
                Value::Object(mut obj) if obj.contains_key("matrix") => obj.remove("matrix").expect("checked"),
                other => other,
            };
            serde_json::from_value::<AnyMatrix>(m).map_err(|e| Error::Json(e.to_string()))
        })
        .collect()
}

fn report_relations<F: Field>(images: &[GeneratorImage<F>], tol: Tolerance) -> CliResult {
    let report = verify_relations(images, tol)?;
    let failures: Vec<String> = report.failures.iter().map(ToString::to_string).collect();
    emit(json!({
        "holds": report.holds(),
        "report": report.to_string(),
        "failures": failures,
    }))?;
    Ok(if report.holds() { EXIT_OK } else { EXIT_FAILED_CHECK })
}

fn cmd_verify(args: VerifyArgs, tol: Tolerance) -> CliResult {
    if let Some(path) = &args.images {
        let mats = read_images(path)?;
        let exact: Option<Vec<Matrix<Exact>>> = mats
            .iter()
            .map(|m| match m {
                AnyMatrix::Exact(x) => Some(x.clone()),
                AnyMatrix::Float(_) => None,
            })
            .collect();
        if let Some(ms) = exact {
            return report_relations(&number(ms), tol);
        }
        let floats: Vec<Matrix<Float>> = mats
            .into_iter()
            .map(|m| match m {
                AnyMatrix::Exact(x) => x.to_float(),
                AnyMatrix::Float(x) => x,
            })
            .collect();
        return report_relations(&number(floats), tol);
    }
    let p = ParsedFamily::parse(&args.family)?;
    fn go<F: Field>(p: &ParsedFamily, tol: Tolerance) -> CliResult {
        report_relations(&p.spec::<F>(tol)?.generators(), tol)
    }
    dispatch!(p.backend, go(&p, tol))
}

fn number<F>(ms: Vec<Matrix<F>>) -> Vec<GeneratorImage<F>> {
    ms.into_iter()
        .enumerate()
        .map(|(i, matrix)| GeneratorImage { k: i + 1, matrix })
        .collect()
}

fn cmd_reduce(args: ReduceArgs, tol: Tolerance) -> CliResult {
    if args.out != "json" {
        return Err(Error::Precondition(format!("unsupported output format {:?}", args.out)));
    }
    let p = ParsedParams::parse(&args.params)?;
    fn go<F: Field>(p: &ParsedParams, basis: BasisChoice, tol: Tolerance) -> CliResult {
        let fam = p.family1::<F>(tol)?;
        let value = match basis {
            BasisChoice::Std => {
                let r = fam.reduction();
                json!({
                    "n": p.n,
                    "backend": F::BACKEND,
                    "basis": "std",
                    "v": to_json(&r.v),
                    "q": to_json(&r.q),
                    "q_inv": to_json(&r.q_inv),
                    "images": to_json(&r.reduced_gens),
                })
            }
            BasisChoice::B => {
                let bb = fam.basis_b()?;
                json!({
                    "n": p.n,
                    "backend": F::BACKEND,
                    "basis": "B",
                    "w": to_json(&bb.w),
                    "p": to_json(&bb.p),
                    "p_inv": to_json(&bb.p_inv),
                    "images": to_json(&number(bb.s)),
                })
            }
        };
        emit(value)?;
        Ok(EXIT_OK)
    }
    dispatch!(p.backend, go(&p, args.basis, tol))
}

fn cmd_delta(args: DeltaArgs, tol: Tolerance) -> CliResult {
    let p = ParsedParams::parse(&args.params)?;
    fn go<F: Field>(p: &ParsedParams, mode: DeltaMode, tol: Tolerance) -> CliResult {
        let fam = p.family1::<F>(tol)?;
        let closed = (mode != DeltaMode::Direct).then(|| delta(&fam)).transpose()?;
        let direct = (mode != DeltaMode::Closed).then(|| delta_direct(&fam)).transpose()?;
        let mut out = json!({ "n": p.n, "backend": F::BACKEND });
        if let Some(c) = &closed {
            out["closed"] = to_json(&c.to_scalar());
        }
        if let Some(d) = &direct {
            out["direct"] = to_json(&d.to_scalar());
        }
        let mut code = EXIT_OK;
        if let (Some(c), Some(d)) = (&closed, &direct) {
            let agree = c.approx_eq(d, tol);
            out["agree"] = json!(agree);
            if !agree {
                code = EXIT_FAILED_CHECK;
            }
        }
        emit(out)?;
        Ok(code)
    }
    dispatch!(p.backend, go(&p, args.mode, tol))
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Irreducible => EXIT_OK,
        Status::Reducible => EXIT_REDUCIBLE,
    }
}

fn cmd_decide(args: DecideArgs, tol: Tolerance) -> CliResult {
    let p = ParsedParams::parse(&args.params)?;
    fn go<F: Field>(p: &ParsedParams, emit_witness: bool, tol: Tolerance) -> CliResult {
        let v = decide(p.n, F::from_scalar(&p.a)?, F::from_scalar(&p.b)?, tol)?;
        let mut out = json!({
            "status": v.status,
            "reason": v.reason,
            "diagnostics": to_json(&v.diagnostics),
        });
        if emit_witness {
            if let Some(w) = &v.witness {
                out["witness"] = subspace_json(w);
            }
        }
        emit(out)?;
        Ok(status_code(v.status))
    }
    dispatch!(p.backend, go(&p, args.emit_witness, tol))
}

fn cmd_roots(args: RootsArgs, tol: Tolerance) -> CliResult {
    if args.backend == Some(Backend::Exact) {
        return Err(Error::Precondition("roots are computed in floating point only".into()));
    }
    let roots = roots_of_p(args.n, tol)?;
    if args.csv {
        let mut out = io::stdout().lock();
        let mut write = || -> io::Result<()> {
            writeln!(out, "n,re,im,residual")?;
            for r in &roots {
                writeln!(out, "{},{},{},{:e}", args.n, r.re, r.im, r.residual)?;
            }
            Ok(())
        };
        write().map_err(|e| Error::Json(e.to_string()))?;
    } else {
        let poly = cleared_poly(args.n)?.poly;
        emit(json!({
            "n": args.n,
            "degree": poly.degree(),
            "coefficients": poly.coeffs().iter().map(ToString::to_string).collect::<Vec<_>>(),
            "roots": to_json(&roots),
        }))?;
    }
    Ok(EXIT_OK)
}

fn cmd_oracle(args: OracleArgs, tol: Tolerance) -> CliResult {
    let p = ParsedFamily::parse(&args.family)?;
    fn go<F: Field>(p: &ParsedFamily, reduced: bool, tol: Tolerance) -> CliResult {
        let images = image_matrices(&p.images::<F>(reduced, tol)?);
        let alg = algebra_basis(&images, tol)?;
        let full = alg.d * alg.d;
        let irreducible = alg.dim() == full;
        let lines = common_eigenlines(&images, tol)?;
        let mut out = json!({
            "algebra_dim": alg.dim(),
            "full_dim": full,
            "irreducible": irreducible,
            "eigenlines": lines.iter().map(subspace_json).collect::<Vec<_>>(),
        });
        if alg.rank_gap.is_finite() {
            out["rank_gap"] = json!(alg.rank_gap);
        }
        emit(out)?;
        Ok(if irreducible { EXIT_OK } else { EXIT_REDUCIBLE })
    }
    dispatch!(p.backend, go(&p, args.reduced, tol))
}

struct SweepRow {
    status: String,
    reason: String,
    abs_phat: Option<f64>,
    algebra_dim: Option<usize>,
}

fn sweep_point<F: Field>(
    n: usize,
    a: &Scalar,
    b: &Scalar,
    poly: Option<&IntPoly>,
    with_oracle: bool,
    tol: Tolerance,
) -> SweepRow {
    let run = || -> Result<SweepRow, Error> {
        let (a, b) = (F::from_scalar(a)?, F::from_scalar(b)?);
        let v = decide(n, a.clone(), b.clone(), tol)?;
        let algebra_dim = if with_oracle {
            let fam = Family1::new(n, a.clone(), b, tol)?;
            Some(algebra_basis(&image_matrices(&fam.reduced_generators()), tol)?.dim())
        } else {
            None
        };
        Ok(SweepRow {
            status: v.status.to_string(),
            reason: v.reason.to_string(),
            abs_phat: poly.map(|p| p.eval(&a).magnitude()),
            algebra_dim,
        })
    };
    run().unwrap_or_else(|e| SweepRow {
        status: "error".into(),
        reason: e.to_string().replace(',', ";"),
        abs_phat: None,
        algebra_dim: None,
    })
}

fn grid_axis(min: f64, max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![min],
        s => (0..s).map(|i| min + (max - min) * i as f64 / (s - 1) as f64).collect(),
    }
}

fn cmd_sweep(args: SweepArgs, tol: Tolerance) -> CliResult {
    let n_max = args.n_max.unwrap_or(args.n);
    if n_max < args.n {
        return Err(Error::Precondition("--n-max is below --n".into()));
    }
    let b = parse_scalar("b", &args.b)?;
    let points: Vec<Scalar> = match &args.points {
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_scalar("points", s))
            .collect::<Result<_, _>>()?,
        None => {
            if args.re_steps == 0 || args.im_steps == 0 {
                return Err(Error::Precondition("grid steps must be at least 1".into()));
            }
            let total = args.re_steps.saturating_mul(args.im_steps);
            if total > args.max_points {
                return Err(Error::Precondition(format!(
                    "grid of {total} points exceeds the cap of {}",
                    args.max_points
                )));
            }
            let ims = grid_axis(args.im_min, args.im_max, args.im_steps);
            grid_axis(args.re_min, args.re_max, args.re_steps)
                .into_iter()
                .flat_map(|re| ims.iter().map(move |&im| Scalar::Float(Float::new(re, im))))
                .collect()
        }
    };
    if points.iter().any(|p| match p {
        Scalar::Float(z) => !z.re.is_finite() || !z.im.is_finite(),
        Scalar::Exact(_) => false,
    }) {
        return Err(Error::Precondition("grid points must be finite".into()));
    }
    let ns: Vec<usize> = (args.n..=n_max).collect();
    let total = points.len().saturating_mul(ns.len());
    if total > args.max_points {
        return Err(Error::Precondition(format!(
            "sweep of {total} points exceeds the cap of {}",
            args.max_points
        )));
    }
    let mut inputs: Vec<&Scalar> = points.iter().collect();
    inputs.push(&b);
    let backend = pick_backend(args.backend, &inputs);

    let polys: Vec<Option<IntPoly>> = ns
        .iter()
        .map(|&n| cleared_poly(n).ok().map(|c| c.poly))
        .collect();
    let jobs: Vec<(usize, &Scalar)> = ns
        .iter()
        .enumerate()
        .flat_map(|(i, _)| points.iter().map(move |p| (i, p)))
        .collect();
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(i, a)| {
            let poly = polys[i].as_ref();
            dispatch!(backend, sweep_point(ns[i], a, &b, poly, args.with_oracle, tol))
        })
        .collect();

    let mut out = io::stdout().lock();
    let mut write = || -> io::Result<()> {
        writeln!(out, "n,re,im,status,reason,abs_phat,algebra_dim")?;
        for ((i, a), row) in jobs.iter().zip(&rows) {
            let z = a.to_float();
            let phat = row.abs_phat.map(|v| format!("{v:e}")).unwrap_or_default();
            let dim = row.algebra_dim.map(|d| d.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                ns[*i], z.re, z.im, row.status, row.reason, phat, dim
            )?;
        }
        Ok(())
    };
    write().map_err(|e| Error::Json(e.to_string()))?;
    Ok(EXIT_OK)
}
