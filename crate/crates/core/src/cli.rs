//! The `staglab` command line: `solve`, `generate` and `verify`.
//!
//! Exit status: 0 on success, 1 when a numerical invariant fails, 2 for
//! input, parse, usage or I/O errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::diagnostics::Thresholds;
use crate::error::{Error, Result};
use crate::instances::{parse_steps, ExpectedStagnation, GeneratorSpec, ProblemInstance, Provenance};
use crate::io::{
    read_instance, read_matrix_market, write_instance, write_report, ReportFormat, RhsSource, RunConfig,
    RunReport, DEFAULT_CONV_TOL,
};
use crate::numeric::unit;
use crate::pipeline::analyze;
use crate::verify::{check_analysis, seed_sweep, verify_instance, Violation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "staglab", version, about = "Instrumented GMRES with stagnation diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run instrumented GMRES and report every step.
    Solve(SolveArgs),
    /// Write a generated instance to a directory.
    Generate(GenerateArgs),
    /// Check every invariant on an instance or a seeded random sweep.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long, env = "STAGLAB_EPS_Z", default_value_t = 1e-10)]
    eps_z: f64,
    #[arg(long, env = "STAGLAB_EPS_S", default_value_t = 1e-10)]
    eps_s: f64,
    #[arg(long, env = "STAGLAB_EPS_EIG", default_value_t = 1e-9)]
    eps_eig: f64,
}

impl ThresholdArgs {
    fn get(&self) -> Thresholds {
        Thresholds {
            eps_z: self.eps_z,
            eps_s: self.eps_s,
            eps_eig: self.eps_eig,
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Generator spec (e.g. `paper-example`, `planted:n=8,steps=3+4`),
    /// instance directory, or `.mtx` file.
    source: String,
    /// `e1`, `random:<seed>`, or a file of `re im` lines.
    #[arg(long)]
    rhs: Option<String>,
    /// Defaults to the matrix order.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Convergence tolerance relative to `||b||`.
    #[arg(long, default_value_t = DEFAULT_CONV_TOL)]
    tol: f64,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Defaults to the report's extension, else json.
    #[arg(long)]
    format: Option<ReportFormat>,
    /// Leave the harmonic pairs out of the report.
    #[arg(long)]
    no_harmonic: bool,
    /// Include residual and harmonic vectors in the report.
    #[arg(long)]
    vectors: bool,
    #[command(flatten)]
    thresholds: ThresholdArgs,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// `paper-example`, `cyclic-shift`, `planted`, `step-one` or `random`.
    kind: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Planted stagnation steps, e.g. `3+4`.
    #[arg(long)]
    steps: Option<String>,
    #[arg(short = 'o', long = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    source: Option<String>,
    /// Number of random instances (seeds 0..N).
    #[arg(long)]
    seed_sweep: Option<u64>,
    /// Order of the sweep instances.
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long)]
    rhs: Option<String>,
    #[command(flatten)]
    thresholds: ThresholdArgs,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_INPUT
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let res = match cli.command {
        Command::Solve(a) => solve(a, out, err),
        Command::Generate(a) => generate(a, out),
        Command::Verify(a) => verify(a, out, err),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit status for an error that aborted a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::Io(_)
        | Error::InvalidConfig(_)
        | Error::InvalidSize(_)
        | Error::DimensionMismatch(_)
        | Error::NonFinite { .. }
        | Error::ZeroRhs
        | Error::IndexOutOfRange { .. } => EXIT_INPUT,
        _ => EXIT_VIOLATION,
    }
}

/// Resolves a generator spec, instance directory or `.mtx` file. An `.mtx`
/// file gets `b = e_1` unless `rhs` says otherwise; overriding the
/// right-hand side drops any stagnation expectation.
pub fn load_source(source: &str, rhs: Option<&str>) -> Result<ProblemInstance> {
    let path = Path::new(source);
    let mut inst = if path.is_dir() {
        read_instance(path)?
    } else if path.is_file() {
        let matrix = read_matrix_market(path)?;
        let n = matrix.rows();
        let prov = Provenance::new("file", &[("path", source.to_string())], None);
        ProblemInstance::new(matrix, unit(n, 0), prov, ExpectedStagnation::Unknown)?
    } else if GeneratorSpec::is_known_name(source) {
        source.parse::<GeneratorSpec>()?.build()?
    } else {
        return Err(Error::Io(format!("'{source}' is neither a file, a directory nor a generator")));
    };
    if let Some(r) = rhs {
        let b = r.parse::<RhsSource>()?.resolve(inst.dim())?;
        inst = ProblemInstance::new(inst.matrix, b, inst.provenance, ExpectedStagnation::Unknown)?;
    }
    Ok(inst)
}

fn solve(a: SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let inst = load_source(&a.source, a.rhs.as_deref())?;
    let config = RunConfig {
        matrix_source: a.source.clone(),
        rhs_source: a.rhs.clone(),
        max_iter: a.max_iter.unwrap_or(inst.dim()),
        conv_tol: a.tol,
        report_path: a.report.clone(),
        emit_harmonic: !a.no_harmonic,
        emit_vectors: a.vectors,
        thresholds: a.thresholds.get(),
    };
    config.validate()?;
    let analysis = analyze(inst.operator(), &inst.rhs, config.max_iter, config.conv_tol, &config.thresholds)?;
    let report = RunReport::new(&config, &analysis);
    match &config.report_path {
        Some(p) => {
            let format = a.format.unwrap_or_else(|| {
                if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
                    ReportFormat::Csv
                } else {
                    ReportFormat::Json
                }
            });
            write_report(&report, p, format)?;
            let _ = writeln!(
                out,
                "{} steps, status {:?}, report written to {}",
                report.iterations.len(),
                report.status,
                p.display()
            );
        }
        None => print_table(&report, out),
    }
    let violations = check_analysis(&analysis, &inst.expected)?;
    Ok(report_violations(&violations, err))
}

fn print_table(report: &RunReport, out: &mut dyn Write) {
    let _ = writeln!(out, "{:>4}  {:>22}  {:>10}  {:>10}  sigmas", "m", "resnorm", "stagnated", "consistent");
    for it in &report.iterations {
        let sig: Vec<String> = it
            .harmonic
            .iter()
            .map(|h| match (h.sigma_re, h.sigma_im) {
                (Some(re), Some(im)) if im.abs() <= 1e-12 * re.abs().max(1.0) => format!("{re:.7}"),
                (Some(re), Some(im)) => format!("{re:.7}{im:+.7}i"),
                _ => "inf".into(),
            })
            .collect();
        let _ = writeln!(
            out,
            "{:>4}  {:>22}  {:>10}  {:>10}  {}",
            it.m,
            it.resnorm,
            it.stagnated,
            it.predicates_consistent,
            sig.join(" ")
        );
    }
    let _ = writeln!(out, "status: {:?}", report.status);
}

fn generate(a: GenerateArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = if a.kind.contains(':') {
        if a.n.is_some() || a.seed.is_some() || a.steps.is_some() {
            return Err(Error::InvalidConfig("give parameters either inline or as flags, not both".into()));
        }
        a.kind.parse::<GeneratorSpec>()?
    } else {
        let steps = a.steps.as_deref().map(parse_steps).transpose()?;
        GeneratorSpec::from_parts(&a.kind, a.n, a.seed, steps)?
    };
    let inst = spec.build()?;
    write_instance(&inst, &a.out)?;
    let _ = writeln!(out, "wrote {} (n = {}) to {}", inst.provenance.generator, inst.dim(), a.out.display());
    Ok(EXIT_OK)
}

fn verify(a: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let t = a.thresholds.get();
    RunConfig {
        thresholds: t,
        ..RunConfig::new("", 1)
    }
    .validate()?;
    if a.source.is_none() && a.seed_sweep.is_none() {
        return Err(Error::InvalidConfig("verify needs a source or --seed-sweep".into()));
    }
    let mut code = EXIT_OK;
    if let Some(src) = &a.source {
        let inst = load_source(src, a.rhs.as_deref())?;
        let v = verify_instance(&inst, &t)?;
        let _ = writeln!(out, "{src}: {} violation(s)", v.len());
        code = code.max(report_violations(&v, err));
    }
    if let Some(count) = a.seed_sweep {
        let outcomes = seed_sweep(a.n, count, &t)?;
        let bad: Vec<_> = outcomes.iter().filter(|o| !o.violations.is_empty()).collect();
        for o in &bad {
            for v in &o.violations {
                let _ = writeln!(err, "seed {}: {v}", o.seed);
            }
        }
        let _ = writeln!(
            out,
            "seed sweep n = {}: {} of {} instances clean",
            a.n,
            outcomes.len() - bad.len(),
            outcomes.len()
        );
        if !bad.is_empty() {
            code = EXIT_VIOLATION;
        }
    }
    Ok(code)
}

fn report_violations(v: &[Violation], err: &mut dyn Write) -> i32 {
    for x in v {
        let _ = writeln!(err, "violation: {x}");
    }
    if v.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}
