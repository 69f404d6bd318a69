//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification or matrix check failed, 2 rounding
//! failed, 3 semidefinite search or model infeasible, 64 usage error or
//! invalid partition, 65 malformed input data, 70 internal error, 74 I/O
//! error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use symsos::certify::{check_matrix, verify_certificate, SosCertificate};
use symsos::grammodel::ModelError;
use symsos::matrix::SymMatrix;
use symsos::pipeline::{certify, model_for, CertifyRequest, PipelineError};
use symsos::polyring::{parse_rational, Rational, SparsePoly};
use symsos::posetgen::{emit_dot, report_json, sweep, SweepConfig, SweepMode};
use symsos::rationalize::RoundingConfig;
use symsos::sdpsolve::SolverConfig;
use symsos::symfunc::{dominance_compare, expand, normalized, BasisKind, Partition};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_ROUNDING: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_INTERNAL: u8 = 70;
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(name = "symsos", version, about = "Exact SOS certificates for differences of term-normalized symmetric polynomials")]
struct Cli {
    /// Machine-readable JSON on standard output.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every random choice (solver start, sampling).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// More progress output on standard error (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify H_lambda <= H_mu by an exact sum of squares of (H_mu - H_lambda)(x^2).
    Certify(CertifyArgs),
    /// Re-check a certificate file with exact arithmetic.
    Verify { certificate: PathBuf },
    /// Check a Gram matrix file against (H_mu - H_lambda)(x^2).
    CheckMatrix {
        matrix: PathBuf,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value_t = 3)]
        nvars: usize,
    },
    /// Print the monomial expansion of a basis element.
    Expand(ExpandArgs),
    /// Compare two partitions in dominance order.
    Dominance { mu: String, lambda: String },
    /// Sweep all pairs of one degree and write the poset as DOT.
    Poset(PosetArgs),
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    mu: String,
    #[arg(long)]
    lambda: String,
    #[arg(long, default_value_t = 3)]
    nvars: usize,
    #[arg(long, default_value_t = 150)]
    denom_bound: u64,
    #[arg(long, default_value_t = 10)]
    escalation: u64,
    #[arg(long, default_value_t = 12)]
    max_escalations: u32,
    /// Deflated minimum eigenvalue accepted as PSD.
    #[arg(long, default_value_t = 1e-9)]
    sdp_tol: f64,
    /// Newton-step budget of the semidefinite search.
    #[arg(long, default_value_t = 2000)]
    sdp_iters: usize,
    /// Additional real zero, e.g. `1,1,0` or `1/2,1,1` (repeatable).
    #[arg(long = "zero")]
    zeros: Vec<String>,
    /// Certificate output path.
    #[arg(short, long, default_value = "certificate.json")]
    output: PathBuf,
    /// Write a JSON summary of the Gram model here.
    #[arg(long)]
    dump_model: Option<PathBuf>,
}

#[derive(Args)]
struct ExpandArgs {
    /// m, e, p, h, or s.
    #[arg(long, default_value = "h")]
    basis: String,
    #[arg(long)]
    partition: String,
    /// Subtract the element indexed by this partition.
    #[arg(long)]
    minus: Option<String>,
    #[arg(long, default_value_t = 3)]
    nvars: usize,
    /// Divide by the value at the all-ones point.
    #[arg(long)]
    normalized: bool,
    /// Substitute x_i -> x_i^2.
    #[arg(long)]
    squared: bool,
    /// One term per line as `num/den e1 ... en`.
    #[arg(long)]
    terms: bool,
}

#[derive(Args)]
struct PosetArgs {
    #[arg(long)]
    degree: u32,
    #[arg(long, default_value_t = 3)]
    nvars: usize,
    /// Run the full rounding pipeline for each pair.
    #[arg(long)]
    exact: bool,
    /// DOT output path; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Per-pair JSON report path.
    #[arg(long)]
    report: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn partition(s: &str) -> Result<Partition, Failure> {
    s.parse().map_err(|e: symsos::symfunc::SymError| Failure::new(EXIT_USAGE, e.to_string()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn parse_point(s: &str, nvars: usize) -> Result<Vec<Rational>, Failure> {
    let point = s
        .split(',')
        .map(|t| parse_rational(t.trim()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::new(EXIT_USAGE, format!("zero `{s}`: {e}")))?;
    if point.len() != nvars {
        return Err(Failure::new(EXIT_USAGE, format!("zero `{s}` needs {nvars} coordinates")));
    }
    Ok(point)
}

fn pipeline_failure(e: PipelineError) -> Failure {
    let code = match &e {
        PipelineError::Symmetric(_) | PipelineError::NoVariables => EXIT_USAGE,
        PipelineError::Model(ModelError::Infeasible) | PipelineError::Sdp { .. } => EXIT_INFEASIBLE,
        PipelineError::Model(ModelError::NotAZero(_) | ModelError::OriginZero | ModelError::PointLength { .. }) => {
            EXIT_USAGE
        }
        PipelineError::Model(_) => EXIT_DATA,
        PipelineError::Rounding(_) => EXIT_ROUNDING,
        PipelineError::Certify(_) | PipelineError::Internal(_) => EXIT_INTERNAL,
    };
    Failure::new(code, e.to_string())
}

fn cmd_certify(args: &CertifyArgs, cli: &Cli) -> Outcome {
    let mu = partition(&args.mu)?;
    let lambda = partition(&args.lambda)?;
    if mu.weight() != lambda.weight() {
        return Err(Failure::new(
            EXIT_USAGE,
            format!("partitions {mu} and {lambda} have different weights"),
        ));
    }
    if args.nvars == 0 || args.sdp_tol <= 0.0 || args.denom_bound == 0 || args.escalation < 2 {
        return Err(Failure::new(
            EXIT_USAGE,
            "nvars, sdp-tol and denom-bound must be positive and escalation at least 2",
        ));
    }
    let mut req = CertifyRequest::new(mu, lambda, args.nvars);
    req.rounding = RoundingConfig {
        denominator_bound: args.denom_bound,
        escalation_factor: args.escalation,
        max_escalations: args.max_escalations,
    };
    req.solver = SolverConfig {
        max_iterations: args.sdp_iters,
        feasibility_tolerance: args.sdp_tol,
        seed: cli.seed,
        ..SolverConfig::default()
    };
    req.extra_zeros = args
        .zeros
        .iter()
        .map(|z| parse_point(z, args.nvars))
        .collect::<Result<_, _>>()?;
    if let Some(path) = &args.dump_model {
        if req.mu != req.lambda {
            let model = model_for(&req).map_err(pipeline_failure)?;
            let dump = serde_json::to_string_pretty(&model.dump()).expect("dump serializes");
            write(path, &dump)?;
        }
    }
    let out = certify(&req).map_err(pipeline_failure)?;
    write(&args.output, &out.certificate.to_json_string())?;
    let margin = out.numeric.as_ref().map(|n| n.min_eigenvalue_deflated);
    if cli.json {
        println!(
            "{}",
            json!({
                "status": "certified",
                "output": args.output.display().to_string(),
                "squares": out.certificate.squares.len(),
                "max_denominator_digits": out.max_denominator_digits,
                "free_parameters": out.free_parameters,
                "kernel_vectors": out.kernel_vectors,
                "denominator_bound": out.denominator_bound.as_ref().map(ToString::to_string),
                "rounding_attempts": out.rounding_attempts,
                "numeric_margin": margin,
                "seconds": out.elapsed.as_secs_f64(),
            })
        );
    } else {
        println!("certified H_{} <= H_{} in {} variables", req.lambda, req.mu, req.nvars);
        println!("  squares: {}", out.certificate.squares.len());
        println!("  max denominator digits: {}", out.max_denominator_digits);
        println!("  free parameters: {}", out.free_parameters);
        if let (Some(b), Some(m)) = (&out.denominator_bound, margin) {
            println!("  denominator bound: {b} ({} attempt(s))", out.rounding_attempts);
            println!("  numeric deflated lambda_min: {m:e}");
        }
        println!("  wall time: {:.3} s", out.elapsed.as_secs_f64());
        println!("  written to {}", args.output.display());
    }
    Ok(0)
}

fn cmd_verify(path: &Path, cli: &Cli) -> Outcome {
    let text = read(path)?;
    let cert = SosCertificate::from_json_str(&text).map_err(|e| Failure::new(EXIT_DATA, e.to_string()))?;
    let report = verify_certificate(&cert);
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        println!("{}: {}", path.display(), if report.passed { "PASS" } else { "FAIL" });
        println!("  squares: {}", report.square_count);
        println!("  coefficients positive: {}", report.coefficients_positive);
        println!("  sum of squares equals target: {}", report.identity_holds);
        println!("  gram PSD: {}", report.gram_psd);
        println!("  gram reproduces target: {}", report.gram_reconstructs_target);
        for (m, want, got) in report.mismatched_terms.iter().take(20) {
            println!("  mismatch at {m}: target {want}, squares give {got}");
        }
        for note in &report.notes {
            println!("  note: {note}");
        }
    }
    Ok(if report.passed { 0 } else { EXIT_CHECK_FAILED })
}

fn cmd_check_matrix(path: &Path, mu: &str, lambda: &str, nvars: usize, cli: &Cli) -> Outcome {
    let mu = partition(mu)?;
    let lambda = partition(lambda)?;
    if mu.weight() != lambda.weight() || nvars == 0 {
        return Err(Failure::new(EXIT_USAGE, "partitions must have equal weight and nvars must be positive"));
    }
    let a = SymMatrix::<Rational>::from_text(&read(path)?).map_err(|e| Failure::new(EXIT_DATA, e.to_string()))?;
    let report = check_matrix(&a, &mu, &lambda, nvars).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        println!("{}: {}", path.display(), if report.passed { "PASS" } else { "FAIL" });
        println!("  dimension: {}", report.dimension_ok);
        println!("  invariance: {}", report.invariant);
        println!("  kernel: {}", report.kernel_ok);
        println!("  reconstruction: {}", report.reconstruction_ok);
        println!("  psd: {}", report.psd);
        if let Some(r) = report.rank {
            println!("  rank: {r}");
        }
        for (m, want, got) in report.reconstruction_mismatches.iter().take(20) {
            println!("  mismatch at {m}: target {want}, matrix gives {got}");
        }
    }
    Ok(if report.passed { 0 } else { EXIT_CHECK_FAILED })
}

fn cmd_expand(args: &ExpandArgs, cli: &Cli) -> Outcome {
    let basis: BasisKind = args.basis.parse().map_err(|e: symsos::symfunc::SymError| Failure::new(EXIT_USAGE, e.to_string()))?;
    if args.nvars == 0 {
        return Err(Failure::new(EXIT_USAGE, "nvars must be positive"));
    }
    let element = |p: &Partition| -> Result<SparsePoly, Failure> {
        if args.normalized {
            normalized(basis, p, args.nvars).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))
        } else {
            Ok(expand(basis, p, args.nvars))
        }
    };
    let first = partition(&args.partition)?;
    let mut poly = element(&first)?;
    if let Some(m) = &args.minus {
        let other = partition(m)?;
        if other.weight() != first.weight() {
            return Err(Failure::new(EXIT_USAGE, "partitions must have equal weight"));
        }
        poly = &poly - &element(&other)?;
    }
    if args.squared {
        poly = poly.substitute_squares();
    }
    if cli.json {
        println!("{}", json!({ "nvars": args.nvars, "terms": poly.to_json_terms() }));
    } else if args.terms {
        print!("{}", poly.to_text());
    } else {
        println!("{poly}");
    }
    Ok(0)
}

fn cmd_dominance(mu: &str, lambda: &str, cli: &Cli) -> Outcome {
    let (a, b) = (partition(mu)?, partition(lambda)?);
    let rel = dominance_compare(&a, &b).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    if cli.json {
        println!("{}", json!({ "mu": a, "lambda": b, "relation": rel }));
    } else {
        println!("{rel}");
    }
    Ok(0)
}

fn cmd_poset(args: &PosetArgs, cli: &Cli) -> Outcome {
    if args.degree == 0 || args.nvars == 0 {
        return Err(Failure::new(EXIT_USAGE, "degree and nvars must be positive"));
    }
    let mode = if args.exact { SweepMode::Exact } else { SweepMode::Numeric };
    let mut config = SweepConfig::new(args.degree, args.nvars, mode);
    config.solver.seed = cli.seed;
    let result = sweep(&config);
    let dot = emit_dot(&result.nodes, &result.edges);
    if let Some(path) = &args.report {
        write(path, &serde_json::to_string_pretty(&report_json(&result)).expect("report serializes"))?;
    }
    match &args.output {
        Some(path) => write(path, &dot)?,
        None if !cli.json => print!("{dot}"),
        None => {}
    }
    if cli.json {
        println!(
            "{}",
            json!({
                "nodes": result.nodes,
                "edges": result.edges,
                "pairs": result.pairs.len(),
            })
        );
    }
    Ok(0)
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Certify(a) => cmd_certify(a, cli),
        Command::Verify { certificate } => cmd_verify(certificate, cli),
        Command::CheckMatrix { matrix, mu, lambda, nvars } => cmd_check_matrix(matrix, mu, lambda, *nvars, cli),
        Command::Expand(a) => cmd_expand(a, cli),
        Command::Dominance { mu, lambda } => cmd_dominance(mu, lambda, cli),
        Command::Poset(a) => cmd_poset(a, cli),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            if code != 0 && std::env::args().any(|a| a == "--json") {
                let message = e.kind().to_string();
                println!("{}", json!({ "error": message, "exit_code": code }));
            }
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            if cli.json {
                println!("{}", json!({ "error": f.message, "exit_code": f.code }));
            }
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
