use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use krein_lsq::error::{KreinError, Result};
use krein_lsq::harness::io::{mat_to_json, parse_operator, parse_problem, ProblemFile};
use krein_lsq::harness::{generate_instance, run_suite_with, GeneratorSpec, Regime, SuiteOptions};
use krein_lsq::jtrace::{solve_trace_min, trace_j};
use krein_lsq::krein::{random_signature_operator, KreinSpace, SignatureOperator};
use krein_lsq::linalg::C64;
use krein_lsq::lsq::{solve_imms, solve_ims};
use krein_lsq::schur::{is_weakly_complementable, schur_complement};
use krein_lsq::subspace::is_complementable;

/// Krein-space Schur complements, indefinite least squares and J-trace
/// optimization.
#[derive(Parser)]
#[command(name = "krein-lsq", version)]
struct Cli {
    /// Override the tolerance of every Krein space read or generated.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Schur complement of W with respect to S (or R(B) when S is absent).
    Schur {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Indefinite minimum solution of BX = C with weight W.
    Ims {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Indefinite min-max solution of BX = C with weight W.
    Imms {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// J-trace of an operator.
    Trace {
        #[arg(short, long)]
        input: PathBuf,
        /// Operator file: a matrix, or an object with key "T".
        #[arg(long)]
        op: PathBuf,
        /// Use a seeded random signature operator instead of J_ref.
        #[arg(long)]
        alt_signature: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Minimizer of tr_J((BX - C)# W (BX - C)).
    TraceMin {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        alt_signature: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a verification suite on generated instances.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        dim: usize,
        /// Cycle instance dimensions over `dim..=max_dim`.
        #[arg(long)]
        max_dim: Option<usize>,
        #[arg(long, default_value_t = 1)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Use only this regime (default: the suite's own mix).
        #[arg(long)]
        regime: Option<Regime>,
        /// Samples per Krein-order certificate.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Generate a problem file with controlled structure.
    Generate {
        #[arg(long)]
        regime: Regime,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Ok(Value),
    /// Ran, but a verification failed.
    Failed(Value),
}

fn exit_code(e: &KreinError) -> u8 {
    match e {
        KreinError::MalformedInput(_)
        | KreinError::DimensionMismatch { .. }
        | KreinError::InvalidSpace(_)
        | KreinError::NotASignature(_)
        | KreinError::NotKreinSelfadjoint { .. }
        | KreinError::UnknownSuite(_)
        | KreinError::UnsatisfiableSpec(_) => 2,
        _ => 1,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| KreinError::MalformedInput(format!("{}: {e}", path.display())))
}

fn write(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    fs::write(path, text + "\n").map_err(|e| KreinError::MalformedInput(format!("{}: {e}", path.display())))
}

fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

fn load(path: &Path) -> Result<ProblemFile> {
    parse_problem(&read(path)?)
}

fn signature(space: &KreinSpace, alt: Option<u64>) -> SignatureOperator {
    match alt {
        Some(seed) => random_signature_operator(space, seed),
        None => space.reference_signature(),
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let tol = cli.tol;
    match cli.command {
        Command::Schur { input, output } => {
            let file = load(&input)?;
            let space = file.space(tol)?;
            let w = file.weight()?;
            let s = file.subspace()?;
            let complementable = is_complementable(&w, &s, &space)?;
            let weak = is_weakly_complementable(&w, &s, &space)?;
            let res = schur_complement(&w, &s, &space)?;
            let cert = res.certify(&s, &space);
            let out = json!({
                "schur": mat_to_json(&res.schur),
                "compression": mat_to_json(&res.compression),
                "complementable": complementable,
                "weakly_complementable": weak,
                "certificate": cert,
            });
            finish(out, output)
        }
        Command::Ims { input, output } => {
            let p = load(&input)?.problem(tol)?;
            let sol = solve_ims(&p)?;
            let out = json!({
                "x0": mat_to_json(&sol.x0),
                "min_value": mat_to_json(&sol.min_value),
                "schur_value": sol.schur_value.as_ref().map(mat_to_json),
                "normal_residual": sol.normal_residual,
                "certificate": sol.certificate,
            });
            finish(out, output)
        }
        Command::Imms { input, output } => {
            let p = load(&input)?.problem(tol)?;
            let sol = solve_imms(&p)?;
            let out = json!({
                "z": mat_to_json(&sol.z),
                "z1": mat_to_json(&sol.z1),
                "z2": mat_to_json(&sol.z2),
                "minmax_value": mat_to_json(&sol.minmax_value),
                "schur_value": sol.schur_value.as_ref().map(mat_to_json),
            });
            finish(out, output)
        }
        Command::Trace { input, op, alt_signature, output } => {
            let file = load(&input)?;
            let space = file.space(tol)?;
            let t = parse_operator(&read(&op)?, file.dim)?;
            let rep = trace_j(&t, &signature(&space, alt_signature), &space)?;
            let out = json!({
                "value": complex(rep.value),
                "j_used": mat_to_json(rep.j_used.matrix()),
                "trace_norm": rep.trace_norm,
                "bound_check": rep.bound_check,
            });
            finish(out, output)
        }
        Command::TraceMin { input, alt_signature, output } => {
            let p = load(&input)?.problem(tol)?;
            let j = signature(&p.space, alt_signature);
            let sol = solve_trace_min(&p, &j)?;
            let out = json!({
                "x0": mat_to_json(&sol.x0),
                "value": sol.value,
                "j_used": mat_to_json(j.matrix()),
                "certificate": sol.certificate,
            });
            finish(out, output)
        }
        Command::Verify { suite, dim, max_dim, instances, seed, report, regime, samples } => {
            let spec = GeneratorSpec::new(dim, seed, regime.unwrap_or(Regime::Complementable));
            let dims = max_dim.map(|m| (dim..=m).collect()).unwrap_or_default();
            let opts = SuiteOptions { samples, regimes: regime.into_iter().collect(), dims };
            let rep = run_suite_with(&suite, &spec, instances, &opts)?;
            let value = serde_json::to_value(&rep).expect("reports serialize");
            let summary = match &report {
                Some(path) => {
                    write(path, &value)?;
                    json!({
                        "suite": rep.suite,
                        "passed": rep.passed,
                        "failure_count": rep.failure_count,
                        "report": path.display().to_string(),
                        "values": rep.values,
                    })
                }
                None => value,
            };
            Ok(if rep.passed { Outcome::Ok(summary) } else { Outcome::Failed(summary) })
        }
        Command::Generate { regime, dim, seed, output } => {
            let inst = generate_instance(&GeneratorSpec::new(dim, seed, regime))?;
            let mut file = ProblemFile::from_instance(&inst);
            if tol.is_some() {
                file.tol = tol;
            }
            write(&output, &serde_json::to_value(&file).expect("problem files serialize"))?;
            Ok(Outcome::Ok(json!({
                "output": output.display().to_string(),
                "regime": regime,
                "certificate": inst.certificate,
            })))
        }
    }
}

fn finish(out: Value, output: Option<PathBuf>) -> Result<Outcome> {
    if let Some(path) = output {
        write(&path, &out)?;
    }
    Ok(Outcome::Ok(out))
}

fn print(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values serialize"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.tol {
        if !(t >= 0.0 && t.is_finite()) {
            print(&json!({"error": "MalformedInput", "message": format!("--tol must be a nonnegative number, got {t}")}));
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(Outcome::Ok(v)) => {
            print(&v);
            ExitCode::SUCCESS
        }
        Ok(Outcome::Failed(v)) => {
            print(&v);
            ExitCode::from(1)
        }
        Err(e) => {
            print(&json!({"error": e.kind(), "message": e.to_string()}));
            ExitCode::from(exit_code(&e))
        }
    }
}
