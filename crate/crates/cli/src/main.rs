//! `nchadamard`: command line front end.
//!
//! Every invocation prints one JSON object on stdout and exits with 0 when
//! the check passes, 1 when a mathematical check fails, and 2 on usage or
//! input errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use nchadamard::classify::canonical_form_3x3;
use nchadamard::hadamard::{
    dephase, dita_deform, fourier, is_biunitary, is_classical, tensor, verify_hadamard, DEFAULT_TOLERANCE,
};
use nchadamard::invariants::{estimate_moments, DEFAULT_CAP, DEFAULT_EIG_TOL};
use nchadamard::magic::{build_magic, verify_magic};
use nchadamard::search::{search_hadamard, SearchConfig};
use nchadamard::wreath::wreath_check;
use nchadamard::{io, json as fmt, AlgebraShape, Error, NCMatrix};

#[derive(Parser, Debug)]
#[command(name = "nchadamard", version, about = "Hadamard matrices over finite-dimensional C*-algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the Hadamard axioms.
    Verify {
        h: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Check that H/√N is biunitary.
    Biunitary {
        h: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Check whether the entries commute (and commute with their adjoints).
    Classical {
        h: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Write the Fourier matrix F_N.
    Fourier {
        n: usize,
        #[arg(long, default_value = "1")]
        shape: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the tensor product H ⊗ K.
    Tensor {
        h: PathBuf,
        k: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Write the deformed tensor product H ⊗_Q K.
    Dita {
        h: PathBuf,
        k: PathBuf,
        q: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Normalize the first row and column (commutative algebras only).
    Dephase {
        h: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build the magic unitary of H.
    Magic {
        h: PathBuf,
        /// Verify the magic unitary axioms instead of printing the entries.
        #[arg(long)]
        check: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Estimate the moments c_1..c_kmax of the main character.
    Moments {
        h: PathBuf,
        #[arg(long)]
        kmax: usize,
        #[arg(long, default_value_t = DEFAULT_EIG_TOL)]
        eig_tol: f64,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Check the product formula and the factorization of the magic unitary of H ⊗_Q K.
    WreathCheck {
        h: PathBuf,
        k: PathBuf,
        q: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Check a 3x3 Hadamard matrix against the canonical form.
    Classify3 {
        h: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Numerical multi-restart search for an N x N Hadamard matrix.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        shape: String,
        #[arg(long)]
        self_adjoint: bool,
        /// Entry parametrization by name; overrides --self-adjoint.
        #[arg(long)]
        parametrization: Option<String>,
        #[arg(long)]
        restarts: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-8)]
        target: f64,
        /// Where to write the best candidate.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Verify { .. } => "verify",
            Command::Biunitary { .. } => "biunitary",
            Command::Classical { .. } => "classical",
            Command::Fourier { .. } => "fourier",
            Command::Tensor { .. } => "tensor",
            Command::Dita { .. } => "dita",
            Command::Dephase { .. } => "dephase",
            Command::Magic { .. } => "magic",
            Command::Moments { .. } => "moments",
            Command::WreathCheck { .. } => "wreath-check",
            Command::Classify3 { .. } => "classify3",
            Command::Search { .. } => "search",
        }
    }
}

struct Outcome {
    passed: bool,
    report: Value,
}

fn outcome<T: Serialize>(passed: bool, report: &T) -> Outcome {
    Outcome {
        passed,
        report: serde_json::to_value(report).expect("reports serialize"),
    }
}

/// Writes `h` to `output` if given; otherwise embeds it in the report.
fn emit_matrix(h: &NCMatrix, output: Option<&Path>) -> Result<Outcome, Error> {
    let mut report = json!({ "rows": h.rows(), "cols": h.cols(), "shape": h.shape() });
    match output {
        Some(path) => {
            io::save(h, path)?;
            report["output"] = json!(path.display().to_string());
        }
        None => report["matrix"] = serde_json::to_value(h).expect("matrices serialize"),
    }
    Ok(Outcome { passed: true, report })
}

fn run(command: &Command) -> Result<Outcome, Error> {
    match command {
        Command::Verify { h, tol } => {
            let r = verify_hadamard(&io::load(h)?, *tol)?;
            Ok(outcome(r.passed, &r))
        }
        Command::Biunitary { h, tol } => {
            let r = is_biunitary(&io::load(h)?, *tol)?;
            Ok(outcome(r.biunitary, &r))
        }
        Command::Classical { h, tol } => {
            let r = is_classical(&io::load(h)?, *tol)?;
            Ok(outcome(r.classical, &r))
        }
        Command::Fourier { n, shape, output } => {
            let shape = AlgebraShape::parse(shape)?;
            emit_matrix(&fourier(*n, &shape)?, output.as_deref())
        }
        Command::Tensor { h, k, output, tol } => {
            let t = tensor(&io::load(h)?, &io::load(k)?, *tol)?;
            emit_matrix(&t, output.as_deref())
        }
        Command::Dita { h, k, q, output, tol } => {
            let l = dita_deform(&io::load(h)?, &io::load(k)?, &io::load(q)?, *tol)?;
            emit_matrix(&l, output.as_deref())
        }
        Command::Dephase { h, output } => emit_matrix(&dephase(&io::load(h)?)?, output.as_deref()),
        Command::Magic { h, check, output, tol } => {
            let p = build_magic(&io::load(h)?, *tol)?;
            if let Some(path) = output {
                let mut text = fmt::to_string(&p).expect("magic unitaries serialize");
                text.push('\n');
                std::fs::write(path, text).map_err(|source| io::FileError::Io {
                    path: path.clone(),
                    source,
                })?;
            }
            if *check {
                let r = verify_magic(&p, *tol)?;
                Ok(outcome(r.passed, &r))
            } else if let Some(path) = output {
                Ok(outcome(true, &json!({ "size": p.size(), "output": path.display().to_string() })))
            } else {
                Ok(outcome(true, &p))
            }
        }
        Command::Moments {
            h,
            kmax,
            eig_tol,
            cap,
            tol,
        } => {
            let p = build_magic(&io::load(h)?, *tol)?;
            let r = estimate_moments(&p, *kmax, *eig_tol, *cap)?;
            Ok(outcome(!r.flagged(), &r))
        }
        Command::WreathCheck { h, k, q, tol } => {
            let r = wreath_check(&io::load(h)?, &io::load(k)?, &io::load(q)?, *tol)?;
            Ok(outcome(r.passed, &r))
        }
        Command::Classify3 { h, tol } => {
            let r = canonical_form_3x3(&io::load(h)?, *tol)?;
            Ok(outcome(r.passed, &r))
        }
        Command::Search {
            n,
            shape,
            self_adjoint,
            parametrization,
            restarts,
            seed,
            max_iters,
            target,
            output,
        } => {
            let cfg = SearchConfig {
                n: *n,
                shape: AlgebraShape::parse(shape)?,
                self_adjoint_entries: *self_adjoint,
                restarts: *restarts,
                max_iters: *max_iters,
                seed: *seed,
                target_residual: *target,
                parametrization: parametrization.clone(),
            };
            let r = search_hadamard(&cfg)?;
            if let Some(path) = output {
                io::save(&r.best_matrix, path)?;
            }
            // not reaching the target is a result of the search, not a failed check
            Ok(outcome(true, &r))
        }
    }
}

fn error_report(e: &Error) -> Value {
    let mut v = json!({ "code": e.code(), "message": e.to_string() });
    match e {
        Error::HypothesisFailed {
            hypothesis,
            residual,
            location,
        } => {
            v["hypothesis"] = json!(hypothesis);
            v["residual"] = json!(residual);
            v["location"] = json!(location);
        }
        Error::NotHadamard(report) => v["verification"] = serde_json::to_value(report).expect("reports serialize"),
        _ => {}
    }
    v
}

fn print(value: &Value) {
    let mut out = std::io::stdout().lock();
    fmt::to_writer(&mut out, value).expect("stdout is writable");
    let _ = writeln!(out);
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            print(&json!({
                "status": "error",
                "error": { "code": "USAGE", "message": e.kind().to_string() },
            }));
            return ExitCode::from(2);
        }
    };
    let command = cli.command.name();
    let (status, code, body) = match run(&cli.command) {
        Ok(o) if o.passed => ("pass", 0, ("report", o.report)),
        Ok(o) => ("fail", 1, ("report", o.report)),
        Err(e) if e.is_verification_failure() => ("fail", 1, ("error", error_report(&e))),
        Err(e) => ("error", 2, ("error", error_report(&e))),
    };
    let mut v = json!({ "command": command, "status": status });
    v[body.0] = body.1;
    print(&v);
    ExitCode::from(code)
}
