//! `polyq`: command-line front end for the compiler.
//!
//! Exit codes: 0 pass, 1 fail, 2 usage or malformed input, 3 numeric or capacity error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use polyq::decoupling::{bound_b, decouple};
use polyq::io::{
    from_json_str, parse_signs, to_json_string, BlockJson, CircuitJson, FunctionJson, MatrixJson, PolyJson,
};
use polyq::norms::{norm_report, FaConfig, InfToOneMode};
use polyq::pipeline::{closure_check, compile, verify, CompileConfig, CompileInput, RescaleConstant};
use polyq::quantum::{acceptance_probability, biased_decision, swap_test_statevector};
use polyq::splitting::{reduce_ratio, SplitConfig};
use polyq::{BlockMultilinearForm, CoefficientMatrix, Error, MultilinearPolynomial, OneQueryAlgorithm, PartialBooleanFunction};

#[derive(Parser)]
#[command(name = "polyq", version, about = "Compile degree-2 polynomials into one-query quantum algorithms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral, ∞→1, Γ and Grothendieck-norm estimates of a matrix.
    Norms {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, conflicts_with = "heuristic")]
        exact: bool,
        #[arg(long)]
        heuristic: bool,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decouple a polynomial into a block-multilinear form.
    Decouple {
        #[arg(long)]
        poly: PathBuf,
        /// Number of blocks; defaults to the polynomial's degree.
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split rows and columns of a matrix to bring Γ close to the ∞→1 norm.
    Split {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile a polynomial, block form or total function into a circuit.
    Compile {
        #[arg(long, conflicts_with = "block")]
        poly: Option<PathBuf>,
        #[arg(long)]
        block: Option<PathBuf>,
        #[arg(long)]
        function: PathBuf,
        /// Claimed approximation error of the supplied representation.
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        /// Rescale with B(2) = 3 instead of the measured cube maximum.
        #[arg(long)]
        worst_case_cd: bool,
        /// Accept general polynomials that leave [0, 1] on the cube.
        #[arg(long)]
        allow_out_of_range: bool,
        #[command(flatten)]
        split: SplitArgs,
        /// Where to write the circuit JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the report (stdout otherwise).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a circuit on one input.
    Simulate {
        #[arg(long)]
        circuit: PathBuf,
        /// Split-level row input, e.g. "+-+".
        #[arg(long, requires = "y", conflicts_with = "input")]
        x: Option<String>,
        #[arg(long, requires = "x")]
        y: Option<String>,
        /// Original input, lifted through the circuit's origin maps.
        #[arg(long)]
        input: Option<String>,
        /// Also draw one output bit.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a circuit exhaustively against a function.
    Verify {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Largest common denominator tried when rounding weights.
    #[arg(long, default_value_t = 64)]
    cap: usize,
    #[arg(long, default_value_t = 1e-3)]
    tolerance: f64,
    /// Largest allowed n′·m′.
    #[arg(long, default_value_t = 4096)]
    budget: usize,
    /// Largest allowed n′ + m′.
    #[arg(long)]
    max_lifted: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SplitArgs {
    fn config(&self) -> SplitConfig {
        SplitConfig {
            delta: self.delta,
            denominator_cap: self.cap,
            tolerance: self.tolerance,
            budget: self.budget,
            max_lifted: self.max_lifted.unwrap_or(usize::MAX),
            fa: FaConfig {
                seed: self.seed,
                ..FaConfig::default()
            },
        }
    }
}

enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_)
        | Error::DimensionMismatch { .. }
        | Error::ZeroMatrix
        | Error::ZeroRowOrColumn
        | Error::NonPositiveWeight => 2,
        Error::CapExceeded { .. } | Error::BudgetExceeded { .. } | Error::Numeric(_) => 3,
        Error::DegreeTooHigh { .. }
        | Error::ScaleViolation { .. }
        | Error::ApproximationFailed { .. }
        | Error::Unbounded { .. }
        | Error::ToleranceNotMet { .. }
        | Error::RatioNotMet { .. } => 1,
    }
}

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    from_json_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let text = to_json_string(value)?;
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_function(path: &Path) -> Result<PartialBooleanFunction, Failure> {
    Ok(PartialBooleanFunction::try_from(&read::<FunctionJson>(path)?)?)
}

fn load_matrix(path: &Path) -> Result<CoefficientMatrix, Failure> {
    Ok(CoefficientMatrix::try_from(&read::<MatrixJson>(path)?)?)
}

fn load_circuit(path: &Path) -> Result<OneQueryAlgorithm, Failure> {
    Ok(OneQueryAlgorithm::try_from(&read::<CircuitJson>(path)?)?)
}

/// Returns whether the command passed.
fn run(command: Command) -> Result<bool, Failure> {
    match command {
        Command::Norms {
            matrix,
            exact: _,
            heuristic,
            restarts,
            seed,
            out,
        } => {
            let a = load_matrix(&matrix)?;
            let mode = if heuristic {
                InfToOneMode::Heuristic { restarts, seed }
            } else {
                InfToOneMode::Exact
            };
            let config = FaConfig {
                seed,
                ..FaConfig::default()
            };
            emit(&norm_report(&a, mode, &config)?, out.as_deref())?;
            Ok(true)
        }
        Command::Decouple { poly, degree, out } => {
            let p = MultilinearPolynomial::try_from(&read::<PolyJson>(&poly)?)?;
            let d = degree.unwrap_or_else(|| p.degree().max(1));
            let result = decouple(&p, d)?;
            let cube_max = result.form.cube_max_abs().ok().map(|m| m.value);
            let source_max = p.cube_max_abs().ok();
            emit(
                &json!({
                    "form": BlockJson::from(&result.form),
                    "degree": d,
                    "source_degree": result.source_degree,
                    "bound_b": bound_b(d)?,
                    "source_cube_max": source_max,
                    "form_cube_max": cube_max,
                }),
                out.as_deref(),
            )?;
            Ok(true)
        }
        Command::Split { matrix, split, out } => {
            let a = load_matrix(&matrix)?;
            let r = reduce_ratio(&a, &split.config())?;
            emit(
                &json!({
                    "matrix": MatrixJson::from(&r.split.matrix),
                    "plan": r.plan,
                    "C": r.c,
                    "ratio": r.ratio,
                    "target": r.target,
                    "inf_to_one": r.inf_to_one,
                    "inf_to_one_exact": r.inf_to_one_exact,
                    "unsplit_gamma": r.unsplit_gamma,
                    "weights": r.weights,
                    "origin_rows": r.origin_rows,
                    "origin_cols": r.origin_cols,
                }),
                out.as_deref(),
            )?;
            Ok(true)
        }
        Command::Compile {
            poly,
            block,
            function,
            epsilon,
            worst_case_cd,
            allow_out_of_range,
            split,
            out,
            report,
        } => {
            let f = load_function(&function)?;
            let input = match (poly, block) {
                (Some(p), _) => CompileInput::Polynomial(MultilinearPolynomial::try_from(&read::<PolyJson>(&p)?)?),
                (None, Some(b)) => CompileInput::BlockForm(BlockMultilinearForm::try_from(&read::<BlockJson>(&b)?)?),
                (None, None) => CompileInput::Function,
            };
            let config = CompileConfig {
                delta: split.delta,
                denominator_cap: split.cap,
                epsilon_input: epsilon,
                rescale: if worst_case_cd {
                    RescaleConstant::Worst
                } else {
                    RescaleConstant::Measured
                },
                require_unit_range: !allow_out_of_range,
                tolerance: split.tolerance,
                budget: split.budget,
                max_lifted: split.max_lifted.unwrap_or(usize::MAX),
                seed: split.seed,
            };
            let (alg, rep) = compile(&input, &f, &config)?;
            if let Some(path) = out {
                emit(&CircuitJson::from(&alg), Some(&path))?;
            }
            emit(&rep, report.as_deref())?;
            Ok(rep.pass)
        }
        Command::Simulate {
            circuit,
            x,
            y,
            input,
            seed,
        } => {
            let alg = load_circuit(&circuit)?;
            let (xs, ys) = match (x, y, input) {
                (Some(x), Some(y), None) => (parse_signs(&x)?, parse_signs(&y)?),
                (None, None, Some(input)) => alg.lift(&parse_signs(&input)?)?,
                _ => return Err(Failure::Usage("give either --x and --y, or --input".into())),
            };
            let analytic = acceptance_probability(&alg, &xs, &ys)?;
            let mut report = biased_decision(&alg, analytic.r, seed);
            report.p_value = analytic.p_value;
            let statevector = swap_test_statevector(&alg, &xs, &ys)?;
            emit(
                &json!({
                    "x": xs,
                    "y": ys,
                    "report": report,
                    "statevector_r": statevector,
                }),
                None,
            )?;
            Ok(true)
        }
        Command::Verify { circuit, function, out } => {
            let alg = load_circuit(&circuit)?;
            let f = load_function(&function)?;
            let report = verify(&alg, &f)?;
            let closure = closure_check(&alg).ok();
            let pass = report.pass && closure.as_ref().is_none_or(|c| c.pass);
            emit(
                &json!({
                    "max_error": report.max_observed_error,
                    "error_bound": report.error_bound,
                    "verification": report,
                    "closure": closure,
                    "pass": pass,
                }),
                out.as_deref(),
            )?;
            Ok(pass)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
