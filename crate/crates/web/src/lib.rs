//! Browser bindings for `polyq`.
//!
//! Every export takes plain text or numbers and returns a JSON string, so the
//! page needs no generated TypeScript types.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use polyq::decoupling::{bound_b, ALPHA};
use polyq::io::MatrixJson;
use polyq::norms::{norm_report, FaConfig, InfToOneMode};
use polyq::pipeline::{compile, CompileConfig, CompileInput};
use polyq::poly::point_from_mask;
use polyq::quantum::acceptance_probability;
use polyq::{CoefficientMatrix, PartialBooleanFunction};

/// Largest truth table the page accepts.
const MAX_TABLE_VARS: usize = 4;

fn text<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Parses a truth table over `n` variables. Entry `i` is the value at the point
/// whose mask is `i`, where bit `k` set means `x_{k+1} = -1`.
fn parse_table(table: &str) -> Result<PartialBooleanFunction, String> {
    let cells: Vec<char> = table.chars().filter(|c| !c.is_whitespace() && *c != ',').collect();
    let n = cells.len().trailing_zeros() as usize;
    if cells.len() < 2 || cells.len() != 1 << n {
        return Err(format!("a truth table needs 2^n entries, got {}", cells.len()));
    }
    if n > MAX_TABLE_VARS {
        return Err(format!("at most {MAX_TABLE_VARS} variables"));
    }
    let values = cells
        .iter()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(format!("unexpected entry '{other}'")),
        })
        .collect::<Result<Vec<u8>, String>>()?;
    PartialBooleanFunction::from_truth_table(n, &values).map_err(text)
}

/// Compiles a truth table and evaluates the circuit on every cube point.
#[wasm_bindgen]
pub fn compile_table(table: &str) -> Result<String, String> {
    let f = parse_table(table)?;
    let (alg, report) = compile(&CompileInput::Function, &f, &CompileConfig::default()).map_err(text)?;
    let n = f.n();
    let mut rows = Vec::new();
    for mask in 0..1usize << n {
        let x = point_from_mask(n, mask);
        let (xs, ys) = alg.lift(&x).map_err(text)?;
        let sim = acceptance_probability(&alg, &xs, &ys).map_err(text)?;
        rows.push(json!({
            "x": x,
            "f": f.value(&x),
            "p": sim.p_value,
            "q": sim.q,
            "decision": sim.decision,
        }));
    }
    let out = json!({
        "n": n,
        "C": report.c,
        "bias": report.bias,
        "error_bound": report.error_bound,
        "max_error": report.verification.max_observed_error,
        "n_prime": report.split.n_prime,
        "m_prime": report.split.m_prime,
        "pass": report.pass,
        "points": rows,
    });
    Ok(out.to_string())
}

/// Norm summary for a matrix given as nested JSON rows, e.g. `[[1,1],[1,-1]]`.
#[wasm_bindgen]
pub fn matrix_norms(rows: &str) -> Result<String, String> {
    let data: Vec<Vec<f64>> = serde_json::from_str(rows).map_err(text)?;
    let shape = MatrixJson {
        rows: data.len(),
        cols: data.first().map_or(0, Vec::len),
        data,
    };
    let a = CoefficientMatrix::try_from(&shape).map_err(text)?;
    let report = norm_report(&a, InfToOneMode::Exact, &FaConfig::default()).map_err(text)?;
    serde_json::to_string(&report).map_err(text)
}

/// Decoupling constants `B(d)` for `d = 1..=max_d`, with the asymptotic base.
#[wasm_bindgen]
pub fn decoupling_curve(max_d: usize) -> Result<String, String> {
    let points = (1..=max_d)
        .map(|d| Ok(json!({ "d": d, "b": bound_b(d).map_err(text)? })))
        .collect::<Result<Vec<Value>, String>>()?;
    Ok(json!({ "alpha": ALPHA, "points": points }).to_string())
}
