//! JSON formats for polynomials, block forms, partial functions, matrices and
//! compiled circuits.
//!
//! Polynomial variables are 1-based on the wire and 0-based in memory; block
//! indices keep 0 as the dummy slot.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{BlockMultilinearForm, CoefficientMatrix, MultilinearPolynomial, PartialBooleanFunction};
use crate::quantum::OneQueryAlgorithm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub vars: Vec<usize>,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    pub n: usize,
    pub terms: Vec<TermJson>,
}

impl TryFrom<&PolyJson> for MultilinearPolynomial {
    type Error = Error;

    fn try_from(p: &PolyJson) -> Result<Self> {
        let mut terms = Vec::with_capacity(p.terms.len());
        for t in &p.terms {
            if t.vars.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput(format!(
                    "term variables must be strictly ascending, got {:?}",
                    t.vars
                )));
            }
            let vars = t
                .vars
                .iter()
                .map(|&v| {
                    v.checked_sub(1)
                        .ok_or_else(|| Error::InvalidInput("variables are numbered from 1".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            terms.push((vars, t.coef));
        }
        MultilinearPolynomial::from_terms(p.n, terms)
    }
}

impl From<&MultilinearPolynomial> for PolyJson {
    fn from(p: &MultilinearPolynomial) -> Self {
        Self {
            n: p.n(),
            terms: p
                .terms()
                .map(|(vars, coef)| TermJson {
                    vars: vars.iter().map(|v| v + 1).collect(),
                    coef,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffJson {
    pub idx: Vec<usize>,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockJson {
    pub k: usize,
    pub block_size: usize,
    pub coeffs: Vec<CoeffJson>,
}

impl TryFrom<&BlockJson> for BlockMultilinearForm {
    type Error = Error;

    fn try_from(b: &BlockJson) -> Result<Self> {
        BlockMultilinearForm::from_coeffs(b.k, b.block_size, b.coeffs.iter().map(|c| (c.idx.clone(), c.coef)))
    }
}

impl From<&BlockMultilinearForm> for BlockJson {
    fn from(form: &BlockMultilinearForm) -> Self {
        Self {
            k: form.k(),
            block_size: form.block_size(),
            coeffs: form
                .coeffs()
                .map(|(idx, coef)| CoeffJson { idx: idx.to_vec(), coef })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointJson {
    pub x: Vec<i8>,
    pub f: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionJson {
    pub n: usize,
    pub points: Vec<PointJson>,
}

impl TryFrom<&FunctionJson> for PartialBooleanFunction {
    type Error = Error;

    fn try_from(f: &FunctionJson) -> Result<Self> {
        PartialBooleanFunction::new(f.n, f.points.iter().map(|p| (p.x.clone(), p.f)).collect())
    }
}

impl From<&PartialBooleanFunction> for FunctionJson {
    fn from(f: &PartialBooleanFunction) -> Self {
        Self {
            n: f.n(),
            points: f.points().map(|(x, f)| PointJson { x: x.to_vec(), f }).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<f64>>,
}

impl TryFrom<&MatrixJson> for CoefficientMatrix {
    type Error = Error;

    fn try_from(m: &MatrixJson) -> Result<Self> {
        if m.data.len() != m.rows || m.data.iter().any(|r| r.len() != m.cols) {
            return Err(Error::InvalidInput(format!(
                "matrix data does not match the declared {}x{} shape",
                m.rows, m.cols
            )));
        }
        CoefficientMatrix::from_rows(&m.data)
    }
}

impl From<&CoefficientMatrix> for MatrixJson {
    fn from(a: &CoefficientMatrix) -> Self {
        Self {
            rows: a.rows(),
            cols: a.cols(),
            data: a.to_rows(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitJson {
    pub n_prime: usize,
    pub m_prime: usize,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "U")]
    pub u: Vec<Vec<f64>>,
    pub bias: f64,
    pub origin_rows: Vec<usize>,
    pub origin_cols: Vec<usize>,
    /// Number of original input variables; origin indices then address `(1, x)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_inputs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_prime: Option<f64>,
}

impl From<&OneQueryAlgorithm> for CircuitJson {
    fn from(alg: &OneQueryAlgorithm) -> Self {
        let u = &alg.dilation.u;
        Self {
            n_prime: alg.n_prime,
            m_prime: alg.m_prime,
            c: alg.c,
            u: (0..u.nrows()).map(|i| u.row(i).iter().copied().collect()).collect(),
            bias: alg.bias,
            origin_rows: alg.origin_rows.clone(),
            origin_cols: alg.origin_cols.clone(),
            n_inputs: alg.n_inputs,
            epsilon_prime: alg.epsilon_prime,
        }
    }
}

impl TryFrom<&CircuitJson> for OneQueryAlgorithm {
    type Error = Error;

    fn try_from(c: &CircuitJson) -> Result<Self> {
        let k = c.u.len();
        if k == 0 || c.u.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidInput("U must be a non-empty square matrix".into()));
        }
        if c.u.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("U entries must be finite".into()));
        }
        let u = DMatrix::from_fn(k, k, |i, j| c.u[i][j]);
        let mut alg = OneQueryAlgorithm::from_parts(
            u,
            c.n_prime,
            c.m_prime,
            c.c,
            c.origin_rows.clone(),
            c.origin_cols.clone(),
        )?;
        if (alg.bias - c.bias).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "bias {} does not equal 1/(2C+1) = {}",
                c.bias, alg.bias
            )));
        }
        if let Some(eps) = c.epsilon_prime {
            if !(0.0..0.5).contains(&eps) {
                return Err(Error::InvalidInput(format!("epsilon_prime {eps} outside [0, 1/2)")));
            }
        }
        alg.n_inputs = c.n_inputs;
        alg.epsilon_prime = c.epsilon_prime;
        Ok(alg)
    }
}

/// Parses a JSON document, mapping syntax and schema errors to [`Error::InvalidInput`].
pub fn from_json_str<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed JSON: {e}")))
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Numeric(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Parses a sign string such as `"+-+"`; whitespace and commas are ignored.
pub fn parse_signs(s: &str) -> Result<Vec<i8>> {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| match c {
            '+' => Ok(1),
            '-' => Ok(-1),
            other => Err(Error::InvalidInput(format!("sign strings use '+' and '-', got {other:?}"))),
        })
        .collect()
}
