//! Compiles bounded degree-2 polynomials that approximate partial Boolean
//! functions into explicit one-query quantum algorithms.
//!
//! The chain is: decouple a general polynomial into a two-block form, take its
//! coefficient matrix, split rows and columns until `Γ(A′)` is within the
//! Grothendieck constant of `‖A‖_{∞→1}`, dilate `√(n′m′)A′/C` to an orthogonal
//! matrix, and run a SWAP test with a biased output wrapper. Every stage is
//! checked numerically, and the final algorithm is verified exactly on the
//! function's domain.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod decoupling;
pub mod error;
pub mod io;
pub mod norms;
pub mod pipeline;
pub mod poly;
pub mod quantum;
pub mod splitting;

pub use error::{Error, Result};
pub use pipeline::{compile, verify, CompileConfig, CompileInput, CompileReport, RescaleConstant};
pub use poly::{BlockMultilinearForm, CoefficientMatrix, MultilinearPolynomial, PartialBooleanFunction};
pub use quantum::{OneQueryAlgorithm, SimulationReport};
