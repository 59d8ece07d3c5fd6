//! End-to-end compilation of a degree-2 representation of a partial Boolean
//! function into a one-query algorithm, and exhaustive verification of the
//! result over the function's domain.

use serde::Serialize;

use crate::decoupling::{bound_b, decouple, rescale_for_approx, rescaled_error};
use crate::error::{Error, Result};
use crate::norms::{self, FaConfig};
use crate::poly::{
    check_approximates, fourier_expand_function, walsh_hadamard, BlockMultilinearForm,
    CoefficientMatrix, MultilinearPolynomial, PartialBooleanFunction, COMPARISON_SLACK,
};
use crate::quantum::{acceptance_probability, build_algorithm, statement_error_bound, OneQueryAlgorithm};
use crate::splitting::{reduce_ratio, SplitConfig};

/// Largest `n′ + m′` for which the closure check interpolates over the lifted cube.
pub const CLOSURE_MAX_VARS: usize = 20;
/// Tolerance of the closure check.
pub const CLOSURE_TOL: f64 = 1e-8;
/// Allowed excess of the observed error over the bound.
pub const VERIFY_SLACK: f64 = 1e-9;
/// Allowed `‖UᵀU − I‖_max` for a circuit to be accepted.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Which constant `C_d` rescales the decoupled form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RescaleConstant {
    /// The exact cube maximum of the decoupled form.
    Measured,
    /// The worst-case bound `B(2) = 3`.
    Worst,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompileConfig {
    pub delta: f64,
    pub denominator_cap: usize,
    /// Claimed approximation error of the supplied representation.
    pub epsilon_input: f64,
    pub rescale: RescaleConstant,
    /// Reject general polynomials leaving `[0, 1]` somewhere on the cube.
    pub require_unit_range: bool,
    /// Accepted relative loss of `F_A` when rounding weights to multiplicities.
    pub tolerance: f64,
    /// Maximum `n′·m′`.
    pub budget: usize,
    /// Maximum `n′ + m′`.
    pub max_lifted: usize,
    pub seed: u64,
}

impl Default for CompileConfig {
    fn default() -> Self {
        Self {
            delta: 0.05,
            denominator_cap: 64,
            epsilon_input: 0.0,
            rescale: RescaleConstant::Measured,
            require_unit_range: true,
            tolerance: 1e-3,
            budget: 4096,
            max_lifted: usize::MAX,
            seed: 0,
        }
    }
}

impl CompileConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidInput(format!("delta must be positive, got {}", self.delta)));
        }
        if !(0.0..0.5).contains(&self.epsilon_input) {
            return Err(Error::InvalidInput(format!(
                "epsilon must lie in [0, 1/2), got {}",
                self.epsilon_input
            )));
        }
        if self.denominator_cap == 0 {
            return Err(Error::InvalidInput("denominator cap must be at least 1".into()));
        }
        Ok(())
    }

    fn split_config(&self) -> SplitConfig {
        SplitConfig {
            delta: self.delta,
            denominator_cap: self.denominator_cap,
            tolerance: self.tolerance,
            budget: self.budget,
            max_lifted: self.max_lifted,
            fa: FaConfig {
                seed: self.seed,
                ..FaConfig::default()
            },
        }
    }
}

/// What the compiler starts from.
#[derive(Debug, Clone, PartialEq)]
pub enum CompileInput {
    /// `q` of degree ≤ 2 with `|q(x) − f(x)| ≤ ε` on the domain.
    Polynomial(MultilinearPolynomial),
    /// A two-block form bounded by 1 whose diagonal approximates `f`.
    BlockForm(BlockMultilinearForm),
    /// Only `f`; it must be total with Fourier degree ≤ 2.
    Function,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecouplingStage {
    pub source_degree: usize,
    /// Range of the input polynomial over the whole cube.
    pub cube_range: (f64, f64),
    pub unit_range: bool,
    /// Largest `|2q − 1|` on the cube; at most 1 when `unit_range` holds.
    pub shifted_max_abs: f64,
    pub bound_b2: f64,
    pub measured_cube_max: f64,
    pub c_d: f64,
    pub c_d_choice: RescaleConstant,
    /// Measured error of the input polynomial on the domain.
    pub epsilon: f64,
    /// `½ − (½ − ε)/C_d`.
    pub epsilon_formula: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitStage {
    pub matrix_rows: usize,
    pub matrix_cols: usize,
    pub n_prime: usize,
    pub m_prime: usize,
    pub row_mult: Vec<usize>,
    pub col_mult: Vec<usize>,
    pub denominator: usize,
    pub inf_to_one: f64,
    pub inf_to_one_exact: bool,
    pub fa_value: f64,
    pub unsplit_gamma: f64,
    pub c: f64,
    /// `C / ‖A‖_{∞→1}`.
    pub ratio: f64,
    pub target: f64,
}

/// The final error bound in its three forms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundForms {
    pub k_upper: f64,
    /// `(C + ε′)/(2C + 1)` with the achieved `C`.
    pub achieved: f64,
    /// `(K + ε′)/(2K + 1)` with `K = K_upper`.
    pub k_form: f64,
    /// `(K + ε′)/(2(K + 1))`.
    pub statement_form: f64,
    pub observed_within_k_form: bool,
}

pub fn bound_forms(c: f64, epsilon_prime: f64, observed: f64) -> BoundForms {
    let k = norms::k_upper();
    let k_form = (k + epsilon_prime) / (2.0 * k + 1.0);
    BoundForms {
        k_upper: k,
        achieved: (c + epsilon_prime) / (2.0 * c + 1.0),
        k_form,
        statement_form: statement_error_bound(k, epsilon_prime),
        observed_within_k_form: observed <= k_form + VERIFY_SLACK,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointOutcome {
    pub x: Vec<i8>,
    pub f: u8,
    pub q: f64,
    pub error: f64,
}

/// Exact single-shot error of an algorithm over a function's domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub points: Vec<PointOutcome>,
    pub max_observed_error: f64,
    pub worst_point: Vec<i8>,
    pub error_bound: f64,
    pub unitarity_defect: f64,
    pub pass: bool,
}

/// Lifts every domain point, computes `q` exactly and compares the error
/// (`q` where `f = 0`, `1 − q` where `f = 1`) against the algorithm's bound.
pub fn verify(alg: &OneQueryAlgorithm, f: &PartialBooleanFunction) -> Result<VerifyReport> {
    let mut points = Vec::with_capacity(f.len());
    let mut max_observed_error = f64::NEG_INFINITY;
    let mut worst_point = Vec::new();
    for (x, fx) in f.points() {
        let (xl, yl) = alg.lift(x)?;
        let q = acceptance_probability(alg, &xl, &yl)?.q;
        let error = if fx == 1 { 1.0 - q } else { q };
        if error > max_observed_error {
            max_observed_error = error;
            worst_point = x.to_vec();
        }
        points.push(PointOutcome { x: x.to_vec(), f: fx, q, error });
    }
    let error_bound = alg.error_bound();
    let unitarity_defect = alg.dilation.unitarity_defect();
    let pass = unitarity_defect <= UNITARITY_TOL && max_observed_error <= error_bound + VERIFY_SLACK;
    Ok(VerifyReport {
        points,
        max_observed_error,
        worst_point,
        error_bound,
        unitarity_defect,
        pass,
    })
}

/// Fourier analysis of the acceptance probability `r` over the lifted cube.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureReport {
    pub variables: usize,
    pub constant: f64,
    /// Largest coefficient outside the constant and the `x_i y_j` terms.
    pub max_off_structure: f64,
    /// Largest deviation of an `x_i y_j` coefficient from `A′_ij/(2C)`.
    pub max_coefficient_error: f64,
    /// Cube maximum of the recovered two-block form.
    pub cube_max: f64,
    pub pass: bool,
}

/// Interpolates `r(x, y)` on all `2^{n′+m′}` split inputs and checks that it
/// is a two-block form with dummy slots that is bounded by 1 on the cube.
pub fn closure_check(alg: &OneQueryAlgorithm) -> Result<ClosureReport> {
    let (n, m) = (alg.n_prime, alg.m_prime);
    let vars = n + m;
    if vars > CLOSURE_MAX_VARS {
        return Err(Error::CapExceeded {
            what: "lifted cube variables",
            needed: vars,
            cap: CLOSURE_MAX_VARS,
        });
    }
    let u = &alg.dilation.u;
    let (sx, sy) = ((n as f64).sqrt(), (m as f64).sqrt());
    let mut table = vec![0.0; 1 << vars];
    let mut uy = vec![0.0; n];
    for ymask in 0..1usize << m {
        for (i, slot) in uy.iter_mut().enumerate() {
            *slot = (0..m)
                .map(|j| if ymask >> j & 1 == 1 { -u[(i, j)] } else { u[(i, j)] })
                .sum::<f64>()
                / sy;
        }
        for xmask in 0..1usize << n {
            let inner: f64 = (0..n)
                .map(|i| if xmask >> i & 1 == 1 { -uy[i] } else { uy[i] })
                .sum::<f64>()
                / sx;
            table[xmask | ymask << n] = 0.5 * (1.0 + inner);
        }
    }
    walsh_hadamard(&mut table);
    let scale = 1.0 / table.len() as f64;

    let a_prime = alg.a_prime();
    let block_size = n.max(m) + 1;
    let mut form = BlockMultilinearForm::new(2, block_size)?;
    let mut max_off_structure: f64 = 0.0;
    let mut max_coefficient_error: f64 = 0.0;
    let x_part = (1usize << n) - 1;
    for (mask, &raw) in table.iter().enumerate() {
        let coef = raw * scale;
        let (xm, ym) = (mask & x_part, mask >> n);
        if mask == 0 {
            form.add_term(vec![0, 0], coef)?;
        } else if xm.count_ones() == 1 && ym.count_ones() == 1 {
            let (i, j) = (xm.trailing_zeros() as usize, ym.trailing_zeros() as usize);
            max_coefficient_error =
                max_coefficient_error.max((coef - a_prime[(i, j)] / (2.0 * alg.c)).abs());
            if coef != 0.0 {
                form.add_term(vec![i + 1, j + 1], coef)?;
            }
        } else {
            max_off_structure = max_off_structure.max(coef.abs());
        }
    }
    let constant = table[0] * scale;
    let cube_max = form.cube_max_abs()?.value;
    let pass = max_off_structure <= CLOSURE_TOL
        && max_coefficient_error <= CLOSURE_TOL
        && cube_max <= 1.0 + CLOSURE_TOL;
    Ok(ClosureReport {
        variables: vars,
        constant,
        max_off_structure,
        max_coefficient_error,
        cube_max,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompileReport {
    pub path: &'static str,
    pub query_count: usize,
    pub n: usize,
    pub domain_size: usize,
    pub epsilon_input: f64,
    pub decoupling: Option<DecouplingStage>,
    /// Cube maximum of the two-block form handed to splitting.
    pub form_cube_max: f64,
    pub epsilon_prime: f64,
    pub split: SplitStage,
    pub c: f64,
    pub bias: f64,
    pub error_bound: f64,
    pub bound_forms: BoundForms,
    pub verification: VerifyReport,
    pub closure: Option<ClosureReport>,
    pub pass: bool,
}

struct PreparedForm {
    path: &'static str,
    form: BlockMultilinearForm,
    decoupling: Option<DecouplingStage>,
}

fn prepare_polynomial(
    q: &MultilinearPolynomial,
    f: &PartialBooleanFunction,
    config: &CompileConfig,
    path: &'static str,
) -> Result<PreparedForm> {
    if q.n() != f.n() {
        return Err(Error::DimensionMismatch {
            context: "polynomial variables",
            expected: f.n(),
            got: q.n(),
        });
    }
    let degree = q.degree();
    if degree > 2 {
        return Err(Error::DegreeTooHigh { degree, max: 2 });
    }
    let approx = check_approximates(|x| q.eval_signs(x).unwrap_or(f64::NAN), f, config.epsilon_input);
    if !approx.pass {
        return Err(Error::ApproximationFailed {
            max_error: approx.max_error,
            epsilon: config.epsilon_input,
        });
    }
    let cube_range = q.cube_range()?;
    let unit_range = cube_range.0 >= -COMPARISON_SLACK && cube_range.1 <= 1.0 + COMPARISON_SLACK;
    if config.require_unit_range && !unit_range {
        return Err(Error::InvalidInput(format!(
            "polynomial leaves [0, 1] on the cube: range [{}, {}]",
            cube_range.0, cube_range.1
        )));
    }
    let shifted = q.affine(2.0, -1.0);
    let decoupled = decouple(&shifted, 2)?;
    let measured = decoupled.form.cube_max_abs()?.value;
    let bound_b2 = bound_b(2)?;
    let c_d = match config.rescale {
        RescaleConstant::Measured if measured > 0.0 => measured,
        RescaleConstant::Measured => 1.0,
        RescaleConstant::Worst => {
            if measured > bound_b2 * (1.0 + COMPARISON_SLACK) {
                return Err(Error::Unbounded { max_abs: measured });
            }
            bound_b2
        }
    };
    let form = rescale_for_approx(&decoupled.form, c_d)?;
    Ok(PreparedForm {
        path,
        form,
        decoupling: Some(DecouplingStage {
            source_degree: degree,
            cube_range,
            unit_range,
            shifted_max_abs: (2.0 * cube_range.0 - 1.0).abs().max((2.0 * cube_range.1 - 1.0).abs()),
            bound_b2,
            measured_cube_max: measured,
            c_d,
            c_d_choice: config.rescale,
            epsilon: approx.max_error,
            epsilon_formula: rescaled_error(approx.max_error, c_d),
        }),
    })
}

fn prepare(input: &CompileInput, f: &PartialBooleanFunction, config: &CompileConfig) -> Result<PreparedForm> {
    match input {
        CompileInput::Polynomial(q) => prepare_polynomial(q, f, config, "polynomial"),
        CompileInput::Function => {
            if !f.is_total() {
                return Err(Error::InvalidInput(
                    "a partial function needs an approximating polynomial".into(),
                ));
            }
            let q = fourier_expand_function(f)?;
            let exact = CompileConfig {
                epsilon_input: 0.0,
                ..config.clone()
            };
            prepare_polynomial(&q, f, &exact, "function")
        }
        CompileInput::BlockForm(form) => {
            if form.k() != 2 {
                return Err(Error::DegreeTooHigh { degree: form.k(), max: 2 });
            }
            if form.block_size() != f.n() + 1 {
                return Err(Error::DimensionMismatch {
                    context: "block size (n + 1)",
                    expected: f.n() + 1,
                    got: form.block_size(),
                });
            }
            let approx = check_approximates(
                |x| form.diagonal_restriction(x).unwrap_or(f64::NAN),
                f,
                config.epsilon_input,
            );
            if !approx.pass {
                return Err(Error::ApproximationFailed {
                    max_error: approx.max_error,
                    epsilon: config.epsilon_input,
                });
            }
            Ok(PreparedForm {
                path: "block_form",
                form: form.clone(),
                decoupling: None,
            })
        }
    }
}

/// The zero form has no scale to split; it is run as a `1×1` zero block at `C = 1`,
/// where every input is accepted with `r = ½`.
fn zero_form_algorithm(
    matrix: &CoefficientMatrix,
    n: usize,
    epsilon_prime: f64,
) -> Result<(OneQueryAlgorithm, SplitStage)> {
    let mut alg = build_algorithm(&CoefficientMatrix::zeros(1, 1)?, 1.0)?;
    alg.origin_rows = vec![0];
    alg.origin_cols = vec![0];
    alg.n_inputs = Some(n);
    alg.epsilon_prime = Some(epsilon_prime);
    let split = SplitStage {
        matrix_rows: matrix.rows(),
        matrix_cols: matrix.cols(),
        n_prime: 1,
        m_prime: 1,
        row_mult: vec![1],
        col_mult: vec![1],
        denominator: 1,
        inf_to_one: 0.0,
        inf_to_one_exact: true,
        fa_value: 0.0,
        unsplit_gamma: 0.0,
        c: 1.0,
        ratio: 0.0,
        target: norms::k_upper(),
    };
    Ok((alg, split))
}

/// Compiles `input` into a one-query algorithm for `f` and verifies it.
///
/// General polynomials `q` are shifted to `2q − 1`, decoupled at degree 2 and
/// rescaled to `½·z¹₀z²₀ + p̃/(2C_d)`; the coefficient matrix of the resulting
/// form is split and dilated at scale `C = Γ(A′)`.
pub fn compile(
    input: &CompileInput,
    f: &PartialBooleanFunction,
    config: &CompileConfig,
) -> Result<(OneQueryAlgorithm, CompileReport)> {
    config.validate()?;
    let prepared = prepare(input, f, config)?;
    let form = &prepared.form;
    let form_cube_max = form.cube_max_abs()?.value;
    if form_cube_max > 1.0 + 1e-9 {
        return Err(Error::Unbounded { max_abs: form_cube_max });
    }
    let epsilon_prime = check_approximates(
        |x| form.diagonal_restriction(x).unwrap_or(f64::NAN),
        f,
        0.0,
    )
    .max_error;
    if !(epsilon_prime < 0.5) {
        return Err(Error::ApproximationFailed {
            max_error: epsilon_prime,
            epsilon: 0.5,
        });
    }

    let matrix = form.coefficient_matrix()?;
    let (alg, split) = if matrix.is_zero() {
        zero_form_algorithm(&matrix, f.n(), epsilon_prime)?
    } else {
        let reduction = reduce_ratio(&matrix, &config.split_config())?;
        let mut alg = build_algorithm(&reduction.split.matrix, reduction.c)?;
        alg.origin_rows = reduction.origin_rows.clone();
        alg.origin_cols = reduction.origin_cols.clone();
        alg.n_inputs = Some(f.n());
        alg.epsilon_prime = Some(epsilon_prime);
        let split = SplitStage {
            matrix_rows: matrix.rows(),
            matrix_cols: matrix.cols(),
            n_prime: alg.n_prime,
            m_prime: alg.m_prime,
            row_mult: reduction.plan.row_mult.clone(),
            col_mult: reduction.plan.col_mult.clone(),
            denominator: reduction.plan.denominator,
            inf_to_one: reduction.inf_to_one,
            inf_to_one_exact: reduction.inf_to_one_exact,
            fa_value: reduction.weights.value,
            unsplit_gamma: reduction.unsplit_gamma,
            c: reduction.c,
            ratio: reduction.ratio,
            target: reduction.target,
        };
        (alg, split)
    };

    let verification = verify(&alg, f)?;
    let closure = if alg.n_prime + alg.m_prime <= CLOSURE_MAX_VARS {
        Some(closure_check(&alg)?)
    } else {
        None
    };
    let pass = verification.pass && closure.as_ref().is_none_or(|c| c.pass);
    let report = CompileReport {
        path: prepared.path,
        query_count: 1,
        n: f.n(),
        domain_size: f.len(),
        epsilon_input: config.epsilon_input,
        decoupling: prepared.decoupling,
        form_cube_max,
        epsilon_prime,
        split,
        c: alg.c,
        bias: alg.bias,
        error_bound: alg.error_bound(),
        bound_forms: bound_forms(alg.c, epsilon_prime, verification.max_observed_error),
        verification,
        closure,
        pass,
    };
    Ok((alg, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn parity2() -> PartialBooleanFunction {
        PartialBooleanFunction::from_truth_table(2, &[0, 1, 1, 0]).unwrap()
    }

    fn parity_form() -> BlockMultilinearForm {
        BlockMultilinearForm::from_coeffs(2, 3, [(vec![0, 0], 0.5), (vec![1, 2], -0.5)]).unwrap()
    }

    fn parity_poly() -> MultilinearPolynomial {
        MultilinearPolynomial::from_terms(2, [(vec![], 0.5), (vec![0, 1], -0.5)]).unwrap()
    }

    #[test]
    fn parity_block_form_compiles_with_unit_scale() {
        let (alg, report) =
            compile(&CompileInput::BlockForm(parity_form()), &parity2(), &CompileConfig::default()).unwrap();
        assert_abs_diff_eq!(alg.c, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.error_bound, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.verification.max_observed_error, 1.0 / 3.0, epsilon = 1e-12);
        for p in &report.verification.points {
            let expected = if p.f == 1 { 2.0 / 3.0 } else { 1.0 / 3.0 };
            assert_abs_diff_eq!(p.q, expected, epsilon = 1e-12);
        }
        assert!(report.pass);
        assert!(report.bound_forms.observed_within_k_form);
        assert!(report.closure.unwrap().pass);
    }

    #[test]
    fn polynomial_path_with_worst_case_constant() {
        let config = CompileConfig {
            rescale: RescaleConstant::Worst,
            ..CompileConfig::default()
        };
        let (alg, report) = compile(&CompileInput::Polynomial(parity_poly()), &parity2(), &config).unwrap();
        assert_abs_diff_eq!(report.epsilon_prime, 1.0 / 3.0, epsilon = 1e-12);
        let stage = report.decoupling.unwrap();
        assert_abs_diff_eq!(stage.epsilon_formula, 1.0 / 3.0, epsilon = 1e-12);
        let c = alg.c;
        assert_abs_diff_eq!(report.error_bound, (c + 1.0 / 3.0) / (2.0 * c + 1.0), epsilon = 1e-12);
        assert!(report.error_bound < 0.5);
        assert!(report.pass);
    }

    #[test]
    fn polynomial_path_with_measured_constant() {
        let (alg, report) =
            compile(&CompileInput::Polynomial(parity_poly()), &parity2(), &CompileConfig::default()).unwrap();
        assert_abs_diff_eq!(report.decoupling.unwrap().c_d, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.epsilon_prime, 0.0, epsilon = 1e-12);
        assert!(alg.c <= norms::k_upper() + 0.05);
        assert!(report.pass);
    }

    #[test]
    fn function_only_entry() {
        let (_, report) = compile(&CompileInput::Function, &parity2(), &CompileConfig::default()).unwrap();
        assert_eq!(report.path, "function");
        assert!(report.pass);

        let partial = PartialBooleanFunction::new(2, vec![(vec![1, 1], 0)]).unwrap();
        assert!(compile(&CompileInput::Function, &partial, &CompileConfig::default()).is_err());

        let and3 = PartialBooleanFunction::from_truth_table(3, &[0, 0, 0, 0, 0, 0, 0, 1]).unwrap();
        assert_eq!(
            compile(&CompileInput::Function, &and3, &CompileConfig::default()).unwrap_err(),
            Error::DegreeTooHigh { degree: 3, max: 2 }
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let cubic = MultilinearPolynomial::from_terms(3, [(vec![0, 1, 2], 0.5)]).unwrap();
        let f3 = PartialBooleanFunction::new(3, vec![(vec![1, 1, 1], 1)]).unwrap();
        assert!(matches!(
            compile(&CompileInput::Polynomial(cubic), &f3, &CompileConfig::default()),
            Err(Error::DegreeTooHigh { .. })
        ));

        let half = MultilinearPolynomial::from_terms(2, [(vec![], 0.5)]).unwrap();
        let config = CompileConfig {
            epsilon_input: 0.1,
            ..CompileConfig::default()
        };
        assert!(matches!(
            compile(&CompileInput::Polynomial(half), &parity2(), &config),
            Err(Error::ApproximationFailed { .. })
        ));
    }

    #[test]
    fn constant_zero_function_compiles() {
        let zero = PartialBooleanFunction::from_truth_table(2, &[0, 0, 0, 0]).unwrap();
        let (alg, report) = compile(&CompileInput::Function, &zero, &CompileConfig::default()).unwrap();
        assert_eq!(alg.c, 1.0);
        assert_abs_diff_eq!(report.verification.max_observed_error, 1.0 / 3.0, epsilon = 1e-12);
        assert!(report.pass);
    }

    #[test]
    fn corrupted_unitary_fails_verification() {
        let (mut alg, _) =
            compile(&CompileInput::BlockForm(parity_form()), &parity2(), &CompileConfig::default()).unwrap();
        alg.dilation.u[(0, 0)] += 0.1;
        let report = verify(&alg, &parity2()).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn bound_forms_forms() {
        let b = bound_forms(1.0, 0.0, 1.0 / 3.0);
        assert_abs_diff_eq!(b.achieved, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.k_form, 0.390458, epsilon = 1e-6);
        assert!(b.statement_form < b.k_form);
    }
}
