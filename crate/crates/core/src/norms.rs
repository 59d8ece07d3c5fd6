//! Matrix norms of a bilinear form: the spectral norm, the ∞→1 norm, `Γ`, `g`
//! and an upper estimate of the Grothendieck norm obtained by minimizing
//! `F_A(w, v) = ‖D_w⁻¹ A D_v⁻¹‖·‖w‖·‖v‖` over positive diagonal scalings.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::poly::{point_from_mask, CoefficientMatrix};

/// Largest side enumerated by the exact ∞→1 computation.
pub const INF_TO_ONE_CAP: usize = 24;

/// `(π/2, π/(2 ln(1+√2)))`, the classical bounds on the real Grothendieck constant.
pub fn grothendieck_constant_bounds() -> (f64, f64) {
    (FRAC_PI_2, PI / (2.0 * (1.0 + SQRT_2).ln()))
}

pub fn k_upper() -> f64 {
    grothendieck_constant_bounds().1
}

/// Largest singular value, from the top eigenvalue of the smaller Gram matrix.
pub fn operator_norm(a: &CoefficientMatrix) -> f64 {
    spectral_norm(a.as_matrix())
}

pub(crate) fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    let gram = if m.nrows() <= m.ncols() {
        m * m.transpose()
    } else {
        m.transpose() * m
    };
    let top = SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .copied()
        .fold(0.0, f64::max);
    top.sqrt()
}

/// Value and maximizing sign vectors of `max xᵀAy` over `x, y ∈ {±1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfToOne {
    pub value: f64,
    pub x: Vec<i8>,
    pub y: Vec<i8>,
    /// False when the value comes from the local-search heuristic (a lower bound).
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfToOneMode {
    Exact,
    Heuristic { restarts: usize, seed: u64 },
}

fn sign(v: f64) -> i8 {
    if v < 0.0 {
        -1
    } else {
        1
    }
}

/// Exact ∞→1 norm by enumeration of the smaller side.
pub fn inf_to_one_norm(a: &CoefficientMatrix) -> Result<InfToOne> {
    inf_to_one_norm_with(a, InfToOneMode::Exact)
}

pub fn inf_to_one_norm_with(a: &CoefficientMatrix, mode: InfToOneMode) -> Result<InfToOne> {
    match mode {
        InfToOneMode::Exact => {
            if a.rows() <= a.cols() {
                exact_inf_to_one(a.as_matrix())
            } else {
                let t = exact_inf_to_one(&a.as_matrix().transpose())?;
                Ok(InfToOne {
                    value: t.value,
                    x: t.y,
                    y: t.x,
                    exact: true,
                })
            }
        }
        InfToOneMode::Heuristic { restarts, seed } => {
            Ok(heuristic_inf_to_one(a.as_matrix(), restarts.max(1), seed))
        }
    }
}

/// Enumerates `x` over the rows (first sign pinned to +1) in Gray-code order and
/// closes `y = sign(Aᵀx)` analytically.
fn exact_inf_to_one(m: &DMatrix<f64>) -> Result<InfToOne> {
    let (n, cols) = (m.nrows(), m.ncols());
    if n > INF_TO_ONE_CAP {
        return Err(Error::CapExceeded {
            what: "exact ∞→1 enumeration (use the heuristic mode)",
            needed: n,
            cap: INF_TO_ONE_CAP,
        });
    }
    let mut x = vec![1i8; n];
    let column_sums = |x: &[i8]| -> Vec<f64> {
        (0..cols)
            .map(|j| (0..n).map(|i| f64::from(x[i]) * m[(i, j)]).sum())
            .collect()
    };
    let mut s = column_sums(&x);
    let mut best = f64::NEG_INFINITY;
    let mut best_x = x.clone();
    let mut best_s = s.clone();
    for g in 0usize..1 << (n - 1) {
        if g > 0 {
            let i = 1 + g.trailing_zeros() as usize;
            let old = f64::from(x[i]);
            x[i] = -x[i];
            if g % 4096 == 0 {
                s = column_sums(&x);
            } else {
                for (j, sj) in s.iter_mut().enumerate() {
                    *sj -= 2.0 * old * m[(i, j)];
                }
            }
        }
        let value: f64 = s.iter().map(|v| v.abs()).sum();
        if value > best {
            best = value;
            best_x.copy_from_slice(&x);
            best_s.copy_from_slice(&s);
        }
    }
    // Recompute from the witness so the reported value carries no Gray-code drift.
    let s = column_sums(&best_x);
    let y: Vec<i8> = best_s.iter().map(|&v| sign(v)).collect();
    let value = s.iter().zip(&y).map(|(&v, &yj)| v * f64::from(yj)).sum();
    Ok(InfToOne {
        value,
        x: best_x,
        y,
        exact: true,
    })
}

fn heuristic_inf_to_one(m: &DMatrix<f64>, restarts: usize, seed: u64) -> InfToOne {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, cols) = (m.nrows(), m.ncols());
    let mut best = InfToOne {
        value: f64::NEG_INFINITY,
        x: vec![1; n],
        y: vec![1; cols],
        exact: false,
    };
    for _ in 0..restarts {
        let mut x: Vec<i8> = (0..n).map(|_| if rng.gen() { 1 } else { -1 }).collect();
        let mut value = f64::NEG_INFINITY;
        loop {
            let xf = DVector::from_iterator(n, x.iter().map(|&v| f64::from(v)));
            let y: Vec<i8> = (m.transpose() * &xf).iter().map(|&v| sign(v)).collect();
            let yf = DVector::from_iterator(cols, y.iter().map(|&v| f64::from(v)));
            let ay = m * &yf;
            let next_x: Vec<i8> = ay.iter().map(|&v| sign(v)).collect();
            let next_value: f64 = ay.iter().map(|v| v.abs()).sum();
            if next_value <= value + 1e-12 {
                break;
            }
            value = next_value;
            x = next_x;
            if value > best.value {
                best.value = value;
                best.x = x.clone();
                best.y = y;
            }
        }
    }
    best
}

/// `Γ(A) = ‖A‖·√(nm)`.
pub fn gamma(a: &CoefficientMatrix) -> f64 {
    operator_norm(a) * ((a.rows() * a.cols()) as f64).sqrt()
}

/// `g(A) = Γ(A)/‖A‖_{∞→1}`, never below 1.
pub fn g_ratio(a: &CoefficientMatrix) -> Result<f64> {
    if a.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    Ok(gamma(a) / inf_to_one_norm(a)?.value)
}

/// A matrix with its zero rows and columns removed, plus the kept indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Stripped {
    pub matrix: CoefficientMatrix,
    pub row_map: Vec<usize>,
    pub col_map: Vec<usize>,
}

pub fn strip_zeros(a: &CoefficientMatrix) -> Result<Stripped> {
    let m = a.as_matrix();
    let row_map: Vec<usize> = (0..a.rows())
        .filter(|&i| m.row(i).iter().any(|&v| v != 0.0))
        .collect();
    let col_map: Vec<usize> = (0..a.cols())
        .filter(|&j| m.column(j).iter().any(|&v| v != 0.0))
        .collect();
    if row_map.is_empty() {
        return Err(Error::ZeroMatrix);
    }
    let matrix = DMatrix::from_fn(row_map.len(), col_map.len(), |i, j| {
        m[(row_map[i], col_map[j])]
    });
    Ok(Stripped {
        matrix: CoefficientMatrix::new(matrix)?,
        row_map,
        col_map,
    })
}

fn has_zero_line(m: &DMatrix<f64>) -> bool {
    (0..m.nrows()).any(|i| m.row(i).iter().all(|&v| v == 0.0))
        || (0..m.ncols()).any(|j| m.column(j).iter().all(|&v| v == 0.0))
}

/// `F_A(w, v)`.
pub fn fa_value(a: &CoefficientMatrix, w: &[f64], v: &[f64]) -> Result<f64> {
    let scaled = scale_by_weights(a.as_matrix(), w, v)?;
    let norm = |u: &[f64]| u.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(spectral_norm(&scaled) * norm(w) * norm(v))
}

pub(crate) fn scale_by_weights(m: &DMatrix<f64>, w: &[f64], v: &[f64]) -> Result<DMatrix<f64>> {
    check_dim("row weights", m.nrows(), w.len())?;
    check_dim("column weights", m.ncols(), v.len())?;
    if w.iter().chain(v).any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::NonPositiveWeight);
    }
    Ok(DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        m[(i, j)] / (w[i] * v[j])
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once an accepted step improves `log F_A` by less than this.
    pub rel_tol: f64,
    pub seed: u64,
    /// Optional sign witness of the ∞→1 norm, used to seed one restart.
    pub witness: Option<(Vec<i8>, Vec<i8>)>,
}

impl Default for FaConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iters: 5000,
            rel_tol: 1e-10,
            seed: 0,
            witness: None,
        }
    }
}

/// Positive weights with `‖w‖ = ‖v‖ = 1` and the value `F_A(w, v)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightPair {
    pub w: Vec<f64>,
    pub v: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

struct Objective<'a> {
    a: &'a DMatrix<f64>,
    /// Entries of the matrix scaled by `exp(-θ_i - φ_j)`.
    scratch: DMatrix<f64>,
}

struct Evaluation {
    log_value: f64,
    grad_theta: Vec<f64>,
    grad_phi: Vec<f64>,
}

fn log_norm_sq_weights(params: &[f64]) -> (f64, Vec<f64>) {
    let top = params.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = params.iter().map(|&t| (2.0 * (t - top)).exp()).collect();
    let total: f64 = exps.iter().sum();
    let log_norm = top + 0.5 * total.ln();
    (log_norm, exps.into_iter().map(|e| e / total).collect())
}

impl<'a> Objective<'a> {
    fn new(a: &'a DMatrix<f64>) -> Self {
        Self {
            a,
            scratch: a.clone(),
        }
    }

    fn fill(&mut self, theta: &[f64], phi: &[f64]) {
        for i in 0..self.a.nrows() {
            for j in 0..self.a.ncols() {
                self.scratch[(i, j)] = self.a[(i, j)] * (-theta[i] - phi[j]).exp();
            }
        }
    }

    fn value(&mut self, theta: &[f64], phi: &[f64]) -> f64 {
        self.fill(theta, phi);
        spectral_norm(&self.scratch).ln() + log_norm_sq_weights(theta).0 + log_norm_sq_weights(phi).0
    }

    /// `∂ log σ/∂θ_i = -u_i²`, `∂ log σ/∂φ_j = -ν_j²` for the top singular pair;
    /// `∂ log ‖e^θ‖/∂θ_i` is the normalized squared weight.
    fn evaluate(&mut self, theta: &[f64], phi: &[f64], rng: &mut ChaCha8Rng) -> Evaluation {
        self.fill(theta, phi);
        let sigma = spectral_norm(&self.scratch);
        let (u, nu) = top_singular_pair(&self.scratch, rng);
        let (log_w, w_sq) = log_norm_sq_weights(theta);
        let (log_v, v_sq) = log_norm_sq_weights(phi);
        Evaluation {
            log_value: sigma.ln() + log_w + log_v,
            grad_theta: w_sq.iter().zip(&u).map(|(ws, ui)| ws - ui * ui).collect(),
            grad_phi: v_sq.iter().zip(&nu).map(|(vs, ni)| vs - ni * ni).collect(),
        }
    }
}

/// Top left/right singular vectors. A tiny random perturbation breaks ties when
/// the top singular value is (nearly) repeated; it never enters the objective.
fn top_singular_pair(m: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let pick = |svd: &SVD<f64, nalgebra::Dyn, nalgebra::Dyn>| {
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        order
    };
    let svd = SVD::new(m.clone(), true, true);
    let order = pick(&svd);
    let degenerate = order.len() > 1 && {
        let (s1, s2) = (svd.singular_values[order[0]], svd.singular_values[order[1]]);
        s1 - s2 <= 1e-9 * s1
    };
    let svd = if degenerate {
        let scale = 1e-9 * svd.singular_values[order[0]].max(f64::MIN_POSITIVE);
        let perturbed = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
            m[(i, j)] + scale * rng.gen_range(-1.0..1.0)
        });
        SVD::new(perturbed, true, true)
    } else {
        svd
    };
    let top = pick(&svd)[0];
    let u = svd.u.as_ref().expect("u requested").column(top).iter().copied().collect();
    let v = svd.v_t.as_ref().expect("v_t requested").row(top).iter().copied().collect();
    (u, v)
}

/// Adaptive-step gradient descent on `log F_A` in log-weights from one start.
fn descend(
    objective: &mut Objective<'_>,
    mut theta: Vec<f64>,
    mut phi: Vec<f64>,
    config: &FaConfig,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, Vec<f64>, f64, bool, usize) {
    let mut step = 1.0;
    let mut current = objective.evaluate(&theta, &phi, rng);
    for iter in 0..config.max_iters {
        let grad_sq: f64 = current
            .grad_theta
            .iter()
            .chain(&current.grad_phi)
            .map(|g| g * g)
            .sum();
        if grad_sq < 1e-30 {
            return (theta, phi, current.log_value, true, iter);
        }
        let mut accepted = None;
        while step > 1e-14 {
            let t: Vec<f64> = theta.iter().zip(&current.grad_theta).map(|(x, g)| x - step * g).collect();
            let p: Vec<f64> = phi.iter().zip(&current.grad_phi).map(|(x, g)| x - step * g).collect();
            let value = objective.value(&t, &p);
            if value <= current.log_value - 1e-4 * step * grad_sq {
                accepted = Some((t, p));
                break;
            }
            step *= 0.5;
        }
        let Some((t, p)) = accepted else {
            return (theta, phi, current.log_value, true, iter);
        };
        let next = objective.evaluate(&t, &p, rng);
        let improvement = current.log_value - next.log_value;
        theta = t;
        phi = p;
        current = next;
        step = (step * 1.5).min(16.0);
        if improvement < config.rel_tol {
            return (theta, phi, current.log_value, true, iter + 1);
        }
    }
    (theta, phi, current.log_value, false, config.max_iters)
}

fn log_weights_from_squares(squares: impl Iterator<Item = f64>) -> Vec<f64> {
    squares.map(|s| 0.5 * s.max(1e-12).ln()).collect()
}

/// Locally minimizes `F_A` over positive weights with random restarts.
///
/// `F_A` upper-bounds `‖A‖_G` at every feasible point and its infimum equals it.
pub fn minimize_fa(a: &CoefficientMatrix, config: &FaConfig) -> Result<WeightPair> {
    let m = a.as_matrix();
    if has_zero_line(m) {
        return Err(Error::ZeroRowOrColumn);
    }
    let (n, cols) = (m.nrows(), m.ncols());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut starts: Vec<(Vec<f64>, Vec<f64>)> = vec![(vec![0.0; n], vec![0.0; cols])];
    starts.push((
        log_weights_from_squares((0..n).map(|i| m.row(i).iter().map(|v| v.abs()).sum())),
        log_weights_from_squares((0..cols).map(|j| m.column(j).iter().map(|v| v.abs()).sum())),
    ));
    if let Some((x, y)) = &config.witness {
        if x.len() == n && y.len() == cols {
            let xf = DVector::from_iterator(n, x.iter().map(|&v| f64::from(v)));
            let yf = DVector::from_iterator(cols, y.iter().map(|&v| f64::from(v)));
            let ay = m * yf;
            let atx = m.transpose() * xf;
            starts.push((
                log_weights_from_squares(ay.iter().map(|v| v.abs())),
                log_weights_from_squares(atx.iter().map(|v| v.abs())),
            ));
        }
    }
    // Stationary unit vectors satisfy Σ_j a_ij q_j = α_i p_i; the multipliers
    // α, β are the squared weights of the matching diagonal scaling.
    let vectors = vector_program(m, (n + cols).min(8), 4, config.seed ^ 0x5eed);
    starts.push((
        log_weights_from_squares((m * vectors.q.clone()).row_iter().map(|r| r.norm())),
        log_weights_from_squares((m.transpose() * vectors.p.clone()).row_iter().map(|r| r.norm())),
    ));
    while starts.len() < config.restarts.max(1) {
        starts.push((
            (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect(),
            (0..cols).map(|_| rng.gen_range(-1.5..1.5)).collect(),
        ));
    }

    let mut objective = Objective::new(m);
    let mut best: Option<(Vec<f64>, Vec<f64>, f64, bool, usize)> = None;
    let mut total_iters = 0;
    for (theta, phi) in starts {
        let run = descend(&mut objective, theta, phi, config, &mut rng);
        total_iters += run.4;
        if best.as_ref().is_none_or(|b| run.2 < b.2) {
            best = Some(run);
        }
    }
    let (theta, phi, _, converged, _) = best.expect("at least one start");
    let normalize = |params: &[f64]| {
        let (log_norm, _) = log_norm_sq_weights(params);
        params.iter().map(|&t| (t - log_norm).exp()).collect::<Vec<f64>>()
    };
    let w = normalize(&theta);
    let v = normalize(&phi);
    let value = fa_value(a, &w, &v)?;
    Ok(WeightPair {
        w,
        v,
        value,
        converged,
        iterations: total_iters,
    })
}

/// Best unit-vector configuration found for `max Σ a_ij ⟨p_i, q_j⟩` in `ℝ^r`
/// (rows of `p` and `q`), by alternating maximization from random starts.
struct VectorSolution {
    value: f64,
    p: DMatrix<f64>,
    q: DMatrix<f64>,
}

fn normalize_rows(mut mat: DMatrix<f64>, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    for mut row in mat.row_iter_mut() {
        let norm = row.norm();
        if norm > 1e-300 {
            row /= norm;
        } else {
            row.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
            let norm = row.norm();
            row /= norm;
        }
    }
    mat
}

fn vector_program(m: &DMatrix<f64>, r: usize, samples: usize, seed: u64) -> VectorSolution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = VectorSolution {
        value: f64::NEG_INFINITY,
        p: DMatrix::zeros(m.nrows(), r),
        q: DMatrix::zeros(m.ncols(), r),
    };
    for _ in 0..samples.max(1) {
        let init = DMatrix::from_fn(m.ncols(), r, |_, _| rng.gen_range(-1.0..1.0));
        let mut q = normalize_rows(init, &mut rng);
        let mut p = normalize_rows(m * &q, &mut rng);
        let mut value = (p.transpose() * m * &q).trace();
        for _ in 0..20_000 {
            let next_q = normalize_rows(m.transpose() * &p, &mut rng);
            let next_p = normalize_rows(m * &next_q, &mut rng);
            let next = (next_p.transpose() * m * &next_q).trace();
            if next <= value {
                break;
            }
            let done = next - value <= 1e-15 * next.abs();
            p = next_p;
            q = next_q;
            value = next;
            if done {
                break;
            }
        }
        if value > best.value {
            best = VectorSolution { value, p, q };
        }
    }
    best
}

/// Certified lower bound on `‖A‖_G`: the best `Σ a_ij ⟨p_i, q_j⟩` over unit
/// vectors in `ℝ^r` found by alternating maximization from random starts.
pub fn grothendieck_lower_oracle(a: &CoefficientMatrix, r: usize, samples: usize, seed: u64) -> f64 {
    let m = a.as_matrix();
    if r <= 1 && m.nrows().min(m.ncols()) <= INF_TO_ONE_CAP {
        // Unit vectors in ℝ¹ are ±1.
        return inf_to_one_norm(a).map(|t| t.value).unwrap_or(0.0);
    }
    vector_program(m, r.max(1), samples, seed).value
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub rows: usize,
    pub cols: usize,
    pub spectral: f64,
    pub inf_to_one: f64,
    pub gamma: f64,
    pub g_ratio: f64,
    pub grothendieck_upper: f64,
    pub ratio_g: f64,
    pub k_lower: f64,
    pub k_upper: f64,
    pub exact: bool,
    pub x_witness: Vec<i8>,
    pub y_witness: Vec<i8>,
    pub weights: WeightPair,
    pub row_map: Vec<usize>,
    pub col_map: Vec<usize>,
}

/// Every norm of `a`; the Grothendieck estimate is computed on the stripped matrix.
pub fn norm_report(a: &CoefficientMatrix, mode: InfToOneMode, config: &FaConfig) -> Result<NormReport> {
    let stripped = strip_zeros(a)?;
    let inf = inf_to_one_norm_with(a, mode)?;
    let spectral = operator_norm(a);
    let gamma = gamma(a);
    let inner_witness = (
        stripped.row_map.iter().map(|&i| inf.x[i]).collect(),
        stripped.col_map.iter().map(|&j| inf.y[j]).collect(),
    );
    let fa_config = FaConfig {
        witness: Some(inner_witness),
        ..config.clone()
    };
    let weights = minimize_fa(&stripped.matrix, &fa_config)?;
    let (k_lower, k_upper) = grothendieck_constant_bounds();
    Ok(NormReport {
        rows: a.rows(),
        cols: a.cols(),
        spectral,
        inf_to_one: inf.value,
        gamma,
        g_ratio: gamma / inf.value,
        grothendieck_upper: weights.value,
        ratio_g: weights.value / inf.value,
        k_lower,
        k_upper,
        exact: inf.exact,
        x_witness: inf.x,
        y_witness: inf.y,
        weights,
        row_map: stripped.row_map,
        col_map: stripped.col_map,
    })
}

/// Enumerates both sides; test oracle for the Gray-code path.
#[doc(hidden)]
pub fn brute_force_inf_to_one(a: &CoefficientMatrix) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for mx in 0..1usize << a.rows() {
        let x = point_from_mask(a.rows(), mx);
        for my in 0..1usize << a.cols() {
            let y = point_from_mask(a.cols(), my);
            best = best.max(a.bilinear_signs(&x, &y).expect("dimensions match"));
        }
    }
    best
}
