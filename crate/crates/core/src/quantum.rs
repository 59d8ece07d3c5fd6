//! Unitary dilation of a scaled coefficient matrix and exact simulation of the
//! resulting one-query SWAP-test algorithm with its biased output wrapper.
//!
//! All matrices are real, so the dilation is orthogonal and `Re⟨ψ|ψ′⟩` is just
//! the inner product.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::norms::{self, spectral_norm};
use crate::poly::CoefficientMatrix;

/// Relative slack allowed on `‖B‖ ≤ C`.
pub const SCALE_SLACK: f64 = 1e-9;
/// Eigenvalues of `I − SᵀS` in `[−EIGEN_CLAMP, 0]` are treated as 0.
pub const EIGEN_CLAMP: f64 = 1e-9;
/// Eigenvalues at or below this produce an all-zero dilation row, which is dropped.
const PRUNE_EIGEN: f64 = 1e-12;
const COMPLETION_TOL: f64 = 1e-8;

/// A square orthogonal `U` whose first `m′` columns restricted to the first
/// `n′` rows equal `B/C`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dilation {
    pub b: DMatrix<f64>,
    pub c: f64,
    pub u: DMatrix<f64>,
}

impl Dilation {
    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn n_prime(&self) -> usize {
        self.b.nrows()
    }

    pub fn m_prime(&self) -> usize {
        self.b.ncols()
    }

    /// `‖UᵀU − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let k = self.dim();
        (self.u.transpose() * &self.u - DMatrix::identity(k, k)).amax()
    }

    /// `‖U[..n′, ..m′] − B/C‖_max`.
    pub fn embedding_defect(&self) -> f64 {
        let (n, m) = (self.n_prime(), self.m_prime());
        (self.u.view((0, 0), (n, m)) - &self.b / self.c).amax()
    }
}

fn first_nonzero_positive(mut v: DVector<f64>) -> DVector<f64> {
    if let Some(x) = v.iter().find(|x| x.abs() > 1e-12) {
        if *x < 0.0 {
            v.neg_mut();
        }
    }
    v
}

/// Dilates `B/C` to an orthogonal matrix: with `A = I − (B/C)ᵀ(B/C) = VᵀΛV` and
/// `W = √Λ V`, the stacked `[B/C; W]` has orthonormal columns, which are then
/// completed by Gram–Schmidt against the identity columns in order.
pub fn dilate(b: &DMatrix<f64>, c: f64) -> Result<Dilation> {
    if b.nrows() == 0 || b.ncols() == 0 {
        return Err(Error::InvalidInput("dilated matrix must be non-empty".into()));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidInput(format!("scale must be positive, got {c}")));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix entries must be finite".into()));
    }
    let norm = spectral_norm(b);
    if norm > c * (1.0 + SCALE_SLACK) {
        return Err(Error::ScaleViolation { norm, scale: c });
    }
    let (n, m) = (b.nrows(), b.ncols());
    let s = b / c;
    let defect = DMatrix::identity(m, m) - s.transpose() * &s;
    let eig = SymmetricEigen::new(defect);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));

    let mut w_rows: Vec<DVector<f64>> = Vec::new();
    for &i in &order {
        let lambda = eig.eigenvalues[i];
        if lambda < -EIGEN_CLAMP {
            return Err(Error::ScaleViolation { norm, scale: c });
        }
        if lambda <= PRUNE_EIGEN {
            continue;
        }
        let v = first_nonzero_positive(eig.eigenvectors.column(i).into_owned());
        w_rows.push(v * lambda.sqrt());
    }

    let k = n + w_rows.len();
    if k < m {
        return Err(Error::Numeric(format!("dilation has {k} rows for {m} columns")));
    }
    let mut u = DMatrix::zeros(k, k);
    u.view_mut((0, 0), (n, m)).copy_from(&s);
    for (r, row) in w_rows.iter().enumerate() {
        u.view_mut((n + r, 0), (1, m)).copy_from(&row.transpose());
    }

    let mut filled = m;
    for e in 0..k {
        if filled == k {
            break;
        }
        let mut v = DVector::zeros(k);
        v[e] = 1.0;
        for _ in 0..2 {
            for j in 0..filled {
                let col = u.column(j);
                let proj = col.dot(&v);
                v.axpy(-proj, &col, 1.0);
            }
        }
        let len = v.norm();
        if len > COMPLETION_TOL {
            u.set_column(filled, &first_nonzero_positive(v / len));
            filled += 1;
        }
    }
    if filled < k {
        return Err(Error::Numeric("orthonormal completion failed".into()));
    }
    Ok(Dilation { b: b.clone(), c, u })
}

/// The one-query algorithm: prepare `x̂ = x/√n′`, query to get `U ŷ`, SWAP-test,
/// and output 0 outright with probability `bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneQueryAlgorithm {
    pub dilation: Dilation,
    pub n_prime: usize,
    pub m_prime: usize,
    pub c: f64,
    pub bias: f64,
    /// Source index of each split row / column. With `n_inputs` set these index
    /// `x̃ = (1, x_1, …, x_n)`; otherwise they index the unsplit matrix.
    pub origin_rows: Vec<usize>,
    pub origin_cols: Vec<usize>,
    pub n_inputs: Option<usize>,
    /// Approximation error of the compiled form on the function's domain.
    pub epsilon_prime: Option<f64>,
}

/// Builds the algorithm for `A′` at scale `c ≥ Γ(A′)`, with identity origin maps.
pub fn build_algorithm(a_prime: &CoefficientMatrix, c: f64) -> Result<OneQueryAlgorithm> {
    let (n, m) = (a_prime.rows(), a_prime.cols());
    let b = a_prime.as_matrix() * ((n * m) as f64).sqrt();
    let gamma = norms::gamma(a_prime);
    if gamma > c * (1.0 + SCALE_SLACK) {
        return Err(Error::ScaleViolation { norm: gamma, scale: c });
    }
    let dilation = dilate(&b, c)?;
    Ok(OneQueryAlgorithm {
        dilation,
        n_prime: n,
        m_prime: m,
        c,
        bias: 1.0 / (2.0 * c + 1.0),
        origin_rows: (0..n).collect(),
        origin_cols: (0..m).collect(),
        n_inputs: None,
        epsilon_prime: None,
    })
}

impl OneQueryAlgorithm {
    /// Rebuilds an algorithm from a stored unitary; `B` is read off its top block.
    pub fn from_parts(
        u: DMatrix<f64>,
        n_prime: usize,
        m_prime: usize,
        c: f64,
        origin_rows: Vec<usize>,
        origin_cols: Vec<usize>,
    ) -> Result<Self> {
        if !u.is_square() || u.nrows() < n_prime.max(m_prime) || n_prime == 0 || m_prime == 0 {
            return Err(Error::InvalidInput(format!(
                "unitary of shape {}x{} cannot carry a {n_prime}x{m_prime} block",
                u.nrows(),
                u.ncols()
            )));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidInput(format!("scale must be positive, got {c}")));
        }
        check_dim("origin rows", n_prime, origin_rows.len())?;
        check_dim("origin cols", m_prime, origin_cols.len())?;
        let b = u.view((0, 0), (n_prime, m_prime)) * c;
        Ok(Self {
            dilation: Dilation { b, c, u },
            n_prime,
            m_prime,
            c,
            bias: 1.0 / (2.0 * c + 1.0),
            origin_rows,
            origin_cols,
            n_inputs: None,
            epsilon_prime: None,
        })
    }

    /// `A′ = B/√(n′m′)`.
    pub fn a_prime(&self) -> DMatrix<f64> {
        &self.dilation.b / ((self.n_prime * self.m_prime) as f64).sqrt()
    }

    /// `p′(x, y) = xᵀA′y`.
    pub fn p_value(&self, x: &[i8], y: &[i8]) -> Result<f64> {
        check_dim("row input", self.n_prime, x.len())?;
        check_dim("column input", self.m_prime, y.len())?;
        let b = &self.dilation.b;
        let mut total = 0.0;
        for i in 0..self.n_prime {
            let row: f64 = (0..self.m_prime).map(|j| b[(i, j)] * f64::from(y[j])).sum();
            total += f64::from(x[i]) * row;
        }
        Ok(total / ((self.n_prime * self.m_prime) as f64).sqrt())
    }

    /// Copies an original input to the split row and column registers.
    pub fn lift(&self, x: &[i8]) -> Result<(Vec<i8>, Vec<i8>)> {
        let source: Vec<i8> = match self.n_inputs {
            Some(n) => {
                check_dim("input", n, x.len())?;
                std::iter::once(1).chain(x.iter().copied()).collect()
            }
            None => x.to_vec(),
        };
        let pick = |map: &[usize]| -> Result<Vec<i8>> {
            map.iter()
                .map(|&i| {
                    source.get(i).copied().ok_or_else(|| {
                        Error::InvalidInput(format!("origin index {i} outside input of length {}", source.len()))
                    })
                })
                .collect()
        };
        Ok((pick(&self.origin_rows)?, pick(&self.origin_cols)?))
    }

    pub fn error_bound(&self) -> f64 {
        (self.c + self.epsilon_prime.unwrap_or(0.0)) / (2.0 * self.c + 1.0)
    }

    fn states(&self, x: &[i8], y: &[i8]) -> Result<(DVector<f64>, DVector<f64>)> {
        check_dim("row input", self.n_prime, x.len())?;
        check_dim("column input", self.m_prime, y.len())?;
        for &s in x.iter().chain(y) {
            if s != 1 && s != -1 {
                return Err(Error::InvalidInput(format!("inputs must be ±1, got {s}")));
            }
        }
        let k = self.dilation.dim();
        let (sx, sy) = ((self.n_prime as f64).sqrt(), (self.m_prime as f64).sqrt());
        let psi = DVector::from_fn(k, |i, _| if i < self.n_prime { f64::from(x[i]) / sx } else { 0.0 });
        let y_hat = DVector::from_fn(k, |j, _| if j < self.m_prime { f64::from(y[j]) / sy } else { 0.0 });
        Ok((psi, &self.dilation.u * y_hat))
    }
}

/// Exact outcome of one run on split inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    /// Probability that the unbiased algorithm outputs 1.
    pub r: f64,
    /// Probability that the biased algorithm outputs 1.
    pub q: f64,
    /// `1` iff `q > ½`.
    pub decision: u8,
    pub p_value: f64,
    pub error_bound: f64,
    /// One output bit drawn from the biased algorithm when a seed was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled: Option<u8>,
}

/// `r = ½(1 + ⟨x̂|U|ŷ⟩)`, followed by the biased wrapper.
pub fn acceptance_probability(alg: &OneQueryAlgorithm, x: &[i8], y: &[i8]) -> Result<SimulationReport> {
    let (psi, psi_prime) = alg.states(x, y)?;
    let r = 0.5 * (1.0 + psi.dot(&psi_prime));
    let mut report = biased_decision(alg, r, None);
    report.p_value = alg.p_value(x, y)?;
    Ok(report)
}

/// Probability of measuring the control in `|0⟩` after a Hadamard on
/// `(|0⟩|ψ⟩ + |1⟩|ψ′⟩)/√2`, from the explicit `2k`-dimensional state.
pub fn swap_test_statevector(alg: &OneQueryAlgorithm, x: &[i8], y: &[i8]) -> Result<f64> {
    let (psi, psi_prime) = alg.states(x, y)?;
    let k = psi.len();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut state = DVector::zeros(2 * k);
    state.rows_mut(0, k).copy_from(&(&psi * h));
    state.rows_mut(k, k).copy_from(&(&psi_prime * h));
    let mut after = DVector::zeros(2 * k);
    for i in 0..k {
        after[i] = h * (state[i] + state[k + i]);
        after[k + i] = h * (state[i] - state[k + i]);
    }
    Ok(after.rows(0, k).norm_squared())
}

/// Applies the wrapper that outputs 0 with probability `1/(2C+1)`, so
/// `q = 2C/(2C+1)·r`. With a seed, also draws one output bit.
pub fn biased_decision(alg: &OneQueryAlgorithm, r: f64, seed: Option<u64>) -> SimulationReport {
    let q = (1.0 - alg.bias) * r;
    let sampled = seed.map(|s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let skip: f64 = rng.gen();
        let run: f64 = rng.gen();
        u8::from(skip >= alg.bias && run < r)
    });
    SimulationReport {
        r,
        q,
        decision: u8::from(q > 0.5),
        p_value: alg.c * (2.0 * r - 1.0),
        error_bound: alg.error_bound(),
        sampled,
    }
}

/// `(C + ε′)/(2C + 1)`.
pub fn error_bound(c: f64, epsilon_prime: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidInput(format!("scale must be positive, got {c}")));
    }
    if !(0.0..0.5).contains(&epsilon_prime) {
        return Err(Error::InvalidInput(format!("epsilon' must lie in [0, 1/2), got {epsilon_prime}")));
    }
    Ok((c + epsilon_prime) / (2.0 * c + 1.0))
}

/// `(K + ε′)/(2(K + 1))`, the alternative form with denominator `2K + 2`.
pub fn statement_error_bound(k: f64, epsilon_prime: f64) -> f64 {
    (k + epsilon_prime) / (2.0 * (k + 1.0))
}
