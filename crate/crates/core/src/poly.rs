//! Partial Boolean functions, multilinear polynomials in the ±1 Fourier basis,
//! block-multilinear forms and their degree-2 coefficient matrices.
//!
//! Points of the cube `{-1,+1}^n` are indexed by bit masks: bit `i` of the mask
//! is set iff `x_{i+1} = -1`. Under this convention the character `χ_T(x)` of a
//! subset mask `T` equals `(-1)^{popcount(T & x)}`, so the table of values of a
//! polynomial is the Walsh–Hadamard transform of its coefficient vector.

use std::collections::{BTreeMap, HashSet};

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};

/// Default limit on the number of ±1 variables enumerated by exact cube scans.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// Largest dense truth table handled by the Fourier routines.
pub const MAX_FOURIER_VARS: usize = 24;

/// Absolute slack used when comparing an observed error against a threshold.
pub const COMPARISON_SLACK: f64 = 1e-12;

/// The ±1 point with the given mask.
pub fn point_from_mask(n: usize, mask: usize) -> Vec<i8> {
    (0..n)
        .map(|i| if (mask >> i) & 1 == 1 { -1 } else { 1 })
        .collect()
}

/// Inverse of [`point_from_mask`]. Entries other than ±1 are rejected.
pub fn mask_from_point(x: &[i8]) -> Result<usize> {
    x.iter().enumerate().try_fold(0usize, |mask, (i, &xi)| match xi {
        1 => Ok(mask),
        -1 => Ok(mask | (1 << i)),
        other => Err(Error::InvalidInput(format!(
            "coordinate {i} is {other}, expected ±1"
        ))),
    })
}

/// Lifts a ±1 point to `(1, x_1, …, x_n)` as reals.
pub fn with_dummy(x: &[i8]) -> Vec<f64> {
    std::iter::once(1.0)
        .chain(x.iter().map(|&xi| f64::from(xi)))
        .collect()
}

/// In-place unnormalized Walsh–Hadamard transform. `data.len()` must be a power of two.
pub fn walsh_hadamard(data: &mut [f64]) {
    let len = data.len();
    debug_assert!(len.is_power_of_two());
    let mut half = 1;
    while half < len {
        for start in (0..len).step_by(2 * half) {
            for i in start..start + half {
                let (a, b) = (data[i], data[i + half]);
                data[i] = a + b;
                data[i + half] = a - b;
            }
        }
        half *= 2;
    }
}

/// A function from a subset of `{-1,+1}^n` to `{0,1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialBooleanFunction {
    n: usize,
    points: Vec<(Vec<i8>, u8)>,
}

impl PartialBooleanFunction {
    pub fn new(n: usize, points: Vec<(Vec<i8>, u8)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("empty domain".into()));
        }
        let mut seen = HashSet::with_capacity(points.len());
        for (x, value) in &points {
            check_dim("domain point", n, x.len())?;
            if *value > 1 {
                return Err(Error::InvalidInput(format!(
                    "function value {value} is not 0 or 1"
                )));
            }
            let mask = mask_from_point(x)?;
            if !seen.insert(mask) {
                return Err(Error::InvalidInput(format!("duplicate point {x:?}")));
            }
        }
        Ok(Self { n, points })
    }

    /// Total function from a truth table indexed by point masks.
    pub fn from_truth_table(n: usize, table: &[u8]) -> Result<Self> {
        if n > MAX_FOURIER_VARS {
            return Err(Error::CapExceeded {
                what: "truth table variables",
                needed: n,
                cap: MAX_FOURIER_VARS,
            });
        }
        check_dim("truth table", 1 << n, table.len())?;
        let points = table
            .iter()
            .enumerate()
            .map(|(mask, &v)| (point_from_mask(n, mask), v))
            .collect();
        Self::new(n, points)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (&[i8], u8)> {
        self.points.iter().map(|(x, v)| (x.as_slice(), *v))
    }

    pub fn value(&self, x: &[i8]) -> Option<u8> {
        self.points
            .iter()
            .find(|(p, _)| p.as_slice() == x)
            .map(|(_, v)| *v)
    }

    pub fn is_total(&self) -> bool {
        self.n < usize::BITS as usize && self.points.len() == 1 << self.n
    }

    /// Truth table indexed by point masks, available only for total functions.
    pub fn truth_table(&self) -> Result<Vec<u8>> {
        if !self.is_total() {
            return Err(Error::InvalidInput(
                "truth table requested for a partial function".into(),
            ));
        }
        let mut table = vec![0u8; 1 << self.n];
        for (x, v) in &self.points {
            table[mask_from_point(x)?] = *v;
        }
        Ok(table)
    }
}

/// A multilinear polynomial `Σ_T p̂_T Π_{i∈T} x_i`, stored sparsely.
///
/// Subsets are sorted lists of 0-based variable indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MultilinearPolynomial {
    n: usize,
    terms: BTreeMap<Vec<usize>, f64>,
}

impl MultilinearPolynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a polynomial from `(subset, coefficient)` pairs. Each subset may
    /// appear only once and must not repeat a variable.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let mut poly = Self::zero(n);
        for (mut vars, coef) in terms {
            vars.sort_unstable();
            if vars.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInput(format!(
                    "term {vars:?} repeats a variable"
                )));
            }
            if let Some(&v) = vars.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidInput(format!(
                    "variable index {v} out of range for n = {n}"
                )));
            }
            if !coef.is_finite() {
                return Err(Error::InvalidInput("non-finite coefficient".into()));
            }
            if poly.terms.insert(vars.clone(), coef).is_some() {
                return Err(Error::InvalidInput(format!("subset {vars:?} appears twice")));
            }
        }
        Ok(poly)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.terms.iter().map(|(t, &c)| (t.as_slice(), c))
    }

    pub fn coefficient(&self, subset: &[usize]) -> f64 {
        self.terms.get(subset).copied().unwrap_or(0.0)
    }

    /// Largest `|T|` with a nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .filter(|(_, &c)| c != 0.0)
            .map(|(t, _)| t.len())
            .max()
            .unwrap_or(0)
    }

    /// `a·p + b`, used for the affine shifts between 0/1 and ±1 conventions.
    pub fn affine(&self, scale: f64, offset: f64) -> Self {
        let mut terms: BTreeMap<Vec<usize>, f64> = self
            .terms
            .iter()
            .map(|(t, &c)| (t.clone(), scale * c))
            .collect();
        *terms.entry(Vec::new()).or_insert(0.0) += offset;
        Self { n: self.n, terms }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim("polynomial evaluation", self.n, x.len())?;
        Ok(self
            .terms
            .iter()
            .map(|(t, &c)| c * t.iter().map(|&i| x[i]).product::<f64>())
            .sum())
    }

    pub fn eval_signs(&self, x: &[i8]) -> Result<f64> {
        let x: Vec<f64> = x.iter().map(|&v| f64::from(v)).collect();
        self.eval(&x)
    }

    /// All `2^n` values on the cube, indexed by point masks.
    pub fn cube_values(&self) -> Result<Vec<f64>> {
        if self.n > MAX_FOURIER_VARS {
            return Err(Error::CapExceeded {
                what: "cube variables",
                needed: self.n,
                cap: MAX_FOURIER_VARS,
            });
        }
        let mut data = vec![0.0; 1 << self.n];
        for (t, &c) in &self.terms {
            let mask = t.iter().fold(0usize, |m, &i| m | (1 << i));
            data[mask] += c;
        }
        walsh_hadamard(&mut data);
        Ok(data)
    }

    /// `(min, max)` of the polynomial over the cube.
    pub fn cube_range(&self) -> Result<(f64, f64)> {
        let values = self.cube_values()?;
        Ok(values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            }))
    }

    pub fn cube_max_abs(&self) -> Result<f64> {
        let (lo, hi) = self.cube_range()?;
        Ok(lo.abs().max(hi.abs()))
    }
}

/// Walsh–Fourier interpolation of a full table of values indexed by point masks.
pub fn fourier_expand(n: usize, table: &[f64]) -> Result<MultilinearPolynomial> {
    if n > MAX_FOURIER_VARS {
        return Err(Error::CapExceeded {
            what: "truth table variables",
            needed: n,
            cap: MAX_FOURIER_VARS,
        });
    }
    check_dim("truth table", 1 << n, table.len())?;
    let mut data = table.to_vec();
    walsh_hadamard(&mut data);
    let scale = 1.0 / (1u64 << n) as f64;
    let terms = data.into_iter().enumerate().filter(|&(_mask, v)| v != 0.0).map(|(mask, v)| {
            let vars = (0..n).filter(|i| (mask >> i) & 1 == 1).collect();
            (vars, v * scale)
        });
    MultilinearPolynomial::from_terms(n, terms)
}

/// Fourier expansion of a total Boolean function.
pub fn fourier_expand_function(f: &PartialBooleanFunction) -> Result<MultilinearPolynomial> {
    let table: Vec<f64> = f.truth_table()?.into_iter().map(f64::from).collect();
    fourier_expand(f.n(), &table)
}

/// Worst-case deviation of an evaluator from `f` over its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxReport {
    pub max_error: f64,
    pub witness: Vec<i8>,
    pub epsilon: f64,
    pub pass: bool,
}

/// Maximum of `|value(x) - f(x)|` over the domain of `f`; ties keep the first point.
pub fn check_approximates<F>(value: F, f: &PartialBooleanFunction, epsilon: f64) -> ApproxReport
where
    F: Fn(&[i8]) -> f64,
{
    let mut max_error = f64::NEG_INFINITY;
    let mut witness = Vec::new();
    for (x, fx) in f.points() {
        let err = (value(x) - f64::from(fx)).abs();
        if err > max_error {
            max_error = err;
            witness = x.to_vec();
        }
    }
    let pass = (0.0..0.5).contains(&epsilon) && max_error <= epsilon + COMPARISON_SLACK;
    ApproxReport {
        max_error,
        witness,
        epsilon,
        pass,
    }
}

/// A real matrix of bilinear-form coefficients, `p(x, y) = xᵀ A y`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix(DMatrix<f64>);

impl CoefficientMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::InvalidInput("matrix dimensions must be >= 1".into()));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(Self(matrix))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch {
                context: "matrix row",
                expected: ncols,
                got: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(rows, cols))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|i| self.0.row(i).iter().copied().collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim("bilinear form rows", self.rows(), x.len())?;
        check_dim("bilinear form cols", self.cols(), y.len())?;
        let mut total = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row: f64 = y.iter().enumerate().map(|(j, &yj)| self.0[(i, j)] * yj).sum();
            total += xi * row;
        }
        Ok(total)
    }

    pub fn bilinear_signs(&self, x: &[i8], y: &[i8]) -> Result<f64> {
        let x: Vec<f64> = x.iter().map(|&v| f64::from(v)).collect();
        let y: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
        self.bilinear(&x, &y)
    }
}

/// Exact maximum of `|P|` over the cube together with a maximizing assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeMax {
    pub value: f64,
    /// One ±1 vector per block, dummy slot first.
    pub witness: Vec<Vec<i8>>,
}

/// A form in `k` blocks of `block_size` variables where every monomial picks
/// exactly one variable per block. Index 0 of each block is the dummy slot.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMultilinearForm {
    k: usize,
    block_size: usize,
    coeffs: BTreeMap<Vec<usize>, f64>,
}

impl BlockMultilinearForm {
    pub fn new(k: usize, block_size: usize) -> Result<Self> {
        if k == 0 || block_size == 0 {
            return Err(Error::InvalidInput(
                "block form needs k >= 1 and block_size >= 1".into(),
            ));
        }
        Ok(Self {
            k,
            block_size,
            coeffs: BTreeMap::new(),
        })
    }

    /// Builds a form from `(index tuple, coefficient)` pairs; repeated tuples are rejected.
    pub fn from_coeffs<I>(k: usize, block_size: usize, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let mut form = Self::new(k, block_size)?;
        for (idx, coef) in coeffs {
            form.validate_index(&idx)?;
            if !coef.is_finite() {
                return Err(Error::InvalidInput("non-finite coefficient".into()));
            }
            if form.coeffs.insert(idx.clone(), coef).is_some() {
                return Err(Error::InvalidInput(format!("index tuple {idx:?} appears twice")));
            }
        }
        Ok(form)
    }

    fn validate_index(&self, idx: &[usize]) -> Result<()> {
        check_dim("monomial index tuple", self.k, idx.len())?;
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.block_size) {
            return Err(Error::InvalidInput(format!(
                "index {bad} out of range for block size {}",
                self.block_size
            )));
        }
        Ok(())
    }

    /// Adds `coef` to the coefficient of the monomial `idx`.
    pub fn add_term(&mut self, idx: Vec<usize>, coef: f64) -> Result<()> {
        self.validate_index(&idx)?;
        *self.coeffs.entry(idx).or_insert(0.0) += coef;
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficient(&self, idx: &[usize]) -> f64 {
        self.coeffs.get(idx).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.coeffs.iter().map(|(i, &c)| (i.as_slice(), c))
    }

    /// `scale·P + offset·Π_j z^{(j)}_0`.
    pub fn affine(&self, scale: f64, offset: f64) -> Self {
        let mut coeffs: BTreeMap<Vec<usize>, f64> = self
            .coeffs
            .iter()
            .map(|(i, &c)| (i.clone(), scale * c))
            .collect();
        *coeffs.entry(vec![0; self.k]).or_insert(0.0) += offset;
        Self {
            k: self.k,
            block_size: self.block_size,
            coeffs,
        }
    }

    pub fn eval<Z: AsRef<[f64]>>(&self, blocks: &[Z]) -> Result<f64> {
        check_dim("block count", self.k, blocks.len())?;
        for b in blocks {
            check_dim("block length", self.block_size, b.as_ref().len())?;
        }
        Ok(self
            .coeffs
            .iter()
            .map(|(idx, &c)| {
                c * idx
                    .iter()
                    .zip(blocks)
                    .map(|(&i, z)| z.as_ref()[i])
                    .product::<f64>()
            })
            .sum())
    }

    /// `P(x̃, …, x̃)` with `x̃ = (1, x_1, …, x_n)` in every block.
    pub fn diagonal_restriction(&self, x: &[i8]) -> Result<f64> {
        check_dim("diagonal point", self.block_size - 1, x.len())?;
        let lifted = with_dummy(x);
        let blocks = vec![lifted; self.k];
        self.eval(&blocks)
    }

    /// Dense coefficient tensor, block 0 most significant.
    fn dense(&self) -> Vec<f64> {
        let mut tensor = vec![0.0; self.block_size.pow(self.k as u32)];
        for (idx, &c) in &self.coeffs {
            let flat = idx.iter().fold(0usize, |acc, &i| acc * self.block_size + i);
            tensor[flat] += c;
        }
        tensor
    }

    pub fn cube_max_abs(&self) -> Result<CubeMax> {
        self.cube_max_abs_with_cap(DEFAULT_ENUMERATION_CAP)
    }

    /// Exact `max |P(z)|` over all ±1 assignments.
    ///
    /// The form is linear in block 0, so that block is closed analytically
    /// (`Σ|c_i|`); flipping a whole block only flips the sign, so the dummy slot
    /// of every other block is pinned to `+1`. The remaining `(k-1)(block_size-1)`
    /// variables are enumerated in Gray-code order and must not exceed `cap`.
    pub fn cube_max_abs_with_cap(&self, cap: usize) -> Result<CubeMax> {
        let s = self.block_size;
        let free = s - 1;
        let enumerated = (self.k - 1) * free;
        if enumerated > cap {
            return Err(Error::CapExceeded {
                what: "enumerated cube variables",
                needed: enumerated,
                cap,
            });
        }
        let dense_len = s
            .checked_pow(self.k as u32)
            .filter(|&len| len <= 1 << 26)
            .ok_or(Error::CapExceeded {
                what: "dense coefficient tensor",
                needed: usize::MAX,
                cap: 1 << 26,
            })?;
        debug_assert_eq!(dense_len, s.pow(self.k as u32));

        let mut scan = CubeScan {
            s,
            best: f64::NEG_INFINITY,
            best_witness: Vec::new(),
            stack: vec![vec![1i8; s]; self.k],
        };
        scan.descend(self.k - 1, &self.dense());
        Ok(CubeMax {
            value: scan.best,
            witness: scan.best_witness,
        })
    }

    /// The `(block_size) × (block_size)` matrix of a degree-2 form.
    pub fn coefficient_matrix(&self) -> Result<CoefficientMatrix> {
        if self.k != 2 {
            return Err(Error::InvalidInput(format!(
                "coefficient matrix needs k = 2, form has k = {}",
                self.k
            )));
        }
        let mut m = DMatrix::zeros(self.block_size, self.block_size);
        for (idx, &c) in &self.coeffs {
            m[(idx[0], idx[1])] += c;
        }
        CoefficientMatrix::new(m)
    }

    /// Degree-2 form of a square matrix; zero entries are not stored.
    pub fn from_matrix(a: &CoefficientMatrix) -> Result<Self> {
        check_dim("square coefficient matrix", a.rows(), a.cols())?;
        let coeffs = (0..a.rows())
            .flat_map(|i| (0..a.cols()).map(move |j| (i, j)))
            .filter(|&(i, j)| a.get(i, j) != 0.0)
            .map(|(i, j)| (vec![i, j], a.get(i, j)));
        Self::from_coeffs(2, a.rows(), coeffs)
    }
}

struct CubeScan {
    s: usize,
    best: f64,
    best_witness: Vec<Vec<i8>>,
    /// Current assignment per block.
    stack: Vec<Vec<i8>>,
}

impl CubeScan {
    const REFRESH: usize = 1024;

    /// `tensor` has `s^(level+1)` entries; contracts block `level` over all its sign patterns.
    fn descend(&mut self, level: usize, tensor: &[f64]) {
        let s = self.s;
        if level == 0 {
            let value: f64 = tensor.iter().map(|c| c.abs()).sum();
            if value > self.best {
                self.best = value;
                self.stack[0] = tensor
                    .iter()
                    .map(|&c| if c < 0.0 { -1 } else { 1 })
                    .collect();
                self.best_witness = self.stack.clone();
            }
            return;
        }
        let outer = tensor.len() / s;
        let mut z = vec![1i8; s];
        let mut contracted = vec![0.0; outer];
        let contract = |z: &[i8], out: &mut [f64]| {
            for (t, slot) in out.iter_mut().enumerate() {
                *slot = tensor[t * s..(t + 1) * s]
                    .iter()
                    .zip(z)
                    .map(|(&c, &zi)| c * f64::from(zi))
                    .sum();
            }
        };
        contract(&z, &mut contracted);
        let patterns = 1usize << (s - 1);
        for g in 0..patterns {
            if g > 0 {
                let var = 1 + g.trailing_zeros() as usize;
                let old = f64::from(z[var]);
                z[var] = -z[var];
                if g % Self::REFRESH == 0 {
                    contract(&z, &mut contracted);
                } else {
                    for (t, slot) in contracted.iter_mut().enumerate() {
                        *slot -= 2.0 * old * tensor[t * s + var];
                    }
                }
            }
            self.stack[level].copy_from_slice(&z);
            self.descend(level - 1, &contracted);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn parity2_poly() -> MultilinearPolynomial {
        MultilinearPolynomial::from_terms(2, [(vec![], 0.5), (vec![0, 1], -0.5)]).unwrap()
    }

    fn parity2_form() -> BlockMultilinearForm {
        BlockMultilinearForm::from_coeffs(2, 3, [(vec![0, 0], 0.5), (vec![1, 2], -0.5)]).unwrap()
    }

    fn parity2_fn() -> PartialBooleanFunction {
        PartialBooleanFunction::from_truth_table(2, &[0, 1, 1, 0]).unwrap()
    }

    #[test]
    fn eval_multilinear_examples() {
        let xy = MultilinearPolynomial::from_terms(2, [(vec![0, 1], 1.0)]).unwrap();
        assert_eq!(xy.eval(&[1.0, -1.0]).unwrap(), -1.0);
        assert_eq!(parity2_poly().eval(&[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(parity2_poly().eval(&[1.0, -1.0]).unwrap(), 1.0);
        assert!(matches!(
            xy.eval(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn polynomial_rejects_malformed_terms() {
        assert!(MultilinearPolynomial::from_terms(2, [(vec![0, 0], 1.0)]).is_err());
        assert!(MultilinearPolynomial::from_terms(2, [(vec![2], 1.0)]).is_err());
        assert!(
            MultilinearPolynomial::from_terms(2, [(vec![0, 1], 1.0), (vec![1, 0], 2.0)]).is_err()
        );
    }

    #[test]
    fn degree_ignores_zero_coefficients() {
        let p = MultilinearPolynomial::from_terms(3, [(vec![0, 1, 2], 0.0), (vec![1], 2.0)]).unwrap();
        assert_eq!(p.degree(), 1);
        assert_eq!(MultilinearPolynomial::zero(3).degree(), 0);
    }

    #[test]
    fn eval_block_form_examples() {
        let dummy = BlockMultilinearForm::from_coeffs(2, 3, [(vec![0, 0], 1.0)]).unwrap();
        let ones = vec![vec![1.0, 1.0, 1.0]; 2];
        assert_eq!(dummy.eval(&ones).unwrap(), 1.0);
        assert_eq!(parity2_form().eval(&ones).unwrap(), 0.0);
        // z¹₁·z²₂ = 1·1 here, so the value is ½ - ½.
        let z = [vec![1.0, 1.0, -1.0], vec![1.0, -1.0, 1.0]];
        assert_eq!(parity2_form().eval(&z).unwrap(), 0.0);
        let z = [vec![1.0, 1.0, -1.0], vec![1.0, 1.0, -1.0]];
        assert_eq!(parity2_form().eval(&z).unwrap(), 1.0);
        assert!(parity2_form().eval(&[vec![1.0, 1.0, 1.0]]).is_err());
        assert!(parity2_form().eval(&[vec![1.0; 3], vec![1.0; 2]]).is_err());
    }

    #[test]
    fn diagonal_restriction_examples() {
        assert_eq!(parity2_form().diagonal_restriction(&[-1, -1]).unwrap(), 0.0);
        assert_eq!(parity2_form().diagonal_restriction(&[1, -1]).unwrap(), 1.0);
        let explicit = parity2_form()
            .eval(&[vec![1.0, 1.0, -1.0], vec![1.0, 1.0, -1.0]])
            .unwrap();
        assert_eq!(parity2_form().diagonal_restriction(&[1, -1]).unwrap(), explicit);
        assert!(parity2_form().diagonal_restriction(&[1]).is_err());
    }

    #[test]
    fn block_form_validates_indices() {
        assert!(BlockMultilinearForm::new(0, 3).is_err());
        assert!(BlockMultilinearForm::from_coeffs(2, 3, [(vec![0, 3], 1.0)]).is_err());
        assert!(BlockMultilinearForm::from_coeffs(2, 3, [(vec![0], 1.0)]).is_err());
    }

    /// Enumerates every ±1 assignment to every variable of every block.
    fn brute_cube_max(form: &BlockMultilinearForm) -> f64 {
        let total = form.k() * form.block_size();
        (0..1usize << total)
            .map(|mask| {
                let flat = point_from_mask(total, mask);
                let blocks: Vec<Vec<f64>> = flat
                    .chunks(form.block_size())
                    .map(|c| c.iter().map(|&v| f64::from(v)).collect())
                    .collect();
                form.eval(&blocks).unwrap().abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn cube_max_examples() {
        let m = parity2_form().cube_max_abs().unwrap();
        assert_eq!(m.value, 1.0);
        assert_eq!(brute_cube_max(&parity2_form()), 1.0);
        let blocks: Vec<Vec<f64>> = m
            .witness
            .iter()
            .map(|b| b.iter().map(|&v| f64::from(v)).collect())
            .collect();
        assert_eq!(parity2_form().eval(&blocks).unwrap().abs(), 1.0);

        let single = BlockMultilinearForm::from_coeffs(3, 2, [(vec![1, 0, 1], -0.7)]).unwrap();
        assert_eq!(single.cube_max_abs().unwrap().value, 0.7);
    }

    #[test]
    fn cube_max_matches_brute_force_on_random_forms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let k = rng.gen_range(1..=3);
            let s = rng.gen_range(2..=4);
            let mut form = BlockMultilinearForm::new(k, s).unwrap();
            for _ in 0..6 {
                let idx = (0..k).map(|_| rng.gen_range(0..s)).collect();
                form.add_term(idx, rng.gen_range(-1.0..1.0)).unwrap();
            }
            assert_abs_diff_eq!(
                form.cube_max_abs().unwrap().value,
                brute_cube_max(&form),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn cube_max_reports_cap() {
        let form = BlockMultilinearForm::new(3, 14).unwrap();
        assert!(matches!(
            form.cube_max_abs(),
            Err(Error::CapExceeded { needed: 26, .. })
        ));
    }

    #[test]
    fn fourier_expand_examples() {
        let parity = fourier_expand_function(&parity2_fn()).unwrap();
        assert_eq!(parity, parity2_poly());

        let one = fourier_expand(2, &[1.0; 4]).unwrap();
        assert_eq!(one.terms().collect::<Vec<_>>(), vec![(&[][..], 1.0)]);

        // (1 + x1)/2 as a 0/1 table: x1 = +1 on even masks.
        let dictator = fourier_expand(2, &[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(dictator.coefficient(&[]), 0.5);
        assert_eq!(dictator.coefficient(&[0]), 0.5);
        assert_eq!(dictator.terms().count(), 2);

        assert!(fourier_expand(2, &[1.0; 3]).is_err());
    }

    #[test]
    fn partial_function_validation() {
        assert!(PartialBooleanFunction::new(2, vec![]).is_err());
        assert!(PartialBooleanFunction::new(2, vec![(vec![1, 1], 2)]).is_err());
        assert!(PartialBooleanFunction::new(2, vec![(vec![1, 0], 1)]).is_err());
        assert!(PartialBooleanFunction::new(2, vec![(vec![1, 1], 1), (vec![1, 1], 0)]).is_err());
        assert!(PartialBooleanFunction::new(2, vec![(vec![1], 1)]).is_err());
        assert!(parity2_fn().is_total());
        assert_eq!(parity2_fn().value(&[1, -1]), Some(1));
    }

    #[test]
    fn check_approximates_examples() {
        let f = parity2_fn();
        let exact = parity2_poly();
        let r = check_approximates(|x| exact.eval_signs(x).unwrap(), &f, 0.0);
        assert_eq!(r.max_error, 0.0);
        assert!(r.pass);

        let half = check_approximates(|_| 0.5, &f, 0.49);
        assert_eq!(half.max_error, 0.5);
        assert!(!half.pass);

        let shrunk = check_approximates(|x| 0.9 * exact.eval_signs(x).unwrap() + 0.05, &f, 0.05);
        assert_abs_diff_eq!(shrunk.max_error, 0.05, epsilon = 1e-15);
        assert!(shrunk.pass);
    }

    #[test]
    fn coefficient_matrix_examples() {
        let a = parity2_form().coefficient_matrix().unwrap();
        assert_eq!((a.rows(), a.cols()), (3, 3));
        assert_eq!(a.get(0, 0), 0.5);
        assert_eq!(a.get(1, 2), -0.5);
        assert_eq!(a.as_matrix().iter().filter(|&&v| v != 0.0).count(), 2);
        assert_eq!(BlockMultilinearForm::from_matrix(&a).unwrap(), parity2_form());

        let three = BlockMultilinearForm::new(3, 2).unwrap();
        assert!(three.coefficient_matrix().is_err());
    }

    #[test]
    fn coefficient_matrix_agrees_with_form_on_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut form = BlockMultilinearForm::new(2, 5).unwrap();
        for _ in 0..8 {
            form.add_term(vec![rng.gen_range(0..5), rng.gen_range(0..5)], rng.gen_range(-1.0..1.0))
                .unwrap();
        }
        let a = form.coefficient_matrix().unwrap();
        for _ in 0..100 {
            let x: Vec<f64> = (0..5).map(|_| if rng.gen() { 1.0 } else { -1.0 }).collect();
            let y: Vec<f64> = (0..5).map(|_| if rng.gen() { 1.0 } else { -1.0 }).collect();
            assert_abs_diff_eq!(
                form.eval(&[x.clone(), y.clone()]).unwrap(),
                a.bilinear(&x, &y).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn cube_values_match_direct_evaluation() {
        let p = MultilinearPolynomial::from_terms(
            3,
            [(vec![], 0.1), (vec![0], 0.2), (vec![1, 2], -0.3), (vec![0, 1, 2], 0.4)],
        )
        .unwrap();
        let values = p.cube_values().unwrap();
        for (mask, v) in values.iter().enumerate() {
            let x = point_from_mask(3, mask);
            assert_abs_diff_eq!(*v, p.eval_signs(&x).unwrap(), epsilon = 1e-15);
        }
    }
}
