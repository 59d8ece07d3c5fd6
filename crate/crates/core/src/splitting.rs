//! Row and column splitting.
//!
//! Splitting row `i` into `k_i` copies of `a_{i·}/k_i` (and column `j` into
//! `l_j` copies) leaves the ∞→1 norm unchanged, while `Γ` of the split matrix
//! becomes `‖D_ŵ⁻¹ A D_v̂⁻¹‖·‖ŵ‖·‖v̂‖` with `ŵ_i = √k_i`, `v̂_j = √l_j`. Choosing the
//! multiplicities from near-optimal weights therefore drives `Γ(A')/‖A'‖_{∞→1}`
//! down to the Grothendieck ratio of `A`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::norms::{
    self, fa_value, inf_to_one_norm, inf_to_one_norm_with, minimize_fa, strip_zeros, FaConfig,
    InfToOneMode, WeightPair,
};
use crate::poly::CoefficientMatrix;

/// `D_w⁻¹ A D_v⁻¹`.
pub fn scaled_matrix(a: &CoefficientMatrix, w: &[f64], v: &[f64]) -> Result<CoefficientMatrix> {
    CoefficientMatrix::new(norms::scale_by_weights(a.as_matrix(), w, v)?)
}

/// Integer multiplicities realizing a weight pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitPlan {
    pub row_mult: Vec<usize>,
    pub col_mult: Vec<usize>,
    pub w_target: Vec<f64>,
    pub v_target: Vec<f64>,
    /// Common denominator used for the squared-weight ratios.
    pub denominator: usize,
    pub denominator_cap: usize,
}

impl SplitPlan {
    /// Every multiplicity 1.
    pub fn trivial(rows: usize, cols: usize) -> Self {
        Self {
            row_mult: vec![1; rows],
            col_mult: vec![1; cols],
            w_target: vec![1.0; rows],
            v_target: vec![1.0; cols],
            denominator: 1,
            denominator_cap: 1,
        }
    }

    /// Plan with the given multiplicities; targets are the realized weights.
    pub fn from_multiplicities(row_mult: Vec<usize>, col_mult: Vec<usize>) -> Result<Self> {
        if row_mult.iter().chain(&col_mult).any(|&k| k == 0) {
            return Err(Error::InvalidInput("multiplicities must be >= 1".into()));
        }
        let sqrt = |m: &[usize]| m.iter().map(|&k| (k as f64).sqrt()).collect::<Vec<_>>();
        Ok(Self {
            w_target: sqrt(&row_mult),
            v_target: sqrt(&col_mult),
            row_mult,
            col_mult,
            denominator: 1,
            denominator_cap: 1,
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.row_mult.iter().chain(&self.col_mult).all(|&k| k == 1)
    }

    /// `(√k_i, √l_j)`.
    pub fn realized_weights(&self) -> (Vec<f64>, Vec<f64>) {
        let sqrt = |m: &[usize]| m.iter().map(|&k| (k as f64).sqrt()).collect();
        (sqrt(&self.row_mult), sqrt(&self.col_mult))
    }

    pub fn split_rows(&self) -> usize {
        self.row_mult.iter().fold(0, |acc, &k| acc.saturating_add(k))
    }

    pub fn split_cols(&self) -> usize {
        self.col_mult.iter().fold(0, |acc, &k| acc.saturating_add(k))
    }
}

fn multiplicities(weights: &[f64], denominator: usize) -> Vec<usize> {
    let min_sq = weights.iter().map(|w| w * w).fold(f64::INFINITY, f64::min);
    weights
        .iter()
        .map(|w| ((w * w / min_sq * denominator as f64).round() as usize).max(1))
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct SizeLimits {
    budget: usize,
    max_lifted: usize,
}

impl SizeLimits {
    const NONE: Self = Self {
        budget: usize::MAX,
        max_lifted: usize::MAX,
    };

    /// `(needed, limit)` of the first limit the plan breaks.
    fn violation(&self, plan: &SplitPlan) -> Option<(usize, usize)> {
        let (rows, cols) = (plan.split_rows(), plan.split_cols());
        let size = rows.saturating_mul(cols);
        if size > self.budget {
            Some((size, self.budget))
        } else if rows.saturating_add(cols) > self.max_lifted {
            Some((rows.saturating_add(cols), self.max_lifted))
        } else {
            None
        }
    }
}

fn validate_weights(a: &CoefficientMatrix, w: &[f64], v: &[f64]) -> Result<()> {
    check_dim("row weights", a.rows(), w.len())?;
    check_dim("column weights", a.cols(), v.len())?;
    if w.iter().chain(v).any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::NonPositiveWeight);
    }
    Ok(())
}

struct Scan {
    /// First plan within `1 + tolerance` of the target.
    accepted: Option<(SplitPlan, f64)>,
    /// Plan with the smallest realized ratio.
    best: Option<(SplitPlan, f64)>,
    /// First limit violation seen, as `(needed, limit)`.
    skipped: Option<(usize, usize)>,
}

/// Scans denominators `1..=cap`, skipping plans that exceed the size limits.
/// Ratios are realized `F_A` over `F_A(w, v)`.
fn rationalize_scan(
    a: &CoefficientMatrix,
    w: &[f64],
    v: &[f64],
    cap: usize,
    tolerance: f64,
    limits: SizeLimits,
) -> Result<Scan> {
    validate_weights(a, w, v)?;
    let target = fa_value(a, w, v)?;
    let mut scan = Scan {
        accepted: None,
        best: None,
        skipped: None,
    };
    for denominator in 1..=cap.max(1) {
        let plan = SplitPlan {
            row_mult: multiplicities(w, denominator),
            col_mult: multiplicities(v, denominator),
            w_target: w.to_vec(),
            v_target: v.to_vec(),
            denominator,
            denominator_cap: cap,
        };
        if let Some(violation) = limits.violation(&plan) {
            scan.skipped.get_or_insert(violation);
            continue;
        }
        let (rw, rv) = plan.realized_weights();
        let ratio = fa_value(a, &rw, &rv)? / target;
        if ratio <= 1.0 + tolerance {
            scan.accepted = Some((plan, ratio));
            return Ok(scan);
        }
        if scan.best.as_ref().is_none_or(|(_, r)| ratio < *r) {
            scan.best = Some((plan, ratio));
        }
    }
    Ok(scan)
}

/// Starting from all multiplicities 1, repeatedly increments the row or column
/// multiplicity that lowers the realized `F_A` most, while the plan fits.
fn greedy_plan(a: &CoefficientMatrix, limits: SizeLimits, max_steps: usize) -> Result<(SplitPlan, f64)> {
    let mut plan = SplitPlan::trivial(a.rows(), a.cols());
    let value = |p: &SplitPlan| -> Result<f64> {
        let (w, v) = p.realized_weights();
        fa_value(a, &w, &v)
    };
    let mut current = value(&plan)?;
    for _ in 0..max_steps {
        let mut best: Option<(SplitPlan, f64)> = None;
        for line in 0..a.rows() + a.cols() {
            let mut candidate = plan.clone();
            if line < a.rows() {
                candidate.row_mult[line] += 1;
            } else {
                candidate.col_mult[line - a.rows()] += 1;
            }
            if limits.violation(&candidate).is_some() {
                continue;
            }
            let v = value(&candidate)?;
            if v < best.as_ref().map_or(current * (1.0 - 1e-12), |(_, b)| *b) {
                best = Some((candidate, v));
            }
        }
        match best {
            Some((next, v)) => {
                plan = next;
                current = v;
            }
            None => break,
        }
    }
    let (w, v) = plan.realized_weights();
    plan.w_target = w;
    plan.v_target = v;
    Ok((plan, current))
}

/// Integer multiplicities whose square roots are proportional to `(w, v)` up to
/// a common denominator `D ≤ cap`, accepted once the realized `F_A` is within
/// a factor `1 + tolerance` of `F_A(w, v)`.
pub fn rationalize_weights(
    a: &CoefficientMatrix,
    w: &[f64],
    v: &[f64],
    cap: usize,
    tolerance: f64,
) -> Result<SplitPlan> {
    let scan = rationalize_scan(a, w, v, cap, tolerance, SizeLimits::NONE)?;
    match (scan.accepted, scan.best) {
        (Some((plan, _)), _) => Ok(plan),
        (None, best) => Err(Error::ToleranceNotMet {
            achieved: best.map_or(f64::INFINITY, |(_, r)| r - 1.0),
            tolerance,
        }),
    }
}

/// A split matrix and the original row/column of each of its rows/columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitMatrix {
    pub matrix: CoefficientMatrix,
    pub origin_row: Vec<usize>,
    pub origin_col: Vec<usize>,
}

impl SplitMatrix {
    /// Copies each coordinate of `x` and `y` to all of its split copies.
    pub fn lift(&self, x: &[i8], y: &[i8]) -> (Vec<i8>, Vec<i8>) {
        (
            self.origin_row.iter().map(|&i| x[i]).collect(),
            self.origin_col.iter().map(|&j| y[j]).collect(),
        )
    }
}

fn origins(mult: &[usize]) -> Vec<usize> {
    mult.iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat_n(i, k))
        .collect()
}

/// Replaces row `i` by `k_i` copies of `a_{i·}/k_i` and column `j` by `l_j`
/// copies of `a_{·j}/l_j`; copies stay adjacent.
pub fn apply_split(a: &CoefficientMatrix, plan: &SplitPlan) -> Result<SplitMatrix> {
    check_dim("row multiplicities", a.rows(), plan.row_mult.len())?;
    check_dim("column multiplicities", a.cols(), plan.col_mult.len())?;
    if plan.row_mult.iter().chain(&plan.col_mult).any(|&k| k == 0) {
        return Err(Error::InvalidInput("multiplicities must be >= 1".into()));
    }
    let origin_row = origins(&plan.row_mult);
    let origin_col = origins(&plan.col_mult);
    let m = a.as_matrix();
    let matrix = DMatrix::from_fn(origin_row.len(), origin_col.len(), |r, c| {
        let (i, j) = (origin_row[r], origin_col[c]);
        m[(i, j)] / (plan.row_mult[i] * plan.col_mult[j]) as f64
    });
    Ok(SplitMatrix {
        matrix: CoefficientMatrix::new(matrix)?,
        origin_row,
        origin_col,
    })
}

/// Replicates `x` and `y` according to the plan so that `x'ᵀA'y' = xᵀAy`.
pub fn lift_assignment(x: &[i8], y: &[i8], plan: &SplitPlan) -> Result<(Vec<i8>, Vec<i8>)> {
    check_dim("row assignment", plan.row_mult.len(), x.len())?;
    check_dim("column assignment", plan.col_mult.len(), y.len())?;
    Ok((
        origins(&plan.row_mult).into_iter().map(|i| x[i]).collect(),
        origins(&plan.col_mult).into_iter().map(|j| y[j]).collect(),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitConfig {
    /// Allowed slack above the Grothendieck upper bound.
    pub delta: f64,
    pub denominator_cap: usize,
    /// Accepted relative loss of `F_A` from rounding the weights.
    pub tolerance: f64,
    /// Maximum `n'·m'` of the split matrix.
    pub budget: usize,
    /// Maximum `n' + m'` of the split matrix.
    pub max_lifted: usize,
    pub fa: FaConfig,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            delta: 0.05,
            denominator_cap: 64,
            tolerance: 1e-3,
            budget: 4096,
            max_lifted: usize::MAX,
            fa: FaConfig::default(),
        }
    }
}

/// Increments tried by the greedy fallback when no rounding of the optimal
/// weights fits the size limits.
const GREEDY_STEPS: usize = 256;

/// Outcome of [`reduce_ratio`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub split: SplitMatrix,
    pub plan: SplitPlan,
    /// `Γ(A')`, the scale handed to the one-query algorithm.
    pub c: f64,
    pub inf_to_one: f64,
    pub inf_to_one_exact: bool,
    /// `c / ‖A‖_{∞→1}`.
    pub ratio: f64,
    pub target: f64,
    /// `Γ` of the stripped matrix before splitting.
    pub unsplit_gamma: f64,
    pub weights: WeightPair,
    /// Original row/column of each split row/column (zero lines removed).
    pub origin_rows: Vec<usize>,
    pub origin_cols: Vec<usize>,
}

/// Strips zero lines, minimizes `F_A`, rounds the weights to multiplicities and
/// splits. If no near-optimal rounding fits the size limits, the best fitting
/// rounding and a greedy plan compete with the unsplit matrix. Fails unless
/// `Γ(A')/‖A‖_{∞→1} ≤ K_upper + δ`.
pub fn reduce_ratio(a: &CoefficientMatrix, config: &SplitConfig) -> Result<Reduction> {
    if !(config.delta > 0.0) {
        return Err(Error::InvalidInput("delta must be positive".into()));
    }
    let stripped = strip_zeros(a)?;
    let inner = &stripped.matrix;
    let inf = match inf_to_one_norm(inner) {
        Ok(v) => v,
        Err(Error::CapExceeded { .. }) => inf_to_one_norm_with(
            inner,
            InfToOneMode::Heuristic {
                restarts: 256,
                seed: config.fa.seed,
            },
        )?,
        Err(e) => return Err(e),
    };
    let fa_config = FaConfig {
        witness: Some((inf.x.clone(), inf.y.clone())),
        ..config.fa.clone()
    };
    let weights = minimize_fa(inner, &fa_config)?;
    let unsplit_gamma = norms::gamma(inner);

    // Prefer a near-optimal rounding; otherwise the best one that fits the limits.
    let limits = SizeLimits {
        budget: config.budget,
        max_lifted: config.max_lifted,
    };
    let scan = rationalize_scan(
        inner,
        &weights.w,
        &weights.v,
        config.denominator_cap,
        config.tolerance,
        limits,
    )?;
    let mut plan = SplitPlan::trivial(inner.rows(), inner.cols());
    if let Some((needed, budget)) = limits.violation(&plan) {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut split = apply_split(inner, &plan)?;
    let mut c = unsplit_gamma;
    let mut candidates: Vec<SplitPlan> = Vec::new();
    match (scan.accepted, scan.best) {
        (Some((accepted, _)), _) => candidates.push(accepted),
        (None, best) => {
            candidates.extend(best.map(|(p, _)| p));
            candidates.push(greedy_plan(inner, limits, GREEDY_STEPS)?.0);
        }
    }
    for candidate in candidates {
        let candidate_split = apply_split(inner, &candidate)?;
        let candidate_c = norms::gamma(&candidate_split.matrix);
        if candidate_c < c {
            plan = candidate;
            split = candidate_split;
            c = candidate_c;
        }
    }

    let target = norms::k_upper() + config.delta;
    let ratio = c / inf.value;
    if ratio > target {
        return Err(match scan.skipped {
            Some((needed, budget)) => Error::BudgetExceeded { needed, budget },
            None => Error::RatioNotMet { ratio, target },
        });
    }
    let origin_rows = split.origin_row.iter().map(|&i| stripped.row_map[i]).collect();
    let origin_cols = split.origin_col.iter().map(|&j| stripped.col_map[j]).collect();
    Ok(Reduction {
        split,
        plan,
        c,
        inf_to_one: inf.value,
        inf_to_one_exact: inf.exact,
        ratio,
        target,
        unsplit_gamma,
        weights,
        origin_rows,
        origin_cols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::SQRT_2;

    fn mat(rows: &[&[f64]]) -> CoefficientMatrix {
        CoefficientMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn chsh() -> CoefficientMatrix {
        mat(&[&[1.0, 1.0], &[1.0, -1.0]])
    }

    #[test]
    fn scaled_matrix_examples() {
        assert_eq!(scaled_matrix(&chsh(), &[1.0, 1.0], &[1.0, 1.0]).unwrap(), chsh());
        let h = 1.0 / SQRT_2;
        let s = scaled_matrix(&chsh(), &[h, h], &[h, h]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(s.get(i, j), 2.0 * chsh().get(i, j), epsilon = 1e-15);
            }
        }
        assert_eq!(scaled_matrix(&mat(&[&[3.0]]), &[2.0], &[3.0]).unwrap(), mat(&[&[0.5]]));
        assert_eq!(
            scaled_matrix(&chsh(), &[1.0, -1.0], &[1.0, 1.0]),
            Err(Error::NonPositiveWeight)
        );
    }

    #[test]
    fn rationalize_examples() {
        let a = mat(&[&[1.0, 2.0], &[3.0, -1.0]]);
        let plan = rationalize_weights(&a, &[1.0, 1.0], &[1.0, 1.0], 64, 1e-12).unwrap();
        assert_eq!((plan.row_mult, plan.col_mult), (vec![1, 1], vec![1, 1]));

        let plan = rationalize_weights(&a, &[1.0, SQRT_2], &[1.0, 1.0], 64, 1e-12).unwrap();
        assert_eq!(plan.row_mult, vec![1, 2]);

        let plan = rationalize_weights(&a, &[1.0, 1.5f64.sqrt()], &[1.0, 1.0], 64, 1e-12).unwrap();
        assert_eq!(plan.row_mult, vec![2, 3]);
        assert_eq!(plan.col_mult, vec![2, 2]);
        assert_eq!(plan.denominator, 2);
    }

    #[test]
    fn rationalize_reports_unreachable_tolerance() {
        let a = mat(&[&[1.0, 2.0], &[3.0, -1.0]]);
        let err = rationalize_weights(&a, &[1.0, 1.01f64.sqrt()], &[1.0, 1.0], 3, 1e-15).unwrap_err();
        assert!(matches!(err, Error::ToleranceNotMet { .. }));
    }

    #[test]
    fn apply_split_examples() {
        let plan = SplitPlan::from_multiplicities(vec![2, 1], vec![1, 1]).unwrap();
        let s = apply_split(&chsh(), &plan).unwrap();
        assert_eq!(s.matrix, mat(&[&[0.5, 0.5], &[0.5, 0.5], &[1.0, -1.0]]));
        assert_eq!(s.origin_row, vec![0, 0, 1]);

        let same = apply_split(&chsh(), &SplitPlan::trivial(2, 2)).unwrap();
        assert_eq!(same.matrix, chsh());

        for n in 1..=4 {
            let plan = SplitPlan::from_multiplicities(vec![n; 2], vec![n; 2]).unwrap();
            let s = apply_split(&chsh(), &plan).unwrap();
            assert_abs_diff_eq!(norms::gamma(&s.matrix), 2.0 * SQRT_2, epsilon = 1e-12);
        }
        assert!(apply_split(&chsh(), &SplitPlan::trivial(3, 2)).is_err());
    }

    #[test]
    fn lift_examples() {
        let plan = SplitPlan::trivial(2, 2);
        assert_eq!(lift_assignment(&[1, -1], &[-1, 1], &plan).unwrap(), (vec![1, -1], vec![-1, 1]));

        let plan = SplitPlan::from_multiplicities(vec![2, 1], vec![1, 1]).unwrap();
        let s = apply_split(&chsh(), &plan).unwrap();
        let x = [1i8, -1];
        for y in [[1i8, 1], [1, -1], [-1, 1], [-1, -1]] {
            let (xl, yl) = lift_assignment(&x, &y, &plan).unwrap();
            assert_eq!(xl, vec![1, 1, -1]);
            assert_eq!((xl.clone(), yl.clone()), s.lift(&x, &y));
            assert_eq!(
                s.matrix.bilinear_signs(&xl, &yl).unwrap(),
                chsh().bilinear_signs(&x, &y).unwrap()
            );
        }
        assert!(lift_assignment(&[1], &[1, 1], &plan).is_err());
    }

    #[test]
    fn reduce_ratio_examples() {
        let parity = mat(&[&[0.5, 0.0], &[0.0, -0.5]]);
        let r = reduce_ratio(&parity, &SplitConfig::default()).unwrap();
        assert!(r.plan.is_trivial());
        assert_abs_diff_eq!(r.c, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.ratio, 1.0, epsilon = 1e-12);

        let r = reduce_ratio(&chsh(), &SplitConfig::default()).unwrap();
        assert!(r.plan.is_trivial());
        assert_abs_diff_eq!(r.c, 2.0 * SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(r.ratio, SQRT_2, epsilon = 1e-12);

        assert_eq!(
            reduce_ratio(&CoefficientMatrix::zeros(2, 2).unwrap(), &SplitConfig::default()).unwrap_err(),
            Error::ZeroMatrix
        );
    }

    #[test]
    fn reduce_ratio_maps_back_through_stripped_lines() {
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 0)] = 0.5;
        m[(1, 2)] = -0.5;
        let r = reduce_ratio(&CoefficientMatrix::new(m).unwrap(), &SplitConfig::default()).unwrap();
        assert_eq!(r.origin_rows, vec![0, 1]);
        assert_eq!(r.origin_cols, vec![0, 2]);
    }

    #[test]
    fn reduce_ratio_respects_lifted_limit() {
        let a = mat(&[&[1.0, 1.0], &[4.0, 4.0]]);
        let free = reduce_ratio(&a, &SplitConfig::default()).unwrap();
        let config = SplitConfig {
            max_lifted: 6,
            ..SplitConfig::default()
        };
        let r = reduce_ratio(&a, &config).unwrap();
        assert!(r.split.origin_row.len() + r.split.origin_col.len() <= 6);
        assert!(r.c >= free.c - 1e-12);
        assert!(r.c < r.unsplit_gamma);

        let tight = SplitConfig {
            max_lifted: 3,
            ..SplitConfig::default()
        };
        assert!(matches!(reduce_ratio(&a, &tight), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn reduce_ratio_splits_unbalanced_rank_one() {
        // Rows of very different size: uniform weights are far from optimal.
        let a = mat(&[&[1.0, 1.0], &[4.0, 4.0]]);
        let r = reduce_ratio(&a, &SplitConfig::default()).unwrap();
        assert!(!r.plan.is_trivial());
        assert!(r.c < r.unsplit_gamma);
        assert!(r.ratio <= r.target);
        assert_eq!(r.inf_to_one, 10.0);
    }
}
