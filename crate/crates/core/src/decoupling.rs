//! Decoupling of a degree-`d` multilinear polynomial into a `d`-block form.
//!
//! Each character `χ_T` is replaced by the average of `Π_{j∈B} z^{(j)}_{b(j)}
//! Π_{k∉B} z^{(k)}_0` over all placements of `T` into `|T|` distinct blocks, so
//! the form agrees with the polynomial on diagonal inputs `(x̃, …, x̃)` and its
//! cube maximum is at most `B(d) = (1/d!) Σ_s C(d,s) s^d` times the
//! polynomial's.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{check_dim, Error, Result};
use crate::poly::{BlockMultilinearForm, MultilinearPolynomial};

/// Largest decoupling degree materialized by [`decouple`].
pub const MAX_DECOUPLE_DEGREE: usize = 6;

/// Monomial count above which [`decouple`] logs a warning.
pub const TERM_WARNING_THRESHOLD: usize = 1_000_000;

/// Growth rate of `B(d)·√d`; equals `1/W(1/e)` for the Lambert W function.
pub const ALPHA: f64 = 3.591121477;

#[derive(Debug, Clone, PartialEq)]
pub struct DecouplingResult {
    pub form: BlockMultilinearForm,
    pub bound: f64,
    pub source_degree: usize,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Calls `visit` with every ordered tuple of `len` distinct elements of `0..d`.
fn for_each_injection(d: usize, len: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(d: usize, len: usize, used: &mut [bool], acc: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if acc.len() == len {
            visit(acc);
            return;
        }
        for j in 0..d {
            if !used[j] {
                used[j] = true;
                acc.push(j);
                rec(d, len, used, acc, visit);
                acc.pop();
                used[j] = false;
            }
        }
    }
    rec(d, len, &mut vec![false; d], &mut Vec::with_capacity(len), visit);
}

/// Builds the symmetric `d`-block form of `p`.
pub fn decouple(p: &MultilinearPolynomial, d: usize) -> Result<DecouplingResult> {
    let degree = p.degree();
    if d < degree.max(1) {
        return Err(Error::InvalidInput(format!(
            "decoupling degree {d} is below the polynomial degree {degree} (or zero)"
        )));
    }
    if d > MAX_DECOUPLE_DEGREE {
        return Err(Error::CapExceeded {
            what: "decoupling degree",
            needed: d,
            cap: MAX_DECOUPLE_DEGREE,
        });
    }
    let expected_terms: usize = p
        .terms()
        .filter(|(_, c)| *c != 0.0)
        .map(|(t, _)| (d - t.len() + 1..=d).product::<usize>())
        .sum();
    if expected_terms > TERM_WARNING_THRESHOLD {
        log::warn!("decoupling produces {expected_terms} monomials");
    }

    let mut form = BlockMultilinearForm::new(d, p.n() + 1)?;
    let d_fact = factorial(d);
    for (subset, coef) in p.terms() {
        if coef == 0.0 {
            continue;
        }
        let weight = coef * factorial(d - subset.len()) / d_fact;
        let mut insert_err = None;
        for_each_injection(d, subset.len(), &mut |blocks| {
            let mut idx = vec![0usize; d];
            for (&block, &var) in blocks.iter().zip(subset) {
                idx[block] = var + 1;
            }
            if let Err(e) = form.add_term(idx, weight) {
                insert_err.get_or_insert(e);
            }
        });
        if let Some(e) = insert_err {
            return Err(e);
        }
    }
    Ok(DecouplingResult {
        form,
        bound: bound_b(d)?,
        source_degree: degree,
    })
}

/// Degree-`d` homogenization `Σ_T p̂_T z_0^{d-|T|} Π_{i∈T} z_i`.
pub fn homogenize_eval(p: &MultilinearPolynomial, d: usize, z: &[f64]) -> Result<f64> {
    if d < p.degree() {
        return Err(Error::DegreeTooHigh {
            degree: p.degree(),
            max: d,
        });
    }
    check_dim("homogenization point", p.n() + 1, z.len())?;
    Ok(p
        .terms()
        .map(|(t, c)| {
            let z0 = z[0].powi((d - t.len()) as i32);
            c * z0 * t.iter().map(|&i| z[i + 1]).product::<f64>()
        })
        .sum())
}

/// Evaluates the decoupled form through the polarization identity,
/// `(1/d!) Σ_{∅≠S⊆[d]} (-1)^{d-|S|} |S|^d p̂(Σ_{j∈S} z^{(j)} / |S|)`,
/// without materializing any block coefficients.
pub fn polarization_eval<Z: AsRef<[f64]>>(
    p: &MultilinearPolynomial,
    d: usize,
    blocks: &[Z],
) -> Result<f64> {
    if d == 0 || d > 20 {
        return Err(Error::InvalidInput(format!(
            "polarization needs 1 <= d <= 20, got {d}"
        )));
    }
    check_dim("block count", d, blocks.len())?;
    let len = p.n() + 1;
    for b in blocks {
        check_dim("block length", len, b.as_ref().len())?;
    }
    let mut total = 0.0;
    let mut avg = vec![0.0; len];
    for subset in 1usize..1 << d {
        let size = subset.count_ones() as usize;
        avg.iter_mut().for_each(|v| *v = 0.0);
        for (j, block) in blocks.iter().enumerate() {
            if (subset >> j) & 1 == 1 {
                for (a, &zi) in avg.iter_mut().zip(block.as_ref()) {
                    *a += zi;
                }
            }
        }
        avg.iter_mut().for_each(|v| *v /= size as f64);
        let sign = if (d - size).is_multiple_of(2) { 1.0 } else { -1.0 };
        total += sign * (size as f64).powi(d as i32) * homogenize_eval(p, d, &avg)?;
    }
    Ok(total / factorial(d))
}

/// `B(d)` as an exact rational.
pub fn bound_b_exact(d: usize) -> Result<BigRational> {
    if !(1..=30).contains(&d) {
        return Err(Error::InvalidInput(format!("B(d) needs 1 <= d <= 30, got {d}")));
    }
    let mut numer = BigUint::zero();
    let mut binom = BigUint::one();
    for s in 1..=d {
        binom = binom * BigUint::from(d - s + 1) / BigUint::from(s);
        numer += &binom * BigUint::from(s).pow(d as u32);
    }
    let denom: BigUint = (1..=d).map(BigUint::from).product();
    Ok(BigRational::new(numer.into(), denom.into()))
}

pub fn bound_b(d: usize) -> Result<f64> {
    bound_b_exact(d)?
        .to_f64()
        .ok_or_else(|| Error::Numeric("B(d) not representable".into()))
}

/// `½·Π_j z^{(j)}_0 + P/(2·c_d)`. Bounded by 1 on the cube whenever `c_d` is
/// at least the cube maximum of `P`.
pub fn rescale_for_approx(form: &BlockMultilinearForm, c_d: f64) -> Result<BlockMultilinearForm> {
    if !(c_d > 0.0) || !c_d.is_finite() {
        return Err(Error::InvalidInput(format!("rescaling constant must be positive, got {c_d}")));
    }
    Ok(form.affine(0.5 / c_d, 0.5))
}

/// Approximation error of the rescaled form: `½ - (½ - ε)/c_d`.
pub fn rescaled_error(epsilon: f64, c_d: f64) -> f64 {
    0.5 - (0.5 - epsilon) / c_d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn poly(n: usize, terms: &[(&[usize], f64)]) -> MultilinearPolynomial {
        MultilinearPolynomial::from_terms(n, terms.iter().map(|(t, c)| (t.to_vec(), *c))).unwrap()
    }

    #[test]
    fn decouple_product_of_two() {
        let r = decouple(&poly(2, &[(&[0, 1], 1.0)]), 2).unwrap();
        assert_eq!(r.form.num_terms(), 2);
        assert_eq!(r.form.coefficient(&[1, 2]), 0.5);
        assert_eq!(r.form.coefficient(&[2, 1]), 0.5);
        assert_eq!(r.bound, 3.0);
        assert_eq!(r.source_degree, 2);
    }

    #[test]
    fn decouple_constant_and_linear() {
        let c = decouple(&poly(2, &[(&[], 0.3)]), 3).unwrap();
        assert_eq!(c.form.num_terms(), 1);
        assert_eq!(c.form.coefficient(&[0, 0, 0]), 0.3);

        let lin = decouple(&poly(2, &[(&[0], 1.0)]), 2).unwrap();
        assert_eq!(lin.form.num_terms(), 2);
        assert_eq!(lin.form.coefficient(&[1, 0]), 0.5);
        assert_eq!(lin.form.coefficient(&[0, 1]), 0.5);
    }

    #[test]
    fn decouple_errors() {
        let p = poly(3, &[(&[0, 1, 2], 1.0)]);
        assert!(decouple(&p, 2).is_err());
        assert!(matches!(decouple(&p, 7), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn diagonal_of_decoupled_parity() {
        let r = decouple(&poly(2, &[(&[0, 1], 1.0)]), 2).unwrap();
        assert_eq!(r.form.diagonal_restriction(&[1, 1]).unwrap(), 1.0);
        assert_eq!(r.form.diagonal_restriction(&[1, -1]).unwrap(), -1.0);
    }

    #[test]
    fn homogenize_examples() {
        let xy = poly(2, &[(&[0, 1], 1.0)]);
        assert_eq!(homogenize_eval(&xy, 2, &[2.0, 1.0, 1.0]).unwrap(), 1.0);
        let x1 = poly(2, &[(&[0], 1.0)]);
        assert_eq!(homogenize_eval(&x1, 2, &[3.0, 2.0, 5.0]).unwrap(), 6.0);
        let p = poly(2, &[(&[], 0.25), (&[0], -0.5), (&[0, 1], 0.75)]);
        let z = [1.0, 0.3, -0.7];
        assert_abs_diff_eq!(
            homogenize_eval(&p, 3, &z).unwrap(),
            p.eval(&z[1..]).unwrap(),
            epsilon = 1e-15
        );
        assert!(homogenize_eval(&p, 1, &z).is_err());
        assert!(homogenize_eval(&p, 2, &z[1..]).is_err());
    }

    #[test]
    fn polarization_examples() {
        let xy = poly(2, &[(&[0, 1], 1.0)]);
        let v = polarization_eval(&xy, 2, &[[1.0, 1.0, 1.0], [1.0, -1.0, 1.0]]).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);

        let x1 = poly(2, &[(&[0], 1.0)]);
        let v = polarization_eval(&x1, 2, &[[1.0, 1.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);

        let p = poly(2, &[(&[], 0.2), (&[1], 0.4), (&[0, 1], -0.3)]);
        let z = [0.4, -1.2, 0.9];
        let same = polarization_eval(&p, 3, &[z, z, z]).unwrap();
        assert_abs_diff_eq!(same, homogenize_eval(&p, 3, &z).unwrap(), epsilon = 1e-12);

        assert!(polarization_eval(&p, 2, &[z]).is_err());
    }

    #[test]
    fn bound_values() {
        assert_eq!(bound_b(1).unwrap(), 1.0);
        assert_eq!(bound_b(2).unwrap(), 3.0);
        assert_eq!(bound_b(3).unwrap(), 9.0);
        assert_eq!(
            bound_b_exact(4).unwrap(),
            BigRational::new(85.into(), 3.into())
        );
        assert!(bound_b(0).is_err());
        assert!(bound_b(31).is_err());
        assert!(bound_b(30).unwrap().is_finite());
    }

    #[test]
    fn rescale_examples() {
        let form = BlockMultilinearForm::from_coeffs(2, 2, [(vec![1, 1], 1.0)]).unwrap();
        let r = rescale_for_approx(&form, 1.0).unwrap();
        assert_eq!(r.coefficient(&[0, 0]), 0.5);
        assert_eq!(r.coefficient(&[1, 1]), 0.5);
        let m = r.cube_max_abs().unwrap().value;
        assert!(m <= 1.0);
        assert_eq!(rescaled_error(0.2, 1.0), 0.2);
        assert_abs_diff_eq!(rescaled_error(0.0, 3.0), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rescaled_error(0.1, 3.0), 0.5 - 0.4 / 3.0, epsilon = 1e-15);
        assert!(rescale_for_approx(&form, 0.0).is_err());
        assert!(rescale_for_approx(&form, -1.0).is_err());
    }
}
