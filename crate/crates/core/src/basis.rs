//! Monomial basis of the polynomial space with bounded algebraic degree `d`
//! (total degree) and harmonic degree `n` (number of leading coefficients
//! the polynomial may depend on).
//!
//! A monomial is identified by a dense exponent array `a` of length `n`; its
//! value at a coefficient vector `c` is `prod_k c[k]^a[k]`. The basis is
//! listed in graded lexicographic order: total degree ascending, and within a
//! grade, larger leading exponents first (`x1^2, x1 x2, x2^2`).

use crate::error::{Error, Result};

/// Hard cap on `binomial(n + d, n)`; dense factorization is cubic in it.
pub const MAX_BASIS_DIM: usize = 10_000;

/// Exponents of one monomial, position `k` holding the power of the `k`-th
/// coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// Total (algebraic) degree.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the last non-zero exponent plus one.
    pub fn support_len(&self) -> usize {
        self.0.iter().rposition(|&e| e != 0).map_or(0, |p| p + 1)
    }

    /// Componentwise sum, zero-padding the shorter index.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        let len = self.len().max(other.len());
        let at = |m: &MultiIndex, k: usize| m.0.get(k).copied().unwrap_or(0);
        MultiIndex((0..len).map(|k| at(self, k) + at(other, k)).collect())
    }
}

/// The ordered monomial basis of the polynomial space for a degree pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEnumeration {
    d: usize,
    n: usize,
    indices: Vec<MultiIndex>,
}

/// Name recorded in model files for the ordering produced by [`enumerate_basis`].
pub const ORDERING_NAME: &str = "graded-lex";

/// `binomial(n + d, n)` without overflow for any realistic input.
pub fn basis_dimension(d: usize, n: usize) -> u128 {
    let k = d.min(n) as u128;
    let total = (n + d) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (total - i) / (i + 1);
    }
    acc
}

/// Lists every monomial of total degree at most `d` in `n` variables.
pub fn enumerate_basis(d: i64, n: i64) -> Result<BasisEnumeration> {
    if d < 0 {
        return Err(Error::InvalidDegree { d, n, reason: "algebraic degree must be >= 0" });
    }
    if n < 1 {
        return Err(Error::InvalidDegree { d, n, reason: "harmonic degree must be >= 1" });
    }
    let (d, n) = (d as usize, n as usize);
    let dim = basis_dimension(d, n);
    if dim > MAX_BASIS_DIM as u128 {
        return Err(Error::DimensionCap { dim, cap: MAX_BASIS_DIM });
    }

    let mut indices = Vec::with_capacity(dim as usize);
    let mut scratch = vec![0u32; n];
    for grade in 0..=d as u32 {
        push_grade(&mut scratch, 0, grade, &mut indices);
    }
    debug_assert_eq!(indices.len() as u128, dim);
    Ok(BasisEnumeration { d, n, indices })
}

// Fills positions `pos..` with exponents summing to `remaining`, leading
// positions taking the largest exponent first.
fn push_grade(scratch: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == scratch.len() {
        scratch[pos] = remaining;
        out.push(MultiIndex(scratch.to_vec()));
        return;
    }
    for e in (0..=remaining).rev() {
        scratch[pos] = e;
        push_grade(scratch, pos + 1, remaining - e, out);
    }
    scratch[pos] = 0;
}

impl BasisEnumeration {
    pub fn algebraic_degree(&self) -> usize {
        self.d
    }

    pub fn harmonic_degree(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Number of monomials, `binomial(n + d, n)`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Evaluates the whole monomial vector at `coeffs` (first `n` entries used).
    pub fn eval(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(coeffs, &mut out)?;
        Ok(out)
    }

    /// Like [`eval`](Self::eval) but writes into a caller-provided buffer of
    /// length `self.len()`.
    pub fn eval_into(&self, coeffs: &[f64], out: &mut [f64]) -> Result<()> {
        if coeffs.len() < self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: coeffs.len() });
        }
        assert_eq!(out.len(), self.len(), "output buffer has the wrong length");
        // powers[k * (d + 1) + j] = coeffs[k]^j
        let stride = self.d + 1;
        let mut powers = vec![1.0; self.n * stride];
        for (k, &c) in coeffs[..self.n].iter().enumerate() {
            for j in 1..stride {
                powers[k * stride + j] = powers[k * stride + j - 1] * c;
            }
        }
        for (slot, index) in out.iter_mut().zip(&self.indices) {
            let mut value = 1.0;
            for (k, &e) in index.0.iter().enumerate() {
                if e != 0 {
                    value *= powers[k * stride + e as usize];
                }
            }
            *slot = value;
        }
        Ok(())
    }
}

/// Value of one monomial, `prod_k coeffs[k]^a[k]`. The empty product is 1.
///
/// Panics if `coeffs` is shorter than the support of `a`.
pub fn eval_monomial(coeffs: &[f64], a: &MultiIndex) -> f64 {
    assert!(coeffs.len() >= a.support_len(), "coefficient vector shorter than the monomial support");
    a.0.iter().zip(coeffs).filter(|(&e, _)| e != 0).map(|(&e, &c)| c.powi(e as i32)).product()
}

/// Monomial vector `v_{d,n}(c)` in the order of `basis`.
pub fn eval_monomial_vector(coeffs: &[f64], basis: &BasisEnumeration) -> Result<Vec<f64>> {
    basis.eval(coeffs)
}
