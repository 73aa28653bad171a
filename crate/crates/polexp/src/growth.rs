//! The growth type `(d, λ)` and its total order.
//!
//! A sequence has growth type `(d, λ)` when it lies between two positive
//! multiples of `n^d λ^n` (with an additive slack for degenerate cases).
//! Types are ordered by λ first, then by the polynomial degree d; two λ
//! values are considered equal when their defining integer polynomials
//! coincide or, failing that, when they agree within a relative tolerance.

use num_bigint::BigInt;
use std::cmp::Ordering;
use std::fmt;

use crate::LAMBDA_TOL_EXACT;

/// Exponential-polynomial growth type: `n^d λ^n`.
///
/// When λ was produced symbolically, `poly` carries the monic integer
/// polynomial it is a root of (ascending coefficients), which lets λ-equality
/// be decided exactly in the common cases.
#[derive(Debug, Clone)]
pub struct GrowthType {
    pub d: u32,
    pub lambda: f64,
    pub poly: Option<Vec<BigInt>>,
}

impl GrowthType {
    pub fn new(d: u32, lambda: f64) -> Self {
        GrowthType {
            d,
            lambda,
            poly: None,
        }
    }

    pub fn with_poly(d: u32, lambda: f64, poly: Vec<BigInt>) -> Self {
        GrowthType {
            d,
            lambda,
            poly: Some(poly),
        }
    }

    /// Bounded growth `(0, 1)`.
    pub fn bounded() -> Self {
        GrowthType::new(0, 1.0)
    }

    pub fn is_bounded(&self) -> bool {
        self.d == 0 && lambda_eq_tol(self.lambda, 1.0, LAMBDA_TOL_EXACT)
    }

    /// λ-equality at the given relative tolerance.
    ///
    /// Identical defining polynomials confirm equality at a much looser
    /// numeric bar (the two values are then the same algebraic root); numeric
    /// agreement within `tol` decides the rest.
    pub fn lambda_eq(&self, other: &GrowthType, tol: f64) -> bool {
        if lambda_eq_tol(self.lambda, other.lambda, tol) {
            return true;
        }
        if let (Some(p), Some(q)) = (&self.poly, &other.poly) {
            if p == q && lambda_eq_tol(self.lambda, other.lambda, 1e-6) {
                return true;
            }
        }
        false
    }

    /// Total order at tolerance `tol`: `(d₁,λ₁) ≤ (d₂,λ₂)` iff `λ₁ < λ₂`
    /// beyond tolerance, or the λs are equal within tolerance and `d₁ ≤ d₂`.
    pub fn cmp_tol(&self, other: &GrowthType, tol: f64) -> Ordering {
        if self.lambda_eq(other, tol) {
            self.d.cmp(&other.d)
        } else if self.lambda < other.lambda {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    pub fn max_tol(self, other: GrowthType, tol: f64) -> GrowthType {
        if self.cmp_tol(&other, tol) == Ordering::Less {
            other
        } else {
            self
        }
    }

    /// `(d, λ) ↦ (d, λ^k)`.
    pub fn power(&self, k: u32) -> GrowthType {
        if lambda_eq_tol(self.lambda, 1.0, LAMBDA_TOL_EXACT) {
            return self.clone();
        }
        GrowthType::new(self.d, self.lambda.powi(k as i32))
    }

    /// `(d, λ) ↦ (d, λ^{1/k})`.
    pub fn root(&self, k: u32) -> GrowthType {
        if k == 1 || lambda_eq_tol(self.lambda, 1.0, LAMBDA_TOL_EXACT) {
            return self.clone();
        }
        GrowthType::new(self.d, self.lambda.powf(1.0 / k as f64))
    }
}

impl PartialEq for GrowthType {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.lambda_eq(other, LAMBDA_TOL_EXACT)
    }
}

impl fmt::Display for GrowthType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if lambda_eq_tol(self.lambda, 1.0, LAMBDA_TOL_EXACT) {
            write!(f, "({}, 1)", self.d)
        } else {
            write!(f, "({}, {:.10})", self.d, self.lambda)
        }
    }
}

/// Relative λ comparison: `|a − b| ≤ tol · max(a, b, 1)`.
pub fn lambda_eq_tol(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.max(b).max(1.0)
}

/// Growth type of the partial sums `Σ_{k=1}^n (n−k)^d λ₁^k λ₂^{n−k}`:
/// `(0, λ₁)` if λ₁ > λ₂, `(d, λ₂)` if λ₂ > λ₁, and `(d+1, λ₂)` when the two
/// bases agree (within the exact tolerance).
pub fn polexp_sum(d: u32, lambda1: f64, lambda2: f64) -> GrowthType {
    if lambda_eq_tol(lambda1, lambda2, LAMBDA_TOL_EXACT) {
        GrowthType::new(d + 1, lambda2)
    } else if lambda1 > lambda2 {
        GrowthType::new(0, lambda1)
    } else {
        GrowthType::new(d, lambda2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn order_is_lambda_then_degree() {
        let a = GrowthType::new(3, 1.0);
        let b = GrowthType::new(0, 1.5);
        assert_eq!(a.cmp_tol(&b, LAMBDA_TOL_EXACT), Ordering::Less);
        let c = GrowthType::new(1, 1.5);
        assert_eq!(b.cmp_tol(&c, LAMBDA_TOL_EXACT), Ordering::Less);
        assert_eq!(c.cmp_tol(&c.clone(), LAMBDA_TOL_EXACT), Ordering::Equal);
    }

    #[test]
    fn shared_poly_confirms_equality() {
        let p: Vec<BigInt> = vec![BigInt::from(-1), BigInt::from(-1), BigInt::from(1)];
        let a = GrowthType::with_poly(0, 1.618033988749895, p.clone());
        let b = GrowthType::with_poly(0, 1.618033988749000, p); // sloppier root
        assert!(a.lambda_eq(&b, LAMBDA_TOL_EXACT));
    }

    #[test]
    fn polexp_sum_cases() {
        // equality case bumps the degree
        let s = polexp_sum(0, 1.0, 1.0);
        assert_eq!((s.d, s.lambda), (1, 1.0));
        // dominant λ1 wins with degree 0
        let s = polexp_sum(3, 2.0, 1.0);
        assert_eq!((s.d, s.lambda), (0, 2.0));
        // dominant λ2 keeps the degree
        let s = polexp_sum(2, 1.0, 2.0);
        assert_eq!((s.d, s.lambda), (2, 2.0));
    }
}
