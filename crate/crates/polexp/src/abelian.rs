//! Exact growth of integer-matrix orbits and their partial sums.
//!
//! For `A ∈ GL(k, Z)` and an integer vector `v`, the sequence `‖A^n v‖` grows
//! like `n^d |η|^n` where η ranges over the roots of the minimal polynomial
//! of `v` under `A` and `d + 1` is the largest multiplicity among roots of
//! maximal modulus. The partial sums `‖(I + A + … + A^{n-1}) v‖` grow the
//! same way except that the degree increases by one exactly when the
//! dominant eigenvalue is 1.
//!
//! The minimal polynomial is computed by exact rational elimination on the
//! Krylov sequence `v, Av, A²v, …`; no floating point touches its
//! coefficients. Roots are found on the square-free factors via companion
//! matrices and polished by Newton iteration.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::growth::{lambda_eq_tol, GrowthType};
use crate::parse;
use crate::LAMBDA_TOL_EXACT;

/// A square matrix with arbitrary-precision integer entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    pub n: usize,
    rows: Vec<Vec<BigInt>>,
}

impl IntMatrix {
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("matrix must be square".into()));
        }
        Ok(IntMatrix { n, rows })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        IntMatrix {
            n: rows.len(),
            rows: rows
                .iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        IntMatrix::from_rows(parse::parse_int_matrix(s)?)
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                    .collect()
            })
            .collect();
        IntMatrix { n, rows }
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.rows[i][j]
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {0}×{0}, vector has length {1}",
                self.n,
                v.len()
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch("matrix sizes differ".into()));
        }
        let n = self.n;
        let mut rows = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for l in 0..n {
                if self.rows[i][l].is_zero() {
                    continue;
                }
                for j in 0..n {
                    let t = &self.rows[i][l] * &other.rows[l][j];
                    rows[i][j] += t;
                }
            }
        }
        Ok(IntMatrix { n, rows })
    }

    pub fn pow(&self, k: usize) -> IntMatrix {
        let mut acc = IntMatrix::identity(self.n);
        for _ in 0..k {
            acc = acc.mul(self).expect("same size");
        }
        acc
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        let n = self.n;
        let mut m = self.rows.clone();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n.saturating_sub(1) {
            if m[k][k].is_zero() {
                let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                    return BigInt::zero();
                };
                m.swap(k, swap);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let t = &m[k][k] * &m[i][j] - &m[i][k] * &m[k][j];
                    m[i][j] = t / &prev; // exact by Sylvester's identity
                }
                m[i][k] = BigInt::zero();
            }
            prev = m[k][k].clone();
        }
        let d = m[n - 1][n - 1].clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }

    /// Characteristic polynomial (monic, ascending coefficients) by the
    /// Faddeev–LeVerrier recursion; all divisions are exact.
    pub fn charpoly(&self) -> Vec<BigInt> {
        let n = self.n;
        let mut m = IntMatrix::identity(n);
        let mut coeffs_desc = vec![BigInt::one()]; // x^n
        for k in 1..=n {
            m = self.mul(&m).expect("same size");
            let tr: BigInt = (0..n).map(|i| m.rows[i][i].clone()).sum();
            let c = -tr / BigInt::from(k as i64);
            for i in 0..n {
                m.rows[i][i] += &c;
            }
            coeffs_desc.push(c);
        }
        coeffs_desc.reverse();
        coeffs_desc
    }

    /// The `(k+1)×(k+1)` block matrix `[[A, v], [0, 1]]`.
    pub fn augmented_affine(&self, v: &[BigInt]) -> Result<IntMatrix> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch("translation length mismatch".into()));
        }
        let n = self.n + 1;
        let mut rows = Vec::with_capacity(n);
        for i in 0..self.n {
            let mut r = self.rows[i].clone();
            r.push(v[i].clone());
            rows.push(r);
        }
        let mut last = vec![BigInt::zero(); self.n];
        last.push(BigInt::one());
        rows.push(last);
        Ok(IntMatrix { n, rows })
    }
}

pub fn l1_norm(v: &[BigInt]) -> BigUint {
    let mut out = BigUint::default();
    for c in v {
        out += c.magnitude();
    }
    out
}

pub fn is_zero_vec(v: &[BigInt]) -> bool {
    v.iter().all(|c| c.is_zero())
}

// ---------------------------------------------------------------------------
// Polynomials
// ---------------------------------------------------------------------------

type RatPoly = Vec<BigRational>;

fn rp_trim(p: &mut RatPoly) {
    while p.len() > 1 && p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
}

fn rp_deg(p: &RatPoly) -> usize {
    p.len() - 1
}

fn rp_is_zero(p: &RatPoly) -> bool {
    p.iter().all(|c| c.is_zero())
}

fn rp_monic(p: &RatPoly) -> RatPoly {
    let lead = p.last().unwrap().clone();
    p.iter().map(|c| c / &lead).collect()
}

fn rp_derivative(p: &RatPoly) -> RatPoly {
    if p.len() <= 1 {
        return vec![BigRational::zero()];
    }
    let mut out: RatPoly = p[1..]
        .iter()
        .enumerate()
        .map(|(i, c)| c * BigRational::from(BigInt::from(i as i64 + 1)))
        .collect();
    rp_trim(&mut out);
    out
}

/// Remainder of `a` mod `b` (b nonzero).
fn rp_rem(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let mut r = a.clone();
    rp_trim(&mut r);
    let db = rp_deg(b);
    let lead = b.last().unwrap();
    while !rp_is_zero(&r) && rp_deg(&r) >= db && !(rp_deg(&r) == 0 && r[0].is_zero()) {
        let shift = rp_deg(&r) - db;
        let factor = r.last().unwrap() / lead;
        for i in 0..=db {
            let t = &b[i] * &factor;
            r[i + shift] -= t;
        }
        rp_trim(&mut r);
        if rp_deg(&r) < db {
            break;
        }
    }
    r
}

/// Exact quotient `a / b` (must divide evenly).
fn rp_div_exact(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let mut r = a.clone();
    rp_trim(&mut r);
    let db = rp_deg(b);
    let lead = b.last().unwrap();
    let mut q = vec![BigRational::zero(); rp_deg(&r).saturating_sub(db) + 1];
    while !rp_is_zero(&r) && rp_deg(&r) >= db {
        let shift = rp_deg(&r) - db;
        let factor = r.last().unwrap() / lead;
        q[shift] = factor.clone();
        for i in 0..=db {
            let t = &b[i] * &factor;
            r[i + shift] -= t;
        }
        rp_trim(&mut r);
        if rp_deg(&r) < db {
            break;
        }
    }
    debug_assert!(rp_is_zero(&r), "rp_div_exact: nonzero remainder");
    rp_trim(&mut q);
    q
}

fn rp_gcd(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let mut x = a.clone();
    let mut y = b.clone();
    rp_trim(&mut x);
    rp_trim(&mut y);
    while !rp_is_zero(&y) {
        let r = rp_rem(&x, &y);
        x = y;
        y = r;
        rp_trim(&mut y);
    }
    if rp_is_zero(&x) {
        vec![BigRational::one()]
    } else {
        rp_monic(&x)
    }
}

fn int_to_rat(p: &[BigInt]) -> RatPoly {
    p.iter().map(|c| BigRational::from(c.clone())).collect()
}

fn rat_to_f64(p: &RatPoly) -> Vec<f64> {
    p.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
}

/// Yun square-free decomposition of a monic polynomial over Q: returns
/// pairwise-coprime monic factors with their multiplicities.
fn squarefree_decomposition(p: &[BigInt]) -> Vec<(RatPoly, usize)> {
    let a = int_to_rat(p);
    if rp_deg(&a) == 0 {
        return Vec::new();
    }
    let da = rp_derivative(&a);
    let g = rp_gcd(&a, &da);
    if rp_deg(&g) == 0 {
        return vec![(rp_monic(&a), 1)];
    }
    let mut out = Vec::new();
    let mut c = rp_div_exact(&a, &g);
    let mut d = {
        let q = rp_div_exact(&da, &g);
        let mut t = q;
        let cd = rp_derivative(&c);
        for (i, x) in cd.iter().enumerate() {
            t[i] -= x;
        }
        rp_trim(&mut t);
        t
    };
    let mut mult = 1usize;
    loop {
        if rp_deg(&c) == 0 {
            break;
        }
        let ai = rp_gcd(&c, &d);
        if rp_deg(&ai) > 0 {
            out.push((ai.clone(), mult));
        }
        let c_next = rp_div_exact(&c, &ai);
        let mut d_next = rp_div_exact(&d, &ai);
        let cd = rp_derivative(&c_next);
        for i in 0..d_next.len().max(cd.len()) {
            let sub = cd.get(i).cloned().unwrap_or_else(BigRational::zero);
            if i < d_next.len() {
                d_next[i] -= sub;
            } else {
                d_next.push(-sub);
            }
        }
        rp_trim(&mut d_next);
        c = c_next;
        d = d_next;
        mult += 1;
    }
    out
}

fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Roots of a square-free monic polynomial: companion-matrix eigenvalues in
/// double precision, then Newton polishing.
fn squarefree_roots(p: &RatPoly) -> Vec<Complex64> {
    let deg = rp_deg(p);
    if deg == 0 {
        return Vec::new();
    }
    let cf = rat_to_f64(p);
    if deg == 1 {
        return vec![Complex64::new(-cf[0] / cf[1], 0.0)];
    }
    let mut comp = nalgebra::DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -cf[i] / cf[deg];
    }
    let eig = comp.complex_eigenvalues();
    let dcf: Vec<f64> = cf[1..]
        .iter()
        .enumerate()
        .map(|(i, c)| c * (i as f64 + 1.0))
        .collect();
    eig.iter()
        .map(|&z0| {
            let mut z = Complex64::new(z0.re, z0.im);
            for _ in 0..8 {
                let f = horner(&cf, z);
                let df = horner(&dcf, z);
                if df.norm() == 0.0 {
                    break;
                }
                let step = f / df;
                z -= step;
                if step.norm() <= 1e-16 * z.norm().max(1.0) {
                    break;
                }
            }
            z
        })
        .collect()
}

/// Roots with multiplicities of a monic integer polynomial.
pub fn poly_roots(p: &[BigInt]) -> Vec<(Complex64, usize)> {
    let mut out = Vec::new();
    for (factor, mult) in squarefree_decomposition(p) {
        for z in squarefree_roots(&factor) {
            out.push((z, mult));
        }
    }
    out
}

pub fn poly_to_string(p: &[BigInt]) -> String {
    let mut terms = Vec::new();
    for (i, c) in p.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{i}"),
        };
        let cs = if i == 0 {
            c.to_string()
        } else if c.is_one() {
            mono
        } else if (-c).is_one() {
            format!("-{mono}")
        } else {
            format!("{c}{mono}")
        };
        terms.push(cs);
    }
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut s = terms[0].clone();
    for t in &terms[1..] {
        if let Some(rest) = t.strip_prefix('-') {
            s.push_str(" - ");
            s.push_str(rest);
        } else {
            s.push_str(" + ");
            s.push_str(t);
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Minimal polynomial of a vector
// ---------------------------------------------------------------------------

/// The monic generator of the ideal of polynomials annihilating `v` under
/// `A`, with its numerically computed roots.
#[derive(Debug, Clone)]
pub struct VectorMinimalPoly {
    /// Monic integer coefficients, ascending. `[1]` for `v = 0`.
    pub coeffs: Vec<BigInt>,
    pub roots: Vec<(Complex64, usize)>,
}

impl VectorMinimalPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Compute the minimal polynomial of `v` under `A` by exact rational
/// elimination on the Krylov sequence, then verify `p(A)·v = 0` in integer
/// arithmetic and that the product of root moduli matches `|p(0)|`.
pub fn minimal_poly_of_vector(a: &IntMatrix, v: &[BigInt]) -> Result<VectorMinimalPoly> {
    if v.len() != a.n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {0}×{0}, vector has length {1}",
            a.n,
            v.len()
        )));
    }
    if is_zero_vec(v) {
        return Ok(VectorMinimalPoly {
            coeffs: vec![BigInt::one()],
            roots: Vec::new(),
        });
    }

    // Echelon rows: (reduced Krylov vector, expression in terms of A^i v),
    // normalized to pivot 1.
    let mut echelon: Vec<(usize, Vec<BigRational>, Vec<BigRational>)> = Vec::new();
    let mut krylov_int: Vec<Vec<BigInt>> = vec![v.to_vec()];

    for m in 0..=a.n {
        let w_int = krylov_int[m].clone();
        let mut w: Vec<BigRational> = w_int
            .iter()
            .map(|c| BigRational::from(c.clone()))
            .collect();
        let mut expr = vec![BigRational::zero(); m + 1];
        expr[m] = BigRational::one();

        for (pivot, row_w, row_expr) in &echelon {
            if w[*pivot].is_zero() {
                continue;
            }
            let factor = w[*pivot].clone();
            for (wi, ri) in w.iter_mut().zip(row_w) {
                *wi -= &factor * ri;
            }
            for (i, ri) in row_expr.iter().enumerate() {
                let t = &factor * ri;
                expr[i] -= t;
            }
        }

        if w.iter().all(|c| c.is_zero()) {
            // dependency found: A^m v = -Σ expr_i A^i v for i < m, expr_m = 1
            let coeffs: Vec<BigInt> = expr
                .iter()
                .map(|c| {
                    if !c.is_integer() {
                        return Err(Error::CrossCheck(
                            "minimal polynomial has a non-integer coefficient".into(),
                        ));
                    }
                    Ok(c.to_integer())
                })
                .collect::<Result<_>>()?;
            verify_annihilates(&coeffs, &krylov_int)?;
            let roots = poly_roots(&coeffs);
            verify_root_product(&coeffs, &roots)?;
            return Ok(VectorMinimalPoly { coeffs, roots });
        }

        let pivot = w.iter().position(|c| !c.is_zero()).unwrap();
        let lead = w[pivot].clone();
        let row_w: Vec<BigRational> = w.iter().map(|c| c / &lead).collect();
        let row_expr: Vec<BigRational> = expr.iter().map(|c| c / &lead).collect();
        echelon.push((pivot, row_w, row_expr));

        krylov_int.push(a.mul_vec(&w_int)?);
    }
    unreachable!("Krylov sequence of length n+1 is always dependent");
}

fn verify_annihilates(coeffs: &[BigInt], krylov: &[Vec<BigInt>]) -> Result<()> {
    let n = krylov[0].len();
    let mut acc = vec![BigInt::zero(); n];
    for (i, c) in coeffs.iter().enumerate() {
        for (j, k) in krylov[i].iter().enumerate() {
            acc[j] += c * k;
        }
    }
    if acc.iter().all(|c| c.is_zero()) {
        Ok(())
    } else {
        Err(Error::CrossCheck(
            "p(A)·v ≠ 0 for the computed minimal polynomial".into(),
        ))
    }
}

fn verify_root_product(coeffs: &[BigInt], roots: &[(Complex64, usize)]) -> Result<()> {
    let product: f64 = roots
        .iter()
        .map(|(z, m)| z.norm().powi(*m as i32))
        .product();
    let constant = coeffs[0]
        .abs()
        .to_f64()
        .unwrap_or(f64::INFINITY);
    if constant == 0.0 {
        return Ok(()); // not expected for unimodular matrices
    }
    if (product - constant).abs() <= 1e-9 * constant.max(1.0) {
        Ok(())
    } else {
        Err(Error::CrossCheck(format!(
            "product of root moduli {product} does not match |p(0)| = {constant}"
        )))
    }
}

// ---------------------------------------------------------------------------
// Growth
// ---------------------------------------------------------------------------

fn dominant_cluster(mp: &VectorMinimalPoly) -> (f64, u32, bool) {
    let lambda = mp
        .roots
        .iter()
        .map(|(z, _)| z.norm())
        .fold(0.0f64, f64::max);
    let mut d = 0u32;
    let mut has_real_positive = false;
    for (z, mult) in &mp.roots {
        if z.norm() >= lambda * (1.0 - LAMBDA_TOL_EXACT) {
            d = d.max(*mult as u32 - 1);
            if z.im.abs() <= 1e-9 * z.norm().max(1.0) && z.re > 0.0 {
                has_real_positive = true;
            }
        }
    }
    (lambda, d, has_real_positive)
}

fn snap_lambda(lambda: f64) -> f64 {
    if lambda_eq_tol(lambda, 1.0, LAMBDA_TOL_EXACT) {
        1.0
    } else {
        lambda.max(1.0)
    }
}

fn require_unimodular(a: &IntMatrix) -> Result<()> {
    let det = a.det();
    if det.abs().is_one() {
        Ok(())
    } else {
        Err(Error::NotUnimodular {
            det: det.to_string(),
        })
    }
}

/// Growth type of `‖A^n v‖` for `A ∈ GL(k, Z)`.
pub fn orbit_growth(a: &IntMatrix, v: &[BigInt]) -> Result<GrowthType> {
    require_unimodular(a)?;
    orbit_growth_unimodular(a, v)
}

fn orbit_growth_unimodular(a: &IntMatrix, v: &[BigInt]) -> Result<GrowthType> {
    if v.len() != a.n {
        return Err(Error::DimensionMismatch("vector length".into()));
    }
    if is_zero_vec(v) {
        return Ok(GrowthType::bounded());
    }
    let mp = minimal_poly_of_vector(a, v)?;
    let (lambda, d, real_pos) = dominant_cluster(&mp);
    let lambda = snap_lambda(lambda);
    let mut g = GrowthType::new(d, lambda);
    if real_pos && lambda > 1.0 {
        g.poly = Some(mp.coeffs.clone());
    } else if lambda == 1.0 {
        g.poly = Some(vec![BigInt::from(-1), BigInt::one()]);
    }
    Ok(g)
}

/// Multiplicity of 1 as a root of the vector's minimal polynomial.
fn multiplicity_of_one(mp: &VectorMinimalPoly) -> u32 {
    mp.roots
        .iter()
        .filter(|(z, _)| (z - Complex64::new(1.0, 0.0)).norm() <= 1e-7)
        .map(|(_, m)| *m as u32)
        .max()
        .unwrap_or(0)
}

/// Growth type of `‖(I + A + … + A^{n-1}) v‖` for `A ∈ GL(k, Z)`.
///
/// Computed twice — directly from the minimal polynomial of `v` (degree
/// bumped exactly when the dominant eigenvalue is 1) and through the orbit of
/// the augmented affine matrix `[[A, v], [0, 1]]` — and the two routes are
/// required to agree.
pub fn palangre_growth(a: &IntMatrix, v: &[BigInt]) -> Result<GrowthType> {
    require_unimodular(a)?;

    // Route 1: minimal polynomial of v, with the η = 1 degree bump.
    let direct = if is_zero_vec(v) {
        GrowthType::bounded()
    } else {
        let mp = minimal_poly_of_vector(a, v)?;
        let (lambda, d, real_pos) = dominant_cluster(&mp);
        let lambda = snap_lambda(lambda);
        if lambda > 1.0 {
            let mut g = GrowthType::new(d, lambda);
            if real_pos {
                g.poly = Some(mp.coeffs.clone());
            }
            g
        } else {
            let d_sum = if multiplicity_of_one(&mp) == d + 1 {
                d + 1
            } else {
                d
            };
            GrowthType::with_poly(d_sum, 1.0, vec![BigInt::from(-1), BigInt::one()])
        }
    };

    // Route 2: orbit of the last basis vector under the augmented matrix.
    let aug = a.augmented_affine(v)?;
    let mut e = vec![BigInt::zero(); a.n];
    e.push(BigInt::one());
    let via_orbit = orbit_growth_unimodular(&aug, &e)?;

    if direct.d != via_orbit.d || !lambda_eq_tol(direct.lambda, via_orbit.lambda, 1e-8) {
        return Err(Error::CrossCheck(format!(
            "palangre growth routes disagree: direct {direct}, augmented-orbit {via_orbit}"
        )));
    }
    Ok(direct)
}

/// Growth of the affine recursion `x_{k+1} = B x_k + c` started at `x0`,
/// i.e. of `‖B^n x0 + (I + B + … + B^{n-1}) c‖`.
pub fn affine_orbit_growth(b: &IntMatrix, c: &[BigInt], x0: &[BigInt]) -> Result<GrowthType> {
    let aug = b.augmented_affine(c)?;
    let mut w = x0.to_vec();
    w.push(BigInt::one());
    orbit_growth(&aug, &w)
}

/// The exact sequence `‖A^n v‖₁` for `n = 0..=n_max`.
pub fn orbit_oracle(a: &IntMatrix, v: &[BigInt], n_max: usize) -> Result<Vec<BigUint>> {
    if v.len() != a.n {
        return Err(Error::DimensionMismatch("vector length".into()));
    }
    let mut out = Vec::with_capacity(n_max + 1);
    let mut w = v.to_vec();
    for _ in 0..=n_max {
        out.push(l1_norm(&w));
        w = a.mul_vec(&w)?;
    }
    Ok(out)
}

/// The exact sequence `‖(I + A + … + A^{n-1}) v‖₁` for `n = 0..=n_max`.
pub fn palangre_oracle(a: &IntMatrix, v: &[BigInt], n_max: usize) -> Result<Vec<BigUint>> {
    if v.len() != a.n {
        return Err(Error::DimensionMismatch("vector length".into()));
    }
    let mut out = Vec::with_capacity(n_max + 1);
    let mut sum = vec![BigInt::zero(); a.n];
    let mut w = v.to_vec();
    for _ in 0..=n_max {
        out.push(l1_norm(&sum));
        for (s, x) in sum.iter_mut().zip(&w) {
            *s += x;
        }
        w = a.mul_vec(&w)?;
    }
    Ok(out)
}

/// Enumerate all integer vectors with `‖v‖₁ ≤ radius` (including zero).
pub fn vectors_in_ball(dim: usize, radius: i64) -> Vec<Vec<BigInt>> {
    let mut out = Vec::new();
    let mut cur = vec![BigInt::zero(); dim];
    fn rec(out: &mut Vec<Vec<BigInt>>, cur: &mut Vec<BigInt>, pos: usize, rem: i64) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for c in -rem..=rem {
            cur[pos] = BigInt::from(c);
            rec(out, cur, pos + 1, rem - c.abs());
        }
        cur[pos] = BigInt::zero();
    }
    rec(&mut out, &mut cur, 0, radius);
    out
}

/// Exact orbit and palangre growth types realized by integer vectors of
/// ℓ¹ norm at most `radius`; feeds component spectra for combination bounds.
pub fn growth_types_over_ball(
    a: &IntMatrix,
    radius: i64,
) -> Result<(Vec<GrowthType>, Vec<GrowthType>)> {
    let mut orbit = Vec::new();
    let mut pal = Vec::new();
    for v in vectors_in_ball(a.n, radius) {
        orbit.push(orbit_growth(a, &v)?);
        pal.push(palangre_growth(a, &v)?);
    }
    Ok((orbit, pal))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib2() -> IntMatrix {
        IntMatrix::from_i64(&[&[2, 1], &[1, 1]])
    }

    #[test]
    fn det_and_charpoly() {
        assert_eq!(fib2().det(), BigInt::one());
        let cp = fib2().charpoly();
        // x^2 - 3x + 1
        assert_eq!(cp, vec![BigInt::from(1), BigInt::from(-3), BigInt::from(1)]);
        let m = IntMatrix::from_i64(&[&[0, 2], &[1, 0]]);
        assert_eq!(m.charpoly(), vec![BigInt::from(-2), BigInt::zero(), BigInt::one()]);
    }

    #[test]
    fn minimal_poly_examples() {
        // zero vector: p = 1
        let z = vec![BigInt::zero(), BigInt::zero()];
        let mp = minimal_poly_of_vector(&fib2(), &z).unwrap();
        assert_eq!(mp.coeffs, vec![BigInt::one()]);

        // identity: p = x - 1
        let id = IntMatrix::identity(2);
        let v = vec![BigInt::one(), BigInt::zero()];
        let mp = minimal_poly_of_vector(&id, &v).unwrap();
        assert_eq!(mp.coeffs, vec![BigInt::from(-1), BigInt::one()]);

        // [[2,1],[1,1]], v = e1: p = x² − 3x + 1
        let mp = minimal_poly_of_vector(&fib2(), &v).unwrap();
        assert_eq!(
            mp.coeffs,
            vec![BigInt::from(1), BigInt::from(-3), BigInt::from(1)]
        );
    }

    #[test]
    fn orbit_growth_examples() {
        let v = vec![BigInt::one(), BigInt::zero()];
        let g = orbit_growth(&fib2(), &v).unwrap();
        assert_eq!(g.d, 0);
        assert!((g.lambda - 2.618033988749895).abs() < 1e-9);

        // unipotent: A^n (0,1) = (n, 1) grows linearly, e1 is fixed
        let u = IntMatrix::from_i64(&[&[1, 1], &[0, 1]]);
        let g = orbit_growth(&u, &[BigInt::zero(), BigInt::one()]).unwrap();
        assert_eq!((g.d, g.lambda), (1, 1.0));
        let g = orbit_growth(&u, &[BigInt::one(), BigInt::zero()]).unwrap();
        assert_eq!((g.d, g.lambda), (0, 1.0));

        // 3×3 unipotent single Jordan block: binomial C(n,2) growth
        let j = IntMatrix::from_i64(&[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]);
        let g = orbit_growth(&j, &[BigInt::zero(), BigInt::zero(), BigInt::one()]).unwrap();
        assert_eq!((g.d, g.lambda), (2, 1.0));
    }

    #[test]
    fn orbit_growth_rejects_non_unimodular() {
        let m = IntMatrix::from_i64(&[&[2, 0], &[0, 1]]);
        assert!(matches!(
            orbit_growth(&m, &[BigInt::one(), BigInt::one()]),
            Err(Error::NotUnimodular { .. })
        ));
    }

    #[test]
    fn palangre_growth_examples() {
        // identity: Σ v = n·v
        let id = IntMatrix::identity(2);
        let g = palangre_growth(&id, &[BigInt::from(2), BigInt::zero()]).unwrap();
        assert_eq!((g.d, g.lambda), (1, 1.0));

        // η ≠ 1: degree unchanged
        let g = palangre_growth(&fib2(), &[BigInt::one(), BigInt::zero()]).unwrap();
        assert_eq!(g.d, 0);
        assert!((g.lambda - 2.618033988749895).abs() < 1e-9);

        // unipotent, v = e2: orbit degree 1, sums degree 2
        let u = IntMatrix::from_i64(&[&[1, 1], &[0, 1]]);
        let g = palangre_growth(&u, &[BigInt::zero(), BigInt::one()]).unwrap();
        assert_eq!((g.d, g.lambda), (2, 1.0));
    }

    #[test]
    fn oracle_sequences() {
        let id1 = IntMatrix::identity(1);
        let seq = orbit_oracle(&id1, &[BigInt::from(2)], 5).unwrap();
        assert!(seq.iter().all(|x| *x == BigUint::from(2u32)));

        let seq = orbit_oracle(&fib2(), &[BigInt::one(), BigInt::zero()], 30).unwrap();
        assert_eq!(seq[0], BigUint::from(1u32));
        assert_eq!(seq[1], BigUint::from(3u32));
        assert_eq!(seq[2], BigUint::from(8u32));
        assert_eq!(seq[3], BigUint::from(21u32));
        // ratio converges to the dominant eigenvalue
        let a30 = seq[30].to_f64().unwrap();
        let a29 = seq[29].to_f64().unwrap();
        assert!((a30 / a29 - 2.618033988749895).abs() < 1e-6);
    }

    #[test]
    fn power_law_on_matrix_powers() {
        let v = [BigInt::one(), BigInt::from(-1)];
        let g1 = orbit_growth(&fib2(), &v).unwrap();
        let g3 = orbit_growth(&fib2().pow(3), &v).unwrap();
        assert_eq!(g1.d, g3.d);
        assert!((g3.lambda - g1.lambda.powi(3)).abs() < 1e-6 * g3.lambda);
    }

    #[test]
    fn defining_poly_degree_bounded_by_dimension() {
        let g = orbit_growth(&fib2(), &[BigInt::one(), BigInt::zero()]).unwrap();
        let poly = g.poly.expect("dominant root is real positive");
        assert!(poly.len() - 1 <= 2);
    }
}
