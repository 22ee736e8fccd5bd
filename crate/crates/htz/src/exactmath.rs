//! Arbitrary-precision rational arithmetic and exact dense linear algebra.
//!
//! All scalar quantities in this crate are [`Rational`]s: arbitrary-precision
//! fractions kept in lowest terms with a positive denominator. No floating
//! point enters any rank or nullspace decision — truncation effects would
//! otherwise be able to flip the rank-sensitive verdicts downstream.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactMathError {
    /// Matrices must have at least one row and one column.
    #[error("empty matrix ({rows}x{cols}) rejected at construction")]
    EmptyMatrix { rows: usize, cols: usize },
    /// Rows of unequal length handed to a matrix constructor.
    #[error("ragged rows: row {row} has {got} entries, expected {expected}")]
    RaggedRows { row: usize, got: usize, expected: usize },
    /// Identity sampling ran out of pole-free integer sample points.
    #[error("could not collect {needed} pole-free samples; gave up at k = {last_k}")]
    PoleAtSample { needed: usize, last_k: i64 },
    /// Division by an exact zero.
    #[error("division by zero")]
    DivisionByZero,
    /// Text did not parse as `a` or `a/b`.
    #[error("invalid rational literal {input:?}")]
    BadLiteral { input: String },
}

// ---------------------------------------------------------------------------
// Rational
// ---------------------------------------------------------------------------

/// Exact rational scalar. Always in lowest terms, denominator > 0;
/// equality is exact structural equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `n/d` reduced. Returns an error for `d == 0`.
    pub fn new(n: i64, d: i64) -> Result<Self, ExactMathError> {
        if d == 0 {
            return Err(ExactMathError::DivisionByZero);
        }
        Ok(Rational(BigRational::new(BigInt::from(n), BigInt::from(d))))
    }

    pub fn from_bigints(n: BigInt, d: BigInt) -> Result<Self, ExactMathError> {
        if d.is_zero() {
            return Err(ExactMathError::DivisionByZero);
        }
        Ok(Rational(BigRational::new(n, d)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self, ExactMathError> {
        if self.is_zero() {
            return Err(ExactMathError::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    /// Nearest f64; used only at the boundary to the quadrature oracle and
    /// never inside exact decisions.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational, ExactMathError> {
        if rhs.is_zero() {
            return Err(ExactMathError::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // "a" for integers, "a/b" otherwise
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Rational {
    type Err = ExactMathError;

    /// Accepts `a` or `a/b` with optional leading sign, arbitrary precision.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || ExactMathError::BadLiteral { input: s.to_string() };
        let (ns, ds) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let n = BigInt::from_str(ns).map_err(|_| bad())?;
        let d = BigInt::from_str(ds).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Rational(BigRational::new(n, d)))
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0 $op &rhs.0)
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(&self.0 $op rhs.0)
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational(&self.0 $op &rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

// Division panics on zero divisors like the primitive types do; fallible
// callers go through `checked_div`.
impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "exact division by zero");
        Rational(self.0 / rhs.0)
    }
}

impl<'a, 'b> Div<&'b Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, rhs: &'b Rational) -> Rational {
        assert!(!rhs.is_zero(), "exact division by zero");
        Rational(&self.0 / &rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl<'a> Neg for &'a Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

/// Shorthand used throughout the tests.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n, d).expect("nonzero denominator")
}

// ---------------------------------------------------------------------------
// RatVector
// ---------------------------------------------------------------------------

/// Dense vector of rationals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatVector(pub Vec<Rational>);

impl RatVector {
    pub fn zeros(len: usize) -> Self {
        RatVector(vec![Rational::zero(); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Rational::is_zero)
    }

    pub fn dot(&self, other: &RatVector) -> Rational {
        assert_eq!(self.len(), other.len(), "dot of mismatched lengths");
        let mut acc = Rational::zero();
        for (a, b) in self.0.iter().zip(&other.0) {
            acc += &(a * b);
        }
        acc
    }

    pub fn scale(&self, c: &Rational) -> RatVector {
        RatVector(self.0.iter().map(|x| x * c).collect())
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }
}

// ---------------------------------------------------------------------------
// RatMatrix
// ---------------------------------------------------------------------------

/// Dense rectangular rational matrix, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    /// Zero matrix. Empty shapes are rejected here so that rank/nullspace
    /// never see them.
    pub fn zeros(rows: usize, cols: usize) -> Result<Self, ExactMathError> {
        if rows == 0 || cols == 0 {
            return Err(ExactMathError::EmptyMatrix { rows, cols });
        }
        Ok(RatMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] })
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, ExactMathError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(ExactMathError::EmptyMatrix { rows: r, cols: c });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(ExactMathError::RaggedRows { row: i, got: row.len(), expected: c });
            }
        }
        Ok(RatMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn identity(n: usize) -> Result<Self, ExactMathError> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        assert!(r < self.rows);
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut out = RatMatrix {
            rows: self.cols,
            cols: self.rows,
            data: vec![Rational::zero(); self.data.len()],
        };
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        out
    }

    /// Stack matrices with equal column counts on top of each other.
    pub fn vstack(parts: &[&RatMatrix]) -> Result<RatMatrix, ExactMathError> {
        let cols = parts.first().map_or(0, |m| m.cols);
        let rows: usize = parts.iter().map(|m| m.rows).sum();
        if rows == 0 || cols == 0 {
            return Err(ExactMathError::EmptyMatrix { rows, cols });
        }
        let mut data = Vec::with_capacity(rows * cols);
        for (i, m) in parts.iter().enumerate() {
            if m.cols != cols {
                return Err(ExactMathError::RaggedRows { row: i, got: m.cols, expected: cols });
            }
            data.extend(m.data.iter().cloned());
        }
        Ok(RatMatrix { rows, cols, data })
    }

    pub fn mul_vec(&self, v: &RatVector) -> RatVector {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        let mut out = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let mut acc = Rational::zero();
            for c in 0..self.cols {
                acc += &(self.get(r, c) * &v.0[c]);
            }
            out.push(acc);
        }
        RatVector(out)
    }

    /// Reduced row echelon form together with the pivot column list.
    /// Pivot choice is the first nonzero entry scanning down, so the result
    /// is deterministic.
    fn rref(&self) -> (RatMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for c in 0..m.cols {
            let Some(pr) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, r * m.cols + j);
                }
            }
            let pivot = m.get(r, c).clone();
            for j in c..m.cols {
                let v = m.get(r, j) / &pivot;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i != r && !m.get(i, c).is_zero() {
                    let f = m.get(i, c).clone();
                    for j in c..m.cols {
                        let v = m.get(i, j) - &(&f * m.get(r, j));
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == m.rows {
                break;
            }
        }
        (m, pivots)
    }

    /// Exact rank via pivoted rational elimination.
    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the exact right nullspace, each vector normalized so its
    /// first nonzero entry is 1. Empty iff the nullspace is `{0}`.
    /// Basis vectors are ordered by their free column index.
    pub fn nullspace(&self) -> Vec<RatVector> {
        let (rr, pivots) = self.rref();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![Rational::zero(); self.cols];
            v[free] = Rational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -rr.get(i, free);
            }
            let lead = v
                .iter()
                .find(|x| !x.is_zero())
                .expect("nullspace vector has a unit free coordinate")
                .clone();
            let v = v.into_iter().map(|x| &x / &lead).collect();
            basis.push(RatVector(v));
        }
        basis
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(Rational::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Rational identity verification
// ---------------------------------------------------------------------------

/// Decide `lhs(k) == rhs(k)` for all integers `k ≥ 0`, given that the
/// cross-multiplied difference is a polynomial in `k` of degree at most
/// `degree_bound`. The sides report poles by returning `None`; sampling
/// starts at `k = 0` and skips poles upward, needing `degree_bound + 1`
/// pole-free agreement points.
pub fn verify_rational_identity<L, R>(
    lhs: L,
    rhs: R,
    degree_bound: usize,
) -> Result<bool, ExactMathError>
where
    L: Fn(i64) -> Option<Rational>,
    R: Fn(i64) -> Option<Rational>,
{
    let needed = degree_bound + 1;
    let scan_limit = (needed as i64) * 64 + 1024;
    let mut collected = 0usize;
    let mut k = 0i64;
    while k < scan_limit {
        match (lhs(k), rhs(k)) {
            (Some(a), Some(b)) => {
                if a != b {
                    return Ok(false);
                }
                collected += 1;
                if collected == needed {
                    return Ok(true);
                }
            }
            _ => {} // pole at this sample; skip to the next integer
        }
        k += 1;
    }
    Err(ExactMathError::PoleAtSample { needed, last_k: k })
}
