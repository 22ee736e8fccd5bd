//! Radial and quasihomogeneous symbols and their Mellin transforms.
//!
//! A radial symbol is a finite combination `f(r) = Σ c_j r^{α_j}` on `[0,1]`
//! with exact rational coefficients and exponents `α_j ≥ 0` (so the symbol is
//! bounded on the closed disk). Its Mellin transform is
//! `f̂(z) = ∫₀¹ f(r) r^{z−1} dr = Σ c_j / (z + α_j)`, evaluated exactly by
//! [`mellin_eval`] and numerically by the independent [`mellin_quadrature`]
//! oracle.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::exactmath::Rational;

#[derive(Debug, Error, PartialEq)]
pub enum SymbolError {
    /// Parse failure at a byte position of the input.
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    /// Symbols must be bounded on the closed disk, so exponents are ≥ 0.
    #[error("negative exponent {exponent} at byte {pos}")]
    NegativeExponent { pos: usize, exponent: String },
    /// Mellin argument at or below the convergence abscissa `−α_min`.
    #[error("Mellin integral diverges: z = {z} with minimum exponent {alpha_min}")]
    DivergentMellin { z: String, alpha_min: String },
    /// The adaptive quadrature could not certify the requested tolerance.
    #[error("quadrature failed to reach tolerance {tol}")]
    NonConvergence { tol: f64 },
}

// ---------------------------------------------------------------------------
// RadialSymbol
// ---------------------------------------------------------------------------

/// Finite combination `Σ c_j r^{α_j}` with rational coefficients and
/// pairwise-distinct rational exponents `α_j ≥ 0`.
///
/// Terms are kept sorted by exponent with zero coefficients removed, so
/// equality is structural. The empty term list is the zero symbol.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RadialSymbol {
    terms: Vec<(Rational, Rational)>, // (coefficient, exponent)
}

impl RadialSymbol {
    /// Canonicalize a raw term list: combine like exponents, drop zeros,
    /// sort by exponent. Rejects negative exponents.
    pub fn new(terms: Vec<(Rational, Rational)>) -> Result<Self, SymbolError> {
        let mut canon: Vec<(Rational, Rational)> = Vec::new();
        for (c, e) in terms {
            if e.is_negative() {
                return Err(SymbolError::NegativeExponent { pos: 0, exponent: e.to_string() });
            }
            match canon.binary_search_by(|(_, ee)| ee.cmp(&e)) {
                Ok(i) => canon[i].0 += &c,
                Err(i) => canon.insert(i, (c, e)),
            }
        }
        canon.retain(|(c, _)| !c.is_zero());
        Ok(RadialSymbol { terms: canon })
    }

    pub fn zero() -> Self {
        RadialSymbol { terms: Vec::new() }
    }

    /// The constant function with value one.
    pub fn one() -> Self {
        RadialSymbol { terms: vec![(Rational::one(), Rational::zero())] }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![(c, Rational::zero())]).expect("exponent 0 is valid")
    }

    /// `c · r^e`, `e ≥ 0`.
    pub fn monomial(c: Rational, e: Rational) -> Result<Self, SymbolError> {
        Self::new(vec![(c, e)])
    }

    /// `r^e` with integer `e ≥ 0`.
    pub fn r_pow(e: i64) -> Self {
        Self::monomial(Rational::one(), Rational::from_int(e)).expect("e >= 0")
    }

    pub fn terms(&self) -> &[(Rational, Rational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        match self.terms.as_slice() {
            [] => true,
            [(_, e)] => e.is_zero(),
            _ => false,
        }
    }

    /// Smallest exponent, `None` for the zero symbol.
    pub fn min_exponent(&self) -> Option<&Rational> {
        self.terms.first().map(|(_, e)| e)
    }

    pub fn add(&self, other: &RadialSymbol) -> RadialSymbol {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(terms).expect("exponents already validated")
    }

    pub fn scale(&self, c: &Rational) -> RadialSymbol {
        Self::new(self.terms.iter().map(|(a, e)| (a * c, e.clone())).collect())
            .expect("exponents already validated")
    }

    /// Multiply by `r^shift` (`shift ≥ 0`), i.e. add `shift` to every exponent.
    pub fn mul_r_pow(&self, shift: &Rational) -> Result<RadialSymbol, SymbolError> {
        Self::new(self.terms.iter().map(|(c, e)| (c.clone(), e + shift)).collect())
    }

    /// Exact proportionality: `Some(c)` iff `self == c · other` or the
    /// symmetric relation holds with the roles swapped. Zero symbols are
    /// proportional to everything.
    pub fn proportional_to(&self, other: &RadialSymbol) -> Option<Rational> {
        if self.is_zero() || other.is_zero() {
            return Some(Rational::zero());
        }
        if self.terms.len() != other.terms.len() {
            return None;
        }
        let mut ratio: Option<Rational> = None;
        for ((a, ea), (b, eb)) in self.terms.iter().zip(&other.terms) {
            if ea != eb {
                return None;
            }
            let r = a.checked_div(b).ok()?;
            match &ratio {
                None => ratio = Some(r),
                Some(prev) if *prev == r => {}
                _ => return None,
            }
        }
        ratio
    }

    /// Canonical text form; `parse_radial(render(f)) == f`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (c, e)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let rpart = if e.is_zero() {
                None
            } else if e.is_one() {
                Some("r".to_string())
            } else if e.is_integer() {
                Some(format!("r^{}", e))
            } else {
                Some(format!("r^{{{}}}", e))
            };
            match rpart {
                None => out.push_str(&mag.to_string()),
                Some(r) => {
                    if mag.is_one() {
                        out.push_str(&r);
                    } else {
                        out.push_str(&format!("{}*{}", mag, r));
                    }
                }
            }
        }
        out
    }

    /// Pointwise evaluation in f64; the quadrature oracle's integrand.
    pub fn eval_f64(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c.to_f64() * r.powf(e.to_f64()))
            .sum()
    }
}

impl fmt::Display for RadialSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Quasihomogeneous symbol `e^{ipθ} φ(r)`: an integer angular degree together
/// with a radial part.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QuasiSymbol {
    pub degree: i64,
    pub radial: RadialSymbol,
}

impl QuasiSymbol {
    pub fn new(degree: i64, radial: RadialSymbol) -> Self {
        QuasiSymbol { degree, radial }
    }

    pub fn radial(radial: RadialSymbol) -> Self {
        QuasiSymbol { degree: 0, radial }
    }
}

/// One Mellin transform value `f̂(argument) = value`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MellinSample {
    pub argument: Rational,
    pub value: Rational,
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------
//
// Grammar (whitespace allowed between tokens):
//   symbol   := [sign] term { sign term }
//   term     := coeff [ '*' rterm ] | rterm
//   rterm    := 'r' [ '^' exponent ]
//   coeff    := integer [ '/' integer ]
//   exponent := [sign] number | '{' [sign] number '}'
//   number   := integer [ '/' integer ]
// A bare `r` means `r^1`. Negative exponents parse but are rejected with
// `NegativeExponent` so the error carries a position.

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { bytes: text.as_bytes(), pos: 0 }
    }

    fn err(&self, pos: usize, msg: impl Into<String>) -> SymbolError {
        SymbolError::Syntax { pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        Some(b)
    }

    fn expect(&mut self, b: u8) -> Result<(), SymbolError> {
        match self.peek() {
            Some(x) if x == b => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(self.pos, format!("expected '{}'", b as char))),
        }
    }

    fn integer(&mut self) -> Result<BigInt, SymbolError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err(start, "expected digits"));
        }
        let s = std::str::from_utf8(&self.bytes[start..self.pos]).expect("digits are ascii");
        BigInt::from_str(s).map_err(|_| self.err(start, "invalid integer"))
    }

    /// `integer [ '/' integer ]`, the denominator must be nonzero.
    fn number(&mut self) -> Result<Rational, SymbolError> {
        let n = self.integer()?;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            let dpos = self.pos;
            let d = self.integer()?;
            Rational::from_bigints(n, d).map_err(|_| self.err(dpos, "zero denominator"))
        } else {
            Ok(Rational::from_bigints(n, BigInt::from(1)).expect("denominator 1"))
        }
    }

    fn signed_number(&mut self) -> Result<(Rational, usize), SymbolError> {
        self.skip_ws();
        let start = self.pos;
        let mut neg = false;
        match self.peek() {
            Some(b'-') => {
                neg = true;
                self.pos += 1;
            }
            Some(b'+') => {
                self.pos += 1;
            }
            _ => {}
        }
        let n = self.number()?;
        Ok((if neg { -n } else { n }, start))
    }

    /// Exponent after `^`: a possibly braced, possibly signed number.
    fn exponent(&mut self) -> Result<(Rational, usize), SymbolError> {
        if self.peek() == Some(b'{') {
            self.pos += 1;
            let v = self.signed_number()?;
            self.expect(b'}')?;
            Ok(v)
        } else {
            self.signed_number()
        }
    }

    /// `'r' [ '^' exponent ]`
    fn rterm(&mut self) -> Result<Rational, SymbolError> {
        self.expect(b'r')?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let (e, epos) = self.exponent()?;
            if e.is_negative() {
                return Err(SymbolError::NegativeExponent { pos: epos, exponent: e.to_string() });
            }
            Ok(e)
        } else {
            Ok(Rational::one())
        }
    }

    fn term(&mut self) -> Result<(Rational, Rational), SymbolError> {
        match self.peek() {
            Some(b'r') => Ok((Rational::one(), self.rterm()?)),
            Some(b) if b.is_ascii_digit() => {
                let c = self.number()?;
                match self.peek() {
                    Some(b'*') => {
                        self.pos += 1;
                        Ok((c, self.rterm()?))
                    }
                    Some(b'r') => Err(self.err(self.pos, "expected '*' between coefficient and r")),
                    _ => Ok((c, Rational::zero())),
                }
            }
            _ => Err(self.err(self.pos, "expected a term (coefficient or r)")),
        }
    }

    fn symbol(&mut self) -> Result<RadialSymbol, SymbolError> {
        let mut terms = Vec::new();
        let mut sign = Rational::one();
        match self.peek() {
            Some(b'-') => {
                sign = -sign;
                self.pos += 1;
            }
            Some(b'+') => {
                self.pos += 1;
            }
            _ => {}
        }
        loop {
            let (c, e) = self.term()?;
            terms.push((&sign * &c, e));
            match self.peek() {
                None => break,
                Some(b'+') => {
                    sign = Rational::one();
                    self.pos += 1;
                }
                Some(b'-') => {
                    sign = -Rational::one();
                    self.pos += 1;
                }
                Some(_) => return Err(self.err(self.pos, "expected '+', '-' or end of input")),
            }
        }
        RadialSymbol::new(terms)
    }
}

/// Parse a radial symbol from its text form (see the grammar above).
pub fn parse_radial(text: &str) -> Result<RadialSymbol, SymbolError> {
    let mut p = Parser::new(text);
    p.skip_ws();
    if p.bytes.is_empty() || p.pos >= p.bytes.len() {
        return Err(SymbolError::Syntax { pos: 0, msg: "empty input".to_string() });
    }
    p.symbol()
}

// ---------------------------------------------------------------------------
// Mellin transforms
// ---------------------------------------------------------------------------

/// Exact Mellin transform value `f̂(z) = Σ c_j / (z + α_j)`.
///
/// Requires `z > −α_min` (convergence of the integral); every denominator is
/// then strictly positive.
pub fn mellin_eval(f: &RadialSymbol, z: &Rational) -> Result<Rational, SymbolError> {
    if let Some(alpha_min) = f.min_exponent() {
        if !(z + alpha_min).is_positive() {
            return Err(SymbolError::DivergentMellin {
                z: z.to_string(),
                alpha_min: alpha_min.to_string(),
            });
        }
    }
    let mut acc = Rational::zero();
    for (c, e) in f.terms() {
        acc += &(c / &(z + e));
    }
    Ok(acc)
}

/// Numerical Mellin transform via adaptive Simpson quadrature of
/// `∫₀¹ f(r) r^{z−1} dr`, with estimated absolute error ≤ `tol`.
///
/// This is the independent oracle for [`mellin_eval`]: it works pointwise on
/// `f` and never touches the closed form.
pub fn mellin_quadrature(f: &RadialSymbol, z: f64, tol: f64) -> Result<f64, SymbolError> {
    let alpha_min = f.min_exponent().map_or(0.0, Rational::to_f64);
    if !(z > -alpha_min + 1e-9) {
        return Err(SymbolError::DivergentMellin {
            z: format!("{z}"),
            alpha_min: format!("{alpha_min}"),
        });
    }
    if !(tol > 0.0) {
        return Err(SymbolError::NonConvergence { tol });
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    let g = |r: f64| f.eval_f64(r) * r.powf(z - 1.0);
    adaptive_simpson(&g, 0.0, 1.0, tol, 60).ok_or(SymbolError::NonConvergence { tol })
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson(g: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> Option<f64> {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (g(a), g(m), g(b));
    if !(fa.is_finite() && fm.is_finite() && fb.is_finite()) {
        return None;
    }
    let whole = simpson(fa, fm, fb, b - a);
    step(g, a, m, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn step(
    g: &dyn Fn(f64) -> f64,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64> {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (g(lm), g(rm));
    if !(flm.is_finite() && frm.is_finite()) {
        return None;
    }
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let l = step(g, a, lm, m, fa, flm, fm, left, tol / 2.0, depth - 1)?;
    let r = step(g, m, rm, b, fm, frm, fb, right, tol / 2.0, depth - 1)?;
    Some(l + r)
}
