//! Laurent polynomials over F_q in the uniformizer pi = 1/t, and truncated
//! power series in pi.
//!
//! Degrees are always pi-degrees: `t` is the monomial of pi-degree -1.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use thiserror::Error;

use crate::gf::{Field, FieldElement};

/// Exact polynomials may not leave the pi-degree window `[-256, 256]`.
pub const DEGREE_CAP: i32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LaurentError {
    #[error("pi-degree {0} outside the window [-256, 256]")]
    DegreeWindowExceeded(i32),
    #[error("valuation {0:?} is not zero, so the series is not a unit")]
    NotAUnit(Option<i32>),
    #[error("series is zero to its precision {0}")]
    PrecisionExhausted(i32),
    #[error("operands belong to different fields")]
    SpecMismatch,
    #[error("cannot parse {0:?}")]
    Parse(String),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentPoly {
    field: Field,
    coeffs: BTreeMap<i32, FieldElement>,
}

fn check_window(d: i32) -> Result<(), LaurentError> {
    if d.abs() > DEGREE_CAP {
        Err(LaurentError::DegreeWindowExceeded(d))
    } else {
        Ok(())
    }
}

impl LaurentPoly {
    pub fn zero(field: Field) -> Self {
        LaurentPoly { field, coeffs: BTreeMap::new() }
    }

    pub fn one(field: Field) -> Self {
        Self::constant(field.one())
    }

    pub fn constant(c: FieldElement) -> Self {
        Self::monomial(c, 0)
    }

    /// `c * pi^deg`. Panics outside the degree window.
    pub fn monomial(c: FieldElement, deg: i32) -> Self {
        check_window(deg).expect("monomial degree");
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(deg, c);
        }
        LaurentPoly { field: c.field(), coeffs }
    }

    pub fn t(field: Field) -> Self {
        Self::monomial(field.one(), -1)
    }

    pub fn pi(field: Field) -> Self {
        Self::monomial(field.one(), 1)
    }

    /// Builds from `(pi-degree, coefficient)` pairs; repeated degrees add up.
    pub fn from_terms(field: Field, terms: &[(i32, FieldElement)]) -> Result<Self, LaurentError> {
        let mut out = Self::zero(field);
        for &(d, c) in terms {
            check_window(d)?;
            if !std::ptr::eq(c.field(), field) {
                return Err(LaurentError::SpecMismatch);
            }
            out.add_term(d, c);
        }
        Ok(out)
    }

    fn add_term(&mut self, d: i32, c: FieldElement) {
        let cur = self.coeff(d);
        let s = cur + c;
        if s.is_zero() {
            self.coeffs.remove(&d);
        } else {
            self.coeffs.insert(d, s);
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn coeff(&self, d: i32) -> FieldElement {
        self.coeffs.get(&d).copied().unwrap_or(self.field.zero())
    }

    /// Nonzero terms in increasing pi-degree.
    pub fn terms(&self) -> impl Iterator<Item = (i32, FieldElement)> + '_ {
        self.coeffs.iter().map(|(&d, &c)| (d, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeff(0).is_one()
    }

    /// Least pi-degree with nonzero coefficient; `None` stands for +infinity.
    pub fn valuation(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn as_constant(&self) -> Option<FieldElement> {
        match self.coeffs.len() {
            0 => Some(self.field.zero()),
            1 => self.coeffs.get(&0).copied(),
            _ => None,
        }
    }

    pub fn as_monomial(&self) -> Option<(i32, FieldElement)> {
        (self.coeffs.len() == 1).then(|| self.terms().next().unwrap())
    }

    pub fn scale(&self, c: FieldElement) -> Self {
        let mut out = Self::zero(self.field);
        if c.is_zero() {
            return out;
        }
        for (d, x) in self.terms() {
            out.coeffs.insert(d, x * c);
        }
        out
    }

    /// Multiplication by `pi^k`.
    pub fn shift(&self, k: i32) -> Result<Self, LaurentError> {
        let mut out = Self::zero(self.field);
        for (d, c) in self.terms() {
            check_window(d + k)?;
            out.coeffs.insert(d + k, c);
        }
        Ok(out)
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self, LaurentError> {
        if !std::ptr::eq(self.field, o.field) {
            return Err(LaurentError::SpecMismatch);
        }
        let mut out = self.clone();
        for (d, c) in o.terms() {
            out.add_term(d, c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self, LaurentError> {
        if !std::ptr::eq(self.field, o.field) {
            return Err(LaurentError::SpecMismatch);
        }
        let mut out = Self::zero(self.field);
        for (d1, c1) in self.terms() {
            for (d2, c2) in o.terms() {
                check_window(d1 + d2)?;
                out.add_term(d1 + d2, c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<Self, LaurentError> {
        let mut acc = Self::one(self.field);
        for _ in 0..e {
            acc = acc.try_mul(self)?;
        }
        Ok(acc)
    }

    /// Exact quotient in F_q[pi, 1/pi], or `None` when `d` does not divide.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let (dv, dtop) = (d.valuation()?, d.max_degree()?);
        if self.is_zero() {
            return Some(Self::zero(self.field));
        }
        let lead_inv = d.coeff(dtop).inv().ok()?;
        let mut rem = self.clone();
        let mut quot = Self::zero(self.field);
        // cancel from the top degree down; stop once the remainder sits below d's span
        while let Some(top) = rem.max_degree() {
            if top - dtop < rem.valuation().unwrap() - dv {
                return None;
            }
            let k = top - dtop;
            check_window(k).ok()?;
            let c = rem.coeff(top) * lead_inv;
            quot.add_term(k, c);
            for (e, x) in d.terms() {
                check_window(e + k).ok()?;
                rem.add_term(e + k, -(x * c));
            }
        }
        Some(quot)
    }

    /// Substitutes `t -> -t`, i.e. flips the sign of odd-degree terms.
    pub fn reflect(&self) -> Self {
        let mut out = Self::zero(self.field);
        for (d, c) in self.terms() {
            out.coeffs.insert(d, if d % 2 == 0 { c } else { -c });
        }
        out
    }

    pub fn parse(field: Field, s: &str) -> Result<Self, LaurentError> {
        let err = || LaurentError::Parse(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err());
        }
        let mut pieces: Vec<String> = Vec::new();
        let mut cur = String::new();
        let mut prev = ' ';
        for ch in compact.chars() {
            if (ch == '+' || ch == '-') && prev != '^' && !cur.is_empty() {
                pieces.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
            prev = ch;
        }
        pieces.push(cur);
        let mut out = Self::zero(field);
        for piece in pieces {
            let (neg, body) = match piece.strip_prefix('-') {
                Some(b) => (true, b),
                None => (false, piece.strip_prefix('+').unwrap_or(&piece)),
            };
            let (coef_str, var) = match body.find(|c| c == 't' || c == 'p') {
                Some(i) => (body[..i].trim_end_matches('*'), Some(&body[i..])),
                None => (body, None),
            };
            let mut c = if coef_str.is_empty() {
                field.one()
            } else {
                let n: u32 = coef_str.parse().map_err(|_| err())?;
                if n >= field.q() {
                    return Err(err());
                }
                field.elem(n)
            };
            if neg {
                c = -c;
            }
            let deg = match var {
                None => 0,
                Some(v) => {
                    let (name, exp) = match v.split_once('^') {
                        Some((n, e)) => (n, e.parse::<i32>().map_err(|_| err())?),
                        None => (v, 1),
                    };
                    match name {
                        "t" => -exp,
                        "pi" => exp,
                        _ => return Err(err()),
                    }
                }
            };
            check_window(deg)?;
            out.add_term(deg, c);
        }
        Ok(out)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (d, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let tdeg = -d;
            match (tdeg, c.is_one()) {
                (0, _) => write!(f, "{c}")?,
                (1, true) => write!(f, "t")?,
                (1, false) => write!(f, "{c}*t")?,
                (k, true) => write!(f, "t^{k}")?,
                (k, false) => write!(f, "{c}*t^{k}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: Self) -> LaurentPoly {
        self.checked_add(rhs).expect("field mismatch")
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: Self) -> LaurentPoly {
        &self + &rhs
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(-self.field.one())
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: Self) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: Self) -> LaurentPoly {
        &self - &rhs
    }
}

/// A power series in pi known modulo `pi^precision`. Coefficients cover the
/// degrees `start..precision`.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    field: Field,
    start: i32,
    coeffs: Vec<FieldElement>,
    precision: i32,
}

impl TruncatedSeries {
    fn new(field: Field, start: i32, precision: i32, mut coeffs: Vec<FieldElement>) -> Self {
        let len = (precision - start).max(0) as usize;
        coeffs.resize(len, field.zero());
        // drop leading zeros so start is the valuation when nonzero
        let lead = coeffs.iter().position(|c| !c.is_zero()).unwrap_or(len);
        let start = start + lead as i32;
        coeffs.drain(..lead);
        TruncatedSeries { field, start: start.min(precision), coeffs, precision }
    }

    pub fn precision(&self) -> i32 {
        self.precision
    }

    pub fn coeff(&self, d: i32) -> FieldElement {
        if d < self.start || d >= self.precision {
            return self.field.zero();
        }
        self.coeffs[(d - self.start) as usize]
    }

    pub fn valuation(&self) -> Result<i32, LaurentError> {
        if self.coeffs.is_empty() {
            Err(LaurentError::PrecisionExhausted(self.precision))
        } else {
            Ok(self.start)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Congruent to 1 modulo `pi^precision`.
    pub fn is_one(&self) -> bool {
        (self.start.min(0)..self.precision).all(|d| {
            let c = self.coeff(d);
            if d == 0 { c.is_one() } else { c.is_zero() }
        })
    }

    /// The known part as an exact polynomial.
    pub fn to_poly(&self) -> LaurentPoly {
        let terms: Vec<_> = (self.start..self.precision).map(|d| (d, self.coeff(d))).collect();
        LaurentPoly::from_terms(self.field, &terms).expect("window")
    }

    /// Product; the precision is what both factors actually determine.
    pub fn mul(&self, o: &Self) -> Self {
        let prec = (self.precision + o.start).min(o.precision + self.start);
        let start = self.start + o.start;
        let mut out = vec![self.field.zero(); (prec - start).max(0) as usize];
        for (i, &x) in self.coeffs.iter().enumerate() {
            for (j, &y) in o.coeffs.iter().enumerate() {
                let d = start + (i + j) as i32;
                if d < prec {
                    out[(d - start) as usize] = out[(d - start) as usize] + x * y;
                }
            }
        }
        Self::new(self.field, start, prec, out)
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O(t^{})", self.to_poly(), -self.precision)
    }
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Truncation of `x` to pi-degrees below `n`.
pub fn reduce_mod(x: &LaurentPoly, n: i32) -> TruncatedSeries {
    let start = x.valuation().unwrap_or(n).min(n);
    let coeffs = (start..n).map(|d| x.coeff(d)).collect();
    TruncatedSeries::new(x.field(), start, n, coeffs)
}

/// Inverse of a unit of F_q[[pi]] modulo `pi^n`.
pub fn unit_inverse_mod(u: &LaurentPoly, n: i32) -> Result<TruncatedSeries, LaurentError> {
    if u.valuation() != Some(0) {
        return Err(LaurentError::NotAUnit(u.valuation()));
    }
    let field = u.field();
    let u0_inv = u.coeff(0).inv().expect("unit");
    let mut r: Vec<FieldElement> = Vec::with_capacity(n.max(0) as usize);
    for k in 0..n {
        if k == 0 {
            r.push(u0_inv);
            continue;
        }
        let mut s = field.zero();
        for j in 1..=k {
            s = s + u.coeff(j) * r[(k - j) as usize];
        }
        r.push(-(u0_inv * s));
    }
    Ok(TruncatedSeries::new(field, 0, n, r))
}
