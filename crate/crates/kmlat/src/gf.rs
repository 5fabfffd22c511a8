//! Finite fields F_q, q = p^a, and the quadratic extension F_{q^2}.
//!
//! Elements are stored as an index in `0..q` whose base-p digits are the
//! coefficients of the residue polynomial, lowest degree first. All
//! arithmetic goes through tables built once per field.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use thiserror::Error;

pub const MAX_DEGREE: u32 = 8;
pub const MAX_ORDER: u32 = 512;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("{0} is not prime")]
    NonPrime(u32),
    #[error("degree {0} outside 1..=8")]
    DegreeTooLarge(u32),
    #[error("field order {0} above 512")]
    FieldTooLarge(u64),
    #[error("{0} is not a prime power")]
    NotAPrimePower(u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    SpecMismatch,
}

pub struct FieldSpec {
    p: u32,
    a: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
    // x^2 + e1 x + e0 over F_q, stored as (e0, e1)
    ext: (u16, u16),
}

pub type Field = &'static FieldSpec;

// specs are interned, so identity is pointer identity
impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self, other)
    }
}
impl Eq for FieldSpec {}
impl Hash for FieldSpec {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.q().hash(state)
    }
}
impl PartialOrd for FieldSpec {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FieldSpec {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.p(), self.degree()).cmp(&(other.p(), other.degree()))
    }
}


impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.tag())
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^a`.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let (mut r, mut a) = (q, 0);
    while r % p == 0 {
        r /= p;
        a += 1;
    }
    (r == 1).then_some((p, a))
}

fn registry() -> &'static Mutex<HashMap<(u32, u32), Field>> {
    static REG: OnceLock<Mutex<HashMap<(u32, u32), Field>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Returns the canonical field of order `p^a`. Repeated calls hand back the
/// same `&'static` spec, so elements built from separate calls interoperate.
pub fn make_field(p: u32, a: u32) -> Result<Field, GfError> {
    if !is_prime(p) {
        return Err(GfError::NonPrime(p));
    }
    if a == 0 || a > MAX_DEGREE {
        return Err(GfError::DegreeTooLarge(a));
    }
    let q = (p as u64).pow(a);
    if q > MAX_ORDER as u64 {
        return Err(GfError::FieldTooLarge(q));
    }
    let mut reg = registry().lock().unwrap();
    if let Some(f) = reg.get(&(p, a)) {
        return Ok(f);
    }
    let spec: Field = Box::leak(Box::new(FieldSpec::build(p, a)));
    reg.insert((p, a), spec);
    Ok(spec)
}

pub fn field_of_order(q: u32) -> Result<Field, GfError> {
    let (p, a) = prime_power(q).ok_or(GfError::NotAPrimePower(q))?;
    make_field(p, a)
}

// dense polynomials over F_p, lowest degree first
fn poly_trim(mut v: Vec<u32>) -> Vec<u32> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn poly_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    let mut r = num.to_vec();
    let dl = den.len();
    let lead_inv = mod_inv(*den.last().unwrap(), p);
    while r.len() >= dl {
        let c = r.last().copied().unwrap() * lead_inv % p;
        let shift = r.len() - dl;
        for (i, &d) in den.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p * p - c * d % p) % p;
        }
        r = poly_trim(r);
        if r.is_empty() {
            break;
        }
    }
    r
}

fn mod_inv(x: u32, p: u32) -> u32 {
    (1..p).find(|y| x * y % p == 1).unwrap()
}

fn digits(mut v: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = v % p;
        v /= p;
    }
    out
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Exhaustive factor check: no monic divisor of degree 1..=deg/2.
fn irreducible_over_fp(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        for low in 0..p.pow(d as u32) {
            let mut g = digits(low, p, d);
            g.push(1);
            if poly_rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

fn least_irreducible(p: u32, a: u32) -> Vec<u32> {
    if a == 1 {
        return vec![0, 1];
    }
    // candidates ordered by their low coefficients read as a base-p integer
    (0..p.pow(a))
        .map(|low| {
            let mut f = digits(low, p, a as usize);
            f.push(1);
            f
        })
        .find(|f| irreducible_over_fp(f, p))
        .expect("an irreducible polynomial exists in every degree")
}

impl FieldSpec {
    fn build(p: u32, a: u32) -> FieldSpec {
        let q = p.pow(a);
        let n = a as usize;
        let modulus = least_irreducible(p, a);
        let qs = q as usize;
        let mut add = vec![0u16; qs * qs];
        let mut mul = vec![0u16; qs * qs];
        let mut neg = vec![0u16; qs];
        let digs: Vec<Vec<u32>> = (0..q).map(|v| digits(v, p, n)).collect();
        for x in 0..qs {
            neg[x] = undigits(&digs[x].iter().map(|c| (p - c) % p).collect::<Vec<_>>(), p) as u16;
            for y in 0..qs {
                let s: Vec<u32> = digs[x].iter().zip(&digs[y]).map(|(u, v)| (u + v) % p).collect();
                add[x * qs + y] = undigits(&s, p) as u16;
                let mut prod = vec![0u32; 2 * n];
                for (i, u) in digs[x].iter().enumerate() {
                    for (j, v) in digs[y].iter().enumerate() {
                        prod[i + j] = (prod[i + j] + u * v) % p;
                    }
                }
                let mut r = poly_rem(&poly_trim(prod), &modulus, p);
                r.resize(n, 0);
                mul[x * qs + y] = undigits(&r, p) as u16;
            }
        }
        let mut inv = vec![0u16; qs];
        for x in 1..qs {
            inv[x] = (1..qs).find(|&y| mul[x * qs + y] == 1).unwrap() as u16;
        }
        let mut spec = FieldSpec { p, a, q, modulus, add, mul, neg, inv, ext: (0, 0) };
        spec.ext = spec.least_ext_modulus();
        spec
    }

    // least (e1, e0) in the order e1*q + e0 with x^2 + e1 x + e0 rootless
    fn least_ext_modulus(&self) -> (u16, u16) {
        let q = self.q as u16;
        for e1 in 0..q {
            for e0 in 0..q {
                let has_root = (0..q).any(|x| {
                    let xx = self.m(x, x);
                    self.s(self.s(xx, self.m(e1, x)), e0) == 0
                });
                if !has_root {
                    return (e0, e1);
                }
            }
        }
        unreachable!("quadratic irreducibles exist over every finite field")
    }

    #[inline]
    pub(crate) fn s(&self, x: u16, y: u16) -> u16 {
        self.add[x as usize * self.q as usize + y as usize]
    }

    #[inline]
    pub(crate) fn m(&self, x: u16, y: u16) -> u16 {
        self.mul[x as usize * self.q as usize + y as usize]
    }

    #[inline]
    pub(crate) fn n(&self, x: u16) -> u16 {
        self.neg[x as usize]
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.a
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Modulus coefficients, lowest degree first, including the leading 1.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Coefficients `[e0, e1, 1]` of the quadratic defining F_{q^2}.
    pub fn ext_modulus(&'static self) -> [FieldElement; 3] {
        [self.elem(self.ext.0 as u32), self.elem(self.ext.1 as u32), self.one()]
    }

    /// Serialized form `p^a/c0,c1,...`.
    pub fn tag(&self) -> String {
        let coeffs: Vec<String> = self.modulus.iter().map(|c| c.to_string()).collect();
        format!("{}^{}/{}", self.p, self.a, coeffs.join(","))
    }

    pub fn q_mod4(&self) -> QMod4 {
        if self.p == 2 {
            QMod4::Even
        } else if self.q % 4 == 1 {
            QMod4::One
        } else {
            QMod4::Three
        }
    }

    pub fn elem(&'static self, v: u32) -> FieldElement {
        assert!(v < self.q, "{v} is not an element index of GF({})", self.q);
        FieldElement { field: self, v: v as u16 }
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&'static self, n: i64) -> FieldElement {
        self.elem(n.rem_euclid(self.p as i64) as u32)
    }

    pub fn zero(&'static self) -> FieldElement {
        self.elem(0)
    }

    pub fn one(&'static self) -> FieldElement {
        self.elem(1)
    }

    pub fn elements(&'static self) -> impl Iterator<Item = FieldElement> + Clone {
        (0..self.q).map(move |v| self.elem(v))
    }

    pub fn nonzero(&'static self) -> impl Iterator<Item = FieldElement> + Clone {
        (1..self.q).map(move |v| self.elem(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum QMod4 {
    #[serde(rename = "even")]
    Even,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "3")]
    Three,
}

#[derive(Clone, Copy)]
pub struct FieldElement {
    field: Field,
    v: u16,
}

impl FieldElement {
    pub fn field(&self) -> Field {
        self.field
    }

    pub fn value(&self) -> u32 {
        self.v as u32
    }

    pub fn is_zero(&self) -> bool {
        self.v == 0
    }

    pub fn is_one(&self) -> bool {
        self.v == 1
    }

    pub fn coeffs(&self) -> Vec<u32> {
        digits(self.v as u32, self.field.p, self.field.a as usize)
    }

    fn same(&self, other: &Self) -> Result<(), GfError> {
        if std::ptr::eq(self.field, other.field) {
            Ok(())
        } else {
            Err(GfError::SpecMismatch)
        }
    }

    pub fn checked_add(self, other: Self) -> Result<Self, GfError> {
        self.same(&other)?;
        Ok(FieldElement { field: self.field, v: self.field.s(self.v, other.v) })
    }

    pub fn checked_mul(self, other: Self) -> Result<Self, GfError> {
        self.same(&other)?;
        Ok(FieldElement { field: self.field, v: self.field.m(self.v, other.v) })
    }

    pub fn inv(self) -> Result<Self, GfError> {
        if self.v == 0 {
            return Err(GfError::DivisionByZero);
        }
        Ok(FieldElement { field: self.field, v: self.field.inv[self.v as usize] })
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Signed exponent; negative powers of zero are an error.
    pub fn powi(self, e: i64) -> Result<Self, GfError> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inv()?.pow(e.unsigned_abs()))
        }
    }

    pub fn frobenius(self) -> Self {
        self.pow(self.field.p as u64)
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.v == other.v && std::ptr::eq(self.field, other.field)
    }
}

impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.v.hash(state);
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.field.q, self.v).cmp(&(other.field.q, other.v))
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

// Operators panic on mixed fields; the checked_* forms report it instead.
impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(rhs).expect("field mismatch")
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(rhs).expect("field mismatch")
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> Self {
        FieldElement { field: self.field, v: self.field.neg[self.v as usize] }
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

/// `a + b*w` in F_{q^2} where w is a root of the field's `ext_modulus`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ExtElement {
    pub a: FieldElement,
    pub b: FieldElement,
}

impl ExtElement {
    pub fn new(a: FieldElement, b: FieldElement) -> Self {
        assert!(std::ptr::eq(a.field, b.field), "field mismatch");
        ExtElement { a, b }
    }

    pub fn one(field: Field) -> Self {
        ExtElement { a: field.one(), b: field.zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn mul(self, o: Self) -> Self {
        let f = self.a.field;
        let (e0, e1) = (f.elem(f.ext.0 as u32), f.elem(f.ext.1 as u32));
        // w^2 = -e1 w - e0
        let bd = self.b * o.b;
        ExtElement {
            a: self.a * o.a - bd * e0,
            b: self.a * o.b + self.b * o.a - bd * e1,
        }
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = ExtElement::one(self.a.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }

    /// Norm to F_q, computed from the closed form `a^2 - ab e1 + b^2 e0`.
    pub fn norm(self) -> FieldElement {
        let f = self.a.field;
        let (e0, e1) = (f.elem(f.ext.0 as u32), f.elem(f.ext.1 as u32));
        self.a * self.a - self.a * self.b * e1 + self.b * self.b * e0
    }

    /// Matrix `[[a, -b e0], [b, a - b e1]]` of multiplication by this element
    /// on the basis {1, w}, entries in row-major order.
    pub fn mult_matrix(self) -> [FieldElement; 4] {
        let f = self.a.field;
        let (e0, e1) = (f.elem(f.ext.0 as u32), f.elem(f.ext.1 as u32));
        [self.a, -(self.b * e0), self.b, self.a - self.b * e1]
    }
}

/// The q+1 elements of norm 1 in F_{q^2}, ordered by (b, a).
pub fn norm1_subgroup(field: Field) -> Vec<ExtElement> {
    let mut out: Vec<ExtElement> = field
        .elements()
        .flat_map(|b| field.elements().map(move |a| ExtElement { a, b }))
        .filter(|z| z.norm().is_one())
        .collect();
    out.sort_by_key(|z| (z.b.value(), z.a.value()));
    out
}

/// A generator of the cyclic norm-1 group.
pub fn norm1_generator(field: Field) -> ExtElement {
    let n = field.q() as u64 + 1;
    let divisors: Vec<u64> = (1..n).filter(|d| n % d == 0).collect();
    norm1_subgroup(field)
        .into_iter()
        .find(|z| divisors.iter().all(|&d| z.pow(d) != ExtElement::one(field)))
        .expect("norm-1 group is cyclic")
}
