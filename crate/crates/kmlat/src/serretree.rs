//! 2x2 matrices over F_q[t, 1/t] and Serre's tree of lattice classes.
//!
//! A vertex is the class of `rep * O^2` with O = F_q[[pi]]. Two vertices are
//! compared through the elementary divisors of `adj(rep_u) * rep_v`, so no
//! canonical form or series division is ever needed.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::gf::{Field, FieldElement};
use crate::laurent::{LaurentError, LaurentPoly};
use crate::par::{self, Exec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SerreError {
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error("determinant {0} is not a nonzero monomial")]
    NonInvertible(String),
    #[error("determinant is zero")]
    ZeroDeterminant,
    #[error("characteristic {0} is odd; involution families need p = 2")]
    OddCharacteristic(u32),
    #[error("degree window {0} exceeds 3")]
    WindowTooLarge(u32),
    #[error("cannot parse matrix {0:?}")]
    Parse(String),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat2 {
    pub a: LaurentPoly,
    pub b: LaurentPoly,
    pub c: LaurentPoly,
    pub d: LaurentPoly,
}

impl Mat2 {
    pub fn new(a: LaurentPoly, b: LaurentPoly, c: LaurentPoly, d: LaurentPoly) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity(field: Field) -> Self {
        Self::diag(LaurentPoly::one(field), LaurentPoly::one(field))
    }

    pub fn diag(a: LaurentPoly, d: LaurentPoly) -> Self {
        let z = LaurentPoly::zero(a.field());
        Mat2 { a, b: z.clone(), c: z, d }
    }

    pub fn from_consts(e: [FieldElement; 4]) -> Self {
        let [a, b, c, d] = e.map(LaurentPoly::constant);
        Mat2 { a, b, c, d }
    }

    /// `[[1, u], [0, 1]]`
    pub fn upper(u: LaurentPoly) -> Self {
        let f = u.field();
        Mat2 { a: LaurentPoly::one(f), b: u, c: LaurentPoly::zero(f), d: LaurentPoly::one(f) }
    }

    /// `[[1, 0], [u, 1]]`
    pub fn lower(u: LaurentPoly) -> Self {
        let f = u.field();
        Mat2 { a: LaurentPoly::one(f), b: LaurentPoly::zero(f), c: u, d: LaurentPoly::one(f) }
    }

    /// `diag(t, 1)`, the conjugator taking x1 to x2.
    pub fn delta(field: Field) -> Self {
        Self::diag(LaurentPoly::t(field), LaurentPoly::one(field))
    }

    pub fn field(&self) -> Field {
        self.a.field()
    }

    pub fn entries(&self) -> [&LaurentPoly; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn mul(&self, o: &Self) -> Result<Self, SerreError> {
        let m = |x: &LaurentPoly, y: &LaurentPoly, z: &LaurentPoly, w: &LaurentPoly| -> Result<LaurentPoly, SerreError> {
            Ok(&x.try_mul(y)? + &z.try_mul(w)?)
        };
        Ok(Mat2 {
            a: m(&self.a, &o.a, &self.b, &o.c)?,
            b: m(&self.a, &o.b, &self.b, &o.d)?,
            c: m(&self.c, &o.a, &self.d, &o.c)?,
            d: m(&self.c, &o.b, &self.d, &o.d)?,
        })
    }

    pub fn det(&self) -> Result<LaurentPoly, SerreError> {
        Ok(&self.a.try_mul(&self.d)? - &self.b.try_mul(&self.c)?)
    }

    pub fn adjugate(&self) -> Self {
        Mat2 { a: self.d.clone(), b: -&self.b, c: -&self.c, d: self.a.clone() }
    }

    /// Inverse by adjugate over a monomial determinant.
    pub fn inv(&self) -> Result<Self, SerreError> {
        let det = self.det()?;
        let (k, c) = det.as_monomial().ok_or_else(|| SerreError::NonInvertible(det.to_string()))?;
        let ci = c.inv().expect("nonzero");
        let adj = self.adjugate();
        let f = |x: &LaurentPoly| -> Result<LaurentPoly, SerreError> { Ok(x.shift(-k)?.scale(ci)) };
        Ok(Mat2 { a: f(&adj.a)?, b: f(&adj.b)?, c: f(&adj.c)?, d: f(&adj.d)? })
    }

    pub fn conj(&self, g: &Self) -> Result<Self, SerreError> {
        g.mul(self)?.mul(&g.inv()?)
    }

    pub fn pow(&self, e: u32) -> Result<Self, SerreError> {
        let mut acc = Mat2::identity(self.field());
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.d.is_one() && self.b.is_zero() && self.c.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.entries().iter().all(|e| e.as_constant().is_some())
    }

    pub fn min_valuation(&self) -> Option<i32> {
        self.entries().iter().filter_map(|e| e.valuation()).min()
    }

    /// Parses `"a,b;c,d"` with Laurent entries.
    pub fn parse(field: Field, s: &str) -> Result<Self, SerreError> {
        let err = || SerreError::Parse(s.to_string());
        let rows: Vec<&str> = s.split(';').collect();
        if rows.len() != 2 {
            return Err(err());
        }
        let mut e = Vec::new();
        for r in rows {
            let cols: Vec<&str> = r.split(',').collect();
            if cols.len() != 2 {
                return Err(err());
            }
            for c in cols {
                e.push(LaurentPoly::parse(field, c).map_err(|_| err())?);
            }
        }
        let mut it = e.into_iter();
        Ok(Mat2 {
            a: it.next().unwrap(),
            b: it.next().unwrap(),
            c: it.next().unwrap(),
            d: it.next().unwrap(),
        })
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{};{},{}", self.a, self.b, self.c, self.d)
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self)
    }
}

impl Serialize for Mat2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ParahoricKind {
    P1,
    P2,
    B,
    U(u32),
}

fn v_at_least(x: &LaurentPoly, n: i32) -> bool {
    x.valuation().map_or(true, |v| v >= n)
}

/// Membership of a determinant-1 matrix; anything else is reported as outside.
pub fn membership(m: &Mat2, kind: ParahoricKind) -> bool {
    match m.det() {
        Ok(d) if d.is_one() => {}
        _ => return false,
    }
    let one = LaurentPoly::one(m.field());
    match kind {
        ParahoricKind::P1 => m.entries().iter().all(|e| v_at_least(e, 0)),
        ParahoricKind::P2 => {
            v_at_least(&m.a, 0) && v_at_least(&m.d, 0) && v_at_least(&m.b, -1) && v_at_least(&m.c, 1)
        }
        ParahoricKind::B => membership(m, ParahoricKind::P1) && v_at_least(&m.c, 1),
        ParahoricKind::U(n) => {
            let n = n as i32;
            v_at_least(&(&m.a - &one), n)
                && v_at_least(&(&m.d - &one), n)
                && v_at_least(&m.b, n)
                && v_at_least(&m.c, n)
        }
    }
}

/// `(r, s)`: r is the least entry valuation and s = v(det) - r.
pub fn elementary_divisor_valuations(m: &Mat2) -> Result<(i32, i32), SerreError> {
    let det = m.det()?;
    let vd = det.valuation().ok_or(SerreError::ZeroDeterminant)?;
    let r = m.min_valuation().expect("nonzero determinant has a nonzero entry");
    Ok((r, vd - r))
}

#[derive(Clone)]
pub struct Vertex {
    pub rep: Mat2,
}

impl Vertex {
    pub fn new(rep: Mat2) -> Result<Self, SerreError> {
        if rep.det()?.is_zero() {
            return Err(SerreError::ZeroDeterminant);
        }
        Ok(Vertex { rep })
    }

    pub fn x1(field: Field) -> Self {
        Vertex { rep: Mat2::identity(field) }
    }

    pub fn x2(field: Field) -> Self {
        Vertex { rep: Mat2::diag(LaurentPoly::one(field), LaurentPoly::pi(field)) }
    }

    pub fn same_as(&self, o: &Vertex) -> Result<bool, SerreError> {
        Ok(vertex_distance(self, o)? == 0)
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.rep)
    }
}

impl Serialize for Vertex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.rep.serialize(s)
    }
}

/// Tree distance. Scaling by det(rep_u) does not move a lattice class, so the
/// adjugate stands in for the inverse.
pub fn vertex_distance(u: &Vertex, v: &Vertex) -> Result<u32, SerreError> {
    let m = u.rep.adjugate().mul(&v.rep)?;
    let (r, s) = elementary_divisor_valuations(&m)?;
    Ok((s - r) as u32)
}

/// The q+1 neighbours: `rep * [[pi, j], [0, 1]]` for j in F_q, then `rep * diag(1, pi)`.
pub fn neighbors(v: &Vertex) -> Result<Vec<Vertex>, SerreError> {
    let f = v.rep.field();
    let mut out = Vec::with_capacity(f.q() as usize + 1);
    for j in f.elements() {
        let n = Mat2::new(
            LaurentPoly::pi(f),
            LaurentPoly::constant(j),
            LaurentPoly::zero(f),
            LaurentPoly::one(f),
        );
        out.push(Vertex { rep: v.rep.mul(&n)? });
    }
    out.push(Vertex { rep: v.rep.mul(&Mat2::diag(LaurentPoly::one(f), LaurentPoly::pi(f)))? });
    Ok(out)
}

pub fn act(g: &Mat2, v: &Vertex) -> Result<Vertex, SerreError> {
    Ok(Vertex { rep: g.mul(&v.rep)? })
}

#[derive(Clone, Debug, Serialize)]
pub struct Edge {
    pub u: Vertex,
    pub v: Vertex,
}

impl Edge {
    pub fn new(u: Vertex, v: Vertex) -> Result<Self, SerreError> {
        if vertex_distance(&u, &v)? != 1 {
            return Err(SerreError::Parse("edge endpoints are not adjacent".into()));
        }
        Ok(Edge { u, v })
    }

    pub fn base(field: Field) -> Self {
        Edge { u: Vertex::x1(field), v: Vertex::x2(field) }
    }

    /// Ordered comparison of endpoints.
    pub fn same_as(&self, o: &Edge) -> Result<bool, SerreError> {
        Ok(self.u.same_as(&o.u)? && self.v.same_as(&o.v)?)
    }

    /// Comparison as an unordered pair.
    pub fn same_unordered(&self, o: &Edge) -> Result<bool, SerreError> {
        Ok(self.same_as(o)? || (self.u.same_as(&o.v)? && self.v.same_as(&o.u)?))
    }
}

pub fn act_edge(g: &Mat2, e: &Edge) -> Result<Edge, SerreError> {
    Ok(Edge { u: act(g, &e.u)?, v: act(g, &e.v)? })
}

/// Edge distance: 0 for the same edge, otherwise one more than the least
/// vertex distance between the two edges.
pub fn edge_distance(e: &Edge, f: &Edge) -> Result<u32, SerreError> {
    if e.same_unordered(f)? {
        return Ok(0);
    }
    let mut best = u32::MAX;
    for x in [&e.u, &e.v] {
        for y in [&f.u, &f.v] {
            best = best.min(vertex_distance(x, y)?);
        }
    }
    Ok(best + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InvolutionRegion {
    B,
    P1MinusB,
    P2MinusB,
}

// every polynomial with support in pi-degrees lo..=hi
fn window_polys(field: Field, lo: i32, hi: i32) -> Vec<LaurentPoly> {
    let q = field.q() as u64;
    let len = (hi - lo + 1) as u32;
    (0..q.pow(len))
        .map(|mut n| {
            let mut terms = Vec::new();
            for d in lo..=hi {
                terms.push((d, field.elem((n % q) as u32)));
                n /= q;
            }
            LaurentPoly::from_terms(field, &terms).unwrap()
        })
        .collect()
}

fn within(x: &LaurentPoly, lo: i32, hi: i32) -> bool {
    x.valuation().map_or(true, |v| v >= lo) && x.max_degree().map_or(true, |d| d <= hi)
}

/// Involutions of the given region with entries supported in pi-degrees
/// `0..=window` (`-1..=window` for the t-part of a P2 entry).
pub fn involution_families(
    field: Field,
    region: InvolutionRegion,
    window: u32,
) -> Result<Vec<Mat2>, SerreError> {
    if field.p() != 2 {
        return Err(SerreError::OddCharacteristic(field.p()));
    }
    let w = window as i32;
    let one = LaurentPoly::one(field);
    let v = |x: &LaurentPoly| x.valuation().unwrap_or(i32::MAX);
    // balanced family [[a, b], [c, a]] with a^2 + bc = 1 and b determined by (a, c)
    let balanced = |c_ok: &dyn Fn(&LaurentPoly) -> bool, b_lo: i32, b_ok: &dyn Fn(&LaurentPoly) -> bool| {
        let mut out = Vec::new();
        for a in window_polys(field, 0, w) {
            let s = &a + &one;
            let num = s.try_mul(&s).unwrap();
            for c in window_polys(field, 0, w) {
                if c.is_zero() || !c_ok(&c) {
                    continue;
                }
                if let Some(b) = num.div_exact(&c) {
                    if !b.is_zero() && within(&b, b_lo, w) && b_ok(&b) {
                        out.push(Mat2::new(a.clone(), b, c.clone(), a.clone()));
                    }
                }
            }
        }
        out
    };
    let mut out = Vec::new();
    match region {
        InvolutionRegion::B => {
            for b in window_polys(field, 0, w).into_iter().filter(|b| !b.is_zero()) {
                out.push(Mat2::upper(b));
            }
            for c in window_polys(field, 1, w).into_iter().filter(|c| !c.is_zero()) {
                out.push(Mat2::lower(c));
            }
            out.extend(balanced(&|c| v(c) >= 1, 0, &|_| true));
        }
        InvolutionRegion::P1MinusB => {
            for c in window_polys(field, 0, w).into_iter().filter(|c| v(c) == 0) {
                out.push(Mat2::lower(c));
            }
            out.extend(balanced(&|c| v(c) == 0, 0, &|_| true));
        }
        InvolutionRegion::P2MinusB => {
            for b in window_polys(field, -1, w).into_iter().filter(|b| v(b) == -1) {
                out.push(Mat2::upper(b));
            }
            out.extend(balanced(&|c| v(c) >= 1, -1, &|b| v(b) == -1));
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct DihedralReport {
    pub field: String,
    pub window: u32,
    pub b_involutions: usize,
    pub p1_minus_b_involutions: usize,
    pub p2_minus_b_involutions: usize,
    pub triples_checked: u64,
    /// `(s, gamma1, gamma2)` with both conjugates landing in the forbidden regions.
    pub violations: Vec<(Mat2, Mat2, Mat2)>,
}

fn in_p1_minus_b(m: &Mat2) -> bool {
    membership(m, ParahoricKind::P1) && !membership(m, ParahoricKind::B)
}

fn in_p2_minus_b(m: &Mat2) -> bool {
    membership(m, ParahoricKind::P2) && !membership(m, ParahoricKind::B)
}

pub fn dihedral_obstruction_search(field: Field, window: u32) -> Result<DihedralReport, SerreError> {
    dihedral_obstruction_search_with(Exec::default(), field, window)
}

pub fn dihedral_obstruction_search_with(
    exec: Exec,
    field: Field,
    window: u32,
) -> Result<DihedralReport, SerreError> {
    if window > 3 {
        return Err(SerreError::WindowTooLarge(window));
    }
    let bs = involution_families(field, InvolutionRegion::B, window)?;
    let g1s = involution_families(field, InvolutionRegion::P1MinusB, window)?;
    let g2s = involution_families(field, InvolutionRegion::P2MinusB, window)?;
    // the two conditions are independent, so test them separately per s
    let violations = par::flat_map(exec, &bs, |s| {
        let hits1: Vec<&Mat2> = g1s
            .iter()
            .filter(|g| s.conj(g).map(|m| in_p1_minus_b(&m)).unwrap_or(false))
            .collect();
        if hits1.is_empty() {
            return Vec::new();
        }
        let hits2: Vec<&Mat2> = g2s
            .iter()
            .filter(|g| s.conj(g).map(|m| in_p2_minus_b(&m)).unwrap_or(false))
            .collect();
        let mut out = Vec::new();
        for g1 in &hits1 {
            for g2 in &hits2 {
                out.push((s.clone(), (*g1).clone(), (*g2).clone()));
            }
        }
        out
    });
    Ok(DihedralReport {
        field: field.tag(),
        window,
        b_involutions: bs.len(),
        p1_minus_b_involutions: g1s.len(),
        p2_minus_b_involutions: g2s.len(),
        triples_checked: (bs.len() * g1s.len() * g2s.len()) as u64,
        violations,
    })
}

/// Checks `g [[1,b],[0,1]] g = [[1+beg, be^2], [bg^2, 1+beg]]` for `g = [[e,f],[g,e]]`.
pub fn conjugation_identity_holds(gamma: &Mat2, b: &LaurentPoly) -> Result<bool, SerreError> {
    let (e, g) = (&gamma.a, &gamma.c);
    let lhs = gamma.mul(&Mat2::upper(b.clone()))?.mul(gamma)?;
    let one = LaurentPoly::one(b.field());
    let beg = b.try_mul(e)?.try_mul(g)?;
    let diag = &one + &beg;
    let rhs = Mat2::new(
        diag.clone(),
        b.try_mul(&e.try_mul(e)?)?,
        b.try_mul(&g.try_mul(g)?)?,
        diag,
    );
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_field;

    fn m(f: Field, s: &str) -> Mat2 {
        Mat2::parse(f, s).unwrap()
    }

    #[test]
    fn inverse_and_det() {
        let f = make_field(3, 1).unwrap();
        assert!(Mat2::identity(f).inv().unwrap().is_identity());
        assert_eq!(m(f, "1,t;0,1").inv().unwrap(), m(f, "1,2*t;0,1"));
        assert!(m(f, "t,0;0,t^-1").det().unwrap().is_one());
        assert!(matches!(m(f, "1+t,0;0,1").inv(), Err(SerreError::NonInvertible(_))));
        let d = Mat2::delta(f);
        assert!(d.mul(&d.inv().unwrap()).unwrap().is_identity());
    }

    #[test]
    fn membership_examples() {
        let f = make_field(2, 1).unwrap();
        let u = m(f, "1,t;0,1");
        assert!(membership(&u, ParahoricKind::P2) && !membership(&u, ParahoricKind::P1));
        let l = m(f, "1,0;1,1");
        assert!(membership(&l, ParahoricKind::P1) && !membership(&l, ParahoricKind::B));
        let c = m(f, "1,t^-2;0,1");
        assert!(membership(&c, ParahoricKind::U(2)) && !membership(&c, ParahoricKind::U(3)));
    }

    #[test]
    fn divisors_and_distances() {
        let f = make_field(2, 1).unwrap();
        assert_eq!(elementary_divisor_valuations(&m(f, "1,0;0,t^-1")).unwrap(), (0, 1));
        assert_eq!(elementary_divisor_valuations(&m(f, "t^-1,1;0,t^-1")).unwrap(), (0, 2));
        assert_eq!(elementary_divisor_valuations(&Mat2::identity(f)).unwrap(), (0, 0));
        let (x1, x2) = (Vertex::x1(f), Vertex::x2(f));
        assert_eq!(vertex_distance(&x1, &x2).unwrap(), 1);
        let far = Vertex::new(m(f, "t,0;0,t^-1")).unwrap();
        assert_eq!(vertex_distance(&x1, &far).unwrap(), 2);
        let dx1 = act(&Mat2::delta(f), &x1).unwrap();
        assert!(dx1.same_as(&x2).unwrap());
    }

    #[test]
    fn neighbours_of_base_vertex() {
        let f = make_field(2, 1).unwrap();
        let x1 = Vertex::x1(f);
        let ns = neighbors(&x1).unwrap();
        assert_eq!(ns.len(), 3);
        assert!(ns.iter().any(|n| n.same_as(&Vertex::x2(f)).unwrap()));
        for (i, a) in ns.iter().enumerate() {
            assert_eq!(vertex_distance(&x1, a).unwrap(), 1);
            for b in &ns[i + 1..] {
                assert_eq!(vertex_distance(a, b).unwrap(), 2);
            }
        }
    }

    #[test]
    fn unipotent_moves_neighbours_of_x2() {
        let f = make_field(2, 1).unwrap();
        let moved = |g: &Mat2, v: Vertex| {
            neighbors(&v)
                .unwrap()
                .iter()
                .filter(|n| !act(g, n).unwrap().same_as(n).unwrap())
                .count()
        };
        // constant unipotents rotate around x1 but fix the ball of radius 1 at x2
        assert_eq!(moved(&m(f, "1,1;0,1"), Vertex::x2(f)), 0);
        assert_eq!(moved(&m(f, "1,1;0,1"), Vertex::x1(f)), 2);
        assert_eq!(moved(&m(f, "1,t;0,1"), Vertex::x2(f)), 2);
    }

    #[test]
    fn involution_family_examples() {
        let f = make_field(2, 1).unwrap();
        let b = involution_families(f, InvolutionRegion::B, 1).unwrap();
        assert!(b.contains(&m(f, "1,1;0,1")));
        assert!(!b.iter().any(|x| x.is_identity()));
        let p1 = involution_families(f, InvolutionRegion::P1MinusB, 1).unwrap();
        assert!(p1.contains(&m(f, "1,0;1,1")));
        let p2 = involution_families(f, InvolutionRegion::P2MinusB, 1).unwrap();
        assert!(p2.contains(&m(f, "1,t;0,1")));
        assert!(involution_families(make_field(3, 1).unwrap(), InvolutionRegion::B, 1).is_err());
    }
}
