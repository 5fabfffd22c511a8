//! Symbolic action of rank-2 Kac-Moody root groups on labelled tree edges.
//!
//! Edges are named by their coordinates `(l_1, .., l_n)` to the left of the
//! base edge or `(r_1, .., r_n)` to its right. The engine is partial on
//! purpose: a (root, edge) pair outside the rules below is an error rather
//! than a guess.
//!
//! Positions on the standard apartment: x1 sits at 0, x2 at 1, left vertices
//! at -1, -2, .. and right vertices at 2, 3, ...

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::gf::{Field, FieldElement};
use crate::laurent::LaurentPoly;
use crate::par::{self, Exec};
use crate::serretree::{act_edge, Edge, Mat2, SerreError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KmError {
    #[error("no action rule covers root {root} on edge {edge}")]
    UnsupportedActionDomain { root: String, edge: String },
    #[error("malformed word: {0}")]
    MalformedWord(String),
    #[error("edge length {0} leaves the radius-6 ball")]
    RadiusExceeded(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("cannot parse {0:?}")]
    Parse(String),
    #[error(transparent)]
    Serre(#[from] SerreError),
}

#[derive(Debug, Clone, Copy)]
pub struct KMParams {
    pub m: u32,
    pub field: Field,
}

impl KMParams {
    pub fn new(m: u32, field: Field) -> Result<Self, KmError> {
        if m < 2 {
            return Err(KmError::InvalidParams(format!("m = {m} < 2")));
        }
        Ok(KMParams { m, field })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RootIndex {
    pub side: Side,
    pub depth: u32,
}

impl RootIndex {
    pub fn new(side: Side, depth: u32) -> Self {
        RootIndex { side, depth }
    }

    /// Index of the simple root this one is a Weyl translate of: side 1
    /// alternates 1, 2, 1, .. with depth, side 2 alternates 2, 1, 2, ...
    pub fn simple_index(&self) -> u8 {
        match (self.side, self.depth % 2) {
            (Side::One, 0) | (Side::Two, 1) => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for RootIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.side == Side::One { 1 } else { 2 };
        if self.depth == 0 {
            write!(f, "x{s}")
        } else {
            write!(f, "x{s}d{}", self.depth)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    Base,
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeLabel {
    pub region: Region,
    pub coords: Vec<FieldElement>,
}

impl EdgeLabel {
    pub fn base() -> Self {
        EdgeLabel { region: Region::Base, coords: Vec::new() }
    }

    pub fn left(coords: Vec<FieldElement>) -> Self {
        if coords.is_empty() {
            return Self::base();
        }
        EdgeLabel { region: Region::Left, coords }
    }

    pub fn right(coords: Vec<FieldElement>) -> Self {
        if coords.is_empty() {
            return Self::base();
        }
        EdgeLabel { region: Region::Right, coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    fn leading_zeros(&self) -> usize {
        self.coords.iter().take_while(|c| c.is_zero()).count()
    }

    /// `"base"`, `"L:0,2,1"` or `"R:1"`.
    pub fn parse(field: Field, s: &str) -> Result<Self, KmError> {
        let err = || KmError::Parse(s.to_string());
        let s = s.trim();
        if s.eq_ignore_ascii_case("base") {
            return Ok(Self::base());
        }
        let (tag, rest) = s.split_once(':').ok_or_else(err)?;
        let coords = rest
            .split(',')
            .map(|c| {
                let n: u32 = c.trim().parse().map_err(|_| err())?;
                if n >= field.q() {
                    return Err(err());
                }
                Ok(field.elem(n))
            })
            .collect::<Result<Vec<_>, _>>()?;
        match tag {
            "L" | "l" => Ok(Self::left(coords)),
            "R" | "r" => Ok(Self::right(coords)),
            _ => Err(err()),
        }
    }

    /// Every edge of the region with exactly `len` coordinates.
    pub fn all(field: Field, region: Region, len: usize) -> Vec<EdgeLabel> {
        if region == Region::Base || len == 0 {
            return vec![Self::base()];
        }
        let mut out: Vec<Vec<FieldElement>> = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|v| {
                    field.elements().map(move |c| {
                        let mut w = v.clone();
                        w.push(c);
                        w
                    })
                })
                .collect();
        }
        out.into_iter().map(|coords| EdgeLabel { region, coords }).collect()
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        match self.region {
            Region::Base => write!(f, "base"),
            Region::Left => write!(f, "L:{}", cs.join(",")),
            Region::Right => write!(f, "R:{}", cs.join(",")),
        }
    }
}

impl Serialize for EdgeLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RootLetter {
    pub root: RootIndex,
    pub t: FieldElement,
}

impl RootLetter {
    pub fn new(side: Side, depth: u32, t: FieldElement) -> Self {
        RootLetter { root: RootIndex::new(side, depth), t }
    }
}

impl fmt::Display for RootLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.root, self.t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KMWord(pub Vec<RootLetter>);

impl KMWord {
    /// Letters negated, order reversed.
    pub fn inverse(&self) -> KMWord {
        KMWord(self.0.iter().rev().map(|l| RootLetter { root: l.root, t: -l.t }).collect())
    }

    /// `"x1:3,x2:1"`; `x1d2:3` is the side-1 root of depth 2. The empty
    /// string is the empty word.
    pub fn parse(field: Field, s: &str) -> Result<Self, KmError> {
        let err = || KmError::Parse(s.to_string());
        let mut out = Vec::new();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (root, coef) = tok.split_once(':').ok_or_else(err)?;
            let root = root.strip_prefix('x').ok_or_else(err)?;
            let (side, depth) = match root.split_once('d') {
                Some((s, d)) => (s, d.parse::<u32>().map_err(|_| err())?),
                None => (root, 0),
            };
            let side = match side {
                "1" => Side::One,
                "2" => Side::Two,
                _ => return Err(err()),
            };
            let n: u32 = coef.parse().map_err(|_| err())?;
            if n >= field.q() {
                return Err(err());
            }
            out.push(RootLetter::new(side, depth, field.elem(n)));
        }
        Ok(KMWord(out))
    }
}

impl fmt::Display for KMWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PhiMode {
    #[serde(rename = "identity_phi")]
    Identity,
    #[serde(rename = "twisted_phi")]
    Twisted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FixedBall {
    /// Apartment position of the centre.
    pub center: i32,
    pub radius: u32,
    /// Position of the root's wall; the root is the half-apartment on the
    /// centre's side of it.
    pub wall: i32,
}

impl FixedBall {
    /// Centre label in Weyl-word form, e.g. `(w2,w1;3)x2` for position 4.
    pub fn center_label(&self) -> String {
        match self.center {
            0 => "x1".into(),
            1 => "x2".into(),
            p if p < 0 => format!("(w1,w2;{})x1", -p),
            p => format!("(w2,w1;{})x2", p - 1),
        }
    }

    /// Radius of the fixed ball around another apartment vertex on the
    /// root's side, or `None` if the vertex is across the wall.
    pub fn radius_at(&self, position: i32) -> Option<u32> {
        let toward = (self.center - self.wall).signum();
        let off = (position - self.wall) * toward;
        (off >= 0).then_some(off as u32)
    }
}

/// The ball around the base-edge vertex farthest from the wall; every other
/// fixed apartment ball follows from `FixedBall::radius_at`.
pub fn fixed_ball_certificate(_params: &KMParams, root: RootIndex) -> FixedBall {
    let k = root.depth as i32;
    match root.side {
        Side::One => FixedBall { center: 1, radius: (k + 1) as u32, wall: -k },
        Side::Two => FixedBall { center: 0, radius: (k + 1) as u32, wall: 1 + k },
    }
}

/// Whether the root group fixes the edge because it lies in one of the
/// certified balls around the apartment vertices the edge's path crosses.
pub fn ball_fixes(params: &KMParams, root: RootIndex, e: &EdgeLabel) -> bool {
    let cert = fixed_ball_certificate(params, root);
    let len = e.len() as i32;
    let zeros = e.leading_zeros() as i32;
    // the path from the base leaves the apartment after `zeros` steps
    let (origin, dir) = match e.region {
        Region::Base => return true,
        Region::Left => (0, -1),
        Region::Right => (1, 1),
    };
    (0..=zeros).any(|j| {
        let pos = origin + dir * j;
        cert.radius_at(pos).is_some_and(|r| len - j <= r as i32)
    })
}

fn same_side(side: Side, region: Region) -> bool {
    matches!((side, region), (Side::One, Region::Left) | (Side::Two, Region::Right))
}

pub fn apply_letter(
    params: &KMParams,
    letter: &RootLetter,
    e: &EdgeLabel,
    mode: PhiMode,
) -> Result<EdgeLabel, KmError> {
    let root = letter.root;
    let k = root.depth as usize;
    if e.region == Region::Base || ball_fixes(params, root, e) {
        return Ok(e.clone());
    }
    let n = e.len();
    if same_side(root.side, e.region) {
        if k < n {
            let mut out = e.clone();
            out.coords[k] = out.coords[k] + letter.t;
            return Ok(out);
        }
        return Ok(e.clone());
    }
    // opposite side: length 2z + 2 + k with exactly z leading zeros
    let z = e.leading_zeros();
    if n >= 2 + k && (n - 2 - k) % 2 == 0 {
        let pre = (n - 2 - k) / 2;
        if z == pre && pre >= k {
            let lead = e.coords[pre];
            let phi = match mode {
                PhiMode::Identity => letter.t,
                PhiMode::Twisted => (-lead).pow(params.m as u64) * letter.t,
            };
            let mut out = e.clone();
            out.coords[n - 1] = out.coords[n - 1] + phi;
            return Ok(out);
        }
    }
    Err(KmError::UnsupportedActionDomain { root: root.to_string(), edge: e.to_string() })
}

/// Left action: the rightmost letter acts first.
pub fn apply_word(params: &KMParams, w: &KMWord, e: &EdgeLabel, mode: PhiMode) -> Result<EdgeLabel, KmError> {
    let mut cur = e.clone();
    for letter in w.0.iter().rev() {
        cur = apply_letter(params, letter, &cur, mode)?;
    }
    Ok(cur)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ZpOutcome {
    pub fixes_all_e: bool,
    #[serde(serialize_with = "ser_elem")]
    pub t1: FieldElement,
    #[serde(serialize_with = "ser_elem")]
    pub t2: FieldElement,
}

fn ser_elem<S: serde::Serializer>(x: &FieldElement, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u32(x.value())
}

/// Checks that `z = x1(t_11) x2(t_21) .. x1(t_1m) x2(t_2m)` and returns
/// `(t1, t2)`, the sums of the side-1 and side-2 coefficients.
pub fn zp_sums(params: &KMParams, z: &KMWord) -> Result<(FieldElement, FieldElement), KmError> {
    if z.0.is_empty() || z.0.len() % 2 != 0 {
        return Err(KmError::MalformedWord(format!("{z}: need a positive number of x1,x2 pairs")));
    }
    let (mut t1, mut t2) = (params.field.zero(), params.field.zero());
    for (i, l) in z.0.iter().enumerate() {
        let want = if i % 2 == 0 { Side::One } else { Side::Two };
        if l.root.side != want || l.root.depth != 0 {
            return Err(KmError::MalformedWord(format!("{z}: letter {} is {}", i + 1, l.root)));
        }
        if want == Side::One {
            t1 = t1 + l.t;
        } else {
            t2 = t2 + l.t;
        }
    }
    Ok((t1, t2))
}

fn power_word(z: &KMWord, p: u32) -> KMWord {
    KMWord(z.0.iter().copied().cycle().take(z.0.len() * p as usize).collect())
}

/// Applies `z^p` to every left edge `(l1, l2)` and reports whether all stay put.
pub fn zp_fix_test(params: &KMParams, z: &KMWord, mode: PhiMode) -> Result<ZpOutcome, KmError> {
    let (t1, t2) = zp_sums(params, z)?;
    let zp = power_word(z, params.field.p());
    let mut fixes = true;
    for e in EdgeLabel::all(params.field, Region::Left, 2) {
        if apply_word(params, &zp, &e, mode)? != e {
            fixes = false;
            break;
        }
    }
    Ok(ZpOutcome { fixes_all_e: fixes, t1, t2 })
}

/// Whether `z^p` fixes every edge within distance 2 of the base edge.
pub fn zp_fixes_ball2(params: &KMParams, z: &KMWord, mode: PhiMode) -> Result<bool, KmError> {
    zp_sums(params, z)?;
    let zp = power_word(z, params.field.p());
    let f = params.field;
    let mut edges = vec![EdgeLabel::base()];
    for region in [Region::Left, Region::Right] {
        for len in 1..=2 {
            edges.extend(EdgeLabel::all(f, region, len));
        }
    }
    for e in edges {
        if apply_word(params, &zp, &e, mode)? != e {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All alternating words with `pairs` pairs over every coefficient tuple.
pub fn alternating_words(field: Field, pairs: usize) -> Vec<KMWord> {
    let q = field.q() as u64;
    let n = 2 * pairs;
    (0..q.pow(n as u32))
        .map(|mut code| {
            let letters = (0..n)
                .map(|i| {
                    let t = field.elem((code % q) as u32);
                    code /= q;
                    let side = if i % 2 == 0 { Side::One } else { Side::Two };
                    RootLetter::new(side, 0, t)
                })
                .collect();
            KMWord(letters)
        })
        .collect()
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ZpSweep {
    pub checked: u64,
    /// Words where "z^p fixes E" equals `t2 = 0`.
    pub agreements: u64,
    /// Words where "z^p fixes the edges of Ball(B,2)" equals `t1 = t2 = 0`.
    pub ball2_agreements: u64,
    /// The same two counts restricted to `t1 != 0` (resp. `t1, t2` not
    /// exactly one zero), where the orbit argument behind the predicates applies.
    pub checked_t1_nonzero: u64,
    pub agreements_t1_nonzero: u64,
    pub checked_ball2_nondegenerate: u64,
    pub ball2_agreements_nondegenerate: u64,
    /// First word (in sweep order) disagreeing with either predicate.
    pub first_disagreement: Option<String>,
}

/// Sweeps all alternating words with 1..=max_pairs pairs; an agreement means
/// the geometric answer matches the coefficient-sum predicate.
///
/// The predicates fail when a sum vanishes on its own: `z = x1(0) x2(1)` has
/// `z^p = 1` although `t2 != 0`. Both raw and restricted counts are reported.
pub fn zp_sweep(exec: Exec, params: &KMParams, max_pairs: usize) -> Result<ZpSweep, KmError> {
    let mut words = Vec::new();
    for pairs in 1..=max_pairs {
        words.extend(alternating_words(params.field, pairs));
    }
    let rows = par::map(exec, &words, |z| -> Result<(ZpOutcome, bool), KmError> {
        Ok((zp_fix_test(params, z, PhiMode::Identity)?, zp_fixes_ball2(params, z, PhiMode::Identity)?))
    });
    let mut sweep = ZpSweep::default();
    for (z, r) in words.iter().zip(rows) {
        let (out, ball) = r?;
        let (z1, z2) = (out.t1.is_zero(), out.t2.is_zero());
        let e_ok = out.fixes_all_e == z2;
        let b_ok = ball == (z1 && z2);
        sweep.checked += 1;
        sweep.agreements += e_ok as u64;
        sweep.ball2_agreements += b_ok as u64;
        if !z1 {
            sweep.checked_t1_nonzero += 1;
            sweep.agreements_t1_nonzero += e_ok as u64;
        }
        if z1 == z2 {
            sweep.checked_ball2_nondegenerate += 1;
            sweep.ball2_agreements_nondegenerate += b_ok as u64;
        }
        if !(e_ok && b_ok) && sweep.first_disagreement.is_none() {
            sweep.first_disagreement = Some(z.to_string());
        }
    }
    Ok(sweep)
}

/// Affine realization (m = 2) of the depth-0 root groups and Weyl elements.
pub mod affine {
    use super::*;

    pub fn x_alpha(side: Side, u: FieldElement) -> Mat2 {
        match side {
            Side::One => Mat2::upper(LaurentPoly::constant(u)),
            Side::Two => Mat2::lower(LaurentPoly::monomial(u, 1)),
        }
    }

    pub fn x_minus_alpha(side: Side, u: FieldElement) -> Mat2 {
        match side {
            Side::One => Mat2::lower(LaurentPoly::constant(u)),
            Side::Two => Mat2::upper(LaurentPoly::monomial(u, -1)),
        }
    }

    /// `x_a(1) x_{-a}(-1) x_a(1)`.
    pub fn w(side: Side, field: Field) -> Mat2 {
        let one = field.one();
        x_alpha(side, one)
            .mul(&x_minus_alpha(side, -one))
            .and_then(|m| m.mul(&x_alpha(side, one)))
            .expect("small degrees")
    }

    /// The group element whose image of the base edge is the labelled edge.
    pub fn edge_matrix(field: Field, e: &EdgeLabel) -> Result<Mat2, KmError> {
        let mut g = Mat2::identity(field);
        let first = match e.region {
            Region::Base => return Ok(g),
            Region::Left => Side::One,
            Region::Right => Side::Two,
        };
        for (i, &c) in e.coords.iter().enumerate() {
            let side = if (i % 2 == 0) == (first == Side::One) { Side::One } else { Side::Two };
            g = g.mul(&x_alpha(side, c))?.mul(&w(side, field))?;
        }
        Ok(g)
    }

    pub fn edge_of(field: Field, e: &EdgeLabel) -> Result<Edge, KmError> {
        Ok(act_edge(&edge_matrix(field, e)?, &Edge::base(field))?)
    }

    pub fn word_matrix(field: Field, w: &KMWord) -> Result<Mat2, KmError> {
        let mut g = Mat2::identity(field);
        for l in &w.0 {
            if l.root.depth != 0 {
                return Err(KmError::UnsupportedActionDomain {
                    root: l.root.to_string(),
                    edge: "affine realization covers depth 0 only".into(),
                });
            }
            g = g.mul(&x_alpha(l.root.side, l.t))?;
        }
        Ok(g)
    }

    /// `x1(a) w1 x2(t) w2 B` against `x_{-1}(1/a) x2((-a)^{-m} t) w2 B`.
    pub fn cosets_identity(field: Field, a: FieldElement, t: FieldElement, m: u32) -> Result<bool, KmError> {
        let ai = a.inv().map_err(|_| KmError::InvalidParams("a = 0".into()))?;
        let lhs = edge_matrix(field, &EdgeLabel::left(vec![a, t]))?;
        let coef = (-ai).pow(m as u64) * t;
        let rhs = x_minus_alpha(Side::One, ai)
            .mul(&x_alpha(Side::Two, coef))?
            .mul(&w(Side::Two, field))?;
        let base = Edge::base(field);
        Ok(act_edge(&lhs, &base)?.same_as(&act_edge(&rhs, &base)?)?)
    }
}

/// Compares the symbolic image of `e` under `w` with the exact tree action.
pub fn crosscheck_affine(params: &KMParams, w: &KMWord, e: &EdgeLabel, mode: PhiMode) -> Result<bool, KmError> {
    if params.m != 2 {
        return Err(KmError::InvalidParams(format!("affine realization needs m = 2, got {}", params.m)));
    }
    if e.len() > 6 {
        return Err(KmError::RadiusExceeded(e.len()));
    }
    let f = params.field;
    let image = apply_word(params, w, e, mode)?;
    let concrete = act_edge(&affine::word_matrix(f, w)?, &affine::edge_of(f, e)?)?;
    Ok(concrete.same_as(&affine::edge_of(f, &image)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_field;

    #[test]
    fn parse_roundtrip() {
        let f = make_field(3, 1).unwrap();
        let w = KMWord::parse(f, "x1:2,x2d1:1").unwrap();
        assert_eq!(w.to_string(), "x1:2,x2d1:1");
        let e = EdgeLabel::parse(f, "L:0,2,1").unwrap();
        assert_eq!(e.to_string(), "L:0,2,1");
        assert_eq!(EdgeLabel::parse(f, "base").unwrap(), EdgeLabel::base());
        assert!(EdgeLabel::parse(f, "L:3").is_err());
    }

    #[test]
    fn weyl_elements() {
        let f = make_field(3, 1).unwrap();
        assert_eq!(affine::w(Side::One, f), Mat2::parse(f, "0,1;2,0").unwrap());
        assert_eq!(affine::w(Side::Two, f), Mat2::parse(f, "0,2*t;t^-1,0").unwrap());
    }

    #[test]
    fn simple_indices() {
        assert_eq!(RootIndex::new(Side::One, 0).simple_index(), 1);
        assert_eq!(RootIndex::new(Side::One, 3).simple_index(), 2);
        assert_eq!(RootIndex::new(Side::Two, 0).simple_index(), 2);
        assert_eq!(RootIndex::new(Side::Two, 1).simple_index(), 1);
    }

    #[test]
    fn certificate_examples() {
        let f = make_field(2, 1).unwrap();
        let p = KMParams::new(2, f).unwrap();
        let a1 = fixed_ball_certificate(&p, RootIndex::new(Side::One, 0));
        for n in 0..5 {
            assert_eq!(a1.radius_at(1 + n), Some((n + 1) as u32));
        }
        let a2 = fixed_ball_certificate(&p, RootIndex::new(Side::Two, 0));
        assert_eq!((a2.center_label().as_str(), a2.radius), ("x1", 1));
    }
}
