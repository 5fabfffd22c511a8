//! Finite groups: breadth-first closure, subgroup operations, recognition by
//! order profile, the torus constructors and Dickson's subgroup tables.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;
use std::hash::Hash;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::Serialize;
use thiserror::Error;

use crate::gf::{norm1_generator, Field, FieldElement};
use crate::par::{self, Exec};
use crate::serretree::Mat2;

pub const DEFAULT_CAP: usize = 1_000_000;

static CLOSURE_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_CAP);

/// Overrides the element cap used by [`closure`] for the rest of the process.
pub fn set_closure_cap(cap: usize) {
    CLOSURE_CAP.store(cap, Ordering::Relaxed);
}

pub fn closure_cap() -> usize {
    CLOSURE_CAP.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("closure exceeded {0} elements")]
    SizeCapExceeded(usize),
    #[error("not a subgroup of the ambient group")]
    NotASubgroup,
    #[error("no subgroup of type {0} found")]
    NotFound(String),
    #[error("search bound exceeded: {0}")]
    SearchBudgetExceeded(String),
    #[error("closure needs at least one generator")]
    NoGenerators,
}

pub trait GroupElement: Clone + Eq + Hash + Ord + Send + Sync + fmt::Debug {
    fn op(&self, o: &Self) -> Self;
    fn inverse(&self) -> Self;
    fn identity_like(&self) -> Self;

    fn is_identity(&self) -> bool {
        *self == self.identity_like()
    }

    /// Characteristic of the ambient field, for matrix groups.
    fn characteristic(&self) -> Option<u32> {
        None
    }

    /// Order of the ambient field, for matrix groups.
    fn field_order(&self) -> Option<u32> {
        None
    }
}

/// Constant matrix in SL2(F_q), entries `[a, b, c, d]` as field indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlMat {
    pub field: Field,
    pub e: [u16; 4],
}

impl SlMat {
    pub fn new(field: Field, e: [u32; 4]) -> Self {
        SlMat { field, e: e.map(|x| field.elem(x).value() as u16) }
    }

    pub fn from_elems(e: [FieldElement; 4]) -> Self {
        SlMat { field: e[0].field(), e: e.map(|x| x.value() as u16) }
    }

    pub fn identity(field: Field) -> Self {
        SlMat { field, e: [1, 0, 0, 1] }
    }

    pub fn minus_identity(field: Field) -> Self {
        let m1 = field.n(1);
        SlMat { field, e: [m1, 0, 0, m1] }
    }

    pub fn elems(&self) -> [FieldElement; 4] {
        self.e.map(|x| self.field.elem(x as u32))
    }

    pub fn trace(&self) -> u16 {
        self.field.s(self.e[0], self.e[3])
    }

    pub fn det(&self) -> FieldElement {
        let [a, b, c, d] = self.elems();
        a * d - b * c
    }

    pub fn to_mat2(&self) -> Mat2 {
        Mat2::from_consts(self.elems())
    }

    pub fn from_mat2(m: &Mat2) -> Option<Self> {
        let e = [m.a.as_constant()?, m.b.as_constant()?, m.c.as_constant()?, m.d.as_constant()?];
        Some(Self::from_elems(e))
    }

    /// Element order; the trace settles it away from +-2.
    pub fn order(&self) -> u64 {
        order_by_trace(self)
    }
}

impl fmt::Debug for SlMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{};{},{}]", self.e[0], self.e[1], self.e[2], self.e[3])
    }
}

impl Serialize for SlMat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:?}", self))
    }
}

impl GroupElement for SlMat {
    fn op(&self, o: &Self) -> Self {
        let f = self.field;
        let [a, b, c, d] = self.e;
        let [x, y, z, w] = o.e;
        SlMat {
            field: f,
            e: [
                f.s(f.m(a, x), f.m(b, z)),
                f.s(f.m(a, y), f.m(b, w)),
                f.s(f.m(c, x), f.m(d, z)),
                f.s(f.m(c, y), f.m(d, w)),
            ],
        }
    }

    fn inverse(&self) -> Self {
        let f = self.field;
        let [a, b, c, d] = self.e;
        SlMat { field: f, e: [d, f.n(b), f.n(c), a] }
    }

    fn identity_like(&self) -> Self {
        SlMat::identity(self.field)
    }

    fn characteristic(&self) -> Option<u32> {
        Some(self.field.p())
    }

    fn field_order(&self) -> Option<u32> {
        Some(self.field.q())
    }
}

impl GroupElement for Mat2 {
    fn op(&self, o: &Self) -> Self {
        self.mul(o).expect("product within the degree window")
    }

    fn inverse(&self) -> Self {
        self.inv().expect("monomial determinant")
    }

    fn identity_like(&self) -> Self {
        Mat2::identity(self.field())
    }

    fn is_identity(&self) -> bool {
        Mat2::is_identity(self)
    }

    fn characteristic(&self) -> Option<u32> {
        Some(self.field().p())
    }

    fn field_order(&self) -> Option<u32> {
        Some(self.field().q())
    }
}

/// Permutation of `0..n`; `(a.op(b))[i] = a[b[i]]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Perm(pub Vec<u8>);

impl GroupElement for Perm {
    fn op(&self, o: &Self) -> Self {
        Perm(o.0.iter().map(|&i| self.0[i as usize]).collect())
    }

    fn inverse(&self) -> Self {
        let mut out = vec![0u8; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            out[j as usize] = i as u8;
        }
        Perm(out)
    }

    fn identity_like(&self) -> Self {
        Perm((0..self.0.len() as u8).collect())
    }
}

#[derive(Clone, Debug)]
pub struct FiniteGroup<E: GroupElement> {
    elements: Vec<E>,
    set: HashSet<E>,
    gens: Vec<E>,
}

pub fn closure<E: GroupElement>(gens: &[E]) -> Result<FiniteGroup<E>, GroupError> {
    closure_capped(gens, closure_cap())
}

pub fn closure_capped<E: GroupElement>(gens: &[E], cap: usize) -> Result<FiniteGroup<E>, GroupError> {
    let first = gens.first().ok_or(GroupError::NoGenerators)?;
    let id = first.identity_like();
    let mut set: HashSet<E> = HashSet::new();
    let mut queue = VecDeque::new();
    set.insert(id.clone());
    queue.push_back(id);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = x.op(g);
            if !set.contains(&y) {
                if set.len() >= cap {
                    return Err(GroupError::SizeCapExceeded(cap));
                }
                set.insert(y.clone());
                queue.push_back(y);
            }
        }
    }
    let mut elements: Vec<E> = set.iter().cloned().collect();
    elements.sort();
    Ok(FiniteGroup { elements, set, gens: gens.to_vec() })
}

impl<E: GroupElement> FiniteGroup<E> {
    /// Wraps a set already known to be a group (e.g. an intersection).
    fn from_set(set: HashSet<E>, gens: Vec<E>) -> Self {
        let mut elements: Vec<E> = set.iter().cloned().collect();
        elements.sort();
        let gens = if gens.is_empty() { elements.clone() } else { gens };
        FiniteGroup { elements, set, gens }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[E] {
        &self.elements
    }

    pub fn gens(&self) -> &[E] {
        &self.gens
    }

    pub fn contains(&self, x: &E) -> bool {
        self.set.contains(x)
    }

    pub fn identity(&self) -> E {
        self.elements[0].identity_like()
    }

    pub fn is_subgroup_of(&self, g: &Self) -> bool {
        self.elements.iter().all(|x| g.contains(x))
    }

    pub fn center(&self) -> Self {
        let set: HashSet<E> = self
            .elements
            .iter()
            .filter(|z| self.gens.iter().all(|g| z.op(g) == g.op(z)))
            .cloned()
            .collect();
        Self::from_set(set, Vec::new())
    }

    /// Whether `self` is normal in `g`.
    pub fn is_normal_in(&self, g: &Self) -> Result<bool, GroupError> {
        if !self.is_subgroup_of(g) {
            return Err(GroupError::NotASubgroup);
        }
        Ok(g.gens.iter().all(|x| {
            let xi = x.inverse();
            self.gens.iter().all(|h| self.contains(&x.op(h).op(&xi)))
        }))
    }

    pub fn intersection(&self, o: &Self) -> Self {
        let set: HashSet<E> = self.elements.iter().filter(|x| o.contains(x)).cloned().collect();
        Self::from_set(set, Vec::new())
    }

    /// `[g : self]`.
    pub fn index_in(&self, g: &Self) -> Result<usize, GroupError> {
        if !self.is_subgroup_of(g) || g.order() % self.order() != 0 {
            return Err(GroupError::NotASubgroup);
        }
        Ok(g.order() / self.order())
    }

    pub fn involutions(&self) -> Vec<E> {
        self.elements
            .iter()
            .filter(|x| !x.is_identity() && x.op(x).is_identity())
            .cloned()
            .collect()
    }

    pub fn unique_involution(&self) -> Option<E> {
        let inv = self.involutions();
        (inv.len() == 1).then(|| inv[0].clone())
    }

    pub fn element_order(&self, x: &E) -> u64 {
        let mut y = x.clone();
        let mut k = 1;
        while !y.is_identity() {
            y = y.op(x);
            k += 1;
        }
        k
    }

    pub fn order_profile(&self) -> BTreeMap<u64, usize> {
        let mut out = BTreeMap::new();
        for x in &self.elements {
            *out.entry(self.element_order(x)).or_insert(0) += 1;
        }
        out
    }

    pub fn is_abelian(&self) -> bool {
        self.gens.iter().all(|a| self.gens.iter().all(|b| a.op(b) == b.op(a)))
    }

    pub fn is_cyclic(&self) -> bool {
        let n = self.order() as u64;
        self.elements.iter().any(|x| self.element_order(x) == n)
    }

    pub fn derived_subgroup(&self) -> Self {
        let mut comms: HashSet<E> = HashSet::new();
        for a in &self.elements {
            for b in &self.elements {
                comms.insert(a.op(b).op(&a.inverse()).op(&b.inverse()));
            }
        }
        let gens: Vec<E> = comms.into_iter().collect();
        closure(&gens).expect("subgroup of a finite group")
    }

    /// Image under an injective homomorphism given elementwise.
    pub fn image<F: GroupElement>(&self, f: impl Fn(&E) -> F) -> FiniteGroup<F> {
        let set: HashSet<F> = self.elements.iter().map(&f).collect();
        assert_eq!(set.len(), self.order(), "map is not injective");
        FiniteGroup::from_set(set, self.gens.iter().map(&f).collect())
    }

    /// `x -> g x g^-1` applied elementwise.
    pub fn conjugate(&self, g: &E) -> Self {
        let gi = g.inverse();
        let f = |x: &E| g.op(x).op(&gi);
        let set: HashSet<E> = self.elements.iter().map(f).collect();
        let gens = self.gens.iter().map(f).collect();
        Self::from_set(set, gens)
    }

    /// Order of `G / Z(G)` together with the order profile of its elements.
    pub fn quotient_by_center(&self) -> (usize, BTreeMap<u64, usize>) {
        let z = self.center();
        let mut prof = BTreeMap::new();
        for x in &self.elements {
            let mut y = x.clone();
            let mut k = 1;
            while !z.contains(&y) {
                y = y.op(x);
                k += 1;
            }
            *prof.entry(k).or_insert(0) += 1;
        }
        for v in prof.values_mut() {
            *v /= z.order();
        }
        (self.order() / z.order(), prof)
    }
}

// trace -> order for traces other than +-2, via companion matrices
fn order_by_trace(m: &SlMat) -> u64 {
    let f = m.field;
    let tr = m.trace();
    let two = f.s(1, 1);
    if tr == two || tr == f.n(two) {
        let scalar = m.e[1] == 0 && m.e[2] == 0;
        let p = f.p() as u64;
        return match (tr == two, scalar) {
            (true, true) => 1,
            (true, false) => p,
            (false, true) => 2,
            (false, false) => 2 * p,
        };
    }
    // semisimple with distinct eigenvalues: the companion matrix has the same order
    let c = SlMat { field: f, e: [0, f.n(1), 1, tr] };
    let mut y = c;
    let mut k = 1;
    while !y.is_identity() {
        y = y.op(&c);
        k += 1;
    }
    k
}

/// Element order as a function of the trace, `None` at traces +-2 where it
/// also depends on whether the element is scalar.
pub fn trace_order_table(field: Field) -> Vec<Option<u64>> {
    let two = field.s(1, 1);
    (0..field.q() as u16)
        .map(|tr| {
            if tr == two || tr == field.n(two) {
                None
            } else {
                Some(SlMat { field, e: [0, field.n(1), 1, tr] }.order())
            }
        })
        .collect()
}

/// All of SL2(F_q) in lexicographic order of entry indices.
pub fn sl2_elements(field: Field) -> Vec<SlMat> {
    let mut out = Vec::new();
    for a in field.elements() {
        for b in field.elements() {
            for c in field.elements() {
                if !a.is_zero() {
                    let d = (field.one() + b * c) * a.inv().unwrap();
                    out.push(SlMat::from_elems([a, b, c, d]));
                } else if !b.is_zero() && c == -b.inv().unwrap() {
                    for d in field.elements() {
                        out.push(SlMat::from_elems([a, b, c, d]));
                    }
                }
            }
        }
    }
    out
}

pub fn nonsplit_torus(field: Field) -> FiniteGroup<SlMat> {
    let g = SlMat::from_elems(norm1_generator(field).mult_matrix());
    closure(&[g]).expect("order q+1")
}

/// Torus plus the first element (in enumeration order) inverting its generator.
pub fn torus_normalizer(field: Field) -> Result<FiniteGroup<SlMat>, GroupError> {
    let torus = nonsplit_torus(field);
    let g = torus.gens()[0];
    let gi = g.inverse();
    let n = sl2_elements(field)
        .into_iter()
        .find(|n| n.op(&g) == gi.op(n))
        .ok_or_else(|| GroupError::NotFound("torus normalizer".into()))?;
    closure(&[g, n])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupType {
    Cyclic(u64),
    /// Dihedral group of the given order.
    Dihedral(u64),
    /// Binary dihedral (dicyclic) group of the given order.
    BinaryDihedral(u64),
    /// Normalizer in SL2(F_q) of a non-split torus, order 2(q+1).
    TorusNormalizer(u32),
    Sl23,
    Sl25,
    /// The binary octahedral group: the double cover of S4 with a single involution.
    BinaryOctahedral,
    S4,
    A4,
    A5,
    /// Subgroup with a normal Sylow p-subgroup (inside a Borel), by order.
    Borel(u64),
    Psl2(u32),
    Pgl2(u32),
    Sl2(u32),
    /// Preimage in SL2 of PGL2(q').
    LiftPgl2(u32),
    Unknown,
}

impl fmt::Display for GroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupType::Cyclic(n) => write!(f, "C{n}"),
            GroupType::Dihedral(n) => write!(f, "D{n}"),
            GroupType::BinaryDihedral(n) => write!(f, "BD{n}"),
            GroupType::TorusNormalizer(q) => write!(f, "TorusNormalizer({q})"),
            GroupType::Sl23 => write!(f, "SL2(3)"),
            GroupType::Sl25 => write!(f, "SL2(5)"),
            GroupType::BinaryOctahedral => write!(f, "2S4"),
            GroupType::S4 => write!(f, "S4"),
            GroupType::A4 => write!(f, "A4"),
            GroupType::A5 => write!(f, "A5"),
            GroupType::Borel(n) => write!(f, "Borel({n})"),
            GroupType::Psl2(q) => write!(f, "PSL2({q})"),
            GroupType::Pgl2(q) => write!(f, "PGL2({q})"),
            GroupType::Sl2(q) => write!(f, "SL2({q})"),
            GroupType::LiftPgl2(q) => write!(f, "2.PGL2({q})"),
            GroupType::Unknown => write!(f, "Unknown"),
        }
    }
}

impl Serialize for GroupType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl GroupType {
    pub fn parse(s: &str) -> Option<GroupType> {
        let s = s.trim();
        let num = |prefix: &str| s.strip_prefix(prefix).and_then(|r| r.parse::<u64>().ok());
        Some(match s {
            "SL2(3)" | "sl2_3" => GroupType::Sl23,
            "SL2(5)" | "sl2_5" => GroupType::Sl25,
            "2S4" | "2s4" | "binary_octahedral" => GroupType::BinaryOctahedral,
            "S4" => GroupType::S4,
            "A4" => GroupType::A4,
            "A5" => GroupType::A5,
            _ => {
                if let Some(n) = num("BD") {
                    GroupType::BinaryDihedral(n)
                } else if let Some(n) = num("C") {
                    GroupType::Cyclic(n)
                } else if let Some(n) = num("D") {
                    GroupType::Dihedral(n)
                } else {
                    return None;
                }
            }
        })
    }

    /// Group order, where the tag determines it.
    pub fn order(&self) -> Option<u64> {
        let sl = |q: u64| q * (q * q - 1);
        Some(match *self {
            GroupType::Cyclic(n) | GroupType::Dihedral(n) | GroupType::BinaryDihedral(n) | GroupType::Borel(n) => n,
            GroupType::TorusNormalizer(q) => 2 * (q as u64 + 1),
            GroupType::Sl23 | GroupType::S4 => 24,
            GroupType::Sl25 => 120,
            GroupType::BinaryOctahedral => 48,
            GroupType::A4 => 12,
            GroupType::A5 => 60,
            GroupType::Sl2(q) => sl(q as u64),
            GroupType::Pgl2(q) => sl(q as u64),
            GroupType::Psl2(q) => sl(q as u64) / if q % 2 == 0 { 1 } else { 2 },
            GroupType::LiftPgl2(q) => 2 * sl(q as u64),
            GroupType::Unknown => return None,
        })
    }
}

fn profile(pairs: &[(u64, usize)]) -> BTreeMap<u64, usize> {
    pairs.iter().copied().collect()
}

/// Reference order profiles, each computed by brute force on a copy of the group.
pub fn reference_profile(t: GroupType) -> Option<BTreeMap<u64, usize>> {
    Some(match t {
        GroupType::Sl23 => profile(&[(1, 1), (2, 1), (3, 8), (4, 6), (6, 8)]),
        GroupType::BinaryOctahedral => profile(&[(1, 1), (2, 1), (3, 8), (4, 18), (6, 8), (8, 12)]),
        GroupType::Sl25 => profile(&[(1, 1), (2, 1), (3, 20), (4, 30), (5, 24), (6, 20), (10, 24)]),
        GroupType::A4 => profile(&[(1, 1), (2, 3), (3, 8)]),
        GroupType::S4 => profile(&[(1, 1), (2, 9), (3, 8), (4, 6)]),
        GroupType::A5 => profile(&[(1, 1), (2, 15), (3, 20), (5, 24)]),
        _ => return None,
    })
}

fn p_part_is_normal<E: GroupElement>(h: &FiniteGroup<E>, p: u64) -> bool {
    let is_ppow = |mut n: u64| {
        while n % p == 0 {
            n /= p;
        }
        n == 1
    };
    let sylow: HashSet<E> = h.elements().iter().filter(|x| is_ppow(h.element_order(x))).cloned().collect();
    let mut n = h.order() as u64;
    let mut pk = 1;
    while n % p == 0 {
        n /= p;
        pk *= p;
    }
    // a normal Sylow subgroup is exactly the set of p-power-order elements
    sylow.len() as u64 == pk
}

pub fn recognize<E: GroupElement>(h: &FiniteGroup<E>) -> GroupType {
    let n = h.order() as u64;
    if h.is_cyclic() {
        return GroupType::Cyclic(n);
    }
    let prof = h.order_profile();
    let involutions = prof.get(&2).copied().unwrap_or(0) as u64;
    let max_order = *prof.keys().next_back().unwrap();
    let sample = &h.elements()[0];
    for t in [GroupType::Sl23, GroupType::A4, GroupType::S4, GroupType::A5] {
        if reference_profile(t).as_ref() == Some(&prof) {
            return t;
        }
    }
    if let Some(p) = sample.characteristic() {
        if n % p as u64 == 0 && p_part_is_normal(h, p as u64) {
            return GroupType::Borel(n);
        }
    }
    if involutions == 1 {
        if n == 48 && prof.contains_key(&8) && h.derived_subgroup().order() == 24 {
            return GroupType::BinaryOctahedral;
        }
        if n == 120 && h.derived_subgroup().order() == 120 {
            return GroupType::Sl25;
        }
        if n % 4 == 0 && max_order == n / 2 {
            if sample.field_order().is_some_and(|q| n == 2 * (q as u64 + 1)) {
                return GroupType::TorusNormalizer(sample.field_order().unwrap());
            }
            return GroupType::BinaryDihedral(n);
        }
    }
    if n % 2 == 0 && n >= 4 {
        let k = n / 2;
        let want = if k % 2 == 1 { k } else { k + 1 };
        if (max_order == k || n == 4) && involutions == want {
            if sample.characteristic() == Some(2)
                && sample.field_order().is_some_and(|q| n == 2 * (q as u64 + 1))
            {
                return GroupType::TorusNormalizer(sample.field_order().unwrap());
            }
            return GroupType::Dihedral(n);
        }
    }
    if let Some(p) = sample.characteristic() {
        let mut qq = p as u64;
        while qq * (qq * qq - 1) <= n {
            if qq * (qq * qq - 1) == n && (qq <= 3 || h.derived_subgroup().order() as u64 == n) {
                return GroupType::Sl2(qq as u32);
            }
            qq *= p as u64;
        }
    }
    GroupType::Unknown
}

fn signature_orders(t: GroupType) -> Option<(u64, u64, [u64; 2])> {
    // r, s, rs in the presentation r^2 = s^3 = u^n = rsu of the binary polyhedral groups
    match t {
        GroupType::Sl23 => Some((4, 6, [3, 6])),
        GroupType::BinaryOctahedral => Some((4, 6, [4, 8])),
        GroupType::Sl25 => Some((4, 6, [5, 10])),
        _ => None,
    }
}

pub fn find_subgroup_of_type(field: Field, t: GroupType) -> Result<FiniteGroup<SlMat>, GroupError> {
    find_subgroup_of_type_with(Exec::default(), field, t)
}

/// Deterministic search over ordered pairs `(a, b)` with `a` of order 4,
/// `b` of order 6 and `ab` of a matching order; the first pair (in
/// enumeration order) generating a group of the requested type wins.
pub fn find_subgroup_of_type_with(
    exec: Exec,
    field: Field,
    t: GroupType,
) -> Result<FiniteGroup<SlMat>, GroupError> {
    if field.p() == 2 || field.q() > 64 {
        return Err(GroupError::SearchBudgetExceeded(format!(
            "search covers odd q <= 64, got q = {}",
            field.q()
        )));
    }
    let (oa, ob, oab) = signature_orders(t)
        .ok_or_else(|| GroupError::SearchBudgetExceeded(format!("no search signature for {t}")))?;
    let target = t.order().unwrap() as usize;
    let all = sl2_elements(field);
    let table = trace_order_table(field);
    let ord = |x: &SlMat| table[x.trace() as usize].unwrap_or_else(|| x.order());
    let a_list: Vec<SlMat> = all.iter().copied().filter(|x| ord(x) == oa).collect();
    let b_list: Vec<SlMat> = all.iter().copied().filter(|x| ord(x) == ob).collect();
    par::find_map_first(exec, &a_list, |a| {
        b_list.iter().find_map(|b| {
            let ab = a.op(b);
            if !oab.contains(&ord(&ab)) {
                return None;
            }
            let h = closure_capped(&[*a, *b], target).ok()?;
            (h.order() == target && recognize(&h) == t).then_some(h)
        })
    })
    .ok_or_else(|| GroupError::NotFound(t.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Ambient {
    #[serde(rename = "SL2")]
    Sl2,
    #[serde(rename = "PSL2")]
    Psl2,
    #[serde(rename = "PGL2")]
    Pgl2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DicksonEntry {
    #[serde(rename = "type")]
    pub group_type: GroupType,
    pub order: u64,
    #[serde(rename = "div_q_plus_1")]
    pub divisible_by_q_plus_1: bool,
    pub source: &'static str,
    /// For PGL2 rows: whether the subgroup lies in PSL2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub in_psl: Option<bool>,
}

/// Types of maximal-type subgroups of the ambient group (the ambient itself
/// excluded). Every proper subgroup is isomorphic to a subgroup of a row.
pub fn dickson_table(field: Field, ambient: Ambient) -> Vec<DicksonEntry> {
    let (p, a, q) = (field.p() as u64, field.degree(), field.q() as u64);
    let d = if p == 2 { 1 } else { 2 };
    let odd = p != 2;
    let mut rows: Vec<(GroupType, Option<bool>)> = Vec::new();
    let sub_powers = |proper: bool| -> Vec<u32> {
        (1..=a).filter(|b| a % b == 0 && (!proper || *b < a)).map(|b| p.pow(b) as u32).collect()
    };
    let a4 = odd || a % 2 == 0;
    let s4 = (q * q - 1) % 16 == 0;
    let a5 = p == 5 || (q * q - 1) % 5 == 0;
    let pgl_ambient = ambient == Ambient::Pgl2 && odd;
    if pgl_ambient {
        rows.push((GroupType::Borel(q * (q - 1)), None));
        rows.push((GroupType::Cyclic(q - 1), None));
        rows.push((GroupType::Cyclic(q + 1), None));
        rows.push((GroupType::Dihedral(2 * (q - 1)), None));
        rows.push((GroupType::Dihedral(2 * (q + 1)), None));
        rows.push((GroupType::A4, Some(true)));
        rows.push((GroupType::S4, Some(q % 8 == 1 || q % 8 == 7)));
        if p == 5 || q % 10 == 1 || q % 10 == 9 {
            rows.push((GroupType::A5, Some(true)));
        }
        for qq in sub_powers(false) {
            rows.push((GroupType::Psl2(qq), Some(true)));
        }
        for qq in sub_powers(true) {
            rows.push((GroupType::Pgl2(qq), None));
        }
    } else {
        rows.push((GroupType::Borel(q * (q - 1) / d), None));
        rows.push((GroupType::Cyclic((q - 1) / d), None));
        rows.push((GroupType::Cyclic((q + 1) / d), None));
        rows.push((GroupType::Dihedral(2 * (q - 1) / d), None));
        rows.push((GroupType::Dihedral(2 * (q + 1) / d), None));
        if a4 {
            rows.push((GroupType::A4, None));
        }
        if s4 {
            rows.push((GroupType::S4, None));
        }
        if a5 {
            rows.push((GroupType::A5, None));
        }
        for qq in sub_powers(true) {
            rows.push((GroupType::Psl2(qq), None));
        }
        if odd {
            for b in 1..=a {
                if a % (2 * b) == 0 {
                    rows.push((GroupType::Pgl2(p.pow(b) as u32), None));
                }
            }
        }
    }
    let lift = ambient == Ambient::Sl2 && odd;
    if lift {
        rows = rows
            .into_iter()
            .map(|(t, _)| {
                let lt = match t {
                    GroupType::Cyclic(n) => GroupType::Cyclic(2 * n),
                    GroupType::Dihedral(n) if n == 2 * (q + 1) / 2 => GroupType::TorusNormalizer(q as u32),
                    GroupType::Dihedral(n) => GroupType::BinaryDihedral(2 * n),
                    GroupType::Borel(n) => GroupType::Borel(2 * n),
                    GroupType::A4 => GroupType::Sl23,
                    GroupType::S4 => GroupType::BinaryOctahedral,
                    GroupType::A5 => GroupType::Sl25,
                    GroupType::Psl2(3) => GroupType::Sl23,
                    GroupType::Psl2(5) => GroupType::Sl25,
                    GroupType::Psl2(qq) => GroupType::Sl2(qq),
                    GroupType::Pgl2(qq) => GroupType::LiftPgl2(qq),
                    other => other,
                };
                (lt, None)
            })
            .collect();
    }
    let full = match ambient {
        Ambient::Sl2 => q * (q * q - 1),
        Ambient::Psl2 => q * (q * q - 1) / d,
        Ambient::Pgl2 => q * (q * q - 1),
    };
    let source = match (ambient, lift) {
        (Ambient::Sl2, true) => "dickson-sl2-preimage",
        (Ambient::Pgl2, _) if odd => "dickson-pgl2",
        _ => "dickson-psl2",
    };
    let mut out: Vec<DicksonEntry> = Vec::new();
    for (t, in_psl) in rows {
        let order = t.order().unwrap();
        if order < 2 || order >= full {
            continue;
        }
        if out.iter().any(|r| r.group_type == t) {
            continue;
        }
        let image = if lift { order / 2 } else { order };
        out.push(DicksonEntry {
            group_type: t,
            order,
            divisible_by_q_plus_1: image % (q + 1) == 0,
            source,
            in_psl,
        });
    }
    out
}

fn divides(a: u64, b: u64) -> bool {
    a != 0 && b % a == 0
}

impl DicksonEntry {
    /// Whether a group of type `t` embeds in a group of this row's type.
    pub fn admits(&self, t: GroupType) -> bool {
        use GroupType::*;
        let n = match t.order() {
            Some(n) => n,
            None => return false,
        };
        if t == self.group_type {
            return true;
        }
        let big = self.order;
        match (self.group_type, t) {
            (Cyclic(m), Cyclic(k)) => divides(k, m),
            (BinaryDihedral(_) | TorusNormalizer(_), Cyclic(k)) => divides(k, big / 2) || k == 4,
            (BinaryDihedral(_) | TorusNormalizer(_), BinaryDihedral(k)) => divides(k / 4, big / 4),
            (Dihedral(_), Cyclic(k)) => divides(k, big / 2) || k == 2,
            (Dihedral(_), Dihedral(k)) => divides(k / 2, big / 2),
            (Borel(_), Cyclic(_) | Borel(_) | BinaryDihedral(_)) => divides(n, big),
            (Sl23, Cyclic(k)) => [1, 2, 3, 4, 6].contains(&k),
            (Sl23, BinaryDihedral(8)) => true,
            (BinaryOctahedral, Cyclic(k)) => [1, 2, 3, 4, 6, 8].contains(&k),
            (BinaryOctahedral, BinaryDihedral(k)) => [8, 12, 16].contains(&k),
            (BinaryOctahedral, Sl23) => true,
            (Sl25, Cyclic(k)) => [1, 2, 3, 4, 5, 6, 10].contains(&k),
            (Sl25, BinaryDihedral(k)) => [8, 12, 20].contains(&k),
            (Sl25, Sl23) => true,
            (A4, Cyclic(k)) => [1, 2, 3].contains(&k),
            (A4, Dihedral(4)) => true,
            (S4, Cyclic(k)) => [1, 2, 3, 4].contains(&k),
            (S4, Dihedral(k)) => [4, 6, 8].contains(&k),
            (S4, A4) => true,
            (A5, Cyclic(k)) => [1, 2, 3, 5].contains(&k),
            (A5, Dihedral(k)) => [4, 6, 10].contains(&k),
            (A5, A4) => true,
            (Sl2(_) | Psl2(_) | Pgl2(_) | LiftPgl2(_), _) => divides(n, big),
            _ => false,
        }
    }
}
