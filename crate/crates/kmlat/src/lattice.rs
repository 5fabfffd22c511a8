//! Edges of groups acting on the tree: faithfulness, the embedding criterion
//! checked on the exact tree, covering data, covolumes, and the table-driven
//! classification of edge-transitive lattices.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::gf::{prime_power, Field};
use crate::groups::{
    find_subgroup_of_type, nonsplit_torus, torus_normalizer, FiniteGroup, GroupElement, GroupError, GroupType,
    SlMat,
};
use crate::serretree::{
    act, act_edge, edge_distance, membership, neighbors, Edge, Mat2, ParahoricKind, SerreError, Vertex,
};

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("vertex group does not fix {0}")]
    WrongFixedVertex(&'static str),
    #[error("map is not an injective homomorphism: {0}")]
    NotAHomomorphism(String),
    #[error("kind {kind} is not admissible for q = {q}")]
    KindInadmissible { kind: String, q: u32 },
    #[error("invalid classification input: {0}")]
    InvalidInput(String),
    #[error("no edge-transitive lattice, minimum undefined")]
    MinUndefined,
    #[error("graph of groups has an empty vertex group")]
    EmptyVertexGroup,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Serre(#[from] SerreError),
}

fn ser_ratio<S: Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

fn ser_opt_ratio<S: Serializer>(r: &Option<Ratio<u64>>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => ser_ratio(r, s),
        None => s.serialize_none(),
    }
}

/// Amalgam data `A1 <- A0 -> A2`, embeddings stored elementwise.
#[derive(Debug, Clone)]
pub struct EdgeOfGroups<E: GroupElement> {
    pub a0: FiniteGroup<E>,
    pub a1: FiniteGroup<E>,
    pub a2: FiniteGroup<E>,
    alpha1: HashMap<E, E>,
    alpha2: HashMap<E, E>,
}

fn check_embedding<E: GroupElement>(
    a0: &FiniteGroup<E>,
    target: &FiniteGroup<E>,
    alpha: &HashMap<E, E>,
) -> Result<(), LatticeError> {
    let img: HashSet<&E> = a0.elements().iter().filter_map(|x| alpha.get(x)).collect();
    if img.len() != a0.order() || !img.iter().all(|y| target.contains(y)) {
        return Err(LatticeError::NotAHomomorphism("not injective into the vertex group".into()));
    }
    for x in a0.elements() {
        for y in a0.gens() {
            if alpha[&x.op(y)] != alpha[x].op(&alpha[y]) {
                return Err(LatticeError::NotAHomomorphism(format!("fails at {x:?} * {y:?}")));
            }
        }
    }
    Ok(())
}

impl<E: GroupElement> EdgeOfGroups<E> {
    pub fn new(
        a0: FiniteGroup<E>,
        a1: FiniteGroup<E>,
        a2: FiniteGroup<E>,
        alpha1: HashMap<E, E>,
        alpha2: HashMap<E, E>,
    ) -> Result<Self, LatticeError> {
        check_embedding(&a0, &a1, &alpha1)?;
        check_embedding(&a0, &a2, &alpha2)?;
        Ok(EdgeOfGroups { a0, a1, a2, alpha1, alpha2 })
    }

    /// Edge group `A1 ∩ A2` with both embeddings the inclusion.
    pub fn inclusion(a1: FiniteGroup<E>, a2: FiniteGroup<E>) -> Self {
        let a0 = a1.intersection(&a2);
        let id: HashMap<E, E> = a0.elements().iter().map(|x| (x.clone(), x.clone())).collect();
        EdgeOfGroups { a0, a1, a2, alpha1: id.clone(), alpha2: id }
    }

    pub fn alpha1(&self, x: &E) -> &E {
        &self.alpha1[x]
    }

    pub fn alpha2(&self, x: &E) -> &E {
        &self.alpha2[x]
    }

    /// `[A1 : A0]` and `[A2 : A0]`.
    pub fn indices(&self) -> (usize, usize) {
        (self.a1.order() / self.a0.order(), self.a2.order() / self.a0.order())
    }
}

/// Largest subgroup of `A0` whose images are normal in both vertex groups.
/// Starts from `A0` and discards elements whose conjugates by a vertex
/// generator leave the current candidate, until nothing changes.
pub fn faithfulness_kernel<E: GroupElement>(eog: &EdgeOfGroups<E>) -> FiniteGroup<E> {
    let mut cur: HashSet<E> = eog.a0.elements().iter().cloned().collect();
    loop {
        let img1: HashSet<&E> = cur.iter().map(|x| eog.alpha1(x)).collect();
        let img2: HashSet<&E> = cur.iter().map(|x| eog.alpha2(x)).collect();
        let stable = |img: &HashSet<&E>, y: &E, gens: &[E]| {
            gens.iter().all(|g| img.contains(&g.op(y).op(&g.inverse())))
        };
        let next: HashSet<E> = cur
            .iter()
            .filter(|x| {
                stable(&img1, eog.alpha1(x), eog.a1.gens()) && stable(&img2, eog.alpha2(x), eog.a2.gens())
            })
            .cloned()
            .collect();
        if next.len() == cur.len() {
            break;
        }
        cur = next;
    }
    let gens: Vec<E> = cur.into_iter().collect();
    crate::groups::closure(&gens).expect("kernel contains the identity")
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub q: u32,
    pub a1_order: usize,
    pub a2_order: usize,
    /// Orbit sizes of `A_i` on the neighbours of `x_i`, sorted.
    pub orbit_sizes: [Vec<usize>; 2],
    /// `|Stab_{A_i}(x_{3-i})|`.
    pub stabilizer_orders: [usize; 2],
    pub intersection_order: usize,
    pub transitive: [bool; 2],
    pub stabilizer_condition: [bool; 2],
    pub pass: bool,
    pub faithfulness_kernel_order: usize,
    /// `[A_i : A1 ∩ A2]`, reported on pass.
    pub edge_indices: Option<[usize; 2]>,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub covolume: Option<Ratio<u64>>,
}

fn fixes(g: &Mat2, v: &Vertex) -> Result<bool, SerreError> {
    act(g, v)?.same_as(v)
}

fn orbit_sizes(gens: &[Mat2], center: &Vertex) -> Result<Vec<usize>, SerreError> {
    let nbrs = neighbors(center)?;
    let n = nbrs.len();
    let mut perms = Vec::with_capacity(gens.len());
    for g in gens {
        let mut perm = Vec::with_capacity(n);
        for v in &nbrs {
            let w = act(g, v)?;
            let mut hit = None;
            for (j, u) in nbrs.iter().enumerate() {
                if w.same_as(u)? {
                    hit = Some(j);
                    break;
                }
            }
            perm.push(hit.expect("stabiliser of a vertex permutes its neighbours"));
        }
        perms.push(perm);
    }
    let mut seen = vec![false; n];
    let mut sizes = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![s];
        let mut size = 0;
        while let Some(x) = stack.pop() {
            size += 1;
            for p in &perms {
                if !seen[p[x]] {
                    seen[p[x]] = true;
                    stack.push(p[x]);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable();
    Ok(sizes)
}

/// Checks that `A_i` fixes `x_i`, acts transitively on its neighbours and
/// that `Stab_{A_i}(x_{3-i}) = A1 ∩ A2`, with `(x1, x2)` the given edge.
pub fn lubotzky_check(
    a1: &FiniteGroup<Mat2>,
    a2: &FiniteGroup<Mat2>,
    base: &Edge,
) -> Result<VerificationReport, LatticeError> {
    let (x1, x2) = (&base.u, &base.v);
    for g in a1.gens() {
        if !fixes(g, x1)? {
            return Err(LatticeError::WrongFixedVertex("x1"));
        }
    }
    for g in a2.gens() {
        if !fixes(g, x2)? {
            return Err(LatticeError::WrongFixedVertex("x2"));
        }
    }
    let q = x1.rep.field().q();
    let o1 = orbit_sizes(a1.gens(), x1)?;
    let o2 = orbit_sizes(a2.gens(), x2)?;
    let inter = a1.intersection(a2);
    let mut stab = [HashSet::new(), HashSet::new()];
    for (i, (a, other)) in [(a1, x2), (a2, x1)].into_iter().enumerate() {
        for g in a.elements() {
            if fixes(g, other)? {
                stab[i].insert(g.clone());
            }
        }
    }
    let same = |s: &HashSet<Mat2>| s.len() == inter.order() && inter.elements().iter().all(|x| s.contains(x));
    let transitive = [o1.len() == 1, o2.len() == 1];
    let stabilizer_condition = [same(&stab[0]), same(&stab[1])];
    let pass = transitive.iter().chain(&stabilizer_condition).all(|b| *b);
    let kernel = faithfulness_kernel(&EdgeOfGroups::inclusion(a1.clone(), a2.clone()));
    let covolume = pass.then(|| Ratio::new(1, a1.order() as u64) + Ratio::new(1, a2.order() as u64));
    Ok(VerificationReport {
        q,
        a1_order: a1.order(),
        a2_order: a2.order(),
        orbit_sizes: [o1, o2],
        stabilizer_orders: [stab[0].len(), stab[1].len()],
        intersection_order: inter.order(),
        transitive,
        stabilizer_condition,
        pass,
        faithfulness_kernel_order: kernel.order(),
        edge_indices: pass.then(|| [a1.order() / inter.order(), a2.order() / inter.order()]),
        covolume,
    })
}

fn coset_transversal<E: GroupElement>(a: &FiniteGroup<E>, sub: &HashSet<E>) -> Vec<E> {
    let mut covered: HashSet<E> = HashSet::new();
    let mut out = Vec::new();
    for g in a.elements() {
        if covered.contains(g) {
            continue;
        }
        for h in sub {
            covered.insert(g.op(h));
        }
        out.push(g.clone());
    }
    out
}

/// Covering of the amalgam onto the standard edge `P1 <- B -> P2`.
///
/// `rho1`, `rho2` send vertex-group elements to matrices. The edge-group map
/// is forced by the diagram: `rho0(a) = delta1^-1 rho1(alpha1 a) delta1`, which
/// must lie in `B` and satisfy `delta2 rho0(a) delta2^-1 = rho2(alpha2 a)`.
/// Then each coset map `g A0 -> rho_i(g) delta_i B` must be a bijection onto
/// the `q + 1` cosets of `B` in `P_i`, i.e. onto the neighbours of `x_i`.
pub fn covering_check<E: GroupElement>(
    eog: &EdgeOfGroups<E>,
    rho1: impl Fn(&E) -> Mat2,
    rho2: impl Fn(&E) -> Mat2,
    delta1: &Mat2,
    delta2: &Mat2,
) -> Result<bool, LatticeError> {
    let f = delta1.field();
    let (p1, p2) = (ParahoricKind::P1, ParahoricKind::P2);
    if !membership(delta1, p1) || !membership(delta2, p2) {
        return Ok(false);
    }
    for (a, rho, kind) in [(&eog.a1, &rho1 as &dyn Fn(&E) -> Mat2, p1), (&eog.a2, &rho2, p2)] {
        for x in a.elements() {
            if !membership(&rho(x), kind) {
                return Ok(false);
            }
        }
        for x in a.elements() {
            for y in a.gens() {
                if rho(&x.op(y)) != rho(x).mul(&rho(y))? {
                    return Err(LatticeError::NotAHomomorphism(format!("rho fails at {x:?} * {y:?}")));
                }
            }
        }
    }
    let d1i = delta1.inv()?;
    let d2i = delta2.inv()?;
    for a in eog.a0.elements() {
        let r0 = d1i.mul(&rho1(eog.alpha1(a)))?.mul(delta1)?;
        if !membership(&r0, ParahoricKind::B) {
            return Ok(false);
        }
        if delta2.mul(&r0)?.mul(&d2i)? != rho2(eog.alpha2(a)) {
            return Ok(false);
        }
    }
    let q = f.q() as usize;
    let (x1, x2) = (Vertex::x1(f), Vertex::x2(f));
    let sides: [(&FiniteGroup<E>, &dyn Fn(&E) -> Mat2, &Mat2, &Vertex, bool); 2] =
        [(&eog.a1, &rho1, delta1, &x2, true), (&eog.a2, &rho2, delta2, &x1, false)];
    for (a, rho, delta, far, first) in sides {
        let sub: HashSet<E> = eog
            .a0
            .elements()
            .iter()
            .map(|x| if first { eog.alpha1(x).clone() } else { eog.alpha2(x).clone() })
            .collect();
        let reps = coset_transversal(a, &sub);
        if reps.len() != q + 1 {
            return Ok(false);
        }
        let mut images: Vec<Vertex> = Vec::new();
        for g in &reps {
            let v = act(&rho(g).mul(delta)?, far)?;
            for w in &images {
                if v.same_as(w)? {
                    return Ok(false);
                }
            }
            images.push(v);
        }
    }
    Ok(true)
}

/// Finite graph of finite groups; only vertex group orders enter the covolume.
#[derive(Debug, Clone)]
pub struct GraphOfGroups {
    vertex_orders: Vec<u64>,
    edges: Vec<(usize, usize, u64)>,
}

impl GraphOfGroups {
    pub fn new(vertex_orders: Vec<u64>, edges: Vec<(usize, usize, u64)>) -> Result<Self, LatticeError> {
        if vertex_orders.iter().any(|&n| n == 0) || edges.iter().any(|e| e.2 == 0) {
            return Err(LatticeError::EmptyVertexGroup);
        }
        Ok(GraphOfGroups { vertex_orders, edges })
    }

    pub fn edge(a1: u64, a2: u64, a0: u64) -> Result<Self, LatticeError> {
        Self::new(vec![a1, a2], vec![(0, 1, a0)])
    }

    pub fn edges(&self) -> &[(usize, usize, u64)] {
        &self.edges
    }
}

/// Sum of `1/|Γ_s|` over vertices.
pub fn covolume(g: &GraphOfGroups) -> Ratio<u64> {
    g.vertex_orders.iter().map(|&n| Ratio::new(1, n)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Levi {
    Psl,
    Pgl,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub zmi_in_zg: Option<bool>,
    pub qi_in_zg: Option<bool>,
    pub qi0_in_zg: Option<bool>,
    pub qi0_nontrivial: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassificationInput {
    pub p: u32,
    pub q: u32,
    pub m: u32,
    pub levi: Levi,
    pub z_order: u64,
    pub flags: Flags,
}

impl ClassificationInput {
    /// `SL2(F_q((t^-1)))`.
    pub fn sl2(q: u32) -> Self {
        let (p, _) = prime_power(q).expect("prime power");
        ClassificationInput {
            p,
            q,
            m: 2,
            levi: Levi::Psl,
            z_order: if p == 2 { 1 } else { 2 },
            flags: Flags::default(),
        }
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        let bad = |s: &str| Err(LatticeError::InvalidInput(s.to_string()));
        match prime_power(self.q) {
            Some((p, _)) if p == self.p => {}
            _ => return bad("q must be a power of p"),
        }
        if self.m < 2 {
            return bad("m must be at least 2");
        }
        let qm1 = (self.q - 1) as u64;
        if self.z_order == 0 || (qm1 * qm1) % self.z_order != 0 {
            return bad("|Z(G)| must divide (q-1)^2");
        }
        let f = self.flags;
        let pgl = self.p != 2 && self.levi == Levi::Pgl;
        let one_mod_4 = self.q % 4 == 1;
        let q_flags = [f.qi_in_zg, f.qi0_in_zg, f.qi0_nontrivial];
        if !pgl {
            if f.zmi_in_zg.is_some() || q_flags.iter().any(Option::is_some) {
                return bad("structural flags apply only to a PGL Levi factor in odd characteristic");
            }
            return Ok(());
        }
        if one_mod_4 {
            if f.zmi_in_zg.is_some() {
                return bad("zmi-in-zg applies when q = 3 mod 4");
            }
            let (Some(qz), Some(q0z), Some(q0nt)) = (f.qi_in_zg, f.qi0_in_zg, f.qi0_nontrivial) else {
                return bad("q = 1 mod 4 with a PGL Levi factor needs qi-in-zg, qi0-in-zg and qi0-nontrivial");
            };
            if qz && !q0z {
                return bad("Q_i in Z(G) forces its index-2 subgroup into Z(G)");
            }
            if !q0nt && !q0z {
                return bad("a trivial Q_i^0 lies in Z(G)");
            }
            if qz && self.z_order % 2 == 1 {
                return bad("Q_i in Z(G) needs |Z(G)| even");
            }
            if q0nt && q0z && self.z_order % 2 == 1 {
                return bad("a nontrivial Q_i^0 in Z(G) needs |Z(G)| even");
            }
        } else {
            if q_flags.iter().any(Option::is_some) {
                return bad("Q_i flags apply when q = 1 mod 4");
            }
            if f.zmi_in_zg.is_none() {
                return bad("q = 3 mod 4 with a PGL Levi factor needs zmi-in-zg");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeDescriptor {
    pub q: u32,
    pub case: String,
    pub a0_order: u64,
    pub vertex_type: String,
    pub vertex_order: u64,
    #[serde(serialize_with = "ser_ratio")]
    pub covolume: Ratio<u64>,
    pub delta0: Option<u8>,
    pub exceptional: bool,
}

impl LatticeDescriptor {
    fn new(q: u32, case: &str, a0_order: u64, vertex_type: String, delta0: Option<u8>, exceptional: bool) -> Self {
        let covolume = Ratio::new(2, (q as u64 + 1) * a0_order);
        let vertex_order = (q as u64 + 1) * a0_order;
        assert_eq!(covolume, Ratio::new(2, vertex_order));
        LatticeDescriptor { q, case: case.into(), a0_order, vertex_type, vertex_order, covolume, delta0, exceptional }
    }
}

/// `(q, tag, vertex type over SL2, |N|)` for the sporadic amalgams.
const EXCEPTIONS: [(u32, &str, GroupType); 8] = [
    (5, "exceptional.q5", GroupType::Sl23),
    (7, "exceptional.q7", GroupType::BinaryOctahedral),
    (11, "exceptional.q11.a", GroupType::Sl23),
    (11, "exceptional.q11.b", GroupType::Sl25),
    (19, "exceptional.q19", GroupType::Sl25),
    (23, "exceptional.q23", GroupType::BinaryOctahedral),
    (29, "exceptional.q29", GroupType::Sl25),
    (59, "exceptional.q59", GroupType::Sl25),
];

/// The exceptional vertex types with their edge-group orders over SL2.
pub fn sl2_exceptions() -> Vec<(u32, GroupType, u64)> {
    EXCEPTIONS
        .iter()
        .map(|&(q, _, t)| (q, t, t.order().unwrap() / (q as u64 + 1)))
        .collect()
}

fn with_center(z: u64, base: &str) -> String {
    if z == 1 {
        base.to_string()
    } else {
        format!("Z{z}.{base}")
    }
}

pub fn classify(input: &ClassificationInput) -> Result<Vec<LatticeDescriptor>, LatticeError> {
    input.validate()?;
    let (q, z) = (input.q, input.z_order);
    let mut rows = Vec::new();
    if input.p == 2 {
        rows.push(LatticeDescriptor::new(q, "char2.cyclic", z, with_center(z, &format!("C{}", q + 1)), Some(1), false));
        return Ok(rows);
    }
    let one_mod_4 = q % 4 == 1;
    match input.levi {
        Levi::Psl => {
            if !one_mod_4 {
                let vt = if z == 2 {
                    GroupType::TorusNormalizer(q).to_string()
                } else {
                    with_center(z, &format!("D{}", q + 1))
                };
                rows.push(LatticeDescriptor::new(q, "psl.dihedral", z, vt, Some(1), false));
            }
            for (eq, tag, t) in EXCEPTIONS {
                if eq != q {
                    continue;
                }
                // A_i = A0 N_i with |N_i : N_i ∩ A0| = q+1; over PSL-type centres N_i drops to its image
                let n = t.order().unwrap();
                let a0 = n * z / (2 * (q as u64 + 1));
                let vt = match z {
                    2 => t.to_string(),
                    _ => {
                        let img = match t {
                            GroupType::Sl23 => "A4",
                            GroupType::BinaryOctahedral => "S4",
                            _ => "A5",
                        };
                        with_center(z, img)
                    }
                };
                rows.push(LatticeDescriptor::new(q, tag, a0, vt, None, true));
            }
        }
        Levi::Pgl => {
            let f = input.flags;
            if one_mod_4 {
                let (qz, q0z, q0nt) = (f.qi_in_zg.unwrap(), f.qi0_in_zg.unwrap(), f.qi0_nontrivial.unwrap());
                if q0nt && !q0z {
                    return Ok(rows);
                }
                let d = if qz { 2 } else { 4 };
                rows.push(LatticeDescriptor::new(q, "pgl.q1mod4.extended", d * z, "H.O2(C).<t>.Z0".into(), Some(d as u8), false));
                if qz {
                    rows.push(LatticeDescriptor::new(q, "pgl.q1mod4.plain", z, "H.O2(C).Z0".into(), Some(1), false));
                }
            } else {
                let zm = f.zmi_in_zg.unwrap();
                let d = if zm { 2 } else { 4 };
                rows.push(LatticeDescriptor::new(q, "pgl.q3mod4.torus", d * z, "C'.T0.Z0".into(), Some(d as u8), false));
                if zm {
                    rows.push(LatticeDescriptor::new(q, "pgl.q3mod4.cyclic", z, "C'.A0".into(), Some(1), false));
                    rows.push(LatticeDescriptor::new(q, "pgl.q3mod4.normalizer", z, "A0.N(H)".into(), Some(1), false));
                }
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinCovolume {
    #[serde(serialize_with = "ser_ratio")]
    pub covolume: Ratio<u64>,
    pub delta0: u8,
    /// Whether the minimum over all cocompact lattices is known to be this
    /// value (p = 2, or q > 300); below that only the edge-transitive minimum
    /// over the generic rows is reported.
    pub generic_regime: bool,
}

/// Minimum covolume over the non-sporadic classification rows.
pub fn min_covolume(input: &ClassificationInput) -> Result<MinCovolume, LatticeError> {
    let rows = classify(input)?;
    let best = rows
        .iter()
        .filter(|r| !r.exceptional)
        .min_by_key(|r| r.covolume)
        .ok_or(LatticeError::MinUndefined)?;
    let delta0 = best.delta0.expect("generic rows carry delta0");
    let expect = Ratio::new(2, (input.q as u64 + 1) * input.z_order * delta0 as u64);
    assert_eq!(best.covolume, expect);
    Ok(MinCovolume { covolume: best.covolume, delta0, generic_regime: input.p == 2 || input.q > 300 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeKind {
    CyclicP2,
    TorusNormalizer,
    Exceptional(GroupType),
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeKind::CyclicP2 => write!(f, "cyclic_p2"),
            LatticeKind::TorusNormalizer => write!(f, "torus_normalizer"),
            LatticeKind::Exceptional(t) => write!(f, "exceptional({t})"),
        }
    }
}

impl LatticeKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cyclic_p2" => Some(LatticeKind::CyclicP2),
            "torus_normalizer" | "torus_normalizer_q3mod4" => Some(LatticeKind::TorusNormalizer),
            _ => {
                let inner = s.strip_prefix("exceptional(")?.strip_suffix(')')?;
                GroupType::parse(inner).map(LatticeKind::Exceptional)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct StandardLattice {
    pub kind: LatticeKind,
    pub a1: FiniteGroup<Mat2>,
    pub a2: FiniteGroup<Mat2>,
    pub delta: Mat2,
    pub base: Edge,
}

/// Conjugates `h` by a unipotent so that its stabiliser of infinity becomes
/// diagonal, when that stabiliser consists of semisimple elements.
pub fn align_to_torus(h: &FiniteGroup<SlMat>) -> FiniteGroup<SlMat> {
    let f = h.elements()[0].field;
    let gen = h
        .elements()
        .iter()
        .filter(|m| m.e[2] == 0 && m.e[1] != 0 && m.e[0] != m.e[3])
        .max_by_key(|m| (m.order(), **m));
    let Some(g) = gen else { return h.clone() };
    let [a, b, _, d] = g.elems();
    let x = b * (d - a).inv().expect("a != d");
    let u = SlMat::from_elems([f.one(), x, f.zero(), f.one()]);
    h.conjugate(&u.inverse())
}

/// Vertex group in `SL2(F_q)` fixing `x1`, and its `diag(t,1)`-conjugate
/// fixing `x2`. Whether the pair is a lattice is left to [`lubotzky_check`].
pub fn build_standard_lattice(field: Field, kind: LatticeKind) -> Result<StandardLattice, LatticeError> {
    let inadmissible = || LatticeError::KindInadmissible { kind: kind.to_string(), q: field.q() };
    let h = match kind {
        LatticeKind::CyclicP2 if field.p() == 2 => nonsplit_torus(field),
        LatticeKind::CyclicP2 => return Err(inadmissible()),
        LatticeKind::TorusNormalizer => torus_normalizer(field)?,
        LatticeKind::Exceptional(t) => {
            if field.p() == 2 {
                return Err(inadmissible());
            }
            find_subgroup_of_type(field, t).map_err(|e| match e {
                GroupError::SearchBudgetExceeded(_) => inadmissible(),
                other => other.into(),
            })?
        }
    };
    let h = align_to_torus(&h);
    let delta = Mat2::delta(field);
    let a1 = h.image(|m| m.to_mat2());
    let a2 = a1.image(|m| m.conj(&delta).expect("conjugation by diag(t,1)"));
    Ok(StandardLattice { kind, a1, a2, delta, base: Edge::base(field) })
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverLayer {
    pub length: usize,
    pub words: usize,
    pub distinct_edges: usize,
    pub expected_edges: u64,
    pub all_at_distance: bool,
}

/// Images of the base edge under alternating words in nontrivial coset
/// representatives of `A1 ∩ A2`, grouped by word length.
pub fn edge_orbit_layers(
    a1: &FiniteGroup<Mat2>,
    a2: &FiniteGroup<Mat2>,
    base: &Edge,
    max_len: usize,
) -> Result<Vec<CoverLayer>, LatticeError> {
    let q = base.u.rep.field().q() as u64;
    let inter: HashSet<Mat2> = a1.intersection(a2).elements().iter().cloned().collect();
    let nontrivial = |a: &FiniteGroup<Mat2>| -> Vec<Mat2> {
        coset_transversal(a, &inter).into_iter().filter(|g| !inter.contains(g)).collect()
    };
    let t = [nontrivial(a1), nontrivial(a2)];
    // words ending on side s; extend on the left by the other side
    let mut layer: Vec<(Mat2, usize)> = Vec::new();
    for (s, ts) in t.iter().enumerate() {
        layer.extend(ts.iter().map(|g| (g.clone(), s)));
    }
    let mut out = Vec::new();
    for len in 1..=max_len {
        if len > 1 {
            let mut next = Vec::new();
            for (w, s) in &layer {
                for g in &t[1 - s] {
                    next.push((g.mul(w)?, 1 - s));
                }
            }
            layer = next;
        }
        let mut edges: Vec<Edge> = Vec::new();
        let mut at_distance = true;
        for (w, _) in &layer {
            let e = act_edge(w, base)?;
            at_distance &= edge_distance(&e, base)? == len as u32;
            let mut fresh = true;
            for o in &edges {
                if e.same_unordered(o)? {
                    fresh = false;
                    break;
                }
            }
            if fresh {
                edges.push(e);
            }
        }
        out.push(CoverLayer {
            length: len,
            words: layer.len(),
            distinct_edges: edges.len(),
            expected_edges: 2 * q.pow(len as u32),
            all_at_distance: at_distance,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::field_of_order;

    #[test]
    fn covolume_examples() {
        assert_eq!(covolume(&GraphOfGroups::edge(3, 3, 1).unwrap()), Ratio::new(2, 3));
        assert_eq!(covolume(&GraphOfGroups::edge(120, 120, 4).unwrap()), Ratio::new(1, 60));
        assert_eq!(covolume(&GraphOfGroups::new(vec![7], vec![]).unwrap()), Ratio::new(1, 7));
        assert!(GraphOfGroups::new(vec![0], vec![]).is_err());
    }

    #[test]
    fn classify_examples() {
        let mut i = ClassificationInput::sl2(4);
        let rows = classify(&i).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].covolume, Ratio::new(2, 5));
        i = ClassificationInput::sl2(5);
        let rows = classify(&i).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].vertex_type.as_str(), rows[0].a0_order), ("SL2(3)", 4));
        assert!(classify(&ClassificationInput::sl2(13)).unwrap().is_empty());
        assert_eq!(min_covolume(&ClassificationInput::sl2(7)).unwrap().covolume, Ratio::new(1, 8));
        assert_eq!(min_covolume(&ClassificationInput::sl2(8)).unwrap().covolume, Ratio::new(2, 9));
    }

    #[test]
    fn small_cyclic_pair() {
        let f = field_of_order(2).unwrap();
        let l = build_standard_lattice(f, LatticeKind::CyclicP2).unwrap();
        let r = lubotzky_check(&l.a1, &l.a2, &l.base).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.covolume, Some(Ratio::new(2, 3)));
    }
}
