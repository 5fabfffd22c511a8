use kmlat::gf::{field_of_order, Field};
use kmlat::laurent::LaurentPoly;
use kmlat::serretree::{
    act, act_edge, edge_distance, membership, neighbors, vertex_distance, Edge, Mat2, ParahoricKind, Vertex,
};
use proptest::prelude::*;

const QS: [u32; 4] = [2, 3, 4, 5];

fn poly(f: Field, lo: i32, cs: &[u32]) -> LaurentPoly {
    let terms: Vec<_> = cs.iter().enumerate().map(|(i, &c)| (lo + i as i32, f.elem(c % f.q()))).collect();
    LaurentPoly::from_terms(f, &terms).unwrap()
}

/// Alternating upper/lower elementary product; entries in degrees -2..=2.
fn sl2_element(f: Field, factors: &[Vec<u32>]) -> Mat2 {
    let mut m = Mat2::identity(f);
    for (i, cs) in factors.iter().enumerate() {
        let u = poly(f, -2, cs);
        let e = if i % 2 == 0 { Mat2::upper(u) } else { Mat2::lower(u) };
        m = m.mul(&e).unwrap();
    }
    m
}

fn factors() -> impl Strategy<Value = Vec<Vec<u32>>> {
    prop::collection::vec(prop::collection::vec(0u32..32, 5), 1..4)
}

/// Non-backtracking walk: in a tree it ends at distance exactly `steps.len()`.
fn walk(start: &Vertex, steps: &[usize]) -> Vertex {
    let mut prev: Option<Vertex> = None;
    let mut cur = start.clone();
    for &s in steps {
        let ns: Vec<Vertex> = neighbors(&cur)
            .unwrap()
            .into_iter()
            .filter(|n| prev.as_ref().map_or(true, |p| !n.same_as(p).unwrap()))
            .collect();
        let next = ns[s % ns.len()].clone();
        prev = Some(cur);
        cur = next;
    }
    cur
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn walks_realise_distance(q in prop::sample::select(QS.to_vec()), steps in prop::collection::vec(0usize..8, 0..5)) {
        let f = field_of_order(q).unwrap();
        let x1 = Vertex::x1(f);
        let v = walk(&x1, &steps);
        prop_assert_eq!(vertex_distance(&x1, &v).unwrap(), steps.len() as u32);
        prop_assert_eq!(vertex_distance(&v, &x1).unwrap(), steps.len() as u32);
    }

    #[test]
    fn sl2_acts_by_isometries(q in prop::sample::select(QS.to_vec()), g in factors(), s1 in prop::collection::vec(0usize..8, 0..4), s2 in prop::collection::vec(0usize..8, 0..4)) {
        let f = field_of_order(q).unwrap();
        let g = sl2_element(f, &g);
        prop_assert!(g.det().unwrap().is_one());
        let (u, v) = (walk(&Vertex::x1(f), &s1), walk(&Vertex::x2(f), &s2));
        let d = vertex_distance(&u, &v).unwrap();
        prop_assert_eq!(vertex_distance(&act(&g, &u).unwrap(), &act(&g, &v).unwrap()).unwrap(), d);
        let e = Edge::base(f);
        prop_assert_eq!(edge_distance(&act_edge(&g, &e).unwrap(), &e).unwrap() == 0, g_fixes_base(&g));
    }

    #[test]
    fn vertex_stabilisers_are_the_maximal_parahorics(q in prop::sample::select(QS.to_vec()), g in factors()) {
        let f = field_of_order(q).unwrap();
        let g = sl2_element(f, &g);
        let (x1, x2) = (Vertex::x1(f), Vertex::x2(f));
        prop_assert_eq!(membership(&g, ParahoricKind::P1), act(&g, &x1).unwrap().same_as(&x1).unwrap());
        prop_assert_eq!(membership(&g, ParahoricKind::P2), act(&g, &x2).unwrap().same_as(&x2).unwrap());
        prop_assert_eq!(
            membership(&g, ParahoricKind::B),
            membership(&g, ParahoricKind::P1) && membership(&g, ParahoricKind::P2)
        );
    }

    #[test]
    fn inverse_and_parse(q in prop::sample::select(QS.to_vec()), g in factors()) {
        let f = field_of_order(q).unwrap();
        let g = sl2_element(f, &g);
        prop_assert!(g.mul(&g.inv().unwrap()).unwrap().is_identity());
        prop_assert_eq!(Mat2::parse(f, &g.to_string()).unwrap(), g);
    }
}

fn g_fixes_base(g: &Mat2) -> bool {
    membership(g, ParahoricKind::B)
}

#[test]
fn neighbourhoods_are_stars() {
    for q in QS {
        let f = field_of_order(q).unwrap();
        for v in [Vertex::x1(f), Vertex::x2(f)] {
            let ns = neighbors(&v).unwrap();
            assert_eq!(ns.len(), q as usize + 1);
            for (i, a) in ns.iter().enumerate() {
                assert_eq!(vertex_distance(&v, a).unwrap(), 1);
                for b in &ns[i + 1..] {
                    assert_eq!(vertex_distance(a, b).unwrap(), 2);
                }
            }
        }
    }
}

#[test]
fn congruence_filtration_is_nested() {
    let f = field_of_order(3).unwrap();
    let m = Mat2::parse(f, "1,t^-2;0,1").unwrap();
    assert!(membership(&m, ParahoricKind::U(1)));
    assert!(membership(&m, ParahoricKind::U(2)));
    assert!(!membership(&m, ParahoricKind::U(3)));
    assert!(membership(&m, ParahoricKind::B));
}
