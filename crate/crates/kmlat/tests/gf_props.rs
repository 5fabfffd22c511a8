use kmlat::gf::{field_of_order, make_field, norm1_generator, norm1_subgroup, prime_power, ExtElement, Field};
use proptest::prelude::*;

const ORDERS: [u32; 12] = [2, 3, 4, 5, 7, 8, 9, 16, 25, 27, 49, 81];

fn field_and_elems(k: usize) -> impl Strategy<Value = (Field, Vec<u32>)> {
    prop::sample::select(ORDERS.to_vec()).prop_flat_map(move |q| {
        (Just(field_of_order(q).unwrap()), prop::collection::vec(0..q, k))
    })
}

proptest! {
    #[test]
    fn ring_axioms((f, v) in field_and_elems(3)) {
        let (a, b, c) = (f.elem(v[0]), f.elem(v[1]), f.elem(v[2]));
        prop_assert_eq!(a + b, b + a);
        prop_assert_eq!(a * b, b * a);
        prop_assert_eq!((a + b) + c, a + (b + c));
        prop_assert_eq!((a * b) * c, a * (b * c));
        prop_assert_eq!(a * (b + c), a * b + a * c);
        prop_assert_eq!(a - a, f.zero());
        prop_assert_eq!(a + (-a), f.zero());
    }

    #[test]
    fn inverses_and_fermat((f, v) in field_and_elems(1)) {
        let a = f.elem(v[0]);
        prop_assert_eq!(a.pow(f.q() as u64), a);
        if !a.is_zero() {
            prop_assert!((a * a.inv().unwrap()).is_one());
            prop_assert_eq!(a.powi(-1).unwrap(), a.inv().unwrap());
        } else {
            prop_assert!(a.inv().is_err());
        }
    }

    #[test]
    fn frobenius_is_additive_and_has_order_a((f, v) in field_and_elems(2)) {
        let (a, b) = (f.elem(v[0]), f.elem(v[1]));
        prop_assert_eq!((a + b).frobenius(), a.frobenius() + b.frobenius());
        prop_assert_eq!((a * b).frobenius(), a.frobenius() * b.frobenius());
        let mut x = a;
        for _ in 0..f.degree() {
            x = x.frobenius();
        }
        prop_assert_eq!(x, a);
    }

    // prime fields agree with plain integer arithmetic
    #[test]
    fn prime_field_matches_integers(p in prop::sample::select(vec![2u32, 3, 5, 7, 11, 13, 101, 509]), x in 0u32..1000, y in 0u32..1000) {
        let f = make_field(p, 1).unwrap();
        let (a, b) = (f.elem(x % p), f.elem(y % p));
        prop_assert_eq!((a + b).value(), (x + y) % p);
        prop_assert_eq!((a * b).value(), (x % p) * (y % p) % p);
        prop_assert_eq!(f.from_int(-(x as i64)).value(), (p - x % p) % p);
    }

    #[test]
    fn ext_multiplication_is_matrix_product((f, v) in field_and_elems(4)) {
        let z = ExtElement::new(f.elem(v[0]), f.elem(v[1]));
        let w = ExtElement::new(f.elem(v[2]), f.elem(v[3]));
        let [a, b, c, d] = z.mult_matrix();
        // column (w.a, w.b) in basis {1, w}
        let zw = z.mul(w);
        prop_assert_eq!(zw.a, a * w.a + b * w.b);
        prop_assert_eq!(zw.b, c * w.a + d * w.b);
        prop_assert_eq!(zw.norm(), z.norm() * w.norm());
        prop_assert_eq!(a * d - b * c, z.norm());
    }
}

#[test]
fn norm_one_group_is_cyclic_of_order_q_plus_1() {
    for q in ORDERS {
        let f = field_of_order(q).unwrap();
        let s = norm1_subgroup(f);
        assert_eq!(s.len(), q as usize + 1, "q={q}");
        let g = norm1_generator(f);
        let mut seen = std::collections::HashSet::new();
        let mut x = ExtElement::one(f);
        for _ in 0..=q {
            seen.insert(x);
            x = x.mul(g);
        }
        assert_eq!(seen.len(), q as usize + 1, "q={q}");
    }
}

#[test]
fn prime_powers() {
    assert_eq!(prime_power(1), None);
    assert_eq!(prime_power(12), None);
    assert_eq!(prime_power(343), Some((7, 3)));
    assert_eq!(prime_power(512), Some((2, 9)));
    assert!(field_of_order(6).is_err());
    assert!(field_of_order(1024).is_err());
}
