use std::sync::OnceLock;

use num_traits::{Signed, Zero};
use proptest::prelude::*;

use orderlat::algebra::AlgebraElement;
use orderlat::catalog::{BuiltFamily, Family};
use orderlat::exact::rat;
use orderlat::residue::{det_compatible, SplittingMap};

fn families() -> &'static [BuiltFamily] {
    static CELL: OnceLock<Vec<BuiltFamily>> = OnceLock::new();
    CELL.get_or_init(|| {
        [
            Family::Hurwitz,
            Family::Cyclotomic { m: 5 },
            Family::Cyclotomic { m: 7 },
            Family::CyclotomicQuaternion { m: 7 },
            Family::DihedralQuaternion { m: 5 },
        ]
        .iter()
        .map(|f| f.build().unwrap())
        .collect()
    })
}

fn element(dim: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-6i64..=6, dim)
}

fn family_and_elements(count: usize) -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
    (0..families().len()).prop_flat_map(move |i| {
        let dim = families()[i].order.dim;
        (Just(i), prop::collection::vec(element(dim), count))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_is_associative((i, xs) in family_and_elements(3)) {
        let o = &families()[i].order;
        let l = o.mul_int(&o.mul_int(&xs[0], &xs[1]), &xs[2]);
        let r = o.mul_int(&xs[0], &o.mul_int(&xs[1], &xs[2]));
        prop_assert_eq!(l, r);
    }

    #[test]
    fn involution_reverses_products((i, xs) in family_and_elements(2)) {
        let o = &families()[i].order;
        let lhs = o.involute_int(&o.mul_int(&xs[0], &xs[1]));
        let rhs = o.mul_int(&o.involute_int(&xs[1]), &o.involute_int(&xs[0]));
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(o.involute_int(&o.involute_int(&xs[0])), xs[0].clone());
    }

    #[test]
    fn norm_is_multiplicative((i, xs) in family_and_elements(2)) {
        let o = &families()[i].order;
        let xy = o.mul_int(&xs[0], &xs[1]);
        prop_assert_eq!(o.norm_int(&xy), o.norm_int(&xs[0]) * o.norm_int(&xs[1]));
    }

    #[test]
    fn trace_form_is_positive((i, xs) in family_and_elements(1)) {
        let b = &families()[i];
        let o = &b.order;
        let x = AlgebraElement::from_ints(&xs[0]);
        let q = o.trace_q(&o.mul(&o.involute(&x), &x).unwrap());
        if xs[0].iter().all(|&c| c == 0) {
            prop_assert!(q.is_zero());
        } else {
            prop_assert!(q > rat(0));
        }
        let (lhs, rhs) = o.norm_trace_gap(&x, &b.form.value).unwrap();
        let lhs = lhs.numer().to_string().parse::<f64>().unwrap() / lhs.denom().to_string().parse::<f64>().unwrap();
        prop_assert!(lhs >= rhs * (1.0 - 1e-9));
    }

    #[test]
    fn group_action_preserves_norm((i, xs) in family_and_elements(1), g in 0usize..1000) {
        let b = &families()[i];
        let o = &b.order;
        let g = &b.group.elements[g % b.group.order()];
        let gx = o.mul_int(g, &xs[0]);
        prop_assert_eq!(o.norm_int(&gx).abs(), o.norm_int(&xs[0]).abs());
        let gram = b.form.gram_int().unwrap();
        let q = |v: &[i64]| -> i128 {
            (0..v.len()).map(|r| (0..v.len()).map(|c| gram[r][c] * v[r] as i128 * v[c] as i128).sum::<i128>()).sum()
        };
        prop_assert_eq!(q(&gx), q(&xs[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reduction_is_a_ring_map(xs in prop::collection::vec(element(4), 2), pi in 0usize..4) {
        let b = &families()[0];
        let p = [3u64, 5, 7, 11][pi];
        let map = SplittingMap::build(&b.order, p).unwrap();
        let f = map.field();
        let xy = b.order.mul_int(&xs[0], &xs[1]);
        let prod = orderlat::ff::mat_mul(&f, &map.reduce(&xs[0]), &map.reduce(&xs[1]));
        prop_assert_eq!(map.reduce(&xy), prod);
        prop_assert!(det_compatible(&b.order, &map, &f, &xs[0]).unwrap());
    }

    #[test]
    fn cyclotomic_det_compat(x in element(4), pi in 0usize..3) {
        let b = &families()[1];
        let p = [11u64, 31, 41][pi];
        let map = SplittingMap::build(&b.order, p).unwrap();
        prop_assert!(det_compatible(&b.order, &map, &map.field(), &x).unwrap());
    }
}

#[test]
fn unit_group_orders() {
    let orders: Vec<usize> = families().iter().map(|b| b.group.order()).collect();
    assert_eq!(orders, vec![24, 10, 14, 168, 20]);
    for b in families() {
        assert_eq!(b.group.order() as u64, b.family.g0_order());
    }
}
