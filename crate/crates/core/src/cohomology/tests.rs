use proptest::prelude::*;

use super::*;

#[test]
fn line_bundle_examples() {
    assert_eq!(h_line(1, -2, 1).unwrap(), 1);
    assert_eq!(h_line(2, 0, 0).unwrap(), 1);
    assert_eq!(h_line(2, -3, 2).unwrap(), 1);
    assert_eq!(h_line(2, 2, 0).unwrap(), 6);
    assert!(matches!(h_line(2, 0, 3), Err(CohomError::QOutOfRange { .. })));
    for q in 0..=1 {
        assert_eq!(h_line_cech(1, -1, q).unwrap(), 0);
    }
    assert_eq!(h_line_cech(2, -3, 2).unwrap(), 1);
    assert_eq!(h_line_cech(4, 0, 0), Err(CohomError::SizeCap));
    assert_eq!(h_line_cech(1, 13, 0), Err(CohomError::SizeCap));
}

#[test]
fn closed_form_matches_cech_oracle() {
    for n in 1..=2 {
        for d in -6..=6 {
            for q in 0..=n {
                assert_eq!(h_line(n, d, q).unwrap(), h_line_cech(n, d, q).unwrap(), "n={n} d={d} q={q}");
            }
        }
    }
    for d in [-5, -4, -1, 0, 2] {
        for q in 0..=3 {
            assert_eq!(h_line(3, d, q).unwrap(), h_line_cech(3, d, q).unwrap(), "n=3 d={d} q={q}");
        }
    }
}

#[test]
fn serre_duality_and_euler_characteristic() {
    for n in 1..=2usize {
        for d in -6i64..=6 {
            for q in 0..=n {
                assert_eq!(h_line(n, d, q).unwrap(), h_line(n, -d - n as i64 - 1, n - q).unwrap());
            }
        }
    }
    for d in -6i64..=6 {
        let chi = h_line(2, d, 0).unwrap() as i64 - h_line(2, d, 1).unwrap() as i64 + h_line(2, d, 2).unwrap() as i64;
        assert_eq!(chi, (d + 1) * (d + 2) / 2);
    }
}

#[test]
fn product_examples() {
    assert_eq!(h_product(-2, -2, 2).unwrap(), 1);
    assert_eq!(h_product(-2, -2, 1).unwrap(), 0);
    assert_eq!(h_product(-2, -2, 0).unwrap(), 0);
    assert_eq!(h_product(0, -2, 1).unwrap() + h_product(-2, 0, 1).unwrap(), 2);
    assert_eq!(h_product(0, 0, 0).unwrap(), 1);
    for d1 in -4..=4 {
        for d2 in -4..=4 {
            for q in 0..=2 {
                assert_eq!(h_product(d1, d2, q).unwrap(), h_product(d2, d1, q).unwrap());
            }
        }
    }
}

#[test]
fn tangent_twists() {
    assert_eq!(h_tangent_twist(2, -3, 1).unwrap(), 1);
    assert_eq!(h_tangent_twist(2, -3, 0).unwrap(), 0);
    assert_eq!(h_tangent_twist(2, -3, 2).unwrap(), 0);
    assert_eq!(h_tangent_twist(2, 0, 0).unwrap(), 8);
    assert_eq!(h_tangent_twist(2, -2, 0).unwrap(), 0);
    assert_eq!(h_tangent_twist(2, -1, 0).unwrap(), 3);
    // T_{P1} = O(2); below -2 the sequence alone leaves H^1 maps undetermined
    assert_eq!(h_tangent_twist(1, -3, 0), Err(CohomError::AmbiguousExactSequence));
    for d in -2..=3 {
        for q in 0..=1 {
            assert_eq!(h_tangent_twist(1, d, q).unwrap(), h_line(1, d + 2, q).unwrap(), "d={d} q={q}");
        }
    }
    // H^2(O(-4)) -> H^2(O(-3))^3 is 3 -> 3 with unknown rank
    assert_eq!(h_tangent_twist(2, -4, 1), Err(CohomError::AmbiguousExactSequence));
    assert!(matches!(h_tangent_twist(3, 0, 0), Err(CohomError::Unsupported(_))));
}

#[test]
fn exact_sequences() {
    use MapRank::*;
    // 0 -> H0 -> 13 -> 1 -> H1 -> 0, even part, with surjective connecting map
    let even = les_solve(&[None, Some(13), Some(1), None], &[Free, Surjective, Free]).unwrap();
    assert_eq!(even, [12, 13, 1, 0]);
    let odd = les_solve(&[None, Some(12), Some(0), None], &[Free, Free, Free]).unwrap();
    assert_eq!(odd, [12, 12, 0, 0]);
    assert_eq!(
        les_solve(&[None, Some(13), Some(1), None], &[Free, Free, Free]),
        Err(CohomError::AmbiguousExactSequence)
    );
    assert_eq!(les_solve(&[Some(0), Some(0), Some(0)], &[Free, Free]).unwrap(), [0, 0, 0]);
    assert_eq!(les_solve(&[Some(2), Some(1)], &[Free]), Err(CohomError::Inconsistent));
    assert_eq!(les_solve(&[Some(1), Some(3), None], &[Injective, Free]).unwrap(), [1, 3, 2]);
    assert_eq!(les_solve(&[None, None], &[Free]), Err(CohomError::AmbiguousExactSequence));
    assert_eq!(les_solve(&[None, None], &[Zero]).unwrap(), [0, 0]);
    assert_eq!(les_solve(&[], &[]).unwrap(), Vec::<usize>::new());
}

#[test]
fn sheaf_expressions() {
    let e = SheafExpr::parse(QUOTIENT_DECOMPOSITION).unwrap();
    assert_eq!(eval_sheaf(&e, 0).unwrap(), SuperDim::new(13, 12));
    assert_eq!(eval_sheaf(&e, 1).unwrap(), SuperDim::ZERO);
    let j2 = SheafExpr::parse(SQUARE_IDEAL_PART).unwrap();
    assert_eq!(eval_sheaf(&j2, 0).unwrap(), SuperDim::ZERO);
    assert_eq!(eval_sheaf(&j2, 1).unwrap(), SuperDim::new(1, 0));
    let t = SheafExpr::parse("T(-3) on P2").unwrap();
    assert_eq!(eval_sheaf(&t, 1).unwrap(), SuperDim::new(1, 0));
    let o = SheafExpr::parse("O(0,0) on P1xP1").unwrap();
    assert_eq!(eval_sheaf(&o, 0).unwrap(), SuperDim::new(1, 0));
    let g = SheafExpr::parse("O(0,-2) + O(-2,0) on P1xP1").unwrap();
    assert_eq!(eval_sheaf(&g, 1).unwrap(), SuperDim::new(2, 0));
    let f = SheafExpr::parse("Pi O(-1) + Pi O(-2) on P2").unwrap();
    assert_eq!(cohomology_table(&f).unwrap(), [SuperDim::ZERO; 3]);
    let empty = SheafExpr::parse("0 on P2").unwrap();
    assert_eq!(eval_sheaf(&empty, 0).unwrap(), SuperDim::ZERO);
    let m = SheafExpr::parse("3*O(+1) + 2 Pi O ^2 on P2").unwrap();
    assert_eq!(eval_sheaf(&m, 0).unwrap(), SuperDim::new(9, 4));
    for bad in ["O(1)", "O(1) on Q2", "X(1) on P2", "O(1 on P2", "T(0) on P3", "O(1,1) on P2", "O(1) on P1xP1"] {
        assert!(SheafExpr::parse(bad).is_err(), "{bad}");
    }
}

fn arb_expr() -> impl Strategy<Value = SheafExpr> {
    let atom = (-4i64..=4, any::<bool>(), 1usize..3, 0u8..3).prop_map(|(d, pi, multiplicity, k)| {
        let kind = if k == 0 { AtomKind::Tangent(d.max(-3)) } else { AtomKind::Line(d) };
        Atom { kind, pi, multiplicity }
    });
    proptest::collection::vec(atom, 0..5).prop_map(|atoms| SheafExpr { space: Space::P(2), atoms })
}

proptest! {
    #[test]
    fn eval_is_additive_and_pi_involutive(a in arb_expr(), b in arb_expr(), q in 0usize..=2) {
        let s = a.sum(&b).unwrap();
        prop_assert_eq!(eval_sheaf(&s, q).unwrap(), eval_sheaf(&a, q).unwrap() + eval_sheaf(&b, q).unwrap());
        prop_assert_eq!(eval_sheaf(&a.pi(), q).unwrap(), eval_sheaf(&a, q).unwrap().pi());
        prop_assert_eq!(a.pi().pi(), a);
    }

    #[test]
    fn kunneth_additive_in_each_factor(d1 in -5i64..=5, d2 in -5i64..=5) {
        let total: usize = (0..=2).map(|q| h_product(d1, d2, q).unwrap()).sum::<usize>();
        let f = |d: i64| (0..=1).map(|q| h_line(1, d, q).unwrap()).sum::<usize>();
        prop_assert_eq!(total, f(d1) * f(d2));
    }
}
