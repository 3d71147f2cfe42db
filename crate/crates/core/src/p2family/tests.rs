use proptest::prelude::*;

use super::*;
use crate::atlas::{extract_omega, verify_cocycle};

fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

#[test]
fn atlas_closes() {
    for p in [
        FamilyParams::formal(),
        FamilyParams::at_int(1),
        FamilyParams::at_int(0),
        FamilyParams::at(Q::new(3.into(), 7.into())),
    ] {
        let a = build_family_atlas(&p).unwrap();
        let r = verify_cocycle(&a);
        assert!(r.passed(), "{p:?}: {:?}", r.failures);
    }
}

#[test]
fn omega_vanishes_only_in_the_split_case() {
    assert!(extract_omega(&build_family_atlas(&FamilyParams::at_int(0)).unwrap()).unwrap().is_zero());
    let one = extract_omega(&build_family_atlas(&FamilyParams::at_int(1)).unwrap()).unwrap();
    let five = extract_omega(&build_family_atlas(&FamilyParams::at_int(5)).unwrap()).unwrap();
    assert!(!one.is_zero());
    for (k, e) in &one.entries {
        assert_eq!(e.scale(&q(5)), five.entries[k]);
    }
    let a = build_family_atlas(&FamilyParams::at_int(1)).unwrap();
    let w = one.get(0, 1).unwrap();
    assert!(w.components[0].is_zero());
    assert_eq!(w.components[1], SuperFrac::parse(a.ctx(), "theta11*theta21/z11^2").unwrap());
}

#[test]
fn odd_pair_is_the_cube_cocycle() {
    let a = build_family_atlas(&FamilyParams::formal()).unwrap();
    check_fermionic_determinant(&a).unwrap();
    let t = a.transition(1, 0);
    let prod = t.get("theta10").unwrap() * t.get("theta20").unwrap();
    assert_eq!(prod, SuperFrac::parse(a.ctx(), "theta11*theta21/z11^3").unwrap());
    // O(-1) + O(-3) instead of O(-1) + O(-2)
    let (ctx, charts) = charts();
    let bad = TransitionMap::parse(
        &ctx,
        &charts[1],
        &charts[0],
        &[
            ("z10", "1/z11"),
            ("z20", "z21/z11 + lambda*theta11*theta21/z11^2"),
            ("theta10", "theta11/z11"),
            ("theta20", "theta21/z11^3"),
        ],
    )
    .unwrap();
    let m = a.with_transition(bad).unwrap();
    assert!(matches!(check_fermionic_determinant(&m), Err(P2Error::ConstraintViolation(_))));
}

#[test]
fn canonical_sections_are_global() {
    let p = FamilyParams::formal();
    let a = build_family_atlas(&p).unwrap();
    let b = canonical_sections_in(&a, &p).unwrap();
    assert_eq!(b.dims(), (12, 12));
    for (k, v) in b.all().enumerate() {
        assert!(is_global(&a, v).unwrap(), "section {k}: {v}");
    }
    let v11 = VectorField::parse(
        a.ctx(),
        &a.charts()[0],
        &[
            ("z10", "z10^2"),
            ("z20", "z10*z20 + lambda*theta10*theta20"),
            ("theta10", "z10*theta10"),
            ("theta20", "2*z10*theta20"),
        ],
    )
    .unwrap();
    assert_eq!(b.even[10], v11);
    let xi9 = VectorField::parse(a.ctx(), &a.charts()[0], &[("theta10", "z10"), ("z20", "lambda*theta20")]).unwrap();
    assert_eq!(b.odd[8], xi9);
}

#[test]
fn theta_scaling_is_global_only_when_split() {
    let a = build_family_atlas(&FamilyParams::at_int(1)).unwrap();
    assert!(!is_global(&a, &s1(&a).unwrap()).unwrap());
    let d = VectorField::parse(a.ctx(), &a.charts()[0], &[("theta20", "1")]).unwrap();
    assert!(is_global(&a, &d).unwrap());
    let split = build_family_atlas(&FamilyParams::at_int(0)).unwrap();
    assert!(is_global(&split, &s1(&split).unwrap()).unwrap());
}

#[test]
fn canonical_sections_are_independent() {
    let b = canonical_sections(&FamilyParams::at_int(1)).unwrap();
    assert_eq!(span_rank(&b.even.iter().collect::<Vec<_>>()).unwrap(), 12);
    assert_eq!(span_rank(&b.odd.iter().collect::<Vec<_>>()).unwrap(), 12);
}

#[test]
fn solved_sections_match_canonical() {
    for l in [1, -1, 7] {
        let p = FamilyParams::at_int(l);
        let solved = solve_global_sections(&p, DEFAULT_DEGREE_BOUND).unwrap();
        assert_eq!(solved.dims(), (12, 12), "lambda={l}");
        assert_eq!(solved.provenance, Provenance::Solved);
        assert!(same_span(&solved, &canonical_sections(&p).unwrap()).unwrap(), "lambda={l}");
    }
}

#[test]
fn split_case_gains_an_even_section() {
    let p = FamilyParams::at_int(0);
    let solved = solve_global_sections(&p, DEFAULT_DEGREE_BOUND).unwrap();
    assert_eq!(solved.dims(), (13, 12));
    let a = build_family_atlas(&p).unwrap();
    let mut with_s1 = canonical_sections(&p).unwrap();
    with_s1.even.push(s1(&a).unwrap());
    assert!(same_span(&solved, &with_s1).unwrap());
}

#[test]
fn solver_guards() {
    assert!(matches!(solve_global_sections(&FamilyParams::formal(), 3), Err(P2Error::NeedsLambda(_))));
    assert!(matches!(solve_global_sections(&FamilyParams::at_int(1), 2), Err(P2Error::Invalid(_))));
    // a bound below the quadratic generators loses sections
    let a = build_family_atlas(&FamilyParams::at_int(1)).unwrap();
    let low = solve_at(&a, 1).unwrap();
    assert!(low.dims().0 < 12);
}

#[test]
fn delta_of_theta_scaling() {
    let p = FamilyParams::at_int(1);
    let a = build_family_atlas(&p).unwrap();
    let r = delta_class(&a, &s1(&a).unwrap(), DEFAULT_DEGREE_BOUND).unwrap();
    assert!(r.nonzero_class());
    // in the frame of U1
    let e = convert_entry(&a, r.cochain.get(0, 1).unwrap(), 1, 1).unwrap();
    assert!(e.components[0].is_zero());
    assert_eq!(e.components[1], SuperFrac::parse(a.ctx(), "theta11*theta21/z11").unwrap());
    // same cocycle as the gluing data
    let w = extract_omega(&a).unwrap();
    assert_eq!(r.cochain, w);
}

#[test]
fn delta_of_global_sections_vanishes() {
    let p = FamilyParams::at_int(1);
    let a = build_family_atlas(&p).unwrap();
    for v in canonical_sections_in(&a, &p).unwrap().even {
        let r = delta_class(&a, &v, DEFAULT_DEGREE_BOUND).unwrap();
        assert!(r.cochain.is_zero(), "{v}");
        assert!(r.is_coboundary);
    }
    let split = build_family_atlas(&FamilyParams::at_int(0)).unwrap();
    assert!(delta_class(&split, &s1(&split).unwrap(), 3).unwrap().cochain.is_zero());
}

#[test]
fn delta_rejects_bad_input() {
    let a = build_family_atlas(&FamilyParams::at_int(1)).unwrap();
    let far = VectorField::parse(a.ctx(), &a.charts()[0], &[("z10", "z10^3")]).unwrap();
    assert!(matches!(delta_class(&a, &far, 3), Err(P2Error::NotGlobalModJ2(_))));
    let odd = VectorField::parse(a.ctx(), &a.charts()[0], &[("theta10", "1")]).unwrap();
    assert!(matches!(delta_class(&a, &odd, 3), Err(P2Error::Invalid(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn brackets_of_global_sections_are_global(i in 0usize..24, j in 0usize..24) {
        let p = FamilyParams::at_int(1);
        let a = build_family_atlas(&p).unwrap();
        let b: Vec<VectorField> = canonical_sections_in(&a, &p).unwrap().all().cloned().collect();
        let br = b[i].bracket(&b[j]).unwrap();
        prop_assert!(is_global(&a, &br).unwrap(), "[{}, {}] = {}", b[i], b[j], br);
    }
}
