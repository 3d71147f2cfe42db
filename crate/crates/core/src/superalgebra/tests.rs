use num_traits::One;
use proptest::prelude::*;

use super::json::*;
use super::*;

fn ctx() -> Ctx {
    GeneratorContext::new(&["z", "w"], &["t1", "t2", "t3"], &[] as &[&str]).unwrap()
}

fn p(c: &Ctx, s: &str) -> SuperFrac {
    SuperFrac::parse(c, s).unwrap()
}

#[test]
fn anticommutation_and_square_zero() {
    let c = ctx();
    assert_eq!(&p(&c, "t2") * &p(&c, "t1"), -&p(&c, "t1*t2"));
    assert!((&p(&c, "t1") * &p(&c, "t1")).is_zero());
    assert_eq!(&p(&c, "z + t1*t2") * &p(&c, "z - t1*t2"), p(&c, "z^2"));
}

#[test]
fn invert_even_examples() {
    let c = ctx();
    assert_eq!(invert_even(&p(&c, "z")).unwrap(), p(&c, "z^-1"));
    let u = p(&c, "z + t1*t2");
    let inv = invert_even(&u).unwrap();
    assert_eq!(inv, p(&c, "1/z - t1*t2/z^2"));
    assert!(mul(&u, &inv).unwrap().is_one());
    assert_eq!(invert_even(&p(&c, "t1")), Err(AlgebraError::OddInverse));
    assert_eq!(invert_even(&p(&c, "t1*t2")), Err(AlgebraError::NonInvertibleBody));
    assert_eq!(invert_even(&p(&c, "0")), Err(AlgebraError::NonInvertibleBody));
}

#[test]
fn nilpotent_denominator_is_rationalized() {
    let c = ctx();
    let f = p(&c, "1/(1 + z + t1*t2 + t2*t3)");
    assert!(f.den().is_odd_free());
    assert!(mul(&f, &p(&c, "1 + z + t1*t2 + t2*t3")).unwrap().is_one());
}

#[test]
fn left_derivative_signs() {
    let c = ctx();
    let f = p(&c, "t1*t2");
    assert_eq!(partial(&f, "t1").unwrap(), p(&c, "t2"));
    assert_eq!(partial(&f, "t2").unwrap(), -&p(&c, "t1"));
    assert_eq!(partial(&p(&c, "z^2*t1"), "z").unwrap(), p(&c, "2*z*t1"));
    assert_eq!(partial(&p(&c, "1/(1+z)"), "z").unwrap(), p(&c, "-1/(1+z)^2"));
    assert!(matches!(partial(&f, "q"), Err(AlgebraError::UnknownVariable(_))));
}

#[test]
fn context_mismatch_is_an_error() {
    let a = ctx();
    let b = GeneratorContext::new(&["z"], &["t1"], &[] as &[&str]).unwrap();
    assert_eq!(mul(&p(&a, "z"), &p(&b, "z")), Err(AlgebraError::ContextMismatch));
}

#[test]
fn lambda_is_a_formal_parameter() {
    let c = ctx();
    let f = p(&c, "lambda*t1*t2 + z");
    assert_eq!(f.specialize_lambda(&Q::from_integer(0.into())).unwrap(), p(&c, "z"));
    assert_eq!(f.specialize_lambda(&Q::from_integer(3.into())).unwrap(), p(&c, "3*t1*t2 + z"));
}

fn ev(c: &Ctx, rows: &[&[&str]]) -> SuperMatrix {
    let n = rows.len();
    let m = rows[0].len();
    let entries = rows.iter().map(|r| r.iter().map(|s| p(c, s)).collect()).collect();
    SuperMatrix::new(c, vec![Parity::Even; n], vec![Parity::Even; m], entries).unwrap()
}

#[test]
fn determinants() {
    let c = ctx();
    assert_eq!(det_even(&ev(&c, &[&["1/z", "0"], &["0", "1/z^2"]])).unwrap(), p(&c, "z^-3"));
    assert!(det_even(&SuperMatrix::identity(&c, vec![Parity::Even; 2])).unwrap().is_one());
    assert_eq!(det_even(&ev(&c, &[&["1", "z"]])), Err(AlgebraError::NotSquare));
    let odd = SuperMatrix::new(&c, vec![Parity::Even], vec![Parity::Odd], vec![vec![p(&c, "t1")]]).unwrap();
    assert_eq!(det_even(&odd), Err(AlgebraError::OddEntry));
}

#[test]
fn matrix_inverse_examples() {
    let c = GeneratorContext::new(&["x1", "x2"], &["eta"], &[] as &[&str]).unwrap();
    let e = |s: &str| p(&c, s);
    let par = vec![Parity::Even, Parity::Even, Parity::Odd];
    let b = SuperMatrix::new(
        &c,
        par.clone(),
        par.clone(),
        vec![vec![e("1"), e("x1"), e("0")], vec![e("0"), e("x2"), e("0")], vec![e("0"), e("eta"), e("1")]],
    )
    .unwrap();
    assert!(b.is_homogeneous());
    let inv = invert_matrix(&b).unwrap();
    let want = SuperMatrix::new(
        &c,
        par.clone(),
        par.clone(),
        vec![vec![e("1"), e("-x1/x2"), e("0")], vec![e("0"), e("1/x2"), e("0")], vec![e("0"), e("-eta/x2"), e("1")]],
    )
    .unwrap();
    assert_eq!(inv, want);
    assert_eq!(det_even(&b.submatrix(&[0, 1], &[0, 1])).unwrap(), e("x2"));
    let d = ev(&c, &[&["x1", "0"], &["0", "x1^2"]]);
    assert_eq!(invert_matrix(&d).unwrap(), ev(&c, &[&["1/x1", "0"], &["0", "x1^-2"]]));
    let id = SuperMatrix::identity(&c, par);
    assert_eq!(invert_matrix(&id).unwrap(), id);
    assert_eq!(invert_matrix(&ev(&c, &[&["x1", "x1"], &["x2", "x2"]])), Err(AlgebraError::SingularBody));
}

#[test]
fn parse_errors() {
    let c = ctx();
    for bad in ["", "z +", "(z", "z ^ w", "q", "z $"] {
        assert!(SuperFrac::parse(&c, bad).is_err(), "{bad}");
    }
}

#[test]
fn json_round_trip_fixed() {
    let c = ctx();
    let f = p(&c, "(3/7*z^-2*t1*t3 - lambda*w)/(1 + z*w)");
    let v = frac_to_json(&f);
    let back = frac_from_json(&c, &v).unwrap();
    assert_eq!(frac_to_json(&back), v);
    let c2 = context_from_json(&context_to_json(&c)).unwrap();
    assert_eq!(*c2, *c);
    let m = SuperMatrix::new(
        &c,
        vec![Parity::Even, Parity::Odd],
        vec![Parity::Odd],
        vec![vec![p(&c, "t1")], vec![p(&c, "z")]],
    )
    .unwrap();
    let mj = matrix_to_json(&m);
    assert_eq!(matrix_to_json(&matrix_from_json(&c, &mj).unwrap()), mj);
}

#[test]
fn json_odd_order_gives_sign() {
    let c = ctx();
    let v = serde_json::json!([{"coeff": "1", "even": {}, "params": {}, "odd": ["t2", "t1"]}]);
    assert_eq!(SuperFrac::from_poly(poly_from_json(&c, &v).unwrap()), -&p(&c, "t1*t2"));
}

// ---- randomized properties ----

fn arb_term() -> impl Strategy<Value = (i64, i32, i32, u8, u32)> {
    (-4i64..=4, -2i32..=2, 0i32..=2, 0u8..8, 0u32..=1)
}

fn build(c: &Ctx, terms: &[(i64, i32, i32, u8, u32)], parity: Option<Parity>) -> SuperFrac {
    let mut poly = SuperPoly::zero(c);
    for &(k, ez, ew, odd, lam) in terms {
        let mut m = SuperMonomial::one(c);
        m.even = vec![ez, ew];
        m.odd = odd as u64;
        m.params = vec![lam];
        if let Some(par) = parity {
            if m.parity() != par {
                continue;
            }
        }
        poly.add_term(m, Q::from_integer(k.into()));
    }
    SuperFrac::from_poly(poly)
}

fn arb_elem(parity: Option<Parity>) -> impl Strategy<Value = SuperFrac> {
    proptest::collection::vec(arb_term(), 0..5).prop_map(move |t| build(&shared(), &t, parity))
}

thread_local! {
    static SHARED: Ctx = ctx();
}

fn shared() -> Ctx {
    SHARED.with(|c| c.clone())
}

fn arb_parity() -> impl Strategy<Value = Parity> {
    prop_oneof![Just(Parity::Even), Just(Parity::Odd)]
}

fn arb_homog() -> impl Strategy<Value = (Parity, SuperFrac)> {
    arb_parity().prop_flat_map(|par| arb_elem(Some(par)).prop_map(move |f| (par, f)))
}

fn sign(a: Parity, b: Parity) -> Q {
    if a.is_odd() && b.is_odd() {
        -Q::one()
    } else {
        Q::one()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn graded_commutativity((pa, a) in arb_homog(), (pb, b) in arb_homog()) {
        prop_assert_eq!(mul(&a, &b).unwrap(), mul(&b, &a).unwrap().scale(&sign(pa, pb)));
    }

    #[test]
    fn associativity_and_distributivity(a in arb_elem(None), b in arb_elem(None), c in arb_elem(None)) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
    }

    #[test]
    fn too_many_odd_factors_vanish(xs in proptest::collection::vec(arb_elem(Some(Parity::Odd)), 4)) {
        let c = shared();
        let prod = xs.iter().fold(SuperFrac::one(&c), |acc, x| &acc * x);
        prop_assert!(prod.is_zero());
    }

    #[test]
    fn invert_even_round_trip(b in 1i64..6, ez in -2i32..=2, soul in arb_elem(Some(Parity::Even))) {
        let c = shared();
        let body = build(&c, &[(b, ez, 1, 0, 0)], None);
        let u = &body + &soul.map_num(|p| p.soul());
        let inv = invert_even(&u).unwrap();
        prop_assert!(mul(&u, &inv).unwrap().is_one());
        prop_assert_eq!(invert_even(&inv).unwrap(), u);
    }

    #[test]
    fn graded_leibniz((pf, f) in arb_homog(), g in arb_elem(None), v in 0usize..5) {
        let c = shared();
        let (var, pd) = if v < 2 { (Var::Even(v), Parity::Even) } else { (Var::Odd(v - 2), Parity::Odd) };
        let lhs = (&f * &g).partial_var(var);
        let rhs = &(&f.partial_var(var) * &g) + &(&f * &g.partial_var(var)).scale(&sign(pd, pf));
        prop_assert_eq!(lhs, rhs);
        let _ = c;
    }

    #[test]
    fn cross_multiplication_equality(a in arb_elem(None), k in 1i64..5, e in -2i32..=2) {
        let c = shared();
        let d = build(&c, &[(k, e, 0, 0, 0), (1, 0, 1, 0, 0)], None);
        let q = a.checked_div(&d).unwrap();
        let back = mul(&q, &d).unwrap();
        prop_assert_eq!(&back, &a);
        prop_assert_eq!(&a, &back);
        let q2 = SuperFrac::new(q.num().scale(&Q::from_integer(2.into())), q.den().scale(&Q::from_integer(2.into()))).unwrap();
        prop_assert_eq!(&q, &q2);
        prop_assert_eq!(mul(&q2, &d).unwrap(), a);
    }

    #[test]
    fn json_round_trip(a in arb_elem(None)) {
        let c = shared();
        let v = frac_to_json(&a);
        let back = frac_from_json(&c, &v).unwrap();
        prop_assert_eq!(frac_to_json(&back), v);
        prop_assert_eq!(back, a);
    }
}
