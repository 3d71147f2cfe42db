use super::*;

#[test]
fn reference_checks_pass() {
    let fx = Fixtures::embedded();
    for (id, out) in [(1, c1(&fx)), (2, c2(&fx)), (5, c5(&fx))] {
        let (ok, detail) = out.unwrap();
        assert!(ok, "{id}: {detail}");
    }
}

#[test]
fn sign_flip_in_a_fixture_is_caught() {
    let mut fx = Fixtures::embedded();
    fx.jacobian["rows"][0][3] = Value::String("2*theta21*z11".into());
    let (ok, detail) = c5(&fx).unwrap();
    assert!(!ok);
    assert!(detail.contains("Jac[1,4]"), "{detail}");
    let mut fx = Fixtures::embedded();
    fx.g11_overlaps["overlaps"][0]["assignments"]["eta1"] = Value::String("eta2*x2^-1".into());
    assert!(!c1(&fx).unwrap().0);
}

#[test]
fn printed_block_deviation_is_isolated() {
    let fx = Fixtures::embedded();
    let (ok, detail) = c8(&fx).unwrap();
    assert!(!ok);
    assert!(detail.starts_with("1 mismatches") && detail.contains("B[2,10]"), "{detail}");
    // with the parity-consistent entry the comparison is exact
    let mut fixed = fx.clone();
    fixed.embedding_blocks["B"][1][9] = Value::String("-lambda*z20*theta10".into());
    assert!(c8(&fixed).unwrap().0);
}

#[test]
fn property_replay_is_clean() {
    let (checks, failures) = algebra_properties(300, 7).unwrap();
    assert_eq!(checks, 300 * 6);
    assert!(failures.is_empty(), "{failures:?}");
    let (n, bad) = inversion_fixtures(&Fixtures::embedded()).unwrap();
    assert!(n > 20);
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn fixture_directory_overrides() {
    let dir = std::env::temp_dir().join(format!("superp2-fx-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut j = Fixtures::embedded().jacobian;
    j["rows"][1][1] = Value::String("-z11".into());
    std::fs::write(dir.join("jacobian_u1_u0.json"), j.to_string()).unwrap();
    let fx = Fixtures::with_dir(&dir).unwrap();
    assert!(!c5(&fx).unwrap().0);
    assert!(c1(&fx).unwrap().0);
    std::fs::remove_dir_all(&dir).unwrap();
}
