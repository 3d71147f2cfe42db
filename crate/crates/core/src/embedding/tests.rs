use serde_json::Value;

use super::*;
use crate::p2family::{build_family_atlas, canonical_sections_in, FamilyParams};

const BLOCKS: &str = include_str!("../../fixtures/embedding_blocks.json");

fn setup(lambda: Option<i64>) -> (Atlas, GlobalSectionBasis) {
    let p = FamilyParams { lambda: lambda.map(|l| Q::from_integer(l.into())) };
    let a = build_family_atlas(&p).unwrap();
    let b = canonical_sections_in(&a, &p).unwrap();
    (a, b)
}

fn parse_rows(a: &Atlas, v: &Value) -> Vec<Vec<SuperFrac>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|r| {
            r.as_array().unwrap().iter().map(|e| SuperFrac::parse(a.ctx(), e.as_str().unwrap()).unwrap()).collect()
        })
        .collect()
}

#[test]
fn blocks_match_fixture() {
    let (a, b) = setup(None);
    let m = evaluation_matrix(&a, &b, 0).unwrap();
    let fx: Value = serde_json::from_str(BLOCKS).unwrap();
    let mut mismatches = Vec::new();
    for (name, block) in ["A", "B", "C", "D"].iter().zip(m.blocks()) {
        let want = parse_rows(&a, &fx[name]);
        for (r, row) in want.iter().enumerate() {
            for (c, w) in row.iter().enumerate() {
                if block.get(r, c) != w {
                    mismatches.push((name.to_string(), r, c, block.get(r, c).clone()));
                }
            }
        }
    }
    // one printed entry drops a theta: an odd slot cannot hold -lambda*z2
    assert_eq!(mismatches.len(), 1, "{mismatches:?}");
    let (name, r, c, got) = &mismatches[0];
    assert_eq!((name.as_str(), *r, *c), ("B", 1, 9));
    assert_eq!(*got, SuperFrac::parse(a.ctx(), "-lambda*z20*theta10").unwrap());
    assert_eq!(got.parity(), Some(Parity::Odd));
    assert_eq!(SuperFrac::parse(a.ctx(), "-lambda*z20").unwrap().parity(), Some(Parity::Even));
}

#[test]
fn highlighted_columns_are_the_identity() {
    let (a, b) = setup(None);
    let m = evaluation_matrix(&a, &b, 0).unwrap();
    let idx = pivot_index(&m, &["V1", "V2", "Xi1", "Xi2"]).unwrap();
    let rows: Vec<usize> = (0..4).collect();
    assert!(m.matrix.submatrix(&rows, &idx.columns(&m.descriptor().unwrap())).is_identity());
    let sf = standard_form(&m, &idx).unwrap();
    assert_eq!(sf, m.matrix);
    assert_eq!(m.descriptor().unwrap().dimension(), (40, 40));
    assert!(m.matrix.is_homogeneous());
}

#[test]
fn standard_form_is_idempotent() {
    let (a, b) = setup(Some(2));
    let m = evaluation_matrix(&a, &b, 1).unwrap();
    let idx = choose_pivots(&m, &default_samples()).unwrap().unwrap();
    let once = standard_form(&m, &idx).unwrap();
    let again = EvaluationMatrix { matrix: once.clone(), ..m.clone() };
    assert_eq!(standard_form(&again, &idx).unwrap(), once);
    let rows: Vec<usize> = (0..4).collect();
    assert!(once.submatrix(&rows, &idx.columns(&m.descriptor().unwrap())).is_identity());
}

#[test]
fn sub_selection_is_linear() {
    let (a, b) = setup(None);
    let s = sub_selection(&a, &b).unwrap();
    let fx: Value = serde_json::from_str(BLOCKS).unwrap();
    let want = parse_rows(&a, &fx["sub_selection"]["rows"]);
    let idx = pivot_index(&s, &["V1", "V2", "Xi1", "Xi2"]).unwrap();
    let sf = standard_form(&s, &idx).unwrap();
    for (r, row) in want.iter().enumerate() {
        for (c, w) in row.iter().enumerate() {
            assert_eq!(sf.get(r, c), w, "({r},{c})");
        }
    }
}

#[test]
fn naturality_of_evaluation() {
    let (a, b) = setup(Some(1));
    for j in 1..3 {
        let m = evaluation_matrix(&a, &b, j).unwrap();
        for (k, v) in b.all().enumerate() {
            let moved = a.transport_to(v, j).unwrap();
            assert_eq!(m.matrix.column(k), moved.components);
        }
    }
}

#[test]
fn rank_four_on_every_chart() {
    let (a, b) = setup(Some(1));
    let samples = default_samples();
    let sub = sub_selection(&a, &b).unwrap();
    for j in 0..3 {
        let m = evaluation_matrix(&a, &b, j).unwrap();
        let idx = if j == 0 {
            pivot_index(&m, &["V1", "V2", "Xi1", "Xi2"]).unwrap()
        } else {
            choose_pivots(&m, &samples).unwrap().unwrap()
        };
        let cert = rank_certificate(&m, &idx, &samples, (j == 0).then_some(&sub)).unwrap();
        assert_eq!(cert.body_ranks, vec![4; 5], "chart {j}");
        assert_eq!(cert.shape, (40, 40));
        assert!(cert.embedding);
        assert_eq!(generation_ranks(&m, &samples).unwrap(), vec![4; 5]);
    }
}

#[test]
fn identity_minor_from_sub_selection() {
    let (a, b) = setup(None);
    let sub = sub_selection(&a, &b).unwrap();
    let rec = recover_literal(&sub).unwrap();
    let got: Vec<(&str, usize, usize, Q)> =
        rec.iter().map(|r| (r.coord.as_str(), r.row, r.column, r.sign.clone())).collect();
    let one = Q::one();
    assert_eq!(
        got,
        vec![
            ("z10", 0, 1, one.clone()),
            ("z20", 1, 1, -one.clone()),
            ("theta10", 2, 0, one.clone()),
            ("theta20", 3, 0, -one)
        ]
    );
    assert!(sub_minor(&sub).unwrap().is_identity());
}

#[test]
fn zeroed_odd_pivot_drops_rank() {
    let (a, b) = setup(Some(1));
    let m = evaluation_matrix(&a, &b, 0).unwrap().with_zero_column("Xi2").unwrap();
    let idx = pivot_index(&m, &["V1", "V2", "Xi1", "Xi2"]).unwrap();
    let cert = rank_certificate(&m, &idx, &default_samples(), None).unwrap();
    assert_eq!(cert.body_ranks, vec![3; 5]);
    assert!(!cert.embedding);
    assert!(matches!(rank_certificate(&m, &idx, &default_samples()[..3], None), Err(EmbedError::Invalid(_))));
}

#[test]
fn pivot_block_singular_at_one_sample() {
    let (a, b) = setup(Some(1));
    let m = evaluation_matrix(&a, &b, 0).unwrap();
    // z2 d/dz1 and z1 d/dz2: body determinant z1 z2
    let idx = pivot_index(&m, &["V3", "V4", "Xi1", "Xi2"]).unwrap();
    let mut s = default_samples();
    s[2] = (Q::zero(), Q::from_integer(5.into()));
    let cert = rank_certificate(&m, &idx, &s, None).unwrap();
    assert_eq!(cert.body_ranks, vec![4, 4, 3, 4, 4]);
    assert!(!cert.embedding);
    let ok = rank_certificate(&m, &idx, &default_samples(), None).unwrap();
    assert_eq!(ok.body_ranks, vec![4; 5]);
}

#[test]
fn injective_on_all_charts() {
    let (a, b) = setup(Some(1));
    let sub = sub_selection(&a, &b).unwrap();
    let r = injectivity_check(&a, &b, Some(&sub)).unwrap();
    assert!(r.injective, "{:?}", r.charts);
    assert_eq!(r.literal.as_ref().unwrap().len(), 4);
    for c in &r.charts {
        assert!(c.unit_pivots);
        assert_eq!(c.combinations.len(), 4);
    }
}

#[test]
fn zero_sections_are_not_injective() {
    let (a, b) = setup(Some(1));
    let zero = GlobalSectionBasis {
        even: b.even.iter().map(|v| VectorField::zero(a.ctx(), &v.chart)).collect(),
        odd: b.odd.iter().map(|v| VectorField::zero(a.ctx(), &v.chart)).collect(),
        provenance: Provenance::Solved,
    };
    let r = injectivity_check(&a, &zero, None).unwrap();
    assert!(!r.injective);
    assert!(r.charts.iter().all(|c| !c.failures.is_empty()));
    let m = evaluation_matrix(&a, &zero, 0).unwrap();
    assert!(recover_literal(&m).is_none());
    assert_eq!(choose_pivots(&m, &default_samples()).unwrap(), None);
}
