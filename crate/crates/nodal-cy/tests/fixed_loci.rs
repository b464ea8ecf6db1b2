use std::collections::BTreeSet;

use nodal_cy::fixed_loci::*;
use nodal_cy::group_engine::*;
use nodal_cy::scalars::{rat, ExtScalar};
use nodal_cy::Model;
use proptest::prelude::*;

const SIGMA1: &str = "(Y0, Y1, Y2, Y3, -X0, -X1, -X2, -X3)";
const SIGMA2: &str = "(Y0, -Y1, -Y2, Y3, X0, -X1, -X2, X3)";
const H3: &str = "(Y0, -Y3, iY1, iY2, X3, X1, X0, X2)";

fn locus(s: &str) -> FixedLocus {
    let m = Model::global();
    fixed_locus(&m.group, &m.nodes, m.element(s).unwrap()).unwrap()
}

#[test]
fn sigma1_is_fixed_point_free() {
    let l = locus(SIGMA1);
    assert!(l.is_empty());
    assert_eq!(resolution_euler(&l, &|_| true), 0);
    let m = Model::global();
    assert!(fixed_point_free(&m.group, m.element(SIGMA1).unwrap()).unwrap());
}

#[test]
fn sigma2_fixes_sixteen_nodes() {
    let l = locus(SIGMA2);
    let s = l.summary();
    assert_eq!((s.nodes, s.fixed_nodes, s.rational_curves, s.elliptic_curves, s.smooth_points), (16, 16, 0, 0, 0));
    assert_eq!(l.isolated_nodes.len(), 16);
    assert_eq!(resolution_euler(&l, &|_| true), 32);
}

#[test]
fn order_three_element() {
    let l = locus(H3);
    let s = l.summary();
    assert_eq!((s.fixed_nodes, s.elliptic_curves, s.rational_curves, s.smooth_points), (0, 1, 0, 4));
    assert_eq!(l.euler(), 4);
}

#[test]
fn sigma2_blocks_partition_the_nodes() {
    let m = Model::global();
    let s2 = m.element(SIGMA2).unwrap();
    let class = conjugacy_class(&m.group, s2, &m.h).unwrap();
    assert_eq!(class.len(), 6);
    let mut all = BTreeSet::new();
    for &g in &class {
        let l = fixed_locus(&m.group, &m.nodes, g).unwrap();
        assert_eq!(l.isolated_nodes.len(), 16);
        assert_eq!(l.nodes.len(), 16);
        for &a in &l.nodes {
            assert!(all.insert(a), "node {a} in two blocks");
        }
    }
    assert_eq!(all.len(), 96);
}

#[test]
fn only_the_sigma2_class_isolates_nodes() {
    let m = Model::global();
    let s2 = m.element(SIGMA2).unwrap();
    let s2_class = conjugacy_class(&m.group, s2, &m.h).unwrap();
    for class in involution_classes(&m.group, &m.h) {
        let l = fixed_locus(&m.group, &m.nodes, class[0]).unwrap();
        assert_eq!(!l.isolated_nodes.is_empty(), s2_class.contains(&class[0]));
    }
}

/// (isolated nodes, rational curves, elliptic curves) per involution class.
#[test]
fn involution_fixed_sets_match_the_catalog() {
    let m = Model::global();
    let mut got: Vec<(usize, usize, usize, i64)> = involution_classes(&m.group, &m.h)
        .iter()
        .map(|c| {
            let l = fixed_locus(&m.group, &m.nodes, c[0]).unwrap();
            let s = l.summary();
            (s.nodes, s.rational_curves, s.elliptic_curves, resolution_euler(&l, &|_| true))
        })
        .collect();
    got.sort_unstable();
    let mut expect = vec![
        (0, 0, 0, 0),
        (0, 0, 0, 0),
        (0, 0, 0, 0),
        (16, 0, 0, 32),
        (0, 0, 4, 0),
        (0, 8, 0, 16),
        (0, 8, 0, 16),
        (0, 0, 2, 0),
        (0, 0, 2, 0),
        (0, 4, 0, 8),
    ];
    expect.sort_unstable();
    assert_eq!(got, expect);
}

#[test]
fn common_fixed_sets() {
    let m = Model::global();
    let a = m.element("(-Y2, iY3, iY0, Y1, -iX3, -iX2, X1, -X0)").unwrap();
    let b = m.element("(iY1, Y0, -iY3, Y2, X1, iX0, X3, -iX2)").unwrap();
    let s2 = m.element(SIGMA2).unwrap();
    let same = common_fixed(&m.group, &m.nodes, &[s2, s2]).unwrap();
    assert_eq!(same.summary(), locus(SIGMA2).summary());
    if m.group.commute(a, b) {
        assert!(common_fixed(&m.group, &m.nodes, &[a, b]).unwrap().is_empty());
    } else {
        assert!(matches!(common_fixed(&m.group, &m.nodes, &[a, b]), Err(nodal_cy::Error::Precondition(_))));
    }
    let h3 = m.element(H3).unwrap();
    assert!(matches!(common_fixed(&m.group, &m.nodes, &[s2, h3]), Err(nodal_cy::Error::Precondition(_))));
    assert!(fixed_locus(&m.group, &m.nodes, 0).is_err());
}

#[test]
fn freeness() {
    let m = Model::global();
    let t72 = m.subgroup(&["(-Y2, iY3, iY0, Y1, -iX3, -iX2, X1, -X0)", "(iY1, Y0, -iY3, Y2, X1, iX0, X3, -iX2)"]).unwrap();
    assert_eq!(t72.order(), 16);
    assert!(is_free(&m.group, &t72).unwrap());
    let free32 = m
        .subgroup(&[
            "(-Y1, -iY0, Y3, -iY2, -iX1, X0, iX3, X2)",
            "(-iY2, Y3, Y0, iY1, X3, -X2, -iX1, -iX0)",
            "(-Y0, Y1, Y2, -Y3, X0, -X1, X2, -X3)",
            "(iY0, iY1, iY2, iY3, -iX0, -iX1, -iX2, -iX3)",
            "(Y0, Y1, -Y2, -Y3, X0, X1, -X2, -X3)",
        ])
        .unwrap();
    assert!(is_free(&m.group, &free32).unwrap());
    assert!(!is_free(&m.group, &m.subgroup(&[SIGMA2]).unwrap()).unwrap());
    assert!(!is_free(&m.group, &m.subgroup(&[H3]).unwrap()).unwrap());
}

#[test]
fn roots_of_unity() {
    for k in 0..24 {
        let z = root_of_unity(&rat(k, 24)).unwrap();
        let mut p = ExtScalar::one();
        for _ in 0..24 {
            p = &p * &z;
        }
        assert_eq!(p, ExtScalar::one());
        let c = z.to_complex();
        let angle = 2.0 * std::f64::consts::PI * k as f64 / 24.0;
        assert!((c.re - angle.cos()).abs() < 1e-12 && (c.im - angle.sin()).abs() < 1e-12);
    }
    assert!(matches!(root_of_unity(&rat(1, 5)), Err(nodal_cy::Error::Unsupported(_))));
}

#[test]
fn fallback_catalog() {
    let m = Model::global();
    let s2 = m.element(SIGMA2).unwrap();
    let conj = m.group.conj(m.element(H3).unwrap(), s2);
    assert_eq!(classification_fallback(&m.group, &m.h, conj).unwrap(), locus(SIGMA2).summary());
    let other = m.element("(Y3, -iY2, iY1, Y0, X3, iX2, -iX1, X0)").unwrap();
    assert!(matches!(classification_fallback(&m.group, &m.h, other), Err(nodal_cy::Error::Unsupported(_))));
}

#[test]
fn catalog_export() {
    let m = Model::global();
    let class = conjugacy_class(&m.group, m.element(SIGMA2).unwrap(), &m.h).unwrap();
    let entry = catalog_entry(&m.group, &m.nodes, &class).unwrap();
    let json = serde_json::to_value(&entry).unwrap();
    assert_eq!(json["class_size"], 6);
    assert_eq!(json["kinds"]["nodes"], 16);
    assert_eq!(entry.node_incidences.iter().flatten().count(), 16);
}

fn key_set(l: &FixedLocus) -> BTreeSet<CurveKey> {
    l.curve_keys().into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn conjugation_equivariance(h_index in 0usize..12288, class_index in 0usize..10) {
        let m = Model::global();
        let classes = involution_classes(&m.group, &m.h);
        let g = classes[class_index][0];
        let h = m.h.elements[h_index];
        let c = m.group.conj(h, g);
        let lg = fixed_locus(&m.group, &m.nodes, g).unwrap();
        let lc = fixed_locus(&m.group, &m.nodes, c).unwrap();
        prop_assert_eq!(lg.summary(), lc.summary());
        let moved: BTreeSet<CurveKey> = key_set(&lg).iter().map(|k| transform_key(k, m.group.element(h).lift())).collect();
        let moved_inv: BTreeSet<CurveKey> =
            key_set(&lg).iter().map(|k| transform_key(k, m.group.element(m.group.inv(h)).lift())).collect();
        let target = key_set(&lc);
        prop_assert!(moved == target || moved_inv == target);
        let nodes_moved: BTreeSet<usize> = lg.nodes.iter().map(|&a| m.nodes.image(h, a)).collect();
        let nodes_moved_inv: BTreeSet<usize> = lg.nodes.iter().map(|&a| m.nodes.image(m.group.inv(h), a)).collect();
        let nodes_target: BTreeSet<usize> = lc.nodes.iter().copied().collect();
        prop_assert!(nodes_moved == nodes_target || nodes_moved_inv == nodes_target);
    }
}
