use std::sync::OnceLock;

use nodal_cy::cy_pipeline::*;
use nodal_cy::group_engine::*;
use nodal_cy::Model;
use proptest::prelude::*;

const T72: [&str; 2] = ["(-Y2, iY3, iY0, Y1, -iX3, -iX2, X1, -X0)", "(iY1, Y0, -iY3, Y2, X1, iX0, X3, -iX2)"];
const H3: &str = "(Y0, -Y3, iY1, iY2, X3, X1, X0, X2)";
const H2: &str = "(Y2, iY3, -iY0, -Y1, -iX3, iX2, -X1, X0)";
const FREE32: [&str; 5] = [
    "(-Y1, -iY0, Y3, -iY2, -iX1, X0, iX3, X2)",
    "(-iY2, Y3, Y0, iY1, X3, -X2, -iX1, -iX0)",
    "(-Y0, Y1, Y2, -Y3, X0, -X1, X2, -X3)",
    "(iY0, iY1, iY2, iY3, -iX0, -iX1, -iX2, -iX3)",
    "(Y0, Y1, -Y2, -Y3, X0, X1, -X2, -X3)",
];

fn pipeline() -> &'static Pipeline<'static> {
    static P: OnceLock<Pipeline<'static>> = OnceLock::new();
    P.get_or_init(|| Pipeline::new(Model::global(), Ambient::G).unwrap())
}

fn triple(r: &SubgroupReport) -> (i64, i64, i64) {
    (r.h11.unwrap(), r.h12.unwrap(), r.euler.unwrap())
}

fn with(base: &[&str], extra: &str) -> Subgroup {
    let m = Model::global();
    let mut names = base.to_vec();
    names.push(extra);
    m.subgroup(&names).unwrap()
}

#[test]
fn trivial_group() {
    let r = pipeline().report(&Subgroup::trivial()).unwrap();
    assert_eq!(triple(&r), (32, 0, 64));
    assert!(r.weak_cy && r.projective && r.acts_freely);
}

#[test]
fn free_group_of_order_sixteen() {
    let m = Model::global();
    let r = pipeline().report(&m.subgroup(&T72).unwrap()).unwrap();
    assert_eq!(r.order, 16);
    assert!(r.acts_freely && r.projective);
    assert_eq!(triple(&r), (2, 0, 4));
}

#[test]
fn free_group_of_order_thirty_two() {
    let m = Model::global();
    let r = pipeline().report(&m.subgroup(&FREE32).unwrap()).unwrap();
    assert!(r.acts_freely && r.weak_cy && !r.projective);
    assert_eq!(r.invariant_dimension, 1);
    assert_eq!(triple(&r), (1, 0, 2));
}

#[test]
fn order_three_group() {
    let m = Model::global();
    let p = pipeline();
    let s = m.subgroup(&[H3]).unwrap();
    assert_eq!(p.stringy_euler(&s).unwrap(), 32);
    assert_eq!(p.divisor_class_number(&s).unwrap(), 18);
    assert_eq!(p.hodge_pair(&s).unwrap(), (18, 2));
    let r = p.quotient_stage(&Subgroup::trivial(), &s).unwrap();
    assert_eq!(triple(&r), (18, 2, 32));
    assert_eq!((r.fixed_summary.curve_classes, r.fixed_summary.point_classes), (1, 4));
}

#[test]
fn extension_by_order_three() {
    let m = Model::global();
    let base = m.subgroup(&T72).unwrap();
    let h48 = with(&T72, H3);
    assert_eq!(h48.order(), 48);
    let outside: Vec<u32> = h48.elements.iter().copied().filter(|&x| !base.contains(x)).collect();
    assert!(outside.iter().all(|&x| m.group.order_of(x) == 3));
    assert_eq!(pipeline().invariant_dimension(&h48), 2);
    let r = pipeline().quotient_stage(&base, &h48).unwrap();
    assert!(r.projective);
    assert_eq!(triple(&r), (8, 2, 12));
    assert_eq!(triple(&pipeline().report(&h48).unwrap()), (8, 2, 12));
}

#[test]
fn extension_by_an_involution() {
    let m = Model::global();
    let base = m.subgroup(&T72).unwrap();
    let h32 = with(&T72, H2);
    assert_eq!(h32.order(), 32);
    let r = pipeline().quotient_stage(&base, &h32).unwrap();
    assert!(r.projective);
    assert_eq!(triple(&r), (7, 3, 8));
    assert_eq!(r.fixed_summary.curve_classes, 5);
    let p = pipeline();
    let (mut elliptic, mut rational) = (0, 0);
    for &x in h32.elements.iter().filter(|&&x| !base.contains(x)) {
        if !p.element_is_free(x).unwrap() {
            let s = p.locus(x).unwrap().summary();
            elliptic += s.elliptic_curves;
            rational += s.rational_curves;
        }
    }
    assert_eq!((elliptic, rational), (24, 32));
}

#[test]
fn quotient_stage_preconditions() {
    let m = Model::global();
    let p = pipeline();
    let s2 = m.subgroup(&["(Y0, -Y1, -Y2, Y3, X0, -X1, -X2, X3)"]).unwrap();
    assert!(p.quotient_stage(&s2, &s2).is_err());
    let t = m.subgroup(&T72).unwrap();
    assert!(p.quotient_stage(&t, &m.subgroup(&[H3]).unwrap()).is_err());
    let same = p.quotient_stage(&t, &t);
    assert!(same.is_err());
}

#[test]
fn involution_table() {
    let m = Model::global();
    let p = pipeline();
    let mut got: Vec<(i64, i64)> = involution_classes(&m.group, &m.h)
        .iter()
        .map(|c| {
            let r = p.report(&Subgroup::generate(&m.group, &[c[0]])).unwrap();
            assert!(r.weak_cy);
            (r.h11.unwrap(), r.h12.unwrap())
        })
        .collect();
    got.sort_unstable();
    let mut expect = vec![(16, 0), (16, 0), (16, 0), (40, 0), (20, 4), (28, 0), (28, 0), (18, 2), (18, 2), (22, 0)];
    expect.sort_unstable();
    assert_eq!(got, expect);
}

#[test]
fn sigma2_report() {
    let m = Model::global();
    let r = pipeline().report(&m.subgroup(&["(Y0, -Y1, -Y2, Y3, X0, -X1, -X2, X3)"]).unwrap()).unwrap();
    assert_eq!(r.invariant_dimension, 24);
    assert_eq!(r.fixed_summary.isolated_node_classes, 16);
    assert_eq!(triple(&r), (40, 0, 80));
    let json = serde_json::to_value(&r).unwrap();
    for key in ["generators", "order", "acts_freely", "weak_cy", "projective", "h11", "h12", "euler", "fixed_summary", "witnesses"] {
        assert!(json.get(key).is_some(), "{key}");
    }
}

#[test]
fn groups_outside_the_index_two_subgroup_are_rejected() {
    let m = Model::global();
    let g = m.element("(Y0, Y1, Y3, Y2, X0, X3, X2, X1)").unwrap();
    assert!(!m.h.contains(g));
    assert!(pipeline().report(&Subgroup::generate(&m.group, &[g])).is_err());
}

#[test]
fn small_free_census() {
    let c = pipeline().free_census(8, 10_000).unwrap();
    let by = c.by_order();
    assert_eq!(by[&8], (20, 13));
    assert_eq!(c.reports.iter().filter(|r| r.order <= 8).count(), 33);
    for r in &c.reports {
        assert!(r.acts_freely);
        assert_eq!(r.h12, Some(0));
        assert_eq!(r.euler, Some(64 / r.order as i64));
    }
}

fn random_two_group(m: &Model, picks: &[usize]) -> Subgroup {
    let invols = m.h.involutions(&m.group);
    let mut gens: Vec<u32> = Vec::new();
    for &i in picks {
        let x = invols[i % invols.len()];
        if gens.iter().all(|&g| m.group.commute(g, x)) {
            gens.push(x);
        }
    }
    Subgroup::generate(&m.group, &gens)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reports_are_conjugation_invariant(picks in proptest::collection::vec(0usize..1000, 1..4), h in 0usize..12288) {
        let m = Model::global();
        let s = random_two_group(m, &picks);
        let c = s.conjugate(&m.group, m.h.elements[h]);
        let (a, b) = (pipeline().report(&s).unwrap(), pipeline().report(&c).unwrap());
        prop_assert_eq!((a.order, a.acts_freely, a.weak_cy, a.projective, a.h11, a.h12, a.euler),
            (b.order, b.acts_freely, b.weak_cy, b.projective, b.h11, b.h12, b.euler));
    }

    #[test]
    fn euler_matches_hodge_numbers(picks in proptest::collection::vec(0usize..1000, 1..4)) {
        let m = Model::global();
        let r = pipeline().report(&random_two_group(m, &picks)).unwrap();
        if r.is_complete() {
            prop_assert_eq!(r.euler.unwrap(), 2 * (r.h11.unwrap() - r.h12.unwrap()));
            prop_assert!(r.euler.unwrap() > 0);
        }
        prop_assert!(!r.projective || r.weak_cy);
    }
}
