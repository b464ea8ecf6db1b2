use nodal_cy::borcherds_local::*;
use nodal_cy::scalars::{int, rat};
use proptest::prelude::*;

fn table(h0: i64, h1: i64, h2: i64) -> SymMat2 {
    SymMat2::from_ints(h0, h1, h2)
}

#[test]
fn seed_data_from_loci() {
    let data = heegner_data();
    let expect = [
        (DivisorName::D1Minus, SymMat2::new(rat(0, 1), rat(1, 4), rat(0, 1)), rat(1, 4)),
        (DivisorName::D2Minus, SymMat2::new(rat(1, 2), rat(1, 4), rat(0, 1)), rat(1, 2)),
        (DivisorName::D3Minus, SymMat2::new(rat(1, 4), rat(0, 1), rat(-1, 4)), rat(0, 1)),
        (DivisorName::D1Plus, SymMat2::new(rat(0, 1), rat(1, 4), rat(1, 1)), rat(1, 4)),
        (DivisorName::D2Plus, SymMat2::new(rat(1, 2), rat(3, 4), rat(1, 1)), rat(1, 2)),
        (DivisorName::D3Plus, SymMat2::new(rat(1, 4), rat(-1, 2), rat(3, 4)), rat(0, 1)),
    ];
    for (name, s, d) in expect {
        assert_eq!(data[&name].s, s, "{name:?}");
        assert_eq!(data[&name].d, d, "{name:?}");
        assert!(membership_t_star(&s));
    }
}

#[test]
fn minus_cocycles_match_the_cusp_table() {
    let data = heegner_data();
    let zero = SymMat2::zero();
    let expect = [
        (DivisorName::D1Minus, [zero.clone(), table(-4, -2, 0), table(0, -2, -8), table(-12, -18, -24)]),
        (DivisorName::D2Minus, [zero.clone(), table(-4, -2, 0), zero.clone(), zero.clone()]),
        (DivisorName::D3Minus, [zero.clone(), table(-4, -2, 0), zero.clone(), zero.clone()]),
    ];
    for (name, row) in expect {
        let got = tabulated_tuple(&data[&name], DEFAULT_FLIP_BUDGET).unwrap();
        assert_eq!(got, row, "{name:?}");
        for u in u_generators() {
            let c = cocycle(&data[&name], &u, DEFAULT_FLIP_BUDGET).unwrap();
            assert_eq!(c.eight_h(), c.tabulated().scale(&int(2)));
        }
    }
}

#[test]
fn trivial_cocycles() {
    let e11 = trivial_tuple(&SymMat2::e11());
    let e22 = trivial_tuple(&SymMat2::e22());
    let zero = SymMat2::zero();
    assert_eq!(e11, [zero.clone(), zero.clone(), table(0, 4, 16), table(8, 12, 16)]);
    assert_eq!(e22, [zero.clone(), table(4, 2, 0), zero.clone(), table(4, 6, 8)]);
}

#[test]
fn relations_among_minus_divisors() {
    let data = heegner_data();
    let rows: Vec<CocycleTuple> = DivisorName::MINUS
        .iter()
        .map(|n| tabulated_tuple(&data[n], DEFAULT_FLIP_BUDGET).unwrap())
        .collect();
    let triv = [trivial_tuple(&SymMat2::e11()), trivial_tuple(&SymMat2::e22())];
    let report = relation_rank(&rows, &triv);
    assert_eq!(report.rank, 1);
    // D1- + D2- = -2 t(E22) - t(E11)/2
    for k in 0..4 {
        let lhs = rows[0][k].add(&rows[1][k]);
        let rhs = triv[1][k].scale(&int(-2)).add(&triv[0][k].scale(&rat(-1, 2)));
        assert_eq!(lhs, rhs, "generator {k}");
    }
    assert_eq!(rows[1], rows[2]);
}

#[test]
fn cocycle_condition_on_generator_pairs() {
    let data = heegner_data();
    let g = u_generators();
    for name in [DivisorName::D1Minus, DivisorName::D2Plus] {
        let d = &data[&name];
        for a in 0..4 {
            for b in 0..4 {
                let hw = cocycle(d, &g[a].mul(&g[b]), DEFAULT_FLIP_BUDGET).unwrap();
                let hu = cocycle(d, &g[a], DEFAULT_FLIP_BUDGET).unwrap();
                let hv = cocycle(d, &g[b], DEFAULT_FLIP_BUDGET).unwrap();
                assert_eq!(hw.h_u, hu.h_u.add(&g[a].act(&hv.h_u)), "{name:?} V{a} V{b}");
            }
        }
    }
}

#[test]
fn ramification() {
    let data = heegner_data();
    assert!(!is_ramified(&data[&DivisorName::D3Minus], 16).unwrap());
    assert!(!is_ramified(&data[&DivisorName::D1Minus], 16).unwrap());
    let s = HeegnerData::new(SymMat2::new(rat(0, 1), rat(1, 4), rat(0, 1)), rat(0, 1)).unwrap();
    assert!(is_ramified(&s, 16).unwrap());
}

#[test]
fn generators_lie_in_parabolic_group() {
    for u in u_generators() {
        assert!(u.in_u());
        assert_eq!(u.mul(&u.inverse()), UnimodularU::identity());
    }
    assert!(!UnimodularU::new([[0, 1], [1, 0]]).unwrap().in_u());
}

#[test]
fn tiny_budget_is_reported() {
    let data = heegner_data();
    let v3 = u_generators()[3];
    assert!(matches!(cocycle(&data[&DivisorName::D1Minus], &v3, 8), Err(nodal_cy::Error::BudgetExhausted(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flip_set_is_stable_under_larger_budgets(which in 0usize..6, gen in 0usize..4) {
        let data = heegner_data();
        let d = &data[&DivisorName::ALL[which]];
        let u = u_generators()[gen];
        let a = flip_set(d, &u, DEFAULT_FLIP_BUDGET).unwrap();
        let b = flip_set(d, &u, 4 * DEFAULT_FLIP_BUDGET).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn trivial_cocycle_satisfies_the_cocycle_law(h0 in -8i64..8, h1 in -8i64..8, h2 in -8i64..8, a in 0usize..4, b in 0usize..4) {
        let h = SymMat2::from_ints(h0, h1, h2);
        let g = u_generators();
        let lhs = trivial_cocycle(&h, &g[a].mul(&g[b]));
        let rhs = trivial_cocycle(&h, &g[a]).add(&g[a].act(&trivial_cocycle(&h, &g[b])));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn dual_membership_is_preserved(x in -20i64..20, y in -20i64..20, z in -20i64..20, gen in 0usize..4) {
        let h = SymMat2::new(rat(x, 8), rat(y, 4), rat(z, 4));
        prop_assert!(membership_t_star(&h));
        prop_assert!(membership_t_star(&u_generators()[gen].act(&h)));
    }
}

#[test]
fn cocycle_report_json() {
    let report = cocycle_report(DEFAULT_FLIP_BUDGET).unwrap();
    let json = serde_json::to_value(&report).unwrap();
    let d1 = &json[DivisorName::D1Minus.label()];
    assert_eq!(d1[GENERATOR_NAMES[3]]["eightH"], serde_json::json!([-12, -18, -18, -24]));
    assert_eq!(d1[GENERATOR_NAMES[3]]["literalEightH"], serde_json::json!([-24, -36, -36, -48]));
    assert_eq!(json[DivisorName::D3Minus.label()][GENERATOR_NAMES[1]]["eightH"], serde_json::json!([-4, -2, -2, 0]));
    assert!(d1[GENERATOR_NAMES[0]]["C_turns"].is_string());
}
