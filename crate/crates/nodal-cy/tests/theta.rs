use nodal_cy::theta_numerics::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

const TOL: f64 = 1e-10;

#[test]
fn odd_characteristic_vanishes() {
    for z in [Complex64::new(0.0, 1.0), Complex64::new(0.3, 0.7)] {
        assert!(theta1(1.0, 1.0, z, 1e-14).unwrap().norm() < TOL);
    }
}

#[test]
fn theta_coordinates_satisfy_the_quadrics() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..5 {
        let z = random_point(&mut rng, 0.3);
        assert!(verify_variety_relations(&z, TOL).unwrap() <= TOL);
    }
    assert!(verify_variety_relations(&SiegelPoint::identity_times_i(), TOL).unwrap() <= TOL);
}

#[test]
fn perturbed_vector_fails_the_quadrics() {
    let z = SiegelPoint::identity_times_i();
    let mut v = coordinates(&z, 1e-14).unwrap();
    v[5] *= 1.001;
    assert!(quadric_residuals(&v).into_iter().fold(0.0, f64::max) > 1e-6);
}

#[test]
fn divisor_loci() {
    let mut rng = StdRng::seed_from_u64(11);
    for d in LocusDivisor::ALL {
        for _ in 0..3 {
            let z = random_locus_point(d, &mut rng, 0.3);
            assert!(on_locus(d, &z));
            assert!(verify_divisor_locus(d, &z, TOL).unwrap(), "{d:?} at {z:?}");
        }
        let z = random_point(&mut rng, 0.3);
        assert!(!verify_divisor_locus(d, &z, TOL).unwrap(), "{d:?} off locus");
    }
}

#[test]
fn printed_third_plus_locus_is_not_the_divisor() {
    let z0 = Complex64::new(0.2, 1.3);
    let z = SiegelPoint::new(z0, Complex64::new(0.1, 0.2), z0 + 2.0).unwrap();
    assert!(!verify_divisor_locus(LocusDivisor::D3Plus, &z, TOL).unwrap());
}

#[test]
fn exercise_identity() {
    for z in [Complex64::new(0.0, 1.0), Complex64::new(1.0 / 3.0, 0.5)] {
        assert!(verify_exercise_identity(z, TOL).unwrap());
        assert!(exercise_residual(z, TOL, false).unwrap() > 1e-3);
    }
}

#[test]
fn cusp_limit_is_the_standard_node() {
    let errs: Vec<f64> = [5.0, 10.0, 20.0].iter().map(|&t| cusp_limit_error(t, 1e-14).unwrap()).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[2] < 1e-6, "{errs:?}");
    // error ~ c exp(-pi t / 4)
    let c: Vec<f64> = errs.iter().zip([5.0, 10.0, 20.0]).map(|(e, t)| e / (-std::f64::consts::PI * t / 4.0).exp()).collect();
    assert!(c.iter().all(|&x| x > c[0] / 10.0 && x < c[0] * 10.0), "{c:?}");
}

#[test]
fn non_positive_input_is_rejected() {
    let bad = SiegelPoint::new(Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0), Complex64::new(0.0, 1.0));
    assert!(bad.is_err());
}

#[test]
fn coordinates_are_nonzero_at_generic_points() {
    let mut rng = StdRng::seed_from_u64(3);
    let z = random_point(&mut rng, 0.3);
    assert!(coordinates(&z, 1e-12).unwrap().iter().all(|x| x.norm() > 1e-8));
}

#[test]
fn report_passes() {
    let report = verification_report(1, 2, TOL).unwrap();
    let failing: Vec<_> = report.iter().filter(|r| !r.pass).map(|r| r.check.clone()).collect();
    assert!(failing.is_empty(), "{failing:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn periodic_under_translations(seed in 0u64..1000, t0 in 0i32..3, t1 in 0i32..3, t2 in 0i32..3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let z = random_point(&mut rng, 0.3);
        // the translation lattice: t0 in 8Z, t1 in 2Z, t2 in 4Z acting on Z
        let w = z.translated([8.0 * t0 as f64, 2.0 * t1 as f64, 4.0 * t2 as f64]);
        let a = coordinates(&z, 1e-13).unwrap();
        let b = coordinates(&w, 1e-13).unwrap();
        for k in 0..8 {
            prop_assert!((a[k] - b[k]).norm() <= 1e-9 * a[k].norm().max(1.0));
        }
    }

    #[test]
    fn tighter_tolerance_is_consistent(seed in 0u64..1000) {
        let mut rng = StdRng::seed_from_u64(seed);
        let z = random_point(&mut rng, 0.3);
        let ch = ThetaCharacteristic::new([1, 0], [0, 1]);
        let a = theta(&ch, &z, 1.0, 1e-8).unwrap();
        let b = theta(&ch, &z, 1.0, 5e-9).unwrap();
        prop_assert!((a - b).norm() <= 1e-8 + 5e-9);
    }
}
