use proptest::prelude::*;

use povmround::{
    commutation_defect, compress_povm, defect, gen, minimal_majorant, orthogonalize, repair, verify_majorant_certificate,
    BlockAlgebra, FunctionalFamily, Tolerances,
};

fn algebra() -> impl Strategy<Value = BlockAlgebra> {
    prop::collection::vec(1usize..=4, 1..=3).prop_map(|d| BlockAlgebra::new(d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn defect_range_and_pvm_defect(alg in algebra(), n in 1usize..=4, seed in any::<u64>(), delta in 0.0f64..0.5) {
        let tol = Tolerances::default();
        let a = gen::random_povm_near_pvm::<f64>(seed, &alg, n, delta, &tol).unwrap();
        let phi = gen::random_state::<f64>(seed ^ 1, &alg, None, &tol).unwrap();
        let eps = defect(&phi, &a).unwrap();
        prop_assert!(eps >= -1e-12 && eps <= 1.0 + n as f64 * tol.cert_tol);
        let p = gen::random_pvm::<f64>(seed, &alg, n, &tol).unwrap();
        prop_assert!(defect(&phi, p.as_povm()).unwrap().abs() <= n as f64 * tol.cert_tol);
    }

    #[test]
    fn orthogonalize_within_nine_defects(alg in algebra(), n in 1usize..=4, seed in any::<u64>(), delta in 0.0f64..0.4, rank1 in any::<bool>()) {
        let tol = Tolerances::default();
        let a = gen::random_povm_near_pvm::<f64>(seed, &alg, n, delta, &tol).unwrap();
        let phi = gen::random_state::<f64>(seed ^ 2, &alg, rank1.then_some(1), &tol).unwrap();
        let rep = orthogonalize(&alg, &phi, &a, &tol).unwrap();
        prop_assert!(rep.main_bound_holds(1e-7), "error {} defect {}", rep.error, rep.defect);
        prop_assert!(rep.converse_holds(1e-7));
        prop_assert!(rep.certificates.idempotency <= 1e-9);
    }

    #[test]
    fn repair_identity_and_bound(alg in algebra(), n in 1usize..=4, m in 1usize..=4, seed in any::<u64>(), theta in 0.01f64..0.3) {
        let tol = Tolerances::default();
        let (p, q) = gen::rotated_pvm_pair::<f64>(theta, &alg, n, m, Some(seed), &tol).unwrap();
        let phi = gen::random_state::<f64>(seed ^ 3, &alg, None, &tol).unwrap();
        let c = compress_povm(&p, &q, &phi, &tol).unwrap();
        prop_assert!(c.identity_residual <= 1e-10);
        let rep = repair(&phi, &p, &q, &tol).unwrap();
        prop_assert!((rep.epsilon_c - commutation_defect(&phi, &p, &q).unwrap()).abs() <= 1e-14);
        prop_assert!(rep.bound_holds(1e-7));
        prop_assert!(rep.certificates.commutation_residual <= 1e-9);
    }

    #[test]
    fn majorant_weak_duality(alg in algebra(), n in 1usize..=4, seed in any::<u64>(), diagonal in any::<bool>()) {
        let tol = Tolerances::default();
        let f = FunctionalFamily::new(&alg, gen::random_functionals::<f64>(seed, &alg, n, diagonal).unwrap(), &tol).unwrap();
        let sol = minimal_majorant(&alg, &f, &tol).unwrap();
        let diag = verify_majorant_certificate(&alg, &f, &sol, &tol).unwrap();
        prop_assert!(diag.passed(), "{:?}", diag.failed().collect::<Vec<_>>());
        for k in 0..10u64 {
            let t = gen::random_povm::<f64>(seed.wrapping_add(k), &alg, n, &tol).unwrap();
            let v: f64 = f.elements().iter().zip(t.elements()).map(|(a, t)| (a * t).trace().re).sum();
            prop_assert!(v <= sol.primal + 1e-9);
        }
    }
}
