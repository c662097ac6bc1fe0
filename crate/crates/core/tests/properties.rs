use locc_core::conditions::simplex_grid;
use locc_core::corpus::parse_amplitude;
use locc_core::entanglement::{concurrence_2q, majorization_check, negativity};
use locc_core::protocols::{synthesize_nielsen_protocol, verify_transformation};
use locc_core::qstate::random::{random_density, random_state, random_unitary};
use locc_core::qstate::{schmidt_probabilities, DensityOperator};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn schmidt_probabilities_sum_to_one(seed in any::<u64>(), d_a in 1usize..=4, d_b in 1usize..=4) {
        let s = random_state(&mut ChaCha8Rng::seed_from_u64(seed), d_a, d_b);
        let total: f64 = schmidt_probabilities(&s).iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn majorization_is_reflexive_and_lu_invariant(seed in any::<u64>(), d_a in 2usize..=4, d_b in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_state(&mut rng, d_a, d_b);
        let y = random_state(&mut rng, d_a, d_b);
        prop_assert!(majorization_check(&x, &x).holds);
        let moved = y.transformed(&random_unitary(&mut rng, d_a), &random_unitary(&mut rng, d_b)).unwrap();
        let (before, after) = (majorization_check(&x, &y), majorization_check(&x, &moved));
        if before.margin().abs() > 1e-9 {
            prop_assert_eq!(before.holds, after.holds);
        }
    }

    #[test]
    fn synthesis_succeeds_exactly_when_majorization_holds(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_state(&mut rng, d, d);
        let y = random_state(&mut rng, d, d);
        let verdict = majorization_check(&x, &y);
        match synthesize_nielsen_protocol(&x, &y) {
            Ok(p) => {
                prop_assert!(verdict.holds);
                let report = verify_transformation(&p, &[x], &[y], 1e-7).unwrap();
                prop_assert!(report.verified);
            }
            Err(_) => prop_assert!(!verdict.holds),
        }
    }

    #[test]
    fn two_qubit_measures_are_bounded(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = random_density(&mut ChaCha8Rng::seed_from_u64(seed), 2, 2, rank);
        let c = concurrence_2q(&rho).unwrap();
        let n = negativity(&rho);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&c));
        prop_assert!(n >= -1e-12 && n <= c / 2.0 + 1e-9);
    }

    #[test]
    fn negativity_invariant_under_local_unitaries(seed in any::<u64>(), d_a in 2usize..=3, d_b in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(&mut rng, d_a, d_b, 2);
        let (u, v) = (random_unitary(&mut rng, d_a), random_unitary(&mut rng, d_b));
        let moved = DensityOperator::new(d_a, d_b, rho.conjugate_by_product(&u, &v)).unwrap();
        prop_assert!((negativity(&rho) - negativity(&moved)).abs() < 1e-9);
    }

    #[test]
    fn simplex_grid_points_are_interior(n in 2usize..=4, res in 4usize..=12) {
        for p in simplex_grid(n, res) {
            let total: f64 = p.probs().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(p.probs().iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn exact_amplitudes_expand_exactly(num in 1u32..20, den in 1u32..20, radicand in 1u32..30, negative in any::<bool>()) {
        let sign = if negative { -1.0 } else { 1.0 };
        let v = json!({"num": num, "den": den, "sqrt": radicand, "phase_sign": sign});
        let z = parse_amplitude(&v, "amp").unwrap();
        prop_assert_eq!(z.re, sign * num as f64 * (radicand as f64).sqrt() / den as f64);
        prop_assert_eq!(z.im, 0.0);
    }
}
