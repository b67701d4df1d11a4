//! Property-based suites for the invariants of each module.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::approxnet::{build_pair_net, k_budget, Activation};
use crate::hardfn::{eval_g, restricted_series, restricted_tail_bound, CMode, EvalMode, HardFnParams};
use crate::partitions::{
    conjugate, doubly_even_contract, doubly_even_expand, enumerate_partitions, is_doubly_even, partition_count,
    Partition,
};
use crate::symfunc::{
    canonicalize, det, permutation_sign, pfaffian, schur_jacobi_trudi, schur_value, slater_value, CircleConfig, Orbital,
};
use crate::train::{gradient_check, tiny_config, ModelSpec};
use crate::C64;

fn partition() -> impl Strategy<Value = Partition> {
    prop::collection::vec(1u32..7, 0..7).prop_map(|v| Partition::from_parts_unsorted(v).expect("positive parts"))
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn angles(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..std::f64::consts::TAU, n)
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn conjugation_is_a_weight_preserving_involution(p in partition()) {
        let c = conjugate(&p);
        prop_assert_eq!(c.weight(), p.weight());
        prop_assert_eq!(c.len() as u32, p.largest());
        prop_assert_eq!(conjugate(&c), p);
    }

    #[test]
    fn doubling_round_trips(p in partition()) {
        let d = doubly_even_expand(&p);
        prop_assert!(is_doubly_even(&d));
        prop_assert_eq!(d.weight(), 4 * p.weight());
        prop_assert_eq!(doubly_even_contract(&d), Some(p));
    }

    #[test]
    fn bounded_counts_match_enumeration(k in 0usize..18, m in 1usize..6) {
        let c = partition_count(k, Some(m));
        prop_assert_eq!(c.clone(), num_bigint::BigUint::from(enumerate_partitions(k, Some(m)).unwrap().len()));
        prop_assert!(c <= partition_count(k, Some(m + 1)));
    }

    #[test]
    fn canonical_sign_matches_permutation_sign(sigma in permutation(6)) {
        let base: Vec<u32> = vec![11, 8, 5, 3, 2, 0];
        let v: Vec<u32> = sigma.iter().map(|&i| base[i]).collect();
        let (key, sign) = canonicalize(&v).unwrap();
        prop_assert_eq!(key, base);
        prop_assert_eq!(sign, permutation_sign(&sigma));
    }

    #[test]
    fn slater_values_alternate(theta in angles(4), sigma in permutation(4), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let orb: Vec<Orbital> = (0..4)
            .map(|_| Orbital::from_dense(&(0..5).map(|_| C64::new(rand::Rng::gen_range(&mut rng, -1.0..1.0), 0.3)).collect::<Vec<_>>()))
            .collect();
        let x = CircleConfig::from_angles(&theta).unwrap();
        let a = slater_value(&orb, &x).unwrap();
        let b = slater_value(&orb, &x.permuted(&sigma)).unwrap();
        prop_assert!(close(b, a * permutation_sign(&sigma) as f64, 1e-11));
    }

    #[test]
    fn schur_routes_agree(p in partition(), theta in angles(4)) {
        prop_assume!(p.len() <= 4);
        let x = CircleConfig::from_angles(&theta).unwrap();
        prop_assume!(x.min_pairwise_distance() > 1e-2);
        let a = schur_value(&p, &x);
        let b = schur_jacobi_trudi(&p, x.points());
        prop_assert!(close(a, b, 1e-6), "{} vs {}", a, b);
    }

    #[test]
    fn pfaffian_squares_to_determinant(seed in 0u64..10_000, half in 1usize..5) {
        let n = 2 * half;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = nalgebra::DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = C64::new(rand::Rng::gen_range(&mut rng, -1.0..1.0), rand::Rng::gen_range(&mut rng, -1.0..1.0));
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        let pf = pfaffian(&m).unwrap();
        let d = det(&m);
        prop_assert!((pf * pf - d).norm() <= 1e-9 * (1.0 + d.norm()));
    }

    #[test]
    fn g_alternates_in_both_modes(theta in angles(4), sigma in permutation(4)) {
        let params = HardFnParams::new(4, 0.5, CMode::ExactRestricted).unwrap();
        let x = CircleConfig::from_angles(&theta).unwrap();
        let s = permutation_sign(&sigma) as f64;
        for mode in [EvalMode::Jastrow, EvalMode::SchurTruncated] {
            let a = eval_g(&x, &params, mode).unwrap().value;
            let b = eval_g(&x.permuted(&sigma), &params, mode).unwrap().value;
            prop_assert!(close(b, a * s, 1e-10));
        }
    }

    #[test]
    fn restricted_tail_bound_dominates(q in 0.05f64..0.95, m in 1usize..4, kmin in 1usize..40) {
        let terms = restricted_series(q, m, 4000);
        let truth: f64 = terms[kmin..].iter().sum();
        prop_assert!(restricted_tail_bound(q, m, kmin) >= truth * (1.0 - 1e-12));
    }

    #[test]
    fn pair_net_is_exactly_symmetric(s in 0.0..std::f64::consts::TAU, t in 0.0..std::f64::consts::TAU) {
        let net = build_pair_net(0.6, 4, 48, Activation::SinhShift).unwrap();
        let (x, y) = (C64::from_polar(1.0, s), C64::from_polar(1.0, t));
        prop_assert_eq!(net.eval(x, y), net.eval(y, x));
    }

    #[test]
    fn budget_is_monotone_in_inverse_epsilon(n in prop::sample::select(vec![6usize, 8, 10]), a in 1e-9f64..1.0, b in 1e-9f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(k_budget(n, lo).unwrap().0 >= k_budget(n, hi).unwrap().0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn gradients_match_central_differences(seed in 0u64..1000, jastrow in any::<bool>()) {
        let model = if jastrow { ModelSpec::Jastrow } else { ModelSpec::Slater { determinants: 2 } };
        prop_assert!(gradient_check(&tiny_config(2, model.clone(), 4, seed), false).unwrap() < 1e-5);
        prop_assert!(gradient_check(&tiny_config(4, model, 3, seed), true).unwrap() < 1e-5);
    }

    #[test]
    fn models_alternate(seed in 0u64..1000, jastrow in any::<bool>()) {
        let model = if jastrow { ModelSpec::Jastrow } else { ModelSpec::Slater { determinants: 2 } };
        let cfg = tiny_config(4, model, 6, seed);
        let m = cfg.build_model().unwrap();
        prop_assert!(m.antisymmetry_defect(&cfg.dataset().unwrap(), 12).unwrap() < 1e-9);
    }
}
