mod common;

use common::*;
use hiercorr::factorization::{build_interaction_matrix, check_toric_membership, monomial_map};
use hiercorr::maxent::{correlation_ck, maxent_project, Method, ProjectionOptions};
use hiercorr::state::relative_entropy;
use hiercorr::two_qubit::{bell_from_lambda, bell_from_t, is_separable, is_separable_by_t, mutual_information_bd};
use hiercorr::{build_model, DensityMatrix, Hypergraph, SystemShape};
use proptest::prelude::*;

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|w| {
        let t: f64 = w.iter().sum();
        w.into_iter().map(|x| x / t).collect()
    })
}

fn seeds() -> impl Strategy<Value = u64> {
    any::<u64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lambda_and_t_round_trip(l in simplex(4)) {
        let b = bell_from_lambda([l[0], l[1], l[2], l[3]]).unwrap();
        let back = bell_from_t(b.t).unwrap();
        for i in 0..4 {
            prop_assert!((back.lambda[i] - l[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn separability_criteria_agree(t in prop::array::uniform3(-1.0f64..1.0)) {
        if let Ok(b) = bell_from_t(t) {
            // keep clear of the boundary where the two tests round differently
            let margin = (t.iter().map(|x| x.abs()).sum::<f64>() - 1.0).abs();
            prop_assume!(margin > 1e-9);
            prop_assert_eq!(is_separable(&b), is_separable_by_t(&b));
        }
    }

    #[test]
    fn bell_mutual_information_matches_partial_traces(l in simplex(4)) {
        let b = bell_from_lambda([l[0], l[1], l[2], l[3]]).unwrap();
        prop_assert!((mutual_information_bd(&b) - multi_info(&b.matrix(), &[2, 2])).abs() < 1e-10);
    }

    #[test]
    fn toric_image_passes_membership(t in prop::collection::vec(0.1f64..3.0, 12)) {
        let a = build_interaction_matrix(&SystemShape::bits(3), 2).unwrap();
        let s = monomial_map(&a, &t).unwrap();
        prop_assert!(check_toric_membership(&s, &a).unwrap().member);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn correlation_hierarchy_is_monotone(seed in seeds(), rank in 1usize..=8) {
        let m = mixed_state(8, rank, &mut rng(seed));
        let rho = DensityMatrix::new(SystemShape::qubits(3), m).unwrap();
        let c: Vec<f64> = (1..=3).map(|k| correlation_ck(&rho, k).unwrap()).collect();
        prop_assert!(c[0] >= c[1] - 1e-6 && c[1] >= c[2] - 1e-6, "{:?}", c);
        prop_assert!(c[2].abs() < 1e-12);
    }

    #[test]
    fn product_of_marginals_minimizes_divergence(seed in seeds()) {
        let mut r = rng(seed);
        let shape = SystemShape::qubits(2);
        let m = mixed_state(4, 4, &mut r);
        let rho = DensityMatrix::new(shape.clone(), m.clone()).unwrap();
        let mi = multi_info(&m, &[2, 2]);
        let sigma = DensityMatrix::new(shape, kron(&mixed_state(2, 2, &mut r), &mixed_state(2, 2, &mut r))).unwrap();
        prop_assert!(relative_entropy(&rho, &sigma).unwrap() >= mi - 1e-10);
        let pi = rho.product_of_marginals().unwrap();
        prop_assert!((relative_entropy(&rho, &pi).unwrap() - mi).abs() < 1e-10);
    }

    #[test]
    fn classical_projection_matches_reference_ipf(p in simplex(8), k in 1usize..=2) {
        let model = build_model(&SystemShape::bits(3), &Hypergraph::k_local(3, k).unwrap()).unwrap();
        let rho = DensityMatrix::from_probabilities(SystemShape::bits(3), &p).unwrap();
        let sets = if k == 1 { singletons(3) } else { pairs_of(3) };
        let (q, _) = ipf(&p, 3, &sets, 100_000, 1e-14);
        for method in [Method::Auto, Method::Dual] {
            let res = maxent_project(&rho, &model, &ProjectionOptions::with_method(method)).unwrap();
            prop_assert!((res.divergence - kl(&p, &q)).abs() < 1e-7);
        }
    }
}
