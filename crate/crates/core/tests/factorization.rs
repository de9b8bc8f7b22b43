use hiercorr::factorization::{
    build_interaction_matrix, check_toric_membership, enumerate_feasibility, is_k_feasible, SupportSet,
};
use hiercorr::maxent::{maxent_project, Method, ProjectionOptions};
use hiercorr::random;
use hiercorr::{build_model, DensityMatrix, Hypergraph, SystemShape};

#[test]
fn gibbs_states_have_full_support_and_are_toric() {
    let shape = SystemShape::bits(3);
    let model = build_model(&shape, &Hypergraph::k_local(3, 2).unwrap()).unwrap();
    let a = build_interaction_matrix(&shape, 2).unwrap();
    for i in 0..20 {
        let sigma = random::random_model_state(&model, 2.0, &mut random::rng(9, i)).unwrap();
        let p = sigma.diagonal();
        assert!(p.iter().all(|&x| x > 0.0));
        let toric = check_toric_membership(&p, &a).unwrap();
        assert!(toric.member && !toric.boundary_case);
    }
}

#[test]
fn uniform_on_y_is_in_the_closure_but_does_not_factorize() {
    let shape = SystemShape::bits(3);
    let y = SupportSet::from_labels(&shape, &["100", "010", "001"]).unwrap();
    let u = y.uniform(8);
    let a = build_interaction_matrix(&shape, 2).unwrap();
    let toric = check_toric_membership(&u, &a).unwrap();
    assert!(toric.member && toric.boundary_case);
    assert!(!is_k_feasible(&y, &shape, 2).unwrap());

    let model = build_model(&shape, &Hypergraph::k_local(3, 2).unwrap()).unwrap();
    let rho = DensityMatrix::from_probabilities(shape, &u).unwrap();
    let res = maxent_project(&rho, &model, &ProjectionOptions::with_method(Method::Primal)).unwrap();
    assert!(res.divergence < 1e-8, "{}", res.divergence);
}

#[test]
fn y_orbit_is_among_minimal_non_feasible_sets() {
    let shape = SystemShape::bits(3);
    let rep = enumerate_feasibility(&shape, 2, 3).unwrap();
    assert!(rep.small_sets_feasible);
    let y = SupportSet::from_labels(&shape, &["100", "010", "001"]).unwrap().labels(&shape);
    let flip = SupportSet::from_labels(&shape, &["011", "101", "110"]).unwrap().labels(&shape);
    assert!(rep.minimal_non_feasible.contains(&y));
    assert!(rep.minimal_non_feasible.contains(&flip));
}

#[test]
fn two_bits_are_always_feasible() {
    let rep = enumerate_feasibility(&SystemShape::bits(2), 2, 4).unwrap();
    assert!(rep.minimal_non_feasible.is_empty());
}
