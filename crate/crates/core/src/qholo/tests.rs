use super::*;
use crate::classical::classical_transform;
use crate::quantum::{QuantumFactor, QuantumVariable};
use crate::random::{random_matrix, random_pd_with_spectrum, random_unitary};

fn tol() -> Tolerances {
    Tolerances::default()
}

/// One qubit variable `x` on one single-edge factor `a`.
fn single_edge(seed: u64) -> QuantumFactorGraph {
    let mut rng = seeded(seed);
    let v = QuantumVariable::new("x", random_pd_with_spectrum(&mut rng, 2, 0.1, 1.0)).unwrap();
    let f = LabeledOperator::new(
        vec![SpaceLabel::base("x", 2)],
        random_pd_with_spectrum(&mut rng, 2, 0.1, 1.0),
    )
    .unwrap();
    QuantumFactorGraph::new(vec![v], vec![QuantumFactor::new("a", vec!["x".into()], f)]).unwrap()
}

fn random_phi(seed: u64, var: &str, factor: &str, q: usize) -> SuperOperator {
    let mut rng = seeded(seed);
    SuperOperator::from_transfer(
        vec![SpaceLabel::hat(var, factor, q)],
        vec![SpaceLabel::base(var, q)],
        random_matrix(&mut rng, q * q),
    )
    .unwrap()
}

#[test]
fn identity_transforms_retier_factor() {
    let g = single_edge(1);
    let ts = QuantumTransformSet::identity(&g).unwrap();
    let fa = transform_factor(&g, "a", &ts, &tol()).unwrap().operator;
    let expect = g.factors()[0]
        .operator
        .relabel(|l| SpaceLabel::hat("x", "a", l.dim))
        .unwrap();
    assert!(fa.relative_distance(&expect).unwrap() < 1e-15);
    let fi = transform_variable(&g, "x", &ts, &["a".into()], &tol()).unwrap().operator;
    let expect = g.variables()[0]
        .operator
        .relabel(|l| SpaceLabel::hat("x", "a", l.dim))
        .unwrap();
    assert!(fi.relative_distance(&expect).unwrap() < 1e-15);
}

#[test]
fn conjugation_on_single_edge_factor() {
    let g = single_edge(2);
    let mut rng = seeded(3);
    let u = random_unitary(&mut rng, 2);
    let (b, h, p) = edge_labels("x", "a", 2);
    let phi_hat = SuperOperator::conjugation(vec![p], vec![h.clone()], &u).unwrap();
    let phi = phi_hat
        .invert()
        .unwrap()
        .relabel_codomain(std::slice::from_ref(&b))
        .unwrap();
    let e = EdgeTransform::new("x", "a", EdgeMode::Strong, phi, phi_hat).unwrap();
    let ts = QuantumTransformSet::new(vec![e]);
    let got = transform_factor(&g, "a", &ts, &tol()).unwrap();
    let f = g.factors()[0].operator.matrix();
    let expect = LabeledOperator::new(vec![h], &u * f * u.adjoint()).unwrap();
    assert!(got.operator.relative_distance(&expect).unwrap() < 1e-13);
    assert!(got.agreement <= 1e-10);
}

#[test]
fn product_maps_on_product_factor() {
    let mut rng = seeded(4);
    let vars = ["x", "y"]
        .iter()
        .map(|v| QuantumVariable::new(*v, random_pd_with_spectrum(&mut rng, 2, 0.1, 1.0)).unwrap())
        .collect();
    let fx = random_pd_with_spectrum(&mut rng, 2, 0.1, 1.0);
    let fy = random_pd_with_spectrum(&mut rng, 2, 0.1, 1.0);
    let f = LabeledOperator::new(vec![SpaceLabel::base("x", 2), SpaceLabel::base("y", 2)], fx.kronecker(&fy)).unwrap();
    let g = QuantumFactorGraph::new(vars, vec![QuantumFactor::new("a", vec!["x".into(), "y".into()], f)]).unwrap();
    let ex = EdgeTransform::with_inverse("x", "a", random_phi(5, "x", "a", 2), &tol()).unwrap();
    let ey = EdgeTransform::with_inverse("y", "a", random_phi(6, "y", "a", 2), &tol()).unwrap();
    let one = |e: &EdgeTransform, m: &CMat| {
        e.phi_hat
            .apply(&LabeledOperator::new(vec![e.prime()], m.clone()).unwrap())
            .unwrap()
    };
    let expect = one(&ex, &fx).tensor(&one(&ey, &fy)).unwrap();
    let ts = QuantumTransformSet::new(vec![ex, ey]);
    let got = transform_factor(&g, "a", &ts, &tol()).unwrap().operator;
    assert!(got.relative_distance(&expect).unwrap() < 1e-12);
}

#[test]
fn degree_one_variable_is_adjoint_image() {
    let g = single_edge(7);
    let e = EdgeTransform::with_inverse("x", "a", random_phi(8, "x", "a", 2), &tol()).unwrap();
    let expect = e.phi.adjoint().apply(&g.variables()[0].operator).unwrap();
    let ts = QuantumTransformSet::new(vec![e]);
    let got = transform_variable(&g, "x", &ts, &["a".into()], &tol()).unwrap();
    assert!(got.operator.relative_distance(&expect).unwrap() < 1e-13);
    assert!(got.agreement <= 1e-10);
}

#[test]
fn adjoint_pairing_oracle_single_edge() {
    let g = single_edge(9);
    let e = EdgeTransform::with_inverse("x", "a", random_phi(10, "x", "a", 2), &tol()).unwrap();
    let ts = QuantumTransformSet::new(vec![e]);
    let t = quantum_transform(&g, &ts, &tol()).unwrap();
    let z_hat = z_transformed(&t, &tol()).unwrap();
    let z = raw::trace_of_product(g.factors()[0].operator.matrix(), g.variables()[0].operator.matrix());
    assert!(relative_discrepancy(z, z_hat.value) < 1e-12);
    assert!(z_hat.agreement < 1e-12);
}

#[test]
fn degree_two_diagonal_order_independent() {
    let inst = gen_instance(Family::Diagonal, &SizeParams { variables: 2, factors: 3, max_dim: 3, max_arity: 2 }, 11).unwrap();
    let g = &inst.graph;
    let v = g
        .variables()
        .iter()
        .find(|v| g.incident_factors(&v.id).len() >= 2)
        .expect("a node of degree two");
    let mut order = inst.transforms.node_order(g, &v.id);
    let a = transform_variable(g, &v.id, &inst.transforms, &order, &tol()).unwrap().operator;
    order.reverse();
    let b = transform_variable(g, &v.id, &inst.transforms, &order, &tol()).unwrap().operator;
    assert!(a.relative_distance(&b).unwrap() < 1e-12);
}

#[test]
fn no_factors_means_no_edge_spaces() {
    let mut rng = seeded(12);
    let v = QuantumVariable::new("x", random_pd_with_spectrum(&mut rng, 2, 0.1, 1.0)).unwrap();
    let g = QuantumFactorGraph::new(vec![v], vec![]).unwrap();
    let t = quantum_transform(&g, &QuantumTransformSet::default(), &tol()).unwrap();
    assert!(matches!(z_transformed(&t, &tol()), Err(Error::Graph(_))));
}

#[test]
fn swap_teleport() {
    let p = SpaceLabel::prime("x", "a", 2);
    let id = LabeledOperator::identity(vec![p.clone()]).unwrap();
    assert_eq!(swap_teleport_check(&id).unwrap(), 0.0);
    let e01 = LabeledOperator::new(vec![p.clone()], raw::matrix_unit(2, 0, 1)).unwrap();
    assert_eq!(swap_teleport_check(&e01).unwrap(), 0.0);
    let mut rng = seeded(13);
    let two = LabeledOperator::new(
        vec![p, SpaceLabel::prime("y", "a", 2)],
        random_matrix(&mut rng, 4),
    )
    .unwrap();
    assert!(swap_teleport_check(&two).unwrap() <= 1e-12);
}

#[test]
fn identity_family_recovers_z() {
    for seed in 0..10 {
        let inst = gen_instance(Family::Identity, &SizeParams::default(), seed).unwrap();
        let r = verify_quantum_holant(&inst.graph, &inst.transforms, &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "seed {seed}: {:?}", r.reasons);
        assert!(r.discrepancy <= 1e-12);
    }
}

#[test]
fn every_family_passes_on_a_few_seeds() {
    let size = SizeParams { variables: 4, factors: 3, max_dim: 3, max_arity: 3 };
    for family in Family::ALL {
        for seed in 0..5 {
            let inst = gen_instance(family, &size, seed).unwrap();
            let r = verify_quantum_holant(&inst.graph, &inst.transforms, &tol()).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{family} seed {seed}: {:?}", r.reasons);
            assert!(r.form_agreement <= 1e-10 && r.transpose_agreement <= 1e-10);
        }
    }
}

#[test]
fn diagonal_family_matches_classical_transform() {
    let size = SizeParams { variables: 3, factors: 3, max_dim: 3, max_arity: 2 };
    for seed in 0..5 {
        let inst = gen_instance(Family::Diagonal, &size, seed).unwrap();
        let (cg, pairs) = inst.classical.as_ref().unwrap();
        let zc = classical_transform(cg, pairs).unwrap().partition_function().unwrap();
        let r = verify_quantum_holant(&inst.graph, &inst.transforms, &tol()).unwrap();
        assert!((r.z_transformed.re - zc).abs() / zc.abs().max(1.0) <= 1e-10);
    }
}

#[test]
fn generation_is_deterministic() {
    let size = SizeParams { variables: 2, factors: 1, max_dim: 2, max_arity: 2 };
    assert_eq!(
        gen_instance(Family::Deg1, &size, 7).unwrap(),
        gen_instance(Family::Deg1, &size, 7).unwrap()
    );
}

#[test]
fn pauli_factors_commute() {
    let size = SizeParams { variables: 4, factors: 4, max_dim: 2, max_arity: 3 };
    for seed in 0..5 {
        let inst = gen_instance(Family::Pauli, &size, seed).unwrap();
        assert!(inst.graph.factor_commutation() <= 1e-12);
    }
}

#[test]
fn diagonal_family_pairs_meet_condition() {
    let inst = gen_instance(Family::Diagonal, &SizeParams::default(), 3).unwrap();
    for e in inst.transforms.edges() {
        assert!(e.check().unwrap().max() <= 1e-10);
    }
}

#[test]
fn corrupted_pair_fails_naming_edge() {
    let size = SizeParams { variables: 3, factors: 2, max_dim: 2, max_arity: 2 };
    let mut inst = gen_instance(Family::Deg1, &size, 14).unwrap();
    let target = (inst.transforms.edges()[0].variable.clone(), inst.transforms.edges()[0].factor.clone());
    let bad = inst.transforms.edges()[0].perturbed(true, 1, 2, Complex64::new(0.1, 0.0)).unwrap();
    inst.transforms.edges_mut()[0] = bad;
    let r = verify_quantum_holant(&inst.graph, &inst.transforms, &tol()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert_eq!(r.failing_edges, vec![target]);
    assert!(quantum_transform(&inst.graph, &inst.transforms, &tol()).is_err());
}

#[test]
fn reordered_noncommuting_node_is_exploratory() {
    let size = SizeParams { variables: 2, factors: 3, max_dim: 2, max_arity: 2 };
    let found = (0..50).find_map(|seed| {
        let inst = gen_instance(Family::Identity, &size, seed).unwrap();
        let g = &inst.graph;
        let v = g.variables().iter().find(|v| g.incident_factors(&v.id).len() >= 2)?;
        let mut order = inst.transforms.node_order(g, &v.id);
        order.reverse();
        let mut ts = inst.transforms.clone();
        ts.set_edge_order(v.id.clone(), order);
        Some(verify_quantum_holant(g, &ts, &tol()).unwrap())
    });
    let r = found.expect("an instance with a degree-two node");
    assert_eq!(r.verdict, Verdict::Exploratory);
    assert!(r.order_sensitivity.is_some());
}

#[test]
fn missing_and_extra_transforms() {
    let g = single_edge(15);
    assert!(matches!(
        QuantumTransformSet::default().validate(&g),
        Err(Error::MissingTransform(..))
    ));
    let ts = QuantumTransformSet::new(vec![
        EdgeTransform::identity("x", "a", 2).unwrap(),
        EdgeTransform::identity("x", "b", 2).unwrap(),
    ]);
    assert!(matches!(ts.validate(&g), Err(Error::ExtraTransform(..))));
}

#[test]
fn size_params_parse() {
    let p: SizeParams = "variables=5,factors=4,dim=3,arity=2".parse().unwrap();
    assert_eq!(p, SizeParams { variables: 5, factors: 4, max_dim: 3, max_arity: 2 });
    assert_eq!(p.to_string().parse::<SizeParams>().unwrap(), p);
    assert!("variables=0".parse::<SizeParams>().is_err());
    assert!("colors=2".parse::<SizeParams>().is_err());
}
