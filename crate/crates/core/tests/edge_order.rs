use holant::cj::SuperOperator;
use holant::linalg::raw::CMat;
use holant::linalg::{LabeledOperator, SpaceLabel};
use holant::qholo::{verify_quantum_holant, EdgeTransform, QuantumTransformSet};
use holant::quantum::{QuantumFactor, QuantumFactorGraph, QuantumVariable};
use holant::random::{random_matrix, random_pd_with_spectrum, random_unitary, seeded, SeededRng};
use holant::report::Verdict;
use holant::Tolerances;
use num_complex::Complex64;

fn strong_edges(g: &QuantumFactorGraph, rng: &mut SeededRng) -> QuantumTransformSet {
    let tol = Tolerances::default();
    let edges = g
        .edges()
        .into_iter()
        .map(|(v, a)| {
            let phi = loop {
                let t = SuperOperator::from_transfer(
                    vec![SpaceLabel::hat(&v, &a, 2)],
                    vec![SpaceLabel::base(&v, 2)],
                    random_matrix(rng, 4),
                )
                .unwrap();
                if t.condition_number() < 1e3 {
                    break t;
                }
            };
            EdgeTransform::with_inverse(v, a, phi, &tol).unwrap()
        })
        .collect();
    QuantumTransformSet::new(edges)
}

/// Qubits `x`, `y` and two commuting factors on both, or on one each.
fn graph(rng: &mut SeededRng, shared: bool) -> QuantumFactorGraph {
    let (x, y) = (SpaceLabel::base("x", 2), SpaceLabel::base("y", 2));
    let u = random_unitary(rng, 4);
    let spectrum = |d: [f64; 4]| CMat::from_diagonal(&nalgebra::DVector::from_fn(4, |i, _| Complex64::new(d[i], 0.0)));
    let variables = vec![
        QuantumVariable::new("x", random_pd_with_spectrum(rng, 2, 0.2, 1.0)).unwrap(),
        QuantumVariable::new("y", random_pd_with_spectrum(rng, 2, 0.2, 1.0)).unwrap(),
    ];
    let factors = if shared {
        let f = |d| LabeledOperator::new(vec![x.clone(), y.clone()], &u * spectrum(d) * u.adjoint()).unwrap();
        vec![
            QuantumFactor::new("a", vec!["x".into(), "y".into()], f([1.0, 0.2, 0.5, 0.8])),
            QuantumFactor::new("b", vec!["x".into(), "y".into()], f([0.3, 1.1, 0.7, 0.4])),
        ]
    } else {
        vec![
            QuantumFactor::new("a", vec!["x".into()], LabeledOperator::diagonal(x.clone(), &[1.0, 0.3]).unwrap()),
            QuantumFactor::new("b", vec!["x".into()], LabeledOperator::diagonal(x.clone(), &[0.6, 1.2]).unwrap()),
            QuantumFactor::new("c", vec!["y".into()], LabeledOperator::diagonal(y.clone(), &[0.5, 0.9]).unwrap()),
        ]
    };
    QuantumFactorGraph::new(variables, factors).unwrap()
}

#[test]
fn stored_order_keeps_the_identity_for_noncommuting_maps() {
    let tol = Tolerances::default();
    for seed in 0..10 {
        let mut rng = seeded(seed);
        let g = graph(&mut rng, true);
        let ts = strong_edges(&g, &mut rng);
        let r = verify_quantum_holant(&g, &ts, &tol).unwrap();
        assert!(r.nodes.iter().all(|n| n.commutation > 1e-3 && n.order_aligned));
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.discrepancy <= 1e-12);
    }
}

#[test]
fn inconsistent_orders_across_shared_factors_break_it() {
    let tol = Tolerances::default();
    for seed in 0..10 {
        let mut rng = seeded(seed);
        let g = graph(&mut rng, true);
        let mut ts = strong_edges(&g, &mut rng);
        ts.set_edge_order("x", vec!["b".into(), "a".into()]);
        let r = verify_quantum_holant(&g, &ts, &tol).unwrap();
        assert_eq!(r.verdict, Verdict::Exploratory);
        assert!(r.discrepancy > 1e-8, "seed {seed}: {}", r.discrepancy);

        // Reversing both nodes restores a consistent order.
        ts.set_edge_order("y", vec!["b".into(), "a".into()]);
        let r = verify_quantum_holant(&g, &ts, &tol).unwrap();
        assert_eq!(r.verdict, Verdict::Exploratory);
        assert!(r.discrepancy <= 1e-12);
    }
}

#[test]
fn reordering_single_variable_factors_is_harmless() {
    let tol = Tolerances::default();
    let mut rng = seeded(3);
    let g = graph(&mut rng, false);
    let mut ts = strong_edges(&g, &mut rng);
    ts.set_edge_order("x", vec!["b".into(), "a".into()]);
    let r = verify_quantum_holant(&g, &ts, &tol).unwrap();
    assert_eq!(r.verdict, Verdict::Exploratory);
    assert!(r.discrepancy <= 1e-12);
}
