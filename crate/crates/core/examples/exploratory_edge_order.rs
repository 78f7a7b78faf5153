//! Two qubits `x`, `y` both shared by two commuting entangling factors, with
//! a random invertible map on every edge. The maps meeting at a qubit do not
//! commute, so the product over a variable's edges depends on its order. The
//! stored order keeps the identity; reversing it at `x` alone breaks it and
//! the verdict becomes EXPLORATORY.
//!
//! ```text
//! cargo run --example exploratory_edge_order
//! ```

use holant::cj::SuperOperator;
use holant::linalg::raw::CMat;
use holant::linalg::{LabeledOperator, SpaceLabel};
use holant::qholo::{verify_quantum_holant, EdgeTransform, QuantumTransformSet};
use holant::quantum::{QuantumFactor, QuantumFactorGraph, QuantumVariable};
use holant::random::{random_matrix, random_pd_with_spectrum, random_unitary, seeded};
use holant::Tolerances;
use num_complex::Complex64;

fn main() -> holant::Result<()> {
    let tol = Tolerances::default();
    let mut rng = seeded(17);
    let (x, y) = (SpaceLabel::base("x", 2), SpaceLabel::base("y", 2));

    // Shared eigenbasis, different spectra: the factors commute.
    let u = random_unitary(&mut rng, 4);
    let factor = |d: [f64; 4]| {
        let m = &u * CMat::from_diagonal(&nalgebra::DVector::from_fn(4, |i, _| Complex64::new(d[i], 0.0))) * u.adjoint();
        LabeledOperator::new(vec![x.clone(), y.clone()], m)
    };
    let g = QuantumFactorGraph::new(
        vec![
            QuantumVariable::new("x", random_pd_with_spectrum(&mut rng, 2, 0.2, 1.0))?,
            QuantumVariable::new("y", random_pd_with_spectrum(&mut rng, 2, 0.2, 1.0))?,
        ],
        vec![
            QuantumFactor::new("a", vec!["x".into(), "y".into()], factor([1.0, 0.2, 0.5, 0.8])?),
            QuantumFactor::new("b", vec!["x".into(), "y".into()], factor([0.3, 1.1, 0.7, 0.4])?),
        ],
    )?;

    let mut edges = Vec::new();
    for (v, a) in g.edges() {
        let phi = loop {
            let t = SuperOperator::from_transfer(
                vec![SpaceLabel::hat(&v, &a, 2)],
                vec![SpaceLabel::base(&v, 2)],
                random_matrix(&mut rng, 4),
            )?;
            if t.condition_number() < 1e3 {
                break t;
            }
        };
        edges.push(EdgeTransform::with_inverse(v, a, phi, &tol)?);
    }
    let mut ts = QuantumTransformSet::new(edges);

    let stored = verify_quantum_holant(&g, &ts, &tol)?;
    for n in &stored.nodes {
        println!("commutation residual of the maps at {}: {:.3}", n.variable, n.commutation);
    }
    println!("stored orders:    {} discrepancy {:.1e}", stored.verdict, stored.discrepancy);

    ts.set_edge_order("x", vec!["b".into(), "a".into()]);
    let reversed = verify_quantum_holant(&g, &ts, &tol)?;
    println!("x reversed:       {} discrepancy {:.3e}", reversed.verdict, reversed.discrepancy);
    println!(
        "  Z = {:.6}, Z_hat = {:.6}{:+.6}i",
        reversed.z_original.re, reversed.z_transformed.re, reversed.z_transformed.im
    );
    if let Some(s) = reversed.order_sensitivity {
        println!("  order sensitivity over sampled permutations: {s:.3e}");
    }
    for reason in &reversed.reasons {
        println!("  {reason}");
    }
    Ok(())
}
