//! Two qubits sharing a commuting pair of factors, each edge dressed with a
//! random invertible map, and the transformed partition function.
//!
//! ```text
//! cargo run --example quantum_holant
//! ```

use holant::cj::SuperOperator;
use holant::linalg::raw::CMat;
use holant::linalg::{LabeledOperator, SpaceLabel};
use holant::qholo::{
    quantum_transform, verify_quantum_holant, z_transformed, EdgeTransform, QuantumTransformSet,
};
use holant::quantum::{QuantumFactor, QuantumFactorGraph, QuantumVariable};
use holant::random::{random_matrix, random_pd_with_spectrum, seeded};
use holant::Tolerances;

fn main() -> holant::Result<()> {
    let tol = Tolerances::default();
    let mut rng = seeded(2024);
    let pd = |rng: &mut holant::random::SeededRng| random_pd_with_spectrum(rng, 2, 0.2, 1.0);

    // Each qubit touches one factor, so any invertible map is allowed per edge.
    let g = QuantumFactorGraph::new(
        vec![QuantumVariable::new("p", pd(&mut rng))?, QuantumVariable::new("q", pd(&mut rng))?],
        vec![
            QuantumFactor::new("a", vec!["p".into()], LabeledOperator::new(vec![SpaceLabel::base("p", 2)], pd(&mut rng))?),
            QuantumFactor::new("b", vec!["q".into()], LabeledOperator::new(vec![SpaceLabel::base("q", 2)], pd(&mut rng))?),
        ],
    )?;

    let mut edges = Vec::new();
    for (v, a) in g.edges() {
        let phi = loop {
            let m: CMat = random_matrix(&mut rng, 4);
            let t = SuperOperator::from_transfer(vec![SpaceLabel::hat(&v, &a, 2)], vec![SpaceLabel::base(&v, 2)], m)?;
            if t.condition_number() < 1e3 {
                break t;
            }
        };
        edges.push(EdgeTransform::with_inverse(v, a, phi, &tol)?);
    }
    let ts = QuantumTransformSet::new(edges);

    let t = quantum_transform(&g, &ts, &tol)?;
    for (name, op) in &t.factors {
        println!("f_hat[{name}] on [{}]", holant::linalg::display_labels(op.labels()));
    }
    let zt = z_transformed(&t, &tol)?;
    println!("Z     = {}", g.partition_function()?);
    println!("Z_hat = {:.15} {:+.1e}i", zt.value.re, zt.value.im);

    let report = verify_quantum_holant(&g, &ts, &tol)?;
    println!("{} (discrepancy {:.1e})", report.verdict, report.discrepancy);
    Ok(())
}
