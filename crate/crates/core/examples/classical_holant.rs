//! A three-spin chain with an invertible change of basis on every edge.
//!
//! ```text
//! cargo run --example classical_holant
//! ```

use holant::classical::{
    classical_transform, verify_classical_holant, ClassicalEdgeTransform, ClassicalFactor,
    ClassicalFactorGraph, ClassicalVariable,
};
use holant::Tolerances;
use nalgebra::DMatrix;

fn main() -> holant::Result<()> {
    let coupling = |j: f64| vec![j.exp(), (-j).exp(), (-j).exp(), j.exp()];
    let g = ClassicalFactorGraph::new(
        vec![
            ClassicalVariable::new("s1", vec![1.0, 0.5]),
            ClassicalVariable::new("s2", vec![1.0, 1.0]),
            ClassicalVariable::new("s3", vec![0.5, 1.0]),
        ],
        vec![
            ClassicalFactor::new("j12", vec!["s1".into(), "s2".into()], coupling(0.4)),
            ClassicalFactor::new("j23", vec!["s2".into(), "s3".into()], coupling(-0.2)),
        ],
    )?;

    // Hadamard-like basis change, scaled so that phi * phi_hat = 1.
    let h = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]);
    let transforms = g
        .edges()
        .into_iter()
        .map(|(v, a)| ClassicalEdgeTransform::with_inverse(v, a, h.clone()))
        .collect::<holant::Result<Vec<_>>>()?;

    let transformed = classical_transform(&g, &transforms)?;
    for t in &transformed.factors {
        println!("f_hat[{}] over {:?}: {:?}", t.node, t.edges, t.table);
    }

    let report = verify_classical_holant(&g, &transforms, &Tolerances::default())?;
    println!("Z     = {}", report.z_original.re);
    println!("Z_hat = {}", report.z_transformed.re);
    println!("{} (relative discrepancy {:.1e})", report.verdict, report.discrepancy);
    Ok(())
}
