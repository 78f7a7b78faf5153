//! Superoperators in Choi form: build one from its action on matrix units,
//! apply it, invert it and check the swap-witness condition for the pair.
//!
//! ```text
//! cargo run --example choi_maps
//! ```

use holant::cj::{check_strong_inverse, SuperOperator};
use holant::linalg::raw::CMat;
use holant::linalg::{LabeledOperator, SpaceLabel};
use holant::random::{random_matrix, seeded};
use num_complex::Complex64;

fn main() -> holant::Result<()> {
    let q = 2;
    let base = SpaceLabel::base("x", q);
    let hat = SpaceLabel::hat("x", "a", q);
    let prime = SpaceLabel::prime("x", "a", q);

    // Transpose-and-scale map, specified on matrix units.
    let phi = SuperOperator::from_action(vec![hat.clone()], vec![base.clone()], |k, l| {
        let mut m = CMat::zeros(q, q);
        m[(l, k)] = Complex64::new(1.0 + (k + l) as f64, 0.0);
        m
    })?;
    println!("Choi matrix of phi:\n{}", phi.cj().map(|z| z.re));
    println!("condition number {:.3}", phi.condition_number());

    let mut rng = seeded(1);
    let g = LabeledOperator::new(vec![hat.clone()], random_matrix(&mut rng, q))?;
    let by_cj = phi.apply(&g)?;
    let by_trace = phi.apply_by_partial_trace(&g)?;
    println!(
        "apply vs partial-trace formula: {:.1e}",
        (by_cj.matrix() - by_trace.matrix()).norm()
    );

    let phi_hat = phi.invert()?.relabel_domain(&[prime])?;
    let r = check_strong_inverse(&phi.cj_operator()?, &phi_hat.cj_operator()?)?;
    println!("swap witness residual {:.1e}, composition residual {:.1e}", r.witness, r.map);

    let adj = phi.adjoint();
    println!("adjoint maps [{}] -> [{}]", adj.domain()[0], adj.codomain()[0]);
    Ok(())
}
