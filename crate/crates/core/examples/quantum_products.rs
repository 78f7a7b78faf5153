//! The symmetrized Trotter product converging to the log-sum product, and
//! how the two behave under partial traces.
//!
//! ```text
//! cargo run --example quantum_products
//! ```

use holant::linalg::{LabeledOperator, SpaceLabel};
use holant::quantum::{
    check_star_distributivity, find_odot_nondistributivity, odot, qubit_triple, star, star_n,
};
use holant::random::{random_pd_with_spectrum, seeded};

fn main() -> holant::Result<()> {
    let mut rng = seeded(42);
    let a = SpaceLabel::base("A", 2);
    let x = LabeledOperator::new(vec![a.clone()], random_pd_with_spectrum(&mut rng, 2, 0.1, 1.0))?;
    let y = LabeledOperator::new(vec![a], random_pd_with_spectrum(&mut rng, 2, 0.1, 1.0))?;

    let limit = odot(&x, &y)?;
    println!("n      |star_n - odot|_F   ratio");
    let mut prev: Option<f64> = None;
    for n in [1, 2, 4, 8, 16, 32, 64, 128] {
        let err = star_n(&x, &y, n)?.sub(&limit)?.frobenius_norm();
        match prev {
            Some(p) => println!("{n:<6} {err:<19.3e} {:.3}", p / err),
            None => println!("{n:<6} {err:.3e}"),
        }
        prev = Some(err);
    }

    let [ka, kb, kc] = qubit_triple();
    let ab = LabeledOperator::new(vec![ka, kb.clone()], random_pd_with_spectrum(&mut rng, 4, 0.05, 1.0))?;
    let bc = LabeledOperator::new(vec![kb, kc], random_pd_with_spectrum(&mut rng, 4, 0.05, 1.0))?;
    println!("Tr(ab * bc) = {:.6}", star(&ab, &bc)?.trace().re);
    println!("star distributivity gap: {:.2e}", check_star_distributivity(&ab, &bc)?);

    match find_odot_nondistributivity(7, 100)? {
        Some(w) => println!(
            "odot fails to distribute at trial {}: {:.6} vs {:.6} (relative {:.2e})",
            w.trial, w.gap.lhs.re, w.gap.rhs.re, w.gap.relative
        ),
        None => println!("no odot witness found"),
    }
    Ok(())
}
