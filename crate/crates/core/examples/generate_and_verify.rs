//! Seeded instance families, verified in bulk, with documents written the
//! same way `holant gen` writes them.
//!
//! ```text
//! cargo run --example generate_and_verify [seeds]
//! ```

use holant::io::{self, GraphDocument, TransformDocument, VerdictCounts};
use holant::qholo::{gen_instance, verify_quantum_holant, Family, SizeParams};
use holant::Tolerances;

fn main() -> holant::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(25);
    let size: SizeParams = "variables=4,factors=3,dim=2,arity=3".parse()?;
    let tol = Tolerances::default();

    for family in Family::ALL {
        let mut counts = VerdictCounts::default();
        let mut worst = 0.0f64;
        for seed in 0..seeds {
            let inst = gen_instance(family, &size, seed)?;
            let r = verify_quantum_holant(&inst.graph, &inst.transforms, &tol)?;
            counts.add(r.verdict);
            worst = worst.max(r.discrepancy);
        }
        println!(
            "{family:<9} {} PASS {} FAIL {} EXPLORATORY, worst discrepancy {worst:.1e}",
            counts.pass, counts.fail, counts.exploratory
        );
    }

    let inst = gen_instance(Family::Pauli, &size, 0)?;
    let dir = std::env::temp_dir();
    let (g, t) = (dir.join("pauli0.graph.json"), dir.join("pauli0.transforms.json"));
    io::write_json(&g, &GraphDocument::from_quantum(&inst.graph))?;
    io::write_json(&t, &TransformDocument::from_quantum(&inst.transforms)?)?;
    println!("wrote {} and {}", g.display(), t.display());
    println!("try: holant verify {} {}", g.display(), t.display());
    Ok(())
}
