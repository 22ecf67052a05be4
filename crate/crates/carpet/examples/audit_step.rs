//! Applies `C_1` to the seed and prints the admissibility audit, one line
//! per condition, with the wormhole and star-quotient checks.
//!
//! ```bash
//! cargo run --release --example audit_step
//! ```

use loewner_carpet::substitution::{check_admissibility, star_quotient_check, wormhole_graphs};
use loewner_carpet::{apply_rule, build_seed, Rule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = build_seed();
    let step = apply_rule(&seed, Rule::C(1))?;
    println!(
        "C1: {} vertices, {} edges, {} wormhole classes",
        step.graph.vertex_count(),
        step.graph.edge_count(),
        step.ledger.classes_i.len()
    );
    let report = check_admissibility(&seed, &step.graph, &step.ledger)?;
    for c in &report.conditions {
        let verdict = if c.passed { "pass" } else { "FAIL" };
        println!("({:>2}) {:22} {verdict} {}", c.number, c.name, c.detail);
    }
    let (graphs, connected) = wormhole_graphs(&step.ledger);
    println!("wormhole graphs: {} connected={connected}", graphs.len());
    println!("star quotients pass: {}", star_quotient_check(&step.ledger, &seed).passed());
    Ok(())
}
