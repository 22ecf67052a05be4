//! Curve-family modulus between random vertex pairs of Basic level 1, over
//! an increasing eps grid.
//!
//! ```bash
//! cargo run --release --example modulus_probe
//! ```

use loewner_carpet::analysis::monotonicity_probe;
use loewner_carpet::rational::{int, ratio};
use loewner_carpet::{apply_rule, build_seed, Rule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = apply_rule(&build_seed(), Rule::Basic)?.graph;
    let grid = [ratio(1, 8), ratio(1, 4), ratio(1, 2)];
    let rows = monotonicity_probe(&g, 10, &grid, &int(1), 1.2, 32, 0)?;
    println!("eps    min_modulus  mean_modulus  empty");
    for r in rows {
        println!("{:<6} {:<12.5} {:<13.5} {}", r.eps, r.min_modulus, r.mean_modulus, r.empty_families);
    }
    Ok(())
}
