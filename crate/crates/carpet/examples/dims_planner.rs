//! Chooses rule parameters and frequencies for target dimensions, then
//! compares the dimensions of a finite balanced sequence with the targets.
//!
//! ```bash
//! cargo run --release --example dims_planner -- 1.2 1.5
//! ```

use loewner_carpet::planner::{balanced_sequence, choose_parameters, sequence_dims};
use loewner_carpet::Rule;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let (q, q_prime) = match args[..] {
        [q, qp] => (q, qp),
        _ => (1.2, 1.5),
    };
    let (n0, n1, n2, sol) = choose_parameters(q, q_prime)?;
    println!("S_{n0}, C_{n1}, WS_{n2} with frequencies {:?}", sol.alpha);
    println!("residuals {:?}", sol.residuals);
    let table = [Rule::S(n0 as u64), Rule::C(n1 as u64), Rule::WS(n2 as u64)];
    for len in [8, 64, 512] {
        let rules: Vec<Rule> = balanced_sequence(&sol.alpha, len)?.iter().map(|&i| table[i as usize]).collect();
        let d = sequence_dims(&rules)?;
        println!("{len:>4} levels: Q = {:.4}, Q' = {:.4}", d.q, d.q_prime);
    }
    Ok(())
}
