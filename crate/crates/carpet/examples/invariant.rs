//! Evaluates the quasi-invariant `h_inf_bar(t)` on step profiles of a few
//! rule sequences.
//!
//! ```bash
//! cargo run --release --example invariant
//! ```

use loewner_carpet::planner::{h_inf_bar, repeat_sequence, UniformityProfile};
use loewner_carpet::rational::{ratio, to_f64};
use loewner_carpet::Rule;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sequences = [
        ("basic x4", vec![Rule::Basic; 4]),
        ("(S16 C1) x1", repeat_sequence(&[Rule::S(16), Rule::C(1)], 1)),
        ("(S16 C1) x4", repeat_sequence(&[Rule::S(16), Rule::C(1)], 4)),
        ("WS2 S16 WS2", vec![Rule::WS(2), Rule::S(16), Rule::WS(2)]),
    ];
    let ts = [ratio(1, 2), ratio(1, 8), ratio(1, 32)];
    for (name, rules) in &sequences {
        let profile = UniformityProfile::from_rules(rules);
        let values: Vec<String> = ts
            .iter()
            .map(|t| h_inf_bar(&profile, t).map_or("-".to_string(), |v| format!("{:.3e}", to_f64(&v))))
            .collect();
        println!("{name:14} {}", values.join("  "));
    }
    Ok(())
}
