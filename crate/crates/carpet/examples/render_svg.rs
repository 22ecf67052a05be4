//! Draws `S16` then `WS2` and writes each level as SVG.
//!
//! ```bash
//! cargo run --release --example render_svg -- /tmp/svg
//! ```

use std::path::PathBuf;

use loewner_carpet::embedding::{draw_level, to_svg, Drawing};
use loewner_carpet::{apply_rule, build_seed, Rule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| ".".to_string()).into();
    std::fs::create_dir_all(&out)?;
    let mut g = build_seed();
    let mut d = Drawing::from_graph(&g);
    std::fs::write(out.join("level_0.svg"), to_svg(&d))?;
    for (k, rule) in [Rule::S(16), Rule::WS(2)].into_iter().enumerate() {
        let step = apply_rule(&g, rule)?;
        d = draw_level(&step.graph, &step.ledger, &d, rule)?;
        g = step.graph;
        let path = out.join(format!("level_{}.svg", k + 1));
        std::fs::write(&path, to_svg(&d))?;
        println!("{rule}: {} segments -> {}", d.segments.len(), path.display());
    }
    Ok(())
}
