//! Complementary faces of Basic level 2 and the snowflake band of its
//! drawing, with the Ahlfors band of the measure against `r^Q`.
//!
//! ```bash
//! cargo run --release --example faces_snowflake
//! ```

use loewner_carpet::analysis::ahlfors_check;
use loewner_carpet::embedding::{draw_level, peripheral_faces, snowflake_stats, Drawing};
use loewner_carpet::planner::sequence_dims;
use loewner_carpet::rational::{int, ratio, to_f64};
use loewner_carpet::{apply_rule, build_seed, Rule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rules = [Rule::Basic; 2];
    let mut g = build_seed();
    let mut d = Drawing::from_graph(&g);
    for rule in rules {
        let step = apply_rule(&g, rule)?;
        d = draw_level(&step.graph, &step.ledger, &d, rule)?;
        g = step.graph;
    }
    let faces = peripheral_faces(&d, 500, 0)?;
    println!(
        "{} bounded faces, {} sampled pairs, min relative separation {:?}",
        faces.faces.len(),
        faces.pairs.len(),
        faces.min_separation
    );
    let snow = snowflake_stats(&g, &d, 2000, 8, 0.8, 0)?;
    println!("snowflake band {:.3} over {} pairs", snow.band_ratio, snow.count);
    let dims = sequence_dims(&rules)?;
    let mut radii = vec![g.s.clone()];
    while radii.last().unwrap() * int(2) <= ratio(1, 4) {
        radii.push(radii.last().unwrap() * int(2));
    }
    let ahl = ahlfors_check(&g, 200, &radii, |r| Some(to_f64(r).powf(dims.q)), 0)?;
    for band in &ahl.per_radius {
        println!("r = {:.5}: mu(B) / r^{:.2} in [{:.3}, {:.3}]", band.radius, dims.q, band.stats.min, band.stats.max);
    }
    println!("Ahlfors band {:.3}", ahl.overall.band_ratio);
    Ok(())
}
