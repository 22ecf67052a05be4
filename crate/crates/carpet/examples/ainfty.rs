//! Rasterizes Basic level 2, writes it as PGM and prints the strong-A-infinity
//! bands for the flat weight and for `dist^beta`.
//!
//! ```bash
//! cargo run --release --example ainfty -- /tmp/level2.pgm
//! ```

use loewner_carpet::analysis::{euclidean_band, pullback_band, AinftyField, Raster, AMBIENT_DIMENSION};
use loewner_carpet::embedding::{draw_level, Drawing};
use loewner_carpet::{apply_rule, build_seed, Rule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut g = build_seed();
    let mut d = Drawing::from_graph(&g);
    for _ in 0..2 {
        let step = apply_rule(&g, Rule::Basic)?;
        d = draw_level(&step.graph, &step.ledger, &d, Rule::Basic)?;
        g = step.graph;
    }
    let raster = Raster::from_drawing(&d, 256)?;
    if let Some(path) = std::env::args().nth(1) {
        raster.write_pgm(path.as_ref())?;
    }
    for beta in [0.0, AinftyField::default_beta(0.8, AMBIENT_DIMENSION)] {
        let field = AinftyField::new(raster.clone(), beta, AMBIENT_DIMENSION)?;
        let flat = euclidean_band(&field, 10, 10, 1)?;
        let pulled = pullback_band(&g, &d, &field, 10, 10, 1)?;
        println!("beta {beta:.2}: euclidean band {:.3}, pullback band {:.3}", flat.band_ratio, pulled.band_ratio);
    }
    Ok(())
}
