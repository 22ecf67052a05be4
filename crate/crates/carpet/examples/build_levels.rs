//! Builds Basic levels 0..=2 into a run directory and lists the hashed files.
//!
//! ```bash
//! cargo run --release --example build_levels -- /tmp/basic_run
//! ```

use std::path::PathBuf;

use loewner_carpet::io::cmd_build;
use loewner_carpet::Rule;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "basic_run".to_string()).into();
    std::fs::create_dir_all(&out)?;
    let manifest = cmd_build(&[Rule::Basic, Rule::Basic], None, &out, 0)?;
    println!("{} levels in {}", manifest.levels, out.display());
    for (name, hash) in &manifest.files {
        println!("{name:24} {}", &hash[..16]);
    }
    Ok(())
}
