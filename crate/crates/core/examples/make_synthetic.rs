//! Regenerates the bundled example dataset:
//! `cargo run -p benchpipe-core --example make_synthetic -- crates/core/data`

use std::path::PathBuf;

use benchpipe::chemio::write_extxyz;
use benchpipe::synth::example_dataset;

fn main() -> benchpipe::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir)?;
    let d = example_dataset();
    std::fs::write(dir.join(&d.meta.source_path), write_extxyz(&d.structures))?;
    std::fs::write(dir.join("synthetic_meta.json"), d.meta.to_json_string())?;
    println!("wrote {} structures to {}", d.len(), dir.display());
    Ok(())
}
