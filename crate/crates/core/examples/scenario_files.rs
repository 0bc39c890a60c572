//! Run a bundled scenario file and list the artifacts it writes.

use std::path::Path;

use memnet::scenario::{run_scenario, ScenarioConfig};

fn main() -> memnet::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/grid_shortest_path.toml").into());
    let cfg = ScenarioConfig::load(Path::new(&path))?;
    let out = std::env::temp_dir().join("memnet-example").join(&cfg.name);
    let summary = run_scenario(&cfg, &out)?;
    print!("{}", summary.to_text());
    for f in &summary.files {
        println!("  {}", out.join(f).display());
    }
    Ok(())
}
