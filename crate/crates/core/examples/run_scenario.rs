//! Runs a built-in scenario for a few steps into a directory, then checks
//! the manifest inventory.
//!
//! `cargo run --release --example run_scenario -- sim2 200 /tmp/sim2`

use std::path::PathBuf;

use hydrosem::scenario::{preset, run_scenario, Manifest, RunOptions};

fn main() -> hydrosem::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "sim2".into());
    let steps: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let dir = args.next().map_or_else(|| std::env::temp_dir().join(format!("hydrosem-{name}")), PathBuf::from);
    let report = run_scenario(&preset(&name)?, &RunOptions { out_dir: Some(dir.clone()), steps: Some(steps) })?;
    println!("{}: {} nodes, dt = {:.3e} s, {} steps", name, report.mesh.num_nodes(), report.dt, report.steps);
    let manifest = Manifest::read(&dir)?;
    for (file, digest) in &manifest.files {
        println!("  {file}  {}", &digest[..16]);
    }
    let problems = manifest.verify(&dir);
    println!("manifest check: {}", if problems.is_empty() { "ok".to_string() } else { problems.join("; ") });
    Ok(())
}
