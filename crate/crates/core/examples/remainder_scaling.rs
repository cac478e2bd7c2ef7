//! Peak of the remainder velocity `U_r = N(ψ + (N/g)φ)` for two buoyancy
//! frequencies: it grows with `N²`.

use hydrosem::scenario::config::StratificationConfig;
use hydrosem::scenario::{preset, run_scenario, RunOptions};
use hydrosem::solver::Formulation;

fn main() -> hydrosem::Result<()> {
    let mut peaks = Vec::new();
    for n in [1e-3, 1e-2] {
        let mut cfg = preset("sim2")?;
        cfg.discretization.nx = 50;
        cfg.discretization.nz = 5;
        cfg.discretization.px = 4;
        cfg.discretization.pz = 4;
        if let StratificationConfig::ConstantN { n: value, .. } = &mut cfg.stratification {
            *value = n;
        }
        let report = run_scenario(&cfg, &RunOptions::default())?;
        let summary = report.run(Formulation::Potential).and_then(|r| r.remainder.clone()).unwrap_or_default();
        let peak = summary.peak.iter().fold(0.0f64, |m, v| m.max(*v));
        println!("N = {n:e} 1/s: peak |U_r| = {peak:.4e} m/s");
        peaks.push(peak);
    }
    println!("ratio {:.1} (N² ratio 100)", peaks[1] / peaks[0]);
    Ok(())
}
