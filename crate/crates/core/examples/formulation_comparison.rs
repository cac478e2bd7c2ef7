//! Runs a small earthquake scenario under both formulations on the same
//! mesh and compares the surface displacement.

use hydrosem::scenario::{preset, run_scenario, FormulationChoice, RunOptions};
use hydrosem::solver::LateralBoundary;

fn main() -> hydrosem::Result<()> {
    let mut cfg = preset("sim1")?;
    cfg.domain.x_min = 0.0;
    cfg.domain.x_max = 30_000.0;
    cfg.discretization.nx = 20;
    cfg.discretization.nz = 6;
    cfg.discretization.px = 3;
    cfg.discretization.pz = 3;
    cfg.run.t_end = 50.0;
    cfg.run.formulation = FormulationChoice::Both;
    cfg.run.lateral = LateralBoundary::Rigid;
    cfg.output.surface_points = vec![5000.0, 15_000.0, 25_000.0];
    cfg.output.record_every = 1;
    let report = run_scenario(&cfg, &RunOptions::default())?;
    println!("{} nodes, dt = {:.3e} s, {} steps", report.mesh.num_nodes(), report.dt, report.steps);
    for c in &report.comparison {
        println!("x = {:6.0} m: peak η {:.4} m, max |Δη| {:.3e} m ({:.2e} relative)", c.x, c.peak, c.max_abs_diff, c.relative);
    }
    Ok(())
}
