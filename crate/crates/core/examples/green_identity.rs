//! Assembles both formulations on a stratified bumpy basin, checks the
//! discrete Green identity and estimates the stable time steps.

use hydrosem::assembly::{assemble_potential, assemble_velocity, green_identity_residual, stable_dt, stable_dt_with};
use hydrosem::mesh::{build_mesh, DiscretizationSpec, DomainSpec, TopographySpec};
use hydrosem::stratification::{constant_n_profile, PhysicalConstants};

fn main() -> hydrosem::Result<()> {
    let domain = DomainSpec {
        x_min: 0.0,
        x_max: 8000.0,
        height: 1500.0,
        topography: TopographySpec::Bumps { b: 300.0, k_x: 3e-3, f_x: 5e-3, r_x: 3000.0, center: 4000.0 },
    };
    let mesh = build_mesh(&domain, &DiscretizationSpec { nx: 8, nz: 4, px: 6, pz: 6 })?;
    let profile = constant_n_profile(1025.0, 1500.0, 1e-2, 1500.0, &PhysicalConstants::default())?;
    let vel = assemble_velocity(&mesh, &profile);
    let pot = assemble_potential(&mesh, &profile);
    println!("{} nodes; K_U has {} nonzeros, K_φ {}", mesh.num_nodes(), vel.stiffness.nnz(), pot.stiffness_phi.nnz());
    println!("Green identity residual over 100 random pairs: {:.2e}", green_identity_residual(&vel, &pot, &mesh, 100, 1));
    let dt_u = stable_dt(&vel.mass, &vel.stiffness, 0.95)?;
    let dt_p = stable_dt_with(&pot.mass(), |x, y| pot.apply_stiffness(x, y), 0.95)?;
    println!("stable steps: velocity {dt_u:.4e} s, potential {dt_p:.4e} s");
    Ok(())
}
