//! Terrain-following mesh over a bumpy seabed: node counts, discrete area
//! and seabed normals.

use hydrosem::mesh::{build_mesh, DiscretizationSpec, DomainSpec, TopographySpec};

fn main() -> hydrosem::Result<()> {
    let domain = DomainSpec {
        x_min: 0.0,
        x_max: 15_000.0,
        height: 1500.0,
        topography: TopographySpec::Bumps { b: 300.0, k_x: 3e-3, f_x: 5e-3, r_x: 3000.0, center: 7500.0 },
    };
    let disc = DiscretizationSpec { nx: 100, nz: 10, px: 4, pz: 4 };
    let mesh = build_mesh(&domain, &disc)?;
    let (gx, gz) = mesh.grid_dims();
    println!("{} elements, {} nodes ({gx} × {gz} grid)", mesh.num_elements(), mesh.num_nodes());
    let seabed: f64 = (0..=1500).map(|k| domain.topography.height(k as f64 * 10.0)).sum::<f64>() * 10.0
        - 0.5 * 10.0 * (domain.topography.height(0.0) + domain.topography.height(15_000.0));
    println!("discrete area {:.6e} m², trapezoid estimate {:.6e} m²", mesh.discrete_area(), 15_000.0 * 1500.0 - seabed);
    println!("seabed normals near the bumps:");
    for &node in mesh.bottom_nodes().iter().filter(|&&n| (mesh.node_coord(n)[0] - 7500.0).abs() < 1000.0) {
        let [x, z] = mesh.node_coord(node);
        let n = mesh.boundary_normal(node)?;
        println!("  x = {x:8.2} m  z_b = {z:7.2} m  n = ({:+.4}, {:+.4})", n[0], n[1]);
    }
    Ok(())
}
