//! Terrain-following structured spectral-element mesh.
//!
//! The domain `{(x, z) : z_b(x) ≤ z ≤ H}` is split into `Nx` uniform columns
//! and `Nz` sigma layers. Within a column the vertical coordinate of a GLL
//! node is `z_b(x) + (H - z_b(x))·σ`, with `z_b` sampled at the horizontal GLL
//! nodes, so elements are curved in `z` only.
//!
//! Global nodes live on a `(Nx·Px + 1) × (Nz·Pz + 1)` grid numbered row by
//! row from the seabed upward.

use std::path::Path;

use crate::basis::{diff_matrix, gll_rule, DiffMatrix, QuadratureRule1D, MAX_ORDER};
use crate::error::{Error, Result};

/// Seabed elevation `z_b(x)` above the reference level `z = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum TopographySpec {
    Flat,
    /// `z_b(x) = b (1 + sin(k_x (x - c))) · box(x - c)` where `box` is a
    /// sigmoid-smoothed indicator of `[-r_x/2, r_x/2]` with steepness `f_x`.
    Bumps {
        b: f64,
        k_x: f64,
        f_x: f64,
        r_x: f64,
        center: f64,
    },
    /// Piecewise-linear samples, constant outside the sampled range.
    Tabulated { x: Vec<f64>, z: Vec<f64> },
}

pub(crate) fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Smoothed indicator of `[-width/2, width/2]`.
pub(crate) fn smoothed_box(x: f64, steepness: f64, width: f64) -> f64 {
    sigmoid(steepness * (x + 0.5 * width)) - sigmoid(steepness * (x - 0.5 * width))
}

impl TopographySpec {
    pub fn height(&self, x: f64) -> f64 {
        match self {
            TopographySpec::Flat => 0.0,
            TopographySpec::Bumps {
                b,
                k_x,
                f_x,
                r_x,
                center,
            } => {
                let s = x - center;
                b * (1.0 + (k_x * s).sin()) * smoothed_box(s, *f_x, *r_x)
            }
            TopographySpec::Tabulated { x: xs, z: zs } => {
                if x <= xs[0] {
                    return zs[0];
                }
                let last = xs.len() - 1;
                if x >= xs[last] {
                    return zs[last];
                }
                let i = xs.partition_point(|&v| v <= x) - 1;
                let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
                zs[i] + t * (zs[i + 1] - zs[i])
            }
        }
    }

    /// Reads a two-column `x z_b` table (meters). Blank lines and `#`
    /// comments are skipped; `x` must be strictly increasing.
    pub fn read_table(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let (x, z) = read_two_columns(path, &text)?;
        let topo = TopographySpec::Tabulated { x, z };
        topo.validate()?;
        Ok(topo)
    }

    fn validate(&self) -> Result<()> {
        match self {
            TopographySpec::Flat => Ok(()),
            TopographySpec::Bumps { b, f_x, r_x, .. } => {
                if *b < 0.0 || *f_x <= 0.0 || *r_x <= 0.0 {
                    return Err(Error::Config(
                        "bump topography needs b ≥ 0, f_x > 0, r_x > 0".into(),
                    ));
                }
                Ok(())
            }
            TopographySpec::Tabulated { x, z } => {
                if x.len() < 2 || x.len() != z.len() {
                    return Err(Error::Config(
                        "tabulated topography needs at least two (x, z) samples".into(),
                    ));
                }
                if x.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config(
                        "tabulated topography x must be strictly increasing".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Parses whitespace- or comma-separated two-column numeric text.
pub(crate) fn read_two_columns(path: &Path, text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("not a number: {s:?}"),
            })
        };
        if cols.len() != 2 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("expected 2 columns, found {}", cols.len()),
            });
        }
        a.push(parse(cols[0])?);
        b.push(parse(cols[1])?);
    }
    Ok((a, b))
}

/// Horizontal extent, surface height and seabed of the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub x_min: f64,
    pub x_max: f64,
    /// Surface height `H` (m).
    pub height: f64,
    pub topography: TopographySpec,
}

/// Element counts and polynomial orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscretizationSpec {
    pub nx: usize,
    pub nz: usize,
    pub px: usize,
    pub pz: usize,
}

impl DiscretizationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.nz == 0 {
            return Err(Error::Config("Nx and Nz must be at least 1".into()));
        }
        for (name, p) in [("Px", self.px), ("Pz", self.pz)] {
            if !(1..=MAX_ORDER).contains(&p) {
                return Err(Error::Config(format!(
                    "{name} = {p} outside supported range 1..={MAX_ORDER}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-element metric terms at the element's GLL nodes.
///
/// With `x` affine in `ξ` and independent of `η`, the Jacobian matrix is
/// `[[x_ξ, 0], [z_ξ, z_η]]` and `J = x_ξ z_η`.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub z_xi: Vec<f64>,
    pub z_eta: Vec<f64>,
    pub jac: Vec<f64>,
}

/// Terrain-following mesh with boundary registries.
#[derive(Debug, Clone)]
pub struct Mesh {
    domain: DomainSpec,
    disc: DiscretizationSpec,
    rule_x: QuadratureRule1D,
    rule_z: QuadratureRule1D,
    diff_x: DiffMatrix,
    diff_z: DiffMatrix,
    element_width: f64,
    nodes_x: usize,
    nodes_z: usize,
    coords: Vec<[f64; 2]>,
    geometry: Vec<ElementGeometry>,
    surface: Vec<usize>,
    surface_weights: Vec<f64>,
    bottom: Vec<usize>,
    bottom_weights: Vec<f64>,
    bottom_normals: Vec<[f64; 2]>,
    bottom_slot: Vec<Option<usize>>,
}

/// Builds the mesh. Fails when the seabed reaches the surface anywhere.
pub fn build_mesh(domain: &DomainSpec, disc: &DiscretizationSpec) -> Result<Mesh> {
    disc.validate()?;
    domain.topography.validate()?;
    if !(domain.x_max > domain.x_min) {
        return Err(Error::Config("x_max must exceed x_min".into()));
    }
    if !(domain.height > 0.0) {
        return Err(Error::Config("surface height H must be positive".into()));
    }
    let rule_x = gll_rule(disc.px)?;
    let rule_z = gll_rule(disc.pz)?;
    let diff_x = diff_matrix(&rule_x);
    let diff_z = diff_matrix(&rule_z);
    let nodes_x = disc.nx * disc.px + 1;
    let nodes_z = disc.nz * disc.pz + 1;
    let h = (domain.x_max - domain.x_min) / disc.nx as f64;

    // horizontal node positions and seabed heights
    let mut xs = vec![0.0; nodes_x];
    for ex in 0..disc.nx {
        let x0 = domain.x_min + ex as f64 * h;
        for (a, xi) in rule_x.nodes().iter().enumerate() {
            xs[ex * disc.px + a] = x0 + 0.5 * h * (xi + 1.0);
        }
    }
    xs[nodes_x - 1] = domain.x_max;
    let zb: Vec<f64> = xs.iter().map(|&x| domain.topography.height(x)).collect();
    for (x, z) in xs.iter().zip(&zb) {
        if !(z.is_finite() && *z >= 0.0 && *z < domain.height) {
            return Err(Error::Config(format!(
                "degenerate topography: z_b({x:.3}) = {z:.3} must lie in [0, H = {})",
                domain.height
            )));
        }
    }

    let mut sigma = vec![0.0; nodes_z];
    for ez in 0..disc.nz {
        for (b, eta) in rule_z.nodes().iter().enumerate() {
            sigma[ez * disc.pz + b] = (ez as f64 + 0.5 * (eta + 1.0)) / disc.nz as f64;
        }
    }
    sigma[nodes_z - 1] = 1.0;

    let mut coords = Vec::with_capacity(nodes_x * nodes_z);
    for &s in &sigma {
        for (&x, &b) in xs.iter().zip(&zb) {
            let z = if s == 1.0 { domain.height } else { b + (domain.height - b) * s };
            coords.push([x, z]);
        }
    }

    let mut mesh = Mesh {
        domain: domain.clone(),
        disc: *disc,
        rule_x,
        rule_z,
        diff_x,
        diff_z,
        element_width: h,
        nodes_x,
        nodes_z,
        coords,
        geometry: Vec::with_capacity(disc.nx * disc.nz),
        surface: Vec::new(),
        surface_weights: Vec::new(),
        bottom: Vec::new(),
        bottom_weights: Vec::new(),
        bottom_normals: Vec::new(),
        bottom_slot: Vec::new(),
    };
    mesh.compute_geometry()?;
    mesh.compute_boundaries();
    Ok(mesh)
}

impl Mesh {
    fn compute_geometry(&mut self) -> Result<()> {
        let (npx, npz) = (self.disc.px + 1, self.disc.pz + 1);
        let x_xi = 0.5 * self.element_width;
        for e in 0..self.num_elements() {
            let mut z = vec![0.0; npx * npz];
            for b in 0..npz {
                for a in 0..npx {
                    z[b * npx + a] = self.coords[self.global_node(e, a, b)][1];
                }
            }
            let mut geo = ElementGeometry {
                z_xi: vec![0.0; npx * npz],
                z_eta: vec![0.0; npx * npz],
                jac: vec![0.0; npx * npz],
            };
            for b in 0..npz {
                for a in 0..npx {
                    let l = b * npx + a;
                    let dxi: f64 = (0..npx).map(|k| self.diff_x.get(a, k) * z[b * npx + k]).sum();
                    let deta: f64 = (0..npz).map(|k| self.diff_z.get(b, k) * z[k * npx + a]).sum();
                    geo.z_xi[l] = dxi;
                    geo.z_eta[l] = deta;
                    geo.jac[l] = x_xi * deta;
                    if geo.jac[l] <= 0.0 {
                        return Err(Error::Config(format!(
                            "non-positive Jacobian {:.3e} in element {e}",
                            geo.jac[l]
                        )));
                    }
                }
            }
            self.geometry.push(geo);
        }
        Ok(())
    }

    fn compute_boundaries(&mut self) {
        let (nx, px) = (self.disc.nx, self.disc.px);
        let npx = px + 1;
        let x_xi = 0.5 * self.element_width;
        let mut surf_w = vec![0.0; self.nodes_x];
        let mut bot_v = vec![[0.0f64; 2]; self.nodes_x];
        for ex in 0..nx {
            let bot = self.element_index(ex, 0);
            for a in 0..npx {
                let w = self.rule_x.weights()[a];
                surf_w[ex * px + a] += w * x_xi;
                // outward normal times arc length along η = -1
                let z_xi = self.geometry[bot].z_xi[a];
                bot_v[ex * px + a][0] += w * z_xi;
                bot_v[ex * px + a][1] -= w * x_xi;
            }
        }
        let top_row = (self.nodes_z - 1) * self.nodes_x;
        self.surface = (0..self.nodes_x).map(|i| top_row + i).collect();
        self.surface_weights = surf_w;
        self.bottom = (0..self.nodes_x).collect();
        self.bottom_slot = vec![None; self.num_nodes()];
        for (i, v) in bot_v.iter().enumerate() {
            let len = v[0].hypot(v[1]);
            self.bottom_weights.push(len);
            self.bottom_normals.push([v[0] / len, v[1] / len]);
            self.bottom_slot[i] = Some(i);
        }
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn discretization(&self) -> &DiscretizationSpec {
        &self.disc
    }

    pub fn rule_x(&self) -> &QuadratureRule1D {
        &self.rule_x
    }

    pub fn rule_z(&self) -> &QuadratureRule1D {
        &self.rule_z
    }

    pub fn diff_x(&self) -> &DiffMatrix {
        &self.diff_x
    }

    pub fn diff_z(&self) -> &DiffMatrix {
        &self.diff_z
    }

    /// `x_ξ`, identical for every element.
    pub fn x_xi(&self) -> f64 {
        0.5 * self.element_width
    }

    pub fn element_width(&self) -> f64 {
        self.element_width
    }

    pub fn num_elements(&self) -> usize {
        self.disc.nx * self.disc.nz
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes_x * self.nodes_z
    }

    /// Grid dimensions `(columns, rows)` of the global node lattice.
    pub fn grid_dims(&self) -> (usize, usize) {
        (self.nodes_x, self.nodes_z)
    }

    pub fn nodes_per_element(&self) -> usize {
        (self.disc.px + 1) * (self.disc.pz + 1)
    }

    #[inline]
    pub fn element_index(&self, ex: usize, ez: usize) -> usize {
        ez * self.disc.nx + ex
    }

    /// `(ex, ez)` of element `e`.
    #[inline]
    pub fn element_position(&self, e: usize) -> (usize, usize) {
        (e % self.disc.nx, e / self.disc.nx)
    }

    /// Global id of local node `(a, b)` of element `e`.
    #[inline]
    pub fn global_node(&self, e: usize, a: usize, b: usize) -> usize {
        let (ex, ez) = self.element_position(e);
        (ez * self.disc.pz + b) * self.nodes_x + ex * self.disc.px + a
    }

    /// Global ids of all nodes of element `e`, local order `b·(Px+1) + a`.
    pub fn element_nodes(&self, e: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes_per_element());
        for b in 0..=self.disc.pz {
            for a in 0..=self.disc.px {
                out.push(self.global_node(e, a, b));
            }
        }
        out
    }

    pub fn geometry(&self, e: usize) -> &ElementGeometry {
        &self.geometry[e]
    }

    /// Quadrature weight `w_a w_b J` of local node `l` in element `e`.
    #[inline]
    pub fn volume_weight(&self, e: usize, l: usize) -> f64 {
        let npx = self.disc.px + 1;
        self.rule_x.weights()[l % npx] * self.rule_z.weights()[l / npx] * self.geometry[e].jac[l]
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn node_coord(&self, node: usize) -> [f64; 2] {
        self.coords[node]
    }

    /// Surface registry (nodes at `z = H`), left to right.
    pub fn surface_nodes(&self) -> &[usize] {
        &self.surface
    }

    /// Assembled 1D quadrature weights along the surface.
    pub fn surface_weights(&self) -> &[f64] {
        &self.surface_weights
    }

    /// Seabed registry (nodes at `z = z_b(x)`), left to right.
    pub fn bottom_nodes(&self) -> &[usize] {
        &self.bottom
    }

    /// Assembled arc-length quadrature weights along the seabed.
    pub fn bottom_weights(&self) -> &[f64] {
        &self.bottom_weights
    }

    pub fn bottom_normals(&self) -> &[[f64; 2]] {
        &self.bottom_normals
    }

    /// Position of `node` in the seabed registry, if it is a seabed node.
    pub fn bottom_slot(&self, node: usize) -> Option<usize> {
        self.bottom_slot[node]
    }

    /// Nodes on the left and right vertical boundaries.
    pub fn lateral_nodes(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.nodes_z);
        for j in 0..self.nodes_z {
            out.push(j * self.nodes_x);
            out.push(j * self.nodes_x + self.nodes_x - 1);
        }
        out
    }

    /// Outward unit normal at a seabed node.
    pub fn boundary_normal(&self, node: usize) -> Result<[f64; 2]> {
        boundary_normal(self, node)
    }

    /// Interpolated seabed height inside column `ex` at reference `ξ`.
    fn seabed_in_column(&self, ex: usize, xi: f64) -> f64 {
        let l = self.rule_x.lagrange_at(xi);
        (0..=self.disc.px)
            .map(|a| l[a] * self.coords[ex * self.disc.px + a][1])
            .sum()
    }

    /// Locates a physical point: returns `(element, ξ, η)`.
    pub fn locate(&self, x: f64, z: f64) -> Result<(usize, f64, f64)> {
        let d = &self.domain;
        let tol = 1e-9 * (d.x_max - d.x_min);
        if x < d.x_min - tol || x > d.x_max + tol {
            return Err(Error::Config(format!(
                "point x = {x} outside [{}, {}]",
                d.x_min, d.x_max
            )));
        }
        let s = ((x - d.x_min) / self.element_width).max(0.0);
        let ex = (s.floor() as usize).min(self.disc.nx - 1);
        let xi = (2.0 * (s - ex as f64) - 1.0).clamp(-1.0, 1.0);
        let zb = self.seabed_in_column(ex, xi);
        let sigma = (z - zb) / (d.height - zb);
        let ztol = 1e-9;
        if !(-ztol..=1.0 + ztol).contains(&sigma) {
            return Err(Error::Config(format!(
                "point ({x}, {z}) lies outside the water column [{zb:.3}, {}]",
                d.height
            )));
        }
        let t = sigma.clamp(0.0, 1.0) * self.disc.nz as f64;
        let ez = (t.floor() as usize).min(self.disc.nz - 1);
        let eta = (2.0 * (t - ez as f64) - 1.0).clamp(-1.0, 1.0);
        Ok((self.element_index(ex, ez), xi, eta))
    }

    /// Exact area of the discrete domain, `Σ w J`.
    pub fn discrete_area(&self) -> f64 {
        (0..self.num_elements())
            .map(|e| (0..self.nodes_per_element()).map(|l| self.volume_weight(e, l)).sum::<f64>())
            .sum()
    }
}

/// Outward unit normal `n_b` at a seabed node. Flat seabed gives `(0, -1)`.
pub fn boundary_normal(mesh: &Mesh, node: usize) -> Result<[f64; 2]> {
    match mesh.bottom_slot.get(node).copied().flatten() {
        Some(k) => Ok(mesh.bottom_normals[k]),
        None => Err(Error::Precondition(format!(
            "node {node} is not on the seabed boundary"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn flat(width: f64, height: f64) -> DomainSpec {
        DomainSpec {
            x_min: 0.0,
            x_max: width,
            height,
            topography: TopographySpec::Flat,
        }
    }

    #[test]
    fn two_linear_elements() {
        let m = build_mesh(&flat(2.0, 1.0), &DiscretizationSpec { nx: 2, nz: 1, px: 1, pz: 1 }).unwrap();
        assert_eq!(m.num_elements(), 2);
        assert_eq!(m.num_nodes(), 6);
        assert_eq!(m.discrete_area(), 2.0);
    }

    #[test]
    fn node_count_formula() {
        let d = DiscretizationSpec { nx: 1051, nz: 10, px: 4, pz: 5 };
        let m = build_mesh(&flat(101_000.0, 1500.0), &d).unwrap();
        assert_eq!(m.num_nodes(), (1051 * 4 + 1) * (10 * 5 + 1));
        assert_abs_diff_eq!(m.discrete_area(), 101_000.0 * 1500.0, epsilon = 1e-8 * 1.515e8);
    }

    #[test]
    fn table_bumps_keep_positive_jacobian() {
        let domain = DomainSpec {
            x_min: 0.0,
            x_max: 15_000.0,
            height: 1500.0,
            topography: TopographySpec::Bumps {
                b: 300.0,
                k_x: 0.03,
                f_x: 0.07,
                r_x: 1500.0,
                center: 7500.0,
            },
        };
        let m = build_mesh(&domain, &DiscretizationSpec { nx: 100, nz: 10, px: 4, pz: 4 }).unwrap();
        let min_j = (0..m.num_elements())
            .flat_map(|e| m.geometry(e).jac.clone())
            .fold(f64::INFINITY, f64::min);
        assert!(min_j > 0.0);
    }

    #[test]
    fn degenerate_topography_rejected() {
        let domain = DomainSpec {
            x_min: 0.0,
            x_max: 10.0,
            height: 1.0,
            topography: TopographySpec::Tabulated { x: vec![0.0, 10.0], z: vec![0.5, 1.5] },
        };
        let err = build_mesh(&domain, &DiscretizationSpec { nx: 2, nz: 1, px: 2, pz: 2 }).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn normals() {
        let m = build_mesh(&flat(10.0, 1.0), &DiscretizationSpec { nx: 3, nz: 2, px: 3, pz: 2 }).unwrap();
        for &n in m.bottom_nodes() {
            let nb = boundary_normal(&m, n).unwrap();
            assert_abs_diff_eq!(nb[0], 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(nb[1], -1.0, epsilon = 1e-14);
        }
        let top = m.surface_nodes()[0];
        assert!(matches!(boundary_normal(&m, top), Err(Error::Precondition(_))));

        // z_b = x on [0, 500], flat outside
        let slope = DomainSpec {
            x_min: -1000.0,
            x_max: 1500.0,
            height: 2000.0,
            topography: TopographySpec::Tabulated { x: vec![0.0, 500.0], z: vec![0.0, 500.0] },
        };
        let m = build_mesh(&slope, &DiscretizationSpec { nx: 5, nz: 2, px: 4, pz: 2 }).unwrap();
        let node = m
            .bottom_nodes()
            .iter()
            .copied()
            .find(|&n| (m.node_coord(n)[0] - 250.0).abs() < 1e-9)
            .unwrap();
        let nb = m.boundary_normal(node).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(nb[0], s, epsilon = 1e-12);
        assert_abs_diff_eq!(nb[1], -s, epsilon = 1e-12);
        for &n in m.bottom_nodes() {
            let v = m.boundary_normal(n).unwrap();
            assert_abs_diff_eq!(v[0].hypot(v[1]), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn boundary_coordinates() {
        let domain = DomainSpec {
            x_min: 0.0,
            x_max: 15_000.0,
            height: 1500.0,
            topography: TopographySpec::Bumps { b: 300.0, k_x: 0.003, f_x: 0.01, r_x: 3000.0, center: 7500.0 },
        };
        let m = build_mesh(&domain, &DiscretizationSpec { nx: 30, nz: 4, px: 5, pz: 3 }).unwrap();
        for &n in m.surface_nodes() {
            assert_eq!(m.node_coord(n)[1], 1500.0);
        }
        for &n in m.bottom_nodes() {
            let [x, z] = m.node_coord(n);
            assert_abs_diff_eq!(z, domain.topography.height(x), epsilon = 1e-10);
        }
        assert!(m
            .surface_nodes()
            .iter()
            .all(|s| m.bottom_slot(*s).is_none()));
    }

    #[test]
    fn locate_round_trips_nodes() {
        let domain = DomainSpec {
            x_min: 0.0,
            x_max: 15_000.0,
            height: 1500.0,
            topography: TopographySpec::Bumps { b: 300.0, k_x: 0.001, f_x: 0.005, r_x: 4000.0, center: 7500.0 },
        };
        let m = build_mesh(&domain, &DiscretizationSpec { nx: 10, nz: 3, px: 4, pz: 3 }).unwrap();
        let e = m.element_index(4, 1);
        let node = m.global_node(e, 2, 1);
        let [x, z] = m.node_coord(node);
        let (e2, xi, eta) = m.locate(x, z).unwrap();
        assert_eq!(e2, e);
        assert_abs_diff_eq!(xi, m.rule_x().nodes()[2], epsilon = 1e-10);
        assert_abs_diff_eq!(eta, m.rule_z().nodes()[1], epsilon = 1e-9);
        assert!(m.locate(-5.0, 100.0).is_err());
        assert!(m.locate(100.0, 1600.0).is_err());
    }
}
