//! Discrete operators of the velocity and potential formulations.
//!
//! Both systems are built from the same two element-level ingredients,
//! evaluated at GLL nodes:
//!
//! * the gradient `∇_h φ`, through the inverse of the element Jacobian;
//! * the compressible divergence `a = ρ0⁻¹ div_h(ρ0 U) + (N²/g) U_z`, with
//!   `div_h` taken in conservative (contravariant flux) form.
//!
//! With collocated GLL quadrature these two are exact adjoints up to the
//! seabed term, so the discrete Green identity
//! `(G̃U, Φ)_𝓖 = (U, G*Φ)_𝓗 + ⟨ρ0 U·n_b, φ⟩_{Γ_b}` holds to round-off.
//! Vector DoFs are component-blocked: `[U_x(0..n), U_z(0..n)]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::sparse::CsrMatrix;
use crate::stratification::StratificationProfile;

/// Background coefficients sampled at global nodes.
#[derive(Debug, Clone)]
pub struct NodalCoefficients {
    pub rho: Vec<f64>,
    pub c2: Vec<f64>,
    pub n2: Vec<f64>,
    pub n: Vec<f64>,
    pub g: f64,
}

impl NodalCoefficients {
    pub fn sample(mesh: &Mesh, profile: &StratificationProfile) -> Self {
        let mut out = Self {
            rho: Vec::with_capacity(mesh.num_nodes()),
            c2: Vec::with_capacity(mesh.num_nodes()),
            n2: Vec::with_capacity(mesh.num_nodes()),
            n: Vec::with_capacity(mesh.num_nodes()),
            g: profile.constants().g,
        };
        for &[_, z] in mesh.coords() {
            let (rho, c, n2) = profile.at(z);
            out.rho.push(rho);
            out.c2.push(c * c);
            out.n2.push(n2);
            out.n.push(n2.sqrt());
        }
        out
    }
}

/// Dense element operators, row `l` giving the value at local node `l`.
pub struct ElementOperators {
    pub nodes: Vec<usize>,
    /// `w_a w_b J` per local node.
    pub weights: Vec<f64>,
    /// `∂_x`, `∂_z` as `nloc × nloc` row-major matrices.
    pub grad_x: Vec<f64>,
    pub grad_z: Vec<f64>,
}

/// Gradient operators and quadrature weights of element `e`.
pub fn element_operators(mesh: &Mesh, e: usize) -> ElementOperators {
    let (px, pz) = (mesh.discretization().px, mesh.discretization().pz);
    let (npx, npz) = (px + 1, pz + 1);
    let nloc = npx * npz;
    let geo = mesh.geometry(e);
    let x_xi = mesh.x_xi();
    let (dx, dz) = (mesh.diff_x(), mesh.diff_z());
    let mut grad_x = vec![0.0; nloc * nloc];
    let mut grad_z = vec![0.0; nloc * nloc];
    for b in 0..npz {
        for a in 0..npx {
            let l = b * npx + a;
            let j = geo.jac[l];
            let row = l * nloc;
            for k in 0..npx {
                grad_x[row + b * npx + k] += geo.z_eta[l] * dx.get(a, k) / j;
            }
            for k in 0..npz {
                let d = dz.get(b, k) / j;
                grad_x[row + k * npx + a] -= geo.z_xi[l] * d;
                grad_z[row + k * npx + a] += x_xi * d;
            }
        }
    }
    ElementOperators {
        nodes: mesh.element_nodes(e),
        weights: (0..nloc).map(|l| mesh.volume_weight(e, l)).collect(),
        grad_x,
        grad_z,
    }
}

/// Compressible divergence `a = ρ0⁻¹ div_h(ρ0 U) + (N²/g) U_z` of element
/// `e` as two `nloc × nloc` matrices acting on local `U_x`, `U_z`.
pub fn element_divergence(mesh: &Mesh, coef: &NodalCoefficients, e: usize) -> (Vec<f64>, Vec<f64>) {
    let (px, pz) = (mesh.discretization().px, mesh.discretization().pz);
    let (npx, npz) = (px + 1, pz + 1);
    let nloc = npx * npz;
    let geo = mesh.geometry(e);
    let x_xi = mesh.x_xi();
    let nodes = mesh.element_nodes(e);
    let rho: Vec<f64> = nodes.iter().map(|&i| coef.rho[i]).collect();
    let (dx, dz) = (mesh.diff_x(), mesh.diff_z());
    let mut ax = vec![0.0; nloc * nloc];
    let mut az = vec![0.0; nloc * nloc];
    for b in 0..npz {
        for a in 0..npx {
            let l = b * npx + a;
            let s = 1.0 / (geo.jac[l] * rho[l]);
            let row = l * nloc;
            // ∂_ξ (z_η ρ0 U_x)
            for k in 0..npx {
                let m = b * npx + k;
                ax[row + m] += dx.get(a, k) * geo.z_eta[m] * rho[m] * s;
            }
            // ∂_η (-z_ξ ρ0 U_x + x_ξ ρ0 U_z)
            for k in 0..npz {
                let m = k * npx + a;
                let d = dz.get(b, k) * rho[m] * s;
                ax[row + m] -= d * geo.z_xi[m];
                az[row + m] += d * x_xi;
            }
            az[row + l] += coef.n2[nodes[l]] / coef.g;
        }
    }
    (ax, az)
}

/// Velocity-formulation matrices.
#[derive(Debug, Clone)]
pub struct AssembledVelocitySystem {
    /// Diagonal of `M_U` over the `2n` vector DoFs.
    pub mass: Vec<f64>,
    pub stiffness: CsrMatrix,
    /// `C_h`: `2n × n_b`, column `k` is `w_k n_b` at seabed node `k`.
    pub constraint: CsrMatrix,
    /// Seabed nodes in multiplier order.
    pub bottom_nodes: Vec<usize>,
    /// `ρ0 w` at seabed nodes.
    pub boundary_mass: Vec<f64>,
    pub coefficients: NodalCoefficients,
    pub num_nodes: usize,
}

impl AssembledVelocitySystem {
    pub fn num_dofs(&self) -> usize {
        2 * self.num_nodes
    }

    /// Diagonal of `C_hᵀ C_h`.
    pub fn constraint_gram(&self) -> Vec<f64> {
        (0..self.constraint.ncols())
            .map(|k| {
                let i = self.bottom_nodes[k];
                let cx = self.constraint.get(i, k);
                let cz = self.constraint.get(self.num_nodes + i, k);
                cx * cx + cz * cz
            })
            .collect()
    }
}

fn element_pattern(mesh: &Mesh, blocks: usize) -> Vec<Vec<usize>> {
    let n = mesh.num_nodes();
    let mut rows = vec![Vec::new(); blocks * n];
    for e in 0..mesh.num_elements() {
        let nodes = mesh.element_nodes(e);
        let cols: Vec<usize> = (0..blocks).flat_map(|b| nodes.iter().map(move |&i| b * n + i)).collect();
        for &r in &cols {
            rows[r].extend_from_slice(&cols);
        }
    }
    rows
}

/// Assembles `M_U`, `K_U`, `C_h` and the seabed mass.
pub fn assemble_velocity(mesh: &Mesh, profile: &StratificationProfile) -> AssembledVelocitySystem {
    let coef = NodalCoefficients::sample(mesh, profile);
    let n = mesh.num_nodes();
    let nloc = mesh.nodes_per_element();
    let mut mass = vec![0.0; 2 * n];
    let mut k = CsrMatrix::from_pattern(2 * n, 2 * n, element_pattern(mesh, 2));
    let mut rows: Vec<(usize, f64)> = Vec::with_capacity(2 * nloc);
    for e in 0..mesh.num_elements() {
        let nodes = mesh.element_nodes(e);
        let (ax, az) = element_divergence(mesh, &coef, e);
        for l in 0..nloc {
            let i = nodes[l];
            let w = mesh.volume_weight(e, l);
            mass[i] += w * coef.rho[i];
            mass[n + i] += w * coef.rho[i];
            let scale = w * coef.rho[i] * coef.c2[i];
            rows.clear();
            for m in 0..nloc {
                let (vx, vz) = (ax[l * nloc + m], az[l * nloc + m]);
                if vx != 0.0 {
                    rows.push((nodes[m], vx));
                }
                if vz != 0.0 {
                    rows.push((n + nodes[m], vz));
                }
            }
            for &(r, vr) in &rows {
                for &(c, vc) in &rows {
                    k.add(r, c, scale * vr * vc);
                }
            }
            k.add(n + i, n + i, w * coef.rho[i] * coef.n2[i]);
        }
    }
    for (&i, &ws) in mesh.surface_nodes().iter().zip(mesh.surface_weights()) {
        k.add(n + i, n + i, ws * coef.rho[i] * coef.g);
    }
    k.prune();

    let bottom_nodes = mesh.bottom_nodes().to_vec();
    let mut trip = Vec::with_capacity(2 * bottom_nodes.len());
    let mut boundary_mass = Vec::with_capacity(bottom_nodes.len());
    for (slot, &i) in bottom_nodes.iter().enumerate() {
        let ws = mesh.bottom_weights()[slot];
        let nb = mesh.bottom_normals()[slot];
        trip.push((i, slot, ws * nb[0]));
        trip.push((n + i, slot, ws * nb[1]));
        boundary_mass.push(coef.rho[i] * ws);
    }
    let mut constraint = CsrMatrix::from_triplets(2 * n, bottom_nodes.len(), &trip);
    constraint.prune();
    AssembledVelocitySystem {
        mass,
        stiffness: k,
        constraint,
        bottom_nodes,
        boundary_mass,
        coefficients: coef,
        num_nodes: n,
    }
}

/// Potential-formulation matrices.
#[derive(Debug, Clone)]
pub struct AssembledPotentialSystem {
    pub mass_phi: Vec<f64>,
    pub mass_psi: Vec<f64>,
    pub stiffness_phi: CsrMatrix,
    /// Diagonal of `K_ψ`.
    pub stiffness_psi: Vec<f64>,
    /// `C_ψφ`: rows test `φ̃`, columns `ψ`.
    pub coupling: CsrMatrix,
    /// `ρ0 w` at seabed nodes (forcing enters as `-M_b u_b`).
    pub boundary_mass: Vec<f64>,
    pub bottom_nodes: Vec<usize>,
    /// Diagonal of `M_U` (`2n`).
    pub mass_u: Vec<f64>,
    pub recover_phi: CsrMatrix,
    pub recover_psi: CsrMatrix,
    pub coefficients: NodalCoefficients,
    pub num_nodes: usize,
}

impl AssembledPotentialSystem {
    /// `K Φ` for the block system `[[K_φ, C], [Cᵀ, K_ψ]]`, `Φ = [φ, ψ]`.
    pub fn apply_stiffness(&self, x: &[f64], y: &mut [f64]) {
        let n = self.num_nodes;
        let (phi, psi) = x.split_at(n);
        let (yphi, ypsi) = y.split_at_mut(n);
        self.stiffness_phi.mul_vec_into(phi, yphi);
        let cpsi = self.coupling.mul_vec(psi);
        for (a, b) in yphi.iter_mut().zip(&cpsi) {
            *a += b;
        }
        let ctphi = self.coupling.mul_vec_transpose(phi);
        for ((out, ct), (k, p)) in ypsi.iter_mut().zip(&ctphi).zip(self.stiffness_psi.iter().zip(psi)) {
            *out = ct + k * p;
        }
    }

    /// Block mass diagonal `[M_φ, M_ψ]`.
    pub fn mass(&self) -> Vec<f64> {
        self.mass_phi.iter().chain(&self.mass_psi).copied().collect()
    }

    /// `U = M_U⁻¹ (B_φ φ + B_ψ ψ)`.
    pub fn recover_velocity(&self, phi: &[f64], psi: &[f64]) -> Vec<f64> {
        let mut u = self.recover_phi.mul_vec(phi);
        let v = self.recover_psi.mul_vec(psi);
        for ((ui, vi), m) in u.iter_mut().zip(&v).zip(&self.mass_u) {
            *ui = (*ui + vi) / m;
        }
        u
    }
}

/// Assembles all matrices of the potential formulation.
pub fn assemble_potential(mesh: &Mesh, profile: &StratificationProfile) -> AssembledPotentialSystem {
    let coef = NodalCoefficients::sample(mesh, profile);
    let n = mesh.num_nodes();
    let nloc = mesh.nodes_per_element();
    let g = coef.g;
    let mut mass_phi = vec![0.0; n];
    let mut mass_psi = vec![0.0; n];
    let mut mass_u = vec![0.0; 2 * n];
    let mut k_psi = vec![0.0; n];
    let pattern = element_pattern(mesh, 1);
    let mut k_phi = CsrMatrix::from_pattern(n, n, pattern.clone());
    let mut coupling = CsrMatrix::from_pattern(n, n, pattern.clone());
    let mut b_phi = CsrMatrix::from_pattern(
        2 * n,
        n,
        pattern.iter().chain(pattern.iter()).cloned().collect(),
    );
    let mut b_psi_trip = Vec::with_capacity(n);
    // G*φ = (-∂xφ, -(∂zφ - N²/g φ)); rows hold (col, value) of both components
    let mut rx: Vec<(usize, f64)> = Vec::with_capacity(nloc);
    let mut rz: Vec<(usize, f64)> = Vec::with_capacity(nloc);
    for e in 0..mesh.num_elements() {
        let ops = element_operators(mesh, e);
        for l in 0..nloc {
            let i = ops.nodes[l];
            let w = ops.weights[l];
            let (rho, n2, nn) = (coef.rho[i], coef.n2[i], coef.n[i]);
            let wr = w * rho;
            mass_phi[i] += wr / coef.c2[i];
            mass_psi[i] += wr;
            mass_u[i] += wr;
            mass_u[n + i] += wr;
            k_psi[i] += wr * n2;
            b_psi_trip.push((n + i, i, wr * nn));
            rx.clear();
            rz.clear();
            for m in 0..nloc {
                let gx = ops.grad_x[l * nloc + m];
                let mut gz = ops.grad_z[l * nloc + m];
                if m == l {
                    gz -= n2 / g;
                }
                if gx != 0.0 {
                    rx.push((ops.nodes[m], gx));
                }
                if gz != 0.0 {
                    rz.push((ops.nodes[m], gz));
                }
            }
            for &(r, vr) in &rx {
                for &(c, vc) in &rx {
                    k_phi.add(r, c, wr * vr * vc);
                }
                b_phi.add(i, r, -wr * vr);
            }
            for &(r, vr) in &rz {
                for &(c, vc) in &rz {
                    k_phi.add(r, c, wr * vr * vc);
                }
                b_phi.add(n + i, r, -wr * vr);
                coupling.add(r, i, -wr * nn * vr);
            }
        }
    }
    for (&i, &ws) in mesh.surface_nodes().iter().zip(mesh.surface_weights()) {
        mass_phi[i] += ws * coef.rho[i] / g;
    }
    k_phi.prune();
    coupling.prune();
    b_phi.prune();
    let mut recover_psi = CsrMatrix::from_triplets(2 * n, n, &b_psi_trip);
    recover_psi.prune();
    let bottom_nodes = mesh.bottom_nodes().to_vec();
    let boundary_mass = bottom_nodes
        .iter()
        .zip(mesh.bottom_weights())
        .map(|(&i, &ws)| coef.rho[i] * ws)
        .collect();
    AssembledPotentialSystem {
        mass_phi,
        mass_psi,
        stiffness_phi: k_phi,
        stiffness_psi: k_psi,
        coupling,
        boundary_mass,
        bottom_nodes,
        mass_u,
        recover_phi: b_phi,
        recover_psi,
        coefficients: coef,
        num_nodes: n,
    }
}

/// Largest eigenvalue of `M⁻¹K` by power iteration on `M^{-1/2} K M^{-1/2}`
/// and the resulting leapfrog step `safety · 2/√λ_max`.
pub fn stable_dt_with(
    mass: &[f64],
    apply_k: impl Fn(&[f64], &mut [f64]),
    safety: f64,
) -> Result<f64> {
    const TOL: f64 = 1e-4;
    const MAX_ITER: usize = 500;
    if !(safety > 0.0 && safety < 1.0) {
        return Err(Error::Config(format!("safety factor {safety} must lie in (0, 1)")));
    }
    if mass.iter().any(|m| !(*m > 0.0)) {
        return Err(Error::Precondition("mass matrix must be positive diagonal".into()));
    }
    let n = mass.len();
    let inv_sqrt: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = norm(&v);
    v.iter_mut().for_each(|a| *a /= nv);
    let mut tmp = vec![0.0; n];
    let mut kv = vec![0.0; n];
    let mut lambda = 0.0;
    for it in 0..MAX_ITER {
        for i in 0..n {
            tmp[i] = v[i] * inv_sqrt[i];
        }
        apply_k(&tmp, &mut kv);
        for i in 0..n {
            kv[i] *= inv_sqrt[i];
        }
        let rayleigh: f64 = kv.iter().zip(&v).map(|(a, b)| a * b).sum();
        let nk = norm(&kv);
        if nk == 0.0 {
            return Err(Error::Config(
                "stiffness annihilates the iterate: no oscillation, the stable step is unbounded".into(),
            ));
        }
        if it > 0 && (rayleigh - lambda).abs() <= TOL * rayleigh.abs() {
            return Ok(safety * 2.0 / rayleigh.sqrt());
        }
        lambda = rayleigh;
        for i in 0..n {
            v[i] = kv[i] / nk;
        }
    }
    Err(Error::Numeric(format!(
        "power iteration did not converge in {MAX_ITER} iterations (last λ estimate {lambda:.6e})"
    )))
}

/// [`stable_dt_with`] for an explicit sparse stiffness.
pub fn stable_dt(mass: &[f64], stiffness: &CsrMatrix, safety: f64) -> Result<f64> {
    stable_dt_with(mass, |x, y| stiffness.mul_vec_into(x, y), safety)
}

/// Both sides of the discrete Green identity for given `U` and `Φ = (φ, ψ)`.
#[derive(Debug, Clone, Copy)]
pub struct GreenTerms {
    /// `(G̃U, Φ)_𝓖`, evaluated element by element.
    pub lhs: f64,
    /// `(U, G*Φ)_𝓗`, from the assembled recovery matrices.
    pub volume: f64,
    /// `⟨ρ0 U·n_b, φ⟩` on the seabed, from `C_h`.
    pub boundary: f64,
    /// `‖G̃U‖_𝓖‖Φ‖_𝓖 + ‖U‖_𝓗‖G*Φ‖_𝓗 + ‖U·n_b‖‖φ‖_{Γ_b}`.
    pub scale: f64,
}

impl GreenTerms {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.volume - self.boundary).abs() / self.scale.max(f64::MIN_POSITIVE)
    }
}

/// Evaluates the Green identity terms. `u` is component-blocked (`2n`).
pub fn green_terms(
    mesh: &Mesh,
    vel: &AssembledVelocitySystem,
    pot: &AssembledPotentialSystem,
    u: &[f64],
    phi: &[f64],
    psi: &[f64],
) -> GreenTerms {
    let n = mesh.num_nodes();
    let coef = &pot.coefficients;
    let nloc = mesh.nodes_per_element();
    let mut lhs = 0.0;
    let mut gu_norm2 = 0.0;
    for e in 0..mesh.num_elements() {
        let nodes = mesh.element_nodes(e);
        let (ax, az) = element_divergence(mesh, coef, e);
        for l in 0..nloc {
            let i = nodes[l];
            let a: f64 = (0..nloc)
                .map(|m| ax[l * nloc + m] * u[nodes[m]] + az[l * nloc + m] * u[n + nodes[m]])
                .sum();
            let w = mesh.volume_weight(e, l);
            let (rho, nn) = (coef.rho[i], coef.n[i]);
            lhs += w * rho * (phi[i] * a + nn * psi[i] * u[n + i]);
            gu_norm2 += w * rho * (coef.c2[i] * a * a + coef.n2[i] * u[n + i] * u[n + i]);
        }
    }
    for (&i, &ws) in mesh.surface_nodes().iter().zip(mesh.surface_weights()) {
        lhs -= ws * coef.rho[i] * phi[i] * u[n + i];
        gu_norm2 += ws * coef.rho[i] * coef.g * u[n + i] * u[n + i];
    }
    // (U, G*Φ)_𝓗 = Uᵀ (B_φ φ + B_ψ ψ)
    let bphi = pot.recover_phi.mul_vec(phi);
    let bpsi = pot.recover_psi.mul_vec(psi);
    let volume: f64 = (0..2 * n).map(|k| u[k] * (bphi[k] + bpsi[k])).sum();
    let gstar: Vec<f64> = (0..2 * n).map(|k| (bphi[k] + bpsi[k]) / pot.mass_u[k]).collect();
    let gstar_norm2: f64 = (0..2 * n).map(|k| pot.mass_u[k] * gstar[k] * gstar[k]).sum();
    let u_norm2: f64 = (0..2 * n).map(|k| vel.mass[k] * u[k] * u[k]).sum();
    let phi_norm2: f64 = (0..n)
        .map(|i| pot.mass_phi[i] * phi[i] * phi[i] + pot.mass_psi[i] * psi[i] * psi[i])
        .sum();
    // seabed term: ρ0 φ (w n_b · U)
    let trace = vel.constraint.mul_vec_transpose(u);
    let mut boundary = 0.0;
    let (mut tn, mut tp) = (0.0, 0.0);
    for (slot, &i) in vel.bottom_nodes.iter().enumerate() {
        let rho = coef.rho[i];
        let ws = mesh.bottom_weights()[slot];
        boundary += rho * phi[i] * trace[slot];
        tn += rho * trace[slot] * trace[slot] / ws;
        tp += rho * ws * phi[i] * phi[i];
    }
    GreenTerms {
        lhs,
        volume,
        boundary,
        scale: (gu_norm2 * phi_norm2).sqrt() + (u_norm2 * gstar_norm2).sqrt() + (tn * tp).sqrt(),
    }
}

/// Largest normalized Green-identity residual over `trials` random pairs.
///
/// `U_x` is zeroed on the lateral boundaries, where the identity would
/// otherwise pick up a wall flux term.
pub fn green_identity_residual(
    vel: &AssembledVelocitySystem,
    pot: &AssembledPotentialSystem,
    mesh: &Mesh,
    trials: usize,
    seed: u64,
) -> f64 {
    let n = mesh.num_nodes();
    let lateral = mesh.lateral_nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let mut u: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for &i in &lateral {
            u[i] = 0.0;
        }
        let phi: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let psi: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        worst = worst.max(green_terms(mesh, vel, pot, &u, &phi, &psi).residual());
    }
    worst
}
