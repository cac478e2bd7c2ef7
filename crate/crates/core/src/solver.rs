//! Leapfrog time integration of both formulations.
//!
//! Velocity formulation: `M_U U'' + K_U U = -C_h Λ` with `C_hᵀ U = u_b`. The
//! multiplier is eliminated every step; because `C_h` touches each seabed
//! node once and `M_U` is diagonal and identical for both components of a
//! node, elimination reduces to projecting the predicted velocity onto the
//! seabed constraint along `n_b`.
//!
//! Potential formulation: `M Φ'' + K Φ = -M_b u_b` on `Φ = [φ, ψ]`, followed
//! by velocity recovery `U = M_U⁻¹ (B_φ φ + B_ψ ψ)`.
//!
//! Both schemes report the leapfrog-consistent energy
//! `E^{n+1/2} = ½‖(X^{n+1} - X^n)/Δt‖²_M + ½ (X^{n+1})ᵀ K X^n`, which is exactly
//! conserved once the forcing vanishes.

use std::io::{Read, Write};
use std::path::Path;

use crate::assembly::{AssembledPotentialSystem, AssembledVelocitySystem};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::sources::{spatial_samples, SourceModel};

/// Which system is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    Velocity,
    Potential,
}

impl Formulation {
    pub fn name(self) -> &'static str {
        match self {
            Formulation::Velocity => "velocity",
            Formulation::Potential => "potential",
        }
    }
}

/// Lateral wall treatment of the velocity formulation.
///
/// `Natural` leaves the wall free (the divergence, hence the pressure
/// perturbation, vanishes weakly there). `Rigid` enforces `U_x = 0`, which is
/// the condition the potential formulation satisfies naturally, so it is the
/// setting for comparing the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LateralBoundary {
    Natural,
    Rigid,
}

/// Uniform time grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("time step {dt} must be positive")));
        }
        Ok(Self { dt, steps })
    }

    /// Covers `[0, t_end]` with at most `max_dt`.
    pub fn covering(t_end: f64, max_dt: f64) -> Result<Self> {
        let steps = (t_end / max_dt).ceil().max(1.0) as usize;
        Self::new(t_end / steps as f64, steps)
    }

    pub fn final_time(&self) -> f64 {
        self.dt * self.steps as f64
    }
}

/// Absorbing sponge: increments are multiplied by `exp(-σ(x) Δt)`, with `σ`
/// ramping cubically from zero at the inner edge to `strength` at the wall.
///
/// Reflections stay below 1% once `strength · thickness / c ≳ 20` for layers
/// at least two wavelengths thick (see [`sponge_reflection_1d`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpongeLayer {
    pub thickness: f64,
    pub strength: f64,
    pub left: bool,
    pub right: bool,
}

impl SpongeLayer {
    pub fn both_sides(thickness: f64, strength: f64) -> Self {
        Self {
            thickness,
            strength,
            left: true,
            right: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.thickness > 0.0 && self.strength >= 0.0) {
            return Err(Error::Config("sponge needs thickness > 0 and strength >= 0".into()));
        }
        Ok(())
    }

    /// `σ(x)` for a domain spanning `[x_min, x_max]`.
    pub fn sigma(&self, x: f64, x_min: f64, x_max: f64) -> f64 {
        let ramp = |d: f64| {
            let s = (1.0 - d / self.thickness).clamp(0.0, 1.0);
            self.strength * s * s * s
        };
        let mut sigma: f64 = 0.0;
        if self.left {
            sigma = sigma.max(ramp(x - x_min));
        }
        if self.right {
            sigma = sigma.max(ramp(x_max - x));
        }
        sigma
    }

    /// Per-node factors `exp(-σ Δt)`.
    pub fn factors(&self, mesh: &Mesh, dt: f64) -> Vec<f64> {
        let (x0, x1) = (mesh.domain().x_min, mesh.domain().x_max);
        mesh.coords()
            .iter()
            .map(|&[x, _]| (-self.sigma(x, x0, x1) * dt).exp())
            .collect()
    }
}

/// Reflection of a right-side sponge measured on a 1D leapfrog wave chain.
///
/// A modulated Gaussian pulse of wavelength `λ = 1` (unit speed) runs into a
/// layer `thickness_wavelengths` thick with strength `strength` (in units of
/// `c/λ`); the chain ends in a rigid wall behind the layer. Returns the
/// reflected peak over the incident peak at a probe ahead of the layer.
pub fn sponge_reflection_1d(thickness_wavelengths: f64, strength: f64) -> f64 {
    const POINTS_PER_WAVELENGTH: f64 = 40.0;
    let h = 1.0 / POINTS_PER_WAVELENGTH;
    let dt = 0.5 * h;
    let (x_source, x_probe, gap) = (8.0, 14.0, 4.0);
    let length = x_probe + gap + thickness_wavelengths;
    let n = (length / h).round() as usize + 1;
    let layer = SpongeLayer { thickness: thickness_wavelengths, strength, left: false, right: true };
    let factor: Vec<f64> = (0..n).map(|i| (-layer.sigma(i as f64 * h, 0.0, length) * dt).exp()).collect();
    let pulse = |s: f64| (-(s / 1.5).powi(2)).exp() * (std::f64::consts::TAU * s).cos();
    let mut prev: Vec<f64> = (0..n).map(|i| pulse(i as f64 * h - x_source + dt)).collect();
    let mut curr: Vec<f64> = (0..n).map(|i| pulse(i as f64 * h - x_source)).collect();
    prev[0] = 0.0;
    curr[0] = 0.0;
    prev[n - 1] = 0.0;
    curr[n - 1] = 0.0;
    let probe = (x_probe / h).round() as usize;
    // the incident pulse has passed the probe once its tail (6 widths) clears
    let t_split = x_probe - x_source + 6.0;
    let t_end = t_split + 2.0 * (length - x_probe) + 6.0;
    let (mut incident, mut reflected) = (0.0f64, 0.0f64);
    let r = dt * dt / (h * h);
    let mut next = vec![0.0; n];
    for step in 1..=(t_end / dt) as usize {
        for i in 1..n - 1 {
            next[i] = 2.0 * curr[i] - prev[i] + r * (curr[i + 1] - 2.0 * curr[i] + curr[i - 1]);
        }
        apply_sponge(&curr, &mut next, &factor);
        std::mem::swap(&mut prev, &mut curr);
        std::mem::swap(&mut curr, &mut next);
        let v = curr[probe].abs();
        if step as f64 * dt < t_split {
            incident = incident.max(v);
        } else {
            reflected = reflected.max(v);
        }
    }
    reflected / incident
}

/// `next ← prev + factor ⊙ (next - prev)`, with `factor` per node and the
/// field made of `next.len() / factor.len()` node-blocked components.
pub fn apply_sponge(prev: &[f64], next: &mut [f64], factor: &[f64]) {
    let n = factor.len();
    for (k, (v, p)) in next.iter_mut().zip(prev).enumerate() {
        let f = factor[k % n];
        *v = p + f * (*v - p);
    }
}

/// Trapezoidal update `d += Δt/2 (u_old + u_new)`.
pub fn accumulate_displacement(displacement: &mut [f64], u_old: &[f64], u_new: &[f64], dt: f64) {
    for ((d, a), b) in displacement.iter_mut().zip(u_old).zip(u_new) {
        *d += 0.5 * dt * (a + b);
    }
}

/// Leapfrog energy from two levels, given the mass diagonal and `K x_prev`.
pub fn leapfrog_energy(mass: &[f64], x_prev: &[f64], x_next: &[f64], k_prev: &[f64], dt: f64) -> f64 {
    let mut kinetic = 0.0;
    let mut potential = 0.0;
    for i in 0..mass.len() {
        let v = (x_next[i] - x_prev[i]) / dt;
        kinetic += mass[i] * v * v;
        potential += x_next[i] * k_prev[i];
    }
    0.5 * (kinetic + potential)
}

fn check_finite(values: &[f64], step: usize, time: f64) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence { step, time })
    }
}

/// Common interface of the two integrators.
pub trait Stepper {
    fn formulation(&self) -> Formulation;
    /// Advances one step.
    fn step(&mut self) -> Result<()>;
    /// Index `n` of the current level.
    fn step_index(&self) -> usize;
    fn dt(&self) -> f64;
    fn time(&self) -> f64 {
        self.step_index() as f64 * self.dt()
    }
    /// Component-blocked velocity `[U_x, U_z]` at the current level (for the
    /// potential formulation, at the last recovery).
    fn velocity(&self) -> &[f64];
    /// Component-blocked displacement.
    fn displacement(&self) -> &[f64];
    /// `E^{n-1/2}` of the last step (zero before the first step).
    fn energy(&self) -> f64;
}

/// Three-level velocity state plus multiplier and displacement.
#[derive(Debug, Clone)]
pub struct VelocityState {
    pub u_prev: Vec<f64>,
    pub u_curr: Vec<f64>,
    /// `Λ` per seabed node from the last step.
    pub lambda: Vec<f64>,
    pub displacement: Vec<f64>,
    pub step: usize,
    pub energy: f64,
}

/// Velocity-formulation integrator.
pub struct VelocitySolver<'a> {
    sys: &'a AssembledVelocitySystem,
    source: SourceModel,
    dt: f64,
    lateral: LateralBoundary,
    damping: Option<Vec<f64>>,
    f_bottom: Vec<f64>,
    normals: Vec<[f64; 2]>,
    corner_slots: Vec<usize>,
    lateral_nodes: Vec<usize>,
    ku: Vec<f64>,
    pub state: VelocityState,
}

impl<'a> VelocitySolver<'a> {
    pub fn new(
        mesh: &Mesh,
        sys: &'a AssembledVelocitySystem,
        source: SourceModel,
        dt: f64,
        lateral: LateralBoundary,
        sponge: Option<&SpongeLayer>,
    ) -> Result<Self> {
        source.validate()?;
        if !(dt > 0.0) {
            return Err(Error::Config("time step must be positive".into()));
        }
        let n2 = sys.num_dofs();
        let lateral_nodes = match lateral {
            LateralBoundary::Natural => Vec::new(),
            LateralBoundary::Rigid => mesh.lateral_nodes(),
        };
        let nb = sys.bottom_nodes.len();
        let corner_slots = match lateral {
            LateralBoundary::Natural => Vec::new(),
            LateralBoundary::Rigid => vec![0, nb - 1],
        };
        let mut solver = Self {
            sys,
            f_bottom: spatial_samples(&source, mesh),
            source,
            dt,
            lateral,
            damping: sponge.map(|s| s.factors(mesh, dt)),
            normals: mesh.bottom_normals().to_vec(),
            corner_slots,
            lateral_nodes,
            ku: vec![0.0; n2],
            state: VelocityState {
                u_prev: vec![0.0; n2],
                u_curr: vec![0.0; n2],
                lambda: vec![0.0; nb],
                displacement: vec![0.0; n2],
                step: 0,
                energy: 0.0,
            },
        };
        let mut u0 = vec![0.0; n2];
        solver.enforce(&mut u0, 0.0)?;
        solver.state.u_prev = u0.clone();
        solver.state.u_curr = u0;
        Ok(solver)
    }

    pub fn lateral(&self) -> LateralBoundary {
        self.lateral
    }

    /// Projects `u` onto the constraint set at time `t`; returns the normal
    /// correction applied at each seabed node.
    fn enforce(&self, u: &mut [f64], t: f64) -> Result<Vec<f64>> {
        let n = self.sys.num_nodes;
        let g = self.source.time_factor(t)?;
        let mut correction = vec![0.0; self.sys.bottom_nodes.len()];
        for i in &self.lateral_nodes {
            u[*i] = 0.0;
        }
        for (slot, &i) in self.sys.bottom_nodes.iter().enumerate() {
            let [nx, nz] = self.normals[slot];
            let ub = self.f_bottom[slot] * g;
            let s = u[i] * nx + u[n + i] * nz - ub;
            u[i] -= s * nx;
            u[n + i] -= s * nz;
            correction[slot] = s;
        }
        for &slot in &self.corner_slots {
            let i = self.sys.bottom_nodes[slot];
            let nz = self.normals[slot][1];
            u[i] = 0.0;
            u[n + i] = self.f_bottom[slot] * g / nz;
        }
        Ok(correction)
    }

    /// Seabed normal velocity minus `u_b` at the current level.
    pub fn constraint_residual(&self) -> Result<f64> {
        let n = self.sys.num_nodes;
        let g = self.source.time_factor(self.time())?;
        let u = &self.state.u_curr;
        Ok(self
            .sys
            .bottom_nodes
            .iter()
            .enumerate()
            .map(|(slot, &i)| {
                let [nx, nz] = self.normals[slot];
                (u[i] * nx + u[n + i] * nz - self.f_bottom[slot] * g).abs()
            })
            .fold(0.0, f64::max))
    }
}

impl Stepper for VelocitySolver<'_> {
    fn formulation(&self) -> Formulation {
        Formulation::Velocity
    }

    fn step(&mut self) -> Result<()> {
        let dt = self.dt;
        let dt2 = dt * dt;
        let st = &mut self.state;
        self.sys.stiffness.mul_vec_into(&st.u_curr, &mut self.ku);
        let mut next: Vec<f64> = (0..st.u_curr.len())
            .map(|k| 2.0 * st.u_curr[k] - st.u_prev[k] - dt2 * self.ku[k] / self.sys.mass[k])
            .collect();
        if let Some(f) = &self.damping {
            apply_sponge(&st.u_curr, &mut next, f);
        }
        let t_next = (st.step + 1) as f64 * dt;
        let correction = self.enforce(&mut next, t_next)?;
        let st = &mut self.state;
        check_finite(&next, st.step + 1, t_next)?;
        for (slot, &i) in self.sys.bottom_nodes.iter().enumerate() {
            let ws = self.sys.constraint.get(i, slot).hypot(self.sys.constraint.get(self.sys.num_nodes + i, slot));
            st.lambda[slot] = correction[slot] * self.sys.mass[i] / (dt2 * ws);
        }
        st.energy = leapfrog_energy(&self.sys.mass, &st.u_curr, &next, &self.ku, dt);
        accumulate_displacement(&mut st.displacement, &st.u_curr, &next, dt);
        st.u_prev = std::mem::replace(&mut st.u_curr, next);
        st.step += 1;
        Ok(())
    }

    fn step_index(&self) -> usize {
        self.state.step
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn velocity(&self) -> &[f64] {
        &self.state.u_curr
    }

    fn displacement(&self) -> &[f64] {
        &self.state.displacement
    }

    fn energy(&self) -> f64 {
        self.state.energy
    }
}

/// Three-level potential state plus recovered velocity and displacement.
#[derive(Debug, Clone)]
pub struct PotentialState {
    pub phi_prev: Vec<f64>,
    pub phi_curr: Vec<f64>,
    pub psi_prev: Vec<f64>,
    pub psi_curr: Vec<f64>,
    pub u_recovered: Vec<f64>,
    /// Step index of `u_recovered`.
    pub recovered_at: usize,
    pub displacement: Vec<f64>,
    pub step: usize,
    pub energy: f64,
}

/// Potential-formulation integrator.
pub struct PotentialSolver<'a> {
    sys: &'a AssembledPotentialSystem,
    source: SourceModel,
    dt: f64,
    cadence: usize,
    damping: Option<Vec<f64>>,
    /// `M_b f(x)` at seabed nodes.
    load: Vec<f64>,
    mass: Vec<f64>,
    x_curr: Vec<f64>,
    x_prev: Vec<f64>,
    kx: Vec<f64>,
    pub state: PotentialState,
}

impl<'a> PotentialSolver<'a> {
    /// `cadence` is the number of steps between velocity recoveries; the
    /// displacement integrates the recovered samples by the trapezoid rule.
    pub fn new(
        mesh: &Mesh,
        sys: &'a AssembledPotentialSystem,
        source: SourceModel,
        dt: f64,
        cadence: usize,
        sponge: Option<&SpongeLayer>,
    ) -> Result<Self> {
        source.validate()?;
        if !(dt > 0.0) {
            return Err(Error::Config("time step must be positive".into()));
        }
        if cadence == 0 {
            return Err(Error::Config("recovery cadence must be at least 1".into()));
        }
        let n = sys.num_nodes;
        let load = spatial_samples(&source, mesh)
            .into_iter()
            .zip(&sys.boundary_mass)
            .map(|(f, m)| f * m)
            .collect();
        Ok(Self {
            sys,
            source,
            dt,
            cadence,
            damping: sponge.map(|s| s.factors(mesh, dt)),
            load,
            mass: sys.mass(),
            x_curr: vec![0.0; 2 * n],
            x_prev: vec![0.0; 2 * n],
            kx: vec![0.0; 2 * n],
            state: PotentialState {
                phi_prev: vec![0.0; n],
                phi_curr: vec![0.0; n],
                psi_prev: vec![0.0; n],
                psi_curr: vec![0.0; n],
                u_recovered: vec![0.0; 2 * n],
                recovered_at: 0,
                displacement: vec![0.0; 2 * n],
                step: 0,
                energy: 0.0,
            },
        })
    }

    pub fn cadence(&self) -> usize {
        self.cadence
    }
}

impl Stepper for PotentialSolver<'_> {
    fn formulation(&self) -> Formulation {
        Formulation::Potential
    }

    fn step(&mut self) -> Result<()> {
        let dt = self.dt;
        let dt2 = dt * dt;
        let n = self.sys.num_nodes;
        let step = self.state.step;
        self.sys.apply_stiffness(&self.x_curr, &mut self.kx);
        let g = self.source.time_factor(step as f64 * dt)?;
        let mut next: Vec<f64> = (0..2 * n)
            .map(|k| 2.0 * self.x_curr[k] - self.x_prev[k] - dt2 * self.kx[k] / self.mass[k])
            .collect();
        if g != 0.0 {
            for (slot, &i) in self.sys.bottom_nodes.iter().enumerate() {
                next[i] -= dt2 * self.load[slot] * g / self.mass[i];
            }
        }
        if let Some(f) = &self.damping {
            apply_sponge(&self.x_curr, &mut next, f);
        }
        let t_next = (step + 1) as f64 * dt;
        check_finite(&next, step + 1, t_next)?;
        let energy = leapfrog_energy(&self.mass, &self.x_curr, &next, &self.kx, dt);
        self.x_prev = std::mem::replace(&mut self.x_curr, next);

        let st = &mut self.state;
        st.energy = energy;
        st.step = step + 1;
        st.phi_prev.copy_from_slice(&self.x_prev[..n]);
        st.psi_prev.copy_from_slice(&self.x_prev[n..]);
        st.phi_curr.copy_from_slice(&self.x_curr[..n]);
        st.psi_curr.copy_from_slice(&self.x_curr[n..]);
        if st.step.is_multiple_of(self.cadence) {
            let u = self.sys.recover_velocity(&st.phi_curr, &st.psi_curr);
            let span = (st.step - st.recovered_at) as f64 * dt;
            accumulate_displacement(&mut st.displacement, &st.u_recovered, &u, span);
            st.u_recovered = u;
            st.recovered_at = st.step;
        }
        Ok(())
    }

    fn step_index(&self) -> usize {
        self.state.step
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn velocity(&self) -> &[f64] {
        &self.state.u_recovered
    }

    fn displacement(&self) -> &[f64] {
        &self.state.displacement
    }

    fn energy(&self) -> f64 {
        self.state.energy
    }
}

const SNAPSHOT_MAGIC: &[u8; 4] = b"HSNP";
const SNAPSHOT_VERSION: u32 = 1;

/// A field snapshot: `rows × cols` little-endian `f64`, row-major.
///
/// Layout: magic `HSNP`, `u32` version, `u64` rows, `u64` cols, `f64` time,
/// `u32` name length, UTF-8 name, then the data.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub name: String,
    pub time: f64,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Snapshot {
    pub fn write(&self, path: &Path) -> Result<()> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Precondition("snapshot data does not match its dimensions".into()));
        }
        let mut buf = Vec::with_capacity(32 + self.name.len() + 8 * self.data.len());
        buf.extend_from_slice(SNAPSHOT_MAGIC);
        buf.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.rows as u64).to_le_bytes());
        buf.extend_from_slice(&(self.cols as u64).to_le_bytes());
        buf.extend_from_slice(&self.time.to_le_bytes());
        buf.extend_from_slice(&(self.name.len() as u32).to_le_bytes());
        buf.extend_from_slice(self.name.as_bytes());
        for v in &self.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&buf).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        let bad = |m: &str| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: m.to_string(),
        };
        let mut pos = 0usize;
        let mut take = |k: usize| -> Result<&[u8]> {
            let s = bytes.get(pos..pos + k).ok_or_else(|| bad("truncated snapshot"))?;
            pos += k;
            Ok(s)
        };
        if take(4)? != SNAPSHOT_MAGIC {
            return Err(bad("not a snapshot file"));
        }
        let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
        if version != SNAPSHOT_VERSION {
            return Err(bad("unsupported snapshot version"));
        }
        let rows = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
        let cols = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
        let time = f64::from_le_bytes(take(8)?.try_into().unwrap());
        let len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let name = String::from_utf8(take(len)?.to_vec()).map_err(|_| bad("snapshot name is not UTF-8"))?;
        let raw = take(8 * rows * cols)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self {
            name,
            time,
            rows,
            cols,
            data,
        })
    }

    /// Node coordinates as an `n × 2` snapshot named `coordinates`.
    pub fn coordinates(mesh: &Mesh) -> Self {
        Self {
            name: "coordinates".into(),
            time: 0.0,
            rows: mesh.num_nodes(),
            cols: 2,
            data: mesh.coords().iter().flat_map(|c| c.iter().copied()).collect(),
        }
    }

    /// A component-blocked vector field as an `n × 2` node-major snapshot.
    pub fn vector_field(name: &str, time: f64, field: &[f64]) -> Self {
        let n = field.len() / 2;
        Self {
            name: name.into(),
            time,
            rows: n,
            cols: 2,
            data: (0..n).flat_map(|i| [field[i], field[n + i]]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_potential, assemble_velocity, stable_dt, stable_dt_with};
    use crate::mesh::{build_mesh, DiscretizationSpec, DomainSpec, TopographySpec};
    use crate::sources::{SpatialShape, TemporalShape};
    use crate::stratification::{constant_n_profile, PhysicalConstants};
    use approx::assert_abs_diff_eq;

    fn small_mesh(nx: usize, nz: usize, p: usize, topo: TopographySpec) -> Mesh {
        let domain = DomainSpec { x_min: 0.0, x_max: 6000.0, height: 1500.0, topography: topo };
        build_mesh(&domain, &DiscretizationSpec { nx, nz, px: p, pz: p }).unwrap()
    }

    fn ricker(amplitude: f64) -> SourceModel {
        SourceModel::new(
            SpatialShape::Gaussian { amplitude, s_x: 1e-3, x0: 3000.0 },
            TemporalShape::Ricker { s_t: 4.0, t0: 2.0 },
        )
        .with_delay(0.5)
    }

    #[test]
    fn scalar_leapfrog_recurrence_and_energy() {
        let (w, dt) = (2.0f64, 0.01);
        let (mut prev, mut curr) = (1.0f64, 1.0f64);
        let mut e0 = None;
        for _ in 0..10_000 {
            let next = (2.0 - dt * dt * w * w) * curr - prev;
            let e = leapfrog_energy(&[1.0], &[curr], &[next], &[w * w * curr], dt);
            let e0 = *e0.get_or_insert(e);
            assert!((e - e0).abs() <= 1e-12 * e0);
            prev = curr;
            curr = next;
        }
    }

    #[test]
    fn displacement_rule() {
        let mut d = vec![0.0; 2];
        for _ in 0..10 {
            accumulate_displacement(&mut d, &[1.0, 0.0], &[1.0, 0.0], 0.1);
        }
        assert_abs_diff_eq!(d[0], 1.0, epsilon = 1e-14);
        assert_eq!(d[1], 0.0);

        let mut lin = vec![0.0];
        for k in 0..20 {
            accumulate_displacement(&mut lin, &[k as f64 * 0.05], &[(k + 1) as f64 * 0.05], 0.05);
        }
        assert_abs_diff_eq!(lin[0], 0.5, epsilon = 1e-14);

        let err = |steps: usize| {
            let (w, t_end) = (3.0f64, 2.0);
            let dt = t_end / steps as f64;
            let mut d = vec![0.0];
            for k in 0..steps {
                accumulate_displacement(&mut d, &[(w * k as f64 * dt).sin()], &[(w * (k + 1) as f64 * dt).sin()], dt);
            }
            (d[0] - (1.0 - (w * t_end).cos()) / w).abs()
        };
        let ratio = err(100) / err(200);
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn sponge_basics() {
        let layer = SpongeLayer::both_sides(1000.0, 0.5);
        assert_eq!(layer.sigma(5000.0, 0.0, 10_000.0), 0.0);
        assert_eq!(layer.sigma(0.0, 0.0, 10_000.0), 0.5);
        assert_abs_diff_eq!(layer.sigma(9500.0, 0.0, 10_000.0), 0.5 / 8.0, epsilon = 1e-15);
        let mut next = vec![2.0, 3.0];
        apply_sponge(&[1.0, 1.0], &mut next, &[1.0]);
        assert_eq!(next, vec![2.0, 3.0]);
        let f = (-0.5f64 * 0.1).exp();
        let mut next = vec![1.0, -2.0];
        apply_sponge(&[0.0, 0.0], &mut next, &[f]);
        assert_abs_diff_eq!(next[0], f, epsilon = 1e-15);
        assert_abs_diff_eq!(next[1], -2.0 * f, epsilon = 1e-15);
    }

    #[test]
    fn tuned_sponge_reflects_under_one_percent() {
        let weak = sponge_reflection_1d(10.0, 1.0);
        let tuned = sponge_reflection_1d(10.0, 4.0);
        assert!(weak > 0.05, "weak layer {weak}");
        assert!(tuned < 0.01, "tuned layer {tuned}");
        assert!(sponge_reflection_1d(2.0, 16.0) < 0.01);
    }

    #[test]
    fn zero_source_keeps_zero_state() {
        let mesh = small_mesh(3, 2, 3, TopographySpec::Flat);
        let profile = constant_n_profile(1025.0, 1500.0, 0.01, 1500.0, &PhysicalConstants::default()).unwrap();
        let vel = assemble_velocity(&mesh, &profile);
        let pot = assemble_potential(&mesh, &profile);
        let mut v = VelocitySolver::new(&mesh, &vel, ricker(0.0), 1e-3, LateralBoundary::Natural, None).unwrap();
        let mut p = PotentialSolver::new(&mesh, &pot, ricker(0.0), 1e-3, 1, None).unwrap();
        for _ in 0..50 {
            v.step().unwrap();
            p.step().unwrap();
        }
        assert!(v.velocity().iter().all(|x| *x == 0.0));
        assert!(p.velocity().iter().all(|x| *x == 0.0));
        assert_eq!(v.energy(), 0.0);
    }

    #[test]
    fn velocity_constraint_holds_every_step() {
        let topo = TopographySpec::Bumps { b: 100.0, k_x: 0.003, f_x: 0.01, r_x: 3000.0, center: 3000.0 };
        let mesh = small_mesh(4, 2, 4, topo);
        let profile = constant_n_profile(1025.0, 1500.0, 0.01, 1500.0, &PhysicalConstants::default()).unwrap();
        let sys = assemble_velocity(&mesh, &profile);
        let dt = stable_dt(&sys.mass, &sys.stiffness, 0.95).unwrap();
        for lateral in [LateralBoundary::Natural, LateralBoundary::Rigid] {
            let mut s = VelocitySolver::new(&mesh, &sys, ricker(1.0), dt, lateral, None).unwrap();
            let mut interior = 0.0f64;
            for _ in 0..(3.0 / dt) as usize {
                s.step().unwrap();
                assert!(s.constraint_residual().unwrap() < 1e-10);
                interior = interior.max(s.velocity()[sys.num_nodes + mesh.surface_nodes()[4]].abs());
            }
            assert!(interior > 0.0);
        }
    }

    #[test]
    fn barotropic_psi_stays_zero() {
        let mesh = small_mesh(4, 2, 3, TopographySpec::Flat);
        let profile = constant_n_profile(1025.0, 1500.0, 0.0, 1500.0, &PhysicalConstants::default()).unwrap();
        let sys = assemble_potential(&mesh, &profile);
        let dt = stable_dt_with(&sys.mass(), |x, y| sys.apply_stiffness(x, y), 0.95).unwrap();
        let mut s = PotentialSolver::new(&mesh, &sys, ricker(1.0), dt, 1, None).unwrap();
        for _ in 0..500 {
            s.step().unwrap();
            assert!(s.state.psi_curr.iter().all(|v| *v == 0.0));
        }
        assert!(s.state.phi_curr.iter().any(|v| *v != 0.0));
    }

    #[test]
    fn single_potential_step_matches_hand_evaluation() {
        let mesh = small_mesh(1, 1, 3, TopographySpec::Flat);
        let profile = constant_n_profile(1025.0, 1500.0, 0.01, 1500.0, &PhysicalConstants::default()).unwrap();
        let sys = assemble_potential(&mesh, &profile);
        let src = SourceModel::new(
            SpatialShape::Gaussian { amplitude: 1.0, s_x: 1e-3, x0: 3000.0 },
            TemporalShape::SmoothedRect { s_t: 4.0, t0: -1.0, r_t: 5.0 },
        );
        let dt = 1e-3;
        let mut s = PotentialSolver::new(&mesh, &sys, src.clone(), dt, 1, None).unwrap();
        s.step().unwrap();
        let g = src.time_factor(0.0).unwrap();
        let n = sys.num_nodes;
        let mut expected = vec![0.0; n];
        for (slot, &i) in sys.bottom_nodes.iter().enumerate() {
            let x = mesh.node_coord(i)[0];
            let f = crate::sources::eval_spatial(&src.spatial, x);
            expected[i] = -dt * dt * sys.boundary_mass[slot] * f * g / sys.mass_phi[i];
        }
        for i in 0..n {
            assert_abs_diff_eq!(s.state.phi_curr[i], expected[i], epsilon = 1e-15 * expected.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
    }

    #[test]
    fn energy_is_conserved_after_source_decays() {
        let mesh = small_mesh(4, 2, 4, TopographySpec::Flat);
        let profile = constant_n_profile(1025.0, 1500.0, 0.01, 1500.0, &PhysicalConstants::default()).unwrap();
        let vel = assemble_velocity(&mesh, &profile);
        let pot = assemble_potential(&mesh, &profile);
        let dtv = stable_dt(&vel.mass, &vel.stiffness, 0.95).unwrap();
        let dtp = stable_dt_with(&pot.mass(), |x, y| pot.apply_stiffness(x, y), 0.95).unwrap();
        let mut v = VelocitySolver::new(&mesh, &vel, ricker(1.0), dtv, LateralBoundary::Natural, None).unwrap();
        let mut p = PotentialSolver::new(&mesh, &pot, ricker(1.0), dtp, 1, None).unwrap();
        for s in [&mut v as &mut dyn Stepper, &mut p] {
            while s.time() < 5.5 {
                s.step().unwrap();
            }
            let e0 = s.energy();
            assert!(e0 > 0.0);
            for _ in 0..2000 {
                s.step().unwrap();
                assert!((s.energy() - e0).abs() <= 1e-8 * e0, "{:?}", s.formulation());
            }
        }
    }

    #[test]
    fn formulations_agree_on_small_basin() {
        let mesh = small_mesh(12, 3, 4, TopographySpec::Flat);
        let profile = constant_n_profile(1025.0, 1500.0, 0.01, 1500.0, &PhysicalConstants::default()).unwrap();
        let vel = assemble_velocity(&mesh, &profile);
        let pot = assemble_potential(&mesh, &profile);
        let dt = 0.9 * stable_dt(&vel.mass, &vel.stiffness, 0.95)
            .unwrap()
            .min(stable_dt_with(&pot.mass(), |x, y| pot.apply_stiffness(x, y), 0.95).unwrap());
        let src = SourceModel::new(
            SpatialShape::Gaussian { amplitude: 1.0, s_x: 1e-3, x0: 3000.0 },
            TemporalShape::SmoothedRect { s_t: 4.0, t0: 2.0, r_t: 1.0 },
        )
        .with_delay(2.7);
        let mut v = VelocitySolver::new(&mesh, &vel, src.clone(), dt, LateralBoundary::Rigid, None).unwrap();
        let mut p = PotentialSolver::new(&mesh, &pot, src, dt, 1, None).unwrap();
        let probe = vel.num_nodes + mesh.surface_nodes()[mesh.surface_nodes().len() / 3];
        let (mut peak, mut diff) = (0.0f64, 0.0f64);
        while v.time() < 12.0 {
            v.step().unwrap();
            p.step().unwrap();
            let (a, b) = (v.displacement()[probe], p.displacement()[probe]);
            peak = peak.max(a.abs());
            diff = diff.max((a - b).abs());
        }
        assert!(peak > 0.0);
        assert!(diff < 0.05 * peak, "diff {diff} peak {peak}");
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.bin");
        let snap = Snapshot::vector_field("velocity", 1.5, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(snap.data, vec![1.0, 3.0, 2.0, 4.0]);
        snap.write(&path).unwrap();
        assert_eq!(Snapshot::read(&path).unwrap(), snap);
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 4 + 4 + 8 + 8 + 8 + 4 + 8 + 32);
        std::fs::write(&path, &bytes[..20]).unwrap();
        assert!(matches!(Snapshot::read(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn time_grid() {
        let g = TimeGrid::covering(1.0, 0.3).unwrap();
        assert_eq!(g.steps, 4);
        assert_abs_diff_eq!(g.final_time(), 1.0, epsilon = 1e-15);
        assert!(TimeGrid::new(0.0, 3).is_err());
    }
}
