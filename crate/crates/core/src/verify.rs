//! Self-contained invariant suites: the Green identity, energy conservation,
//! the barotropic reduction and the example tables of every module, run on
//! small meshes. Used by the `verify` CLI verb and by the acceptance tests.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    interference_minima, lloyd_bandwidth, measure_bandwidth, remainder_diagnostics, stft_spectrogram,
    LloydGeometry, Spectrogram,
};
use crate::assembly::{
    assemble_potential, assemble_velocity, green_identity_residual, stable_dt, stable_dt_with,
};
use crate::basis::{diff_matrix, gll_rule, MAX_ORDER};
use crate::error::{Error, Result};
use crate::mesh::{build_mesh, DiscretizationSpec, DomainSpec, Mesh, TopographySpec};
use crate::scenario::presets::{self, sim3_lloyd_geometry, SIM3_RECEIVERS};
use crate::scenario::{parse_config, preset, run::scenario_profile};
use crate::solver::{
    accumulate_displacement, apply_sponge, leapfrog_energy, sponge_reflection_1d, Formulation,
    LateralBoundary, PotentialSolver, SpongeLayer, Stepper, VelocitySolver,
};
use crate::sources::{
    bandlimited_noise, bottom_forcing_vector, eval_spatial, eval_temporal, SourceModel, SpatialShape,
    TemporalShape,
};
use crate::sparse::CsrMatrix;
use crate::stratification::{
    brunt_vaisala, constant_n_profile, hydrostatic_pressure, CubicHermite,
    EquationOfState, PhysicalConstants, StratificationProfile, TemperatureProfile,
};

/// Result of one check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type CheckResult = std::result::Result<String, String>;

/// Fails the check with `msg` unless `cond` holds.
fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
}

fn err(e: Error) -> String {
    e.to_string()
}

const CHECKS: &[(&str, fn() -> CheckResult)] = &[
    ("green identity", check_green_identity),
    ("energy conservation (velocity)", || check_energy(Formulation::Velocity)),
    ("energy conservation (potential)", || check_energy(Formulation::Potential)),
    ("barotropic reduction", check_barotropic),
    ("basis", check_basis),
    ("mesh", check_mesh),
    ("stratification", check_stratification),
    ("assembly", check_assembly),
    ("sources", check_sources),
    ("solver", check_solver),
    ("sponge reflection", check_sponge),
    ("analysis", check_analysis),
    ("scenario", check_scenario),
];

/// Names of all checks in execution order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

/// Runs every check, reporting each outcome as soon as it is known.
pub fn run_all(mut progress: impl FnMut(&CheckOutcome)) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let result = check();
            let outcome = CheckOutcome {
                name,
                passed: result.is_ok(),
                detail: result.unwrap_or_else(|e| e),
                seconds: start.elapsed().as_secs_f64(),
            };
            progress(&outcome);
            outcome
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Measurements shared with the acceptance tests

/// Residual of the Green identity on one mesh.
#[derive(Debug, Clone, Copy)]
pub struct GreenCase {
    pub disc: DiscretizationSpec,
    pub residual: f64,
}

/// Stratified background used by the Green identity sweep: the synthetic
/// thermocline through a linear equation of state.
pub fn thermocline_profile() -> Result<StratificationProfile> {
    scenario_profile(&preset("appendix_b")?)
}

/// Largest Green-identity residual over `trials` random pairs on bumpy
/// meshes of up to 8×4 elements and orders up to 6.
pub fn green_identity_sweep(trials: usize) -> Result<Vec<GreenCase>> {
    let profile = thermocline_profile()?;
    let domain = DomainSpec {
        x_min: 0.0,
        x_max: 8000.0,
        height: profile.height(),
        topography: TopographySpec::Bumps { b: 300.0, k_x: 3e-3, f_x: 5e-3, r_x: 3000.0, center: 4000.0 },
    };
    let cases = [(1, 1, 1, 1), (2, 1, 2, 3), (4, 2, 3, 4), (8, 4, 5, 6), (8, 4, 6, 6)];
    cases
        .iter()
        .enumerate()
        .map(|(k, &(nx, nz, px, pz))| {
            let disc = DiscretizationSpec { nx, nz, px, pz };
            let mesh = build_mesh(&domain, &disc)?;
            let vel = assemble_velocity(&mesh, &profile);
            let pot = assemble_potential(&mesh, &profile);
            let residual = green_identity_residual(&vel, &pot, &mesh, trials, k as u64 + 1);
            Ok(GreenCase { disc, residual })
        })
        .collect()
}

/// Energy history after the source has decayed.
#[derive(Debug, Clone, Copy)]
pub struct EnergyDrift {
    pub formulation: Formulation,
    /// Time from which the source counts as decayed (s).
    pub decay_time: f64,
    /// Energy at the first step after `decay_time`.
    pub reference: f64,
    /// `max |E - E_ref| / E_ref` over the following steps.
    pub max_relative: f64,
    pub steps_after: usize,
    pub dt: f64,
}

/// Dipole Ricker source of the remainder study.
fn dipole_source() -> SourceModel {
    SourceModel::new(
        SpatialShape::GaussianDerivative { a: 150.0, s_x: 4e-5, x0: 7500.0 },
        TemporalShape::Ricker { s_t: 4.0, t0: 2.0 },
    )
    .with_delay(0.5)
}

/// 15 km × 1.5 km flat basin, `N = 10⁻³ s⁻¹`.
fn dipole_basin(nx: usize, nz: usize, p: usize, n: f64) -> Result<(Mesh, StratificationProfile)> {
    let domain = DomainSpec { x_min: 0.0, x_max: 15_000.0, height: 1500.0, topography: TopographySpec::Flat };
    let mesh = build_mesh(&domain, &DiscretizationSpec { nx, nz, px: p, pz: p })?;
    let profile = constant_n_profile(presets::RHO_BOTTOM, presets::SOUND_SPEED, n, 1500.0, &PhysicalConstants::default())?;
    Ok((mesh, profile))
}

/// Runs the dipole Ricker source (order 4, no sponge) and measures the
/// leapfrog energy over `steps_after` steps once `t > delay + t0 + 5/√s_t`.
pub fn energy_drift(formulation: Formulation, steps_after: usize) -> Result<EnergyDrift> {
    let (mesh, profile) = dipole_basin(50, 5, 4, 1e-3)?;
    let source = dipole_source();
    let decay_time = 0.5 + 2.0 + 5.0 / 4.0f64.sqrt();
    let (vel, pot);
    let (mut solver, dt): (Box<dyn Stepper>, f64) = match formulation {
        Formulation::Velocity => {
            vel = assemble_velocity(&mesh, &profile);
            let dt = stable_dt(&vel.mass, &vel.stiffness, 0.95)?;
            (Box::new(VelocitySolver::new(&mesh, &vel, source, dt, LateralBoundary::Natural, None)?), dt)
        }
        Formulation::Potential => {
            pot = assemble_potential(&mesh, &profile);
            let dt = stable_dt_with(&pot.mass(), |x, y| pot.apply_stiffness(x, y), 0.95)?;
            // velocity recovery does not enter the energy; keep it rare
            (Box::new(PotentialSolver::new(&mesh, &pot, source, dt, 1000, None)?), dt)
        }
    };
    // E^{n-1/2} involves only levels after the decay time
    while solver.time() - dt <= decay_time {
        solver.step()?;
    }
    let reference = solver.energy();
    let mut max_relative: f64 = 0.0;
    for _ in 0..steps_after {
        solver.step()?;
        max_relative = max_relative.max((solver.energy() - reference).abs() / reference);
    }
    Ok(EnergyDrift { formulation, decay_time, reference, max_relative, steps_after, dt })
}

/// Largest `‖ψ‖ / ‖φ‖` over `steps` potential steps with `N = 0`, on a
/// bumpy seabed driven by the dipole source.
pub fn barotropic_psi_ratio(steps: usize) -> Result<f64> {
    let domain = DomainSpec {
        x_min: 0.0,
        x_max: 15_000.0,
        height: 1500.0,
        topography: TopographySpec::Bumps { b: 300.0, k_x: 3e-3, f_x: 5e-3, r_x: 3000.0, center: 7500.0 },
    };
    let mesh = build_mesh(&domain, &DiscretizationSpec { nx: 20, nz: 3, px: 4, pz: 4 })?;
    let profile = constant_n_profile(presets::RHO_BOTTOM, presets::SOUND_SPEED, 0.0, 1500.0, &PhysicalConstants::default())?;
    let pot = assemble_potential(&mesh, &profile);
    let dt = stable_dt_with(&pot.mass(), |x, y| pot.apply_stiffness(x, y), 0.95)?;
    let mut solver = PotentialSolver::new(&mesh, &pot, dipole_source(), dt, 1, None)?;
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut worst: f64 = 0.0;
    let mut driven = false;
    for _ in 0..steps {
        solver.step()?;
        let (phi, psi) = (norm(&solver.state.phi_curr), norm(&solver.state.psi_curr));
        if phi > 0.0 {
            driven = true;
            worst = worst.max(psi / phi);
        } else if psi > 0.0 {
            return Ok(f64::INFINITY);
        }
    }
    if !driven {
        return Err(Error::Numeric("the source never moved the potential".into()));
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Invariant checks

fn check_green_identity() -> CheckResult {
    let cases = green_identity_sweep(100).map_err(err)?;
    let worst = cases.iter().map(|c| c.residual).fold(0.0, f64::max);
    ensure(worst < 1e-10, || format!("residual {worst:.3e} ≥ 1e-10"))?;
    Ok(format!("{} meshes up to 8×4, orders ≤ 6, 100 trials: max residual {worst:.2e}", cases.len()))
}

fn check_energy(formulation: Formulation) -> CheckResult {
    let d = energy_drift(formulation, 2000).map_err(err)?;
    ensure(d.reference > 0.0, || "no energy was injected".into())?;
    ensure(d.max_relative <= 1e-8, || format!("drift {:.3e} > 1e-8", d.max_relative))?;
    Ok(format!("{} steps after t = {:.1} s: drift {:.2e}", d.steps_after, d.decay_time, d.max_relative))
}

fn check_barotropic() -> CheckResult {
    let ratio = barotropic_psi_ratio(600).map_err(err)?;
    ensure(ratio < 1e-12, || format!("‖ψ‖/‖φ‖ reached {ratio:.3e}"))?;
    Ok(format!("max ‖ψ‖/‖φ‖ over 600 steps: {ratio:.1e}"))
}

fn check_basis() -> CheckResult {
    let r1 = gll_rule(1).map_err(err)?;
    ensure(r1.nodes() == [-1.0, 1.0] && r1.weights() == [1.0, 1.0], || "order 1 is not the trapezoid rule".into())?;
    let r2 = gll_rule(2).map_err(err)?;
    let expect = [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];
    ensure(
        r2.nodes().iter().zip([-1.0, 0.0, 1.0]).all(|(a, b)| (a - b).abs() < 1e-15)
            && r2.weights().iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-14),
        || "order 2 differs from Simpson".into(),
    )?;
    for p in 1..=MAX_ORDER {
        let r = gll_rule(p).map_err(err)?;
        let sum: f64 = r.weights().iter().sum();
        ensure((sum - 2.0).abs() < 1e-13, || format!("order {p}: weights sum to {sum}"))?;
        for k in 0..2 * p {
            let exact = if k % 2 == 0 { 2.0 / (k + 1) as f64 } else { 0.0 };
            let got = r.integrate(|x| x.powi(k as i32));
            ensure((got - exact).abs() < 1e-12, || format!("order {p} fails on x^{k}"))?;
        }
        let d = diff_matrix(&r);
        for i in 0..=p {
            let row: f64 = d.row(i).iter().sum();
            ensure(row.abs() < 1e-12, || format!("order {p}: row {i} sums to {row}"))?;
        }
        if p >= 2 {
            let sq: Vec<f64> = r.nodes().iter().map(|x| x * x).collect();
            let got = d.apply(&sq);
            ensure(
                got.iter().zip(r.nodes()).all(|(g, x)| (g - 2.0 * x).abs() < 1e-11),
                || format!("order {p}: derivative of x² is not 2x"),
            )?;
        }
    }
    let d1 = diff_matrix(&r1);
    ensure(
        [d1.get(0, 0), d1.get(0, 1), d1.get(1, 0), d1.get(1, 1)] == [-0.5, 0.5, -0.5, 0.5],
        || "linear derivative matrix".into(),
    )?;
    ensure(gll_rule(MAX_ORDER + 1).is_err() && gll_rule(0).is_err(), || "out-of-range orders accepted".into())?;
    Ok(format!("orders 1..={MAX_ORDER}: weights, exactness, derivative rows"))
}

fn check_mesh() -> CheckResult {
    let flat = |w: f64, h: f64| DomainSpec { x_min: 0.0, x_max: w, height: h, topography: TopographySpec::Flat };
    let m = build_mesh(&flat(2.0, 1.0), &DiscretizationSpec { nx: 2, nz: 1, px: 1, pz: 1 }).map_err(err)?;
    ensure(m.num_elements() == 2 && m.num_nodes() == 6 && m.discrete_area() == 2.0, || "2×1 linear mesh".into())?;
    let d = DiscretizationSpec { nx: 1051, nz: 10, px: 4, pz: 5 };
    let m = build_mesh(&flat(101_000.0, 1500.0), &d).map_err(err)?;
    ensure(m.num_nodes() == (1051 * 4 + 1) * (10 * 5 + 1), || "node count formula".into())?;
    ensure(close(m.discrete_area(), 101_000.0 * 1500.0, 1e-8), || "area of the flat domain".into())?;
    let bumps = DomainSpec {
        x_min: 0.0,
        x_max: 15_000.0,
        height: 1500.0,
        topography: TopographySpec::Bumps { b: 300.0, k_x: 0.03, f_x: 0.07, r_x: 1500.0, center: 7500.0 },
    };
    let m = build_mesh(&bumps, &DiscretizationSpec { nx: 100, nz: 10, px: 4, pz: 4 }).map_err(err)?;
    let min_j = (0..m.num_elements()).flat_map(|e| m.geometry(e).jac.clone()).fold(f64::INFINITY, f64::min);
    ensure(min_j > 0.0, || format!("bumpy mesh has Jacobian {min_j}"))?;
    let m = build_mesh(&flat(10.0, 1.0), &DiscretizationSpec { nx: 3, nz: 2, px: 3, pz: 2 }).map_err(err)?;
    for &n in m.bottom_nodes() {
        let nb = m.boundary_normal(n).map_err(err)?;
        ensure(nb[0].abs() < 1e-14 && (nb[1] + 1.0).abs() < 1e-14, || "flat seabed normal".into())?;
    }
    let slope = DomainSpec {
        x_min: -1000.0,
        x_max: 1500.0,
        height: 2000.0,
        topography: TopographySpec::Tabulated { x: vec![0.0, 500.0], z: vec![0.0, 500.0] },
    };
    let m = build_mesh(&slope, &DiscretizationSpec { nx: 5, nz: 2, px: 4, pz: 2 }).map_err(err)?;
    let node = m
        .bottom_nodes()
        .iter()
        .copied()
        .find(|&n| (m.node_coord(n)[0] - 250.0).abs() < 1e-9)
        .ok_or("no seabed node at x = 250 m")?;
    let nb = m.boundary_normal(node).map_err(err)?;
    ensure(
        (nb[0] - FRAC_1_SQRT_2).abs() < 1e-12 && (nb[1] + FRAC_1_SQRT_2).abs() < 1e-12,
        || format!("normal on the unit slope is {nb:?}"),
    )?;
    for &n in m.bottom_nodes() {
        let v = m.boundary_normal(n).map_err(err)?;
        ensure((v[0].hypot(v[1]) - 1.0).abs() < 1e-14, || "normal is not unit".into())?;
    }
    Ok(format!("counts, area, Jacobian ≥ {min_j:.3e}, normals"))
}

fn check_stratification() -> CheckResult {
    let consts = PhysicalConstants::default();
    let n2_exp = 1e-6 / 9.81 + 9.81 / 1500.0f64.powi(2);
    ensure(close(n2_exp, 4.4619e-6, 1e-4), || format!("n² = {n2_exp}"))?;
    let p = constant_n_profile(1000.0, 1500.0, 1e-3, 1500.0, &consts).map_err(err)?;
    ensure((p.rho0(1500.0) - 993.33).abs() < 0.01, || format!("ρ0(H) = {}", p.rho0(1500.0)))?;
    ensure(p.n2_samples().iter().all(|v| close(*v, 1e-6, 1e-9)), || "constant-N round trip".into())?;
    let p0 = constant_n_profile(1000.0, 1500.0, 0.0, 1500.0, &consts).map_err(err)?;
    ensure(p0.n2_samples().iter().all(|v| v.abs() < 1e-10), || "barotropic N² is not zero".into())?;
    let rho = CubicHermite::from_samples(0.0, 10.0, vec![1000.0; 11]);
    let c = CubicHermite::from_samples(0.0, 10.0, vec![1500.0; 11]);
    match brunt_vaisala(&rho, &c, &[0.0], &consts) {
        Err(Error::UnstableStratification { n2, .. }) => {
            ensure(close(n2, -4.2772e-5, 1e-4), || format!("constant density N² = {n2}"))?
        }
        other => return Err(format!("constant density accepted: {other:?}")),
    }
    let uniform = TemperatureProfile::uniform(283.15).map_err(err)?;
    let incompressible =
        EquationOfState::Incompressible { rho_ref: 1000.0, thermal_expansion: 2e-4, t_ref: 283.15, sound_speed: 1500.0 };
    let (_, pres) = hydrostatic_pressure(&uniform, &incompressible, 1500.0, &consts).map_err(err)?;
    ensure(close(pres[0], 1.4816e7, 1e-4), || format!("p0(0) = {}", pres[0]))?;
    let kappa = 1.0 / (1000.0 * 1500.0f64.powi(2));
    let compressible = EquationOfState::LinearCompressibility {
        rho_ref: 1000.0,
        thermal_expansion: 2e-4,
        compressibility: kappa,
        t_ref: 283.15,
    };
    let (z, pres) = hydrostatic_pressure(&uniform, &compressible, 1500.0, &consts).map_err(err)?;
    for (zk, pk) in z.iter().zip(&pres) {
        let exact = consts.p_atm + ((consts.g * 1000.0 * kappa * (1500.0 - zk)).exp() - 1.0) / kappa;
        ensure(close(*pk, exact, 1e-8), || format!("RK4 pressure at z = {zk}"))?;
    }
    let thermo = thermocline_profile().map_err(err)?;
    let n2 = thermo.n2_samples();
    let imax = (0..n2.len()).max_by(|a, b| n2[*a].total_cmp(&n2[*b])).unwrap_or(0);
    ensure(imax > 0 && imax + 1 < n2.len(), || "thermocline N² peaks at an end".into())?;
    let z_peak = thermo.z_grid()[imax];
    ensure(z_peak > 1000.0 && z_peak < 1500.0, || format!("N² peak at z = {z_peak}"))?;
    Ok(format!("closed forms, hydrostatics, thermocline N² peak at z = {z_peak:.0} m"))
}

fn check_assembly() -> CheckResult {
    let consts = PhysicalConstants::default();
    let bumpy = |nx, nz, px, pz| {
        build_mesh(
            &DomainSpec {
                x_min: 0.0,
                x_max: 4000.0,
                height: 1500.0,
                topography: TopographySpec::Bumps { b: 300.0, k_x: 3e-3, f_x: 5e-3, r_x: 2000.0, center: 2000.0 },
            },
            &DiscretizationSpec { nx, nz, px, pz },
        )
    };
    let strat = constant_n_profile(1000.0, 1500.0, 1e-2, 1500.0, &consts).map_err(err)?;
    let baro = constant_n_profile(1000.0, 1500.0, 0.0, 1500.0, &consts).map_err(err)?;
    let mesh = bumpy(4, 2, 3, 4).map_err(err)?;
    let vel = assemble_velocity(&mesh, &strat);
    let k = &vel.stiffness;
    ensure(k.asymmetry() <= 1e-12 * k.max_abs(), || "K_U is not symmetric".into())?;
    ensure(vel.mass.iter().all(|m| *m > 0.0), || "M_U is not positive".into())?;
    let n = mesh.num_nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let x: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q: f64 = x.iter().zip(k.mul_vec(&x)).map(|(a, b)| a * b).sum();
        let xx: f64 = x.iter().map(|a| a * a).sum();
        ensure(q >= -1e-10 * xx * k.max_abs(), || "K_U is indefinite".into())?;
    }
    let pot = assemble_potential(&mesh, &strat);
    ensure(pot.stiffness_phi.asymmetry() <= 1e-12 * pot.stiffness_phi.max_abs(), || "K_φ is not symmetric".into())?;
    ensure(pot.stiffness_psi.iter().all(|v| *v >= 0.0), || "K_ψ has a negative entry".into())?;
    let pot0 = assemble_potential(&mesh, &baro);
    ensure(pot0.coupling.nnz() == 0 && pot0.stiffness_psi.iter().all(|v| *v == 0.0), || "N = 0 does not decouple ψ".into())?;
    let ones = vec![1.0; n];
    ensure(
        pot0.stiffness_phi.mul_vec(&ones).iter().all(|v| v.abs() < 1e-12 * pot0.stiffness_phi.max_abs()),
        || "constants are not in the kernel of K_φ".into(),
    )?;
    let flat = build_mesh(
        &DomainSpec { x_min: 0.0, x_max: 2000.0, height: 1500.0, topography: TopographySpec::Flat },
        &DiscretizationSpec { nx: 2, nz: 1, px: 6, pz: 6 },
    )
    .map_err(err)?;
    let v = assemble_velocity(&flat, &strat);
    let n2e = 1e-4 / consts.g + consts.g / 1500.0f64.powi(2);
    let exact = 2000.0 * 1000.0 * (1.0 - (-n2e * 1500.0).exp()) / n2e;
    let nf = flat.num_nodes();
    let (mx, mz): (f64, f64) = (v.mass[..nf].iter().sum(), v.mass[nf..].iter().sum());
    ensure(close(mx, exact, 1e-10) && close(mz, exact, 1e-10), || format!("ΣM_U = {mx} vs ∫ρ0 = {exact}"))?;
    let dt = stable_dt(&[1.0, 1.0], &CsrMatrix::diagonal(&[1.0, 4.0]), 0.95).map_err(err)?;
    ensure(close(dt, 0.95, 1e-3), || format!("stable step {dt}"))?;
    ensure(
        matches!(stable_dt(&[1.0, 1.0], &CsrMatrix::diagonal(&[0.0, 0.0]), 0.95), Err(Error::Config(_))),
        || "zero stiffness gives a finite step".into(),
    )?;
    Ok("symmetry, definiteness, barotropic decoupling, mass integral, stable step".into())
}

fn check_sources() -> CheckResult {
    let dipole = SpatialShape::GaussianDerivative { a: 150.0, s_x: 4e-5, x0: 7500.0 };
    ensure(eval_spatial(&dipole, 7500.0) == 0.0, || "dipole is not zero at its center".into())?;
    let rect = SpatialShape::SmoothedRect { amplitude: 1.0, s_x: 150.0, r_x: 30_000.0, x0: 0.0 };
    ensure(close(eval_spatial(&rect, 0.0), 1.0, 1e-12), || "smoothed rectangle plateau".into())?;
    let gauss = SpatialShape::Gaussian { amplitude: 1.0, s_x: 0.07, x0: 75_000.0 };
    ensure(eval_spatial(&gauss, 75_000.0) == 1.0, || "Gaussian peak".into())?;
    let ricker = TemporalShape::Ricker { s_t: 4.0, t0: 2.0 };
    ensure(eval_temporal(&ricker, 2.0).map_err(err)? == -8.0, || "Ricker at t0".into())?;
    let h = 1e-3;
    let integral: f64 = (-5000..=5000)
        .map(|k| eval_temporal(&ricker, 2.0 + k as f64 * h).unwrap_or(f64::NAN) * h)
        .sum();
    ensure(integral.abs() < 1e-8, || format!("Ricker integral {integral:e}"))?;
    let step = TemporalShape::SmoothedRect { s_t: 4.0, t0: 2.0, r_t: 1.0 };
    let expect = 1.0 / (1.0 + (-2.0f64).exp()) - 1.0 / (1.0 + 2.0f64.exp());
    ensure(close(eval_temporal(&step, 2.5).map_err(err)?, expect, 1e-12), || "smoothed rectangle at 2.5 s".into())?;
    let a = bandlimited_noise(20.0, 16.384, 1e-3, 9).map_err(err)?;
    let b = bandlimited_noise(20.0, 16.384, 1e-3, 9).map_err(err)?;
    ensure(a == b, || "noise is not deterministic".into())?;
    let spec = stft_spectrogram(&a, 1e-3, a.len(), a.len()).map_err(err)?;
    let mag = &spec.magnitude[0];
    let peak = mag.iter().fold(0.0f64, |m, v| m.max(*v));
    let above = spec.freqs.iter().zip(mag).filter(|(f, _)| **f > 20.5).fold(0.0f64, |m, (_, v)| m.max(*v));
    ensure(above < 1e-2 * peak, || format!("noise leaks above 20 Hz: {:.2e} of peak", above / peak))?;
    let domain = DomainSpec { x_min: -20_000.0, x_max: 20_000.0, height: 1500.0, topography: TopographySpec::Flat };
    let mesh = build_mesh(&domain, &DiscretizationSpec { nx: 8, nz: 1, px: 3, pz: 2 }).map_err(err)?;
    // a rise of s_t = 4 s⁻² held for 20 s: on the plateau g ≈ 1
    let quake = SourceModel::new(rect.clone(), TemporalShape::SmoothedRect { s_t: 4.0, t0: 2.0, r_t: 20.0 });
    ensure(
        bottom_forcing_vector(&SourceModel::new(gauss, TemporalShape::SmoothedRect { s_t: 4.0, t0: 100.0, r_t: 1.0 }), &mesh, 0.0)
            .map_err(err)?
            .iter()
            .all(|v| v.abs() < 1e-10),
        || "forcing before the source switches on".into(),
    )?;
    let plateau = bottom_forcing_vector(&quake, &mesh, 10.0).map_err(err)?;
    let shape: Vec<f64> = mesh.bottom_nodes().iter().map(|&i| eval_spatial(&rect, mesh.node_coord(i)[0])).collect();
    let g = quake.time_factor(10.0).map_err(err)?;
    ensure(
        plateau.iter().zip(&shape).all(|(p, s)| (p - s * g).abs() < 1e-12) && (g - 1.0).abs() < 1e-6,
        || "plateau forcing differs from the spatial samples".into(),
    )?;
    Ok("shapes, Ricker moments, noise band limit and determinism, forcing vector".into())
}

fn check_solver() -> CheckResult {
    let (w, dt) = (2.0f64, 0.01);
    let (mut prev, mut curr) = (1.0f64, 1.0f64);
    let mut e0 = None;
    for _ in 0..10_000 {
        let next = (2.0 - dt * dt * w * w) * curr - prev;
        let e = leapfrog_energy(&[1.0], &[curr], &[next], &[w * w * curr], dt);
        let e0 = *e0.get_or_insert(e);
        ensure((e - e0).abs() <= 1e-12 * e0, || "scalar leapfrog energy drifts".into())?;
        (prev, curr) = (curr, next);
    }
    let mut d = vec![0.0; 2];
    for _ in 0..10 {
        accumulate_displacement(&mut d, &[1.0, 0.0], &[1.0, 0.0], 0.1);
    }
    ensure((d[0] - 1.0).abs() < 1e-14 && d[1] == 0.0, || "displacement of a constant velocity".into())?;
    let err_at = |steps: usize| {
        let (w, t_end) = (3.0f64, 2.0);
        let dt = t_end / steps as f64;
        let mut d = vec![0.0];
        for k in 0..steps {
            accumulate_displacement(&mut d, &[(w * k as f64 * dt).sin()], &[(w * (k + 1) as f64 * dt).sin()], dt);
        }
        (d[0] - (1.0 - (w * t_end).cos()) / w).abs()
    };
    let ratio = err_at(100) / err_at(200);
    ensure((ratio - 4.0).abs() < 0.4, || format!("trapezoid convergence ratio {ratio}"))?;
    let mut next = vec![2.0, 3.0];
    apply_sponge(&[1.0, 1.0], &mut next, &[1.0]);
    ensure(next == [2.0, 3.0], || "zero sponge is not the identity".into())?;
    let layer = SpongeLayer::both_sides(1000.0, 0.5);
    let f = (-0.5f64 * 0.1).exp();
    let mut next = vec![1.0];
    apply_sponge(&[0.0], &mut next, &[(-layer.sigma(0.0, 0.0, 10_000.0) * 0.1).exp()]);
    ensure((next[0] - f).abs() < 1e-15, || "uniform sponge decay".into())?;

    let domain = DomainSpec { x_min: 0.0, x_max: 6000.0, height: 1500.0, topography: TopographySpec::Flat };
    let mesh = build_mesh(&domain, &DiscretizationSpec { nx: 3, nz: 2, px: 3, pz: 3 }).map_err(err)?;
    let profile = constant_n_profile(1025.0, 1500.0, 0.01, 1500.0, &PhysicalConstants::default()).map_err(err)?;
    let vel = assemble_velocity(&mesh, &profile);
    let pot = assemble_potential(&mesh, &profile);
    let silent = SourceModel::new(
        SpatialShape::Gaussian { amplitude: 0.0, s_x: 1e-3, x0: 3000.0 },
        TemporalShape::Ricker { s_t: 4.0, t0: 2.0 },
    );
    let mut v = VelocitySolver::new(&mesh, &vel, silent.clone(), 1e-3, LateralBoundary::Natural, None).map_err(err)?;
    let mut p = PotentialSolver::new(&mesh, &pot, silent, 1e-3, 1, None).map_err(err)?;
    for _ in 0..50 {
        v.step().map_err(err)?;
        p.step().map_err(err)?;
    }
    ensure(
        v.velocity().iter().chain(p.velocity()).all(|x| *x == 0.0),
        || "zero source moved the fluid".into(),
    )?;
    let ramp = SourceModel::new(
        SpatialShape::Gaussian { amplitude: 1.0, s_x: 1e-6, x0: 3000.0 },
        TemporalShape::SmoothedRect { s_t: 40.0, t0: 0.5, r_t: 100.0 },
    );
    let dt = stable_dt(&vel.mass, &vel.stiffness, 0.95).map_err(err)?;
    let mut v = VelocitySolver::new(&mesh, &vel, ramp, dt, LateralBoundary::Rigid, None).map_err(err)?;
    while v.time() < 2.0 {
        v.step().map_err(err)?;
        let r = v.constraint_residual().map_err(err)?;
        ensure(r < 1e-10, || format!("seabed constraint residual {r:e}"))?;
    }
    let n = mesh.num_nodes();
    let interior = v.velocity()[n + mesh.surface_nodes()[3]];
    ensure(interior != 0.0, || "the interior does not respond".into())?;
    Ok("leapfrog surrogate, displacement rule, sponge, null solution, seabed constraint".into())
}

fn check_sponge() -> CheckResult {
    let weak = sponge_reflection_1d(10.0, 1.0);
    let tuned = sponge_reflection_1d(10.0, 4.0);
    ensure(tuned < 0.01, || format!("tuned 10-wavelength layer reflects {tuned:.3e}"))?;
    Ok(format!("10-wavelength layer: R = {weak:.2e} at strength 1, {tuned:.2e} at strength 4"))
}

fn check_analysis() -> CheckResult {
    let dt = 0.01;
    let s: Vec<f64> = (0..4096).map(|k| (TAU * 5.0 * k as f64 * dt).sin()).collect();
    let spec = stft_spectrogram(&s, dt, 512, 256).map_err(err)?;
    let bin = spec.freqs[1];
    for frame in &spec.magnitude {
        let k = (0..frame.len()).max_by(|a, b| frame[*a].total_cmp(&frame[*b])).unwrap_or(0);
        ensure((spec.freqs[k] - 5.0).abs() <= bin, || "STFT misses the 5 Hz line".into())?;
    }
    let zero = stft_spectrogram(&vec![0.0; 1024], dt, 256, 128).map_err(err)?;
    ensure(zero.magnitude.iter().flatten().all(|v| *v == 0.0), || "STFT of zero".into())?;
    let g = LloydGeometry { source_depth: 1500.0, sound_speed: 1500.0, sin_theta: 0.5 };
    ensure(lloyd_bandwidth(&g).map_err(err)? == 1.0, || "Lloyd bandwidth at sin θ = 1/2".into())?;
    for (id, x, z, table) in SIM3_RECEIVERS {
        let df = lloyd_bandwidth(&sim3_lloyd_geometry(x, z)).map_err(err)?;
        let rounded = round_sig(df, 2).round();
        ensure(rounded == table, || format!("{id}: Δf = {df:.3} Hz, table {table}"))?;
    }
    ensure(interference_minima(1.0, 0.5 * PI) == [0.0], || "only m = 1 below π".into())?;
    let m = interference_minima(1.0, TAU);
    ensure(m.len() == 3 && (m[1] - 0.5).abs() < 1e-15 && (m[2] - 1.0).abs() < 1e-15, || format!("minima {m:?}"))?;
    let df = 0.05;
    let freqs: Vec<f64> = (0..=400).map(|k| k as f64 * df).collect();
    let row: Vec<f64> = freqs.iter().map(|f| (PI * f / 2.0).sin().powi(2)).collect();
    let synthetic = Spectrogram { times: vec![1.0], freqs, magnitude: vec![row], window_len: 800, hop: 400 };
    let measured = measure_bandwidth(&synthetic, (0.0, 2.0), 20.0).value().ok_or("no bandwidth measured")?;
    ensure((measured - 2.0).abs() <= df, || format!("synthetic bandwidth {measured}"))?;
    let domain = DomainSpec { x_min: 0.0, x_max: 4000.0, height: 1000.0, topography: TopographySpec::Flat };
    let mesh = build_mesh(&domain, &DiscretizationSpec { nx: 2, nz: 2, px: 3, pz: 3 }).map_err(err)?;
    let profile = |n| constant_n_profile(1025.0, 1500.0, n, 1000.0, &PhysicalConstants::default());
    let sys0 = assemble_potential(&mesh, &profile(0.0).map_err(err)?);
    let n = sys0.num_nodes;
    let phi: Vec<f64> = mesh.coords().iter().map(|[x, z]| (x * 1e-3).sin() + z * 1e-3).collect();
    let psi: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
    ensure(remainder_diagnostics(&sys0, &phi, &psi).u_r.iter().all(|v| *v == 0.0), || "U_r with N = 0".into())?;
    let sys = assemble_potential(&mesh, &profile(0.01).map_err(err)?);
    let c = &sys.coefficients;
    let cancel: Vec<f64> = (0..n).map(|i| -c.n[i] / c.g * phi[i]).collect();
    ensure(
        remainder_diagnostics(&sys, &phi, &cancel).u_r.iter().all(|v| v.abs() < 1e-15),
        || "U_r with ψ = -(N/g)φ".into(),
    )?;
    Ok("STFT, Lloyd table, interference minima, minima spacing, remainder".into())
}

/// Rounds to `digits` significant figures.
pub fn round_sig(v: f64, digits: i32) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let scale = 10f64.powi(digits - 1 - v.abs().log10().floor() as i32);
    (v * scale).round() / scale
}

fn check_scenario() -> CheckResult {
    let sim1 = preset("sim1").map_err(err)?;
    let ok = match (&sim1.source.spatial, &sim1.source.temporal) {
        (
            SpatialShape::SmoothedRect { s_x, r_x, .. },
            crate::scenario::config::TemporalConfig::SmoothedRect { s_t, t0, r_t },
        ) => *s_x == 150.0 && *r_x == 30_000.0 && *t0 == 2.0 && *s_t == 4.0 && *r_t == 1.0,
        _ => false,
    };
    ensure(ok && sim1.domain.height == 1500.0, || "sim1 preset does not match its table".into())?;
    let empty = parse_config("").err().ok_or("empty file accepted")?;
    let text = empty.to_string();
    for section in ["domain", "discretization", "stratification", "source", "run"] {
        ensure(text.contains(section), || format!("empty-file errors omit [{section}]"))?;
    }
    let mut cfg = preset("sim2").map_err(err)?;
    cfg.discretization.px = 99;
    let bad = parse_config(&cfg.to_ini()).err().ok_or("px = 99 accepted")?;
    ensure(bad.to_string().contains("basis"), || format!("range error does not cite the basis limit: {bad}"))?;
    for name in presets::PRESET_NAMES {
        let cfg = preset(name).map_err(err)?;
        let back = parse_config(&cfg.to_ini()).map_err(|e| e.to_string())?;
        ensure(back == cfg, || format!("{name} does not round-trip"))?;
    }
    Ok("sim1 table, error reporting, preset round trips".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_figures() {
        assert_eq!(round_sig(2.02, 2), 2.0);
        assert_eq!(round_sig(25.7, 2), 26.0);
        assert_eq!(round_sig(0.01234, 2), 0.012);
    }

    #[test]
    fn fast_checks_pass() {
        for (name, check) in CHECKS {
            if name.starts_with("energy") || name.starts_with("green") {
                continue;
            }
            if let Err(e) = check() {
                panic!("{name}: {e}");
            }
        }
    }
}
