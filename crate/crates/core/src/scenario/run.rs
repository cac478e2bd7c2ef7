//! Scenario execution: assembly, time loop, recording, post-processing and
//! file outputs.
//!
//! Output layout under the run directory:
//!
//! ```text
//! config.ini                     echo of the resolved scenario
//! manifest.txt                   metadata and SHA-256 inventory
//! coordinates.bin                node coordinates (when snapshots are on)
//! <formulation>/surface_x<x>.csv vertical surface displacement
//! <formulation>/receiver_<id>.csv
//! <formulation>/energy.csv
//! <formulation>/spectrogram_<id>{,_times,_freqs}.csv
//! <formulation>/bandwidth.csv
//! <formulation>/remainder_peak.csv, remainder_mean.csv
//! <formulation>/snapshots/{velocity,displacement}_<step>.bin
//! comparison.csv, comparison.txt  (formulation = both)
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use crate::analysis::{
    measure_bandwidth, remainder_diagnostics, stft_spectrogram, write_columns, BandwidthMeasurement, Quantity,
    Receiver, RemainderAverage, Spectrogram,
};
use crate::assembly::{assemble_potential, assemble_velocity, stable_dt, stable_dt_with};
use crate::error::{Error, Result};
use crate::mesh::{build_mesh, DomainSpec, Mesh, TopographySpec};
use crate::solver::{Formulation, PotentialSolver, Snapshot, Stepper, TimeGrid, VelocitySolver};
use crate::sources::{NoiseSignal, SourceModel, TemporalShape};
use crate::stratification::{
    constant_n_profile, profile_from_temperature, PhysicalConstants, StratificationProfile, TemperatureProfile,
};

use super::config::*;
use super::manifest::Manifest;

/// Run-time overrides that are not part of the scenario.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory receiving all outputs; `None` keeps results in memory only.
    pub out_dir: Option<PathBuf>,
    /// Fixed number of steps instead of covering `t_end`.
    pub steps: Option<usize>,
}

/// Peak remainder history and per-node time-averaged ratio.
#[derive(Debug, Clone, Default)]
pub struct RemainderSummary {
    pub times: Vec<f64>,
    pub peak: Vec<f64>,
    pub average: RemainderAverage,
}

/// Everything one formulation produced.
#[derive(Debug, Clone)]
pub struct FormulationRun {
    pub formulation: Formulation,
    pub dofs: usize,
    pub receivers: Vec<Receiver>,
    /// Vertical displacement probes at the surface points.
    pub surface: Vec<Receiver>,
    pub energy_times: Vec<f64>,
    pub energy: Vec<f64>,
    /// `max_n ‖ψⁿ‖ / ‖φⁿ‖` over steps with `φ ≠ 0` (potential runs).
    pub psi_ratio_max: Option<f64>,
    pub remainder: Option<RemainderSummary>,
    pub spectrograms: Vec<(String, Spectrogram)>,
    pub bandwidths: Vec<(String, BandwidthMeasurement)>,
    pub assembly_seconds: f64,
    pub loop_seconds: f64,
}

/// Surface-trace agreement between the formulations at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointComparison {
    pub x: f64,
    /// Peak `|η|` of the velocity-formulation trace.
    pub peak: f64,
    pub max_abs_diff: f64,
    /// `max_abs_diff / peak`.
    pub relative: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: ScenarioConfig,
    pub mesh: Mesh,
    pub dt: f64,
    pub steps: usize,
    pub runs: Vec<FormulationRun>,
    pub comparison: Vec<PointComparison>,
    pub manifest: Option<Manifest>,
}

impl RunReport {
    pub fn run(&self, formulation: Formulation) -> Option<&FormulationRun> {
        self.runs.iter().find(|r| r.formulation == formulation)
    }
}

/// Mesh described by the scenario.
pub fn scenario_mesh(cfg: &ScenarioConfig) -> Result<Mesh> {
    let d = &cfg.domain;
    let topography = match &d.topography {
        TopographyConfig::Flat => TopographySpec::Flat,
        &TopographyConfig::Bumps { b, k_x, f_x, r_x, center } => TopographySpec::Bumps { b, k_x, f_x, r_x, center },
        TopographyConfig::Table { path } => TopographySpec::read_table(path)?,
    };
    let domain = DomainSpec { x_min: d.x_min, x_max: d.x_max, height: d.height, topography };
    build_mesh(&domain, &cfg.discretization)
}

/// Background state described by the scenario.
pub fn scenario_profile(cfg: &ScenarioConfig) -> Result<StratificationProfile> {
    let consts = PhysicalConstants { g: cfg.gravity, p_atm: cfg.p_atm };
    match &cfg.stratification {
        &StratificationConfig::ConstantN { rho_bottom, sound_speed, n } => {
            constant_n_profile(rho_bottom, sound_speed, n, cfg.domain.height, &consts)
        }
        StratificationConfig::Temperature { profile, eos } => {
            let temperature = match profile {
                TemperatureSource::File(path) => TemperatureProfile::read(path)?,
                TemperatureSource::Inline { z, t } => TemperatureProfile::new(z.clone(), t.clone())?,
            };
            profile_from_temperature(&temperature, eos, cfg.domain.height, &consts)
        }
    }
}

/// Source model for a run ending at `t_end`; noise is drawn from `seed`.
pub fn scenario_source(cfg: &ScenarioConfig, t_end: f64) -> Result<SourceModel> {
    let s = &cfg.source;
    let temporal = match s.temporal {
        TemporalConfig::SmoothedRect { s_t, t0, r_t } => TemporalShape::SmoothedRect { s_t, t0, r_t },
        TemporalConfig::Ricker { s_t, t0 } => TemporalShape::Ricker { s_t, t0 },
        TemporalConfig::Noise { f_max, sample_dt, s_t, t0, r_t } => {
            let signal = NoiseSignal::new(f_max, t_end + 1.0, sample_dt, cfg.run.seed)?;
            TemporalShape::Noise { signal, s_t, t0, r_t }
        }
    };
    let model = SourceModel::new(s.spatial.clone(), temporal).with_delay(s.delay);
    model.validate()?;
    Ok(model)
}

/// Tracks written files so that a failing run still leaves a manifest.
struct Outputs {
    dir: Option<PathBuf>,
    manifest: Manifest,
}

impl Outputs {
    fn path(&self, relative: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(relative))
    }

    fn mkdir(&self, relative: &str) -> Result<()> {
        if let Some(p) = self.path(relative) {
            std::fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }

    fn record(&mut self, relative: &str) -> Result<()> {
        if let Some(dir) = &self.dir {
            self.manifest.add_file(dir, relative)?;
        }
        Ok(())
    }

    fn write_text(&mut self, relative: &str, text: &str) -> Result<()> {
        if let Some(p) = self.path(relative) {
            std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
            self.record(relative)?;
        }
        Ok(())
    }

    fn write_columns(&mut self, relative: &str, header: &[&str], columns: &[&[f64]]) -> Result<()> {
        if let Some(p) = self.path(relative) {
            write_columns(&p, header, columns)?;
            self.record(relative)?;
        }
        Ok(())
    }

    fn write_snapshot(&mut self, relative: &str, snapshot: &Snapshot) -> Result<()> {
        if let Some(p) = self.path(relative) {
            snapshot.write(&p)?;
            self.record(relative)?;
        }
        Ok(())
    }

    fn finish(&mut self, status: &str) -> Result<()> {
        self.manifest.set("status", status);
        if let Some(dir) = &self.dir {
            self.manifest.write(dir)?;
        }
        Ok(())
    }
}

/// Runs a scenario. On failure the manifest (if an output directory is
/// set) records the error and the files written so far.
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunReport> {
    let mut out = Outputs { dir: opts.out_dir.clone(), manifest: Manifest::default() };
    if let Some(dir) = &out.dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    out.manifest.set("scenario", &cfg.name);
    out.manifest.set("status", "running");
    out.manifest.set("formulation", cfg.run.formulation.name());
    out.manifest.set("seed", cfg.run.seed);
    match execute(cfg, opts, &mut out) {
        Ok(mut report) => {
            out.finish("complete")?;
            report.manifest = out.dir.is_some().then(|| out.manifest.clone());
            Ok(report)
        }
        Err(err) => {
            // Keep the original error even if the manifest cannot be written.
            let _ = out.finish(&format!("failed: {err}"));
            Err(err)
        }
    }
}

enum Solver<'a> {
    Velocity(VelocitySolver<'a>),
    Potential(PotentialSolver<'a>),
}

impl Solver<'_> {
    fn stepper(&mut self) -> &mut dyn Stepper {
        match self {
            Solver::Velocity(s) => s,
            Solver::Potential(s) => s,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn execute(cfg: &ScenarioConfig, opts: &RunOptions, out: &mut Outputs) -> Result<RunReport> {
    out.write_text("config.ini", &cfg.to_ini())?;
    let t_setup = Instant::now();
    let mesh = scenario_mesh(cfg)?;
    let profile = scenario_profile(cfg)?;
    out.manifest.set("nodes", mesh.num_nodes());
    out.manifest.set("time.setup_s", format!("{:.3}", t_setup.elapsed().as_secs_f64()));

    let formulations = cfg.run.formulation.formulations();
    let t_asm = Instant::now();
    let velocity_sys = formulations.contains(&Formulation::Velocity).then(|| assemble_velocity(&mesh, &profile));
    let velocity_asm = t_asm.elapsed().as_secs_f64();
    let t_asm = Instant::now();
    let potential_sys = formulations.contains(&Formulation::Potential).then(|| assemble_potential(&mesh, &profile));
    let potential_asm = t_asm.elapsed().as_secs_f64();

    let grid = match (cfg.run.dt, opts.steps) {
        (Some(dt), Some(steps)) => TimeGrid::new(dt, steps)?,
        (Some(dt), None) => TimeGrid::new(dt, (cfg.run.t_end / dt).ceil().max(1.0) as usize)?,
        (None, steps) => {
            let t_dt = Instant::now();
            let mut dt = f64::INFINITY;
            if let Some(sys) = &velocity_sys {
                dt = dt.min(stable_dt(&sys.mass, &sys.stiffness, cfg.run.safety)?);
            }
            if let Some(sys) = &potential_sys {
                dt = dt.min(stable_dt_with(&sys.mass(), |x, y| sys.apply_stiffness(x, y), cfg.run.safety)?);
            }
            out.manifest.set("time.stable_dt_s", format!("{:.3}", t_dt.elapsed().as_secs_f64()));
            match steps {
                Some(steps) => TimeGrid::new(dt, steps)?,
                None => TimeGrid::covering(cfg.run.t_end, dt)?,
            }
        }
    };
    out.manifest.set("dt", format!("{:e}", grid.dt));
    out.manifest.set("steps", grid.steps);
    out.manifest.set("t_end", format!("{:e}", grid.final_time()));

    let o = &cfg.output;
    let records = grid.steps / o.record_every + 1;
    let window_len = if o.spectrogram_window > 0.0 && !cfg.receivers.is_empty() {
        let dt_rec = grid.dt * o.record_every as f64;
        let len = (o.spectrogram_window / dt_rec).round() as usize;
        if len < 2 || len > records {
            return Err(Error::Config(format!(
                "spectrogram window of {} s is {len} samples; need 2..={records} recorded samples",
                o.spectrogram_window
            )));
        }
        Some(len)
    } else {
        None
    };

    if o.snapshot_every > 0 {
        out.write_snapshot("coordinates.bin", &Snapshot::coordinates(&mesh))?;
    }

    let source = scenario_source(cfg, grid.final_time())?;
    let mut runs = Vec::new();
    for formulation in formulations {
        let dir = formulation.name();
        out.mkdir(dir)?;
        if o.snapshot_every > 0 {
            out.mkdir(&format!("{dir}/snapshots"))?;
        }
        let (mut solver, coefficients, dofs, assembly_seconds) = match formulation {
            Formulation::Velocity => {
                let sys = velocity_sys.as_ref().expect("assembled");
                let s = VelocitySolver::new(&mesh, sys, source.clone(), grid.dt, cfg.run.lateral, cfg.sponge.as_ref())?;
                (Solver::Velocity(s), &sys.coefficients, sys.num_dofs(), velocity_asm)
            }
            Formulation::Potential => {
                let sys = potential_sys.as_ref().expect("assembled");
                let s = PotentialSolver::new(&mesh, sys, source.clone(), grid.dt, cfg.run.recovery_cadence, cfg.sponge.as_ref())?;
                (Solver::Potential(s), &sys.coefficients, 2 * sys.num_nodes, potential_asm)
            }
        };
        out.manifest.set(&format!("dofs.{dir}"), dofs);
        out.manifest.set(&format!("time.assembly.{dir}_s"), format!("{assembly_seconds:.3}"));

        let mut receivers = cfg
            .receivers
            .iter()
            .map(|r| Receiver::new(&r.id, [r.x, r.z], r.quantity, &mesh, coefficients))
            .collect::<Result<Vec<_>>>()?;
        let mut surface = o
            .surface_points
            .iter()
            .map(|&x| Receiver::new(&format!("x{x}"), [x, cfg.domain.height], Quantity::VerticalDisplacement, &mesh, coefficients))
            .collect::<Result<Vec<_>>>()?;
        let mut energy_times = Vec::new();
        let mut energy = Vec::new();
        let mut psi_ratio_max: Option<f64> = None;
        let mut remainder = (formulation == Formulation::Potential && o.remainder_every > 0).then(RemainderSummary::default);

        let t_loop = Instant::now();
        for step in 0..=grid.steps {
            if step > 0 {
                solver.stepper().step()?;
            }
            if let Solver::Potential(p) = &solver {
                let phi = norm(&p.state.phi_curr);
                if phi > 0.0 {
                    let r = norm(&p.state.psi_curr) / phi;
                    psi_ratio_max = Some(psi_ratio_max.map_or(r, |m| m.max(r)));
                }
                if let Some(rem) = remainder.as_mut() {
                    if step % o.remainder_every == 0 {
                        let sys = potential_sys.as_ref().expect("assembled");
                        let field = remainder_diagnostics(sys, &p.state.phi_curr, &p.state.psi_curr);
                        rem.times.push(p.time());
                        rem.peak.push(field.peak_remainder());
                        rem.average.update(&field);
                    }
                }
            }
            let state = solver.stepper();
            if step % o.record_every == 0 {
                for r in receivers.iter_mut().chain(surface.iter_mut()) {
                    r.record(state);
                }
                if o.energy && step > 0 {
                    energy_times.push(state.time() - 0.5 * grid.dt);
                    energy.push(state.energy());
                }
            }
            if o.snapshot_every > 0 && step % o.snapshot_every == 0 {
                let t = state.time();
                out.write_snapshot(
                    &format!("{dir}/snapshots/velocity_{step:07}.bin"),
                    &Snapshot::vector_field("velocity", t, state.velocity()),
                )?;
                out.write_snapshot(
                    &format!("{dir}/snapshots/displacement_{step:07}.bin"),
                    &Snapshot::vector_field("displacement", t, state.displacement()),
                )?;
            }
        }
        let loop_seconds = t_loop.elapsed().as_secs_f64();
        out.manifest.set(&format!("time.loop.{dir}_s"), format!("{loop_seconds:.3}"));
        if let Some(r) = psi_ratio_max {
            out.manifest.set(&format!("psi_phi_ratio_max.{dir}"), format!("{r:e}"));
        }

        let t_post = Instant::now();
        for r in &surface {
            out.write_columns(&format!("{dir}/surface_{}.csv", r.id), &["time_s", r.quantity.name()], &[&r.times, &r.samples])?;
        }
        for r in &receivers {
            out.write_columns(&format!("{dir}/receiver_{}.csv", r.id), &["time_s", r.quantity.name()], &[&r.times, &r.samples])?;
        }
        if o.energy {
            out.write_columns(&format!("{dir}/energy.csv"), &["time_s", "energy"], &[&energy_times, &energy])?;
        }
        if let Some(rem) = &remainder {
            out.write_columns(&format!("{dir}/remainder_peak.csv"), &["time_s", "peak_u_r"], &[&rem.times, &rem.peak])?;
            let mean: Vec<f64> = rem.average.mean().into_iter().map(|m| m.unwrap_or(f64::NAN)).collect();
            let xs: Vec<f64> = mesh.coords().iter().map(|c| c[0]).collect();
            let zs: Vec<f64> = mesh.coords().iter().map(|c| c[1]).collect();
            out.write_columns(&format!("{dir}/remainder_mean.csv"), &["x_m", "z_m", "mean_ratio"], &[&xs, &zs, &mean])?;
        }
        let mut spectrograms = Vec::new();
        let mut bandwidths = Vec::new();
        if let Some(len) = window_len {
            let mut table = String::from("receiver,delta_f_hz,status\n");
            for r in &receivers {
                let spec = stft_spectrogram(&r.samples, r.dt_record(), len, (len / 2).max(1))?;
                if let Some(p) = out.dir.as_ref().map(|d| d.join(dir)) {
                    for file in spec.write_csv(&p, &format!("spectrogram_{}", r.id))? {
                        let name = file.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
                        out.record(&format!("{dir}/{name}"))?;
                    }
                }
                if let Some(window) = o.bandwidth_window {
                    let m = measure_bandwidth(&spec, window, o.spectrogram_f_max);
                    match &m {
                        BandwidthMeasurement::Measured { delta_f, .. } => {
                            let _ = writeln!(table, "{},{delta_f:e},measured", r.id);
                        }
                        BandwidthMeasurement::Failed { reason } => {
                            let _ = writeln!(table, "{},,failed: {}", r.id, reason.replace(',', ";"));
                        }
                    }
                    bandwidths.push((r.id.clone(), m));
                }
                spectrograms.push((r.id.clone(), spec));
            }
            if o.bandwidth_window.is_some() {
                out.write_text(&format!("{dir}/bandwidth.csv"), &table)?;
            }
        }
        out.manifest.set(&format!("time.post.{dir}_s"), format!("{:.3}", t_post.elapsed().as_secs_f64()));

        runs.push(FormulationRun {
            formulation,
            dofs,
            receivers,
            surface,
            energy_times,
            energy,
            psi_ratio_max,
            remainder,
            spectrograms,
            bandwidths,
            assembly_seconds,
            loop_seconds,
        });
    }

    let comparison = compare(&runs);
    if !comparison.is_empty() {
        write_comparison(out, &runs, &comparison)?;
    }

    Ok(RunReport { config: cfg.clone(), mesh, dt: grid.dt, steps: grid.steps, runs, comparison, manifest: None })
}

fn compare(runs: &[FormulationRun]) -> Vec<PointComparison> {
    let (Some(v), Some(p)) = (
        runs.iter().find(|r| r.formulation == Formulation::Velocity),
        runs.iter().find(|r| r.formulation == Formulation::Potential),
    ) else {
        return Vec::new();
    };
    v.surface
        .iter()
        .zip(&p.surface)
        .map(|(a, b)| {
            let peak = a.samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
            let max_abs_diff = a.samples.iter().zip(&b.samples).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            PointComparison {
                x: a.position[0],
                peak,
                max_abs_diff,
                relative: if peak > 0.0 { max_abs_diff / peak } else { 0.0 },
            }
        })
        .collect()
}

fn write_comparison(out: &mut Outputs, runs: &[FormulationRun], points: &[PointComparison]) -> Result<()> {
    let v = runs.iter().find(|r| r.formulation == Formulation::Velocity).expect("compared");
    let p = runs.iter().find(|r| r.formulation == Formulation::Potential).expect("compared");
    let mut header = vec!["time_s".to_string()];
    let mut columns: Vec<Vec<f64>> = vec![v.surface[0].times.clone()];
    for ((a, b), c) in v.surface.iter().zip(&p.surface).zip(points) {
        header.push(format!("velocity_{}", a.id));
        header.push(format!("potential_{}", a.id));
        header.push(format!("abs_diff_{}", a.id));
        header.push(format!("rel_diff_{}", a.id));
        let diff: Vec<f64> = a.samples.iter().zip(&b.samples).map(|(x, y)| (x - y).abs()).collect();
        let rel = diff.iter().map(|d| if c.peak > 0.0 { d / c.peak } else { 0.0 }).collect();
        columns.extend([a.samples.clone(), b.samples.clone(), diff, rel]);
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let cols: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
    out.write_columns("comparison.csv", &header, &cols)?;

    let mut report = String::new();
    let worst = points.iter().fold(0.0f64, |m, c| m.max(c.relative));
    let _ = writeln!(report, "max_relative_difference = {worst:e}");
    for c in points {
        let key = format!("x{}", c.x);
        let _ = writeln!(report, "{key}.peak = {:e}", c.peak);
        let _ = writeln!(report, "{key}.max_abs_diff = {:e}", c.max_abs_diff);
        let _ = writeln!(report, "{key}.relative = {:e}", c.relative);
    }
    out.write_text("comparison.txt", &report)?;
    out.manifest.set("max_relative_difference", format!("{worst:e}"));
    Ok(())
}
