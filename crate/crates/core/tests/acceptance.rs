//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and a
//! summary. With `--strict` the process exits non-zero if any criterion
//! fails; without it the verdicts are reported but do not fail the build.
//!
//! ```text
//! cargo test --release --test acceptance               # all criteria
//! cargo test --release --test acceptance -- 3 7        # a subset
//! cargo test --release --test acceptance -- --strict   # gate on the verdicts
//! ```

use std::process::ExitCode;
use std::time::Instant;

use hydrosem::analysis::{moving_average, onset_time, Receiver};
use hydrosem::scenario::config::{DomainConfig, StratificationConfig, TopographyConfig};
use hydrosem::scenario::presets::{sim3_lloyd_geometry, SIM3_RANGE_OFFSET, SIM3_RECEIVERS, SIM3_SOURCE_X};
use hydrosem::scenario::{preset, run_scenario, FormulationChoice, RunOptions, RunReport, ScenarioConfig};
use hydrosem::solver::{Formulation, LateralBoundary};
use hydrosem::verify::{self, barotropic_psi_ratio, energy_drift, green_identity_sweep, round_sig};
use hydrosem::analysis::lloyd_bandwidth;

// Green identity
const GREEN_TOL: f64 = 1e-10;
const GREEN_TRIALS: usize = 100;
const GREEN_BUDGET_S: f64 = 10.0;
// Energy conservation
const ENERGY_TOL: f64 = 1e-8;
const ENERGY_STEPS: usize = 2000;
const ENERGY_BUDGET_S: f64 = 120.0;
// Formulation equivalence
const EQUIVALENCE_TOL: f64 = 0.05;
const EQUIVALENCE_BUDGET_S: f64 = 300.0;
// Arrival times
const ONSET_FRACTION: f64 = 0.01;
const ACOUSTIC_WINDOW: (f64, f64) = (18.0, 28.0);
const TSUNAMI_WINDOW: (f64, f64) = (260.0, 340.0);
const ARRIVAL_BUDGET_S: f64 = 900.0;
const SOUND_SPEED: f64 = 1500.0;
const LONG_WAVE_SPEED: f64 = 121.0;
const OCEAN_DEPTH: f64 = 1500.0;
/// Three passes of a box filter twice the acoustic cutoff period `4H/c`
/// long separate the tsunami from the acoustic ringing: the filter has
/// nulls at half the cutoff frequency and at the cutoff itself.
const TSUNAMI_SMOOTHING_S: f64 = 2.0 * 4.0 * OCEAN_DEPTH / SOUND_SPEED;
const TSUNAMI_SMOOTHING_PASSES: usize = 3;
// Barotropic reduction
const PSI_TOL: f64 = 1e-12;
// Remainder scaling
const REMAINDER_RATIO: (f64, f64) = (80.0, 120.0);
const REMAINDER_BUDGET_S: f64 = 300.0;
// Lloyd theory
const LLOYD_TABLE_SIG_FIGS: i32 = 2;
// Lloyd measurement
const DEEP_BAND: (f64, f64) = (1.5, 2.5);
const SHALLOW_BAND: (f64, f64) = (4.0, 6.0);
const LLOYD_BUDGET_S: f64 = 900.0;
// Standalone suites
const VERIFY_BUDGET_S: f64 = 300.0;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn within(v: f64, (lo, hi): (f64, f64)) -> bool {
    v >= lo && v <= hi
}

fn budget(start: Instant, limit: f64) -> (bool, String) {
    let s = start.elapsed().as_secs_f64();
    (s < limit, format!("{s:.1} s of {limit:.0} s"))
}

fn main() -> ExitCode {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(usize, &str, fn() -> Verdict); 9] = [
        (1, "discrete Green identity", criterion_1),
        (2, "energy conservation", criterion_2),
        (3, "formulation equivalence", criterion_3),
        (4, "arrival times", criterion_4),
        (5, "barotropic reduction", criterion_5),
        (6, "remainder N² scaling", criterion_6),
        (7, "Lloyd theory", criterion_7),
        (8, "Lloyd measurement", criterion_8),
        (9, "standalone property suites", criterion_9),
    ];
    let strict = std::env::args().any(|a| a == "--strict");
    let (mut run_count, mut failures) = (0, 0);
    for (k, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&k) {
            continue;
        }
        let v = run();
        run_count += 1;
        failures += usize::from(!v.passed);
        println!("{} criterion {k} ({name}): {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("{} of {run_count} criteria passed", run_count - failures);
    if strict && failures > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    match green_identity_sweep(GREEN_TRIALS) {
        Ok(cases) => {
            let worst = cases.iter().map(|c| c.residual).fold(0.0, f64::max);
            let largest = cases.iter().map(|c| c.disc).max_by_key(|d| d.nx * d.nz * d.px * d.pz).unwrap();
            let (fast, time) = budget(start, GREEN_BUDGET_S);
            verdict(
                worst < GREEN_TOL && largest.nx == 8 && largest.nz == 4 && largest.pz == 6 && fast,
                format!(
                    "max residual {worst:.2e} < {GREEN_TOL:e} over {} meshes up to 8×4, orders ≤ 6, {GREEN_TRIALS} trials; {time}",
                    cases.len()
                ),
            )
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for f in [Formulation::Velocity, Formulation::Potential] {
        match energy_drift(f, ENERGY_STEPS) {
            Ok(d) => {
                ok &= d.reference > 0.0 && d.max_relative <= ENERGY_TOL && d.steps_after >= ENERGY_STEPS;
                parts.push(format!("{} drift {:.2e} over {} steps after t = {} s", f.name(), d.max_relative, d.steps_after, d.decay_time));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{}: {e}", f.name()));
            }
        }
    }
    let (fast, time) = budget(start, ENERGY_BUDGET_S);
    verdict(ok && fast, format!("{} (tolerance {ENERGY_TOL:e}); {time}", parts.join("; ")))
}

/// Earthquake scenario scaled to a 30 km basin. The uplift is centered on
/// the left wall, which mirrors it into a 30 km wide source; the probe at
/// 15 km sits above its edge.
fn scaled_sim1() -> ScenarioConfig {
    let mut cfg = preset("sim1").expect("sim1 preset");
    cfg.name = "sim1_scaled".into();
    cfg.domain.x_min = 0.0;
    cfg.domain.x_max = 30_000.0;
    cfg.discretization.nx = 20;
    cfg.discretization.nz = 6;
    cfg.discretization.px = 3;
    cfg.discretization.pz = 3;
    cfg.run.t_end = 50.0;
    cfg.run.formulation = FormulationChoice::Both;
    cfg.run.lateral = LateralBoundary::Rigid;
    cfg.output.surface_points = vec![15_000.0];
    cfg.output.record_every = 1;
    cfg
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let report = match run_scenario(&scaled_sim1(), &RunOptions::default()) {
        Ok(r) => r,
        Err(e) => return verdict(false, e.to_string()),
    };
    let Some(c) = report.comparison.iter().find(|c| c.x == 15_000.0) else {
        return verdict(false, "no comparison at x = 15 km".into());
    };
    let (fast, time) = budget(start, EQUIVALENCE_BUDGET_S);
    verdict(
        c.relative < EQUIVALENCE_TOL && c.peak > 0.0 && fast,
        format!(
            "max |Δη| at x = 15 km is {:.3e} m = {:.2e} of the {:.3} m peak (limit {EQUIVALENCE_TOL}); {time}",
            c.max_abs_diff, c.relative, c.peak
        ),
    )
}

/// Full-width earthquake at reduced order: `scale = 1` is the 500 km
/// domain observed at 50 km; `scale = 0.5` halves the domain, the duration
/// and the distance from the uplift edge to the probe.
fn arrival_config(scale: f64) -> ScenarioConfig {
    let mut cfg = preset("sim1").expect("sim1 preset");
    let edge = 15_000.0;
    cfg.name = format!("sim1_arrivals_{scale}");
    cfg.domain.x_min = -250_000.0 * scale;
    cfg.domain.x_max = 250_000.0 * scale;
    cfg.discretization.nx = (400.0 * scale).round() as usize;
    cfg.run.t_end = 500.0 * scale;
    cfg.output.surface_points = vec![edge + (50_000.0 - edge) * scale];
    cfg.output.record_every = 5;
    cfg.output.energy = false;
    cfg
}

fn onsets(trace: &Receiver) -> (Option<f64>, Option<f64>) {
    let width = (TSUNAMI_SMOOTHING_S / trace.dt_record()).round() as usize;
    let mut tsunami = trace.samples.clone();
    for _ in 0..TSUNAMI_SMOOTHING_PASSES {
        tsunami = moving_average(&tsunami, width);
    }
    let acoustic: Vec<f64> = trace.samples.iter().zip(&tsunami).map(|(s, t)| s - t).collect();
    (
        onset_time(&trace.times, &acoustic, ONSET_FRACTION),
        onset_time(&trace.times, &tsunami, ONSET_FRACTION),
    )
}

fn criterion_4() -> Verdict {
    let start = Instant::now();
    // project the cost of the full run from a short one
    let full = arrival_config(1.0);
    let probe_steps = 200;
    let projected = match run_scenario(&full, &RunOptions { out_dir: None, steps: Some(probe_steps) }) {
        Ok(r) => r.runs[0].loop_seconds / probe_steps as f64 * (full.run.t_end / r.dt).ceil(),
        Err(e) => return verdict(false, e.to_string()),
    };
    let scale = if projected <= ARRIVAL_BUDGET_S { 1.0 } else { 0.5 };
    let cfg = arrival_config(scale);
    let report = match run_scenario(&cfg, &RunOptions::default()) {
        Ok(r) => r,
        Err(e) => return verdict(false, e.to_string()),
    };
    let trace = &report.runs[0].surface[0];
    // onsets on the source clock: the scenario delays the source so that it
    // starts from rest, which is not part of the travel time
    let (acoustic, tsunami) = onsets(trace);
    let delay = cfg.source.delay;
    let (acoustic, tsunami) = (acoustic.map(|t| t - delay), tsunami.map(|t| t - delay));
    // expected windows scale with the travel distance from the uplift edge
    let acoustic_window = (ACOUSTIC_WINDOW.0 * scale, ACOUSTIC_WINDOW.1 * scale);
    let tsunami_window = (TSUNAMI_WINDOW.0 * scale, TSUNAMI_WINDOW.1 * scale);
    let distance = cfg.output.surface_points[0] - 15_000.0;
    let ok = acoustic.is_some_and(|t| within(t, acoustic_window)) && tsunami.is_some_and(|t| within(t, tsunami_window));
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        ok,
        format!(
            "{} (full run projected at {projected:.0} s): probe {:.1} km from the uplift edge, acoustic onset {} s in [{}, {}] \
             (d/c0 = {:.1} s), tsunami onset {} s in [{}, {}] (d/√(gH) = {:.0} s); {elapsed:.0} s",
            if scale == 1.0 { "500 km domain" } else { "halved domain" },
            distance / 1000.0,
            fmt_opt(acoustic),
            acoustic_window.0,
            acoustic_window.1,
            distance / SOUND_SPEED,
            fmt_opt(tsunami),
            tsunami_window.0,
            tsunami_window.1,
            distance / LONG_WAVE_SPEED,
        ),
    )
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("none".into(), |t| format!("{t:.1}"))
}

/// Dipole scenario at order 4 with the given buoyancy frequency.
fn scaled_sim2(n: f64) -> ScenarioConfig {
    let mut cfg = preset("sim2").expect("sim2 preset");
    cfg.name = format!("sim2_n{n}");
    cfg.discretization.nx = 50;
    cfg.discretization.nz = 5;
    cfg.discretization.px = 4;
    cfg.discretization.pz = 4;
    if let StratificationConfig::ConstantN { n: value, .. } = &mut cfg.stratification {
        *value = n;
    }
    cfg.output.record_every = 10;
    cfg.output.remainder_every = 10;
    cfg
}

fn criterion_5() -> Verdict {
    let direct = barotropic_psi_ratio(600);
    let mut cfg = scaled_sim2(0.0);
    cfg.run.t_end = 8.0;
    let scenario = run_scenario(&cfg, &RunOptions::default());
    match (direct, scenario) {
        (Ok(a), Ok(r)) => {
            let run = r.run(Formulation::Potential).expect("potential run");
            let b = run.psi_ratio_max.unwrap_or(f64::INFINITY);
            let remainder = run.remainder.as_ref().map_or(f64::INFINITY, |s| s.peak.iter().fold(0.0, |m: f64, v| m.max(*v)));
            verdict(
                a < PSI_TOL && b < PSI_TOL && remainder == 0.0,
                format!(
                    "max ‖ψ‖/‖φ‖ = {a:.1e} (bumpy seabed, 600 steps) and {b:.1e} (dipole scenario, {} steps), limit {PSI_TOL:e}; peak |U_r| = {remainder:.1e}",
                    r.steps
                ),
            )
        }
        (Err(e), _) | (_, Err(e)) => verdict(false, e.to_string()),
    }
}

fn peak_remainder(report: &RunReport) -> f64 {
    report
        .run(Formulation::Potential)
        .and_then(|r| r.remainder.as_ref())
        .map_or(0.0, |s| s.peak.iter().fold(0.0, |m: f64, v| m.max(*v)))
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let runs: Result<Vec<_>, _> = [1e-3, 1e-2].iter().map(|&n| run_scenario(&scaled_sim2(n), &RunOptions::default())).collect();
    let runs = match runs {
        Ok(r) => r,
        Err(e) => return verdict(false, e.to_string()),
    };
    let (weak, strong) = (peak_remainder(&runs[0]), peak_remainder(&runs[1]));
    let ratio = strong / weak;
    let (fast, time) = budget(start, REMAINDER_BUDGET_S);
    verdict(
        within(ratio, REMAINDER_RATIO) && fast,
        format!(
            "peak |U_r| {weak:.3e} (N = 1e-3) and {strong:.3e} m/s (N = 1e-2): ratio {ratio:.1} in [{}, {}]; {time}",
            REMAINDER_RATIO.0, REMAINDER_RATIO.1
        ),
    )
}

fn criterion_7() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (id, x, z, table) in SIM3_RECEIVERS {
        match lloyd_bandwidth(&sim3_lloyd_geometry(x, z)) {
            Ok(df) => {
                let shown = round_sig(df, LLOYD_TABLE_SIG_FIGS).round();
                ok &= shown == table;
                parts.push(format!("{id} {df:.2} → {shown} (table {table})"));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{id}: {e}"));
            }
        }
    }
    verdict(ok, format!("{} Hz; ranges measured from {SIM3_RANGE_OFFSET} m before the source center", parts.join(", ")))
}

/// Landslide scenario on a 40 km domain around the source, order 5.
fn scaled_sim3() -> ScenarioConfig {
    let mut cfg = preset("sim3").expect("sim3 preset");
    cfg.name = "sim3_scaled".into();
    cfg.domain = DomainConfig {
        x_min: SIM3_SOURCE_X - 20_000.0,
        x_max: SIM3_SOURCE_X + 20_000.0,
        height: cfg.domain.height,
        topography: TopographyConfig::Flat,
    };
    cfg.discretization.nx = 400;
    cfg.discretization.nz = 10;
    cfg.discretization.px = 5;
    cfg.discretization.pz = 5;
    cfg
}

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let cfg = scaled_sim3();
    let report = match run_scenario(&cfg, &RunOptions::default()) {
        Ok(r) => r,
        Err(e) => return verdict(false, e.to_string()),
    };
    let run = report.run(Formulation::Potential).expect("potential run");
    let measured = |id: &str| run.bandwidths.iter().find(|(r, _)| r == id).and_then(|(_, m)| m.value());
    let mut deep = Vec::new();
    let mut shallow = Vec::new();
    let mut parts = Vec::new();
    for r in &cfg.receivers {
        let v = measured(&r.id);
        parts.push(format!("{} {}", r.id, v.map_or("none".into(), |d| format!("{d:.2}"))));
        if r.z < 1000.0 {
            deep.push(v);
        } else {
            shallow.push(v);
        }
    }
    let all = |vs: &[Option<f64>], band| vs.iter().all(|v| v.is_some_and(|d| within(d, band)));
    let max_deep = deep.iter().flatten().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    let min_shallow = shallow.iter().flatten().fold(f64::INFINITY, |m, v| m.min(*v));
    let (fast, time) = budget(start, LLOYD_BUDGET_S);
    verdict(
        all(&deep, DEEP_BAND) && all(&shallow, SHALLOW_BAND) && min_shallow > max_deep && fast,
        format!(
            "{} Hz; deep (z = 300 m) in [{}, {}], shallow (z = 1350 m) in [{}, {}], shallow > deep; {time}",
            parts.join(", "),
            DEEP_BAND.0,
            DEEP_BAND.1,
            SHALLOW_BAND.0,
            SHALLOW_BAND.1
        ),
    )
}

fn criterion_9() -> Verdict {
    let start = Instant::now();
    let outcomes = verify::run_all(|_| {});
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    let (fast, time) = budget(start, VERIFY_BUDGET_S);
    verdict(
        failed.is_empty() && fast,
        format!(
            "{} of {} checks passed{}; {time}",
            outcomes.len() - failed.len(),
            outcomes.len(),
            if failed.is_empty() { String::new() } else { format!(", failed: {}", failed.join(", ")) }
        ),
    )
}
