//! Built-in scenarios: earthquake-driven tsunami and acoustics, dipole
//! sources for the remainder study, a noisy landslide for surface-image
//! interference, and a step source under a realistic thermocline.

use crate::analysis::{LloydGeometry, Quantity};
use crate::error::{Error, Result};
use crate::mesh::DiscretizationSpec;
use crate::solver::{LateralBoundary, SpongeLayer};
use crate::sources::SpatialShape;
use crate::stratification::EquationOfState;

use super::config::*;

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 5] = ["sim1", "sim2", "sim2_topography", "sim3", "appendix_b"];

/// Sound speed shared by the constant-`N` presets (m/s).
pub const SOUND_SPEED: f64 = 1500.0;
/// Bottom density of the constant-`N` presets (kg/m³).
pub const RHO_BOTTOM: f64 = 1025.0;
const HEIGHT: f64 = 1500.0;

/// Horizontal position of the landslide center in `sim3`.
pub const SIM3_SOURCE_X: f64 = 75_000.0;
/// Offset between the landslide center and the origin of the tabulated
/// receiver ranges: receiver ranges are `table x − 0.3 km` from the center.
pub const SIM3_RANGE_OFFSET: f64 = 300.0;
/// Receivers of `sim3` as `(id, tabulated x, z)` in meters, with the
/// tabulated interference bandwidths in Hz.
pub const SIM3_RECEIVERS: [(&str, f64, f64, f64); 4] = [
    ("R1", 5000.0, 300.0, 2.0),
    ("R2", 8000.0, 300.0, 3.0),
    ("R3", 5000.0, 1350.0, 16.0),
    ("R4", 8000.0, 1350.0, 26.0),
];

/// Lloyd geometry of a `sim3` receiver given its tabulated coordinates:
/// the source sits on the flat seabed, the ray runs straight from the
/// source center to the receiver.
pub fn sim3_lloyd_geometry(table_x: f64, z: f64) -> LloydGeometry {
    LloydGeometry::from_positions([SIM3_RANGE_OFFSET, 0.0], [table_x, z], HEIGHT, SOUND_SPEED)
}

fn provenance(name: &str) -> &'static str {
    match name {
        "sim1" => {
            "Earthquake: smoothed-rectangle uplift 30 km wide (s_x = 150 1/m), rising over\n\
             1 s (t0 = 2 s, s_t = 4 1/s², r_t = 1 s), 1.5 km deep ocean, 1576.5 km domain,\n\
             Nx = 1051, Nz = 10, Px = 4, Pz = 5 (velocity formulation), 1000 s.\n\
             The source clock is delayed by 2.7 s so that u_b(0) is below 1e-8."
        }
        "sim2" => {
            "Dipole earthquake: Gaussian-derivative seabed motion (a = 150 m,\n\
             s_x = 4e-5 1/m², x0 = 7.5 km) with a Ricker time function (t0 = 2 s,\n\
             s_t = 4 1/s²), flat seabed, N = 0.001 1/s, 15 km × 1.5 km, Px = Pz = 8,\n\
             Nx = 100, Nz = 10, 1.5 km absorbing layers, potential formulation.\n\
             The source clock is delayed by 0.5 s so that u_b(0) is below 1e-8."
        }
        "sim2_topography" => {
            "As sim2 with seabed bumps z_b = b (1 + sin(k_x x)) × smoothed rectangle\n\
             (b = 300 m, k_x = 0.03 1/m, f_x = 0.07 1/m, r_x = 1.5 km) centered at\n\
             7.5 km, and N(z) from the synthetic thermocline of appendix_b."
        }
        "sim3" => {
            "Submarine landslide: Gaussian seabed velocity (A = 1 m/s, s_x = 0.07 1/m,\n\
             x0 = 75 km) driven by white noise band-limited to 20 Hz, 150 km × 1.5 km,\n\
             Px = Pz = 6, Nx = 600, Nz = 10, N = 0.001 1/s. Pressure receivers\n\
             R1..R4 at tabulated (x, z) = (5, 0.3), (8, 0.3), (5, 1.35), (8, 1.35) km;\n\
             tabulated ranges are measured from a point 0.3 km before the source\n\
             center, which reproduces the tabulated bandwidths 2, 3, 16, 26 Hz.\n\
             Noise is switched on by a smoothed step (s_t = 10 1/s², t0 = 2.5 s)."
        }
        "appendix_b" => {
            "Non-zero-mean source: sim2 dipole and topography with a smoothed-rectangle\n\
             time function (s_t = 20 1/s², t0 = 1 s, r_t = 1 s). N(z) comes from a\n\
             synthetic thermocline (2.5 °C at depth, 15 °C at the surface) through a\n\
             linear equation of state (ρ_ref = 1028 kg/m³, α = 2e-4 1/K,\n\
             κ = 4.4e-10 1/Pa, T_ref = 283.15 K)."
        }
        _ => "",
    }
}

fn constant_n(n: f64) -> StratificationConfig {
    StratificationConfig::ConstantN { rho_bottom: RHO_BOTTOM, sound_speed: SOUND_SPEED, n }
}

/// Synthetic thermocline in kelvin, `z` upward from the seabed.
pub fn thermocline() -> StratificationConfig {
    StratificationConfig::Temperature {
        profile: TemperatureSource::Inline {
            z: vec![0.0, 500.0, 1000.0, 1200.0, 1350.0, 1450.0, 1500.0],
            t: vec![275.65, 276.15, 277.15, 279.15, 283.15, 287.15, 288.15],
        },
        eos: EquationOfState::LinearCompressibility {
            rho_ref: 1028.0,
            thermal_expansion: 2e-4,
            compressibility: 4.4e-10,
            t_ref: 283.15,
        },
    }
}

fn sim2_topography() -> TopographyConfig {
    TopographyConfig::Bumps { b: 300.0, k_x: 0.03, f_x: 0.07, r_x: 1500.0, center: 7500.0 }
}

fn sim1() -> ScenarioConfig {
    let half = 1_576_500.0 / 2.0;
    ScenarioConfig {
        name: "sim1".into(),
        domain: DomainConfig { x_min: -half, x_max: half, height: HEIGHT, topography: TopographyConfig::Flat },
        discretization: DiscretizationSpec { nx: 1051, nz: 10, px: 4, pz: 5 },
        gravity: 9.81,
        p_atm: 101_325.0,
        stratification: constant_n(0.001),
        source: SourceConfig {
            spatial: SpatialShape::SmoothedRect { amplitude: 1.0, s_x: 150.0, r_x: 30_000.0, x0: 0.0 },
            temporal: TemporalConfig::SmoothedRect { s_t: 4.0, t0: 2.0, r_t: 1.0 },
            delay: 2.7,
        },
        run: RunConfig {
            formulation: FormulationChoice::Velocity,
            t_end: 1000.0,
            dt: None,
            safety: 0.95,
            lateral: LateralBoundary::Natural,
            recovery_cadence: 1,
            seed: 0,
        },
        sponge: None,
        receivers: Vec::new(),
        output: OutputConfig { surface_points: vec![50_000.0], record_every: 10, ..OutputConfig::default() },
    }
}

fn sim2() -> ScenarioConfig {
    ScenarioConfig {
        name: "sim2".into(),
        domain: DomainConfig { x_min: 0.0, x_max: 15_000.0, height: HEIGHT, topography: TopographyConfig::Flat },
        discretization: DiscretizationSpec { nx: 100, nz: 10, px: 8, pz: 8 },
        gravity: 9.81,
        p_atm: 101_325.0,
        stratification: constant_n(0.001),
        source: SourceConfig {
            spatial: SpatialShape::GaussianDerivative { a: 150.0, s_x: 4e-5, x0: 7500.0 },
            temporal: TemporalConfig::Ricker { s_t: 4.0, t0: 2.0 },
            delay: 0.5,
        },
        run: RunConfig {
            formulation: FormulationChoice::Potential,
            t_end: 20.0,
            dt: None,
            safety: 0.95,
            lateral: LateralBoundary::Natural,
            recovery_cadence: 1,
            seed: 0,
        },
        sponge: Some(SpongeLayer::both_sides(1500.0, 30.0)),
        receivers: Vec::new(),
        output: OutputConfig {
            surface_points: vec![7500.0],
            record_every: 10,
            remainder_every: 10,
            ..OutputConfig::default()
        },
    }
}

fn sim3() -> ScenarioConfig {
    let receivers = SIM3_RECEIVERS
        .iter()
        .map(|&(id, x, z, _)| ReceiverConfig {
            id: id.into(),
            x: SIM3_SOURCE_X + x - SIM3_RANGE_OFFSET,
            z,
            quantity: Quantity::PressureProxy,
        })
        .collect();
    let t_end = 60.0;
    ScenarioConfig {
        name: "sim3".into(),
        domain: DomainConfig { x_min: 0.0, x_max: 150_000.0, height: HEIGHT, topography: TopographyConfig::Flat },
        discretization: DiscretizationSpec { nx: 600, nz: 10, px: 6, pz: 6 },
        gravity: 9.81,
        p_atm: 101_325.0,
        stratification: constant_n(0.001),
        source: SourceConfig {
            spatial: SpatialShape::Gaussian { amplitude: 1.0, s_x: 0.07, x0: SIM3_SOURCE_X },
            temporal: TemporalConfig::Noise { f_max: 20.0, sample_dt: 1e-3, s_t: 10.0, t0: 2.5, r_t: 1e6 },
            delay: 0.0,
        },
        run: RunConfig {
            formulation: FormulationChoice::Potential,
            t_end,
            dt: None,
            safety: 0.95,
            lateral: LateralBoundary::Natural,
            recovery_cadence: 1,
            seed: 42,
        },
        sponge: Some(SpongeLayer::both_sides(5000.0, 10.0)),
        receivers,
        output: OutputConfig {
            record_every: 1,
            energy: false,
            spectrogram_window: 4.0,
            spectrogram_f_max: 20.0,
            bandwidth_window: Some((8.0, t_end)),
            ..OutputConfig::default()
        },
    }
}

fn appendix_b() -> ScenarioConfig {
    let mut cfg = sim2();
    cfg.name = "appendix_b".into();
    cfg.domain.topography = sim2_topography();
    cfg.stratification = thermocline();
    cfg.source.temporal = TemporalConfig::SmoothedRect { s_t: 20.0, t0: 1.0, r_t: 1.0 };
    cfg.source.delay = 0.0;
    cfg
}

/// A built-in scenario by name.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    match name {
        "sim1" => Ok(sim1()),
        "sim2" => Ok(sim2()),
        "sim2_topography" => {
            let mut cfg = sim2();
            cfg.name = "sim2_topography".into();
            cfg.domain.topography = sim2_topography();
            cfg.stratification = thermocline();
            Ok(cfg)
        }
        "sim3" => Ok(sim3()),
        "appendix_b" => Ok(appendix_b()),
        other => Err(Error::Config(format!(
            "unknown preset {other:?}; available: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// The preset as a scenario file, headed by its provenance in comments.
pub fn export_preset(name: &str) -> Result<String> {
    let cfg = preset(name)?;
    let mut out = String::new();
    for line in provenance(name).lines() {
        out.push_str("# ");
        out.push_str(line.trim_start());
        out.push('\n');
    }
    out.push('\n');
    out.push_str(&cfg.to_ini());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::lloyd_bandwidth;

    #[test]
    fn sim1_matches_table() {
        let cfg = preset("sim1").unwrap();
        assert_eq!(cfg.domain.height, 1500.0);
        assert_eq!(
            cfg.source.spatial,
            SpatialShape::SmoothedRect { amplitude: 1.0, s_x: 150.0, r_x: 30_000.0, x0: 0.0 }
        );
        assert_eq!(cfg.source.temporal, TemporalConfig::SmoothedRect { s_t: 4.0, t0: 2.0, r_t: 1.0 });
    }

    #[test]
    fn exports_round_trip() {
        for name in PRESET_NAMES {
            let text = export_preset(name).unwrap();
            assert!(text.starts_with("# "), "{name}");
            assert_eq!(parse_config(&text).unwrap(), preset(name).unwrap(), "{name}");
        }
    }

    #[test]
    fn unknown_preset_lists_names() {
        let err = preset("sim9").unwrap_err().to_string();
        assert!(err.contains("appendix_b"));
    }

    #[test]
    fn lloyd_mapping_reproduces_table() {
        for (id, x, z, expected) in SIM3_RECEIVERS {
            let df = lloyd_bandwidth(&sim3_lloyd_geometry(x, z)).unwrap();
            let two_sf = format!("{:.1e}", df).parse::<f64>().unwrap();
            assert_eq!(two_sf.round(), expected, "{id}: {df}");
        }
    }
}
