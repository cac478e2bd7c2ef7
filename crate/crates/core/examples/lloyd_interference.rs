//! Free-surface image interference: theoretical bandwidths at the landslide
//! receivers and a bandwidth measurement on a synthetic two-path signal.

use hydrosem::analysis::{lloyd_bandwidth, measure_bandwidth, stft_spectrogram, LloydGeometry};
use hydrosem::scenario::presets::{sim3_lloyd_geometry, SIM3_RECEIVERS};
use hydrosem::sources::bandlimited_noise;

fn main() -> hydrosem::Result<()> {
    for (id, x, z, table) in SIM3_RECEIVERS {
        let g = sim3_lloyd_geometry(x, z);
        println!("{id}: sin θ = {:.4}, Δf = {:.2} Hz (tabulated {table})", g.sin_theta, lloyd_bandwidth(&g)?);
    }
    // direct path minus its surface image delayed by 2 z_s sin θ / c
    let g = LloydGeometry { source_depth: 1500.0, sound_speed: 1500.0, sin_theta: 0.25 };
    let dt = 1e-3;
    let delay = (2.0 * g.source_depth * g.sin_theta / g.sound_speed / dt).round() as usize;
    let direct = bandlimited_noise(40.0, 60.0, dt, 7)?;
    let received: Vec<f64> = (0..direct.len()).map(|k| direct[k] - if k >= delay { direct[k - delay] } else { 0.0 }).collect();
    let spec = stft_spectrogram(&received, dt, 4000, 2000)?;
    let m = measure_bandwidth(&spec, (5.0, 55.0), 20.0);
    println!("synthetic: theory {:.2} Hz, measured {:?}", lloyd_bandwidth(&g)?, m.value());
    Ok(())
}
