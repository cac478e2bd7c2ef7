//! Seabed source shapes and time functions, including the band-limited
//! noise of the landslide and its spectrum.

use hydrosem::analysis::stft_spectrogram;
use hydrosem::sources::{bandlimited_noise, eval_spatial, eval_temporal, SpatialShape, TemporalShape};

fn main() -> hydrosem::Result<()> {
    let quake = SpatialShape::SmoothedRect { amplitude: 1.0, s_x: 150.0, r_x: 30_000.0, x0: 0.0 };
    let dipole = SpatialShape::GaussianDerivative { a: 150.0, s_x: 4e-5, x0: 7500.0 };
    for x in [0.0, 14_990.0, 15_000.0, 15_010.0] {
        println!("uplift f({x}) = {:.6}", eval_spatial(&quake, x));
    }
    for x in [7300.0, 7400.0, 7500.0, 7600.0, 7700.0] {
        println!("dipole f({x}) = {:+.6}", eval_spatial(&dipole, x));
    }
    let ricker = TemporalShape::Ricker { s_t: 4.0, t0: 2.0 };
    let rise = TemporalShape::SmoothedRect { s_t: 4.0, t0: 2.0, r_t: 1.0 };
    for t in [0.0, 1.5, 2.0, 2.5, 3.0, 4.0] {
        println!("t = {t:3.1} s: Ricker {:+8.4}  smoothed rectangle {:.4}", eval_temporal(&ricker, t)?, eval_temporal(&rise, t)?);
    }
    let noise = bandlimited_noise(20.0, 16.384, 1e-3, 42)?;
    let spec = stft_spectrogram(&noise, 1e-3, 2048, 1024)?;
    let mean = |lo: f64, hi: f64| {
        let bins: Vec<usize> = (0..spec.freqs.len()).filter(|&k| spec.freqs[k] >= lo && spec.freqs[k] < hi).collect();
        let s: f64 = spec.magnitude.iter().flat_map(|m| bins.iter().map(move |&k| m[k])).sum();
        s / (bins.len() * spec.magnitude.len()) as f64
    };
    println!("noise |FFT|: 1–19 Hz {:.3e}, 25–100 Hz {:.3e}", mean(1.0, 19.0), mean(25.0, 100.0));
    Ok(())
}
