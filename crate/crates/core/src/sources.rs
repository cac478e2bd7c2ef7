//! Seabed forcing `u_b(x, t) = f(x) · g(t)`.
//!
//! Spatial shapes cover an uplift block (smoothed rectangle), an up/down
//! dipole (Gaussian derivative) and a localized emitter (Gaussian). Temporal
//! shapes cover a smoothed pulse, a Ricker wavelet and band-limited noise.
//! A source may carry a start delay so that `u_b` and its time derivative
//! vanish at `t = 0` to well below round-off of the peak.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::mesh::{sigmoid, Mesh};

/// Spatial profile `f(x)` (m/s when multiplied by a unit `g`).
#[derive(Debug, Clone, PartialEq)]
pub enum SpatialShape {
    /// `A (σ(s_x (x - x0 + r_x/2)) - σ(s_x (x - x0 - r_x/2)))`.
    SmoothedRect { amplitude: f64, s_x: f64, r_x: f64, x0: f64 },
    /// `-2 a s_x (x - x0) exp(-s_x (x - x0)²)`.
    GaussianDerivative { a: f64, s_x: f64, x0: f64 },
    /// `A exp(-s_x² (x - x0)²)`.
    Gaussian { amplitude: f64, s_x: f64, x0: f64 },
}

impl SpatialShape {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SpatialShape::SmoothedRect { amplitude, s_x, r_x, x0 } => {
                amplitude.is_finite() && s_x > 0.0 && r_x > 0.0 && x0.is_finite()
            }
            SpatialShape::GaussianDerivative { a, s_x, x0 } => a.is_finite() && s_x > 0.0 && x0.is_finite(),
            SpatialShape::Gaussian { amplitude, s_x, x0 } => amplitude.is_finite() && s_x > 0.0 && x0.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid spatial source shape {self:?}")))
        }
    }

    pub fn center(&self) -> f64 {
        match *self {
            SpatialShape::SmoothedRect { x0, .. }
            | SpatialShape::GaussianDerivative { x0, .. }
            | SpatialShape::Gaussian { x0, .. } => x0,
        }
    }
}

/// Evaluates `f(x)`.
pub fn eval_spatial(shape: &SpatialShape, x: f64) -> f64 {
    match *shape {
        SpatialShape::SmoothedRect { amplitude, s_x, r_x, x0 } => {
            let s = x - x0;
            amplitude * (sigmoid(s_x * (s + 0.5 * r_x)) - sigmoid(s_x * (s - 0.5 * r_x)))
        }
        SpatialShape::GaussianDerivative { a, s_x, x0 } => {
            let s = x - x0;
            -2.0 * a * s_x * s * (-s * s * s_x).exp()
        }
        SpatialShape::Gaussian { amplitude, s_x, x0 } => {
            let s = x - x0;
            amplitude * (-(s_x * s).powi(2)).exp()
        }
    }
}

/// Band-limited noise samples on a uniform grid starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSignal {
    pub f_max: f64,
    pub seed: u64,
    pub dt_sample: f64,
    pub samples: Vec<f64>,
}

impl NoiseSignal {
    pub fn new(f_max: f64, duration: f64, dt_sample: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            f_max,
            seed,
            dt_sample,
            samples: bandlimited_noise(f_max, duration, dt_sample, seed)?,
        })
    }

    pub fn duration(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.dt_sample
    }

    /// Linear interpolation; fails outside `[0, duration]`.
    pub fn at(&self, t: f64) -> Result<f64> {
        let d = self.duration();
        if !(t >= -1e-12 && t <= d * (1.0 + 1e-12)) {
            return Err(Error::OutOfRange(format!(
                "noise evaluated at t = {t} s outside [0, {d}] s"
            )));
        }
        let s = (t / self.dt_sample).max(0.0);
        let k = (s.floor() as usize).min(self.samples.len() - 2);
        let w = s - k as f64;
        Ok((1.0 - w) * self.samples[k] + w * self.samples[k + 1])
    }
}

/// Temporal profile `g(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum TemporalShape {
    /// `σ(s_t (t - t0)) - σ(s_t (t - t0 - r_t))`.
    SmoothedRect { s_t: f64, t0: f64, r_t: f64 },
    /// `(4 s_t² (t - t0)² - 2 s_t) exp(-s_t (t - t0)²)`.
    Ricker { s_t: f64, t0: f64 },
    /// Noise multiplied by a smoothed-rectangle envelope, which switches it
    /// on and off without a jump.
    Noise {
        signal: NoiseSignal,
        s_t: f64,
        t0: f64,
        r_t: f64,
    },
}

impl TemporalShape {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            TemporalShape::SmoothedRect { s_t, r_t, .. } => *s_t > 0.0 && *r_t > 0.0,
            TemporalShape::Ricker { s_t, .. } => *s_t > 0.0,
            TemporalShape::Noise { s_t, r_t, .. } => *s_t > 0.0 && *r_t > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid temporal source shape {self:?}")))
        }
    }
}

fn smoothed_rect_time(s_t: f64, t0: f64, r_t: f64, t: f64) -> f64 {
    sigmoid(s_t * (t - t0)) - sigmoid(s_t * (t - t0 - r_t))
}

/// Evaluates `g(t)`.
pub fn eval_temporal(shape: &TemporalShape, t: f64) -> Result<f64> {
    Ok(match shape {
        TemporalShape::SmoothedRect { s_t, t0, r_t } => smoothed_rect_time(*s_t, *t0, *r_t, t),
        TemporalShape::Ricker { s_t, t0 } => {
            let d2 = (t - t0) * (t - t0);
            (4.0 * s_t * s_t * d2 - 2.0 * s_t) * (-d2 * s_t).exp()
        }
        TemporalShape::Noise { signal, s_t, t0, r_t } => {
            let env = smoothed_rect_time(*s_t, *t0, *r_t, t);
            if env == 0.0 {
                0.0
            } else {
                env * signal.at(t)?
            }
        }
    })
}

/// Synthesizes noise with flat spectral magnitude on `(0, f_max]`, zero
/// elsewhere, and random phases; normalized to unit peak.
pub fn bandlimited_noise(f_max: f64, duration: f64, dt_sample: f64, seed: u64) -> Result<Vec<f64>> {
    if !(dt_sample > 0.0 && duration > dt_sample && f_max > 0.0) {
        return Err(Error::Config("noise needs f_max > 0 and duration > dt_sample > 0".into()));
    }
    if f_max >= 0.5 / dt_sample {
        return Err(Error::Config(format!(
            "f_max = {f_max} Hz is not below the Nyquist frequency {} Hz",
            0.5 / dt_sample
        )));
    }
    let n = (duration / dt_sample).round() as usize + 1;
    let df = 1.0 / (n as f64 * dt_sample);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = vec![Complex::new(0.0, 0.0); n];
    for k in 1..=(n - 1) / 2 {
        if k as f64 * df > f_max {
            break;
        }
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let c = Complex::from_polar(1.0, phase);
        spec[k] = c;
        spec[n - k] = c.conj();
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    let samples: Vec<f64> = spec.iter().map(|c| c.re).collect();
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::Config("noise band contains no frequency bin; lengthen the duration".into()));
    }
    Ok(samples.into_iter().map(|v| v / peak).collect())
}

/// Separable seabed source with an optional start delay.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    pub spatial: SpatialShape,
    pub temporal: TemporalShape,
    /// The temporal shape is evaluated at `t - delay`.
    pub delay: f64,
}

impl SourceModel {
    pub fn new(spatial: SpatialShape, temporal: TemporalShape) -> Self {
        Self {
            spatial,
            temporal,
            delay: 0.0,
        }
    }

    pub fn with_delay(mut self, delay: f64) -> Self {
        self.delay = delay;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.spatial.validate()?;
        self.temporal.validate()?;
        if !(self.delay >= 0.0) {
            return Err(Error::Config("source delay must be non-negative".into()));
        }
        Ok(())
    }

    /// `g(t - delay)`.
    pub fn time_factor(&self, t: f64) -> Result<f64> {
        eval_temporal(&self.temporal, t - self.delay)
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        Ok(eval_spatial(&self.spatial, x) * self.time_factor(t)?)
    }
}

/// Samples of `f` at seabed nodes, in registry order.
pub fn spatial_samples(source: &SourceModel, mesh: &Mesh) -> Vec<f64> {
    mesh.bottom_nodes()
        .iter()
        .map(|&i| eval_spatial(&source.spatial, mesh.node_coord(i)[0]))
        .collect()
}

/// `u_b(·, t)` at seabed nodes, in registry order.
pub fn bottom_forcing_vector(source: &SourceModel, mesh: &Mesh, t: f64) -> Result<Vec<f64>> {
    let g = source.time_factor(t)?;
    Ok(spatial_samples(source, mesh).into_iter().map(|f| f * g).collect())
}
