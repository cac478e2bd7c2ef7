//! Post-processing: receivers, spectrograms, Lloyd-mirror theory, bandwidth
//! measurement and the rotational-remainder diagnostics.

use std::io::Write;
use std::path::{Path, PathBuf};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::assembly::{element_divergence, AssembledPotentialSystem, NodalCoefficients};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::solver::Stepper;

/// Recorded quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    VerticalDisplacement,
    VerticalVelocity,
    /// `ρ0 c0² (∇·U - (g/c0²) U_z)`, the linearized pressure perturbation
    /// rate carried by the first component of `G̃U`.
    PressureProxy,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::VerticalDisplacement => "vertical_displacement",
            Quantity::VerticalVelocity => "vertical_velocity",
            Quantity::PressureProxy => "pressure_proxy",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Quantity::VerticalDisplacement, Quantity::VerticalVelocity, Quantity::PressureProxy]
            .into_iter()
            .find(|q| q.name() == s)
    }
}

/// A point probe with a precomputed interpolation stencil.
#[derive(Debug, Clone)]
pub struct Receiver {
    pub id: String,
    pub position: [f64; 2],
    pub quantity: Quantity,
    pub times: Vec<f64>,
    pub samples: Vec<f64>,
    /// `(vector DoF, weight)`; the sample is `Σ weight · field[DoF]`.
    stencil: Vec<(usize, f64)>,
}

impl Receiver {
    /// Places a receiver; points outside the mesh are a configuration error.
    pub fn new(id: &str, position: [f64; 2], quantity: Quantity, mesh: &Mesh, coef: &NodalCoefficients) -> Result<Self> {
        let (e, xi, eta) = mesh
            .locate(position[0], position[1])
            .map_err(|err| Error::Config(format!("receiver {id}: {err}")))?;
        let lx = mesh.rule_x().lagrange_at(xi);
        let lz = mesh.rule_z().lagrange_at(eta);
        let npx = lx.len();
        let nodes = mesh.element_nodes(e);
        let n = mesh.num_nodes();
        let weight = |l: usize| lx[l % npx] * lz[l / npx];
        let mut stencil = Vec::new();
        match quantity {
            Quantity::VerticalDisplacement | Quantity::VerticalVelocity => {
                for (l, &i) in nodes.iter().enumerate() {
                    let w = weight(l);
                    if w != 0.0 {
                        stencil.push((n + i, w));
                    }
                }
            }
            Quantity::PressureProxy => {
                let nloc = nodes.len();
                let (ax, az) = element_divergence(mesh, coef, e);
                let mut cx = vec![0.0; nloc];
                let mut cz = vec![0.0; nloc];
                for (l, &i) in nodes.iter().enumerate() {
                    let w = weight(l) * coef.rho[i] * coef.c2[i];
                    if w == 0.0 {
                        continue;
                    }
                    for m in 0..nloc {
                        cx[m] += w * ax[l * nloc + m];
                        cz[m] += w * az[l * nloc + m];
                    }
                }
                for (m, &i) in nodes.iter().enumerate() {
                    if cx[m] != 0.0 {
                        stencil.push((i, cx[m]));
                    }
                    if cz[m] != 0.0 {
                        stencil.push((n + i, cz[m]));
                    }
                }
            }
        }
        Ok(Self {
            id: id.to_string(),
            position,
            quantity,
            times: Vec::new(),
            samples: Vec::new(),
            stencil,
        })
    }

    /// Interpolates the receiver quantity from component-blocked fields.
    pub fn evaluate(&self, velocity: &[f64], displacement: &[f64]) -> f64 {
        let field = match self.quantity {
            Quantity::VerticalDisplacement => displacement,
            _ => velocity,
        };
        self.stencil.iter().map(|&(k, w)| w * field[k]).sum()
    }

    /// Appends the current sample of `state`.
    pub fn record(&mut self, state: &dyn Stepper) {
        self.times.push(state.time());
        self.samples.push(self.evaluate(state.velocity(), state.displacement()));
    }

    /// Uniform sample spacing (zero with fewer than two samples).
    pub fn dt_record(&self) -> f64 {
        match self.times.as_slice() {
            [a, b, ..] => b - a,
            _ => 0.0,
        }
    }

    /// Writes `time_s,<quantity>`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_columns(path, &["time_s", self.quantity.name()], &[&self.times, &self.samples])
    }
}

/// Records every receiver.
pub fn record(receivers: &mut [Receiver], state: &dyn Stepper) {
    for r in receivers {
        r.record(state);
    }
}

/// Writes equal-length columns as CSV with a header.
pub fn write_columns(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    let rows = columns.iter().map(|c| c.len()).min().unwrap_or(0);
    for r in 0..rows {
        let line: Vec<String> = columns.iter().map(|c| format!("{:e}", c[r])).collect();
        writeln!(w, "{}", line.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a numeric CSV with one header line; returns header and columns.
pub fn read_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Parse { path: path.into(), line: 1, message: "empty file".into() })?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut cols = vec![Vec::new(); header.len()];
    for (k, line) in lines.enumerate() {
        let values: Vec<&str> = line.split(',').collect();
        if values.len() != header.len() {
            return Err(Error::Parse {
                path: path.into(),
                line: k + 2,
                message: format!("expected {} fields, found {}", header.len(), values.len()),
            });
        }
        for (c, v) in cols.iter_mut().zip(values) {
            c.push(v.trim().parse().map_err(|_| Error::Parse {
                path: path.into(),
                line: k + 2,
                message: format!("not a number: {v}"),
            })?);
        }
    }
    Ok((header, cols))
}

/// Short-time Fourier magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    /// Window centers.
    pub times: Vec<f64>,
    pub freqs: Vec<f64>,
    /// `magnitude[frame][bin]`.
    pub magnitude: Vec<Vec<f64>>,
    pub window_len: usize,
    pub hop: usize,
}

impl Spectrogram {
    /// Writes `<stem>.csv` (frames × bins), `<stem>_times.csv` and
    /// `<stem>_freqs.csv`; returns the three paths.
    pub fn write_csv(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        let matrix = dir.join(format!("{stem}.csv"));
        let file = std::fs::File::create(&matrix).map_err(|e| Error::io(&matrix, e))?;
        let mut w = std::io::BufWriter::new(file);
        for row in &self.magnitude {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", line.join(",")).map_err(|e| Error::io(&matrix, e))?;
        }
        w.flush().map_err(|e| Error::io(&matrix, e))?;
        let times = dir.join(format!("{stem}_times.csv"));
        write_columns(&times, &["time_s"], &[&self.times])?;
        let freqs = dir.join(format!("{stem}_freqs.csv"));
        write_columns(&freqs, &["freq_hz"], &[&self.freqs])?;
        Ok(vec![matrix, times, freqs])
    }
}

/// Hann-windowed STFT magnitude, frames every `hop` samples.
pub fn stft_spectrogram(samples: &[f64], dt_record: f64, window_len: usize, hop: usize) -> Result<Spectrogram> {
    if window_len < 2 || hop == 0 || window_len > samples.len() || !(dt_record > 0.0) {
        return Err(Error::Config(format!(
            "degenerate STFT: window {window_len}, hop {hop}, {} samples, dt {dt_record}",
            samples.len()
        )));
    }
    let window: Vec<f64> = (0..window_len)
        .map(|k| 0.5 - 0.5 * (std::f64::consts::TAU * k as f64 / window_len as f64).cos())
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(window_len);
    let bins = window_len / 2 + 1;
    let freqs = (0..bins).map(|k| k as f64 / (window_len as f64 * dt_record)).collect();
    let mut times = Vec::new();
    let mut magnitude = Vec::new();
    let mut buf = vec![Complex::new(0.0, 0.0); window_len];
    let mut start = 0;
    while start + window_len <= samples.len() {
        for k in 0..window_len {
            buf[k] = Complex::new(samples[start + k] * window[k], 0.0);
        }
        fft.process(&mut buf);
        magnitude.push(buf[..bins].iter().map(|c| c.norm()).collect());
        times.push((start as f64 + 0.5 * window_len as f64) * dt_record);
        start += hop;
    }
    Ok(Spectrogram {
        times,
        freqs,
        magnitude,
        window_len,
        hop,
    })
}

/// Free-surface image interference at one receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LloydGeometry {
    /// Source depth below the surface (m).
    pub source_depth: f64,
    pub sound_speed: f64,
    /// Sine of the declination angle of the ray reaching the receiver.
    pub sin_theta: f64,
}

impl LloydGeometry {
    /// Maps positions to a geometry: `z_s = surface - z_source`, and `θ` is
    /// the angle below horizontal of the straight segment from the source
    /// center to the receiver, `sin θ = d / √(r² + d²)` with `d` the receiver
    /// depth and `r` the horizontal offset.
    pub fn from_positions(source: [f64; 2], receiver: [f64; 2], surface: f64, sound_speed: f64) -> Self {
        let depth = surface - receiver[1];
        let r = receiver[0] - source[0];
        Self {
            source_depth: surface - source[1],
            sound_speed,
            sin_theta: depth / r.hypot(depth),
        }
    }
}

/// `Δf = c / (2 z_s sin θ)`.
pub fn lloyd_bandwidth(geom: &LloydGeometry) -> Result<f64> {
    if !(geom.sin_theta > 0.0) {
        return Err(Error::OutOfRange(format!(
            "grazing angle (sin θ = {}): the interference bandwidth diverges",
            geom.sin_theta
        )));
    }
    if !(geom.source_depth > 0.0) {
        return Err(Error::OutOfRange("source depth must be positive".into()));
    }
    Ok(geom.sound_speed / (2.0 * geom.source_depth * geom.sin_theta))
}

/// Angles of pressure minima, `sin θ = (m - 1) π / (k z_s)` for `m = 1, 2, …`
/// while `sin θ ≤ 1`.
pub fn interference_minima(source_depth: f64, wavenumber: f64) -> Vec<f64> {
    let step = std::f64::consts::PI / (wavenumber * source_depth);
    (0..)
        .map(|m| m as f64 * step)
        .take_while(|s| *s <= 1.0 + 1e-12)
        .collect()
}

/// Frequencies of pressure minima up to `f_max` at a fixed geometry.
pub fn interference_frequencies(geom: &LloydGeometry, f_max: f64) -> Result<Vec<f64>> {
    let df = lloyd_bandwidth(geom)?;
    Ok((0..).map(|m| m as f64 * df).take_while(|f| *f <= f_max).collect())
}

/// Outcome of a bandwidth measurement.
#[derive(Debug, Clone, PartialEq)]
pub enum BandwidthMeasurement {
    Measured { delta_f: f64, minima: Vec<f64> },
    Failed { reason: String },
}

impl BandwidthMeasurement {
    pub fn value(&self) -> Option<f64> {
        match self {
            BandwidthMeasurement::Measured { delta_f, .. } => Some(*delta_f),
            BandwidthMeasurement::Failed { .. } => None,
        }
    }
}

/// Fraction of the spectrum peak a minimum must dip below its neighbours.
pub const MINIMUM_PROMINENCE: f64 = 0.1;

/// Local minima of `values` whose prominence reaches `threshold`.
pub fn prominent_minima(values: &[f64], threshold: f64) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    for i in 1..n.saturating_sub(1) {
        let v = values[i];
        if !(v < values[i - 1] && v <= values[i + 1]) {
            continue;
        }
        let mut left = v;
        for &u in values[..i].iter().rev() {
            if u < v {
                break;
            }
            left = left.max(u);
        }
        let mut right = v;
        for &u in &values[i + 1..] {
            if u < v {
                break;
            }
            right = right.max(u);
        }
        if left.min(right) - v >= threshold {
            out.push(i);
        }
    }
    out
}

/// Median spacing of prominent minima in the time-averaged spectrum over
/// `t_window`, searched below `f_limit`.
pub fn measure_bandwidth(spec: &Spectrogram, t_window: (f64, f64), f_limit: f64) -> BandwidthMeasurement {
    let frames: Vec<&Vec<f64>> = spec
        .times
        .iter()
        .zip(&spec.magnitude)
        .filter(|(t, _)| **t >= t_window.0 && **t <= t_window.1)
        .map(|(_, m)| m)
        .collect();
    if frames.is_empty() {
        return BandwidthMeasurement::Failed {
            reason: "no frame inside the time window".into(),
        };
    }
    let bins = spec.freqs.iter().take_while(|f| **f <= f_limit).count();
    let mean: Vec<f64> = (0..bins)
        .map(|k| frames.iter().map(|m| m[k]).sum::<f64>() / frames.len() as f64)
        .collect();
    let peak = mean.iter().fold(0.0f64, |a, b| a.max(*b));
    if peak == 0.0 {
        return BandwidthMeasurement::Failed {
            reason: "spectrum is identically zero".into(),
        };
    }
    let minima: Vec<f64> = prominent_minima(&mean, MINIMUM_PROMINENCE * peak)
        .into_iter()
        .map(|k| spec.freqs[k])
        .collect();
    if minima.len() < 2 {
        return BandwidthMeasurement::Failed {
            reason: format!("found {} prominent minima, need at least 2", minima.len()),
        };
    }
    let mut gaps: Vec<f64> = minima.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(f64::total_cmp);
    let m = gaps.len();
    let delta_f = if m % 2 == 1 {
        gaps[m / 2]
    } else {
        0.5 * (gaps[m / 2 - 1] + gaps[m / 2])
    };
    BandwidthMeasurement::Measured { delta_f, minima }
}

/// First time at which `|s|` reaches `fraction` of its peak.
pub fn onset_time(times: &[f64], samples: &[f64], fraction: f64) -> Option<f64> {
    let peak = samples.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if peak == 0.0 {
        return None;
    }
    samples
        .iter()
        .position(|s| s.abs() >= fraction * peak)
        .map(|k| times[k])
}

/// Centered moving average over `width` samples (shrinking at the ends).
pub fn moving_average(samples: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    let mut prefix = vec![0.0; samples.len() + 1];
    for (k, s) in samples.iter().enumerate() {
        prefix[k + 1] = prefix[k] + s;
    }
    (0..samples.len())
        .map(|k| {
            let lo = k.saturating_sub(half);
            let hi = (k + half + 1).min(samples.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Velocity decomposition `U = -∇φ + U_r e_z` at nodes.
#[derive(Debug, Clone)]
pub struct RemainderField {
    /// `N (ψ + (N/g) φ)`.
    pub u_r: Vec<f64>,
    /// `|∇φ|`, mass-weighted average of element gradients at shared nodes.
    pub grad_phi: Vec<f64>,
    /// `|U|` from velocity recovery.
    pub speed: Vec<f64>,
    /// `|U_r| / |U|`, `None` where `|U|` is below `1e-14 ×` its peak.
    pub ratio: Vec<Option<f64>>,
}

impl RemainderField {
    pub fn peak_remainder(&self) -> f64 {
        self.u_r.iter().fold(0.0f64, |a, b| a.max(b.abs()))
    }
}

/// Decomposes the recovered velocity of a potential state.
pub fn remainder_diagnostics(sys: &AssembledPotentialSystem, phi: &[f64], psi: &[f64]) -> RemainderField {
    let n = sys.num_nodes;
    let coef = &sys.coefficients;
    let u = sys.recover_velocity(phi, psi);
    // B_φ φ / M_U = (-∂xφ, -(∂zφ - N²/g φ)) averaged over elements
    let bphi = sys.recover_phi.mul_vec(phi);
    let mut u_r = Vec::with_capacity(n);
    let mut grad_phi = Vec::with_capacity(n);
    let mut speed = Vec::with_capacity(n);
    for i in 0..n {
        let gx = -bphi[i] / sys.mass_u[i];
        let gz = -bphi[n + i] / sys.mass_u[n + i] + coef.n2[i] / coef.g * phi[i];
        grad_phi.push(gx.hypot(gz));
        u_r.push(coef.n[i] * (psi[i] + coef.n[i] / coef.g * phi[i]));
        speed.push(u[i].hypot(u[n + i]));
    }
    let floor = 1e-14 * speed.iter().fold(0.0f64, |a, b| a.max(*b));
    let ratio = u_r
        .iter()
        .zip(&speed)
        .map(|(r, s)| (*s > floor && *s > 0.0).then(|| r.abs() / s))
        .collect();
    RemainderField {
        u_r,
        grad_phi,
        speed,
        ratio,
    }
}

/// Running per-node time average of the remainder ratio and peak `|U_r|`.
#[derive(Debug, Clone, Default)]
pub struct RemainderAverage {
    sum: Vec<f64>,
    count: Vec<usize>,
    pub peak_remainder: f64,
    pub samples: usize,
}

impl RemainderAverage {
    pub fn update(&mut self, field: &RemainderField) {
        if self.sum.is_empty() {
            self.sum = vec![0.0; field.ratio.len()];
            self.count = vec![0; field.ratio.len()];
        }
        for (k, r) in field.ratio.iter().enumerate() {
            if let Some(r) = r {
                self.sum[k] += r;
                self.count[k] += 1;
            }
        }
        self.peak_remainder = self.peak_remainder.max(field.peak_remainder());
        self.samples += 1;
    }

    pub fn mean(&self) -> Vec<Option<f64>> {
        self.sum
            .iter()
            .zip(&self.count)
            .map(|(s, &c)| (c > 0).then(|| s / c as f64))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_potential;
    use crate::mesh::{build_mesh, DiscretizationSpec, DomainSpec, TopographySpec};
    use crate::stratification::{constant_n_profile, PhysicalConstants};
    use approx::assert_abs_diff_eq;

    fn mesh() -> Mesh {
        let domain = DomainSpec { x_min: 0.0, x_max: 4000.0, height: 1000.0, topography: TopographySpec::Flat };
        build_mesh(&domain, &DiscretizationSpec { nx: 2, nz: 2, px: 3, pz: 3 }).unwrap()
    }

    fn coef(mesh: &Mesh, n: f64) -> NodalCoefficients {
        let p = constant_n_profile(1025.0, 1500.0, n, 1000.0, &PhysicalConstants::default()).unwrap();
        NodalCoefficients::sample(mesh, &p)
    }

    #[test]
    fn receiver_interpolation() {
        let mesh = mesh();
        let c = coef(&mesh, 0.0);
        let n = mesh.num_nodes();
        let mut u = vec![0.0; 2 * n];
        for (i, [_, z]) in mesh.coords().iter().enumerate() {
            u[n + i] = *z;
        }
        let r = Receiver::new("a", [1300.0, 750.0], Quantity::VerticalVelocity, &mesh, &c).unwrap();
        assert_abs_diff_eq!(r.evaluate(&u, &u), 750.0, epsilon = 1e-12 * 1000.0);
        let [x, z] = mesh.node_coord(7);
        let at_node = Receiver::new("b", [x, z], Quantity::VerticalDisplacement, &mesh, &c).unwrap();
        assert_eq!(at_node.evaluate(&u, &u), u[n + 7]);
        assert_eq!(r.evaluate(&vec![0.0; 2 * n], &vec![0.0; 2 * n]), 0.0);
        assert!(matches!(
            Receiver::new("c", [5000.0, 10.0], Quantity::VerticalVelocity, &mesh, &c),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            Receiver::new("d", [100.0, 1200.0], Quantity::VerticalVelocity, &mesh, &c),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn pressure_proxy_of_linear_field() {
        // U = (x, 0): div U = 1, U_z = 0, so the proxy is ρ0 c0²
        let mesh = mesh();
        let c = coef(&mesh, 0.0);
        let n = mesh.num_nodes();
        let mut u = vec![0.0; 2 * n];
        for (i, [x, _]) in mesh.coords().iter().enumerate() {
            u[i] = *x;
        }
        let pos = [1700.0, 400.0];
        let r = Receiver::new("p", pos, Quantity::PressureProxy, &mesh, &c).unwrap();
        let p = constant_n_profile(1025.0, 1500.0, 0.0, 1000.0, &PhysicalConstants::default()).unwrap();
        let (rho, c0, _) = p.at(pos[1]);
        let got = r.evaluate(&u, &u);
        assert!((got - rho * c0 * c0).abs() < 1e-6 * rho * c0 * c0, "{got}");
    }

    #[test]
    fn stft_finds_sinusoid() {
        let dt = 0.01;
        let s: Vec<f64> = (0..4096).map(|k| (std::f64::consts::TAU * 5.0 * k as f64 * dt).sin()).collect();
        let spec = stft_spectrogram(&s, dt, 512, 256).unwrap();
        let bin = spec.freqs[1];
        for frame in &spec.magnitude {
            let k = (0..frame.len()).max_by(|a, b| frame[*a].total_cmp(&frame[*b])).unwrap();
            assert!((spec.freqs[k] - 5.0).abs() <= bin);
        }
        assert_abs_diff_eq!(*spec.freqs.last().unwrap(), 0.5 / dt, epsilon = 1e-12);
        let zero = stft_spectrogram(&vec![0.0; 1024], dt, 256, 128).unwrap();
        assert!(zero.magnitude.iter().flatten().all(|v| *v == 0.0));
        assert!(stft_spectrogram(&s, dt, 1, 1).is_err());
        assert!(stft_spectrogram(&s[..100], dt, 512, 1).is_err());
    }

    #[test]
    fn lloyd_examples() {
        let g = LloydGeometry { source_depth: 1500.0, sound_speed: 1500.0, sin_theta: 0.5 };
        assert_abs_diff_eq!(lloyd_bandwidth(&g).unwrap(), 1.0, epsilon = 1e-15);
        let grazing = LloydGeometry { sin_theta: 0.0, ..g };
        assert!(matches!(lloyd_bandwidth(&grazing), Err(Error::OutOfRange(_))));
        let pi = std::f64::consts::PI;
        assert_eq!(interference_minima(1.0, 0.5 * pi)[..], [0.0]);
        let m = interference_minima(1.0, 2.0 * pi);
        assert_eq!(m.len(), 3);
        assert_abs_diff_eq!(m[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m[2], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn minima_spacing_matches_bandwidth() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let g = LloydGeometry {
                source_depth: rng.gen_range(100.0..3000.0),
                sound_speed: rng.gen_range(1400.0..1600.0),
                sin_theta: rng.gen_range(0.05..1.0),
            };
            let df = lloyd_bandwidth(&g).unwrap();
            // minima in angle at the frequency of the second minimum
            let f = df * 3.0;
            let k = std::f64::consts::TAU * f / g.sound_speed;
            let sines = interference_minima(g.source_depth, k);
            assert!(sines.iter().any(|s| (s - g.sin_theta).abs() < 1e-12 * g.sin_theta.max(1.0)));
            let fs = interference_frequencies(&g, 10.0 * df).unwrap();
            for w in fs.windows(2) {
                assert!((w[1] - w[0] - df).abs() < 1e-12 * df);
            }
        }
    }

    #[test]
    fn bandwidth_of_synthetic_spectrum() {
        let df = 0.05;
        let freqs: Vec<f64> = (0..=400).map(|k| k as f64 * df).collect();
        let row: Vec<f64> = freqs.iter().map(|f| (std::f64::consts::PI * f / 2.0).sin().powi(2)).collect();
        let spec = Spectrogram {
            times: vec![1.0, 2.0],
            freqs,
            magnitude: vec![row.clone(), row],
            window_len: 800,
            hop: 400,
        };
        let m = measure_bandwidth(&spec, (0.0, 3.0), 20.0);
        assert!((m.value().unwrap() - 2.0).abs() <= df);
        let flat = Spectrogram { magnitude: vec![vec![1.0; 401]; 2], ..spec };
        assert!(matches!(measure_bandwidth(&flat, (0.0, 3.0), 20.0), BandwidthMeasurement::Failed { .. }));
    }

    #[test]
    fn onset_and_smoothing() {
        let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let s = [0.0, 0.0, 0.001, 0.5, 1.0, -2.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(onset_time(&t, &s, 0.01), Some(3.0));
        assert_eq!(onset_time(&t, &[0.0; 10], 0.01), None);
        assert_eq!(moving_average(&[1.0, 2.0, 3.0], 3), vec![1.5, 2.0, 2.5]);
    }

    #[test]
    fn remainder_examples() {
        let mesh = mesh();
        let profile = |n| constant_n_profile(1025.0, 1500.0, n, 1000.0, &PhysicalConstants::default()).unwrap();
        let sys0 = assemble_potential(&mesh, &profile(0.0));
        let n = sys0.num_nodes;
        let phi: Vec<f64> = mesh.coords().iter().map(|[x, z]| (x * 1e-3).sin() + z * 1e-3).collect();
        let psi: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        assert!(remainder_diagnostics(&sys0, &phi, &psi).u_r.iter().all(|v| *v == 0.0));

        let sys = assemble_potential(&mesh, &profile(0.01));
        let coef = &sys.coefficients;
        let cancel: Vec<f64> = (0..n).map(|i| -coef.n[i] / coef.g * phi[i]).collect();
        let f = remainder_diagnostics(&sys, &phi, &cancel);
        assert!(f.u_r.iter().all(|v| v.abs() < 1e-15));
        assert!(f.grad_phi.iter().all(|v| *v > 0.0));
        let mut avg = RemainderAverage::default();
        avg.update(&remainder_diagnostics(&sys, &phi, &psi));
        assert!(avg.peak_remainder > 0.0);
        assert_eq!(avg.mean().len(), n);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_columns(&p, &["time_s", "vertical_displacement"], &[&[0.0, 0.5], &[1.25, -3e-9]]).unwrap();
        let (h, c) = read_columns(&p).unwrap();
        assert_eq!(h, vec!["time_s", "vertical_displacement"]);
        assert_eq!(c[1], vec![1.25, -3e-9]);
        let spec = stft_spectrogram(&[1.0, 0.0, -1.0, 0.0, 1.0], 0.1, 4, 1).unwrap();
        let files = spec.write_csv(dir.path(), "s").unwrap();
        assert!(files.iter().all(|f| f.exists()));
    }
}
