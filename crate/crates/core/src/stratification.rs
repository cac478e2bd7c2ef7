//! Background state of the ocean at rest: density `ρ0(z)`, sound speed
//! `c0(z)` and buoyancy frequency `N²(z)`.
//!
//! `z` is measured upward from the reference level `z = 0` at the deepest
//! point, so density decreases with `z`. Profiles are stored on a uniform grid
//! as values plus derivatives and evaluated with cubic Hermite interpolation,
//! which keeps `ρ0` continuously differentiable.

use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::read_two_columns;

/// Largest grid spacing used when tabulating a profile (m).
const MAX_GRID_STEP: f64 = 1.0;
/// Tolerance below which a negative `N²` is treated as round-off.
const N2_FLOOR: f64 = -1e-12;

/// Gravity and surface pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Gravitational acceleration (m/s²).
    pub g: f64,
    /// Atmospheric pressure at the surface (Pa).
    pub p_atm: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            g: 9.81,
            p_atm: 101_325.0,
        }
    }
}

/// Cubic Hermite interpolant on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicHermite {
    z0: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl CubicHermite {
    /// Builds the interpolant from values and exact slopes at `z0 + k·step`.
    pub fn new(z0: f64, step: f64, values: Vec<f64>, slopes: Vec<f64>) -> Self {
        assert!(values.len() >= 2 && values.len() == slopes.len() && step > 0.0);
        Self {
            z0,
            step,
            values,
            slopes,
        }
    }

    /// Builds the interpolant with slopes from fourth-order finite differences.
    pub fn from_samples(z0: f64, step: f64, values: Vec<f64>) -> Self {
        let slopes = fd_slopes(&values, step);
        Self::new(z0, step, values, slopes)
    }

    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |k| self.z0 + k as f64 * self.step)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Value and derivative at `z`; `z` is clamped to the grid range.
    pub fn eval(&self, z: f64) -> (f64, f64) {
        let last = self.values.len() - 1;
        let s = ((z - self.z0) / self.step).clamp(0.0, last as f64);
        let k = (s.floor() as usize).min(last - 1);
        let t = s - k as f64;
        let h = self.step;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1;
        let dv = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * d1)
            / h;
        (v, dv)
    }
}

/// Fourth-order finite-difference derivative on a uniform grid, with
/// one-sided stencils in the two outermost points at each end.
fn fd_slopes(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    if n < 5 {
        // too short for the wide stencil: second order
        return (0..n)
            .map(|i| match i {
                0 => (v[1] - v[0]) / h,
                i if i == n - 1 => (v[n - 1] - v[n - 2]) / h,
                i => (v[i + 1] - v[i - 1]) / (2.0 * h),
            })
            .collect();
    }
    let w = &v[n - 5..];
    (0..n)
        .map(|i| {
            let num = match i {
                0 => -25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4],
                1 => -3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4],
                i if i == n - 1 => 25.0 * w[4] - 48.0 * w[3] + 36.0 * w[2] - 16.0 * w[1] + 3.0 * w[0],
                i if i == n - 2 => 3.0 * w[4] + 10.0 * w[3] - 18.0 * w[2] + 6.0 * w[1] - w[0],
                i => v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2],
            };
            num / (12.0 * h)
        })
        .collect()
}

/// `N² = -(g/ρ0) dρ0/dz - g²/c0²` at each `z`, from interpolants of `ρ0` and
/// `c0`. Fails when the stratification is unstable anywhere.
pub fn brunt_vaisala(
    rho0: &CubicHermite,
    c0: &CubicHermite,
    z: &[f64],
    consts: &PhysicalConstants,
) -> Result<Vec<f64>> {
    let g = consts.g;
    z.iter()
        .map(|&zk| {
            let (rho, drho) = rho0.eval(zk);
            let (c, _) = c0.eval(zk);
            let n2 = -g / rho * drho - g * g / (c * c);
            if n2 < N2_FLOOR {
                Err(Error::UnstableStratification { z: zk, n2 })
            } else {
                Ok(n2)
            }
        })
        .collect()
}

/// Equation of state `ρ = f(p, T)` and its sound-speed closure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EquationOfState {
    /// `ρ = ρ_ref (1 - α (T - T_ref))`, pressure-independent; the fluid is
    /// still assigned the finite sound speed `c`.
    Incompressible {
        rho_ref: f64,
        thermal_expansion: f64,
        t_ref: f64,
        sound_speed: f64,
    },
    /// `ρ = ρ_ref (1 - α (T - T_ref) + κ (p - p_atm))` with
    /// `c² = 1 / (ρ_ref κ)`.
    LinearCompressibility {
        rho_ref: f64,
        thermal_expansion: f64,
        compressibility: f64,
        t_ref: f64,
    },
}

impl EquationOfState {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            EquationOfState::Incompressible {
                rho_ref,
                sound_speed,
                ..
            } => rho_ref > 0.0 && sound_speed > 0.0,
            EquationOfState::LinearCompressibility {
                rho_ref,
                compressibility,
                ..
            } => rho_ref > 0.0 && compressibility > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(
                "equation of state needs ρ_ref > 0 and a positive compressibility or sound speed".into(),
            ))
        }
    }

    /// Density at gauge pressure `p - p_atm` and temperature `t`.
    pub fn density(&self, gauge: f64, t: f64) -> f64 {
        match *self {
            EquationOfState::Incompressible {
                rho_ref,
                thermal_expansion,
                t_ref,
                ..
            } => rho_ref * (1.0 - thermal_expansion * (t - t_ref)),
            EquationOfState::LinearCompressibility {
                rho_ref,
                thermal_expansion,
                compressibility,
                t_ref,
            } => rho_ref * (1.0 - thermal_expansion * (t - t_ref) + compressibility * gauge),
        }
    }

    /// `(∂ρ/∂p, ∂ρ/∂T)`.
    fn partials(&self) -> (f64, f64) {
        match *self {
            EquationOfState::Incompressible {
                rho_ref,
                thermal_expansion,
                ..
            } => (0.0, -rho_ref * thermal_expansion),
            EquationOfState::LinearCompressibility {
                rho_ref,
                thermal_expansion,
                compressibility,
                ..
            } => (rho_ref * compressibility, -rho_ref * thermal_expansion),
        }
    }

    pub fn sound_speed(&self) -> f64 {
        match *self {
            EquationOfState::Incompressible { sound_speed, .. } => sound_speed,
            EquationOfState::LinearCompressibility {
                rho_ref,
                compressibility,
                ..
            } => 1.0 / (rho_ref * compressibility).sqrt(),
        }
    }
}

/// Temperature samples `T(z)` (kelvin), `z` strictly increasing from the
/// bottom. Linearly interpolated, then resampled onto the profile grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureProfile {
    z: Vec<f64>,
    t: Vec<f64>,
}

impl TemperatureProfile {
    pub fn new(z: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        if z.is_empty() || z.len() != t.len() {
            return Err(Error::Config("temperature profile needs matching z and T samples".into()));
        }
        if z.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("temperature profile z must be strictly increasing".into()));
        }
        if t.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("temperatures must be positive kelvin values".into()));
        }
        Ok(Self { z, t })
    }

    /// Constant temperature over the whole column.
    pub fn uniform(t: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![t])
    }

    /// Reads a two-column `z T` text file.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let (z, t) = read_two_columns(path, &text)?;
        Self::new(z, t)
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        (&self.z, &self.t)
    }

    /// Resamples onto the uniform grid `[0, H]` so the result is smooth.
    fn resampled(&self, height: f64, n: usize) -> CubicHermite {
        let step = height / (n - 1) as f64;
        let linear = |zq: f64| -> f64 {
            if self.z.len() == 1 || zq <= self.z[0] {
                return self.t[0];
            }
            let last = self.z.len() - 1;
            if zq >= self.z[last] {
                return self.t[last];
            }
            let i = self.z.partition_point(|&v| v <= zq) - 1;
            let s = (zq - self.z[i]) / (self.z[i + 1] - self.z[i]);
            self.t[i] + s * (self.t[i + 1] - self.t[i])
        };
        let values: Vec<f64> = (0..n).map(|k| linear(k as f64 * step)).collect();
        CubicHermite::from_samples(0.0, step, values)
    }
}

/// Background state on `[0, H]`: tabulated, with the closed form retained
/// for exponential profiles so that `N²` is exact there.
#[derive(Debug, Clone, PartialEq)]
pub struct StratificationProfile {
    height: f64,
    /// `(ρ0(0), n², c0, N²)` when the profile is the exponential closed form.
    exponential: Option<(f64, f64, f64, f64)>,
    rho0: CubicHermite,
    c0: CubicHermite,
    n2: Vec<f64>,
    consts: PhysicalConstants,
}

fn grid_points(height: f64) -> usize {
    ((height / MAX_GRID_STEP).ceil() as usize).max(1500) + 1
}

/// Exponential density `ρ0(z) = ρ0(0) exp(-n² z)`, `n² = N²/g + g/c0²`, with
/// constant `c0` and `N`.
pub fn constant_n_profile(
    rho_bottom: f64,
    c0: f64,
    n: f64,
    height: f64,
    consts: &PhysicalConstants,
) -> Result<StratificationProfile> {
    if !(rho_bottom > 0.0 && c0 > 0.0 && n >= 0.0 && height > 0.0 && consts.g > 0.0) {
        return Err(Error::Config(
            "constant-N profile needs ρ0 > 0, c0 > 0, N ≥ 0, H > 0, g > 0".into(),
        ));
    }
    let g = consts.g;
    let n2_exp = n * n / g + g / (c0 * c0);
    let count = grid_points(height);
    let step = height / (count - 1) as f64;
    let rho: Vec<f64> = (0..count)
        .map(|k| rho_bottom * (-n2_exp * k as f64 * step).exp())
        .collect();
    let drho: Vec<f64> = rho.iter().map(|r| -n2_exp * r).collect();
    let rho0 = CubicHermite::new(0.0, step, rho, drho);
    let c = CubicHermite::new(0.0, step, vec![c0; count], vec![0.0; count]);
    let mut profile = StratificationProfile::from_interpolants(height, rho0, c, consts)?;
    profile.exponential = Some((rho_bottom, n2_exp, c0, n * n));
    Ok(profile)
}

/// Hydrostatic background from a temperature profile: integrates
/// `dp/dz = -g f_ρ(p, T)` downward from `p(H) = p_atm` with RK4.
pub fn profile_from_temperature(
    temperature: &TemperatureProfile,
    eos: &EquationOfState,
    height: f64,
    consts: &PhysicalConstants,
) -> Result<StratificationProfile> {
    eos.validate()?;
    if !(height > 0.0) {
        return Err(Error::Config("surface height must be positive".into()));
    }
    let count = grid_points(height);
    let t_curve = temperature.resampled(height, count);
    let (step, gauge) = integrate_pressure(&t_curve, eos, height, consts);
    let g = consts.g;
    let (drho_dp, drho_dt) = eos.partials();
    let mut rho = Vec::with_capacity(count);
    let mut drho = Vec::with_capacity(count);
    for (k, &p) in gauge.iter().enumerate() {
        let (t, dt) = t_curve.eval(k as f64 * step);
        let r = eos.density(p, t);
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Numeric(format!(
                "equation of state produced density {r} at z = {}",
                k as f64 * step
            )));
        }
        rho.push(r);
        drho.push(drho_dp * (-g * r) + drho_dt * dt);
    }
    let c = eos.sound_speed();
    let rho0 = CubicHermite::new(0.0, step, rho, drho);
    let c0 = CubicHermite::new(0.0, step, vec![c; count], vec![0.0; count]);
    StratificationProfile::from_interpolants(height, rho0, c0, consts)
}

/// RK4 sweep from `z = H` down to `z = 0`; returns the step and the gauge
/// pressure `p - p_atm` on the grid of `t_curve`.
fn integrate_pressure(
    t_curve: &CubicHermite,
    eos: &EquationOfState,
    height: f64,
    consts: &PhysicalConstants,
) -> (f64, Vec<f64>) {
    let count = t_curve.values().len();
    let step = height / (count - 1) as f64;
    let g = consts.g;
    let rhs = |z: f64, gauge: f64| -> f64 { -g * eos.density(gauge, t_curve.eval(z).0) };
    let mut gauge = vec![0.0; count];
    for k in (0..count - 1).rev() {
        let z = (k + 1) as f64 * step;
        let p = gauge[k + 1];
        let h = -step;
        let k1 = rhs(z, p);
        let k2 = rhs(z + 0.5 * h, p + 0.5 * h * k1);
        let k3 = rhs(z + 0.5 * h, p + 0.5 * h * k2);
        let k4 = rhs(z + h, p + h * k3);
        gauge[k] = p + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    (step, gauge)
}

impl StratificationProfile {
    /// Wraps interpolants of `ρ0` and `c0`, computing and checking `N²`.
    pub fn from_interpolants(
        height: f64,
        rho0: CubicHermite,
        c0: CubicHermite,
        consts: &PhysicalConstants,
    ) -> Result<Self> {
        if rho0.values.iter().any(|v| !(*v > 0.0)) || c0.values.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Config("ρ0 and c0 must be strictly positive".into()));
        }
        let z: Vec<f64> = rho0.grid().collect();
        let n2 = brunt_vaisala(&rho0, &c0, &z, consts)?;
        Ok(Self {
            height,
            exponential: None,
            rho0,
            c0,
            n2,
            consts: *consts,
        })
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.consts
    }

    pub fn z_grid(&self) -> Vec<f64> {
        self.rho0.grid().collect()
    }

    pub fn rho0_samples(&self) -> &[f64] {
        self.rho0.values()
    }

    pub fn c0_samples(&self) -> &[f64] {
        self.c0.values()
    }

    pub fn n2_samples(&self) -> &[f64] {
        &self.n2
    }

    /// Density at `z`; exact for exponential profiles, interpolated otherwise.
    pub fn rho0(&self, z: f64) -> f64 {
        match self.exponential {
            Some((rho_b, rate, _, _)) => rho_b * (-rate * z.clamp(0.0, self.height)).exp(),
            None => self.rho0.eval(z).0,
        }
    }

    pub fn c0(&self, z: f64) -> f64 {
        match self.exponential {
            Some((_, _, c, _)) => c,
            None => self.c0.eval(z).0,
        }
    }

    /// `N²` evaluated from the interpolants; values within round-off of zero
    /// (or negative round-off) are returned as exactly zero.
    pub fn n2(&self, z: f64) -> f64 {
        if let Some((_, _, _, n2)) = self.exponential {
            return n2;
        }
        let g = self.consts.g;
        let (rho, drho) = self.rho0.eval(z);
        let c = self.c0(z);
        let n2 = -g / rho * drho - g * g / (c * c);
        // round-off of the two nearly cancelling terms
        if n2 < 1e-12 * g * g / (c * c) {
            0.0
        } else {
            n2
        }
    }

    /// `(ρ0, c0, N²)` at `z`.
    pub fn at(&self, z: f64) -> (f64, f64, f64) {
        (self.rho0(z), self.c0(z), self.n2(z))
    }

    /// Checks user-declared bounds `ρ_- ≤ ρ0 ≤ ρ_+`, `c_- ≤ c0 ≤ c_+`.
    pub fn check_bounds(&self, rho: (f64, f64), c: (f64, f64)) -> Result<()> {
        let inside = |v: &[f64], (lo, hi): (f64, f64)| v.iter().all(|x| *x >= lo && *x <= hi);
        if inside(self.rho0.values(), rho) && inside(self.c0.values(), c) {
            Ok(())
        } else {
            Err(Error::Config("profile leaves the declared ρ0/c0 bounds".into()))
        }
    }
}

/// Hydrostatic pressure `p0(z)` (Pa) on the profile grid, by the same RK4
/// sweep used in [`profile_from_temperature`].
pub fn hydrostatic_pressure(
    temperature: &TemperatureProfile,
    eos: &EquationOfState,
    height: f64,
    consts: &PhysicalConstants,
) -> Result<(Vec<f64>, Vec<f64>)> {
    eos.validate()?;
    let t_curve = temperature.resampled(height, grid_points(height));
    let (step, gauge) = integrate_pressure(&t_curve, eos, height, consts);
    let z = (0..gauge.len()).map(|k| k as f64 * step).collect();
    let p = gauge.into_iter().map(|v| v + consts.p_atm).collect();
    Ok((z, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    const C0: f64 = 1500.0;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn exponential_rate_and_density() {
        let n2_exp: f64 = 1e-6 / 9.81 + 9.81 / (C0 * C0);
        assert_relative_eq!(n2_exp, 4.4619e-6, max_relative = 1e-4);
        let p = constant_n_profile(1000.0, C0, 1e-3, 1500.0, &consts()).unwrap();
        assert_relative_eq!(p.rho0(1500.0), 1000.0 * (-n2_exp * 1500.0).exp(), max_relative = 1e-14);
        assert_abs_diff_eq!(p.rho0(1500.0), 993.33, epsilon = 0.01);
    }

    #[test]
    fn round_trip_recovers_n2() {
        for n in [0.0, 1e-3, 1e-2] {
            let p = constant_n_profile(1000.0, C0, n, 1500.0, &consts()).unwrap();
            for &v in p.n2_samples() {
                if n == 0.0 {
                    assert_abs_diff_eq!(v, 0.0, epsilon = 1e-10);
                } else {
                    assert_relative_eq!(v, n * n, max_relative = 1e-9);
                }
            }
            // between grid points the interpolant still carries N² closely
            for z in [0.3, 377.77, 1499.5] {
                assert_abs_diff_eq!(p.n2(z), n * n, epsilon = 1e-8 * (n * n).max(1e-6));
            }
        }
    }

    #[test]
    fn constant_density_is_unstable() {
        let rho = CubicHermite::from_samples(0.0, 10.0, vec![1000.0; 11]);
        let c = CubicHermite::from_samples(0.0, 10.0, vec![C0; 11]);
        let err = brunt_vaisala(&rho, &c, &[0.0, 50.0], &consts()).unwrap_err();
        match err {
            Error::UnstableStratification { n2, .. } => {
                assert_relative_eq!(n2, -9.81f64.powi(2) / (C0 * C0), max_relative = 1e-12);
                assert_relative_eq!(n2, -4.2772e-5, max_relative = 1e-4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |z: f64| 2.0 - z + 0.5 * z * z - 0.1 * z * z * z;
        let df = |z: f64| -1.0 + z - 0.3 * z * z;
        let values: Vec<f64> = (0..6).map(|k| f(k as f64 * 0.5)).collect();
        let slopes: Vec<f64> = (0..6).map(|k| df(k as f64 * 0.5)).collect();
        let h = CubicHermite::new(0.0, 0.5, values, slopes);
        for z in [0.1, 0.77, 1.9, 2.49] {
            let (v, d) = h.eval(z);
            assert_abs_diff_eq!(v, f(z), epsilon = 1e-13);
            assert_abs_diff_eq!(d, df(z), epsilon = 1e-12);
        }
    }

    #[test]
    fn fourth_order_slopes_exact_on_quartics() {
        let f = |z: f64| z.powi(4) - 3.0 * z.powi(2) + z;
        let df = |z: f64| 4.0 * z.powi(3) - 6.0 * z + 1.0;
        let values: Vec<f64> = (0..9).map(|k| f(k as f64 * 0.25)).collect();
        for (k, s) in fd_slopes(&values, 0.25).iter().enumerate() {
            assert_abs_diff_eq!(*s, df(k as f64 * 0.25), epsilon = 1e-11);
        }
    }

    fn incompressible() -> EquationOfState {
        EquationOfState::Incompressible {
            rho_ref: 1000.0,
            thermal_expansion: 2e-4,
            t_ref: 283.15,
            sound_speed: C0,
        }
    }

    fn compressible() -> EquationOfState {
        EquationOfState::LinearCompressibility {
            rho_ref: 1000.0,
            thermal_expansion: 2e-4,
            compressibility: 1.0 / (1000.0 * C0 * C0),
            t_ref: 283.15,
        }
    }

    #[test]
    fn incompressible_pressure_is_linear() {
        let t = TemperatureProfile::uniform(283.15).unwrap();
        let (z, p) = hydrostatic_pressure(&t, &incompressible(), 1500.0, &consts()).unwrap();
        for (zk, pk) in z.iter().zip(&p) {
            assert_relative_eq!(*pk, 101_325.0 + 1000.0 * 9.81 * (1500.0 - zk), max_relative = 1e-13);
        }
        assert_relative_eq!(p[0], 1.4816e7, max_relative = 1e-4);
    }

    #[test]
    fn isothermal_compressible_matches_exponential() {
        let eos = compressible();
        let kappa = 1.0 / (1000.0 * C0 * C0);
        let t = TemperatureProfile::uniform(283.15).unwrap();
        let (z, p) = hydrostatic_pressure(&t, &eos, 1500.0, &consts()).unwrap();
        for (zk, pk) in z.iter().zip(&p) {
            let exact = 101_325.0 + ((9.81 * 1000.0 * kappa * (1500.0 - zk)).exp() - 1.0) / kappa;
            assert_relative_eq!(*pk, exact, max_relative = 1e-8);
        }
        // isothermal compressible water is neutrally stratified
        let prof = profile_from_temperature(&t, &eos, 1500.0, &consts()).unwrap();
        assert!(prof.n2_samples().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn uniform_temperature_incompressible_is_rejected() {
        let t = TemperatureProfile::uniform(283.15).unwrap();
        let err = profile_from_temperature(&t, &incompressible(), 1500.0, &consts()).unwrap_err();
        assert!(matches!(err, Error::UnstableStratification { .. }));
    }

    #[test]
    fn thermocline_gives_interior_buoyancy_peak() {
        // cold deep water, warm mixed layer above a thermocline at z = 1200 m
        let z: Vec<f64> = (0..=150).map(|k| k as f64 * 10.0).collect();
        let t: Vec<f64> = z
            .iter()
            .map(|zk| 277.0 + 12.0 / (1.0 + (-(zk - 1200.0) / 60.0).exp()))
            .collect();
        let temp = TemperatureProfile::new(z, t).unwrap();
        let prof = profile_from_temperature(&temp, &compressible(), 1500.0, &consts()).unwrap();
        let n2 = prof.n2_samples();
        let (imax, _) = n2
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
        let zmax = prof.z_grid()[imax];
        assert!((zmax - 1200.0).abs() < 60.0, "peak at {zmax}");
        assert!(n2[imax] > 10.0 * n2[100].max(1e-12));
        prof.check_bounds((990.0, 1010.0), (1400.0, 1600.0)).unwrap();
    }

    #[test]
    fn temperature_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.txt");
        std::fs::write(&path, "# z T\n0 277\n1500 289\n").unwrap();
        let t = TemperatureProfile::read(&path).unwrap();
        assert_eq!(t.samples().1, &[277.0, 289.0]);
        std::fs::write(&path, "0 277\n1500 x\n").unwrap();
        assert!(matches!(TemperatureProfile::read(&path), Err(Error::Parse { line: 2, .. })));
    }
}
