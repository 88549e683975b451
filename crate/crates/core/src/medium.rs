//! Prescribed plasma-frequency perturbation `w~_p^2(r, t)`.
//!
//! Every profile is separable: a spatial shape times a scalar time
//! modulation. Periodic shapes are sampled on the grid and carried to
//! half-shifted points by spectral interpolation; the windowed ramp is not
//! periodic and is evaluated analytically on its declared window.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::spectral::Spectral;

/// Spatial shape of the perturbation (values in `omega_p0^2` units of the
/// caller's choosing; the crate never rescales them).
#[derive(Debug, Clone, PartialEq)]
pub enum MediumKind {
    Constant {
        value: f64,
    },
    /// `slope (x - center) + curvature (x - center)^2`, valid on `window` only.
    Ramp {
        slope: f64,
        curvature: f64,
        center: f64,
        window: (f64, f64),
    },
    /// `amplitude sin(2 pi x / wavelength + phase)`; the period must divide `L`.
    Sinusoid {
        amplitude: f64,
        wavelength: f64,
        phase: f64,
    },
    /// Periodized `amplitude exp(-(x - center)^2 / (2 width^2))`.
    GaussianBump {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// Samples on the position grid.
    Tabulated {
        values: Vec<f64>,
    },
}

/// Dimensionless multiplier applied to the spatial shape.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TimeModulation {
    #[default]
    None,
    Constant(f64),
    /// `mean + amplitude cos(omega t + phase)`.
    Harmonic {
        mean: f64,
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
}

impl TimeModulation {
    pub fn factor(&self, t: f64) -> f64 {
        match *self {
            TimeModulation::None => 1.0,
            TimeModulation::Constant(v) => v,
            TimeModulation::Harmonic {
                mean,
                amplitude,
                omega,
                phase,
            } => mean + amplitude * (omega * t + phase).cos(),
        }
    }

    pub fn is_static(&self) -> bool {
        !matches!(self, TimeModulation::Harmonic { amplitude, omega, .. } if *amplitude != 0.0 && *omega != 0.0)
    }

    fn max_abs(&self) -> f64 {
        match *self {
            TimeModulation::None => 1.0,
            TimeModulation::Constant(v) => v.abs(),
            TimeModulation::Harmonic { mean, amplitude, .. } => mean.abs() + amplitude.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MediumProfile {
    pub kind: MediumKind,
    pub modulation: TimeModulation,
}

/// Where to evaluate the medium relative to the phase-space point `(r, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    None,
    PlusHalf,
    MinusHalf,
}

/// Result of [`medium_sample`].
#[derive(Debug, Clone, PartialEq)]
pub enum MediumSample {
    /// Values on the position grid.
    Line(Vec<f64>),
    /// `table[[i, c]]` is the value at `r_i +/- y_m / 2` with `m = c - n/2`.
    Table(Array2<f64>),
}

const BAND_TOL: f64 = 1e-10;

impl MediumProfile {
    pub fn new(kind: MediumKind) -> Self {
        Self {
            kind,
            modulation: TimeModulation::None,
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(value: f64) -> Self {
        Self::new(MediumKind::Constant { value })
    }

    pub fn linear_ramp(slope: f64, center: f64, window: (f64, f64)) -> Self {
        Self::new(MediumKind::Ramp {
            slope,
            curvature: 0.0,
            center,
            window,
        })
    }

    pub fn quadratic_ramp(slope: f64, curvature: f64, center: f64, window: (f64, f64)) -> Self {
        Self::new(MediumKind::Ramp {
            slope,
            curvature,
            center,
            window,
        })
    }

    pub fn sinusoid(amplitude: f64, wavelength: f64, phase: f64) -> Self {
        Self::new(MediumKind::Sinusoid {
            amplitude,
            wavelength,
            phase,
        })
    }

    pub fn gaussian_bump(amplitude: f64, center: f64, width: f64) -> Self {
        Self::new(MediumKind::GaussianBump {
            amplitude,
            center,
            width,
        })
    }

    pub fn tabulated(values: Vec<f64>) -> Self {
        Self::new(MediumKind::Tabulated { values })
    }

    pub fn with_modulation(mut self, modulation: TimeModulation) -> Self {
        self.modulation = modulation;
        self
    }

    pub fn modulation_at(&self, t: f64) -> f64 {
        self.modulation.factor(t)
    }

    pub fn is_static(&self) -> bool {
        self.modulation.is_static()
    }

    /// True when the profile vanishes identically at every time.
    pub fn is_zero(&self) -> bool {
        match &self.kind {
            MediumKind::Constant { value } => *value == 0.0,
            MediumKind::Ramp { slope, curvature, .. } => *slope == 0.0 && *curvature == 0.0,
            MediumKind::Sinusoid { amplitude, .. } | MediumKind::GaussianBump { amplitude, .. } => *amplitude == 0.0,
            MediumKind::Tabulated { values } => values.iter().all(|v| *v == 0.0),
        }
    }

    pub fn is_periodic(&self) -> bool {
        !matches!(self.kind, MediumKind::Ramp { .. })
    }

    /// Check the profile against a grid: band limit, periodicity, windows.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let n = grid.n();
        let l = grid.length();
        match &self.kind {
            MediumKind::Constant { value } => finite("medium.value", *value),
            MediumKind::Ramp {
                slope,
                curvature,
                center,
                window,
            } => {
                finite("medium.slope", *slope)?;
                finite("medium.curvature", *curvature)?;
                finite("medium.center", *center)?;
                if window.0.is_nan() || window.1.is_nan() || window.0 >= window.1 {
                    return Err(invalid("medium.window", "lower bound must be below upper bound"));
                }
                Ok(())
            }
            MediumKind::Sinusoid {
                amplitude,
                wavelength,
                phase,
            } => {
                finite("medium.amplitude", *amplitude)?;
                finite("medium.phase", *phase)?;
                if !(wavelength.is_finite() && *wavelength > 0.0) {
                    return Err(invalid("medium.wavelength", "must be > 0"));
                }
                let modes = l / wavelength;
                if (modes - modes.round()).abs() > 1e-9 {
                    return Err(invalid(
                        "medium.wavelength",
                        format!("period {wavelength} does not divide the domain length {l}"),
                    ));
                }
                if 2.0 * modes.round() >= n as f64 {
                    return Err(Error::Aliasing(format!(
                        "sinusoid mode {} is at or above the Nyquist mode {}",
                        modes.round(),
                        n / 2
                    )));
                }
                Ok(())
            }
            MediumKind::GaussianBump {
                amplitude,
                center,
                width,
            } => {
                finite("medium.amplitude", *amplitude)?;
                finite("medium.center", *center)?;
                if !(width.is_finite() && *width > 0.0) {
                    return Err(invalid("medium.width", "must be > 0"));
                }
                if *width > l / 4.0 {
                    return Err(invalid("medium.width", "must not exceed a quarter of the domain"));
                }
                // Fourier coefficient at the Nyquist mode relative to the mean.
                let x = PI * n as f64 * width / l;
                if (-0.5 * x * x).exp() > 1e-13 {
                    return Err(Error::Aliasing(format!(
                        "gaussian bump of width {width} is under-resolved by {n} points"
                    )));
                }
                Ok(())
            }
            MediumKind::Tabulated { values } => {
                grid.check_len(values.len())?;
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("medium.values", "non-finite sample"));
                }
                let (hi, top) = band_content(grid, values, 3 * n / 8);
                if hi > BAND_TOL * top.max(f64::MIN_POSITIVE) {
                    return Err(Error::Aliasing(format!(
                        "tabulated medium has relative content {:.3e} above mode {}",
                        hi / top,
                        3 * n / 8
                    )));
                }
                Ok(())
            }
        }
    }

    /// Analytic value of the spatial shape at an unwrapped position.
    pub fn shape_at(&self, x: f64, length: f64) -> Result<f64> {
        Ok(match &self.kind {
            MediumKind::Constant { value } => *value,
            MediumKind::Ramp {
                slope,
                curvature,
                center,
                window,
            } => {
                if x < window.0 || x > window.1 {
                    return Err(Error::OutsideWindow {
                        position: x,
                        lo: window.0,
                        hi: window.1,
                    });
                }
                let d = x - center;
                slope * d + curvature * d * d
            }
            MediumKind::Sinusoid {
                amplitude,
                wavelength,
                phase,
            } => amplitude * (2.0 * PI * x / wavelength + phase).sin(),
            MediumKind::GaussianBump {
                amplitude,
                center,
                width,
            } => {
                let mut s = 0.0;
                for img in -3..=3 {
                    let d = x - center - img as f64 * length;
                    s += (-0.5 * d * d / (width * width)).exp();
                }
                amplitude * s
            }
            MediumKind::Tabulated { values } => {
                let n = values.len();
                let sp = Spectral::with_size(n, length);
                let c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                sp.shift(&c, x)[0].re
            }
        })
    }

    /// Spatial shape on the grid nodes (no time modulation).
    pub fn shape_on_grid(&self, grid: &Grid) -> Result<Vec<f64>> {
        self.validate(grid)?;
        if let MediumKind::Tabulated { values } = &self.kind {
            return Ok(values.clone());
        }
        (0..grid.n()).map(|i| self.shape_at(grid.r(i), grid.length())).collect()
    }

    /// `w~_p^2(r_i, t)` on the grid.
    pub fn sample_grid(&self, grid: &Grid, t: f64) -> Result<Vec<f64>> {
        let m = self.modulation_at(t);
        Ok(self.shape_on_grid(grid)?.into_iter().map(|v| v * m).collect())
    }

    /// `order`-th r-derivative of the spatial shape on the grid.
    pub fn shape_derivative(&self, grid: &Grid, order: u32) -> Result<Vec<f64>> {
        if let MediumKind::Ramp {
            slope,
            curvature,
            center,
            ..
        } = &self.kind
        {
            // Window membership is checked by shape_on_grid.
            self.shape_on_grid(grid)?;
            return Ok((0..grid.n())
                .map(|i| {
                    let d = grid.r(i) - center;
                    match order {
                        0 => slope * d + curvature * d * d,
                        1 => slope + 2.0 * curvature * d,
                        2 => 2.0 * curvature,
                        _ => 0.0,
                    }
                })
                .collect());
        }
        let base = self.shape_on_grid(grid)?;
        Ok(Spectral::new(grid).derivative_real(&base, order))
    }

    /// Upper bound of `|w~_p^2|` over the grid and all times.
    pub fn max_abs(&self, grid: &Grid) -> Result<f64> {
        let base = self.shape_on_grid(grid)?;
        let peak = base.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok(peak * self.modulation.max_abs())
    }

    /// Shifted shape table in FFT-bin order of the lag: entry `[[i, b]]` is
    /// the shape at `r_i + sign * y_m / 2` with `m` the signed index of bin `b`.
    pub(crate) fn shifted_shape_bins(&self, grid: &Grid, sign: i64) -> Result<Array2<f64>> {
        let n = grid.n();
        let sp = Spectral::new(grid);
        let mut table = Array2::zeros((n, n));
        if self.is_periodic() {
            let on_grid = self.shape_on_grid(grid)?;
            let half = sp.half_shift_real(&on_grid);
            for i in 0..n {
                for b in 0..n {
                    let t = sign * sp.signed(b);
                    table[[i, b]] = half_point(&on_grid, &half, i, t);
                }
            }
        } else {
            self.validate(grid)?;
            for i in 0..n {
                for b in 0..n {
                    let x = grid.r(i) + sign as f64 * grid.y(sp.signed(b)) / 2.0;
                    table[[i, b]] = self.shape_at(x, grid.length())?;
                }
            }
        }
        Ok(table)
    }
}

/// Value at `r_i + t dr / 2` from grid samples and half-grid samples.
pub(crate) fn half_point<T: Copy>(on_grid: &[T], half: &[T], i: usize, t: i64) -> T {
    let n = on_grid.len() as i64;
    if t % 2 == 0 {
        on_grid[(i as i64 + t / 2).rem_euclid(n) as usize]
    } else {
        half[(i as i64 + (t - 1).div_euclid(2)).rem_euclid(n) as usize]
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, "must be finite"))
    }
}

/// Largest coefficient magnitude above `cutoff` and overall.
fn band_content(grid: &Grid, values: &[f64], cutoff: usize) -> (f64, f64) {
    let sp = Spectral::new(grid);
    let c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let coeffs = sp.coefficients(&c);
    let mut hi = 0.0f64;
    let mut top = 0.0f64;
    for (b, v) in coeffs.iter().enumerate() {
        top = top.max(v.norm());
        if sp.signed(b).unsigned_abs() as usize > cutoff {
            hi = hi.max(v.norm());
        }
    }
    (hi, top)
}

/// Sample the medium on the grid, or on the `(r, y)` table at `r +/- y/2`.
pub fn medium_sample(profile: &MediumProfile, grid: &Grid, t: f64, shift: Shift) -> Result<MediumSample> {
    let m = profile.modulation_at(t);
    let sign = match shift {
        Shift::None => return profile.sample_grid(grid, t).map(MediumSample::Line),
        Shift::PlusHalf => 1,
        Shift::MinusHalf => -1,
    };
    let n = grid.n();
    let bins = profile.shifted_shape_bins(grid, sign)?;
    let mut table = Array2::zeros((n, n));
    for i in 0..n {
        for c in 0..n {
            table[[i, c]] = m * bins[[i, crate::spectral::center_to_bin(c, n)]];
        }
    }
    Ok(MediumSample::Table(table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, SimParams};

    fn grid(n: usize, l: f64) -> Grid {
        build_grid(n, l, &SimParams::default()).unwrap()
    }

    fn table(s: MediumSample) -> Array2<f64> {
        match s {
            MediumSample::Table(t) => t,
            MediumSample::Line(_) => panic!("expected table"),
        }
    }

    #[test]
    fn constant_is_shift_invariant() {
        let g = grid(16, 4.0);
        let p = MediumProfile::constant(0.5);
        for s in [Shift::PlusHalf, Shift::MinusHalf] {
            let t = table(medium_sample(&p, &g, 0.3, s).unwrap());
            assert!(t.iter().all(|v| (v - 0.5).abs() < 1e-15));
        }
        match medium_sample(&p, &g, 0.0, Shift::None).unwrap() {
            MediumSample::Line(v) => assert!(v.iter().all(|x| *x == 0.5)),
            _ => panic!(),
        }
    }

    #[test]
    fn sinusoid_half_shift_is_exact() {
        let l = 6.0;
        let g = grid(32, l);
        let p = MediumProfile::sinusoid(1.0, l, 0.0);
        for (s, sign) in [(Shift::PlusHalf, 1.0), (Shift::MinusHalf, -1.0)] {
            let t = table(medium_sample(&p, &g, 0.0, s).unwrap());
            for i in 0..32 {
                for c in 0..32 {
                    let y = g.y(c as i64 - 16);
                    let expect = (2.0 * PI * (g.r(i) + sign * y / 2.0) / l).sin();
                    assert!((t[[i, c]] - expect).abs() < 1e-12, "{i} {c}");
                }
            }
        }
    }

    #[test]
    fn zero_modulation_gives_zero_field() {
        let g = grid(64, 20.0);
        let p = MediumProfile::gaussian_bump(0.3, 10.0, 1.0).with_modulation(TimeModulation::Harmonic {
            mean: 0.0,
            amplitude: 1.0,
            omega: 1.0,
            phase: 0.0,
        });
        let t = PI / 2.0;
        match medium_sample(&p, &g, t, Shift::None).unwrap() {
            MediumSample::Line(v) => assert!(v.iter().all(|x| x.abs() < 1e-16)),
            _ => panic!(),
        }
    }

    #[test]
    fn ramp_outside_window_is_error() {
        let g = grid(16, 4.0);
        let p = MediumProfile::linear_ramp(0.2, 2.0, (0.0, 4.0));
        assert!(medium_sample(&p, &g, 0.0, Shift::None).is_ok());
        let e = medium_sample(&p, &g, 0.0, Shift::PlusHalf).unwrap_err();
        assert!(matches!(e, Error::OutsideWindow { .. }));
        let wide = MediumProfile::linear_ramp(0.2, 2.0, (-4.0, 8.0));
        let t = table(medium_sample(&wide, &g, 0.0, Shift::MinusHalf).unwrap());
        let y = g.y(3);
        assert!((t[[5, 8 + 3]] - 0.2 * (g.r(5) - y / 2.0 - 2.0)).abs() < 1e-14);
    }

    #[test]
    fn aliasing_is_rejected() {
        let g = grid(16, 4.0);
        let noisy: Vec<f64> = (0..16).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(matches!(
            MediumProfile::tabulated(noisy).validate(&g),
            Err(Error::Aliasing(_))
        ));
        let smooth: Vec<f64> = (0..16).map(|i| (2.0 * PI * i as f64 / 16.0).cos()).collect();
        assert!(MediumProfile::tabulated(smooth).validate(&g).is_ok());
        assert!(MediumProfile::gaussian_bump(1.0, 2.0, 0.05).validate(&g).is_err());
        assert!(MediumProfile::sinusoid(1.0, 4.0 / 8.0, 0.0).validate(&g).is_err());
        assert!(MediumProfile::sinusoid(1.0, 3.0, 0.0).validate(&g).is_err());
    }

    #[test]
    fn gaussian_half_shift_matches_analytic() {
        let l = 20.0;
        let g = grid(128, l);
        let p = MediumProfile::gaussian_bump(0.4, 7.0, 1.5);
        let t = table(medium_sample(&p, &g, 0.0, Shift::PlusHalf).unwrap());
        for i in (0..128).step_by(7) {
            for c in (0..128).step_by(5) {
                let x = g.r(i) + g.y(c as i64 - 64) / 2.0;
                let expect = p.shape_at(x, l).unwrap();
                assert!((t[[i, c]] - expect).abs() < 1e-12);
            }
        }
    }
}
