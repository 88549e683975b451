//! Closed-form plane-wave fixtures in a uniform medium.
//!
//! A plane wave is `Phi = A exp(i (k r - w t) / eps)` with `w = sqrt(c^2 k^2 + w_p0^2)`
//! on the positive-frequency branch. Two superposed waves produce peaks at
//! `k0`, `k1` and an interference peak at `(k0 + k1) / 2` that oscillates with
//! `eta = (dk r - dw t) / eps`, `dk = k1 - k0`, `dw = w1 - w0`.

use ndarray::Array2;

use crate::error::Result;
use crate::fv::TwoComponentField;
use crate::grid::{Grid, SimParams};
use crate::spectral::{Spectral, C64};
use crate::wigner::{decompose_real, PhaseSpaceDensities, WignerMatrixField};

/// Sign of the oscillation frequency of a plane wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `exp(i (k r - w t) / eps)`: counted in the forward density `f`.
    Positive,
    /// `exp(i (k r + w t) / eps)`: counted in the backward density `g`.
    Negative,
}

/// `(Phi, dPhi/dt)` of a plane wave on the grid at time `t`.
pub fn plane_wave(amp: f64, k: f64, branch: Branch, t: f64, grid: &Grid, params: &SimParams) -> (Vec<C64>, Vec<C64>) {
    let w = match branch {
        Branch::Positive => params.dispersion(k),
        Branch::Negative => -params.dispersion(k),
    };
    let eps = params.epsilon;
    let phi: Vec<C64> = (0..grid.n())
        .map(|i| C64::from_polar(amp, (k * grid.r(i) - w * t) / eps))
        .collect();
    let dphi = phi.iter().map(|v| v * C64::new(0.0, -w / eps)).collect();
    (phi, dphi)
}

/// Gaussian packet `A exp(-x^2 / 2 sigma^2 + i k0 x / eps)` (`x` the periodic
/// offset from `center`) with `dPhi/dt` projected mode by mode onto `branch`.
pub fn gaussian_packet(
    amp: f64,
    center: f64,
    width: f64,
    k0: f64,
    branch: Branch,
    grid: &Grid,
    params: &SimParams,
) -> (Vec<C64>, Vec<C64>) {
    let l = grid.length();
    let eps = params.epsilon;
    let phi: Vec<C64> = (0..grid.n())
        .map(|i| {
            let x = (grid.r(i) - center + l / 2.0).rem_euclid(l) - l / 2.0;
            C64::from_polar(amp * (-x * x / (2.0 * width * width)).exp(), k0 * x / eps)
        })
        .collect();
    let sp = Spectral::new(grid);
    let mut buf = sp.coefficients(&phi);
    let sign = match branch {
        Branch::Positive => -1.0,
        Branch::Negative => 1.0,
    };
    for (b, v) in buf.iter_mut().enumerate() {
        let w = params.dispersion(eps * sp.kappa(b));
        *v *= C64::new(0.0, sign * w / eps);
    }
    let mut scratch = sp.scratch();
    sp.inverse(&mut buf, &mut scratch);
    (phi, buf)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoWaveSpec {
    pub amp0: f64,
    pub amp1: f64,
    pub k0: f64,
    pub k1: f64,
}

impl TwoWaveSpec {
    pub fn new(amp0: f64, amp1: f64, k0: f64, k1: f64) -> Self {
        Self { amp0, amp1, k0, k1 }
    }

    pub fn omega0(&self, params: &SimParams) -> f64 {
        params.dispersion(self.k0)
    }

    pub fn omega1(&self, params: &SimParams) -> f64 {
        params.dispersion(self.k1)
    }

    pub fn delta_k(&self) -> f64 {
        self.k1 - self.k0
    }

    pub fn delta_omega(&self, params: &SimParams) -> f64 {
        self.omega1(params) - self.omega0(params)
    }

    pub fn eta(&self, r: f64, t: f64, params: &SimParams) -> f64 {
        (self.delta_k() * r - self.delta_omega(params) * t) / params.epsilon
    }

    /// Node indices of `k0`, `k1` and their midpoint; errors when any is off-grid.
    pub fn nodes(&self, grid: &Grid) -> Result<(usize, usize, usize)> {
        Ok((
            grid.k_index(self.k0)?,
            grid.k_index(self.k1)?,
            grid.k_index(0.5 * (self.k0 + self.k1))?,
        ))
    }
}

/// Field components from the closed-form coefficients `(A/2)(w_p0 +/- w)/w_p0`,
/// rescaled by `2N` for the configured splitting normalization.
pub fn two_wave_fields(spec: &TwoWaveSpec, t: f64, grid: &Grid, params: &SimParams) -> Result<TwoComponentField> {
    spec.nodes(grid)?;
    let wp = params.omega_p0;
    let s = 2.0 * params.split_norm.value();
    let mut psi = TwoComponentField::zeros(grid.n(), t);
    for (amp, k) in [(spec.amp0, spec.k0), (spec.amp1, spec.k1)] {
        let w = params.dispersion(k);
        let cp = s * amp / 2.0 * (wp + w) / wp;
        let cm = s * amp / 2.0 * (wp - w) / wp;
        for i in 0..grid.n() {
            let e = C64::from_polar(1.0, (k * grid.r(i) - w * t) / params.epsilon);
            psi.phi[i] += cp * e;
            psi.chi[i] += cm * e;
        }
    }
    Ok(psi)
}

/// Closed-form Wigner matrix: discrete deltas of height `weight / dk`.
pub fn two_wave_matrix(spec: &TwoWaveSpec, t: f64, grid: &Grid, params: &SimParams) -> Result<WignerMatrixField> {
    let (j0, j1, jm) = spec.nodes(grid)?;
    let n = grid.n();
    let wp = params.omega_p0;
    let (w0, w1) = (spec.omega0(params), spec.omega1(params));
    let (a0, a1) = (spec.amp0, spec.amp1);
    let c2 = params.c * params.c;
    let s2 = (2.0 * params.split_norm.value()).powi(2);
    let h = s2 / grid.dk();
    let mut w_pp = Array2::<C64>::zeros((n, n));
    let mut w_pc = Array2::<C64>::zeros((n, n));
    let mut w_cc = Array2::<C64>::zeros((n, n));
    let wp2 = wp * wp;
    for i in 0..n {
        let eta = spec.eta(grid.r(i), t, params);
        let (ce, se) = (eta.cos(), eta.sin());
        w_pp[[i, j0]] += h * (w0 + wp).powi(2) / (4.0 * wp2) * a0 * a0;
        w_pp[[i, j1]] += h * (w1 + wp).powi(2) / (4.0 * wp2) * a1 * a1;
        w_pp[[i, jm]] += h * (wp + w0) * (wp + w1) / (2.0 * wp2) * a0 * a1 * ce;

        w_pc[[i, j0]] -= h * spec.k0 * spec.k0 * c2 / (4.0 * wp2) * a0 * a0;
        w_pc[[i, j1]] -= h * spec.k1 * spec.k1 * c2 / (4.0 * wp2) * a1 * a1;
        w_pc[[i, jm]] += h * a0 * a1 / 2.0 * C64::new((1.0 - w0 * w1 / wp2) * ce, (w0 - w1) / wp * se);

        w_cc[[i, j0]] += h * (w0 - wp).powi(2) / (4.0 * wp2) * a0 * a0;
        w_cc[[i, j1]] += h * (w1 - wp).powi(2) / (4.0 * wp2) * a1 * a1;
        w_cc[[i, jm]] += h * (wp - w0) * (wp - w1) / (2.0 * wp2) * a0 * a1 * ce;
    }
    Ok(WignerMatrixField { w_pp, w_pc, w_cc, t })
}

/// Closed-form real densities `W_0 .. W_3`.
pub fn two_wave_wigner(spec: &TwoWaveSpec, t: f64, grid: &Grid, params: &SimParams) -> Result<PhaseSpaceDensities> {
    decompose_real(&two_wave_matrix(spec, t, grid, params)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fv::fv_split;
    use crate::grid::build_grid;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        build_grid(32, 8.0 * PI / 3f64.sqrt(), &SimParams::default()).unwrap()
    }

    #[test]
    fn single_wave_components() {
        let g = grid();
        let p = SimParams::default();
        let spec = TwoWaveSpec::new(1.0, 0.0, 3f64.sqrt(), 0.0);
        let psi = two_wave_fields(&spec, 0.7, &g, &p).unwrap();
        for i in 0..g.n() {
            let e = C64::from_polar(1.0, 3f64.sqrt() * g.r(i) - 1.4);
            assert!((psi.phi[i] - 1.5 * e).norm() < 1e-14);
            assert!((psi.chi[i] + 0.5 * e).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_amplitudes_give_zero() {
        let g = grid();
        let p = SimParams::default();
        let psi = two_wave_fields(&TwoWaveSpec::new(0.0, 0.0, 3f64.sqrt(), 0.0), 1.0, &g, &p).unwrap();
        assert!(psi.phi.iter().chain(psi.chi.iter()).all(|v| v.norm() == 0.0));
    }

    #[test]
    fn fields_match_split_of_superposition() {
        let g = grid();
        let p = SimParams::default();
        let spec = TwoWaveSpec::new(0.8, 1.3, 3f64.sqrt(), -3f64.sqrt() / 2.0);
        let t = 0.4;
        let (f0, d0) = plane_wave(0.8, spec.k0, Branch::Positive, t, &g, &p);
        let (f1, d1) = plane_wave(1.3, spec.k1, Branch::Positive, t, &g, &p);
        let f: Vec<C64> = f0.iter().zip(&f1).map(|(a, b)| a + b).collect();
        let d: Vec<C64> = d0.iter().zip(&d1).map(|(a, b)| a + b).collect();
        let split = fv_split(&f, &d, &p).unwrap();
        let fix = two_wave_fields(&spec, t, &g, &p).unwrap();
        for i in 0..g.n() {
            assert!((split.phi[i] - fix.phi[i]).norm() < 1e-14);
            assert!((split.chi[i] - fix.chi[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn off_grid_wavenumber_rejected() {
        let g = grid();
        let spec = TwoWaveSpec::new(1.0, 1.0, 1.0, 0.0);
        assert!(two_wave_fields(&spec, 0.0, &g, &SimParams::default()).is_err());
    }

    #[test]
    fn interference_density() {
        let g = grid();
        let p = SimParams::default();
        let spec = TwoWaveSpec::new(1.0, 1.0, 3f64.sqrt(), 0.0);
        let d = two_wave_wigner(&spec, 0.3, &g, &p).unwrap();
        let jm = g.k_index(3f64.sqrt() / 2.0).unwrap();
        for i in 0..g.n() {
            let eta = -3f64.sqrt() * g.r(i) + 0.3;
            assert!((d.w1[[i, jm]] * g.dk() - eta.sin()).abs() < 1e-12);
            assert!((d.w2[[i, jm]] * g.dk() + eta.cos()).abs() < 1e-12);
            assert!((d.w3[[i, jm]] * g.dk() - 3.0 * eta.cos()).abs() < 1e-12);
        }
    }
}
