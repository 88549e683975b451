//! FFT plumbing shared by every spectral operator.
//!
//! Bin `b` of an `n`-point transform carries the signed index
//! `q = b` for `b < n/2` and `q = b - n` otherwise; the Nyquist bin is
//! `q = -n/2`. Data indexed by ascending wavenumber (centered storage)
//! maps to bin order by a cyclic shift of `n/2`, which is its own inverse.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

pub type C64 = Complex64;

#[derive(Clone)]
pub struct Spectral {
    n: usize,
    length: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        Self::with_size(grid.n(), grid.length())
    }

    pub fn with_size(n: usize, length: f64) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            length,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scratch_len(&self) -> usize {
        self.fwd
            .get_inplace_scratch_len()
            .max(self.inv.get_inplace_scratch_len())
    }

    pub fn scratch(&self) -> Vec<C64> {
        vec![C64::new(0.0, 0.0); self.scratch_len()]
    }

    /// Unnormalized `X[m] = sum_b x[b] exp(-2 pi i b m / n)`.
    pub fn forward(&self, buf: &mut [C64], scratch: &mut [C64]) {
        self.fwd.process_with_scratch(buf, scratch);
    }

    /// Unnormalized `x[b] = sum_m X[m] exp(+2 pi i b m / n)`.
    pub fn inverse(&self, buf: &mut [C64], scratch: &mut [C64]) {
        self.inv.process_with_scratch(buf, scratch);
    }

    pub fn signed(&self, b: usize) -> i64 {
        if b < self.n / 2 {
            b as i64
        } else {
            b as i64 - self.n as i64
        }
    }

    pub fn is_nyquist(&self, b: usize) -> bool {
        b == self.n / 2
    }

    /// Spatial wavenumber `2 pi q / L` of bin `b`.
    pub fn kappa(&self, b: usize) -> f64 {
        2.0 * PI * self.signed(b) as f64 / self.length
    }

    /// Multiplier for the `order`-th r-derivative in bin `b`. The Nyquist
    /// mode is treated as a cosine, so odd derivatives annihilate it.
    pub fn derivative_factor(&self, b: usize, order: u32) -> C64 {
        if order == 0 {
            return C64::new(1.0, 0.0);
        }
        if self.is_nyquist(b) && order % 2 == 1 {
            return C64::new(0.0, 0.0);
        }
        C64::new(0.0, self.kappa(b)).powu(order)
    }

    /// `order`-th derivative of a periodic band-limited field.
    pub fn derivative(&self, field: &[C64], order: u32) -> Vec<C64> {
        let mut buf = field.to_vec();
        let mut scratch = self.scratch();
        self.forward(&mut buf, &mut scratch);
        let norm = 1.0 / self.n as f64;
        for (b, v) in buf.iter_mut().enumerate() {
            *v *= self.derivative_factor(b, order) * norm;
        }
        self.inverse(&mut buf, &mut scratch);
        buf
    }

    pub fn derivative_real(&self, field: &[f64], order: u32) -> Vec<f64> {
        let c: Vec<C64> = field.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.derivative(&c, order).into_iter().map(|v| v.re).collect()
    }

    /// Values of the trigonometric interpolant shifted by `delta`
    /// (`out[i] = f(r_i + delta)`), Nyquist mode as a cosine.
    pub fn shift(&self, field: &[C64], delta: f64) -> Vec<C64> {
        let mut buf = field.to_vec();
        let mut scratch = self.scratch();
        self.forward(&mut buf, &mut scratch);
        let norm = 1.0 / self.n as f64;
        for (b, v) in buf.iter_mut().enumerate() {
            let kap = self.kappa(b);
            let phase = if self.is_nyquist(b) {
                C64::new((kap * delta).cos(), 0.0)
            } else {
                C64::from_polar(1.0, kap * delta)
            };
            *v *= phase * norm;
        }
        self.inverse(&mut buf, &mut scratch);
        buf
    }

    /// Values at the half-grid nodes `r_i + dr/2`.
    pub fn half_shift(&self, field: &[C64]) -> Vec<C64> {
        self.shift(field, 0.5 * self.length / self.n as f64)
    }

    pub fn half_shift_real(&self, field: &[f64]) -> Vec<f64> {
        let c: Vec<C64> = field.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.half_shift(&c).into_iter().map(|v| v.re).collect()
    }

    /// Normalized Fourier coefficients `c_q` (`f(r) = sum_q c_q e^{i kappa_q r}`), bin order.
    pub fn coefficients(&self, field: &[C64]) -> Vec<C64> {
        let mut buf = field.to_vec();
        let mut scratch = self.scratch();
        self.forward(&mut buf, &mut scratch);
        let norm = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|v| *v *= norm);
        buf
    }

    /// True when bin `b` survives the 2/3 dealiasing rule.
    pub fn keeps_two_thirds(&self, b: usize) -> bool {
        3 * self.signed(b).unsigned_abs() as usize <= self.n
    }

    /// Zero every mode above `n/3` of a field given in position space.
    pub fn dealias(&self, field: &mut [C64], scratch: &mut [C64]) {
        self.forward(field, scratch);
        let norm = 1.0 / self.n as f64;
        for (b, v) in field.iter_mut().enumerate() {
            if self.keeps_two_thirds(b) {
                *v *= norm;
            } else {
                *v = C64::new(0.0, 0.0);
            }
        }
        self.inverse(field, scratch);
    }
}

/// Centered (ascending wavenumber) index to FFT bin; an involution for even `n`.
#[inline]
pub fn center_to_bin(idx: usize, n: usize) -> usize {
    (idx + n / 2) % n
}
