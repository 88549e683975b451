//! Physical parameters and the periodic position / wavenumber grid pair.
//!
//! The wavenumber axis carries the scale parameter: `k_j = 2 pi eps j / L`,
//! so the phase `k_j y_m / eps` is always `2 pi j m / n` and every transform
//! in the crate uses the kernel `exp(i k y / eps)` without rescaling.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Normalization constant `N` of the two-component splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitNorm {
    /// `N = 1/2`, so that `Phi = phi + chi`.
    #[default]
    Half,
    /// `N = 1/sqrt(2)`.
    InvSqrt2,
}

impl SplitNorm {
    pub fn value(self) -> f64 {
        match self {
            SplitNorm::Half => 0.5,
            SplitNorm::InvSqrt2 => std::f64::consts::FRAC_1_SQRT_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub epsilon: f64,
    pub c: f64,
    pub omega_p0: f64,
    pub split_norm: SplitNorm,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            c: 1.0,
            omega_p0: 1.0,
            split_norm: SplitNorm::Half,
        }
    }
}

impl SimParams {
    pub fn new(epsilon: f64, c: f64, omega_p0: f64, split_norm: SplitNorm) -> Result<Self> {
        let p = Self {
            epsilon,
            c,
            omega_p0,
            split_norm,
        };
        p.validate()?;
        Ok(p)
    }

    /// Unit constants `c = omega_p0 = 1` with the given scale parameter.
    pub fn normalized(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("must be finite and > 0, got {v}")))
            }
        };
        positive("params.epsilon", self.epsilon)?;
        positive("params.c", self.c)?;
        positive("params.omega_p0", self.omega_p0)
    }

    /// Free-particle symbol `c^2 k^2 / omega_p0`.
    pub fn h0(&self, k: f64) -> f64 {
        self.c * self.c * k * k / self.omega_p0
    }

    /// Uniform-medium dispersion `sqrt(k^2 c^2 + omega_p0^2)`.
    pub fn dispersion(&self, k: f64) -> f64 {
        (k * k * self.c * self.c + self.omega_p0 * self.omega_p0).sqrt()
    }
}

/// Periodic position grid and its conjugate wavenumber grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
    epsilon: f64,
}

/// Build the grid pair for `n` points on a period `length`.
pub fn build_grid(n: usize, length: f64, params: &SimParams) -> Result<Grid> {
    params.validate()?;
    if n < 4 || !n.is_multiple_of(2) {
        return Err(invalid("grid.n", format!("must be even and >= 4, got {n}")));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(invalid("grid.length", format!("must be > 0, got {length}")));
    }
    Ok(Grid {
        n,
        length,
        epsilon: params.epsilon,
    })
}

impl Grid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dr(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn dk(&self) -> f64 {
        2.0 * PI * self.epsilon / self.length
    }

    /// Position of node `i`.
    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dr()
    }

    /// Wavenumber stored at index `idx` (ascending, `k = 0` at `idx = n/2`).
    pub fn k(&self, idx: usize) -> f64 {
        (idx as f64 - (self.n / 2) as f64) * self.dk()
    }

    /// Separation `y_m` for signed lag `m`.
    pub fn y(&self, m: i64) -> f64 {
        m as f64 * self.dr()
    }

    pub fn r_values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.r(i)).collect()
    }

    pub fn k_values(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.k(j)).collect()
    }

    /// Largest |k| on the grid.
    pub fn k_max(&self) -> f64 {
        (self.n / 2) as f64 * self.dk()
    }

    /// Largest spatial wavenumber `pi n / L` resolved by the position grid.
    pub fn kappa_max(&self) -> f64 {
        PI * self.n as f64 / self.length
    }

    /// Index of the k node equal to `k`, if `k` lies on the grid.
    pub fn k_index(&self, k: f64) -> Result<usize> {
        let s = k / self.dk();
        let j = s.round();
        let half = (self.n / 2) as f64;
        if (s - j).abs() > 1e-9 || j < -half || j >= half {
            return Err(Error::OffGrid { k, dk: self.dk() });
        }
        Ok((j + half) as usize)
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            Err(Error::GridMismatch {
                expected: self.n,
                found: len,
            })
        } else {
            Ok(())
        }
    }
}
