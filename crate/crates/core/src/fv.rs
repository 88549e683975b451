//! Two-component (Feshbach-Villars) form of the Klein-Gordon field.
//!
//! `phi, chi = N (Phi +/- (i eps / omega_p0) dPhi/dt)` and the first-order
//! evolution `i eps dPsi/dt = H_m Psi` with
//! `H_m = (tau_3 + i tau_2)/(2 omega_p0) (-eps^2 c^2 lap + w~_p^2) + omega_p0 tau_3`.

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{Grid, SimParams};
use crate::medium::MediumProfile;
use crate::spectral::{Spectral, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct TwoComponentField {
    pub phi: Vec<C64>,
    pub chi: Vec<C64>,
    pub t: f64,
}

impl TwoComponentField {
    pub fn zeros(n: usize, t: f64) -> Self {
        Self {
            phi: vec![C64::new(0.0, 0.0); n],
            chi: vec![C64::new(0.0, 0.0); n],
            t,
        }
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

pub fn fv_split(phi_field: &[C64], dphi_dt: &[C64], params: &SimParams) -> Result<TwoComponentField> {
    if phi_field.len() != dphi_dt.len() {
        return Err(crate::Error::GridMismatch {
            expected: phi_field.len(),
            found: dphi_dt.len(),
        });
    }
    let norm = params.split_norm.value();
    let a = Complex64::new(0.0, params.epsilon / params.omega_p0);
    let (phi, chi) = phi_field
        .iter()
        .zip(dphi_dt)
        .map(|(&f, &d)| (norm * (f + a * d), norm * (f - a * d)))
        .unzip();
    Ok(TwoComponentField { phi, chi, t: 0.0 })
}

/// Inverse of [`fv_split`]: returns `(Phi, dPhi/dt)`.
pub fn fv_recombine(psi: &TwoComponentField, params: &SimParams) -> (Vec<C64>, Vec<C64>) {
    let two_n = 2.0 * params.split_norm.value();
    let b = Complex64::new(0.0, -params.omega_p0 / params.epsilon);
    psi.phi
        .iter()
        .zip(&psi.chi)
        .map(|(&p, &c)| ((p + c) / two_n, b * (p - c) / two_n))
        .unzip()
}

/// Reusable evaluator of `dPsi/dt = H_m Psi / (i eps)` on a fixed grid.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    params: SimParams,
    spectral: Spectral,
    medium: MediumProfile,
    shape: Vec<f64>,
    laplacian: Vec<f64>,
}

impl Hamiltonian {
    pub fn new(grid: &Grid, medium: &MediumProfile, params: &SimParams) -> Result<Self> {
        params.validate()?;
        let spectral = Spectral::new(grid);
        let shape = medium.shape_on_grid(grid)?;
        let laplacian = (0..grid.n())
            .map(|b| spectral.derivative_factor(b, 2).re / grid.n() as f64)
            .collect();
        Ok(Self {
            params: *params,
            spectral,
            medium: medium.clone(),
            shape,
            laplacian,
        })
    }

    /// `(-eps^2 c^2 lap + w~_p^2) s / (2 omega_p0)`, product dealiased.
    pub(crate) fn mass_operator(&self, s: &[C64], t: f64, scratch: &mut [C64]) -> Vec<C64> {
        let p = &self.params;
        let mut lap = s.to_vec();
        self.spectral.forward(&mut lap, scratch);
        for (v, f) in lap.iter_mut().zip(&self.laplacian) {
            *v *= *f;
        }
        self.spectral.inverse(&mut lap, scratch);
        let coef = -p.epsilon * p.epsilon * p.c * p.c;
        let mut out: Vec<C64> = lap.iter().map(|v| v * coef).collect();
        if !self.medium.is_zero() {
            let m = self.medium.modulation_at(t);
            let mut prod: Vec<C64> = s.iter().zip(&self.shape).map(|(v, w)| v * (w * m)).collect();
            self.spectral.dealias(&mut prod, scratch);
            out.iter_mut().zip(&prod).for_each(|(o, q)| *o += q);
        }
        let inv = 1.0 / (2.0 * p.omega_p0);
        out.iter_mut().for_each(|v| *v *= inv);
        out
    }

    pub fn apply(&self, psi: &TwoComponentField, t: f64) -> Result<TwoComponentField> {
        let n = self.spectral.n();
        if psi.phi.len() != n || psi.chi.len() != n {
            return Err(crate::Error::GridMismatch {
                expected: n,
                found: psi.phi.len().min(psi.chi.len()),
            });
        }
        let mut scratch = self.spectral.scratch();
        let s: Vec<C64> = psi.phi.iter().zip(&psi.chi).map(|(a, b)| a + b).collect();
        let ms = self.mass_operator(&s, t, &mut scratch);
        let w0 = self.params.omega_p0;
        let k = Complex64::new(0.0, -1.0 / self.params.epsilon);
        let phi = ms.iter().zip(&psi.phi).map(|(m, p)| k * (m + w0 * p)).collect();
        let chi = ms.iter().zip(&psi.chi).map(|(m, c)| k * (-m - w0 * c)).collect();
        Ok(TwoComponentField { phi, chi, t: psi.t })
    }
}

/// Time derivative `H_m Psi / (i eps)` of the two-component field.
pub fn apply_hamiltonian(
    psi: &TwoComponentField,
    grid: &Grid,
    medium: &MediumProfile,
    params: &SimParams,
    t: f64,
) -> Result<TwoComponentField> {
    grid.check_len(psi.len())?;
    Hamiltonian::new(grid, medium, params)?.apply(psi, t)
}
