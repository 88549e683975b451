//! Pseudo-spectral reference integrator for the scalar wave equation
//! `eps^2 Phi_tt - eps^2 c^2 Phi_rr + (w_p0^2 + w~_p^2(r, t)) Phi = 0`,
//! advanced as a first-order system in `(Phi, dPhi/dt)` with classical RK4.

use crate::error::{Error, Result};
use crate::fv::{fv_recombine, fv_split, Hamiltonian, TwoComponentField};
use crate::grid::{Grid, SimParams};
use crate::medium::MediumProfile;
use crate::spectral::{Spectral, C64};
use crate::transport::{SolverControls, RK4_IMAGINARY_LIMIT};

#[derive(Debug, Clone, PartialEq)]
pub struct KGState {
    pub phi: Vec<C64>,
    pub dphi_dt: Vec<C64>,
    pub t: f64,
}

impl KGState {
    pub fn new(phi: Vec<C64>, dphi_dt: Vec<C64>, t: f64) -> Self {
        Self { phi, dphi_dt, t }
    }

    pub fn zeros(n: usize, t: f64) -> Self {
        Self::new(vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n], t)
    }

    fn axpy(&self, h: f64, d: &KGState) -> KGState {
        KGState {
            phi: self.phi.iter().zip(&d.phi).map(|(a, b)| a + b * h).collect(),
            dphi_dt: self.dphi_dt.iter().zip(&d.dphi_dt).map(|(a, b)| a + b * h).collect(),
            t: self.t,
        }
    }

    fn is_finite(&self) -> bool {
        self.phi
            .iter()
            .chain(&self.dphi_dt)
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Integration scheme for [`kg_evolve_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KgMethod {
    /// RK4 on `(Phi, dPhi/dt)`.
    #[default]
    SecondOrder,
    /// RK4 on the two-component field, recombined for output.
    Spinor,
}

pub fn dispersion_omega(k: f64, params: &SimParams) -> f64 {
    params.dispersion(k)
}

/// Largest admissible RK4 step for the field equation.
pub fn kg_dt_bound(grid: &Grid, medium: &MediumProfile, params: &SimParams, safety: f64) -> Result<f64> {
    let km = grid.kappa_max();
    let w2 = params.c * params.c * km * km + params.omega_p0 * params.omega_p0 + medium.max_abs(grid)?;
    Ok(safety * RK4_IMAGINARY_LIMIT * params.epsilon / w2.sqrt())
}

#[derive(Debug, Clone)]
struct KgOperator {
    params: SimParams,
    spectral: Spectral,
    medium: MediumProfile,
    shape: Vec<f64>,
    laplacian: Vec<f64>,
}

impl KgOperator {
    fn new(grid: &Grid, medium: &MediumProfile, params: &SimParams) -> Result<Self> {
        let spectral = Spectral::new(grid);
        let n = grid.n();
        let laplacian = (0..n).map(|b| spectral.derivative_factor(b, 2).re).collect();
        Ok(Self {
            params: *params,
            spectral,
            medium: medium.clone(),
            shape: medium.shape_on_grid(grid)?,
            laplacian,
        })
    }

    fn rhs(&self, s: &KGState, t: f64) -> KGState {
        let p = &self.params;
        let n = self.spectral.n();
        let sp = &self.spectral;
        let mut scratch = sp.scratch();
        let mut spec = s.phi.clone();
        sp.forward(&mut spec, &mut scratch);
        let c2 = p.c * p.c;
        let inv_e2 = 1.0 / (p.epsilon * p.epsilon);
        for (v, l) in spec.iter_mut().zip(&self.laplacian) {
            *v *= c2 * l;
        }
        if !self.medium.is_zero() {
            let m = self.medium.modulation_at(t);
            let mut prod: Vec<C64> = s.phi.iter().zip(&self.shape).map(|(v, w)| v * (w * m)).collect();
            sp.forward(&mut prod, &mut scratch);
            for (b, (v, q)) in spec.iter_mut().zip(&prod).enumerate() {
                if sp.keeps_two_thirds(b) {
                    *v -= q * inv_e2;
                }
            }
        }
        sp.inverse(&mut spec, &mut scratch);
        let norm = 1.0 / n as f64;
        let w02 = p.omega_p0 * p.omega_p0 * inv_e2;
        let acc = spec.iter().zip(&s.phi).map(|(v, f)| v * norm - f * w02).collect();
        KGState {
            phi: s.dphi_dt.clone(),
            dphi_dt: acc,
            t,
        }
    }

    fn step(&self, s: &KGState, dt: f64) -> KGState {
        let t = s.t;
        let k1 = self.rhs(s, t);
        let k2 = self.rhs(&s.axpy(0.5 * dt, &k1), t + 0.5 * dt);
        let k3 = self.rhs(&s.axpy(0.5 * dt, &k2), t + 0.5 * dt);
        let k4 = self.rhs(&s.axpy(dt, &k3), t + dt);
        let h = dt / 6.0;
        let comb = |a: &[C64], b: &[C64], c: &[C64], d: &[C64], base: &[C64]| -> Vec<C64> {
            (0..base.len())
                .map(|i| base[i] + (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]) * h)
                .collect()
        };
        KGState {
            phi: comb(&k1.phi, &k2.phi, &k3.phi, &k4.phi, &s.phi),
            dphi_dt: comb(&k1.dphi_dt, &k2.dphi_dt, &k3.dphi_dt, &k4.dphi_dt, &s.dphi_dt),
            t: t + dt,
        }
    }
}

fn spinor_step(h: &Hamiltonian, psi: &TwoComponentField, dt: f64) -> Result<TwoComponentField> {
    let t = psi.t;
    let axpy = |a: &TwoComponentField, k: &TwoComponentField, s: f64, t: f64| TwoComponentField {
        phi: a.phi.iter().zip(&k.phi).map(|(x, y)| x + y * s).collect(),
        chi: a.chi.iter().zip(&k.chi).map(|(x, y)| x + y * s).collect(),
        t,
    };
    let k1 = h.apply(psi, t)?;
    let k2 = h.apply(&axpy(psi, &k1, 0.5 * dt, t + 0.5 * dt), t + 0.5 * dt)?;
    let k3 = h.apply(&axpy(psi, &k2, 0.5 * dt, t + 0.5 * dt), t + 0.5 * dt)?;
    let k4 = h.apply(&axpy(psi, &k3, dt, t + dt), t + dt)?;
    let s = dt / 6.0;
    let comb = |base: &[C64], a: &[C64], b: &[C64], c: &[C64], d: &[C64]| -> Vec<C64> {
        (0..base.len())
            .map(|i| base[i] + (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]) * s)
            .collect()
    };
    Ok(TwoComponentField {
        phi: comb(&psi.phi, &k1.phi, &k2.phi, &k3.phi, &k4.phi),
        chi: comb(&psi.chi, &k1.chi, &k2.chi, &k3.chi, &k4.chi),
        t: t + dt,
    })
}

/// RK4 integration of the field equation with snapshot callback; see
/// [`crate::transport::evolve_transport_with`] for the snapshot schedule.
pub fn kg_evolve_with<F>(
    state: &KGState,
    grid: &Grid,
    medium: &MediumProfile,
    params: &SimParams,
    controls: &SolverControls,
    method: KgMethod,
    mut observer: F,
) -> Result<Vec<KGState>>
where
    F: FnMut(&KGState),
{
    params.validate()?;
    medium.validate(grid)?;
    grid.check_len(state.phi.len())?;
    grid.check_len(state.dphi_dt.len())?;
    controls.validate(state.t)?;
    let bound = kg_dt_bound(grid, medium, params, controls.cfl_safety)?;
    if controls.dt > bound {
        return Err(Error::Stability { dt: controls.dt, bound });
    }
    let (steps, dt) = controls.steps_from(state.t);
    let t0 = state.t;
    let mut out = vec![state.clone()];
    observer(state);
    let op = KgOperator::new(grid, medium, params)?;
    let ham = match method {
        KgMethod::Spinor => Some(Hamiltonian::new(grid, medium, params)?),
        KgMethod::SecondOrder => None,
    };
    let mut cur = state.clone();
    let mut psi = match method {
        KgMethod::Spinor => {
            let mut p = fv_split(&state.phi, &state.dphi_dt, params)?;
            p.t = state.t;
            Some(p)
        }
        KgMethod::SecondOrder => None,
    };
    for s in 1..=steps {
        let t = t0 + s as f64 * dt;
        match (&ham, psi.as_mut()) {
            (Some(h), Some(p)) => {
                let mut next = spinor_step(h, p, dt)?;
                next.t = t;
                *p = next;
            }
            _ => {
                cur = op.step(&cur, dt);
                cur.t = t;
            }
        }
        let emit = s % controls.observer_stride as u64 == 0 || s == steps;
        if let Some(p) = &psi {
            if emit {
                let (f, d) = fv_recombine(p, params);
                cur = KGState::new(f, d, t);
            }
        }
        let finite = match &psi {
            Some(p) => p.phi.iter().chain(&p.chi).all(|v| v.re.is_finite() && v.im.is_finite()),
            None => cur.is_finite(),
        };
        if !finite {
            return Err(Error::NonFinite { step: s });
        }
        if emit {
            observer(&cur);
            out.push(cur.clone());
        }
    }
    Ok(out)
}

pub fn kg_evolve(
    state: &KGState,
    grid: &Grid,
    medium: &MediumProfile,
    params: &SimParams,
    controls: &SolverControls,
) -> Result<Vec<KGState>> {
    kg_evolve_with(state, grid, medium, params, controls, KgMethod::SecondOrder, |_| {})
}

/// `E = sum dr [eps^2 |Phi_t|^2 + eps^2 c^2 |Phi_r|^2 + w_p^2(r, t) |Phi|^2]`.
pub fn kg_energy(state: &KGState, grid: &Grid, medium: &MediumProfile, params: &SimParams) -> Result<f64> {
    grid.check_len(state.phi.len())?;
    grid.check_len(state.dphi_dt.len())?;
    let wt = medium.sample_grid(grid, state.t)?;
    let dphi = Spectral::new(grid).derivative(&state.phi, 1);
    let e2 = params.epsilon * params.epsilon;
    let c2 = params.c * params.c;
    let w02 = params.omega_p0 * params.omega_p0;
    let sum: f64 = (0..grid.n())
        .map(|i| {
            e2 * state.dphi_dt[i].norm_sqr() + e2 * c2 * dphi[i].norm_sqr() + (w02 + wt[i]) * state.phi[i].norm_sqr()
        })
        .sum();
    Ok(sum * grid.dr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{plane_wave, Branch};
    use crate::grid::build_grid;
    use std::f64::consts::PI;

    #[test]
    fn dispersion_examples() {
        let p = SimParams::default();
        assert!((dispersion_omega(3f64.sqrt(), &p) - 2.0).abs() < 1e-15);
        assert_eq!(dispersion_omega(0.0, &p), 1.0);
        assert!((dispersion_omega(1.0, &p) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn plane_wave_energy() {
        let p = SimParams::default();
        let g = build_grid(32, 8.0 * PI / 3f64.sqrt(), &p).unwrap();
        let (f, d) = plane_wave(1.0, 3f64.sqrt(), Branch::Positive, 0.0, &g, &p);
        let e = kg_energy(&KGState::new(f, d, 0.0), &g, &MediumProfile::zero(), &p).unwrap();
        assert!((e - 8.0 * g.length()).abs() < 1e-11);
        let z = kg_energy(&KGState::zeros(32, 0.0), &g, &MediumProfile::zero(), &p).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn zero_state_stays_zero() {
        let p = SimParams::default();
        let g = build_grid(16, 10.0, &p).unwrap();
        let m = MediumProfile::sinusoid(0.1, 10.0, 0.0);
        let traj = kg_evolve(&KGState::zeros(16, 0.0), &g, &m, &p, &SolverControls::new(0.05, 1.0)).unwrap();
        let last = traj.last().unwrap();
        assert!(last.phi.iter().chain(&last.dphi_dt).all(|v| v.norm() == 0.0));
        assert!((last.t - 1.0).abs() < 1e-14);
    }

    #[test]
    fn stability_gate() {
        let p = SimParams::default();
        let g = build_grid(16, 10.0, &p).unwrap();
        let m = MediumProfile::zero();
        let b = kg_dt_bound(&g, &m, &p, 1.0).unwrap();
        let e = kg_evolve(&KGState::zeros(16, 0.0), &g, &m, &p, &SolverControls::new(1.5 * b, 1.0)).unwrap_err();
        assert!(matches!(e, Error::Stability { .. }));
    }
}
