//! Time integration of the four coupled real phase-space densities.
//!
//! With `A = W_2 + W_3`, `P = D - S` and `Q = H0(k^) + C`:
//!
//! ```text
//! dW0/dt = -P A
//! dW1/dt =  Q A / eps + 2 w_p0 W2 / eps
//! dW2/dt =  P W0 - Q W1 / eps - 2 w_p0 W1 / eps
//! dW3/dt = -P W0 + Q W1 / eps
//! ```

use ndarray::{Array2, Zip};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, SimParams};
use crate::medium::MediumProfile;
use crate::moyal::{r_derivative_pair, MoyalSymbols};
use crate::spectral::{center_to_bin, Spectral, C64};
use crate::wigner::PhaseSpaceDensities;

/// Imaginary-axis extent of the classical RK4 stability region (rounded down).
pub const RK4_IMAGINARY_LIMIT: f64 = 2.8;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportState {
    pub densities: PhaseSpaceDensities,
    pub t: f64,
    pub step_count: u64,
}

impl TransportState {
    pub fn new(densities: PhaseSpaceDensities) -> Self {
        let t = densities.t;
        Self {
            densities,
            t,
            step_count: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverControls {
    pub dt: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub observer_stride: usize,
}

impl SolverControls {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            cfl_safety: 1.0,
            observer_stride: 1,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.observer_stride = stride;
        self
    }

    pub fn with_safety(mut self, safety: f64) -> Self {
        self.cfl_safety = safety;
        self
    }

    pub(crate) fn validate(&self, start: f64) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(crate::error::invalid("solver.dt", "must be positive and finite"));
        }
        if !(self.t_end >= start && self.t_end.is_finite()) {
            return Err(crate::error::invalid(
                "solver.t_end",
                "must be finite and not before the start time",
            ));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(crate::error::invalid("solver.cfl_safety", "must lie in (0, 1]"));
        }
        if self.observer_stride == 0 {
            return Err(crate::error::invalid("solver.observer_stride", "must be at least 1"));
        }
        Ok(())
    }

    /// Number of equal steps covering `[start, t_end]` with step at most `dt`.
    pub fn steps_from(&self, start: f64) -> (u64, f64) {
        let span = self.t_end - start;
        if span <= 0.0 {
            return (0, 0.0);
        }
        let n = (span / self.dt).ceil().max(1.0) as u64;
        (n, span / n as f64)
    }
}

/// Spectral-radius estimate of the transport right-hand side.
pub fn transport_spectral_radius(grid: &Grid, medium: &MediumProfile, params: &SimParams) -> Result<f64> {
    let km = grid.k_max();
    let w0 = params.omega_p0;
    let osc = (2.0 * params.h0(km) + 2.0 * w0 + 2.0 * medium.max_abs(grid)? / w0) / params.epsilon;
    Ok(osc + params.c * params.c / w0 * km * grid.kappa_max())
}

/// Largest admissible RK4 step for the transport system.
pub fn transport_dt_bound(grid: &Grid, medium: &MediumProfile, params: &SimParams, safety: f64) -> Result<f64> {
    Ok(safety * RK4_IMAGINARY_LIMIT / transport_spectral_radius(grid, medium, params)?)
}

/// Precomputed operator data for repeated right-hand-side evaluations.
#[derive(Debug, Clone)]
pub struct TransportOperator {
    grid: Grid,
    params: SimParams,
    medium: MediumProfile,
    symbols: Option<MoyalSymbols>,
    spectral: Spectral,
}

impl TransportOperator {
    pub fn new(grid: &Grid, medium: &MediumProfile, params: &SimParams) -> Result<Self> {
        params.validate()?;
        medium.validate(grid)?;
        let symbols = if medium.is_zero() {
            None
        } else {
            Some(MoyalSymbols::new(medium, grid, params)?)
        };
        Ok(Self {
            grid: grid.clone(),
            params: *params,
            medium: medium.clone(),
            symbols,
            spectral: Spectral::new(grid),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `(S A, C A, S W0, C W1)`, row by row in the lag variable.
    fn moyal_terms(
        &self,
        sym: &MoyalSymbols,
        a: &Array2<f64>,
        w0: &Array2<f64>,
        w1: &Array2<f64>,
        m: f64,
    ) -> [Array2<f64>; 4] {
        let n = self.grid.n();
        let sp = &self.spectral;
        let norm = m / n as f64;
        let rows: Vec<[Vec<f64>; 4]> = (0..n)
            .into_par_iter()
            .map_init(
                || {
                    (
                        vec![C64::new(0.0, 0.0); n],
                        vec![C64::new(0.0, 0.0); n],
                        vec![C64::new(0.0, 0.0); n],
                        sp.scratch(),
                    )
                },
                |(z, u, p, scratch), i| {
                    let (ar, w0r, w1r) = (a.row(i), w0.row(i), w1.row(i));
                    for b in 0..n {
                        let c = center_to_bin(b, n);
                        z[b] = C64::new(ar[c], w0r[c]);
                        u[b] = C64::new(w1r[c], 0.0);
                    }
                    sp.forward(z, scratch);
                    sp.forward(u, scratch);
                    let s = sym.sine.row(i);
                    let co = sym.cosine.row(i);
                    // Split the packed spectrum with Hermitian symmetry, then
                    // repack the two real outputs of each inverse transform.
                    for b in 0..n {
                        let zb = z[b];
                        let zm = z[(n - b) % n].conj();
                        let fa = 0.5 * (zb + zm);
                        let fw0 = C64::new(0.0, -0.5) * (zb - zm);
                        let i_s = C64::new(0.0, s[b] * norm);
                        let i_c = C64::new(0.0, co[b] * norm);
                        p[b] = i_s * fa + i_c * fa;
                        u[b] = i_s * fw0 + i_c * u[b];
                    }
                    sp.inverse(p, scratch);
                    sp.inverse(u, scratch);
                    let mut res = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
                    for idx in 0..n {
                        let b = center_to_bin(idx, n);
                        res[0][idx] = p[b].re;
                        res[1][idx] = p[b].im;
                        res[2][idx] = u[b].re;
                        res[3][idx] = u[b].im;
                    }
                    res
                },
            )
            .collect();
        let mut out = [
            Array2::zeros((n, n)),
            Array2::zeros((n, n)),
            Array2::zeros((n, n)),
            Array2::zeros((n, n)),
        ];
        for (i, res) in rows.iter().enumerate() {
            for (o, r) in out.iter_mut().zip(res) {
                o.row_mut(i).iter_mut().zip(r).for_each(|(x, v)| *x = *v);
            }
        }
        out
    }

    /// Time derivative of the densities at time `t`.
    pub fn rhs(&self, d: &PhaseSpaceDensities, t: f64) -> Result<PhaseSpaceDensities> {
        let n = self.grid.n();
        if d.w0.dim() != (n, n) {
            return Err(Error::GridMismatch {
                expected: n,
                found: d.w0.nrows(),
            });
        }
        let p = &self.params;
        let a = &d.w2 + &d.w3;
        let (da, dw0) = r_derivative_pair(&a, &d.w0, 1, &self.spectral);
        let (d2a, d2w1) = r_derivative_pair(&a, &d.w1, 2, &self.spectral);
        let moyal = match &self.symbols {
            Some(sym) => {
                let m = self.medium.modulation_at(t);
                (m != 0.0).then(|| self.moyal_terms(sym, &a, &d.w0, &d.w1, m))
            }
            None => None,
        };
        let cc = p.c * p.c / p.omega_p0;
        let e2 = p.epsilon * p.epsilon / 4.0;
        let inv_eps = 1.0 / p.epsilon;
        let two_w = 2.0 * p.omega_p0;
        let kv = self.grid.k_values();
        let mut out = PhaseSpaceDensities::zeros(n, t);
        {
            let [o0, o1, o2, o3] = out.components_mut();
            Zip::indexed(o0)
                .and(o1)
                .and(o2)
                .and(o3)
                .par_for_each(|(i, j), o0, o1, o2, o3| {
                    let k = kv[j];
                    let (mut pa, mut qa, mut pw0, mut qw1) = (
                        cc * k * da[[i, j]],
                        cc * (k * k * a[[i, j]] - e2 * d2a[[i, j]]),
                        cc * k * dw0[[i, j]],
                        cc * (k * k * d.w1[[i, j]] - e2 * d2w1[[i, j]]),
                    );
                    if let Some([sa, ca, sw0, cw1]) = &moyal {
                        pa -= sa[[i, j]];
                        qa += ca[[i, j]];
                        pw0 -= sw0[[i, j]];
                        qw1 += cw1[[i, j]];
                    }
                    *o0 = -pa;
                    *o1 = (qa + two_w * d.w2[[i, j]]) * inv_eps;
                    *o2 = pw0 - (qw1 + two_w * d.w1[[i, j]]) * inv_eps;
                    *o3 = -pw0 + qw1 * inv_eps;
                });
        }
        Ok(out)
    }

    /// One classical RK4 step of size `dt` from `d`.
    pub fn rk4_step(&self, d: &PhaseSpaceDensities, dt: f64) -> Result<PhaseSpaceDensities> {
        let t = d.t;
        let stage = |base: &PhaseSpaceDensities, k: &PhaseSpaceDensities, h: f64, t: f64| {
            let mut s = base.clone();
            for (x, dx) in s.components_mut().into_iter().zip(k.components()) {
                x.scaled_add(h, dx);
            }
            s.t = t;
            s
        };
        let k1 = self.rhs(d, t)?;
        let k2 = self.rhs(&stage(d, &k1, 0.5 * dt, t + 0.5 * dt), t + 0.5 * dt)?;
        let k3 = self.rhs(&stage(d, &k2, 0.5 * dt, t + 0.5 * dt), t + 0.5 * dt)?;
        let k4 = self.rhs(&stage(d, &k3, dt, t + dt), t + dt)?;
        let mut next = d.clone();
        let [n0, n1, n2, n3] = next.components_mut();
        for (l, x) in [n0, n1, n2, n3].into_iter().enumerate() {
            let (a, b, c, e) = (
                k1.components()[l],
                k2.components()[l],
                k3.components()[l],
                k4.components()[l],
            );
            Zip::from(x).and(a).and(b).and(c).and(e).for_each(|x, a, b, c, e| {
                *x += dt / 6.0 * (a + 2.0 * b + 2.0 * c + e);
            });
        }
        next.t = t + dt;
        Ok(next)
    }
}

/// Right-hand side of the transport system for one state.
pub fn transport_rhs(
    d: &PhaseSpaceDensities,
    grid: &Grid,
    medium: &MediumProfile,
    params: &SimParams,
    t: f64,
) -> Result<PhaseSpaceDensities> {
    TransportOperator::new(grid, medium, params)?.rhs(d, t)
}

/// RK4 integration to `controls.t_end`. Snapshots (the initial state, every
/// `observer_stride` steps, and the final state) are passed to `observer` and
/// collected into the returned trajectory.
pub fn evolve_transport_with<F>(
    state: &TransportState,
    grid: &Grid,
    medium: &MediumProfile,
    params: &SimParams,
    controls: &SolverControls,
    mut observer: F,
) -> Result<Vec<TransportState>>
where
    F: FnMut(&TransportState),
{
    controls.validate(state.t)?;
    let op = TransportOperator::new(grid, medium, params)?;
    let bound = transport_dt_bound(grid, medium, params, controls.cfl_safety)?;
    if controls.dt > bound {
        return Err(Error::Stability { dt: controls.dt, bound });
    }
    let (steps, dt) = controls.steps_from(state.t);
    let t0 = state.t;
    let mut cur = state.clone();
    cur.densities.t = cur.t;
    let mut out = vec![cur.clone()];
    observer(&cur);
    for s in 1..=steps {
        let next = op.rk4_step(&cur.densities, dt)?;
        cur.step_count += 1;
        cur.t = t0 + s as f64 * dt;
        cur.densities = next;
        cur.densities.t = cur.t;
        if cur
            .densities
            .components()
            .iter()
            .any(|c| c.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::NonFinite { step: cur.step_count });
        }
        if s % controls.observer_stride as u64 == 0 || s == steps {
            observer(&cur);
            out.push(cur.clone());
        }
    }
    Ok(out)
}

pub fn evolve_transport(
    state: &TransportState,
    grid: &Grid,
    medium: &MediumProfile,
    params: &SimParams,
    controls: &SolverControls,
) -> Result<Vec<TransportState>> {
    evolve_transport_with(state, grid, medium, params, controls, |_| {})
}

/// Phase-space integral of `W_0`.
pub fn charge(d: &PhaseSpaceDensities, grid: &Grid) -> f64 {
    d.w0.sum() * grid.dk() * grid.dr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use std::f64::consts::PI;

    fn single_wave(grid: &Grid) -> PhaseSpaceDensities {
        let mut d = PhaseSpaceDensities::zeros(grid.n(), 0.0);
        let j = grid.k_index(3f64.sqrt()).unwrap();
        let w = 1.0 / grid.dk();
        d.w0.column_mut(j).fill(2.0 * w);
        d.w2.column_mut(j).fill(-1.5 * w);
        d.w3.column_mut(j).fill(2.5 * w);
        d
    }

    #[test]
    fn single_wave_is_stationary() {
        let p = SimParams::default();
        let g = build_grid(32, 8.0 * PI / 3f64.sqrt(), &p).unwrap();
        let d = single_wave(&g);
        let r = transport_rhs(&d, &g, &MediumProfile::zero(), &p, 0.0).unwrap();
        for c in r.components() {
            assert!(c.iter().all(|v| v.abs() < 1e-12));
        }
        assert!((charge(&d, &g) - 2.0 * g.length()).abs() < 1e-12);
    }

    #[test]
    fn zero_state_has_zero_rhs() {
        let p = SimParams::default();
        let g = build_grid(16, 10.0, &p).unwrap();
        let d = PhaseSpaceDensities::zeros(16, 0.0);
        let r = transport_rhs(&d, &g, &MediumProfile::sinusoid(0.1, 10.0, 0.0), &p, 0.0).unwrap();
        assert!(r.components().iter().all(|c| c.iter().all(|v| *v == 0.0)));
        assert_eq!(charge(&d, &g), 0.0);
    }

    #[test]
    fn oversized_step_is_refused() {
        let p = SimParams::default();
        let g = build_grid(16, 10.0, &p).unwrap();
        let m = MediumProfile::zero();
        let bound = transport_dt_bound(&g, &m, &p, 1.0).unwrap();
        let st = TransportState::new(PhaseSpaceDensities::zeros(16, 0.0));
        let e = evolve_transport(&st, &g, &m, &p, &SolverControls::new(bound * 1.01, 1.0)).unwrap_err();
        assert!(matches!(e, Error::Stability { .. }));
    }

    #[test]
    fn step_count_covers_interval() {
        let c = SolverControls::new(0.3, 1.0);
        let (n, dt) = c.steps_from(0.0);
        assert_eq!(n, 4);
        assert!((dt - 0.25).abs() < 1e-15);
    }
}
