//! Short-wavelength machinery: local frequency frame, the `U(zeta)`
//! similarity transform, forward/backward action densities and their
//! Eulerian advection.

use ndarray::{Array2, Zip};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, SimParams};
use crate::medium::MediumProfile;
use crate::moyal::r_derivative_pair;
use crate::pauli::Mat2;
use crate::spectral::{center_to_bin, Spectral, C64};
use crate::transport::{SolverControls, RK4_IMAGINARY_LIMIT};
use crate::wigner::{PhaseSpaceDensities, WignerMatrixField};

/// Local frequency `w(k, r, t)` with `zeta = ln(w / w_p0) / 2` and `R = w / w_p0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SWLFrame {
    pub omega_local: Array2<f64>,
    pub zeta: Array2<f64>,
    pub ratio: Array2<f64>,
    pub t: f64,
}

impl SWLFrame {
    pub fn new(grid: &Grid, medium: &MediumProfile, params: &SimParams, t: f64) -> Result<Self> {
        params.validate()?;
        let wt = medium.sample_grid(grid, t)?;
        let n = grid.n();
        let c2 = params.c * params.c;
        let w02 = params.omega_p0 * params.omega_p0;
        let mut omega = Array2::zeros((n, n));
        for ((i, j), w) in omega.indexed_iter_mut() {
            let k = grid.k(j);
            let w2 = c2 * k * k + w02 + wt[i];
            if w2.is_nan() || w2 <= 0.0 {
                return Err(invalid("medium", "local frequency squared must stay positive"));
            }
            *w = w2.sqrt();
        }
        let ratio = omega.mapv(|w| w / params.omega_p0);
        Ok(Self {
            zeta: ratio.mapv(|r| 0.5 * r.ln()),
            omega_local: omega,
            ratio,
            t,
        })
    }

    /// `U(zeta) = exp(-tau_1 zeta)` at one node.
    pub fn u(&self, i: usize, j: usize) -> Mat2 {
        let z = self.zeta[[i, j]];
        Mat2::real(z.cosh(), -z.sinh(), -z.sinh(), z.cosh())
    }

    pub fn u_inv(&self, i: usize, j: usize) -> Mat2 {
        let z = self.zeta[[i, j]];
        Mat2::real(z.cosh(), z.sinh(), z.sinh(), z.cosh())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionDensities {
    pub f: Array2<f64>,
    pub g: Array2<f64>,
    pub t: f64,
}

impl ActionDensities {
    /// `(sum f dk dr, sum g dk dr)`.
    pub fn totals(&self, grid: &Grid) -> (f64, f64) {
        let w = grid.dk() * grid.dr();
        (self.f.sum() * w, self.g.sum() * w)
    }

    /// Real densities with zero interference density and zero constraint residual.
    pub fn to_densities(&self, frame: &SWLFrame) -> PhaseSpaceDensities {
        let n = self.f.nrows();
        let mut d = PhaseSpaceDensities::zeros(n, self.t);
        for ((i, j), r) in frame.ratio.indexed_iter() {
            let (f, g) = (self.f[[i, j]], self.g[[i, j]]);
            let a = (r * r + 1.0) / (2.0 * r);
            let b = (r * r - 1.0) / (2.0 * r);
            d.w0[[i, j]] = f - g;
            d.w2[[i, j]] = -b * (f + g);
            d.w3[[i, j]] = a * (f + g);
        }
        d
    }
}

/// Transformed matrix field `U^-1 W U` and the size of its off-diagonal part.
#[derive(Debug, Clone)]
pub struct DiagonalizedWigner {
    pub matrices: Array2<Mat2>,
    pub residual: Array2<f64>,
}

impl DiagonalizedWigner {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().fold(0.0f64, |m, v| m.max(*v))
    }
}

pub fn swl_diagonalize(w: &WignerMatrixField, frame: &SWLFrame) -> Result<DiagonalizedWigner> {
    let dim = w.w_pp.dim();
    if frame.zeta.dim() != dim {
        return Err(Error::GridMismatch {
            expected: frame.zeta.nrows(),
            found: dim.0,
        });
    }
    let matrices = Array2::from_shape_fn(dim, |(i, j)| frame.u_inv(i, j) * w.matrix_at(i, j) * frame.u(i, j));
    // |tau_1 coefficient|^2 + |tau_2 coefficient|^2 = (|m01|^2 + |m10|^2) / 2
    let residual = matrices.mapv(|m: Mat2| ((m.get(0, 1).norm_sqr() + m.get(1, 0).norm_sqr()) / 2.0).sqrt());
    Ok(DiagonalizedWigner { matrices, residual })
}

/// Forward/backward action densities and the per-node constraint residual.
pub fn extract_fg(d: &PhaseSpaceDensities, frame: &SWLFrame) -> Result<(ActionDensities, Array2<f64>)> {
    if frame.ratio.dim() != d.w0.dim() {
        return Err(Error::GridMismatch {
            expected: frame.ratio.nrows(),
            found: d.w0.nrows(),
        });
    }
    let dim = d.w0.raw_dim();
    let mut f = Array2::zeros(dim);
    let mut g = Array2::zeros(dim);
    let mut residual = Array2::zeros(dim);
    for ((i, j), &r) in frame.ratio.indexed_iter() {
        let a = (r * r + 1.0) / (2.0 * r);
        let b = (r * r - 1.0) / (2.0 * r);
        let (w0, w2, w3) = (d.w0[[i, j]], d.w2[[i, j]], d.w3[[i, j]]);
        let sum = a * w3 + b * w2;
        f[[i, j]] = 0.5 * (sum + w0);
        g[[i, j]] = 0.5 * (sum - w0);
        residual[[i, j]] = a * w2 + b * w3;
    }
    Ok((ActionDensities { f, g, t: d.t }, residual))
}

/// Classical wave action `J = 2 w w_ff / c^2`.
pub fn wave_action(w_ff: &Array2<f64>, frame: &SWLFrame, params: &SimParams) -> Result<Array2<f64>> {
    if frame.omega_local.dim() != w_ff.dim() {
        return Err(Error::GridMismatch {
            expected: frame.omega_local.nrows(),
            found: w_ff.nrows(),
        });
    }
    let c2 = params.c * params.c;
    Ok(Zip::from(w_ff)
        .and(&frame.omega_local)
        .map_collect(|&w, &om| 2.0 * om * w / c2))
}

/// Denominator of the wavenumber-space force in [`advect_action`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForceLaw {
    /// `grad w~_p^2 / (2 w_p0)`.
    #[default]
    RestFrequency,
    /// `grad w~_p^2 / (2 w(k, r))`, the ray-Hamiltonian force.
    LocalFrequency,
}

struct Advector {
    n: usize,
    velocity: Array2<f64>,
    force: Array2<f64>,
    sp: Spectral,
    /// `i y_m / eps` in lag bin order, zero at the unpaired lag.
    dk_factor: Vec<C64>,
}

impl Advector {
    fn new(grid: &Grid, medium: &MediumProfile, params: &SimParams, law: ForceLaw) -> Result<Self> {
        medium.validate(grid)?;
        if !medium.is_static() {
            return Err(invalid("medium.modulation", "action advection needs a static medium"));
        }
        let frame = SWLFrame::new(grid, medium, params, 0.0)?;
        let grad = medium.shape_derivative(grid, 1)?;
        let m = medium.modulation_at(0.0);
        let n = grid.n();
        let c2 = params.c * params.c;
        let mut velocity = Array2::zeros((n, n));
        let mut force = Array2::zeros((n, n));
        for ((i, j), w) in frame.omega_local.indexed_iter() {
            velocity[[i, j]] = c2 * grid.k(j) / w;
            let den = match law {
                ForceLaw::RestFrequency => 2.0 * params.omega_p0,
                ForceLaw::LocalFrequency => 2.0 * w,
            };
            force[[i, j]] = m * grad[i] / den;
        }
        let sp = Spectral::new(grid);
        let dk_factor = (0..n)
            .map(|b| {
                if sp.is_nyquist(b) {
                    C64::new(0.0, 0.0)
                } else {
                    C64::new(0.0, grid.y(sp.signed(b)) / params.epsilon)
                }
            })
            .collect();
        Ok(Self {
            n,
            velocity,
            force,
            sp,
            dk_factor,
        })
    }

    fn spectral_radius(&self, grid: &Grid, params: &SimParams) -> f64 {
        let vmax = self.velocity.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let fmax = self.force.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        vmax * grid.kappa_max() + fmax * grid.length() / (2.0 * params.epsilon)
    }

    /// k-derivatives of two real fields, packed per row.
    fn k_derivative_pair(&self, a: &Array2<f64>, b: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
        let n = self.n;
        let norm = 1.0 / n as f64;
        let rows: Vec<Vec<C64>> = (0..n)
            .into_par_iter()
            .map_init(
                || self.sp.scratch(),
                |scratch, i| {
                    let (ar, br) = (a.row(i), b.row(i));
                    let mut buf: Vec<C64> = (0..n)
                        .map(|bin| {
                            let c = center_to_bin(bin, n);
                            C64::new(ar[c], br[c])
                        })
                        .collect();
                    self.sp.forward(&mut buf, scratch);
                    buf.iter_mut().zip(&self.dk_factor).for_each(|(v, f)| *v *= f * norm);
                    self.sp.inverse(&mut buf, scratch);
                    buf
                },
            )
            .collect();
        let mut da = Array2::zeros((n, n));
        let mut db = Array2::zeros((n, n));
        for (i, row) in rows.iter().enumerate() {
            for idx in 0..n {
                let v = row[center_to_bin(idx, n)];
                da[[i, idx]] = v.re;
                db[[i, idx]] = v.im;
            }
        }
        (da, db)
    }

    /// `df/dt = -d_r(v f) + d_k(F f)`, `dg/dt = d_r(v g) - d_k(F g)`.
    fn rhs(&self, f: &Array2<f64>, g: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
        let (rf, rg) = r_derivative_pair(&(&self.velocity * f), &(&self.velocity * g), 1, &self.sp);
        let (kf, kg) = self.k_derivative_pair(&(&self.force * f), &(&self.force * g));
        (&kf - &rf, &rg - &kg)
    }
}

/// RK4 advection of the action densities in a static medium. Snapshots follow
/// the schedule of [`crate::transport::evolve_transport_with`].
pub fn advect_action(
    a: &ActionDensities,
    grid: &Grid,
    medium: &MediumProfile,
    params: &SimParams,
    controls: &SolverControls,
    law: ForceLaw,
) -> Result<Vec<ActionDensities>> {
    params.validate()?;
    controls.validate(a.t)?;
    let n = grid.n();
    if a.f.dim() != (n, n) || a.g.dim() != (n, n) {
        return Err(Error::GridMismatch {
            expected: n,
            found: a.f.nrows(),
        });
    }
    let adv = Advector::new(grid, medium, params, law)?;
    let bound = controls.cfl_safety * RK4_IMAGINARY_LIMIT / adv.spectral_radius(grid, params);
    if controls.dt > bound {
        return Err(Error::Stability { dt: controls.dt, bound });
    }
    let (steps, dt) = controls.steps_from(a.t);
    let t0 = a.t;
    let mut cur = a.clone();
    let mut out = vec![cur.clone()];
    for s in 1..=steps {
        let (k1f, k1g) = adv.rhs(&cur.f, &cur.g);
        let (k2f, k2g) = adv.rhs(&(&cur.f + &(&k1f * (0.5 * dt))), &(&cur.g + &(&k1g * (0.5 * dt))));
        let (k3f, k3g) = adv.rhs(&(&cur.f + &(&k2f * (0.5 * dt))), &(&cur.g + &(&k2g * (0.5 * dt))));
        let (k4f, k4g) = adv.rhs(&(&cur.f + &(&k3f * dt)), &(&cur.g + &(&k3g * dt)));
        let h = dt / 6.0;
        Zip::from(&mut cur.f)
            .and(&k1f)
            .and(&k2f)
            .and(&k3f)
            .and(&k4f)
            .for_each(|x, a, b, c, d| *x += h * (a + 2.0 * b + 2.0 * c + d));
        Zip::from(&mut cur.g)
            .and(&k1g)
            .and(&k2g)
            .and(&k3g)
            .and(&k4g)
            .for_each(|x, a, b, c, d| *x += h * (a + 2.0 * b + 2.0 * c + d));
        cur.t = t0 + s as f64 * dt;
        if cur.f.iter().chain(cur.g.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: s });
        }
        if s % controls.observer_stride as u64 == 0 || s == steps {
            out.push(cur.clone());
        }
    }
    Ok(out)
}

/// Largest admissible RK4 step for [`advect_action`].
pub fn advect_dt_bound(
    grid: &Grid,
    medium: &MediumProfile,
    params: &SimParams,
    law: ForceLaw,
    safety: f64,
) -> Result<f64> {
    let adv = Advector::new(grid, medium, params, law)?;
    Ok(safety * RK4_IMAGINARY_LIMIT / adv.spectral_radius(grid, params))
}
