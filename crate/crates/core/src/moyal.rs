//! Advection, Moyal sine/cosine and nonlocal free-Hamiltonian operators on
//! real phase-space fields `f[[i_r, j_k]]`.
//!
//! The Moyal operators are diagonal in the lag variable `y` conjugate to `k`:
//! with `s(r) = w~_p^2(r)` and `s_+/- = s(r +/- y/2)`,
//!
//! * sine:   multiply by `i (s_+ - s_-) / (2 eps w_p0)`
//! * cosine: multiply by `(s_+ + s_-) / (2 w_p0)`.
//!
//! At the unpaired lag `y = -L/2` the two mirror images are averaged, which
//! zeroes the sine symbol there.

use std::f64::consts::PI;

use ndarray::{Array2, Axis, Zip};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, SimParams};
use crate::medium::{MediumKind, MediumProfile};
use crate::spectral::{center_to_bin, Spectral, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Sine,
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoyalMode {
    /// Multiply by the exact symbol in the lag variable.
    SpectralExact,
    /// Convolve in k with the tabulated kernel.
    KernelTable,
    /// Truncated derivative expansion through `eps^(2m)`.
    Series(u32),
}

#[derive(Debug, Clone)]
pub struct MoyalOperatorSpec {
    pub trig: Trig,
    pub mode: MoyalMode,
    pub medium: MediumProfile,
    pub params: SimParams,
}

impl MoyalOperatorSpec {
    pub fn new(trig: Trig, mode: MoyalMode, medium: MediumProfile, params: SimParams) -> Self {
        Self {
            trig,
            mode,
            medium,
            params,
        }
    }
}

fn check_shape(f: &Array2<f64>, grid: &Grid) -> Result<()> {
    let n = grid.n();
    if f.dim() != (n, n) {
        return Err(Error::GridMismatch {
            expected: n,
            found: if f.nrows() != n { f.nrows() } else { f.ncols() },
        });
    }
    Ok(())
}

/// Symbols of both Moyal operators for the unmodulated medium shape, in lag
/// bin order: `sine[[i, b]]` is the real factor multiplying `i`.
#[derive(Debug, Clone)]
pub struct MoyalSymbols {
    pub sine: Array2<f64>,
    pub cosine: Array2<f64>,
}

impl MoyalSymbols {
    pub fn new(medium: &MediumProfile, grid: &Grid, params: &SimParams) -> Result<Self> {
        let n = grid.n();
        let plus = medium.shifted_shape_bins(grid, 1)?;
        let minus = medium.shifted_shape_bins(grid, -1)?;
        let mut sine = Array2::zeros((n, n));
        let mut cosine = Array2::zeros((n, n));
        let eps = params.epsilon;
        let w0 = params.omega_p0;
        for i in 0..n {
            for b in 0..n {
                let (p, m) = (plus[[i, b]], minus[[i, b]]);
                sine[[i, b]] = if b == n / 2 { 0.0 } else { (p - m) / (2.0 * eps * w0) };
                cosine[[i, b]] = (p + m) / (2.0 * w0);
            }
        }
        Ok(Self { sine, cosine })
    }

    fn row(&self, trig: Trig, i: usize) -> ndarray::ArrayView1<'_, f64> {
        match trig {
            Trig::Sine => self.sine.row(i),
            Trig::Cosine => self.cosine.row(i),
        }
    }
}

/// Apply a per-row lag-space multiplier `mult(i, b)` to a real field.
fn apply_lag_multiplier<M>(f: &Array2<f64>, grid: &Grid, mult: M) -> Array2<f64>
where
    M: Fn(usize, usize) -> C64 + Sync,
{
    let n = grid.n();
    let sp = Spectral::new(grid);
    let norm = 1.0 / n as f64;
    let mut out = Array2::<f64>::zeros((n, n));
    out.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each_init(
        || (vec![C64::new(0.0, 0.0); n], sp.scratch()),
        |(buf, scratch), (i, mut row)| {
            let src = f.row(i);
            for (b, v) in buf.iter_mut().enumerate() {
                *v = C64::new(src[center_to_bin(b, n)], 0.0);
            }
            sp.forward(buf, scratch);
            for (b, v) in buf.iter_mut().enumerate() {
                *v *= mult(i, b) * norm;
            }
            sp.inverse(buf, scratch);
            for (idx, o) in row.iter_mut().enumerate() {
                *o = buf[center_to_bin(idx, n)].re;
            }
        },
    );
    out
}

/// Complex kernel `G(kappa, r) = (dr / 2 pi eps) sum_m exp(i kappa y_m / eps) s(r + y_m/2) / w_p0`,
/// `[[i, q]]` with `q` the bin of the wavenumber difference.
pub fn moyal_kernel(medium: &MediumProfile, grid: &Grid, params: &SimParams, t: f64) -> Result<Array2<C64>> {
    let n = grid.n();
    let plus = medium.shifted_shape_bins(grid, 1)?;
    let minus = medium.shifted_shape_bins(grid, -1)?;
    let sp = Spectral::new(grid);
    let scale = medium.modulation_at(t) * grid.dr() / (2.0 * PI * grid.epsilon() * params.omega_p0);
    let mut out = Array2::<C64>::zeros((n, n));
    let mut scratch = sp.scratch();
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for i in 0..n {
        for (b, v) in buf.iter_mut().enumerate() {
            let s = if b == n / 2 {
                0.5 * (plus[[i, b]] + minus[[i, b]])
            } else {
                plus[[i, b]]
            };
            *v = C64::new(s, 0.0);
        }
        sp.inverse(&mut buf, &mut scratch);
        for (q, v) in buf.iter().enumerate() {
            out[[i, q]] = v * scale;
        }
    }
    Ok(out)
}

fn kernel_apply(spec: &MoyalOperatorSpec, f: &Array2<f64>, grid: &Grid, t: f64) -> Result<Array2<f64>> {
    let n = grid.n();
    let g = moyal_kernel(&spec.medium, grid, &spec.params, t)?;
    let eps = spec.params.epsilon;
    let kern = match spec.trig {
        Trig::Sine => g.mapv(|v| -v.im / eps),
        Trig::Cosine => g.mapv(|v| v.re),
    };
    let dk = grid.dk();
    let mut out = Array2::<f64>::zeros((n, n));
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            let src = f.row(i);
            let k = kern.row(i);
            for (j, o) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (jp, v) in src.iter().enumerate() {
                    acc += k[(j + n - jp) % n] * v;
                }
                *o = acc * dk;
            }
        });
    Ok(out)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn series_apply(spec: &MoyalOperatorSpec, order: u32, f: &Array2<f64>, grid: &Grid, t: f64) -> Result<Array2<f64>> {
    if matches!(spec.medium.kind, MediumKind::Tabulated { .. }) {
        return Err(Error::SeriesUnavailable(
            "tabulated media have no analytic derivatives".into(),
        ));
    }
    let n = grid.n();
    let eps = spec.params.epsilon;
    let w0 = spec.params.omega_p0;
    let m = spec.medium.modulation_at(t);
    let sp = Spectral::new(grid);
    let mut out = Array2::<f64>::zeros((n, n));
    for p in 0..=order {
        let l = match spec.trig {
            Trig::Sine => 2 * p + 1,
            Trig::Cosine => 2 * p,
        };
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        let mut coeff = sign * (eps / 2.0).powi(l as i32) / factorial(l) / w0 * m;
        if spec.trig == Trig::Sine {
            coeff /= eps;
        }
        let ds = spec.medium.shape_derivative(grid, l)?;
        // d^l/dk^l acts as (i y / eps)^l in the lag variable.
        let dkf = apply_lag_multiplier(f, grid, |_, b| {
            if sp.is_nyquist(b) && l % 2 == 1 {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, grid.y(sp.signed(b)) / eps).powu(l)
            }
        });
        Zip::from(out.rows_mut())
            .and(dkf.rows())
            .and(&ds)
            .for_each(|mut o, d, &s| o.scaled_add(coeff * s, &d));
    }
    Ok(out)
}

/// Apply the Moyal sine or cosine operator at time `t`.
pub fn moyal_apply(spec: &MoyalOperatorSpec, f: &Array2<f64>, grid: &Grid, t: f64) -> Result<Array2<f64>> {
    check_shape(f, grid)?;
    spec.params.validate()?;
    match spec.mode {
        MoyalMode::SpectralExact => {
            let sym = MoyalSymbols::new(&spec.medium, grid, &spec.params)?;
            let m = spec.medium.modulation_at(t);
            Ok(apply_lag_multiplier(f, grid, |i, b| {
                let v = sym.row(spec.trig, i)[b] * m;
                match spec.trig {
                    Trig::Sine => C64::new(0.0, v),
                    Trig::Cosine => C64::new(v, 0.0),
                }
            }))
        }
        MoyalMode::KernelTable => kernel_apply(spec, f, grid, t),
        MoyalMode::Series(order) => series_apply(spec, order, f, grid, t),
    }
}

/// r-derivatives of two real fields at once, packed as `a + i b` per column.
pub(crate) fn r_derivative_pair(
    a: &Array2<f64>,
    b: &Array2<f64>,
    order: u32,
    sp: &Spectral,
) -> (Array2<f64>, Array2<f64>) {
    let n = sp.n();
    let norm = 1.0 / n as f64;
    let factors: Vec<C64> = (0..n).map(|q| sp.derivative_factor(q, order) * norm).collect();
    let cols: Vec<Vec<C64>> = (0..a.ncols())
        .into_par_iter()
        .map_init(
            || sp.scratch(),
            |scratch, j| {
                let mut buf: Vec<C64> = a
                    .column(j)
                    .iter()
                    .zip(b.column(j).iter())
                    .map(|(&x, &y)| C64::new(x, y))
                    .collect();
                sp.forward(&mut buf, scratch);
                buf.iter_mut().zip(&factors).for_each(|(v, f)| *v *= f);
                sp.inverse(&mut buf, scratch);
                buf
            },
        )
        .collect();
    let mut da = Array2::zeros(a.raw_dim());
    let mut db = Array2::zeros(a.raw_dim());
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            da[[i, j]] = v.re;
            db[[i, j]] = v.im;
        }
    }
    (da, db)
}

fn r_derivative(f: &Array2<f64>, grid: &Grid, order: u32) -> Array2<f64> {
    r_derivative_pair(f, &Array2::zeros(f.raw_dim()), order, &Spectral::new(grid)).0
}

/// `D f = (c^2 / w_p0) k df/dr`.
pub fn advect_d(f: &Array2<f64>, grid: &Grid, params: &SimParams) -> Result<Array2<f64>> {
    check_shape(f, grid)?;
    let mut d = r_derivative(f, grid, 1);
    let a = params.c * params.c / params.omega_p0;
    for (j, mut col) in d.columns_mut().into_iter().enumerate() {
        col *= a * grid.k(j);
    }
    Ok(d)
}

/// `H0(k^) f = (c^2 / w_p0) (k^2 f - (eps^2 / 4) d^2f/dr^2)`.
pub fn h0hat_apply(f: &Array2<f64>, grid: &Grid, params: &SimParams) -> Result<Array2<f64>> {
    check_shape(f, grid)?;
    let d2 = r_derivative(f, grid, 2);
    let a = params.c * params.c / params.omega_p0;
    let e2 = params.epsilon * params.epsilon / 4.0;
    let mut out = Array2::zeros(f.raw_dim());
    for ((i, j), o) in out.indexed_iter_mut() {
        let k = grid.k(j);
        *o = a * (k * k * f[[i, j]] - e2 * d2[[i, j]]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    fn smooth_field(grid: &Grid) -> Array2<f64> {
        let l = grid.length();
        Array2::from_shape_fn((grid.n(), grid.n()), |(i, j)| {
            let r = grid.r(i);
            let k = grid.k(j);
            (-(k - 0.5).powi(2)).exp() * (1.0 + 0.3 * (2.0 * PI * r / l).cos()) + 0.2 * (-(k + 1.0).powi(2) * 2.0).exp()
        })
    }

    #[test]
    fn cosine_of_constant_is_scaling() {
        let p = SimParams::default();
        let g = build_grid(32, 12.0, &p).unwrap();
        let f = smooth_field(&g);
        for mode in [MoyalMode::SpectralExact, MoyalMode::KernelTable, MoyalMode::Series(0)] {
            let spec = MoyalOperatorSpec::new(Trig::Cosine, mode, MediumProfile::constant(0.5), p);
            let out = moyal_apply(&spec, &f, &g, 0.0).unwrap();
            for (a, b) in out.iter().zip(f.iter()) {
                assert!((a - 0.5 * b).abs() < 1e-13, "{mode:?}");
            }
        }
    }

    #[test]
    fn sine_of_zero_medium_vanishes() {
        let p = SimParams::default();
        let g = build_grid(16, 12.0, &p).unwrap();
        let spec = MoyalOperatorSpec::new(Trig::Sine, MoyalMode::SpectralExact, MediumProfile::zero(), p);
        let out = moyal_apply(&spec, &smooth_field(&g), &g, 0.0).unwrap();
        assert!(out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn advection_of_cosine_profile() {
        let p = SimParams::default();
        let g = build_grid(32, 10.0, &p).unwrap();
        let kap = 2.0 * PI / 10.0;
        let f = Array2::from_shape_fn((32, 32), |(i, j)| (kap * g.r(i)).cos() * (-g.k(j).powi(2)).exp());
        let d = advect_d(&f, &g, &p).unwrap();
        for ((i, j), v) in d.indexed_iter() {
            let expect = -kap * g.k(j) * (kap * g.r(i)).sin() * (-g.k(j).powi(2)).exp();
            assert!((v - expect).abs() < 1e-12);
        }
        let flat = Array2::from_shape_fn((32, 32), |(_, j)| g.k(j));
        assert!(advect_d(&flat, &g, &p).unwrap().iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn h0hat_eigenvalues() {
        let p = SimParams::default();
        let g = build_grid(32, 10.0, &p).unwrap();
        let kap = 2.0 * PI / 10.0;
        let f = Array2::from_shape_fn((32, 32), |(i, j)| (kap * g.r(i)).cos() * (1.0 + g.k(j)));
        let h = h0hat_apply(&f, &g, &p).unwrap();
        for ((i, j), v) in h.indexed_iter() {
            let k = g.k(j);
            assert!((v - (k * k + kap * kap / 4.0) * f[[i, j]]).abs() < 1e-12);
        }
    }

    #[test]
    fn divergence_structure() {
        let p = SimParams::normalized(0.5);
        let g = build_grid(32, 10.0, &p).unwrap();
        let f = smooth_field(&g);
        let spec = MoyalOperatorSpec::new(
            Trig::Sine,
            MoyalMode::SpectralExact,
            MediumProfile::sinusoid(0.1, 5.0, 0.3),
            p,
        );
        let s = moyal_apply(&spec, &f, &g, 0.0).unwrap();
        for row in s.rows() {
            assert!(row.sum().abs() < 1e-12);
        }
        let d = advect_d(&f, &g, &p).unwrap();
        for col in d.columns() {
            assert!(col.sum().abs() < 1e-12);
        }
    }

    #[test]
    fn tabulated_series_is_rejected() {
        let p = SimParams::default();
        let g = build_grid(8, 4.0, &p).unwrap();
        let spec = MoyalOperatorSpec::new(
            Trig::Sine,
            MoyalMode::Series(1),
            MediumProfile::tabulated(vec![0.0; 8]),
            p,
        );
        let f = Array2::zeros((8, 8));
        assert!(matches!(
            moyal_apply(&spec, &f, &g, 0.0),
            Err(Error::SeriesUnavailable(_))
        ));
    }
}
