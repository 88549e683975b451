//! Discrete 2x2 Wigner matrix of the two-component field.
//!
//! `W_ab(k, r) = (1 / 2 pi eps) sum_m dr exp(i k y_m / eps) a*(r + y_m/2) b(r - y_m/2)`
//! with lags `y_m = m dr`, `m in [-n/2, n/2)`. Odd lags need the fields at
//! half-grid points, obtained by spectral interpolation. The unpaired lag
//! `m = -n/2` is replaced by the mean of the `+/- L/2` products, which keeps
//! self-transforms exactly real.
//!
//! Phase-space arrays have shape `(n_r, n_k)`: row `i` is position `r_i`,
//! column `j` is wavenumber `k_j` in ascending order.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fv::TwoComponentField;
use crate::grid::{Grid, SimParams};
use crate::medium::half_point;
use crate::pauli::Mat2;
use crate::spectral::{center_to_bin, Spectral, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct WignerMatrixField {
    pub w_pp: Array2<C64>,
    pub w_pc: Array2<C64>,
    pub w_cc: Array2<C64>,
    pub t: f64,
}

/// The four real densities `W_0 .. W_3` (the evolved transport state).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceDensities {
    pub w0: Array2<f64>,
    pub w1: Array2<f64>,
    pub w2: Array2<f64>,
    pub w3: Array2<f64>,
    pub t: f64,
}

impl WignerMatrixField {
    /// Full matrix `[[W_pp, -W_pc*], [W_pc, -W_cc]]` at node `(i_r, j_k)`.
    pub fn matrix_at(&self, i: usize, j: usize) -> Mat2 {
        let pc = self.w_pc[[i, j]];
        Mat2::new(self.w_pp[[i, j]], -pc.conj(), pc, -self.w_cc[[i, j]])
    }
}

impl PhaseSpaceDensities {
    pub fn zeros(n: usize, t: f64) -> Self {
        let z = Array2::zeros((n, n));
        Self {
            w0: z.clone(),
            w1: z.clone(),
            w2: z.clone(),
            w3: z,
            t,
        }
    }

    pub fn n(&self) -> usize {
        self.w0.nrows()
    }

    pub fn components(&self) -> [&Array2<f64>; 4] {
        [&self.w0, &self.w1, &self.w2, &self.w3]
    }

    pub fn components_mut(&mut self) -> [&mut Array2<f64>; 4] {
        [&mut self.w0, &mut self.w1, &mut self.w2, &mut self.w3]
    }

    /// `W_PhiPhi` for an arbitrary splitting normalization `N`: `(W_2 + W_3) / (4 N^2)`.
    pub fn w_phiphi_scaled(&self, split_norm: f64) -> Array2<f64> {
        (&self.w2 + &self.w3) / (4.0 * split_norm * split_norm)
    }

    /// Inverse of [`decompose_real`].
    pub fn recompose(&self) -> WignerMatrixField {
        let shape = self.w0.raw_dim();
        let mut w_pp = Array2::zeros(shape);
        let mut w_pc = Array2::zeros(shape);
        let mut w_cc = Array2::zeros(shape);
        for ((i, j), &a) in self.w0.indexed_iter() {
            let (b, c, d) = (self.w1[[i, j]], self.w2[[i, j]], self.w3[[i, j]]);
            w_pp[[i, j]] = C64::new(0.5 * (d + a), 0.0);
            w_cc[[i, j]] = C64::new(0.5 * (d - a), 0.0);
            w_pc[[i, j]] = C64::new(0.5 * c, 0.5 * b);
        }
        WignerMatrixField {
            w_pp,
            w_pc,
            w_cc,
            t: self.t,
        }
    }
}

/// Cross Wigner transform `W_ab(k, r)` of two fields on the grid.
pub fn wigner_cross(a: &[C64], b: &[C64], grid: &Grid) -> Result<Array2<C64>> {
    grid.check_len(a.len())?;
    grid.check_len(b.len())?;
    let n = grid.n();
    let sp = Spectral::new(grid);
    let a_half = sp.half_shift(a);
    let b_half = sp.half_shift(b);
    let scale = grid.dr() / (2.0 * PI * grid.epsilon());
    let nyq = (n / 2) as i64;
    let mut out = Array2::<C64>::zeros((n, n));
    out.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each_init(
        || (vec![C64::new(0.0, 0.0); n], sp.scratch()),
        |(buf, scratch), (i, mut row)| {
            for (bin, v) in buf.iter_mut().enumerate() {
                let m = sp.signed(bin);
                let prod = |m: i64| half_point(a, &a_half, i, m).conj() * half_point(b, &b_half, i, -m);
                *v = if m == -nyq {
                    0.5 * (prod(-nyq) + prod(nyq))
                } else {
                    prod(m)
                };
            }
            sp.inverse(buf, scratch);
            for (idx, w) in row.iter_mut().enumerate() {
                *w = buf[center_to_bin(idx, n)] * scale;
            }
        },
    );
    Ok(out)
}

/// Real Wigner function of a single complex field.
pub fn wigner_scalar(field: &[C64], grid: &Grid) -> Result<Array2<f64>> {
    Ok(wigner_cross(field, field, grid)?.mapv(|v| v.re))
}

pub fn wigner_matrix(psi: &TwoComponentField, grid: &Grid, params: &SimParams) -> Result<WignerMatrixField> {
    params.validate()?;
    Ok(WignerMatrixField {
        w_pp: wigner_cross(&psi.phi, &psi.phi, grid)?,
        w_pc: wigner_cross(&psi.phi, &psi.chi, grid)?,
        w_cc: wigner_cross(&psi.chi, &psi.chi, grid)?,
        t: psi.t,
    })
}

const RESIDUE_LIMIT: f64 = 1e-9;

/// Pauli-basis real densities: `W_0 = W_pp - W_cc`, `W_1 = 2 Im W_pc`,
/// `W_2 = 2 Re W_pc`, `W_3 = W_pp + W_cc`.
pub fn decompose_real(w: &WignerMatrixField) -> Result<PhaseSpaceDensities> {
    let scale = w.w_pp.iter().chain(w.w_cc.iter()).fold(1.0f64, |m, v| m.max(v.norm()));
    for (name, comp) in [("w_pp", &w.w_pp), ("w_cc", &w.w_cc)] {
        let residue = comp.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
        if residue > RESIDUE_LIMIT * scale {
            return Err(Error::ImaginaryResidue {
                component: name,
                residue,
                limit: RESIDUE_LIMIT * scale,
            });
        }
    }
    let pp = w.w_pp.mapv(|v| v.re);
    let cc = w.w_cc.mapv(|v| v.re);
    Ok(PhaseSpaceDensities {
        w0: &pp - &cc,
        w1: w.w_pc.mapv(|v| 2.0 * v.im),
        w2: w.w_pc.mapv(|v| 2.0 * v.re),
        w3: &pp + &cc,
        t: w.t,
    })
}

/// `W_PhiPhi = W_2 + W_3` (splitting normalization `N = 1/2`).
pub fn w_phiphi(d: &PhaseSpaceDensities) -> Array2<f64> {
    &d.w2 + &d.w3
}

/// Two-point products `G(y_m, R_i) = Phi*(R_i + y_m/2) Phi(R_i - y_m/2)`
/// recovered from a real Wigner function; `[[i, bin]]`.
fn two_point_table(w_ff: &Array2<f64>, grid: &Grid) -> Array2<C64> {
    let n = grid.n();
    let sp = Spectral::new(grid);
    let dk = grid.dk();
    let mut out = Array2::<C64>::zeros((n, n));
    out.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each_init(
        || (vec![C64::new(0.0, 0.0); n], sp.scratch()),
        |(buf, scratch), (i, mut row)| {
            for (bin, v) in buf.iter_mut().enumerate() {
                *v = C64::new(w_ff[[i, center_to_bin(bin, n)]] * dk, 0.0);
            }
            sp.forward(buf, scratch);
            row.iter_mut().zip(buf.iter()).for_each(|(o, v)| *o = *v);
        },
    );
    out
}

/// Recover `Phi(r)` from its Wigner function up to the constant phase `phase0`.
///
/// `Phi(r) = G(r_ref - r, (r + r_ref)/2) / sqrt(G(0, r_ref)) * exp(i phase0)`,
/// so with `phase0 = 0` the result is real-positive at `r_ref` (snapped to the
/// nearest node). Nodes at an odd offset from `r_ref` use midpoints on the
/// half grid, reached by spectral interpolation along `r`; that step is exact
/// when the field has no content above half the Nyquist wavenumber.
pub fn reconstruct_field(
    w_ff: &Array2<f64>,
    r_ref: f64,
    phase0: f64,
    grid: &Grid,
    _params: &SimParams,
) -> Result<Vec<C64>> {
    let n = grid.n();
    if w_ff.dim() != (n, n) {
        return Err(Error::GridMismatch {
            expected: n,
            found: w_ff.nrows(),
        });
    }
    let ni = n as i64;
    let p = ((r_ref / grid.dr()).round() as i64).rem_euclid(ni) as usize;
    let table = two_point_table(w_ff, grid);
    let sp = Spectral::new(grid);
    let mut half = Array2::<C64>::zeros((n, n));
    for bin in 0..n {
        let col: Vec<C64> = table.column(bin).to_vec();
        let shifted = sp.half_shift(&col);
        half.column_mut(bin).iter_mut().zip(shifted).for_each(|(o, v)| *o = v);
    }

    let density = |i: usize| table[[i, 0]].re;
    let scale = (0..n).map(density).fold(0.0f64, f64::max);
    let threshold = 1e-10 * scale;
    let amp = density(p);
    if amp.is_nan() || amp <= threshold {
        return Err(Error::ReferenceZero {
            amplitude: amp,
            threshold,
        });
    }

    // Phi*(r_src) Phi(r_t) for a source and target node at a non-Nyquist offset.
    let product = |src: usize, t: usize| -> C64 {
        let mut tt = t as i64;
        let mut m = src as i64 - tt;
        if m >= ni / 2 {
            tt += ni;
            m -= ni;
        } else if m < -ni / 2 {
            tt -= ni;
            m += ni;
        }
        let s = tt + src as i64;
        let bin = m.rem_euclid(ni) as usize;
        if s % 2 == 0 {
            table[[(s / 2).rem_euclid(ni) as usize, bin]]
        } else {
            half[[((s - 1) / 2).rem_euclid(ni) as usize, bin]]
        }
    };

    let norm = amp.sqrt();
    let rot = C64::from_polar(1.0, phase0);
    let opposite = (p + n / 2) % n;
    let mut phi = vec![C64::new(0.0, 0.0); n];
    for (t, v) in phi.iter_mut().enumerate() {
        if t != opposite {
            *v = product(p, t) / norm;
        }
    }
    let neighbour = [(p + 1) % n, (p + n - 1) % n]
        .into_iter()
        .max_by(|a, b| phi[*a].norm().total_cmp(&phi[*b].norm()))
        .unwrap_or(p);
    phi[opposite] = if phi[neighbour].norm() > 0.0 {
        product(neighbour, opposite) / phi[neighbour].conj()
    } else {
        C64::new(0.0, 0.0)
    };
    phi.iter_mut().for_each(|v| *v *= rot);
    Ok(phi)
}

/// Sum over k of `f * dk` at every r (the position marginal).
pub fn k_marginal(f: &Array2<f64>, grid: &Grid) -> Vec<f64> {
    f.rows().into_iter().map(|row| row.sum() * grid.dk()).collect()
}

/// Sum over r of `f * dr` at every k (the wavenumber marginal).
pub fn r_marginal(f: &Array2<f64>, grid: &Grid) -> Vec<f64> {
    f.columns().into_iter().map(|col| col.sum() * grid.dr()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fv::fv_split;
    use crate::grid::build_grid;

    fn sqrt3_grid(n: usize) -> Grid {
        build_grid(n, 8.0 * PI / 3f64.sqrt(), &SimParams::default()).unwrap()
    }

    fn forward_wave(grid: &Grid) -> TwoComponentField {
        let k0 = 3f64.sqrt();
        let f: Vec<C64> = (0..grid.n()).map(|i| C64::from_polar(1.0, k0 * grid.r(i))).collect();
        let d: Vec<C64> = f.iter().map(|v| v * C64::new(0.0, -2.0)).collect();
        fv_split(&f, &d, &SimParams::default()).unwrap()
    }

    #[test]
    fn forward_plane_wave_peaks() {
        let g = sqrt3_grid(32);
        let w = wigner_matrix(&forward_wave(&g), &g, &SimParams::default()).unwrap();
        let j0 = g.k_index(3f64.sqrt()).unwrap();
        for i in 0..g.n() {
            for j in 0..g.n() {
                let (pp, pc, cc) = if j == j0 { (2.25, -0.75, 0.25) } else { (0.0, 0.0, 0.0) };
                assert!((w.w_pp[[i, j]] * g.dk() - pp).norm() < 1e-12);
                assert!((w.w_pc[[i, j]] * g.dk() - pc).norm() < 1e-12);
                assert!((w.w_cc[[i, j]] * g.dk() - cc).norm() < 1e-12);
            }
        }
        let d = decompose_real(&w).unwrap();
        let weights: Vec<f64> = d.components().iter().map(|c| c[[3, j0]] * g.dk()).collect();
        for (a, b) in weights.iter().zip([2.0, 0.0, -1.5, 2.5]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((w_phiphi(&d)[[5, j0]] * g.dk() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_field_is_zero() {
        let g = sqrt3_grid(16);
        let w = wigner_matrix(&TwoComponentField::zeros(16, 0.0), &g, &SimParams::default()).unwrap();
        assert!(w
            .w_pp
            .iter()
            .chain(w.w_pc.iter())
            .chain(w.w_cc.iter())
            .all(|v| v.norm() == 0.0));
        let d = decompose_real(&w).unwrap();
        assert!(d.components().iter().all(|c| c.iter().all(|v| *v == 0.0)));
        assert!(w_phiphi(&d).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn recompose_inverts_decompose() {
        let g = build_grid(32, 12.0, &SimParams::default()).unwrap();
        let f: Vec<C64> = (0..32)
            .map(|i| {
                let r = g.r(i);
                C64::from_polar((-(r - 6.0).powi(2) / 3.0).exp(), 1.3 * r)
            })
            .collect();
        let d: Vec<C64> = f
            .iter()
            .enumerate()
            .map(|(i, v)| v * C64::new(0.2, -1.0 - 0.01 * i as f64))
            .collect();
        let w = wigner_matrix(
            &fv_split(&f, &d, &SimParams::default()).unwrap(),
            &g,
            &SimParams::default(),
        )
        .unwrap();
        let back = decompose_real(&w).unwrap().recompose();
        for (a, b) in w.w_pc.iter().zip(back.w_pc.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
        for (a, b) in w.w_pp.iter().zip(back.w_pp.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn fv_hermiticity_holds() {
        let g = sqrt3_grid(16);
        let w = wigner_matrix(&forward_wave(&g), &g, &SimParams::default()).unwrap();
        let tau3 = crate::pauli::PauliBasis::new().tau3;
        for i in 0..16 {
            for j in 0..16 {
                let m = w.matrix_at(i, j);
                assert!((tau3 * m.adjoint() * tau3 - m).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn imaginary_residue_is_reported() {
        let g = sqrt3_grid(8);
        let mut w = wigner_matrix(&forward_wave(&g), &g, &SimParams::default()).unwrap();
        w.w_pp[[0, 0]].im = 1.0;
        assert!(matches!(decompose_real(&w), Err(Error::ImaginaryResidue { .. })));
    }

    #[test]
    fn reconstruct_plane_wave() {
        let g = sqrt3_grid(32);
        let k0 = 3f64.sqrt();
        let mut w = Array2::zeros((32, 32));
        let j0 = g.k_index(k0).unwrap();
        w.column_mut(j0).fill(1.0 / g.dk());
        let r_ref = g.r(5);
        let phi = reconstruct_field(&w, r_ref, 0.4, &g, &SimParams::default()).unwrap();
        for i in 0..32 {
            let expect = C64::from_polar(1.0, k0 * (g.r(i) - r_ref) + 0.4);
            assert!((phi[i] - expect).norm() < 1e-12, "{i}: {} vs {}", phi[i], expect);
        }
    }

    #[test]
    fn reconstruct_rejects_field_zero() {
        let g = build_grid(32, 10.0, &SimParams::default()).unwrap();
        let f: Vec<C64> = (0..32)
            .map(|i| C64::new((2.0 * PI * g.r(i) / 10.0).sin(), 0.0))
            .collect();
        let w = wigner_scalar(&f, &g).unwrap();
        let e = reconstruct_field(&w, 0.0, 0.0, &g, &SimParams::default()).unwrap_err();
        assert!(matches!(e, Error::ReferenceZero { .. }));
    }
}
