//! 2x2 complex matrices and the Pauli basis.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

const Z: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[Z, Z], [Z, Z]]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Mat2) -> Mat2 {
        *self * *other + *other * *self
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[i][j]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let mut r = self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] += o.0[i][j];
            }
        }
        r
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        let mut r = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        r
    }
}

/// The four constant basis matrices `tau_0 .. tau_3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliBasis {
    pub tau0: Mat2,
    pub tau1: Mat2,
    pub tau2: Mat2,
    pub tau3: Mat2,
}

impl PauliBasis {
    pub fn new() -> Self {
        Self {
            tau0: Mat2([[ONE, Z], [Z, ONE]]),
            tau1: Mat2([[Z, ONE], [ONE, Z]]),
            tau2: Mat2([[Z, -I], [I, Z]]),
            tau3: Mat2([[ONE, Z], [Z, -ONE]]),
        }
    }

    pub fn get(&self, i: usize) -> Mat2 {
        match i {
            0 => self.tau0,
            1 => self.tau1,
            2 => self.tau2,
            3 => self.tau3,
            _ => panic!("Pauli index {i} out of range"),
        }
    }
}

impl Default for PauliBasis {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_and_anticommuting() {
        let t = PauliBasis::new();
        for i in 0..4 {
            assert_eq!(t.get(i).adjoint(), t.get(i));
        }
        for i in 1..4 {
            for j in 1..4 {
                let ac = t.get(i).anticommutator(&t.get(j));
                let expect = if i == j { t.tau0.scale(2.0.into()) } else { Mat2::ZERO };
                assert!((ac - expect).norm() < 1e-15, "{i} {j}");
            }
        }
    }
}
