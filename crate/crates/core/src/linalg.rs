// Copyright 2026 loqs Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense linear-algebra kernels: matrix exponential and a Lyapunov solver.
//!
//! The exponential uses scaling-and-squaring with the Padé(13,13) kernel
//! (Higham 2005, SIAM J. Matrix Anal. Appl. 26(4)). The continuous Lyapunov
//! equation is solved by Kronecker vectorization, which is exact up to one
//! dense LU solve and entirely adequate at the small dimensions this crate
//! works with (2N with N a handful of modes).

use nalgebra::{ComplexField, DMatrix, DVector};

/// Padé(13,13) numerator/denominator coefficients from Higham (2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm threshold below which Padé(13) alone meets double precision.
const THETA13: f64 = 5.371920351148152;

/// Largest entry modulus of a matrix (max-norm).
pub fn max_abs<T>(m: &DMatrix<T>) -> f64
where
    T: ComplexField<RealField = f64> + Copy,
{
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.modulus()))
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().iter().fold(0.0_f64, |a, &s| a.max(s))
}

fn one_norm<T>(m: &DMatrix<T>) -> f64
where
    T: ComplexField<RealField = f64> + Copy,
{
    let mut worst = 0.0_f64;
    for j in 0..m.ncols() {
        let col: f64 = m.column(j).iter().map(|x| x.modulus()).sum();
        worst = worst.max(col);
    }
    worst
}

/// Matrix exponential exp(M) by scaling-and-squaring with a Padé(13) kernel.
///
/// Works for both real (`f64`) and complex (`Complex<f64>`) square matrices.
pub fn expm<T>(m: &DMatrix<T>) -> DMatrix<T>
where
    T: ComplexField<RealField = f64> + From<f64> + Copy,
{
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "expm requires a square matrix");
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }

    let norm = one_norm(m);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let scale: T = T::from(0.5_f64.powi(squarings as i32));
    let a = m * scale;

    let eye = DMatrix::<T>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let c = |k: usize| -> T { T::from(PADE13[k]) };

    let u_inner = &a6 * c(13) + &a4 * c(11) + &a2 * c(9);
    let u_poly = &a6 * &u_inner + &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &eye * c(1);
    let u = &a * u_poly;

    let v_inner = &a6 * c(12) + &a4 * c(10) + &a2 * c(8);
    let v = &a6 * &v_inner + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &eye * c(0);

    let num = &v + &u;
    let den = &v - &u;
    let mut result = den
        .lu()
        .solve(&num)
        .expect("Padé denominator is singular; matrix entries are likely non-finite");

    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Solution of the continuous Lyapunov equation A·V + V·Aᵀ + Q = 0 by
/// Kronecker vectorization: (I⊗A + A⊗I)·vec(V) = −vec(Q).
///
/// Returns the symmetrized solution together with the max-norm residual
/// ‖AV + VAᵀ + Q‖_max, or `None` when the Kronecker system is singular
/// (A and −Aᵀ share an eigenvalue, e.g. a purely oscillatory A).
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Option<(DMatrix<f64>, f64)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "Lyapunov: A must be square");
    assert_eq!((q.nrows(), q.ncols()), (n, n), "Lyapunov: Q must match A");

    let eye = DMatrix::<f64>::identity(n, n);
    let kron = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = DVector::from_iterator(n * n, q.iter().map(|&x| -x));

    let x = kron.lu().solve(&rhs)?;
    let v = DMatrix::from_column_slice(n, n, x.as_slice());
    let v = (&v + v.transpose()) * 0.5;

    let residual = max_abs(&(a * &v + &v * a.transpose() + q));
    Some((v, residual))
}

/// FNV-1a accumulator used to fingerprint system data in trajectory metadata.
#[derive(Clone, Copy)]
pub struct Fnv1a(u64);

impl Fnv1a {
    pub fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    pub fn write_bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x100_0000_01b3);
        }
    }

    pub fn write_f64(&mut self, x: f64) {
        self.write_bytes(&x.to_bits().to_le_bytes());
    }

    pub fn write_usize(&mut self, x: usize) {
        self.write_bytes(&(x as u64).to_le_bytes());
    }

    pub fn finish(self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a {
    fn default() -> Self {
        Self::new()
    }
}
