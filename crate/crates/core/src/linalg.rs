//! Small dense complex helpers shared by the cogwheel and chain modules.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest elementwise modulus of `m - m^dagger`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Eigenvector of the zero-phase `len`-cycle for eigenvalue `exp(2 pi i k / len)`:
/// components `exp(-2 pi i k j / len) / sqrt(len)`.
pub fn cycle_eigenvector(len: usize, k: usize) -> CVector {
    let norm = (len as f64).sqrt().recip();
    CVector::from_iterator(
        len,
        (0..len).map(|j| {
            let angle = -2.0 * PI * ((k * j) % len) as f64 / len as f64;
            Complex64::from_polar(norm, angle)
        }),
    )
}

/// `sum_k f_k |v_k><v_k|` over the columns of `basis`.
pub fn spectral_sum(basis: &CMatrix, values: &[Complex64]) -> CMatrix {
    assert_eq!(basis.ncols(), values.len());
    let scaled = CMatrix::from_fn(basis.nrows(), basis.ncols(), |r, c| basis[(r, c)] * values[c]);
    scaled * basis.adjoint()
}

/// Zero-phase cyclic shift sending basis vector `k` to `k + 1 (mod len)`.
pub fn cyclic_shift(len: usize) -> CMatrix {
    CMatrix::from_fn(len, len, |r, c| if r == (c + 1) % len { ONE } else { ZERO })
}

pub fn matrix_power(m: &CMatrix, exp: usize) -> CMatrix {
    let mut acc = CMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

/// `exp(-i t H)` for Hermitian `h` through its eigendecomposition.
pub fn hermitian_evolution(h: &CMatrix, t: f64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&e| Complex64::from_polar(1.0, -e * t))
        .collect();
    spectral_sum(&eig.eigenvectors, &phases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_eigenvectors_diagonalize_shift() {
        for len in 1..8 {
            let shift = cyclic_shift(len);
            for k in 0..len {
                let v = cycle_eigenvector(len, k);
                let lambda = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / len as f64);
                let residual = &shift * &v - &v * lambda;
                assert!(residual.norm() < 1e-13, "len={len} k={k}");
            }
        }
    }

    #[test]
    fn hermitian_evolution_of_diagonal() {
        let h = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(PI, 0.0),
        ]));
        let u = hermitian_evolution(&h, 1.0);
        let expected = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, -ONE]));
        assert!(max_abs_diff(&u, &expected) < 1e-14);
    }

    #[test]
    fn power_of_shift_is_identity() {
        let s = cyclic_shift(5);
        assert!(max_abs_diff(&matrix_power(&s, 5), &CMatrix::identity(5, 5)) < 1e-15);
        assert!(max_abs_diff(&matrix_power(&s, 0), &CMatrix::identity(5, 5)) == 0.0);
    }
}
