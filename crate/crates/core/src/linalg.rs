//! Dense complex matrix helpers on top of `nalgebra`.

use alloc::vec::Vec;
#[allow(unused_imports)] // float methods come from libm without std
use num_traits::Float;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// `e^{i phase}`.
pub fn phase(phase: f64) -> Complex64 {
    Complex64::new(phase.cos(), phase.sin())
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `‖m − 1‖_max`.
pub fn deviation_from_identity(m: &ComplexMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for ((i, j), z) in m
        .iter()
        .enumerate()
        .map(|(k, z)| ((k % m.nrows(), k / m.nrows()), z))
    {
        let target = if i == j { ONE } else { ZERO };
        worst = worst.max((z - target).norm());
    }
    worst
}

/// `(m + m†)/2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues of a Hermitian matrix in ascending order. Only the Hermitian
/// part of `m` is used.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Eigen-decomposition of a Hermitian matrix: `(values, vectors)` with the
/// eigenvectors as columns.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Copies the `rows × cols` block starting at `(r0, c0)`.
pub fn block(m: &ComplexMatrix, r0: usize, c0: usize, rows: usize, cols: usize) -> ComplexMatrix {
    m.view((r0, c0), (rows, cols)).into_owned()
}

pub fn set_block(m: &mut ComplexMatrix, r0: usize, c0: usize, b: &ComplexMatrix) {
    m.view_mut((r0, c0), b.shape()).copy_from(b);
}

pub fn norm_sqr(v: &ComplexVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}
