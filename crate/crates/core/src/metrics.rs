//! Figures of merit for two-impurity states.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, ComplexMatrix};
use crate::spin::Spin;
use crate::state::{DensityMatrix, StateVector};
#[allow(unused_imports)] // float methods come from libm without std
use num_traits::Float;

/// `⟨ψ|ρ|ψ⟩` (squared-overlap fidelity for a pure target).
pub fn fidelity_to_pure(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: psi.dim(),
        });
    }
    let a = psi.amplitudes();
    let value = a.dotc(&(rho.matrix() * a));
    if value.im.abs() > 1e-12 {
        return Err(Error::InvariantViolation {
            what: "imaginary part of fidelity",
            deviation: value.im.abs(),
            tolerance: 1e-12,
        });
    }
    Ok(value.re)
}

/// Transpose on the second impurity: `⟨i₁ i₂|ρ^{T₂}|j₁ j₂⟩ = ⟨i₁ j₂|ρ|j₁ i₂⟩`.
pub fn partial_transpose(rho: &ComplexMatrix, spin: Spin) -> Result<ComplexMatrix> {
    let d = spin.pair_dim();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho.nrows(),
        });
    }
    let n = spin.dim();
    Ok(ComplexMatrix::from_fn(d, d, |row, col| {
        let (i1, i2) = (row / n, row % n);
        let (j1, j2) = (col / n, col % n);
        rho[(i1 * n + j2, j1 * n + i2)]
    }))
}

/// `log₂ ‖ρ^{T₂}‖₁`.
pub fn log_negativity(rho: &DensityMatrix, spin: Spin) -> Result<f64> {
    let pt = partial_transpose(rho.matrix(), spin)?;
    let trace_norm: f64 = hermitian_eigenvalues(&pt)
        .into_iter()
        .map(|l| if l.abs() < 1e-12 { 0.0 } else { l.abs() })
        .sum();
    Ok(trace_norm.log2().max(0.0))
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub fidelity: f64,
    pub log_negativity: f64,
    pub purity: f64,
}

impl MetricReport {
    pub fn compute(rho: &DensityMatrix, target: &StateVector, spin: Spin) -> Result<Self> {
        Ok(Self {
            fidelity: fidelity_to_pure(rho, target)?,
            log_negativity: log_negativity(rho, spin)?,
            purity: purity(rho),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, kron, max_abs_diff, ComplexVector};
    use crate::spin::{coupled_basis, singlet_state, HalfInteger};
    use crate::state::product_state;

    fn spin(t: i32) -> Spin {
        Spin::from_twice(t).unwrap()
    }

    #[test]
    fn fidelity_basic_cases() {
        for t in 1..=4 {
            let s = spin(t);
            let psi = singlet_state(s);
            let rho = DensityMatrix::from_pure(&psi);
            assert!((fidelity_to_pure(&rho, &psi).unwrap() - 1.0).abs() < 1e-14);
            let mixed = DensityMatrix::maximally_mixed(s.pair_dim());
            assert!(
                (fidelity_to_pure(&mixed, &psi).unwrap() - 1.0 / s.pair_dim() as f64).abs() < 1e-14
            );
            let stretched =
                DensityMatrix::from_pure(&product_state(s, s.value(), -s.value()).unwrap());
            assert!(
                (fidelity_to_pure(&stretched, &psi).unwrap() - 1.0 / s.dim() as f64).abs() < 1e-14
            );
        }
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(fidelity_to_pure(&rho, &singlet_state(spin(2))).is_err());
    }

    #[test]
    fn partial_transpose_of_product_state() {
        let s = spin(2);
        let a = ComplexMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.5),
                c(0.1),
                c(0.0),
                c(0.1),
                c(0.3),
                c(0.05),
                c(0.0),
                c(0.05),
                c(0.2),
            ],
        );
        let mut b = ComplexMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.2),
                c(0.0),
                c(0.1),
                c(0.0),
                c(0.4),
                c(0.0),
                c(0.1),
                c(0.0),
                c(0.4),
            ],
        );
        b[(0, 1)] = num_complex::Complex64::new(0.0, 0.1);
        b[(1, 0)] = num_complex::Complex64::new(0.0, -0.1);
        let rho = kron(&a, &b);
        let pt = partial_transpose(&rho, s).unwrap();
        assert!(max_abs_diff(&pt, &kron(&a, &b.transpose())) < 1e-15);
        assert!(hermitian_eigenvalues(&pt)[0] > -1e-14);
        assert!((pt.trace() - rho.trace()).norm() < 1e-15);
        assert!(max_abs_diff(&partial_transpose(&pt, s).unwrap(), &rho) == 0.0);
    }

    #[test]
    fn two_qubit_singlet_partial_transpose_spectrum() {
        let s = spin(1);
        let rho = DensityMatrix::from_pure(&singlet_state(s));
        let ev = hermitian_eigenvalues(&partial_transpose(rho.matrix(), s).unwrap());
        assert!((ev[0] + 0.5).abs() < 1e-14);
        for l in &ev[1..] {
            assert!((l - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn log_negativity_extremes() {
        for t in 1..=4 {
            let s = spin(t);
            let singlet = DensityMatrix::from_pure(&singlet_state(s));
            let expected = (s.dim() as f64).log2();
            assert!((log_negativity(&singlet, s).unwrap() - expected).abs() < 1e-12);
            let product =
                DensityMatrix::from_pure(&product_state(s, s.value(), -s.value()).unwrap());
            assert_eq!(log_negativity(&product, s).unwrap(), 0.0);
            // A coupled state with s12 = 2s is a product state only at m12 = ±2s.
            let top = coupled_basis(s)
                .state(
                    HalfInteger::from_twice(2 * t),
                    HalfInteger::from_twice(2 * t),
                )
                .unwrap();
            assert_eq!(
                log_negativity(&DensityMatrix::from_pure(&top), s).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn purity_values() {
        assert!((purity(&DensityMatrix::maximally_mixed(4)) - 0.25).abs() < 1e-15);
        let psi = StateVector::normalized(ComplexVector::from_vec(alloc::vec![
            c(1.0),
            c(2.0),
            c(-1.0),
            c(0.5)
        ]))
        .unwrap();
        assert!((purity(&DensityMatrix::from_pure(&psi)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fidelity_is_linear_in_rho() {
        let s = spin(3);
        let psi = singlet_state(s);
        let r1 = DensityMatrix::from_pure(&product_state(s, 0.5, -0.5).unwrap());
        let r2 = DensityMatrix::maximally_mixed(s.pair_dim());
        for w in [0.0, 0.3, 0.71, 1.0] {
            let mix = r1.mix(&r2, w).unwrap();
            let lhs = fidelity_to_pure(&mix, &psi).unwrap();
            let rhs = w * fidelity_to_pure(&r1, &psi).unwrap()
                + (1.0 - w) * fidelity_to_pure(&r2, &psi).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
