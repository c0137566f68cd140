//! Pure and mixed states of the two impurities.

use alloc::format;

use crate::error::{Error, Result};
use crate::linalg::{
    c, hermitian_eigenvalues, hermitian_part, max_abs_diff, ComplexMatrix, ComplexVector,
};
use crate::spin::{HalfInteger, Spin};

const NORM_TOL: f64 = 1e-10;

/// Unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: ComplexVector,
}

impl StateVector {
    /// Wraps `amplitudes`, which must already be normalized.
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes `amplitudes`; fails on a (numerically) zero vector.
    pub fn normalized(amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidState(format!(
                "cannot normalize vector of norm {norm}"
            )));
        }
        Ok(Self {
            amplitudes: amplitudes / c(norm),
        })
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn into_inner(self) -> ComplexVector {
        self.amplitudes
    }
}

/// `|m₁, m₂⟩` for two spin-`s` impurities.
pub fn product_state(spin: Spin, m1: f64, m2: f64) -> Result<StateVector> {
    let proj = |m: f64| {
        HalfInteger::from_f64(m)
            .ok_or_else(|| Error::InvalidState(format!("m = {m} is not a half-integer")))
            .and_then(|m| spin.index_of(m))
    };
    let (i1, i2) = (proj(m1)?, proj(m2)?);
    let mut amps = ComplexVector::zeros(spin.pair_dim());
    amps[i1 * spin.dim() + i2] = c(1.0);
    StateVector::new(amps)
}

/// Density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const POSITIVITY_TOL: f64 = 1e-10;

    /// Validates `matrix` against all density-matrix invariants.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState("density matrix is not square".into()));
        }
        let herm = max_abs_diff(&matrix, &matrix.adjoint());
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > Self::TRACE_TOL || trace.im.abs() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {trace} is not 1")));
        }
        let min = hermitian_eigenvalues(&matrix)
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -Self::POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self {
            matrix: hermitian_part(&matrix),
        })
    }

    /// Normalizes a positive operator by its trace and enforces exact
    /// Hermiticity. Only for outputs of completely positive maps.
    pub(crate) fn from_positive_unchecked(numerator: &ComplexMatrix, trace: f64) -> Self {
        Self {
            matrix: hermitian_part(numerator).unscale(trace),
        }
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        Self {
            matrix: a * a.adjoint(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim, dim).unscale(dim as f64),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Convex combination `w ρ + (1 − w) σ`.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidState(format!(
                "mixing weight {w} outside [0, 1]"
            )));
        }
        Ok(Self {
            matrix: self.matrix.scale(w) + other.matrix.scale(1.0 - w),
        })
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix)[0]
    }
}
