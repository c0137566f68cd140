//! Spin-`s` angular momentum on the mediator ⊗ impurity ⊗ impurity space.
//!
//! Besides the operator matrices this builds the coupled two-spin basis
//! together with the singlet.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
#[allow(unused_imports)] // float methods come from libm without std
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, identity, kron, ComplexMatrix, ComplexVector, ZERO};
use crate::state::StateVector;

/// A signed half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInteger {
    twice: i32,
}

impl HalfInteger {
    pub const fn from_twice(twice: i32) -> Self {
        Self { twice }
    }

    pub const fn from_int(n: i32) -> Self {
        Self { twice: 2 * n }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// Nearest half-integer to `x`, if `x` is one to within `1e-9`.
    pub fn from_f64(x: f64) -> Option<Self> {
        let t = (2.0 * x).round();
        if (2.0 * x - t).abs() > 1e-9 || t.abs() > f64::from(i32::MAX) {
            return None;
        }
        Some(Self { twice: t as i32 })
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// Accepts `3/2`, `-1/2`, `2`, `1.5`.
impl FromStr for HalfInteger {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let text = s.trim();
        let err = || Error::ParseHalfInteger(text.to_string());
        if let Some((num, den)) = text.split_once('/') {
            let num: i32 = num.trim().parse().map_err(|_| err())?;
            let den: i32 = den.trim().parse().map_err(|_| err())?;
            return match den {
                1 => Ok(Self::from_int(num)),
                2 => Ok(Self::from_twice(num)),
                _ => Err(err()),
            };
        }
        if let Ok(n) = text.parse::<i32>() {
            return Ok(Self::from_int(n));
        }
        let x: f64 = text.parse().map_err(|_| err())?;
        Self::from_f64(x).ok_or_else(err)
    }
}

/// A spin quantum number `s ≥ 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin(HalfInteger);

impl Spin {
    pub fn from_twice(twice: i32) -> Result<Self> {
        Self::new(HalfInteger::from_twice(twice))
    }

    pub fn new(s: HalfInteger) -> Result<Self> {
        if s.twice() < 1 {
            return Err(Error::InvalidSpin { twice: s.twice() });
        }
        Ok(Self(s))
    }

    pub fn half_integer(self) -> HalfInteger {
        self.0
    }

    pub fn twice(self) -> i32 {
        self.0.twice()
    }

    pub fn value(self) -> f64 {
        self.0.value()
    }

    /// `2s + 1`.
    pub fn dim(self) -> usize {
        self.0.twice() as usize + 1
    }

    /// `(2s + 1)²`, the two-impurity dimension.
    pub fn pair_dim(self) -> usize {
        self.dim() * self.dim()
    }

    /// `2 (2s + 1)²`, the mediator ⊗ impurities dimension.
    pub fn joint_dim(self) -> usize {
        2 * self.pair_dim()
    }

    /// Projections `s, s-1, ..., -s` in basis order.
    pub fn projections(self) -> impl Iterator<Item = HalfInteger> + Clone {
        let t = self.twice();
        (0..=t).map(move |i| HalfInteger::from_twice(t - 2 * i))
    }

    /// Basis index of the projection `m`.
    pub fn index_of(self, m: HalfInteger) -> Result<usize> {
        let t = self.twice();
        if m.twice() > t || m.twice() < -t || (t - m.twice()) % 2 != 0 {
            return Err(Error::ProjectionOutOfRange {
                twice_s: t,
                twice_m: m.twice(),
            });
        }
        Ok(((t - m.twice()) / 2) as usize)
    }

    /// `s(s + 1)`.
    pub fn casimir(self) -> f64 {
        let s = self.value();
        s * (s + 1.0)
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for Spin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Spin::new(s.parse()?)
    }
}

/// Matrix representation of a single spin-`s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    pub spin: Spin,
    pub sx: ComplexMatrix,
    pub sy: ComplexMatrix,
    pub sz: ComplexMatrix,
    pub s_plus: ComplexMatrix,
    pub s_minus: ComplexMatrix,
}

/// Builds `Sx, Sy, Sz, S±` for spin `s` from the ladder matrix elements
/// `⟨m+1|S₊|m⟩ = √(s(s+1) − m(m+1))`.
pub fn make_spin_ops(spin: Spin) -> SpinOperators {
    let dim = spin.dim();
    let ms: Vec<f64> = spin.projections().map(HalfInteger::value).collect();
    let sz = ComplexMatrix::from_fn(dim, dim, |i, j| if i == j { c(ms[i]) } else { ZERO });
    let casimir = spin.casimir();
    let s_plus = ComplexMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            let m = ms[j];
            c((casimir - m * (m + 1.0)).sqrt())
        } else {
            ZERO
        }
    });
    let s_minus = s_plus.adjoint();
    let sx = (&s_plus + &s_minus).scale(0.5);
    let sy = (&s_plus - &s_minus) * Complex64::new(0.0, -0.5);
    SpinOperators {
        spin,
        sx,
        sy,
        sz,
        s_plus,
        s_minus,
    }
}

/// Tensor factor of the joint space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    /// The spin-1/2 mediator (electron spin or photon polarization).
    Mediator,
    Impurity1,
    Impurity2,
}

/// Embeds a single-factor operator into `mediator ⊗ impurity 1 ⊗ impurity 2`.
pub fn embed(op: &ComplexMatrix, slot: Slot, spin: Spin) -> Result<ComplexMatrix> {
    let dim = spin.dim();
    let expected = match slot {
        Slot::Mediator => 2,
        Slot::Impurity1 | Slot::Impurity2 => dim,
    };
    if op.nrows() != expected || op.ncols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: op.nrows().max(op.ncols()),
        });
    }
    Ok(match slot {
        Slot::Mediator => kron(op, &identity(spin.pair_dim())),
        Slot::Impurity1 => kron(&kron(&identity(2), op), &identity(dim)),
        Slot::Impurity2 => kron(&identity(2 * dim), op),
    })
}

/// Operators acting on the two-impurity space `impurity 1 ⊗ impurity 2`.
pub mod pair {
    use super::*;

    pub fn on_first(op: &ComplexMatrix, spin: Spin) -> ComplexMatrix {
        kron(op, &identity(spin.dim()))
    }

    pub fn on_second(op: &ComplexMatrix, spin: Spin) -> ComplexMatrix {
        kron(&identity(spin.dim()), op)
    }

    /// `S₁₂z = S₁z + S₂z`.
    pub fn total_sz(spin: Spin) -> ComplexMatrix {
        let ops = make_spin_ops(spin);
        on_first(&ops.sz, spin) + on_second(&ops.sz, spin)
    }

    /// `S₁₂₋ = S₁₋ + S₂₋`.
    pub fn total_lowering(spin: Spin) -> ComplexMatrix {
        let ops = make_spin_ops(spin);
        on_first(&ops.s_minus, spin) + on_second(&ops.s_minus, spin)
    }

    /// `S₁₂² = (S₁ + S₂)²`.
    pub fn total_spin_squared(spin: Spin) -> ComplexMatrix {
        let ops = make_spin_ops(spin);
        let x = on_first(&ops.sx, spin) + on_second(&ops.sx, spin);
        let y = on_first(&ops.sy, spin) + on_second(&ops.sy, spin);
        let z = on_first(&ops.sz, spin) + on_second(&ops.sz, spin);
        &x * &x + &y * &y + &z * &z
    }
}

/// Total `S_z` on the joint space with a spin-1/2 mediator:
/// `σ_z/2 + S₁z + S₂z`.
pub fn joint_total_sz(spin: Spin) -> ComplexMatrix {
    let mediator =
        ComplexMatrix::from_diagonal(&ComplexVector::from_vec(alloc::vec![c(0.5), c(-0.5)]));
    let ops = make_spin_ops(spin);
    let mut total = embed(&mediator, Slot::Mediator, spin).expect("2x2 mediator op");
    total += embed(&ops.sz, Slot::Impurity1, spin).expect("matching dim");
    total += embed(&ops.sz, Slot::Impurity2, spin).expect("matching dim");
    total
}

/// Label of a coupled-basis state `|s, s, s₁₂, m₁₂⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CoupledLabel {
    pub s12: HalfInteger,
    pub m12: HalfInteger,
}

/// Unitary change of basis from `|m₁, m₂⟩` to `|s, s, s₁₂, m₁₂⟩`.
///
/// Columns are grouped by `s₁₂` descending, and within each block by `m₁₂`
/// descending; `labels[k]` names column `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledBasis {
    pub spin: Spin,
    pub unitary: ComplexMatrix,
    pub labels: Vec<CoupledLabel>,
}

impl CoupledBasis {
    pub fn column_index(&self, s12: HalfInteger, m12: HalfInteger) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| l.s12 == s12 && l.m12 == m12)
    }

    /// The coupled state `|s, s, s₁₂, m₁₂⟩` in the product basis.
    pub fn state(&self, s12: HalfInteger, m12: HalfInteger) -> Result<StateVector> {
        let k = self.column_index(s12, m12).ok_or_else(|| {
            Error::InvalidState(format!("no coupled state with s12 = {s12}, m12 = {m12}"))
        })?;
        StateVector::new(self.unitary.column(k).into_owned())
    }

    /// Allowed `s₁₂` values, descending.
    pub fn total_spins(&self) -> impl Iterator<Item = HalfInteger> {
        (0..=self.spin.twice()).rev().map(HalfInteger::from_int)
    }

    /// `(s₁₂, 2s₁₂ + 1)` for each block, in column order.
    pub fn block_dims(&self) -> Vec<(HalfInteger, usize)> {
        let mut dims: Vec<(HalfInteger, usize)> = Vec::new();
        for label in &self.labels {
            match dims.last_mut() {
                Some((s12, n)) if *s12 == label.s12 => *n += 1,
                _ => dims.push((label.s12, 1)),
            }
        }
        dims
    }
}

/// Builds the coupled basis by lowering from highest weight.
///
/// `|2s, 2s⟩ = |s, s⟩`. Each lower multiplet's top state is the unit vector
/// orthogonal to the higher multiplets at the same `m₁₂`, with a positive
/// coefficient on `|m₁ = s, m₂ = s₁₂ − s⟩` (Condon–Shortley).
pub fn coupled_basis(spin: Spin) -> CoupledBasis {
    let dim = spin.dim();
    let d = spin.pair_dim();
    let twice_s = spin.twice();
    let lowering = pair::total_lowering(spin);
    let mut columns: Vec<ComplexVector> = Vec::with_capacity(d);
    let mut labels: Vec<CoupledLabel> = Vec::with_capacity(d);

    for s12 in (0..=twice_s).rev() {
        let anchor = spin.index_of(HalfInteger::from_twice(twice_s)).unwrap() * dim
            + spin
                .index_of(HalfInteger::from_twice(2 * s12 - twice_s))
                .expect("m2 = s12 - s lies in [-s, s]");
        let mut top = ComplexVector::zeros(d);
        top[anchor] = c(1.0);
        for (col, label) in columns.iter().zip(&labels) {
            if label.m12.twice() == 2 * s12 {
                let overlap = col.dotc(&top);
                top -= col * overlap;
            }
        }
        let coeff = top[anchor];
        debug_assert!(coeff.re > 0.0 && coeff.im.abs() < 1e-14);
        top /= c(top.norm());

        let mut current = top;
        for k in 0..=(2 * s12) {
            labels.push(CoupledLabel {
                s12: HalfInteger::from_int(s12),
                m12: HalfInteger::from_int(s12 - k),
            });
            let next = &lowering * &current;
            columns.push(current);
            let norm = next.norm();
            current = if k < 2 * s12 { next / c(norm) } else { next };
        }
    }

    CoupledBasis {
        spin,
        unitary: ComplexMatrix::from_columns(&columns),
        labels,
    }
}

/// `|Ψ_s⁻⟩ = Σ_m (−1)^{s−m} |m, −m⟩ / √(2s+1)`.
pub fn singlet_state(spin: Spin) -> StateVector {
    let dim = spin.dim();
    let norm = 1.0 / (dim as f64).sqrt();
    let mut amps = ComplexVector::zeros(spin.pair_dim());
    for m in spin.projections() {
        let i1 = spin.index_of(m).unwrap();
        let i2 = spin.index_of(HalfInteger::from_twice(-m.twice())).unwrap();
        let sign = if ((spin.twice() - m.twice()) / 2) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        amps[i1 * dim + i2] = c(sign * norm);
    }
    StateVector::new(amps).expect("singlet is normalized")
}

/// `χ_{s,m} = √(s(s+1) − m(m+1))` for `−s ≤ m ≤ s − 1`.
pub fn chi_rate(spin: Spin, m: HalfInteger) -> Result<f64> {
    let t = spin.twice();
    if m.twice() < -t || m.twice() > t - 2 || (t - m.twice()) % 2 != 0 {
        return Err(Error::ProjectionOutOfRange {
            twice_s: t,
            twice_m: m.twice(),
        });
    }
    let mv = m.value();
    Ok((spin.casimir() - mv * (mv + 1.0)).sqrt())
}

/// `χ_{s,m}` for `m = −s, ..., s − 1`.
pub fn ideal_rates(spin: Spin) -> Vec<f64> {
    let t = spin.twice();
    (0..t)
        .map(|k| chi_rate(spin, HalfInteger::from_twice(-t + 2 * k)).unwrap())
        .collect()
}

#[cfg(test)]
fn commutes_to(a: &ComplexMatrix, b: &ComplexMatrix, target: &ComplexMatrix) -> f64 {
    crate::linalg::max_abs_diff(
        &crate::linalg::commutator(a, b),
        &(target * crate::linalg::I),
    )
}
