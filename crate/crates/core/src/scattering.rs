//! Stationary scattering of a spin-1/2 mediator off two delta-coupled spin-`s`
//! impurities at `x = 0` and `x = x₀`.
//!
//! Everything is expressed in the dimensionless pair `(J/v, k x₀)`. In each
//! region the mediator wavefunction is `e^{ikx} a + e^{-ikx} b`, with `a` and
//! `b` operator-valued (columns are incident channels). Each site `i` adds
//! the dimensionless coupling operator `U_i` from [`coupling_operator`].
//!
//! * Quadratic dispersion (electron) imposes continuity and the derivative
//!   jump `ψ'(x_i⁺) − ψ'(x_i⁻) = 2k U_i ψ(x_i)`.
//! * Linear dispersion (photon) imposes the first-order chiral equations with
//!   `ψ(x_i) = [ψ(x_i⁺) + ψ(x_i⁻)]/2`.
//!
//! Both give the same single-site eigenchannel amplitudes
//! `t = 1/(1 + i w)`, `r = t − 1`. The linear case has `J/v` independent of
//! `k`. The quadratic case has `v = k/m*`, which matters when `k` is
//! averaged over a distribution.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
#[allow(unused_imports)] // float methods come from libm without std
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    block, c, commutator, deviation_from_identity, hermitian_eigen, identity, kron, max_abs,
    max_abs_diff, phase, set_block, ComplexMatrix, I, ONE, ZERO,
};
use crate::spin::{ideal_rates, joint_total_sz, make_spin_ops, pair, HalfInteger, Spin};

/// Normalization of the mediator spin operator in the coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SpinConvention {
    /// `σ` with eigenvalues `±1`.
    Pauli,
    /// `σ/2`, a genuine spin-1/2 operator. `J/v` under this convention is
    /// twice the Pauli value for the same physics.
    #[default]
    SpinHalf,
}

impl SpinConvention {
    pub fn factor(self) -> f64 {
        match self {
            Self::Pauli => 1.0,
            Self::SpinHalf => 0.5,
        }
    }
}

/// Raman rates `J_{s,m}/v` for `m = −s, ..., s − 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum RatePattern {
    /// `J_{s,m} = J χ_{s,m}`, scaled by the configured `J/v`.
    Ideal,
    /// Explicit `J_{s,m}/v`; the configured `J/v` is ignored.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CouplingModel {
    /// Isotropic exchange `J σ·S_i`.
    Heisenberg,
    /// Flip-only coupling `σ₊ 𝒮_{i−} + σ₋ 𝒮_{i+}`.
    Xy(RatePattern),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dispersion {
    /// `E = k²/2m*`, electrons.
    Quadratic,
    /// `E = v k`, photons.
    Linear,
}

impl Dispersion {
    /// The dispersion each coupling model is paired with.
    pub fn natural_for(coupling: &CouplingModel) -> Self {
        match coupling {
            CouplingModel::Heisenberg => Self::Quadratic,
            CouplingModel::Xy(_) => Self::Linear,
        }
    }
}

/// Physical specification of one scattering problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    spin: Spin,
    coupling: CouplingModel,
    dispersion: Dispersion,
    coupling_strength: f64,
    kx0_over_pi: f64,
    convention: SpinConvention,
}

impl ModelConfig {
    pub fn new(
        spin: Spin,
        coupling: CouplingModel,
        dispersion: Dispersion,
        coupling_strength: f64,
        kx0_over_pi: f64,
        convention: SpinConvention,
    ) -> Result<Self> {
        let config = Self {
            spin,
            coupling,
            dispersion,
            coupling_strength,
            kx0_over_pi,
            convention,
        };
        config.validate()?;
        Ok(config)
    }

    /// Electron with Heisenberg exchange and quadratic dispersion.
    pub fn heisenberg(spin: Spin, jv: f64, kx0_over_pi: f64) -> Result<Self> {
        Self::new(
            spin,
            CouplingModel::Heisenberg,
            Dispersion::Quadratic,
            jv,
            kx0_over_pi,
            SpinConvention::default(),
        )
    }

    /// Photon with XY coupling and linear dispersion.
    pub fn photonic(spin: Spin, rates: RatePattern, jv: f64, kx0_over_pi: f64) -> Result<Self> {
        Self::new(
            spin,
            CouplingModel::Xy(rates),
            Dispersion::Linear,
            jv,
            kx0_over_pi,
            SpinConvention::default(),
        )
    }

    pub fn with_convention(mut self, convention: SpinConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_coupling_strength(mut self, jv: f64) -> Result<Self> {
        self.coupling_strength = jv;
        self.validate()?;
        Ok(self)
    }

    pub fn with_kx0_over_pi(mut self, kx0_over_pi: f64) -> Result<Self> {
        self.kx0_over_pi = kx0_over_pi;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !self.coupling_strength.is_finite() || self.coupling_strength < 0.0 {
            return bad(format!(
                "J/v = {} must be finite and non-negative",
                self.coupling_strength
            ));
        }
        if !self.kx0_over_pi.is_finite() || self.kx0_over_pi < 0.0 {
            return bad(format!(
                "kx0/pi = {} must be finite and non-negative",
                self.kx0_over_pi
            ));
        }
        if self.dispersion != Dispersion::natural_for(&self.coupling) {
            return bad(format!(
                "{:?} coupling cannot be paired with {:?} dispersion",
                self.coupling, self.dispersion
            ));
        }
        if let CouplingModel::Xy(RatePattern::Explicit(rates)) = &self.coupling {
            let expected = self.spin.twice() as usize;
            if rates.len() != expected {
                return bad(format!(
                    "expected {expected} XY rates for s = {}, got {}",
                    self.spin,
                    rates.len()
                ));
            }
            if let Some(r) = rates.iter().find(|r| !r.is_finite() || **r < 0.0) {
                return bad(format!("XY rate {r} must be finite and non-negative"));
            }
        }
        if self.kx0_over_pi == 0.0 {
            log::warn!("kx0 = 0: the two impurities coincide");
        }
        Ok(())
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn coupling(&self) -> &CouplingModel {
        &self.coupling
    }

    pub fn dispersion(&self) -> Dispersion {
        self.dispersion
    }

    /// Dimensionless `J/v`.
    pub fn coupling_strength(&self) -> f64 {
        self.coupling_strength
    }

    pub fn kx0_over_pi(&self) -> f64 {
        self.kx0_over_pi
    }

    pub fn kx0(&self) -> f64 {
        PI * self.kx0_over_pi
    }

    pub fn convention(&self) -> SpinConvention {
        self.convention
    }

    /// `k x₀ / π ∈ ℤ` (to `1e-9`).
    pub fn is_resonant(&self) -> bool {
        (self.kx0_over_pi - self.kx0_over_pi.round()).abs() < 1e-9
    }

    /// Effective `J_{s,m}/v` for the XY model, `None` for Heisenberg.
    pub fn xy_rates(&self) -> Option<Vec<f64>> {
        match &self.coupling {
            CouplingModel::Heisenberg => None,
            CouplingModel::Xy(RatePattern::Ideal) => Some(
                ideal_rates(self.spin)
                    .into_iter()
                    .map(|chi| chi * self.coupling_strength)
                    .collect(),
            ),
            CouplingModel::Xy(RatePattern::Explicit(rates)) => Some(rates.clone()),
        }
    }

    /// Same model with every coupling scaled by `factor` (including explicit
    /// rates). Used to vary `v` at fixed `J`.
    pub(crate) fn scaled_coupling(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.coupling_strength *= factor;
        if let CouplingModel::Xy(RatePattern::Explicit(rates)) = &mut out.coupling {
            rates.iter_mut().for_each(|r| *r *= factor);
        }
        out
    }
}

impl fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coupling = match &self.coupling {
            CouplingModel::Heisenberg => String::from("heisenberg"),
            CouplingModel::Xy(RatePattern::Ideal) => String::from("xy(ideal)"),
            CouplingModel::Xy(RatePattern::Explicit(r)) => format!("xy({r:?})"),
        };
        write!(
            f,
            "s={} coupling={} dispersion={:?} J/v={} kx0/pi={} convention={:?}",
            self.spin,
            coupling,
            self.dispersion,
            self.coupling_strength,
            self.kx0_over_pi,
            self.convention
        )
    }
}

/// Impurity site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Site {
    /// At `x = 0`.
    First,
    /// At `x = x₀`.
    Second,
}

fn sigma_plus() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
}

/// `mediator_op ⊗ impurity_op` on `site`, identity on the other impurity.
fn site_operator(
    mediator_op: &ComplexMatrix,
    impurity_op: &ComplexMatrix,
    site: Site,
    spin: Spin,
) -> ComplexMatrix {
    let rest = identity(spin.dim());
    match site {
        Site::First => kron(&kron(mediator_op, impurity_op), &rest),
        Site::Second => kron(mediator_op, &kron(&rest, impurity_op)),
    }
}

/// Dimensionless coupling operator `U_i` of `site` on the joint space.
///
/// Heisenberg: `c (J/v) σ·S_i`. XY: `c (σ₊ 𝒮_{i−} + σ₋ 𝒮_{i+})` with
/// `𝒮_{i+} = Σ_m (J_{s,m}/v) |m+1⟩⟨m|`. Here `σ₊ = |↑⟩⟨↓|`, and `c` is 1
/// (Pauli) or 1/2 (spin-1/2 mediator).
pub fn coupling_operator(config: &ModelConfig, site: Site) -> Result<ComplexMatrix> {
    config.validate()?;
    let spin = config.spin;
    let scale = config.convention.factor();
    let sp = sigma_plus();
    let sm = sp.adjoint();
    let op = match &config.coupling {
        CouplingModel::Heisenberg => {
            let o = make_spin_ops(spin);
            let sz = ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
            // σ·S = σz Sz + σ₊ S₋ + σ₋ S₊ with σ₊ = |↑⟩⟨↓|
            let v = site_operator(&sz, &o.sz, site, spin)
                + site_operator(&sp, &o.s_minus, site, spin)
                + site_operator(&sm, &o.s_plus, site, spin);
            v.scale(config.coupling_strength)
        }
        CouplingModel::Xy(_) => {
            let rates = config.xy_rates().expect("xy model has rates");
            let dim = spin.dim();
            let mut raise = ComplexMatrix::zeros(dim, dim);
            for (k, rate) in rates.iter().enumerate() {
                let m = HalfInteger::from_twice(-spin.twice() + 2 * k as i32);
                let from = spin.index_of(m)?;
                raise[(from - 1, from)] = c(*rate);
            }
            site_operator(&sp, &raise.adjoint(), site, spin)
                + site_operator(&sm, &raise, site, spin)
        }
    };
    Ok(op.scale(scale))
}

/// Reflection and transmission operators on the joint space.
///
/// Rows index the outgoing `(mediator, m₁, m₂)` channel, columns the incident
/// one. For left incidence the transmitted wave is `t e^{ikx}` for `x > x₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringOperators {
    pub reflection: ComplexMatrix,
    pub transmission: ComplexMatrix,
    pub config: ModelConfig,
}

impl ScatteringOperators {
    pub fn dim(&self) -> usize {
        self.reflection.nrows()
    }
}

/// Solutions for incidence from both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct FullScattering {
    pub from_left: ScatteringOperators,
    pub from_right: ScatteringOperators,
}

impl FullScattering {
    /// `S = [[r, t'], [t, r']]` mapping incoming `(left, right)` amplitudes to
    /// outgoing `(left, right)` amplitudes.
    pub fn s_matrix(&self) -> ComplexMatrix {
        let d = self.from_left.dim();
        let mut s = ComplexMatrix::zeros(2 * d, 2 * d);
        set_block(&mut s, 0, 0, &self.from_left.reflection);
        set_block(&mut s, d, 0, &self.from_left.transmission);
        set_block(&mut s, 0, d, &self.from_right.transmission);
        set_block(&mut s, d, d, &self.from_right.reflection);
        s
    }

    /// `‖S†S − 1‖_max`.
    pub fn unitarity_deviation(&self) -> f64 {
        let s = self.s_matrix();
        deviation_from_identity(&(s.adjoint() * &s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Incidence {
    Left,
    Right,
}

struct Scatterer {
    /// `k x_i`.
    position_phase: f64,
    coupling: ComplexMatrix,
}

fn scatterers(config: &ModelConfig, sites: &[Site]) -> Result<Vec<Scatterer>> {
    sites
        .iter()
        .map(|&site| {
            let coupling = coupling_operator(config, site)?;
            // Real spectrum of U_i: every channel is propagating.
            let herm = max_abs_diff(&coupling, &coupling.adjoint());
            if herm > 1e-12 {
                return Err(Error::InvariantViolation {
                    what: "coupling operator Hermiticity",
                    deviation: herm,
                    tolerance: 1e-12,
                });
            }
            let position_phase = match site {
                Site::First => 0.0,
                Site::Second => config.kx0(),
            };
            Ok(Scatterer {
                position_phase,
                coupling,
            })
        })
        .collect()
}

/// Where a region coefficient lives in the linear system.
enum Coeff {
    Unknown(usize),
    Known(ComplexMatrix),
    Zero,
}

/// Assembles and solves the matching conditions for `sites.len()` scatterers.
///
/// Unknown blocks, in order: `b_0, a_1, b_1, ..., a_{N-1}, b_{N-1}, a_N`.
/// Returns `(reflection, transmission)` for the requested incidence.
fn solve_direct(
    dispersion: Dispersion,
    dim: usize,
    sites: &[Scatterer],
    incidence: Incidence,
    context: &ModelConfig,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = sites.len();
    let unknowns = 2 * n;
    let size = unknowns * dim;
    let coeff = |region: usize, right_moving: bool| -> Coeff {
        match (right_moving, region) {
            (true, 0) => match incidence {
                Incidence::Left => Coeff::Known(identity(dim)),
                Incidence::Right => Coeff::Zero,
            },
            (false, r) if r == n => match incidence {
                Incidence::Left => Coeff::Zero,
                Incidence::Right => Coeff::Known(identity(dim)),
            },
            (true, r) => Coeff::Unknown(2 * r - 1),
            (false, r) => Coeff::Unknown(2 * r),
        }
    };

    let mut system = ComplexMatrix::zeros(size, size);
    let mut rhs = ComplexMatrix::zeros(size, dim);
    let mut add = |row: usize, region: usize, right_moving: bool, term: ComplexMatrix| match coeff(
        region,
        right_moving,
    ) {
        Coeff::Unknown(col) => {
            let mut view = system.view_mut((row * dim, col * dim), (dim, dim));
            view += term;
        }
        Coeff::Known(value) => {
            let mut view = rhs.view_mut((row * dim, 0), (dim, dim));
            view -= term * value;
        }
        Coeff::Zero => {}
    };

    let id = identity(dim);
    for (i, site) in sites.iter().enumerate() {
        let e = phase(site.position_phase);
        let eb = e.conj();
        let u = &site.coupling;
        let (left, right) = (i, i + 1);
        match dispersion {
            Dispersion::Quadratic => {
                // ψ continuous
                add(2 * i, left, true, &id * e);
                add(2 * i, left, false, &id * eb);
                add(2 * i, right, true, &id * -e);
                add(2 * i, right, false, &id * -eb);
                // i(ψ'_R − ψ'_L)/k − 2 U ψ = 0
                add(2 * i + 1, left, true, (&id * -I - u * c(2.0)) * e);
                add(2 * i + 1, left, false, (&id * I - u * c(2.0)) * eb);
                add(2 * i + 1, right, true, &id * (I * e));
                add(2 * i + 1, right, false, &id * (-I * eb));
            }
            Dispersion::Linear => {
                // Φ = [ψ(x_i⁺) + ψ(x_i⁻)]/2 summed over both movers.
                let half_iu = u * (I * 0.5);
                // right movers: Δφ_R + i U Φ = 0
                add(2 * i, left, true, (-&id + &half_iu) * e);
                add(2 * i, left, false, &half_iu * eb);
                add(2 * i, right, true, (&id + &half_iu) * e);
                add(2 * i, right, false, &half_iu * eb);
                // left movers: Δφ_L − i U Φ = 0
                add(2 * i + 1, left, true, -&half_iu * e);
                add(2 * i + 1, left, false, (-&id - &half_iu) * eb);
                add(2 * i + 1, right, true, -&half_iu * e);
                add(2 * i + 1, right, false, (&id - &half_iu) * eb);
            }
        }
    }

    let solution = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem {
            context: format!("{context}"),
        })?;
    if solution
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::SingularSystem {
            context: format!("{context}"),
        });
    }
    let b0 = block(&solution, 0, 0, dim, dim);
    let an = block(&solution, (unknowns - 1) * dim, 0, dim, dim);
    Ok(match incidence {
        Incidence::Left => (b0, an),
        Incidence::Right => (an, b0),
    })
}

/// Two-impurity stationary scattering by direct solution of the matching
/// conditions (`4D` unknowns, all `D` incident channels at once).
pub fn solve_two_impurity(config: &ModelConfig) -> Result<ScatteringOperators> {
    let sites = scatterers(config, &[Site::First, Site::Second])?;
    let (reflection, transmission) = solve_direct(
        config.dispersion,
        config.spin.joint_dim(),
        &sites,
        Incidence::Left,
        config,
    )?;
    Ok(ScatteringOperators {
        reflection,
        transmission,
        config: config.clone(),
    })
}

/// Left- and right-incidence solutions of the two-impurity problem.
pub fn solve_full_s_matrix(config: &ModelConfig) -> Result<FullScattering> {
    let sites = scatterers(config, &[Site::First, Site::Second])?;
    let dim = config.spin.joint_dim();
    let solve = |incidence| -> Result<ScatteringOperators> {
        let (reflection, transmission) =
            solve_direct(config.dispersion, dim, &sites, incidence, config)?;
        Ok(ScatteringOperators {
            reflection,
            transmission,
            config: config.clone(),
        })
    };
    Ok(FullScattering {
        from_left: solve(Incidence::Left)?,
        from_right: solve(Incidence::Right)?,
    })
}

/// Impurity 1 alone, by direct solution of its matching conditions.
pub fn solve_single_impurity_direct(config: &ModelConfig) -> Result<ScatteringOperators> {
    let sites = scatterers(config, &[Site::First])?;
    let (reflection, transmission) = solve_direct(
        config.dispersion,
        config.spin.joint_dim(),
        &sites,
        Incidence::Left,
        config,
    )?;
    Ok(ScatteringOperators {
        reflection,
        transmission,
        config: config.clone(),
    })
}

/// `Σ_j f(w_j) P_j` for Hermitian `u = Σ_j w_j P_j`.
fn spectral_map(u: &ComplexMatrix, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
    let (values, vectors) = hermitian_eigen(u);
    let dim = u.nrows();
    let mut diag = ComplexMatrix::zeros(dim, dim);
    for (k, w) in values.iter().enumerate() {
        diag[(k, k)] = f(*w);
    }
    &vectors * diag * vectors.adjoint()
}

fn eigenchannel_transmission(w: f64) -> Complex64 {
    ONE / Complex64::new(1.0, w)
}

/// Impurity 1 alone, from its eigenchannels: `t = Σ_j P_j / (1 + i w_j)`,
/// `r = t − 1`. Identical for both dispersions.
pub fn solve_single_impurity_closed_form(config: &ModelConfig) -> Result<ScatteringOperators> {
    let u = coupling_operator(config, Site::First)?;
    let transmission = spectral_map(&u, eigenchannel_transmission);
    let reflection = &transmission - identity(u.nrows());
    Ok(ScatteringOperators {
        reflection,
        transmission,
        config: config.clone(),
    })
}

/// Local transfer matrix `[[a_R],[b_R]] = M [[a_L],[b_L]]` of a single site,
/// assembled from its closed-form `r`, `t` (and `t⁻¹`).
fn site_transfer_matrix(u: &ComplexMatrix) -> ComplexMatrix {
    let dim = u.nrows();
    let t = spectral_map(u, eigenchannel_transmission);
    let t_inv = spectral_map(u, |w| Complex64::new(1.0, w));
    let r = &t - identity(dim);
    let mut m = ComplexMatrix::zeros(2 * dim, 2 * dim);
    set_block(&mut m, 0, 0, &(&t - &r * &t_inv * &r));
    set_block(&mut m, 0, dim, &(&r * &t_inv));
    set_block(&mut m, dim, 0, &(-&t_inv * &r));
    set_block(&mut m, dim, dim, &t_inv);
    m
}

fn free_propagator(dim: usize, kx: f64) -> ComplexMatrix {
    let mut f = ComplexMatrix::zeros(2 * dim, 2 * dim);
    let e = phase(kx);
    for k in 0..dim {
        f[(k, k)] = e;
        f[(dim + k, dim + k)] = e.conj();
    }
    f
}

/// Composes `M = M₂ F(kx₀) M₁` from the single-site solutions and converts
/// back to `r = −M₂₂⁻¹ M₂₁`, `t = e^{−ikx₀}(M₁₁ + M₁₂ r)`.
pub fn solve_via_transfer_matrices(config: &ModelConfig) -> Result<ScatteringOperators> {
    let dim = config.spin.joint_dim();
    let sites = scatterers(config, &[Site::First, Site::Second])?;
    let m1 = site_transfer_matrix(&sites[0].coupling);
    let m2 = site_transfer_matrix(&sites[1].coupling);
    let total = m2 * free_propagator(dim, config.kx0()) * m1;
    transfer_to_amplitudes(&total, dim, config.kx0(), config)
}

/// Transfer-matrix route with impurity 2 removed.
pub fn solve_single_via_transfer_matrix(config: &ModelConfig) -> Result<ScatteringOperators> {
    let u = coupling_operator(config, Site::First)?;
    let m = site_transfer_matrix(&u);
    transfer_to_amplitudes(&m, u.nrows(), 0.0, config)
}

fn transfer_to_amplitudes(
    total: &ComplexMatrix,
    dim: usize,
    last_phase: f64,
    config: &ModelConfig,
) -> Result<ScatteringOperators> {
    let m11 = block(total, 0, 0, dim, dim);
    let m12 = block(total, 0, dim, dim, dim);
    let m21 = block(total, dim, 0, dim, dim);
    let m22 = block(total, dim, dim, dim, dim);
    let reflection = -m22.lu().solve(&m21).ok_or_else(|| Error::SingularSystem {
        context: format!("transfer-matrix block M22 not invertible for {config}"),
    })?;
    let transmission = (m11 + m12 * &reflection) * phase(-last_phase);
    Ok(ScatteringOperators {
        reflection,
        transmission,
        config: config.clone(),
    })
}

/// `‖r†r + t†t − 1‖_max`.
pub fn verify_unitarity(ops: &ScatteringOperators) -> f64 {
    let r = &ops.reflection;
    let t = &ops.transmission;
    deviation_from_identity(&(r.adjoint() * r + t.adjoint() * t))
}

/// Largest amplitude connecting channels with different total `S_z`.
pub fn selection_rule_violation(ops: &ScatteringOperators) -> f64 {
    let sz = joint_total_sz(ops.config.spin);
    let dim = ops.dim();
    let mut worst: f64 = 0.0;
    for j in 0..dim {
        for i in 0..dim {
            if (sz[(i, i)] - sz[(j, j)]).norm() > 1e-9 {
                worst = worst
                    .max(ops.reflection[(i, j)].norm())
                    .max(ops.transmission[(i, j)].norm());
            }
        }
    }
    worst
}

/// `max(‖[r, S₁₂²]‖_max, ‖[t, S₁₂²]‖_max)` with `S₁₂²` acting on the
/// impurities.
pub fn total_spin_commutator(ops: &ScatteringOperators) -> f64 {
    let s2 = kron(&identity(2), &pair::total_spin_squared(ops.config.spin));
    max_abs(&commutator(&ops.reflection, &s2)).max(max_abs(&commutator(&ops.transmission, &s2)))
}
