//! Kraus decomposition of the scattering map and the post-selected protocol.
//!
//! `R^μ_ν` (`T^μ_ν`) is the impurity-space block of `r` (`t`) with outgoing
//! mediator spin `μ` and incident spin `ν`. Reflected and transmitted
//! branches are distinct Kraus terms and never add coherently.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // float methods come from libm without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{block, deviation_from_identity, max_abs, ComplexMatrix};
use crate::metrics::{fidelity_to_pure, log_negativity, purity};
use crate::scattering::{
    solve_two_impurity, verify_unitarity, Dispersion, ModelConfig, ScatteringOperators,
};
use crate::spin::{pair, CoupledBasis, HalfInteger, Spin};
use crate::state::{DensityMatrix, StateVector};

/// Below this, a post-selected branch is treated as having zero measure.
pub const VANISHING_PROBABILITY: f64 = 1e-14;
/// Tolerance on `r†r + t†t = 1` accepted by [`extract_kraus`].
pub const UNITARITY_TOL: f64 = 1e-10;

/// Mediator spin (or polarization) state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MediatorSpin {
    Up,
    Down,
}

impl MediatorSpin {
    pub const BOTH: [MediatorSpin; 2] = [MediatorSpin::Up, MediatorSpin::Down];

    fn index(self) -> usize {
        match self {
            Self::Up => 0,
            Self::Down => 1,
        }
    }

    fn twice_m(self) -> i32 {
        match self {
            Self::Up => 1,
            Self::Down => -1,
        }
    }
}

/// The eight Kraus operators of one scattering event.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    /// `reflected[μ][ν] = R^μ_ν`.
    reflected: [[ComplexMatrix; 2]; 2],
    transmitted: [[ComplexMatrix; 2]; 2],
    config: ModelConfig,
}

impl KrausSet {
    pub fn reflected(&self, out: MediatorSpin, incident: MediatorSpin) -> &ComplexMatrix {
        &self.reflected[out.index()][incident.index()]
    }

    pub fn transmitted(&self, out: MediatorSpin, incident: MediatorSpin) -> &ComplexMatrix {
        &self.transmitted[out.index()][incident.index()]
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn spin(&self) -> Spin {
        self.config.spin()
    }

    pub fn dim(&self) -> usize {
        self.config.spin().pair_dim()
    }

    /// `Σ_μ (R^μ†_ν R^μ_ν + T^μ†_ν T^μ_ν)` for incident `ν`.
    pub fn completeness_sum(&self, incident: MediatorSpin) -> ComplexMatrix {
        let mut sum = ComplexMatrix::zeros(self.dim(), self.dim());
        for out in MediatorSpin::BOTH {
            let r = self.reflected(out, incident);
            let t = self.transmitted(out, incident);
            sum += r.adjoint() * r + t.adjoint() * t;
        }
        sum
    }

    /// Worst deviation of the completeness relation over both `ν`.
    pub fn completeness_deviation(&self) -> f64 {
        MediatorSpin::BOTH
            .iter()
            .map(|&nu| deviation_from_identity(&self.completeness_sum(nu)))
            .fold(0.0, f64::max)
    }

    /// Largest entry of any `R^μ_ν`, `T^μ_ν` that moves `m₁₂` by something
    /// other than `ν − μ`.
    pub fn shift_rule_violation(&self) -> f64 {
        let sz = pair::total_sz(self.spin());
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for out in MediatorSpin::BOTH {
            for inc in MediatorSpin::BOTH {
                let shift = f64::from(inc.twice_m() - out.twice_m()) / 2.0;
                for j in 0..d {
                    for i in 0..d {
                        if (sz[(i, i)].re - sz[(j, j)].re - shift).abs() > 1e-9 {
                            worst = worst
                                .max(self.reflected(out, inc)[(i, j)].norm())
                                .max(self.transmitted(out, inc)[(i, j)].norm());
                        }
                    }
                }
            }
        }
        worst
    }
}

/// Slices `r`, `t` into Kraus operators. Rejects operators that violate flux
/// conservation beyond [`UNITARITY_TOL`].
pub fn extract_kraus(ops: &ScatteringOperators) -> Result<KrausSet> {
    let deviation = verify_unitarity(ops);
    if deviation.is_nan() || deviation > UNITARITY_TOL {
        return Err(Error::InvariantViolation {
            what: "flux conservation r†r + t†t = 1",
            deviation,
            tolerance: UNITARITY_TOL,
        });
    }
    let d = ops.config.spin().pair_dim();
    let slice = |m: &ComplexMatrix, out: MediatorSpin, inc: MediatorSpin| {
        block(m, out.index() * d, inc.index() * d, d, d)
    };
    let blocks = |m: &ComplexMatrix| {
        use MediatorSpin::{Down, Up};
        [
            [slice(m, Up, Up), slice(m, Up, Down)],
            [slice(m, Down, Up), slice(m, Down, Down)],
        ]
    };
    Ok(KrausSet {
        reflected: blocks(&ops.reflection),
        transmitted: blocks(&ops.transmission),
        config: ops.config.clone(),
    })
}

/// Solves the two-impurity problem at a single wavevector and extracts its
/// Kraus set.
pub fn sharp_kraus(config: &ModelConfig) -> Result<KrausSet> {
    extract_kraus(&solve_two_impurity(config)?)
}

/// Convex mixture of Kraus sets: each mediator independently sees component
/// `j` with probability `w_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausMixture {
    components: Vec<(f64, KrausSet)>,
}

impl KrausMixture {
    pub fn new(components: Vec<(f64, KrausSet)>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidConfig("empty Kraus mixture".into()))?;
        let spin = first.1.spin();
        if components
            .iter()
            .any(|(w, k)| k.spin() != spin || w.is_nan() || *w < 0.0)
        {
            return Err(Error::InvalidConfig(
                "mixture components must share s and have w >= 0".into(),
            ));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "mixture weights sum to {total}"
            )));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(f64, KrausSet)] {
        &self.components
    }

    /// Worst deviation of `Σ_j w_j Σ_μ (R†R + T†T) = 1` over both `ν`.
    pub fn completeness_deviation(&self) -> f64 {
        let d = self.components[0].1.dim();
        MediatorSpin::BOTH
            .iter()
            .map(|&nu| {
                let mut sum = ComplexMatrix::zeros(d, d);
                for (w, k) in &self.components {
                    sum += k.completeness_sum(nu).scale(*w);
                }
                deviation_from_identity(&sum)
            })
            .fold(0.0, f64::max)
    }
}

/// A (possibly mixed) single-mediator scattering channel.
pub trait KrausChannel {
    fn spin(&self) -> Spin;

    /// `(weight, Kraus set)` pairs; weights sum to one.
    fn weighted_sets(&self) -> impl Iterator<Item = (f64, &KrausSet)>;
}

impl KrausChannel for KrausSet {
    fn spin(&self) -> Spin {
        KrausSet::spin(self)
    }

    fn weighted_sets(&self) -> impl Iterator<Item = (f64, &KrausSet)> {
        core::iter::once((1.0, self))
    }
}

impl KrausChannel for KrausMixture {
    fn spin(&self) -> Spin {
        self.components[0].1.spin()
    }

    fn weighted_sets(&self) -> impl Iterator<Item = (f64, &KrausSet)> {
        self.components.iter().map(|(w, k)| (*w, k))
    }
}

/// Incoherent mixture of incident mediator spins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectronMixture {
    p_up: f64,
    p_down: f64,
}

impl ElectronMixture {
    pub const UP: Self = Self {
        p_up: 1.0,
        p_down: 0.0,
    };
    pub const DOWN: Self = Self {
        p_up: 0.0,
        p_down: 1.0,
    };

    pub fn new(p_up: f64, p_down: f64) -> Result<Self> {
        if !(p_up >= 0.0 && p_down >= 0.0) || (p_up + p_down - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "mediator populations ({p_up}, {p_down}) must be non-negative and sum to 1"
            )));
        }
        Ok(Self { p_up, p_down })
    }

    fn weight(self, spin: MediatorSpin) -> f64 {
        match spin {
            MediatorSpin::Up => self.p_up,
            MediatorSpin::Down => self.p_down,
        }
    }
}

fn check_dim(channel: &impl KrausChannel, rho: &DensityMatrix) -> Result<()> {
    let expected = channel.spin().pair_dim();
    if rho.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: rho.dim(),
        });
    }
    Ok(())
}

fn sandwich(k: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    k * rho * k.adjoint()
}

/// Unnormalized `Σ_j w_j (R ρ R† + T ρ T†)` for one `(ν, μ)` pair.
fn conditional_numerator(
    channel: &impl KrausChannel,
    incident: MediatorSpin,
    out: MediatorSpin,
    rho: &ComplexMatrix,
) -> ComplexMatrix {
    let d = rho.nrows();
    let mut acc = ComplexMatrix::zeros(d, d);
    for (w, k) in channel.weighted_sets() {
        acc += (sandwich(k.reflected(out, incident), rho)
            + sandwich(k.transmitted(out, incident), rho))
        .scale(w);
    }
    acc
}

/// `E_{ρ_e}(ρ) = Σ_{μ,ν} ρ_e,νν (R^μ_ν ρ R^μ†_ν + T^μ_ν ρ T^μ†_ν)`.
pub fn apply_unconditioned(
    channel: &impl KrausChannel,
    mediator: ElectronMixture,
    rho: &DensityMatrix,
) -> Result<DensityMatrix> {
    check_dim(channel, rho)?;
    let d = rho.dim();
    let mut out = ComplexMatrix::zeros(d, d);
    for nu in MediatorSpin::BOTH {
        let p = mediator.weight(nu);
        if p == 0.0 {
            continue;
        }
        for mu in MediatorSpin::BOTH {
            out += conditional_numerator(channel, nu, mu, rho.matrix()).scale(p);
        }
    }
    Ok(DensityMatrix::from_positive_unchecked(&out, 1.0))
}

/// Result of one post-selected scattering event.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOutcome {
    pub state: DensityMatrix,
    pub probability: f64,
}

/// Post-selects the outgoing mediator in `out` given incident `incident`.
pub fn apply_conditional(
    channel: &impl KrausChannel,
    incident: MediatorSpin,
    out: MediatorSpin,
    rho: &DensityMatrix,
) -> Result<ChannelOutcome> {
    check_dim(channel, rho)?;
    let numerator = conditional_numerator(channel, incident, out, rho.matrix());
    let probability = numerator.trace().re;
    if probability.is_nan() || probability < VANISHING_PROBABILITY {
        return Err(Error::VanishingProbability { probability });
    }
    Ok(ChannelOutcome {
        state: DensityMatrix::from_positive_unchecked(&numerator, probability),
        probability,
    })
}

/// Which mediator outcome is kept at every step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PostSelection {
    /// Inject `↑`, keep `↑`.
    #[default]
    Up,
    /// Inject `↓`, keep `↓`.
    Down,
    /// Inject `↑`, keep everything (unconditioned map).
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub n: usize,
    pub state: DensityMatrix,
    pub fidelity: f64,
    /// `P^{(n)} = Π_{j ≤ n} P(ρ^{(j−1)})`.
    pub cumulative_probability: f64,
    /// Probability of the `n`-th post-selection (1 for `n = 0`).
    pub step_probability: f64,
    pub log_negativity: f64,
    pub purity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    records: Vec<TrajectoryRecord>,
    truncated: bool,
}

impl Trajectory {
    pub fn records(&self) -> &[TrajectoryRecord] {
        &self.records
    }

    pub fn last(&self) -> &TrajectoryRecord {
        self.records
            .last()
            .expect("trajectory holds the initial record")
    }

    /// `true` if a post-selection branch vanished before `n` steps.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// First `n` with fidelity strictly above `threshold`.
    pub fn first_above(&self, threshold: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.fidelity > threshold)
            .map(|r| r.n)
    }

    /// [`Self::first_above`], falling back to the earliest step of maximal
    /// fidelity when the threshold is never crossed.
    pub fn evaluation_step(&self, threshold: f64) -> usize {
        self.first_above(threshold).unwrap_or_else(|| {
            let mut best = &self.records[0];
            for r in &self.records[1..] {
                if r.fidelity > best.fidelity {
                    best = r;
                }
            }
            best.n
        })
    }
}

fn record(
    n: usize,
    state: DensityMatrix,
    target: &StateVector,
    spin: Spin,
    cumulative: f64,
    step: f64,
) -> Result<TrajectoryRecord> {
    Ok(TrajectoryRecord {
        n,
        fidelity: fidelity_to_pure(&state, target)?,
        log_negativity: log_negativity(&state, spin)?,
        purity: purity(&state),
        cumulative_probability: cumulative,
        step_probability: step,
        state,
    })
}

/// Runs `n` protocol steps with the given post-selection rule.
pub fn iterate_with(
    channel: &impl KrausChannel,
    rho0: &DensityMatrix,
    n: usize,
    target: &StateVector,
    post_selection: PostSelection,
) -> Result<Trajectory> {
    check_dim(channel, rho0)?;
    let spin = channel.spin();
    let mut records = Vec::with_capacity(n + 1);
    records.push(record(0, rho0.clone(), target, spin, 1.0, 1.0)?);
    let mut truncated = false;
    for step in 1..=n {
        let previous = records.last().expect("non-empty");
        let outcome = match post_selection {
            PostSelection::Up => {
                apply_conditional(channel, MediatorSpin::Up, MediatorSpin::Up, &previous.state)
            }
            PostSelection::Down => apply_conditional(
                channel,
                MediatorSpin::Down,
                MediatorSpin::Down,
                &previous.state,
            ),
            PostSelection::None => {
                apply_unconditioned(channel, ElectronMixture::UP, &previous.state).map(|state| {
                    ChannelOutcome {
                        state,
                        probability: 1.0,
                    }
                })
            }
        };
        let outcome = match outcome {
            Ok(o) => o,
            Err(Error::VanishingProbability { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let cumulative = previous.cumulative_probability * outcome.probability;
        records.push(record(
            step,
            outcome.state,
            target,
            spin,
            cumulative,
            outcome.probability,
        )?);
    }
    Ok(Trajectory { records, truncated })
}

/// `n` steps of the `↑`-in/`↑`-out protocol, `ρ^{(n)} = E_{↑↑}^n(ρ₀)`.
pub fn iterate_protocol(
    channel: &impl KrausChannel,
    rho0: &DensityMatrix,
    n: usize,
    target: &StateVector,
) -> Result<Trajectory> {
    iterate_with(channel, rho0, n, target, PostSelection::Up)
}

/// Default quadrature size for [`gaussian_k_kraus`].
pub const DEFAULT_GAUSSIAN_NODES: usize = 31;

/// Channel for mediators with wavevectors drawn from a Gaussian of relative
/// width `sigma_over_k` around the configured `k`.
///
/// Uses a uniform grid over `±3σ` with normalized Gaussian weights. At each
/// node `k x₀` scales with `k`. With quadratic dispersion `J/v ∝ 1/k` as
/// well.
pub fn gaussian_k_kraus(
    config: &ModelConfig,
    sigma_over_k: f64,
    nodes: usize,
) -> Result<KrausMixture> {
    if !(sigma_over_k > 0.0 && sigma_over_k < 0.2) {
        return Err(Error::InvalidConfig(format!(
            "sigma/k = {sigma_over_k} must lie in (0, 0.2)"
        )));
    }
    if nodes < 3 || nodes.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!(
            "node count {nodes} must be odd and >= 3"
        )));
    }
    let z_nodes = (0..nodes).map(|j| -3.0 + 6.0 * j as f64 / (nodes - 1) as f64);
    let raw: Vec<(f64, f64)> = z_nodes.map(|z| (z, (-0.5 * z * z).exp())).collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    let mut components = Vec::with_capacity(nodes);
    for (z, w) in raw {
        let ratio = 1.0 + sigma_over_k * z;
        let node = match config.dispersion() {
            Dispersion::Quadratic => config.scaled_coupling(1.0 / ratio),
            Dispersion::Linear => config.clone(),
        }
        .with_kx0_over_pi(config.kx0_over_pi() * ratio)?;
        components.push((w / total, sharp_kraus(&node)?));
    }
    KrausMixture::new(components)
}

/// `p_{s₁₂} = ‖R^↓_↑ ψ‖² + ‖T^↓_↑ ψ‖²` for `ψ = |s, s, s₁₂, 0⟩`.
pub fn flip_probability(kraus: &KrausSet, basis: &CoupledBasis, s12: HalfInteger) -> Result<f64> {
    if basis.spin != kraus.spin() {
        return Err(Error::DimensionMismatch {
            expected: kraus.dim(),
            found: basis.spin.pair_dim(),
        });
    }
    if !kraus.config().is_resonant() {
        log::warn!(
            "flip probability requested off resonance (kx0/pi = {})",
            kraus.config().kx0_over_pi()
        );
    }
    let psi = basis.state(s12, HalfInteger::from_int(0))?;
    let a = psi.amplitudes();
    let r = kraus.reflected(MediatorSpin::Down, MediatorSpin::Up) * a;
    let t = kraus.transmitted(MediatorSpin::Down, MediatorSpin::Up) * a;
    Ok(r.norm_squared() + t.norm_squared())
}

/// Largest entry of the off-diagonal Kraus blocks, a quick check that a set
/// reduces to the identity channel.
pub fn spin_flip_weight(kraus: &KrausSet) -> f64 {
    max_abs(kraus.reflected(MediatorSpin::Down, MediatorSpin::Up))
        .max(max_abs(
            kraus.transmitted(MediatorSpin::Down, MediatorSpin::Up),
        ))
        .max(max_abs(
            kraus.reflected(MediatorSpin::Up, MediatorSpin::Down),
        ))
        .max(max_abs(
            kraus.transmitted(MediatorSpin::Up, MediatorSpin::Down),
        ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs_diff};
    use crate::spin::{coupled_basis, singlet_state};
    use crate::state::product_state;

    fn spin(t: i32) -> Spin {
        Spin::from_twice(t).unwrap()
    }

    fn kraus(t: i32, g: f64, kx: f64) -> KrausSet {
        sharp_kraus(&ModelConfig::heisenberg(spin(t), g, kx).unwrap()).unwrap()
    }

    #[test]
    fn free_channel_is_identity() {
        let k = kraus(2, 0.0, 1.0);
        use MediatorSpin::{Down, Up};
        assert!(max_abs_diff(k.transmitted(Up, Up), &identity(9)) < 1e-15);
        assert!(max_abs_diff(k.transmitted(Down, Down), &identity(9)) < 1e-15);
        assert_eq!(spin_flip_weight(&k), 0.0);
        assert_eq!(max_abs(k.reflected(Up, Up)), 0.0);
        let rho = DensityMatrix::from_pure(&product_state(spin(2), 1.0, 0.0).unwrap());
        let out = apply_unconditioned(&k, ElectronMixture::new(0.3, 0.7).unwrap(), &rho).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn completeness_and_shift_rule() {
        let k = kraus(3, 1.1, 1.0);
        assert!(k.completeness_deviation() < 1e-10);
        assert!(k.shift_rule_violation() < 1e-12);
        let off = kraus(2, 0.7, 0.37);
        assert!(off.shift_rule_violation() < 1e-12);
    }

    #[test]
    fn invalid_mixture_rejected() {
        assert!(ElectronMixture::new(0.5, 0.6).is_err());
        assert!(ElectronMixture::new(-0.1, 1.1).is_err());
        assert!(ElectronMixture::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn extract_rejects_non_unitary_operators() {
        let cfg = ModelConfig::heisenberg(spin(1), 1.0, 1.0).unwrap();
        let mut ops = solve_two_impurity(&cfg).unwrap();
        ops.transmission[(0, 0)] *= 1.01;
        assert!(matches!(
            extract_kraus(&ops),
            Err(Error::InvariantViolation { .. })
        ));
    }

    #[test]
    fn singlet_is_fixed_point_at_resonance() {
        for t in 1..=4 {
            let k = kraus(t, 1.3, 1.0);
            let singlet = singlet_state(spin(t));
            let rho = DensityMatrix::from_pure(&singlet);
            let out = apply_conditional(&k, MediatorSpin::Up, MediatorSpin::Up, &rho).unwrap();
            assert!((out.probability - 1.0).abs() < 1e-10);
            assert!(max_abs_diff(out.state.matrix(), rho.matrix()) < 1e-10);
        }
    }

    #[test]
    fn unconditioned_map_on_coupled_states_at_resonance() {
        // |s,s,s12,0⟩ → p |s12,1⟩⟨s12,1| + (1 − p) |s12,0⟩⟨s12,0| for ↑ mediators
        let s = spin(2);
        let k = kraus(2, 1.2, 1.0);
        let cb = coupled_basis(s);
        for s12 in cb.total_spins() {
            let psi0 = cb.state(s12, HalfInteger::from_int(0)).unwrap();
            let rho = DensityMatrix::from_pure(&psi0);
            let out = apply_unconditioned(&k, ElectronMixture::UP, &rho).unwrap();
            let p = flip_probability(&k, &cb, s12).unwrap();
            let mut expected = rho.matrix().scale(1.0 - p);
            if s12.twice() > 0 {
                let up = cb.state(s12, HalfInteger::from_int(1)).unwrap();
                expected += DensityMatrix::from_pure(&up).matrix().scale(p);
            }
            assert!(max_abs_diff(out.matrix(), &expected) < 1e-10, "s12 = {s12}");
            assert!((0.0..=1.0).contains(&p));
        }
        assert!(flip_probability(&k, &cb, HalfInteger::from_int(0)).unwrap() < 1e-12);
    }

    #[test]
    fn outcome_probabilities_sum_to_one() {
        let k = kraus(3, 0.9, 1.3);
        let rho = DensityMatrix::from_pure(&product_state(spin(3), 0.5, -1.5).unwrap());
        for nu in MediatorSpin::BOTH {
            let total: f64 = MediatorSpin::BOTH
                .iter()
                .map(|&mu| {
                    apply_conditional(&k, nu, mu, &rho)
                        .map(|o| o.probability)
                        .unwrap_or(0.0)
                })
                .sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn first_step_probability_matches_amplitude_sum() {
        // s = 1/2, J/v = 1.5, kx0 = π, ρ₀ = |↑↓⟩: sum |amplitude|² over every
        // outgoing ↑ channel, reflected and transmitted separately.
        let cfg = ModelConfig::heisenberg(spin(1), 1.5, 1.0).unwrap();
        let ops = solve_two_impurity(&cfg).unwrap();
        let k = extract_kraus(&ops).unwrap();
        let incoming = 1; // |↑⟩_e |↑↓⟩
        let mut brute = 0.0;
        for out in 0..4 {
            brute += ops.reflection[(out, incoming)].norm_sqr()
                + ops.transmission[(out, incoming)].norm_sqr();
        }
        let rho = DensityMatrix::from_pure(&product_state(spin(1), 0.5, -0.5).unwrap());
        let p = apply_conditional(&k, MediatorSpin::Up, MediatorSpin::Up, &rho)
            .unwrap()
            .probability;
        assert!((p - brute).abs() < 1e-14);
    }

    #[test]
    fn evaluation_step_falls_back_to_best_fidelity() {
        let k = kraus(1, 1.5, 1.0);
        let rho = DensityMatrix::from_pure(&product_state(spin(1), 0.5, -0.5).unwrap());
        let traj = iterate_protocol(&k, &rho, 10, &singlet_state(spin(1))).unwrap();
        let n = traj.evaluation_step(0.95);
        assert_eq!(Some(n), traj.first_above(0.95));
        assert!(traj.records()[n].fidelity > 0.95);
        let best = traj.evaluation_step(2.0);
        assert!(traj
            .records()
            .iter()
            .all(|r| r.fidelity <= traj.records()[best].fidelity));
    }

    #[test]
    fn zero_initial_steps() {
        let k = kraus(1, 1.5, 1.0);
        let rho = DensityMatrix::from_pure(&product_state(spin(1), 0.5, -0.5).unwrap());
        let traj = iterate_protocol(&k, &rho, 0, &singlet_state(spin(1))).unwrap();
        assert_eq!(traj.records().len(), 1);
        assert_eq!(traj.records()[0].cumulative_probability, 1.0);
        assert!((traj.records()[0].fidelity - 0.5).abs() < 1e-15);
    }

    #[test]
    fn vanishing_branch_truncates() {
        // A free channel never flips the mediator.
        let k = kraus(1, 0.0, 1.0);
        let rho = DensityMatrix::from_pure(&product_state(spin(1), 0.5, 0.5).unwrap());
        let err = apply_conditional(&k, MediatorSpin::Up, MediatorSpin::Down, &rho).unwrap_err();
        assert!(matches!(err, Error::VanishingProbability { .. }));

        // A channel that always flips the mediator truncates at the first step.
        let z = ComplexMatrix::zeros(4, 4);
        let flipper = KrausSet {
            reflected: [[z.clone(), z.clone()], [z.clone(), z.clone()]],
            transmitted: [[z.clone(), identity(4)], [identity(4), z.clone()]],
            config: k.config().clone(),
        };
        assert!(flipper.completeness_deviation() < 1e-15);
        let traj = iterate_with(
            &flipper,
            &rho,
            3,
            &singlet_state(spin(1)),
            PostSelection::Up,
        )
        .unwrap();
        assert!(traj.truncated());
        assert_eq!(traj.records().len(), 1);
        let kept = iterate_with(&k, &rho, 3, &singlet_state(spin(1)), PostSelection::Down).unwrap();
        assert!(!kept.truncated());
        assert_eq!(kept.records().len(), 4);
    }

    #[test]
    fn gaussian_argument_validation() {
        let cfg = ModelConfig::heisenberg(spin(1), 1.5, 1.0).unwrap();
        assert!(gaussian_k_kraus(&cfg, 0.0, 31).is_err());
        assert!(gaussian_k_kraus(&cfg, 0.25, 31).is_err());
        assert!(gaussian_k_kraus(&cfg, 0.05, 4).is_err());
        assert!(gaussian_k_kraus(&cfg, 0.05, 1).is_err());
    }

    #[test]
    fn gaussian_mixture_completeness() {
        let cfg = ModelConfig::heisenberg(spin(2), 1.2, 0.95).unwrap();
        let mix = gaussian_k_kraus(&cfg, 0.05, 11).unwrap();
        assert!(mix.completeness_deviation() < 1e-10);
        let total: f64 = mix.components().iter().map(|(w, _)| w).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn narrow_gaussian_reproduces_sharp_channel() {
        let cfg = ModelConfig::heisenberg(spin(1), 1.5, 1.0).unwrap();
        let sharp = sharp_kraus(&cfg).unwrap();
        let mix = gaussian_k_kraus(&cfg, 1e-12, 31).unwrap();
        let rho = DensityMatrix::from_pure(&product_state(spin(1), 0.5, -0.5).unwrap());
        let a = apply_conditional(&sharp, MediatorSpin::Up, MediatorSpin::Up, &rho).unwrap();
        let b = apply_conditional(&mix, MediatorSpin::Up, MediatorSpin::Up, &rho).unwrap();
        assert!((a.probability - b.probability).abs() < 1e-10);
        assert!(max_abs_diff(a.state.matrix(), b.state.matrix()) < 1e-10);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let k = kraus(2, 1.0, 1.0);
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(matches!(
            iterate_protocol(&k, &rho, 3, &singlet_state(spin(1))),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
