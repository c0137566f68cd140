//! Randomized checks of the scattering channel and the post-selected protocol.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use singlet_core::linalg::{hermitian_eigenvalues, max_abs_diff, ComplexVector};
use singlet_core::prelude::*;

fn spin(twice: i32) -> Spin {
    Spin::from_twice(twice).unwrap()
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn random_density(dim: usize, rng: &mut impl Rng) -> DensityMatrix {
    let a = ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(gaussian(rng), gaussian(rng))
    });
    let m = &a * a.adjoint();
    let tr = m.trace();
    DensityMatrix::new(m.unscale(tr.re)).unwrap()
}

/// Random pure state supported on the `m₁₂ = 0` sector.
fn random_zero_sector_state(s: Spin, rng: &mut impl Rng) -> StateVector {
    let n = s.dim();
    let mut v = ComplexVector::zeros(n * n);
    for i in 0..n {
        v[i * n + (n - 1 - i)] = Complex64::new(gaussian(rng), gaussian(rng));
    }
    StateVector::normalized(v).unwrap()
}

fn fig2c(twice: i32) -> ModelConfig {
    let g = match twice {
        1 => 1.5,
        2 => 1.2,
        _ => 1.1,
    };
    ModelConfig::heisenberg(spin(twice), g, 1.0).unwrap()
}

#[test]
fn unconditioned_map_is_trace_and_positivity_preserving() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let configs = [
        ModelConfig::heisenberg(spin(1), 1.5, 1.0).unwrap(),
        ModelConfig::heisenberg(spin(3), 0.8, 0.37).unwrap(),
        ModelConfig::photonic(spin(3), RatePattern::Ideal, 1.0, 1.0).unwrap(),
    ];
    for cfg in &configs {
        let k = sharp_kraus(cfg).unwrap();
        let d = cfg.spin().pair_dim();
        for _ in 0..100 {
            let rho = random_density(d, &mut rng);
            let p_up = rng.random::<f64>();
            let out =
                apply_unconditioned(&k, ElectronMixture::new(p_up, 1.0 - p_up).unwrap(), &rho)
                    .unwrap();
            assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
            assert!(out.min_eigenvalue() >= -1e-10);
        }
    }
}

#[test]
fn gaussian_mixture_preserves_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = ModelConfig::heisenberg(spin(2), 1.2, 0.95).unwrap();
    let mix = gaussian_k_kraus(&cfg, 0.05, 31).unwrap();
    assert!(mix.completeness_deviation() < 1e-10);
    for _ in 0..20 {
        let rho = random_density(9, &mut rng);
        let out = apply_unconditioned(&mix, ElectronMixture::UP, &rho).unwrap();
        assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(out.min_eigenvalue() >= -1e-10);
    }
}

#[test]
fn coupled_state_survival_decays_geometrically() {
    for twice in 1..=3 {
        let cfg = fig2c(twice);
        let k = sharp_kraus(&cfg).unwrap();
        let cb = coupled_basis(cfg.spin());
        for s12 in cb.total_spins() {
            let psi = cb.state(s12, HalfInteger::from_int(0)).unwrap();
            let p = flip_probability(&k, &cb, s12).unwrap();
            let traj = iterate_protocol(&k, &DensityMatrix::from_pure(&psi), 12, &psi).unwrap();
            for rec in traj.records() {
                let expected = (1.0 - p).powi(rec.n as i32);
                assert!(
                    (rec.cumulative_probability - expected).abs() < 1e-12,
                    "s12 = {s12}, n = {}",
                    rec.n
                );
                assert!((rec.fidelity - 1.0).abs() < 1e-10);
            }
            if s12.twice() == 0 {
                assert!(p < 1e-12);
            } else {
                assert!(p > 0.0);
            }
        }
    }
}

#[test]
fn asymptotic_projection_onto_singlet() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for twice in 1..=3 {
        let cfg = fig2c(twice);
        let k = sharp_kraus(&cfg).unwrap();
        let singlet = singlet_state(cfg.spin());
        for _ in 0..2 {
            let xi = random_zero_sector_state(cfg.spin(), &mut rng);
            let overlap = singlet.amplitudes().dotc(xi.amplitudes()).norm_sqr();
            let traj = iterate_protocol(&k, &DensityMatrix::from_pure(&xi), 100, &singlet).unwrap();
            let last = traj.last();
            assert!((last.cumulative_probability - overlap).abs() < 1e-3);
            assert!(last.fidelity > 1.0 - 1e-6);
        }
    }
}

#[test]
fn metrics_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for twice in 1..=4 {
        let s = spin(twice);
        let d = s.pair_dim();
        let bound = (s.dim() as f64).log2();
        let singlet = singlet_state(s);
        for _ in 0..20 {
            let rho = random_density(d, &mut rng);
            let ln = log_negativity(&rho, s).unwrap();
            assert!((0.0..=bound + 1e-12).contains(&ln));
            let pt = partial_transpose(rho.matrix(), s).unwrap();
            assert!((pt.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            let eig = hermitian_eigenvalues(&pt);
            assert!(eig.iter().sum::<f64>() - 1.0 < 1e-12);
            let f = fidelity_to_pure(&rho, &singlet).unwrap();
            assert!((-1e-15..=1.0 + 1e-12).contains(&f));
            let p = purity(&rho);
            assert!(p >= 1.0 / d as f64 - 1e-12 && p <= 1.0 + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sequential_composition(twice in 1..=3i32, g in 0.3..2.5f64, kx in 0.2..2.0f64, a in 0usize..6, b in 0usize..6, seed in any::<u64>()) {
        let cfg = ModelConfig::heisenberg(spin(twice), g, kx).unwrap();
        let k = sharp_kraus(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(cfg.spin().pair_dim(), &mut rng);
        let target = singlet_state(cfg.spin());
        let whole = iterate_protocol(&k, &rho, a + b, &target).unwrap();
        let first = iterate_protocol(&k, &rho, a, &target).unwrap();
        let second = iterate_protocol(&k, &first.last().state, b, &target).unwrap();
        let w = whole.last();
        let s = second.last();
        prop_assert!(max_abs_diff(w.state.matrix(), s.state.matrix()) < 1e-12);
        let product = first.last().cumulative_probability * s.cumulative_probability;
        prop_assert!((w.cumulative_probability - product).abs() < 1e-12);
        for pair in whole.records().windows(2) {
            prop_assert!(pair[1].cumulative_probability <= pair[0].cumulative_probability + 1e-15);
        }
    }

    #[test]
    fn outcome_probabilities_complete(twice in 1..=3i32, g in 0.1..3.0f64, kx in 0.1..4.0f64, seed in any::<u64>()) {
        let cfg = ModelConfig::heisenberg(spin(twice), g, kx).unwrap();
        let k = sharp_kraus(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(cfg.spin().pair_dim(), &mut rng);
        for nu in MediatorSpin::BOTH {
            let total: f64 = MediatorSpin::BOTH.iter()
                .map(|&mu| apply_conditional(&k, nu, mu, &rho).map(|o| o.probability).unwrap_or(0.0))
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn singlet_fixed_point_across_spins() {
    for twice in 1..=4 {
        for m in 1..=3 {
            let cfg = ModelConfig::heisenberg(spin(twice), 0.9, f64::from(m)).unwrap();
            let k = sharp_kraus(&cfg).unwrap();
            let singlet = DensityMatrix::from_pure(&singlet_state(cfg.spin()));
            let out = apply_conditional(&k, MediatorSpin::Up, MediatorSpin::Up, &singlet).unwrap();
            assert!((out.probability - 1.0).abs() < 1e-10);
            assert!(max_abs_diff(out.state.matrix(), singlet.matrix()) < 1e-10);
        }
    }
}
