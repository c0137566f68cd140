//! Named experiments. Presets are constant values that never read the
//! environment.

use singlet_core::prelude::*;

use crate::config::{linspace, CouplingKind, ExperimentSpec, KSpread};

pub const NAMES: [&str; 6] = [
    "fig2ab",
    "fig2c",
    "photonic-nonideal",
    "photonic-ideal",
    "entanglement-s2",
    "robustness",
];

fn spin(twice: i32) -> Spin {
    Spin::from_twice(twice).expect("preset spins are positive")
}

/// `J/v` giving the best plateau for the three lowest spins.
pub fn optimal_jv(s: Spin) -> f64 {
    match s.twice() {
        1 => 1.5,
        2 => 1.2,
        _ => 1.1,
    }
}

fn photonic(label: &str, rates: Option<Vec<f64>>) -> ExperimentSpec {
    let s = spin(3);
    ExperimentSpec {
        coupling: CouplingKind::Xy,
        rates,
        ..ExperimentSpec::heisenberg(label, s, 1.0, 14)
    }
}

pub fn preset(name: &str) -> Option<Vec<ExperimentSpec>> {
    let specs = match name {
        "fig2ab" => vec![ExperimentSpec {
            jv: linspace(0.2, 3.0, 29),
            ..ExperimentSpec::heisenberg("fig2ab", spin(1), 1.5, 14)
        }],
        "fig2c" => (1..=3)
            .map(|t| {
                let s = spin(t);
                ExperimentSpec::heisenberg(&format!("fig2c-s{s}"), s, optimal_jv(s), 50)
            })
            .collect(),
        "photonic-nonideal" => {
            let r3 = 3f64.sqrt();
            vec![photonic("photonic-nonideal", Some(vec![r3, 4.0 * r3, r3]))]
        }
        "photonic-ideal" => vec![photonic("photonic-ideal", None)],
        "entanglement-s2" => vec![ExperimentSpec::heisenberg(
            "entanglement-s2",
            spin(4),
            1.0,
            8,
        )],
        "robustness" => vec![ExperimentSpec {
            kx0_over_pi: vec![0.90, 0.95, 1.00, 1.03],
            k_spread: Some(KSpread {
                sigma_over_k: 0.05,
                nodes: DEFAULT_GAUSSIAN_NODES,
            }),
            ..ExperimentSpec::heisenberg("robustness", spin(1), 1.5, 14)
        }],
        _ => return None,
    };
    Some(specs)
}
