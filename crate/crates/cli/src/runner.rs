//! Grid evaluation. Points run in parallel; results come back in grid order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use singlet_core::prelude::*;

use crate::config::{convention_name, ExperimentSpec, KSpread};

/// Fidelity threshold used to pick the robustness evaluation step.
pub const EVALUATION_THRESHOLD: f64 = 0.95;

const UNITARITY_TOL: f64 = 1e-10;
const SHIFT_RULE_TOL: f64 = 1e-12;

/// One `(grid point, n)` sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub label: String,
    pub spin: String,
    pub coupling: String,
    pub convention: String,
    pub jv: f64,
    pub kx0_over_pi: f64,
    pub sigma_over_k: Option<f64>,
    pub n: usize,
    pub fidelity: f64,
    pub cumulative_probability: f64,
    pub step_probability: f64,
    pub log_negativity: f64,
    pub purity: f64,
}

/// A grid point that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub label: String,
    pub jv: f64,
    pub kx0_over_pi: f64,
    pub config: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<PointFailure>,
}

impl RunReport {
    pub fn is_success(&self) -> bool {
        self.failures.is_empty()
    }
}

fn check_set(kraus: &KrausSet) -> Result<()> {
    let completeness = kraus.completeness_deviation();
    if completeness > UNITARITY_TOL {
        return Err(Error::InvariantViolation {
            what: "Kraus completeness",
            deviation: completeness,
            tolerance: UNITARITY_TOL,
        });
    }
    let shift = kraus.shift_rule_violation();
    if shift > SHIFT_RULE_TOL {
        return Err(Error::InvariantViolation {
            what: "m12 shift rule",
            deviation: shift,
            tolerance: SHIFT_RULE_TOL,
        });
    }
    Ok(())
}

/// Trajectory of one grid point with self-checks applied to every Kraus set.
pub fn point_trajectory(spec: &ExperimentSpec, config: &ModelConfig) -> Result<Trajectory> {
    let rho0 = spec.initial.density(spec.spin)?;
    let target = singlet_state(spec.spin);
    match spec.k_spread {
        None => {
            let kraus = sharp_kraus(config)?;
            check_set(&kraus)?;
            iterate_with(&kraus, &rho0, spec.n_max, &target, spec.post_select)
        }
        Some(KSpread {
            sigma_over_k,
            nodes,
        }) => {
            let mix = gaussian_k_kraus(config, sigma_over_k, nodes)?;
            for (_, k) in mix.components() {
                check_set(k)?;
            }
            let completeness = mix.completeness_deviation();
            if completeness > UNITARITY_TOL {
                return Err(Error::InvariantViolation {
                    what: "mixture completeness",
                    deviation: completeness,
                    tolerance: UNITARITY_TOL,
                });
            }
            iterate_with(&mix, &rho0, spec.n_max, &target, spec.post_select)
        }
    }
}

fn run_point(
    spec: &ExperimentSpec,
    jv: f64,
    kx0: f64,
) -> std::result::Result<Vec<ResultRow>, PointFailure> {
    let fail = |config: String, e: Error| PointFailure {
        label: spec.label.clone(),
        jv,
        kx0_over_pi: kx0,
        config,
        error: e.to_string(),
    };
    let config = spec.model_at(jv, kx0).map_err(|e| fail(String::new(), e))?;
    let traj = point_trajectory(spec, &config).map_err(|e| fail(config.to_string(), e))?;
    if traj.truncated() {
        log::warn!(
            "{}: post-selected branch vanished at J/v={jv}, kx0/pi={kx0}",
            spec.label
        );
    }
    let spin = spec.spin.to_string();
    let coupling = spec.coupling.name().to_owned();
    let convention = convention_name(spec.convention).to_owned();
    Ok(traj
        .records()
        .iter()
        .map(|r| ResultRow {
            label: spec.label.clone(),
            spin: spin.clone(),
            coupling: coupling.clone(),
            convention: convention.clone(),
            jv,
            kx0_over_pi: kx0,
            sigma_over_k: spec.k_spread.map(|k| k.sigma_over_k),
            n: r.n,
            fidelity: r.fidelity,
            cumulative_probability: r.cumulative_probability,
            step_probability: r.step_probability,
            log_negativity: r.log_negativity,
            purity: r.purity,
        })
        .collect())
}

pub fn run_experiment(spec: &ExperimentSpec) -> RunReport {
    let results: Vec<_> = spec
        .grid()
        .into_par_iter()
        .map(|(g, k)| run_point(spec, g, k))
        .collect();
    let mut report = RunReport::default();
    for r in results {
        match r {
            Ok(rows) => report.rows.extend(rows),
            Err(f) => report.failures.push(f),
        }
    }
    report
}

pub fn run_all(specs: &[ExperimentSpec]) -> RunReport {
    let mut report = RunReport::default();
    for spec in specs {
        let r = run_experiment(spec);
        report.rows.extend(r.rows);
        report.failures.extend(r.failures);
    }
    report
}

/// Step at which a broadened-k run is judged: the first `n` where the sharp-k
/// trajectory at the same configuration exceeds [`EVALUATION_THRESHOLD`], or
/// the sharp-k fidelity maximum if it never does.
pub fn evaluation_step(spec: &ExperimentSpec, config: &ModelConfig) -> Result<usize> {
    let sharp = ExperimentSpec {
        k_spread: None,
        ..spec.clone()
    };
    Ok(point_trajectory(&sharp, config)?.evaluation_step(EVALUATION_THRESHOLD))
}
