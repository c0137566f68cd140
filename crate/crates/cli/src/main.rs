use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use singlet_core::prelude::Spin;
use singlet_sim::config::{self, CouplingKind, ExperimentSpec, InitialState, Overrides};
use singlet_sim::runner::PointFailure;
use singlet_sim::{presets, render, run_all, ConfigError, Format};

/// Simulate singlet extraction between two spin-s impurities by repeated
/// mediator scattering and post-selection.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    /// Named experiment; see --list-presets.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// TOML file with one or more [[experiment]] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    /// List preset names and exit.
    #[arg(long)]
    list_presets: bool,

    /// Impurity spin, e.g. `1/2`, `3/2`, `2`.
    #[arg(long)]
    spin: Option<Spin>,
    /// `heisenberg` (electron) or `xy` (photon).
    #[arg(long)]
    coupling: Option<CouplingKind>,
    /// XY rates J_{s,m}/v from m = -s upward, or `ideal`.
    #[arg(long)]
    rates: Option<String>,
    /// J/v: a value, a list `a,b` or `start:stop:count`.
    #[arg(long)]
    jv: Option<String>,
    /// k x0 / pi: a value, a list or `start:stop:count`.
    #[arg(long)]
    kx0_over_pi: Option<String>,
    /// Number of protocol steps.
    #[arg(long)]
    n: Option<usize>,
    /// `product:m1,m2`, `coupled:s12,m12`, `singlet` or `custom:re,im;...`.
    #[arg(long)]
    initial: Option<InitialState>,
    /// `up`, `down` or `none`.
    #[arg(long, value_parser = config::parse_post_selection)]
    post_select: Option<singlet_core::prelude::PostSelection>,
    /// Relative Gaussian wavevector spread.
    #[arg(long)]
    sigma_over_k: Option<f64>,
    /// Quadrature nodes for the wavevector spread (odd).
    #[arg(long)]
    nodes: Option<usize>,
    /// `spin-half` (default) or `pauli`.
    #[arg(long, value_parser = config::parse_convention)]
    convention: Option<singlet_core::prelude::SpinConvention>,

    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct FailureSummary<'a> {
    status: &'static str,
    rows_written: usize,
    failures: &'a [PointFailure],
}

fn usage_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn specs(args: &Args) -> Result<Vec<ExperimentSpec>, ConfigError> {
    let mut specs = if let Some(name) = &args.preset {
        presets::preset(name).ok_or_else(|| {
            ConfigError::new(
                "--preset",
                format!(
                    "unknown preset `{name}`; available: {}",
                    presets::NAMES.join(", ")
                ),
            )
        })?
    } else if let Some(path) = &args.config {
        config::load_config(path)?
    } else {
        let spin = args
            .spin
            .unwrap_or(Spin::from_twice(1).expect("1/2 is a valid spin"));
        vec![ExperimentSpec::heisenberg(
            "cli",
            spin,
            presets::optimal_jv(spin),
            14,
        )]
    };
    let flag = |name: &str, value: &Option<String>, parse: fn(&str) -> Result<Vec<f64>, String>| {
        value
            .as_deref()
            .map(parse)
            .transpose()
            .map_err(|e| ConfigError::new(name, e))
    };
    let rates = args
        .rates
        .as_deref()
        .map(config::parse_rates)
        .transpose()
        .map_err(|e| ConfigError::new("--rates", e))?;
    let overrides = Overrides {
        spin: args.spin,
        coupling: args.coupling,
        rates,
        jv: flag("--jv", &args.jv, config::parse_axis)?,
        kx0_over_pi: flag("--kx0-over-pi", &args.kx0_over_pi, config::parse_axis)?,
        n_max: args.n,
        initial: args.initial.clone(),
        post_select: args.post_select,
        sigma_over_k: args.sigma_over_k,
        nodes: args.nodes,
        convention: args.convention,
    };
    for spec in &mut specs {
        overrides.apply(spec)?;
    }
    Ok(specs)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    if args.list_presets {
        for name in presets::NAMES {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    let specs = match specs(&args) {
        Ok(s) => s,
        Err(e) => return usage_error(e),
    };
    for spec in &specs {
        log::info!(
            "running {} over {} grid points",
            spec.label,
            spec.grid().len()
        );
    }
    let report = run_all(&specs);
    let text = match render(&report.rows, args.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let written = match &args.out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| format!("writing {}: {e}", path.display()))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| format!("stdout: {e}")),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    if report.is_success() {
        ExitCode::SUCCESS
    } else {
        let summary = FailureSummary {
            status: "failed",
            rows_written: report.rows.len(),
            failures: &report.failures,
        };
        eprintln!(
            "{}",
            serde_json::to_string(&summary).expect("summary serializes")
        );
        ExitCode::FAILURE
    }
}
