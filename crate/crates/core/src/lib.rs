//! Singlet extraction from two remote spin-`s` impurities by repeated
//! scattering of post-selected mediators.
//!
//! The crate is `no_std` (with `alloc`). It covers the whole numerical
//! pipeline:
//!
//! - [`spin`]: spin-`s` matrices, tensor embeddings, the coupled two-spin
//!   basis, the spin-`s` singlet and the Raman rate factors.
//! - [`scattering`]: stationary scattering of a spin-1/2 mediator off two
//!   delta-coupled impurities, giving operator-valued reflection and
//!   transmission amplitudes. It has two independent oracles: transfer-matrix
//!   composition and the closed-form single-impurity eigenchannel result.
//! - [`channel`]: Kraus operators, the unconditioned and post-selected maps,
//!   iteration of the protocol, Gaussian wavevector averaging and flip
//!   probabilities.
//! - [`metrics`]: fidelity, partial transpose, logarithmic negativity and
//!   purity.
//!
//! All basis orderings are fixed globally. Every factor lists `m` in
//! descending order (`s, s-1, ..., -s`). Joint states are ordered
//! `mediator ⊗ impurity 1 ⊗ impurity 2`, with the mediator index varying
//! slowest.
//!
//! ```
//! use singlet_core::prelude::*;
//!
//! let spin = Spin::from_twice(1).unwrap();
//! let config = ModelConfig::heisenberg(spin, 1.5, 1.0).unwrap();
//! let kraus = extract_kraus(&solve_two_impurity(&config).unwrap()).unwrap();
//! let rho0 = DensityMatrix::from_pure(&product_state(spin, spin.value(), -spin.value()).unwrap());
//! let traj = iterate_protocol(&kraus, &rho0, 8, &singlet_state(spin)).unwrap();
//! assert!(traj.records()[7].fidelity > 0.95);
//! ```

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod scattering;
pub mod spin;
pub mod state;

pub use error::{Error, Result};

/// Glob-importable set of the commonly used items.
pub mod prelude {
    pub use crate::channel::{
        apply_conditional, apply_unconditioned, extract_kraus, flip_probability, gaussian_k_kraus,
        iterate_protocol, iterate_with, sharp_kraus, ChannelOutcome, ElectronMixture, KrausChannel,
        KrausMixture, KrausSet, MediatorSpin, PostSelection, Trajectory, TrajectoryRecord,
        DEFAULT_GAUSSIAN_NODES,
    };
    pub use crate::error::{Error, Result};
    pub use crate::linalg::ComplexMatrix;
    pub use crate::metrics::{
        fidelity_to_pure, log_negativity, partial_transpose, purity, MetricReport,
    };
    pub use crate::scattering::{
        coupling_operator, selection_rule_violation, solve_full_s_matrix,
        solve_single_impurity_closed_form, solve_single_impurity_direct, solve_two_impurity,
        solve_via_transfer_matrices, total_spin_commutator, verify_unitarity, CouplingModel,
        Dispersion, ModelConfig, RatePattern, ScatteringOperators, Site, SpinConvention,
    };
    pub use crate::spin::{
        chi_rate, coupled_basis, embed, make_spin_ops, singlet_state, CoupledBasis, CoupledLabel,
        HalfInteger, Slot, Spin, SpinOperators,
    };
    pub use crate::state::{product_state, DensityMatrix, StateVector};
}
