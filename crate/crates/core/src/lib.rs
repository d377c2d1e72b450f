//! Single-photon emission from a strongly dephasing emitter coupled to a
//! pair of cascaded cavities.
//!
//! The crate evaluates the photon collection efficiency and the
//! Hong-Ou-Mandel indistinguishability both from the full master
//! equation on the single-excitation subspace and from the closed-form
//! rate-equation analytics, and averages them over spectral diffusion.
//! All rates are in units of the emitter radiative decay rate.

// `!(x >= 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlator;
pub mod ensemble;
pub mod error;
pub mod explorer;
pub mod master;
pub mod model;
pub mod numerics;
pub mod rate;

pub use correlator::{indistinguishability, IndistinguishabilityReport, RetardedPropagator};
pub use ensemble::{ensemble_efficiency, ensemble_indistinguishability, DiffusionSpec};
pub use error::{Error, Result};
pub use master::{efficiency, efficiency_exact, efficiency_single_cavity, propagate, PopulationTrace, TimeWindow};
pub use model::{build_hamiltonian, build_liouvillian, DensityState, LiouvillianDecomposition, Mode, SystemParams};
pub use rate::{efficiency_closed, indistinguishability_closed, RateModel};
