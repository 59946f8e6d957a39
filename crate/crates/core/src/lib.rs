//! Unambiguous state discrimination through lossy evolution.
//!
//! A passive, invertible operator `K` (a single Kraus operator) followed by a
//! projective measurement produces exactly the statistics of a USD POVM
//! `{F_1..F_N, F_{N+1}}` with `F_i = K†Π_iK` and `F_{N+1} = I − K†K`. This
//! crate builds either side from the other, validates the operator
//! properties involved, and computes or samples the resulting measurement
//! statistics.
//!
//! Modules:
//! - [`linalg`]: dense complex matrix kernel (Jacobi eigensolver, inverse,
//!   matrix exponential, PSD square root, Gram-Schmidt).
//! - [`duality`]: state sets, bi-orthogonal duals, USD POVM construction.
//! - [`equivalence`]: POVM ↔ lossy evolution maps, passiveness, dilation.
//! - [`discrimination`]: ensembles, analytic reports, Monte Carlo sampling.
//! - [`scenarios`]: the beam-splitter/attenuator and three-waveguide setups.

pub mod discrimination;
pub mod duality;
pub mod equivalence;
pub mod linalg;
pub mod scenarios;

#[cfg(test)]
pub(crate) mod test_util;

pub use discrimination::{
    density_matrix, post_measurement_state, report_from_evolution, sample_outcomes, usd_report, DiscriminationError,
    DiscriminationReport, OutcomeStats, RandomSource, StateEnsemble,
};
pub use duality::{
    build_usd_povm, dual_set, outcome_probabilities, subspace_reduce, validate_povm, DualSet, DualityError, PovmSet,
    ScalingStrategy, StateSet, ValidationReport,
};
pub use equivalence::{
    dilate_unitary, discriminable_states, dyadic_form, inconclusive_rank, lossy_from_povm, make_lossy,
    normalize_passive, povm_from_lossy, reduced_evolution, EquivalenceError, LossyEvolution, PhaseVector,
    ProjectiveBasis,
};
pub use linalg::{ComplexMatrix, LinalgError, ToleranceContext, C64};
