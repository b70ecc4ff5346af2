//! Unambiguous discrimination of two-photon Bell-like states with passive
//! linear optics.
//!
//! Two dual-rail qubits occupy four optical modes: the first photon lives in
//! modes 1/2, the second in modes 3/4. A lossless network of beam splitters
//! and phase shifters acts on the creation operators through a mode unitary
//! `b†_i = Σ_j U_ij a†_j`, after which photon-number-resolving detectors
//! register one of the `dim·(dim+1)/2` two-photon events.
//!
//! The crate is layered bottom-up:
//!
//! * [`states`] – two-photon states, the Bell-like family, concurrence.
//! * [`optics`] – mode unitaries, beam splitters, the optimal discriminating
//!   network and a triangular mesh parameterization of `U(4)`.
//! * [`detection`] – exact detection probabilities, with an independent
//!   polynomial-expansion oracle.
//! * [`discrimination`] – probability tables, Bayes confidences, unambiguous
//!   events and the success probability.
//! * [`optimizer`] – a multi-start derivative-free search over the mesh that
//!   corroborates the optimal success probabilities numerically.

pub mod detection;
pub mod discrimination;
pub mod optics;
pub mod optimizer;
pub mod states;

mod error;

pub use error::{Error, Result};

pub use detection::{
    brute_force_distribution, event_probability, outcome_distribution, pi_map, DetectionEvent,
    OutcomeDistribution, PiMatrix,
};
pub use discrimination::{
    check_unambiguous_constraints, closed_form_confidences, column_decomposition, confidence,
    confidence_report, probability_table, success_probability, unambiguous_events,
    ClosedFormConfidences, ColumnDecomposition, ConfidenceGroup, ConfidenceReport,
    ConstraintReport, Priors, ProbabilityTable,
};
pub use optics::{
    beam_splitter_unitary, compose, decompose_mesh, mesh_unitary, optimal_discrimination_unitary,
    phase_shifter, two_splitter_network, BeamSplitter, MeshDecomposition, ModeUnitary,
    NetworkParams,
};
pub use optimizer::{
    maximize_success, objective, sweep_families, OptimizationResult, OptimizerConfig, SweepPoint,
};
pub use states::{
    bell_like_states, coefficient_matrix, concurrence, inner_product, BellLikeFamily,
    CoefficientMatrix, TwoPhotonState,
};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Normalization tolerance for states and family parameters.
pub const NORM_TOL: f64 = 1e-12;

/// Maximum entrywise deviation of `U†U` from the identity.
pub const UNITARY_TOL: f64 = 1e-10;

/// Default confidence slack below which an event no longer counts as
/// unambiguous.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Smallest and largest number of output modes handled.
pub const MIN_DIM: usize = 4;
pub const MAX_DIM: usize = 8;
