//! Qudit (D-level) quantum information primitives built around the
//! generalized XOR gate GXOR |i⟩|j⟩ = |i⟩|i⊖j⟩.
//!
//! The crate provides the gate itself and everything it unifies at desk scale
//! with exact dense linear algebra:
//!
//! - the generalized Bell basis and its disentangling Bell measurement,
//! - teleportation of arbitrary D-dimensional states over a shared Bell pair,
//! - the post-selected nonlinear map that raises density-matrix entries to a
//!   power, with a brute-force circuit oracle cross-checking the closed form,
//! - the iterated purification of Werner states with alternating Fourier
//!   twirls,
//! - a basis-image check of the Kerr-plus-phase-conjugation realization.
//!
//! All values are immutable after construction and all operations are pure
//! functions, so everything is safe to share across threads.

pub mod error;
pub mod fourier;
pub mod gates;
pub mod linalg;
pub mod purify;
pub mod ring;
pub mod teleport;

pub use error::{Error, Result};
pub use fourier::{dft_unitary, truncated_dft_unitary};
pub use gates::{
    bell_measurement, bell_measurement_mixed, bell_state, correction_unitary, gxor_add_unitary,
    gxor_unitary, kerr_gxor_images, kerr_gxor_residual, BellLabel, KerrParams,
};
pub use linalg::{
    hermitian_eigenvalues, max_abs_diff, max_abs_diff_vec, CMat, CVec, DensityMatrix, PureState,
    Tolerance, UnitaryOp,
};
pub use purify::{
    map_properties_check, nonlinear_map, nonlinear_map_oracle, purification_step, run_purification,
    run_purification_from, separability_threshold, sweep, twirl, werner_state, MapPropertiesReport,
    PurificationTrace, PurifyConfig, PurifyStepRecord, SweepRow, TwirlKind, DEFAULT_TWIRL_SCHEDULE,
    ORACLE_DIM_GUARD,
};
pub use ring::{mod_add, mod_sub, Dim, Dit, MultiIndex};
pub use teleport::{
    classical_bits, random_pure_state, teleport, teleport_demo, verify_teleport_identity,
    OutcomeChoice, TeleportRecord, TeleportSummary,
};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
