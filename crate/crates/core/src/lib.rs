//! Pretty-good state transfer (PGST) of arbitrary multi-qubit states through
//! uniformly coupled XX spin chains.
//!
//! The crate is split along the computation:
//!
//! * [`spectral`] holds the closed-form single-excitation dynamics of the
//!   chain (eigensystem, transfer amplitudes, propagator, mirror distance).
//! * [`multiexcitation`] lifts single-particle amplitudes to r-excitation
//!   mirror amplitudes through Slater determinants and assembles the
//!   `2^m - 1` transfer conditions.
//! * [`pgst`] classifies chain lengths, searches for the first time all
//!   conditions clear a tolerance, and fits the growth of that time.
//! * [`oracle`] is an independent brute-force path: dense sector
//!   Hamiltonians, exact evolution, reduced output states and fidelities.
//!
//! Units: coupling `J = 1` and `ħ = 1`, so times are in units of `ħ/J`.

pub mod error;
pub mod linalg;
pub mod multiexcitation;
pub mod oracle;
pub mod pgst;
pub mod spectral;

pub use num_complex::Complex64;

pub use error::{PgstError, Result};
pub use multiexcitation::{
    enumerate_configs, min_condition_fidelity, ostrowski_bound, pgst_condition_set,
    slater_amplitude, ConditionEvaluator, ConditionSet, ExcitationConfig, SlaterMatrix,
};
pub use oracle::{
    build_sector, check_sector_size, evolve_sector, fidelity, oracle_transfer_magnitude, rho_out,
    validate_slater, DensityMatrix, InputState, Readout, SectorBasis, SectorHamiltonian,
    ValidationReport,
};
pub use pgst::{
    classify_length, exp_fit, find_t_min, is_prime, sweep_eps, sweep_n, ExpFit, GridParams,
    LengthClass, LengthClause, PgstQuery, SweepRow, TminResult,
};
pub use spectral::{
    amplitude, eigensystem, mirror_distance, mirror_fidelities, propagator, ChainSpec, Eigensystem,
    MirrorDistance, Propagator,
};
