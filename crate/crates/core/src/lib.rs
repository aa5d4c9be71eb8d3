//! Coherent transport through finite open tight-binding chains.
//!
//! The crate models a chain of `N` sites pumped on the first site and drained
//! through a sink on the last one, subject to dephasing, losses and on-site
//! disorder. It provides
//!
//! * the Lindblad generator and its non-equilibrium steady state ([`liouvillian`]),
//! * transient dynamics, transfer time and efficiency ([`dynamics`]),
//! * closed-form transport estimates ([`analytics`]),
//! * non-Hermitian width spectra and superradiant-transition detection ([`superradiance`]),
//! * the full qubit-chain model with many excitations ([`many_body`]),
//! * Landauer transmission with wide-band leads ([`transport`]),
//! * disorder ensembles and loss scans ([`disorder`]).
//!
//! Units are natural: ħ = 1 and energies and rates are measured in units of
//! the hopping `t` unless a different hopping is set explicitly.

pub mod analytics;
pub mod chain;
pub mod disorder;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod liouvillian;
pub mod many_body;
pub mod superradiance;
pub mod transport;

pub use chain::{build_hamiltonian, build_jump_operators, sample_onsite_disorder, ChainParams, JumpLabel, JumpOperator};
pub use error::{Error, Result};
pub use grid::{GridScale, GridSpec};
pub use liouvillian::{build_liouvillian, ness_current, steady_state, DensityMatrix, SteadyState, Superoperator};
