//! Simulation of unitary-averaged linear-optical fusion gates and Bell-state
//! measurements.
//!
//! Few-photon Fock states are evolved exactly through passive linear-optical
//! networks described by single-particle transfer matrices. An averaging
//! network encodes each logical mode over `N` replicas with a DFT, runs `N`
//! imperfect copies of a gate in parallel, decodes with a second DFT and
//! post-selects vacuum on the ancilla replicas. On success the surviving modes
//! evolve under the non-unitary mean `M_N = (1/N) Σ_k U_k` of the copies.
//!
//! Module map:
//!
//! - [`fock`]: Fock kets, sparse states, transfer matrices and evolution.
//! - [`interferometry`]: DFT, beam-splitter layers, SWAP, fusion and BSM
//!   matrices, permutations, direct sums and the effective average.
//! - [`network`]: the full `N`-copy averaging circuit and ancilla post-selection.
//! - [`detection`]: detector projections, fusion outcomes and BSM pattern support.
//! - [`metrics`]: Bell states, fidelities and the gate trace distance.
//! - [`closed_form`]: analytic BSM fidelity and success probability.
//! - [`sweep`]: seeded Monte-Carlo trials, aggregation and CSV output.
//! - [`verify`]: oracle suites comparing independent computation routes.

pub mod closed_form;
pub mod detection;
mod error;
pub mod fock;
pub mod interferometry;
pub mod metrics;
pub mod network;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use fock::{FockKet, StateVec, TransferMatrix};
pub use num_complex::Complex64;
