//! Exact simulation and verification of clean two-party communication
//! protocols.
//!
//! * [`statecore`]: dense states, gates, partial traces and entropies.
//! * [`engine`]: register layouts, protocol scripts, locality-checked
//!   execution, cost accounting and cleanliness verification.
//! * [`protocols`]: builders for the inner-product protocol families and
//!   the naive run/copy/reverse wrapper.
//! * [`infocost`]: quantum information cost, leak terms and classical
//!   transcript information bounds.
//! * [`fnlab`]: communication matrices, ranks, GF(2) decompositions, the
//!   clean-protocol compiler and rectangle extraction.

pub mod boolfn;
pub mod engine;
pub mod fnlab;
pub mod infocost;
pub mod protocols;
pub mod statecore;

pub use boolfn::TruthTable;
