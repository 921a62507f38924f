//! Simulation of single-photon cheat-sensitive quantum bit commitment.
//!
//! Alice commits a bit by measuring Bob's BB84 photons in bases chosen by a
//! codeword of a binary linear code, announcing only which of the sets
//! `{|0⟩,|+⟩}` / `{|1⟩,|−⟩}` each outcome fell in. The crate provides the
//! exact quantum primitives, the honest protocol engine, the cheating
//! strategies for both parties, and a Monte Carlo harness that compares
//! empirical rates with their closed forms.

pub mod adversary;
pub mod analysis;
pub mod codes;
pub mod error;
pub mod protocol;
pub mod quantum;
pub mod rng;

pub use error::{Error, Result};
