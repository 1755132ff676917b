//! Simulation and verification toolkit for a t-out-of-n threshold quantum
//! cash scheme built on two-qubit Grover and permutation operators.
//!
//! The crate is organised by protocol concern:
//!
//! - [`field`]: GF(2^N) arithmetic, Shamir dealing and Lagrange precomputation.
//! - [`qsim`]: exact state-vector and density-matrix simulation of the
//!   two-qubit operator alphabet.
//! - [`protocol`]: issuing and checking banknotes across center cohorts.
//! - [`trojan`]: the auxiliary-qubit detector for multi-qubit substitutions.
//! - [`eavesdrop`]: fake-signal spectrum, entropy bound and intercept-resend.
//!
//! Everything is deterministic given a seed; see [`rng`].

pub mod eavesdrop;
pub mod field;
pub mod protocol;
pub mod qsim;
pub mod rng;
pub mod trojan;

pub use eavesdrop::{FakeSignal, SpectrumReport};
pub use field::{FieldElement, Gf2n, KeyPair, PrecomputedShare, SecretKey, Share, ShareSet};
pub use protocol::{Banknote, BlindingRecord, CheckReport};
pub use qsim::{DensityMatrix, OpCode, StateVector, Variant, C64};
pub use trojan::{DetectorTrace, TrojanState};
