//! Orbit-level tendency checks for parametric decision-making functions.
//!
//! The crate enumerates orbits of parameter vectors under coordinate
//! permutations, evaluates decision rules on candidate outcome sets and counts
//! how often one set is preferred to another across each orbit. Companion
//! modules cover rewardless MDPs and an ε-greedy bandit.

pub mod bandit;
pub mod decisions;
pub mod error;
pub mod mdp;
pub mod outcomes;
pub mod perm;
pub mod scenario;
pub mod tendency;

pub use error::{Error, Result};
pub use outcomes::{OutcomeLottery, OutcomeSet};
pub use perm::{ParameterDomain, ParameterVector, Permutation};
