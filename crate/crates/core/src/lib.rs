//! Exact analysis of the randomized decision-tree complexity of recursive
//! majority-of-three (`3-MAJ_h`).
//!
//! The crate is organised around six pieces:
//!
//! * [`formula`]: the complete ternary majority formula, hard inputs, the
//!   minority path, sensitive bits and the uniform k-level encodings.
//! * [`algorithms`]: a query-counting execution engine with the full-read,
//!   directional and depth-two (`Evaluate`/`Complete`) algorithms, an exact
//!   expectation interpreter and a seeded Monte Carlo harness.
//! * [`recurrence`]: the exact recurrence system for the depth-two algorithm
//!   and the lower-bound calculators.
//! * [`alphadp`]: stable-configuration enumeration and the dynamic program
//!   computing the constants `alpha_k` exactly.
//! * [`oracles`]: brute-force cross-checks (explicit decision trees,
//!   exhaustive objective evaluation, a raw-configuration dynamic program).
//! * [`rational`]: helpers around arbitrary precision rationals.

pub mod algorithms;
pub mod alphadp;
pub mod error;
pub mod formula;
pub mod oracles;
pub mod rational;
pub mod recurrence;

pub use algorithms::{AlgorithmId, Distribution, Entry, MonteCarloResult, QueryOracle};
pub use alphadp::{AlphaDp, AlphaResult, CanonicalClass, Configuration, DpEntry, DpSolution};
pub use error::{Error, Result};
pub use formula::{EncodingRandomness, HardInput, Input, Leaf, NodeId, TreeAddr, MAX_HEIGHT};
pub use oracles::ExplicitTree;
pub use rational::Rational;
pub use recurrence::{Ansatz, ComplexityTable, DecimalInterval};
