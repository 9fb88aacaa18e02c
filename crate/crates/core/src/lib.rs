//! Information-based classification of elementary cellular automata.
//!
//! Rules are evolved on periodic rings, pairwise transfer entropy is averaged
//! over a burned-in space-time patch, and the sensitivity of that average to
//! the input state sorts the 88 rule equivalence classes into three
//! information classes. The [`coarse`] module checks exact supercell
//! coarse-graining transitions against that hierarchy.

pub mod bits;
pub mod classify;
pub mod coarse;
pub mod eca;
pub mod error;
pub mod info;
pub mod labels;
pub mod seed;

pub use eca::{representatives, Configuration, RuleCode, SpacetimeField, Symmetry};
pub use error::{Error, Result};
pub use info::{mean_te, te_matrix, transfer_entropy, MeanTe, TeConfig, TeMatrix};
