//! Interactive evolutionary multiobjective optimization for facility location.
//!
//! The crate evolves `p`-facility subsets under five location objectives
//! (median, center, two coverings, equity), learns a decision maker's value
//! function from sparse pairwise comparisons (weighted sum, escalating to a
//! 2-additive Choquet integral when the weighted sum cannot reproduce the
//! answers), and steers the search toward the most preferred region.
//!
//! It also contains the three full-information baselines that rank with the
//! decision maker's true value function, and the experiment harness used to
//! compare all of them.

// `!(x >= 0.0)` style checks are there to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod dm;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod instance;
pub mod numerics;
pub mod objectives;
pub mod preference;
pub mod stats;

pub use error::{Error, ErrorKind, Result};
pub use instance::{Instance, Solution};
pub use objectives::{ObjectiveVector, NUM_OBJECTIVES};
