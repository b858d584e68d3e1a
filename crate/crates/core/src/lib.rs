//! Budget-limited algorithm selection over pre-recorded learning curves.
//!
//! An agent repeatedly picks an algorithm and a training budget, sees the
//! revealed train/validation scores, and is rewarded for improving the
//! test score of the algorithm it predicts to be best, earlier being worth
//! more.

pub mod agents;
pub mod cli;
pub mod curvestore;
pub mod env;
pub mod error;
pub mod harness;
pub mod synthgen;
pub mod valuenet;

pub use error::{ArenaError, Result};
