//! Synthetic-morphology test suites for machine translation.
//!
//! Artificial morphemes are inserted into an annotated, word-aligned
//! parallel corpus on exactly one side of each sentence pair; the outputs of
//! a system trained on the result are then checked for whether the
//! phenomenon was carried across.

pub mod alphabet;
pub mod augmenter;
pub mod builder;
pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluator;
pub mod matcher;
pub mod morphemes;
pub mod pattern;
pub mod toy;
pub mod transforms;

pub use error::{Error, Result};
