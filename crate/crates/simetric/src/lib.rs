//! Reference-free, learned evaluation of text simplification.
//!
//! The crate trains a small sequence-encoder metric in three stages
//! (reference-free signal pretraining, reference-based pretraining,
//! fine-tuning on human ratings) and evaluates any metric's scores
//! against human ratings with a rank-correlation protocol.

pub mod augmentation;
pub mod corpus;
pub mod curriculum;
pub mod error;
pub mod evaluation;
pub mod model;
pub mod pipeline;
pub mod providers;
pub mod signals;
pub mod textstats;

pub use error::{Error, Result};
