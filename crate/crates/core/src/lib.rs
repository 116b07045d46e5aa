//! Soft-computing regression models for tactical decision scoring.
//!
//! Four model families share one data pipeline: a grid-partitioned
//! Takagi–Sugeno network trained by hybrid learning ([`anfis`]), a Mamdani
//! system extracted from data and tuned by gradient descent or a genetic
//! algorithm ([`mamdani_learn`]), a one-hidden-layer perceptron trained by
//! scaled conjugate gradient ([`mlp`]) and a pruned regression tree
//! ([`cart`]). [`bench`] runs the comparison matrix.

pub mod cart;
pub mod data;
pub mod error;
pub mod fuzzy;
pub mod linalg;
pub mod mamdani_learn;
pub mod mlp;
pub mod model_file;
pub mod pipeline;
pub mod report;
pub mod anfis;
pub mod bench;

pub use error::{Error, Result};
