//! Fuzzy sets, linguistic variables and Mamdani inference.

mod mamdani;
mod membership;
mod variable;

pub use mamdani::{output_grid, Inference, MamdaniEvaluator, MamdaniModel, MamdaniRule, OUTPUT_RESOLUTION};
pub use membership::{MembershipFunction, MfShape};
pub use variable::{firing_strength, grid_partition, LinguisticVariable, TNorm, Term};
