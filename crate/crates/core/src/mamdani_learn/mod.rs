//! Mamdani rule-base construction and tuning.
//!
//! [`wang_mendel`] extracts a conflict-free rule base from data;
//! [`gd_tune`] and [`ga_optimize`] then adapt the set centers. Both tuners
//! work on the same flat center vector (see [`Chromosome`]).

mod genetic;
mod gradient;
mod wang_mendel;

pub use genetic::{evolve, fitness, ga_optimize, initial_population, Chromosome, GaConfig, GaOutcome};
pub use gradient::{gd_tune, output_centroids, pipeline_rmse, surrogate_gradient, surrogate_objective, surrogate_output, GdConfig};
pub use wang_mendel::{candidate_rule, resolve_conflicts, wang_mendel, CandidateRule};

use crate::fuzzy::MamdaniModel;

/// Set centers of every input variable in order, then of the output.
pub fn centers(model: &MamdaniModel) -> Vec<f64> {
    model
        .inputs()
        .iter()
        .chain(std::iter::once(model.output()))
        .flat_map(|v| v.terms().iter().map(|t| t.mf.center()))
        .collect()
}

/// Range of the variable owning each gene.
pub fn center_bounds(model: &MamdaniModel) -> Vec<(f64, f64)> {
    model
        .inputs()
        .iter()
        .chain(std::iter::once(model.output()))
        .flat_map(|v| std::iter::repeat_n(v.range(), v.len()))
        .collect()
}

/// Copy of `model` with sets translated to `genes` (clamped into range); widths are kept.
pub fn with_centers(model: &MamdaniModel, genes: &[f64]) -> MamdaniModel {
    let mut m = model.clone();
    let mut it = genes.iter().copied();
    for v in m.inputs_mut() {
        for j in 0..v.len() {
            if let Some(c) = it.next() {
                v.set_center(j, c);
            }
        }
    }
    let out = m.output_mut();
    for j in 0..out.len() {
        if let Some(c) = it.next() {
            out.set_center(j, c);
        }
    }
    m
}
