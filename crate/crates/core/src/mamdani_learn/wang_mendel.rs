use std::collections::BTreeMap;

use crate::data::Observations;
use crate::error::{Error, Result};
use crate::fuzzy::{LinguisticVariable, MamdaniModel, MamdaniRule};

/// One rule proposed by a single data pair, before conflict resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRule {
    pub antecedent: Vec<usize>,
    pub consequent: usize,
    /// Product of the winning degrees over all inputs and the output.
    pub degree: f64,
}

/// Index and degree of the set with the highest degree; ties go to the lowest index.
fn best_region(var: &LinguisticVariable, v: f64) -> (usize, f64) {
    var.degrees(v)
        .into_iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (j, d)| if d > best.1 { (j, d) } else { best })
}

pub fn candidate_rule(inputs: &[LinguisticVariable], output: &LinguisticVariable, x: &[f64], y: f64) -> CandidateRule {
    let mut degree = 1.0;
    let antecedent = inputs
        .iter()
        .zip(x)
        .map(|(var, &xi)| {
            let (j, d) = best_region(var, xi);
            degree *= d;
            j
        })
        .collect();
    let (consequent, d) = best_region(output, y);
    CandidateRule {
        antecedent,
        consequent,
        degree: degree * d,
    }
}

/// Keeps, for each antecedent, the candidate with the highest degree (first one on ties).
pub fn resolve_conflicts(candidates: impl IntoIterator<Item = CandidateRule>) -> Vec<MamdaniRule> {
    let mut best: BTreeMap<Vec<usize>, CandidateRule> = BTreeMap::new();
    for c in candidates {
        match best.get(&c.antecedent) {
            Some(kept) if kept.degree >= c.degree => {}
            _ => {
                best.insert(c.antecedent.clone(), c);
            }
        }
    }
    best.into_values()
        .map(|c| MamdaniRule {
            antecedent: c.antecedent,
            consequent: c.consequent,
            weight: c.degree,
        })
        .collect()
}

/// One candidate rule per sample, conflicts resolved by maximum degree.
pub fn wang_mendel(data: &Observations, inputs: Vec<LinguisticVariable>, output: LinguisticVariable) -> Result<MamdaniModel> {
    if data.is_empty() {
        return Err(Error::invalid("wang-mendel needs at least one sample"));
    }
    if data.dim() != inputs.len() {
        return Err(Error::invalid(format!("data has {} inputs, model {}", data.dim(), inputs.len())));
    }
    let rules = resolve_conflicts(data.iter().map(|(x, y)| candidate_rule(&inputs, &output, x, y)));
    MamdaniModel::new(inputs, output, rules)
}
