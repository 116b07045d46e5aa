//! Mamdani inference: product implication, max aggregation, centroid defuzzification.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::variable::{LinguisticVariable, TNorm};
use crate::error::{Error, Result};

/// Number of points in the uniform output discretisation used for the centroid.
pub const OUTPUT_RESOLUTION: usize = 201;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MamdaniRule {
    pub antecedent: Vec<usize>,
    pub consequent: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRecord", into = "ModelRecord")]
pub struct MamdaniModel {
    inputs: Vec<LinguisticVariable>,
    output: LinguisticVariable,
    rules: Vec<MamdaniRule>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inference {
    pub value: f64,
    /// Set when the aggregate was identically zero and `value` is the range midpoint.
    pub no_rule_fired: bool,
}

impl MamdaniModel {
    pub fn new(inputs: Vec<LinguisticVariable>, output: LinguisticVariable, rules: Vec<MamdaniRule>) -> Result<Self> {
        let model = MamdaniModel { inputs, output, rules };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(Error::invalid("mamdani model needs inputs"));
        }
        let mut seen = HashSet::new();
        for (r, rule) in self.rules.iter().enumerate() {
            if rule.antecedent.len() != self.inputs.len() {
                return Err(Error::invalid(format!("rule {r}: antecedent arity mismatch")));
            }
            if rule.antecedent.iter().zip(&self.inputs).any(|(&j, v)| j >= v.len()) {
                return Err(Error::invalid(format!("rule {r}: antecedent index out of range")));
            }
            if rule.consequent >= self.output.len() {
                return Err(Error::invalid(format!("rule {r}: consequent index out of range")));
            }
            if !(0.0..=1.0).contains(&rule.weight) {
                return Err(Error::invalid(format!("rule {r}: weight {} not in [0,1]", rule.weight)));
            }
            if !seen.insert(&rule.antecedent) {
                return Err(Error::invalid(format!("rule {r}: duplicate antecedent {:?}", rule.antecedent)));
            }
        }
        Ok(())
    }

    pub fn inputs(&self) -> &[LinguisticVariable] {
        &self.inputs
    }

    pub fn output(&self) -> &LinguisticVariable {
        &self.output
    }

    pub fn rules(&self) -> &[MamdaniRule] {
        &self.rules
    }

    pub(crate) fn inputs_mut(&mut self) -> &mut [LinguisticVariable] {
        &mut self.inputs
    }

    pub(crate) fn output_mut(&mut self) -> &mut LinguisticVariable {
        &mut self.output
    }

    /// Rule activations (weight × T-norm of antecedent degrees) for one input vector.
    pub fn activations(&self, x: &[f64], tnorm: TNorm) -> Vec<f64> {
        let degrees: Vec<Vec<f64>> = self.inputs.iter().zip(x).map(|(v, &xi)| v.degrees(xi)).collect();
        self.rules
            .iter()
            .map(|r| rule::weight_of(r, &degrees, tnorm))
            .collect()
    }

    pub fn infer(&self, x: &[f64]) -> Inference {
        self.evaluator(TNorm::Product).infer(x)
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.infer(x).value
    }

    /// Precomputes the output-set table so repeated inference is cheap.
    pub fn evaluator(&self, tnorm: TNorm) -> MamdaniEvaluator<'_> {
        MamdaniEvaluator::new(self, tnorm)
    }
}

mod rule {
    use super::*;

    pub(super) fn weight_of(r: &MamdaniRule, degrees: &[Vec<f64>], tnorm: TNorm) -> f64 {
        r.weight * tnorm.combine(r.antecedent.iter().zip(degrees).map(|(&j, d)| d[j]))
    }
}

/// Points at which aggregated output sets are sampled for the centroid.
pub fn output_grid(output: &LinguisticVariable) -> Vec<f64> {
    let (lo, hi) = output.range();
    let step = (hi - lo) / (OUTPUT_RESOLUTION - 1) as f64;
    (0..OUTPUT_RESOLUTION).map(|p| lo + step * p as f64).collect()
}

pub struct MamdaniEvaluator<'a> {
    model: &'a MamdaniModel,
    tnorm: TNorm,
    grid: Vec<f64>,
    /// `table[k][p]`: degree of output set k at grid point p.
    table: Vec<Vec<f64>>,
}

impl<'a> MamdaniEvaluator<'a> {
    fn new(model: &'a MamdaniModel, tnorm: TNorm) -> Self {
        let grid = output_grid(&model.output);
        let table = model
            .output
            .terms()
            .iter()
            .map(|t| grid.iter().map(|&y| t.mf.eval(y)).collect())
            .collect();
        MamdaniEvaluator { model, tnorm, grid, table }
    }

    pub fn infer(&self, x: &[f64]) -> Inference {
        let degrees: Vec<Vec<f64>> = self.model.inputs.iter().zip(x).map(|(v, &xi)| v.degrees(xi)).collect();
        // scaled sets sharing a consequent collapse to the largest activation under max
        let mut strength = vec![0.0f64; self.table.len()];
        for r in &self.model.rules {
            let a = rule::weight_of(r, &degrees, self.tnorm);
            let s = &mut strength[r.consequent];
            *s = s.max(a);
        }
        let (mut num, mut den) = (0.0, 0.0);
        for (p, &y) in self.grid.iter().enumerate() {
            let agg = strength
                .iter()
                .zip(&self.table)
                .fold(0.0f64, |m, (&s, row)| m.max(s * row[p]));
            num += y * agg;
            den += agg;
        }
        if den > 0.0 {
            Inference {
                value: (num / den).clamp(self.grid[0], self.grid[self.grid.len() - 1]),
                no_rule_fired: false,
            }
        } else {
            Inference {
                value: self.model.output.midpoint(),
                no_rule_fired: true,
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    inputs: Vec<LinguisticVariable>,
    output: LinguisticVariable,
    rules: Vec<MamdaniRule>,
}

impl TryFrom<ModelRecord> for MamdaniModel {
    type Error = Error;

    fn try_from(r: ModelRecord) -> Result<Self> {
        MamdaniModel::new(r.inputs, r.output, r.rules)
    }
}

impl From<MamdaniModel> for ModelRecord {
    fn from(m: MamdaniModel) -> Self {
        ModelRecord {
            inputs: m.inputs,
            output: m.output,
            rules: m.rules,
        }
    }
}
