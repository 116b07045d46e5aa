use serde::{Deserialize, Serialize};

use super::membership::{MembershipFunction, MfShape};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub label: String,
    #[serde(flatten)]
    pub mf: MembershipFunction,
}

/// A named input or output dimension partitioned into labelled fuzzy sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VariableRecord", into = "VariableRecord")]
pub struct LinguisticVariable {
    name: String,
    lo: f64,
    hi: f64,
    terms: Vec<Term>,
}

impl LinguisticVariable {
    pub fn new(name: impl Into<String>, range: (f64, f64), terms: Vec<Term>) -> Result<Self> {
        let var = LinguisticVariable {
            name: name.into(),
            lo: range.0,
            hi: range.1,
            terms,
        };
        var.validate()?;
        Ok(var)
    }

    /// Evenly spaced `count` sets of one shape, labelled by `labels` (or `mf0`, `mf1`, ...).
    pub fn uniform(
        name: impl Into<String>,
        range: (f64, f64),
        shape: MfShape,
        count: usize,
        labels: &[&str],
    ) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("a variable needs at least one membership function"));
        }
        if !(range.0 < range.1) {
            return Err(Error::invalid(format!("empty range {range:?}")));
        }
        let terms = shape
            .partition(range.0, range.1, count)
            .into_iter()
            .enumerate()
            .map(|(i, mf)| Term {
                label: labels.get(i).map_or_else(|| format!("mf{i}"), |s| s.to_string()),
                mf,
            })
            .collect();
        LinguisticVariable::new(name, range, terms)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::invalid(format!(
                "variable '{}': invalid range [{}, {}]",
                self.name, self.lo, self.hi
            )));
        }
        if self.terms.is_empty() {
            return Err(Error::invalid(format!("variable '{}' has no membership functions", self.name)));
        }
        for t in &self.terms {
            t.mf.validate()?;
            let c = t.mf.center();
            if c < self.lo || c > self.hi {
                return Err(Error::invalid(format!(
                    "variable '{}': center of '{}' ({c}) outside range",
                    self.name, t.label
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn mf(&self, j: usize) -> &MembershipFunction {
        &self.terms[j].mf
    }

    pub(crate) fn mf_mut(&mut self, j: usize) -> &mut MembershipFunction {
        &mut self.terms[j].mf
    }

    pub fn clip(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    /// Degree of `x` (clipped to the range) in set `j`.
    pub fn degree(&self, j: usize, x: f64) -> f64 {
        self.terms[j].mf.eval(self.clip(x))
    }

    pub fn degrees(&self, x: f64) -> Vec<f64> {
        let x = self.clip(x);
        self.terms.iter().map(|t| t.mf.eval(x)).collect()
    }

    /// Moves set `j` so its center is `c`, clamped into the range.
    pub(crate) fn set_center(&mut self, j: usize, c: f64) {
        let c = self.clip(c);
        self.terms[j].mf.set_center(c);
    }

    /// Pulls every center back into the range and repairs shape invariants.
    pub(crate) fn project(&mut self) {
        let (lo, hi, width) = (self.lo, self.hi, self.width());
        for t in &mut self.terms {
            t.mf.project(width);
            let c = t.mf.center();
            if c < lo || c > hi {
                t.mf.set_center(c.clamp(lo, hi));
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct VariableRecord {
    name: String,
    range: [f64; 2],
    mfs: Vec<Term>,
}

impl TryFrom<VariableRecord> for LinguisticVariable {
    type Error = Error;

    fn try_from(r: VariableRecord) -> Result<Self> {
        LinguisticVariable::new(r.name, (r.range[0], r.range[1]), r.mfs)
    }
}

impl From<LinguisticVariable> for VariableRecord {
    fn from(v: LinguisticVariable) -> Self {
        VariableRecord {
            name: v.name,
            range: [v.lo, v.hi],
            mfs: v.terms,
        }
    }
}

/// Cartesian product of set indices, last variable varying fastest.
pub fn grid_partition(variables: &[LinguisticVariable]) -> Result<Vec<Vec<usize>>> {
    if variables.is_empty() {
        return Err(Error::invalid("grid partition needs at least one variable"));
    }
    let mut rules: Vec<Vec<usize>> = vec![Vec::new()];
    for var in variables {
        if var.is_empty() {
            return Err(Error::invalid(format!("variable '{}' has no sets", var.name())));
        }
        rules = rules
            .into_iter()
            .flat_map(|prefix| {
                (0..var.len()).map(move |j| {
                    let mut r = prefix.clone();
                    r.push(j);
                    r
                })
            })
            .collect();
    }
    Ok(rules)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TNorm {
    #[default]
    Product,
    Min,
}

impl TNorm {
    pub fn combine(self, degrees: impl IntoIterator<Item = f64>) -> f64 {
        match self {
            TNorm::Product => degrees.into_iter().product(),
            TNorm::Min => degrees.into_iter().fold(1.0, f64::min),
        }
    }
}

/// Product T-norm of the antecedent degrees of `x`.
pub fn firing_strength(variables: &[LinguisticVariable], antecedent: &[usize], x: &[f64]) -> f64 {
    debug_assert_eq!(variables.len(), antecedent.len());
    TNorm::Product.combine(
        variables
            .iter()
            .zip(antecedent)
            .zip(x)
            .map(|((v, &j), &xi)| v.degree(j, xi)),
    )
}
