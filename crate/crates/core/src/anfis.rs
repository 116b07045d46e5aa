//! Grid-partitioned Takagi–Sugeno network with hybrid learning.
//!
//! Layers: inputs → membership degrees → product firing strengths →
//! normalised strengths → weighted linear consequents → sum. Hybrid learning
//! alternates a least-squares solve for the consequent coefficients (premise
//! sets fixed) with a normalised steepest-descent step on every premise
//! parameter (consequents fixed).

use std::collections::VecDeque;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::Observations;
use crate::error::{Error, Result};
use crate::fuzzy::{grid_partition, LinguisticVariable, MfShape};
use crate::linalg::{self, Matrix, DEFAULT_GAMMA};
use crate::report::{rmse, TrainReport};

/// Per-rule linear consequent `p_1 x_1 + … + p_d x_d + r`, stored as `[p_1, …, p_d, r]`.
pub type Consequent = Vec<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRecord", into = "ModelRecord")]
pub struct AnfisModel {
    inputs: Vec<LinguisticVariable>,
    rules: Vec<Vec<usize>>,
    consequents: Vec<Consequent>,
}

/// Intermediate layer values of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// Layer 2: `degrees[i][j]` is the degree of input i in its set j.
    pub degrees: Vec<Vec<f64>>,
    /// Layer 3: product firing strength per rule.
    pub strengths: Vec<f64>,
    /// Layer 4: strengths divided by their sum.
    pub normalized: Vec<f64>,
    /// Crisp consequent value per rule.
    pub rule_outputs: Vec<f64>,
    /// Layer 5: normalised strength times consequent value.
    pub weighted: Vec<f64>,
    /// Layer 6.
    pub output: f64,
}

impl AnfisModel {
    /// Full grid of rules over `inputs` with all consequents zero.
    pub fn new(inputs: Vec<LinguisticVariable>) -> Result<Self> {
        let rules = grid_partition(&inputs)?;
        let consequents = vec![vec![0.0; inputs.len() + 1]; rules.len()];
        AnfisModel::with_rules(inputs, rules, consequents)
    }

    /// `count` evenly spread sets of `shape` on each of the given ranges.
    pub fn grid(shape: MfShape, count: usize, ranges: &[(f64, f64)]) -> Result<Self> {
        let inputs = ranges
            .iter()
            .enumerate()
            .map(|(i, &r)| LinguisticVariable::uniform(format!("x{i}"), r, shape, count, &[]))
            .collect::<Result<Vec<_>>>()?;
        AnfisModel::new(inputs)
    }

    pub fn with_rules(inputs: Vec<LinguisticVariable>, rules: Vec<Vec<usize>>, consequents: Vec<Consequent>) -> Result<Self> {
        let m = AnfisModel {
            inputs,
            rules,
            consequents,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() || self.rules.is_empty() {
            return Err(Error::invalid("anfis needs at least one input and one rule"));
        }
        for v in &self.inputs {
            v.validate()?;
        }
        if self.consequents.len() != self.rules.len() {
            return Err(Error::invalid(format!(
                "{} consequents for {} rules",
                self.consequents.len(),
                self.rules.len()
            )));
        }
        let d = self.inputs.len();
        for (n, (rule, c)) in self.rules.iter().zip(&self.consequents).enumerate() {
            if rule.len() != d || rule.iter().zip(&self.inputs).any(|(&j, v)| j >= v.len()) {
                return Err(Error::invalid(format!("rule {n}: bad antecedent {rule:?}")));
            }
            if c.len() != d + 1 || c.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("rule {n}: consequent needs {} finite values", d + 1)));
            }
        }
        Ok(())
    }

    pub fn inputs(&self) -> &[LinguisticVariable] {
        &self.inputs
    }

    pub fn rules(&self) -> &[Vec<usize>] {
        &self.rules
    }

    pub fn consequents(&self) -> &[Consequent] {
        &self.consequents
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.len()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    /// Length of the flattened consequent vector (rules × (inputs + 1)).
    pub fn consequent_len(&self) -> usize {
        self.rules.len() * (self.inputs.len() + 1)
    }

    pub fn consequent_vector(&self) -> Vec<f64> {
        self.consequents.iter().flatten().copied().collect()
    }

    pub fn set_consequent_vector(&mut self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.consequent_len() {
            return Err(Error::invalid(format!(
                "consequent vector length {} != {}",
                theta.len(),
                self.consequent_len()
            )));
        }
        let w = self.inputs.len() + 1;
        for (c, chunk) in self.consequents.iter_mut().zip(theta.chunks(w)) {
            c.copy_from_slice(chunk);
        }
        Ok(())
    }

    /// All premise parameters, variable by variable, set by set.
    pub fn premise_params(&self) -> Vec<f64> {
        self.inputs
            .iter()
            .flat_map(|v| v.terms().iter().flat_map(|t| t.mf.params()))
            .collect()
    }

    pub fn premise_len(&self) -> usize {
        self.inputs
            .iter()
            .map(|v| v.terms().iter().map(|t| t.mf.param_count()).sum::<usize>())
            .sum()
    }

    /// Writes premise parameters and projects every set back onto its constraints.
    pub fn set_premise_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.premise_len() {
            return Err(Error::invalid("premise parameter length mismatch"));
        }
        self.write_premises(params);
        for v in &mut self.inputs {
            v.project();
        }
        Ok(())
    }

    fn write_premises(&mut self, params: &[f64]) {
        let mut off = 0;
        for v in &mut self.inputs {
            for j in 0..v.len() {
                let mf = v.mf_mut(j);
                let k = mf.param_count();
                mf.set_params_unchecked(&params[off..off + k]);
                off += k;
            }
        }
    }

    fn trace(&self, x: &[f64]) -> Option<ForwardTrace> {
        let degrees: Vec<Vec<f64>> = self.inputs.iter().zip(x).map(|(v, &xi)| v.degrees(xi)).collect();
        let strengths: Vec<f64> = self
            .rules
            .iter()
            .map(|r| r.iter().zip(&degrees).map(|(&j, d)| d[j]).product())
            .collect();
        let total: f64 = strengths.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return None;
        }
        let normalized: Vec<f64> = strengths.iter().map(|w| w / total).collect();
        let rule_outputs: Vec<f64> = self.consequents.iter().map(|c| linear(c, x)).collect();
        let weighted: Vec<f64> = normalized.iter().zip(&rule_outputs).map(|(w, f)| w * f).collect();
        let output = weighted.iter().sum();
        Some(ForwardTrace {
            degrees,
            strengths,
            normalized,
            rule_outputs,
            weighted,
            output,
        })
    }

    pub fn forward(&self, x: &[f64]) -> Result<(f64, ForwardTrace)> {
        self.forward_at(x, 0)
    }

    fn forward_at(&self, x: &[f64], sample: usize) -> Result<(f64, ForwardTrace)> {
        if x.len() != self.inputs.len() {
            return Err(Error::invalid(format!("expected {} inputs, got {}", self.inputs.len(), x.len())));
        }
        let t = self.trace(x).ok_or(Error::DegenerateCoverage { sample })?;
        Ok((t.output, t))
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.forward(x).map(|(y, _)| y)
    }

    pub fn predict_all(&self, data: &Observations) -> Result<Vec<f64>> {
        data.x
            .iter()
            .enumerate()
            .map(|(i, x)| self.forward_at(x, i).map(|(y, _)| y))
            .collect()
    }

    /// Sum of squared errors over `data`.
    pub fn sse(&self, data: &Observations) -> Result<f64> {
        let pred = self.predict_all(data)?;
        Ok(pred.iter().zip(&data.y).map(|(p, d)| (p - d) * (p - d)).sum())
    }

    /// Gradient of `½ Σ (f(x) − d)²` with respect to [`premise_params`](Self::premise_params),
    /// consequents held fixed. Also returns the sum of squared errors.
    pub fn premise_gradient(&self, data: &Observations) -> Result<(Vec<f64>, f64)> {
        let d = self.inputs.len();
        let offsets: Vec<Vec<usize>> = {
            let mut off = 0;
            self.inputs
                .iter()
                .map(|v| {
                    v.terms()
                        .iter()
                        .map(|t| {
                            let o = off;
                            off += t.mf.param_count();
                            o
                        })
                        .collect()
                })
                .collect()
        };
        let mut grad = vec![0.0; self.premise_len()];
        let mut sse = 0.0;
        let mut d_mu: Vec<Vec<f64>> = self.inputs.iter().map(|v| vec![0.0; v.len()]).collect();
        for (s, (x, target)) in data.iter().enumerate() {
            let (f, t) = self.forward_at(x, s)?;
            let err = f - target;
            sse += err * err;
            let total: f64 = t.strengths.iter().sum();
            d_mu.iter_mut().for_each(|row| row.iter_mut().for_each(|v| *v = 0.0));
            for (n, rule) in self.rules.iter().enumerate() {
                let coef = err * (t.rule_outputs[n] - f) / total;
                if coef == 0.0 {
                    continue;
                }
                for i in 0..d {
                    let others: f64 = (0..d).filter(|&k| k != i).map(|k| t.degrees[k][rule[k]]).product();
                    d_mu[i][rule[i]] += coef * others;
                }
            }
            for (i, v) in self.inputs.iter().enumerate() {
                let xi = v.clip(x[i]);
                for j in 0..v.len() {
                    if d_mu[i][j] == 0.0 {
                        continue;
                    }
                    let off = offsets[i][j];
                    for (k, g) in v.mf(j).grad(xi).into_iter().enumerate() {
                        grad[off + k] += d_mu[i][j] * g;
                    }
                }
            }
        }
        Ok((grad, sse))
    }
}

fn linear(c: &[f64], x: &[f64]) -> f64 {
    let d = x.len();
    linalg::dot(&c[..d], x) + c[d]
}

/// Row of the consequent design matrix: `(w̄_n x_1, …, w̄_n x_d, w̄_n)` for every rule n.
pub fn build_regressor_row(trace: &ForwardTrace, x: &[f64]) -> Vec<f64> {
    let mut row = Vec::with_capacity(trace.normalized.len() * (x.len() + 1));
    for &w in &trace.normalized {
        row.extend(x.iter().map(|xi| w * xi));
        row.push(w);
    }
    row
}

/// Step-size control: grow k after four straight error reductions, shrink it
/// after four alternating moves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSizeController {
    k: f64,
    history: VecDeque<f64>,
}

/// What [`StepSizeController::update`] did with k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepChange {
    Increased,
    Decreased,
    Unchanged,
}

impl StepSizeController {
    pub const DEFAULT_K: f64 = 0.01;
    const WINDOW: usize = 5;

    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::invalid(format!("step size must be positive, got {k}")));
        }
        Ok(StepSizeController {
            k,
            history: VecDeque::with_capacity(Self::WINDOW),
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn history(&self) -> impl Iterator<Item = f64> + '_ {
        self.history.iter().copied()
    }

    /// Learning rate `k / ‖g‖`; zero for a zero gradient.
    pub fn eta(&self, grad: &[f64]) -> f64 {
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm > 0.0 {
            self.k / norm
        } else {
            0.0
        }
    }

    pub fn update(mut self, new_error: f64) -> Self {
        self.record(new_error);
        self
    }

    pub fn record(&mut self, new_error: f64) -> StepChange {
        self.history.push_back(new_error);
        if self.history.len() > Self::WINDOW {
            self.history.pop_front();
        }
        if self.history.len() < Self::WINDOW {
            return StepChange::Unchanged;
        }
        let moves: Vec<f64> = self
            .history
            .iter()
            .zip(self.history.iter().skip(1))
            .map(|(a, b)| b - a)
            .collect();
        let change = if moves.iter().all(|&m| m < 0.0) {
            self.k *= 1.1;
            StepChange::Increased
        } else if moves.iter().all(|&m| m != 0.0) && moves.windows(2).all(|w| (w[0] > 0.0) != (w[1] > 0.0)) {
            self.k *= 0.9;
            StepChange::Decreased
        } else {
            StepChange::Unchanged
        };
        if change != StepChange::Unchanged {
            self.history.clear();
            self.history.push_back(new_error);
        }
        change
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearningMode {
    #[default]
    Hybrid,
    BackpropOnly,
}

/// Which estimator identifies the consequents in hybrid mode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConsequentSolver {
    /// Householder QR, falling back to recursive least squares on a singular design.
    #[default]
    Batch,
    Recursive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnfisConfig {
    pub epochs: usize,
    pub mode: LearningMode,
    pub initial_k: f64,
    pub solver: ConsequentSolver,
    pub gamma: f64,
}

impl Default for AnfisConfig {
    fn default() -> Self {
        AnfisConfig {
            epochs: 15,
            mode: LearningMode::Hybrid,
            initial_k: StepSizeController::DEFAULT_K,
            solver: ConsequentSolver::Batch,
            gamma: DEFAULT_GAMMA,
        }
    }
}

/// Solves for the consequents given the current premises; returns the post-solve RMSE.
pub fn identify_consequents(model: &mut AnfisModel, data: &Observations, solver: ConsequentSolver, gamma: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::invalid("empty training data"));
    }
    let m = model.consequent_len();
    let mut a = Vec::with_capacity(data.len() * m);
    for (s, x) in data.x.iter().enumerate() {
        let (_, t) = model.forward_at(x, s)?;
        a.extend(build_regressor_row(&t, x));
    }
    let a = Matrix::new(data.len(), m, a)?;
    let theta = match solver {
        ConsequentSolver::Batch => match linalg::lse_batch(&a, &data.y) {
            Ok(theta) => theta,
            Err(Error::Singular(_)) | Err(Error::InvalidArgument(_)) => linalg::rls_solve(&a, &data.y, gamma)?,
            Err(e) => return Err(e),
        },
        ConsequentSolver::Recursive => linalg::rls_solve(&a, &data.y, gamma)?,
    };
    model.set_consequent_vector(&theta)?;
    let pred = a.mul_vec(&theta);
    Ok(rmse(&pred, &data.y))
}

/// One steepest-descent step on the premises with step `η = k / ‖∇E‖`.
pub fn premise_step(model: &mut AnfisModel, data: &Observations, controller: &StepSizeController) -> Result<f64> {
    let (grad, sse) = model.premise_gradient(data)?;
    let eta = controller.eta(&grad);
    if eta > 0.0 {
        let params: Vec<f64> = model.premise_params().iter().zip(&grad).map(|(p, g)| p - eta * g).collect();
        model.set_premise_params(&params)?;
    }
    Ok((sse / data.len() as f64).sqrt())
}

/// Consequent least-squares solve, then one premise gradient step.
///
/// The returned RMSE is measured after the solve and before the premise step.
pub fn hybrid_epoch(model: &AnfisModel, data: &Observations, controller: &StepSizeController) -> Result<(AnfisModel, f64)> {
    hybrid_epoch_with(model, data, controller, ConsequentSolver::Batch, DEFAULT_GAMMA)
}

pub fn hybrid_epoch_with(
    model: &AnfisModel,
    data: &Observations,
    controller: &StepSizeController,
    solver: ConsequentSolver,
    gamma: f64,
) -> Result<(AnfisModel, f64)> {
    let mut next = model.clone();
    let err = identify_consequents(&mut next, data, solver, gamma)?;
    premise_step(&mut next, data, controller)?;
    Ok((next, err))
}

pub fn train(
    model: AnfisModel,
    train: &Observations,
    test: &Observations,
    config: &AnfisConfig,
    seed: u64,
) -> Result<(AnfisModel, TrainReport)> {
    if config.epochs == 0 {
        return Err(Error::invalid("epochs must be >= 1"));
    }
    if train.is_empty() {
        return Err(Error::invalid("empty training data"));
    }
    let start = Instant::now();
    let mut controller = StepSizeController::new(config.initial_k)?;
    let mut model = model;
    let mut report = TrainReport::new(seed);
    for _ in 0..config.epochs {
        let err = match config.mode {
            LearningMode::Hybrid => {
                identify_consequents(&mut model, train, config.solver, config.gamma)?;
                // measured post-solve, pre-step
                premise_step(&mut model, train, &controller)?
            }
            LearningMode::BackpropOnly => premise_step(&mut model, train, &controller)?,
        };
        report.rmse_per_epoch.push(err);
        controller.record(err);
    }
    if config.mode == LearningMode::Hybrid {
        // the last premise step left the consequents stale
        identify_consequents(&mut model, train, config.solver, config.gamma)?;
    }
    report.final_train_rmse = rmse(&model.predict_all(train)?, &train.y);
    report.final_test_rmse = if test.is_empty() {
        f64::NAN
    } else {
        rmse(&model.predict_all(test)?, &test.y)
    };
    report.rule_count = Some(model.rule_count());
    report.wall_time = start.elapsed().as_secs_f64();
    Ok((model, report))
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    inputs: Vec<LinguisticVariable>,
    rules: Vec<Vec<usize>>,
    consequents: Vec<Consequent>,
}

impl TryFrom<ModelRecord> for AnfisModel {
    type Error = Error;

    fn try_from(r: ModelRecord) -> Result<Self> {
        AnfisModel::with_rules(r.inputs, r.rules, r.consequents)
    }
}

impl From<AnfisModel> for ModelRecord {
    fn from(m: AnfisModel) -> Self {
        ModelRecord {
            inputs: m.inputs,
            rules: m.rules,
            consequents: m.consequents,
        }
    }
}
