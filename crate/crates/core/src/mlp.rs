//! One-hidden-layer perceptron trained with scaled conjugate gradient.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Observations;
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::report::{rmse, TrainReport};

/// tanh hidden layer, identity output.
///
/// Weight layout: for each hidden unit its `input_dim` weights then its bias,
/// followed by the `hidden_units` output weights and the output bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRecord", into = "ModelRecord")]
pub struct MlpModel {
    input_dim: usize,
    hidden_units: usize,
    weights: Vec<f64>,
}

impl MlpModel {
    pub fn weight_count(input_dim: usize, hidden_units: usize) -> usize {
        (input_dim + 1) * hidden_units + hidden_units + 1
    }

    pub fn new(input_dim: usize, hidden_units: usize, weights: Vec<f64>) -> Result<Self> {
        if input_dim == 0 || hidden_units == 0 {
            return Err(Error::invalid("input_dim and hidden_units must be >= 1"));
        }
        let n = Self::weight_count(input_dim, hidden_units);
        if weights.len() != n {
            return Err(Error::invalid(format!("expected {n} weights, got {}", weights.len())));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("non-finite weight"));
        }
        Ok(MlpModel {
            input_dim,
            hidden_units,
            weights,
        })
    }

    pub fn zeros(input_dim: usize, hidden_units: usize) -> Result<Self> {
        Self::new(input_dim, hidden_units, vec![0.0; Self::weight_count(input_dim, hidden_units)])
    }

    /// Uniform in ±1/√fan-in per layer (fan-in counts the bias).
    pub fn random(input_dim: usize, hidden_units: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b1 = 1.0 / ((input_dim + 1) as f64).sqrt();
        let b2 = 1.0 / ((hidden_units + 1) as f64).sqrt();
        let split = (input_dim + 1) * hidden_units;
        let weights = (0..Self::weight_count(input_dim, hidden_units))
            .map(|i| {
                let b = if i < split { b1 } else { b2 };
                rng.gen_range(-b..=b)
            })
            .collect();
        Self::new(input_dim, hidden_units, weights)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_units(&self) -> usize {
        self.hidden_units
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn set_weights(&mut self, w: &[f64]) -> Result<()> {
        if w.len() != self.weights.len() {
            return Err(Error::invalid("weight vector length mismatch"));
        }
        self.weights.copy_from_slice(w);
        Ok(())
    }

    fn hidden(&self, x: &[f64], out: &mut [f64]) {
        let stride = self.input_dim + 1;
        for (h, o) in out.iter_mut().enumerate() {
            let row = &self.weights[h * stride..(h + 1) * stride];
            *o = (dot(&row[..self.input_dim], x) + row[self.input_dim]).tanh();
        }
    }

    fn output_from_hidden(&self, z: &[f64]) -> f64 {
        let off = (self.input_dim + 1) * self.hidden_units;
        dot(&self.weights[off..off + self.hidden_units], z) + self.weights[off + self.hidden_units]
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(Error::invalid(format!("expected {} inputs, got {}", self.input_dim, x.len())));
        }
        let mut z = vec![0.0; self.hidden_units];
        self.hidden(x, &mut z);
        Ok(self.output_from_hidden(&z))
    }

    pub fn predict_all(&self, data: &Observations) -> Result<Vec<f64>> {
        data.x.iter().map(|x| self.forward(x)).collect()
    }

    /// `½ Σ (d − y)²`.
    pub fn sse(&self, data: &Observations) -> Result<f64> {
        let pred = self.predict_all(data)?;
        Ok(0.5 * pred.iter().zip(&data.y).map(|(p, d)| (p - d) * (p - d)).sum::<f64>())
    }

    /// Backpropagated gradient of [`MlpModel::sse`]; also returns the objective.
    pub fn gradient(&self, data: &Observations) -> Result<(Vec<f64>, f64)> {
        if data.is_empty() {
            return Err(Error::invalid("empty data"));
        }
        if data.dim() != self.input_dim {
            return Err(Error::invalid("data dimension mismatch"));
        }
        let (d, hu) = (self.input_dim, self.hidden_units);
        let stride = d + 1;
        let off = stride * hu;
        let mut g = vec![0.0; self.weights.len()];
        let mut z = vec![0.0; hu];
        let mut e = 0.0;
        for (x, t) in data.iter() {
            self.hidden(x, &mut z);
            let r = self.output_from_hidden(&z) - t;
            e += 0.5 * r * r;
            for h in 0..hu {
                g[off + h] += r * z[h];
                let delta = r * self.weights[off + h] * (1.0 - z[h] * z[h]);
                let gh = &mut g[h * stride..(h + 1) * stride];
                for i in 0..d {
                    gh[i] += delta * x[i];
                }
                gh[d] += delta;
            }
            g[off + hu] += r;
        }
        Ok((g, e))
    }
}

/// Standalone forward pass.
pub fn mlp_forward(model: &MlpModel, x: &[f64]) -> Result<f64> {
    model.forward(x)
}

pub fn mlp_gradient(model: &MlpModel, data: &Observations) -> Result<Vec<f64>> {
    model.gradient(data).map(|(g, _)| g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScgConfig {
    pub hidden_units: usize,
    pub epochs: usize,
    pub sigma0: f64,
    pub lambda: f64,
}

impl Default for ScgConfig {
    fn default() -> Self {
        ScgConfig {
            hidden_units: 30,
            epochs: 1000,
            sigma0: 1e-4,
            lambda: 1e-6,
        }
    }
}

const LAMBDA_MIN: f64 = 1e-15;
const LAMBDA_MAX: f64 = 1e100;

/// Internal SCG bookkeeping after each iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScgState {
    pub sigma0: f64,
    pub lambda: f64,
    pub lambda_bar: f64,
    pub direction: Vec<f64>,
    pub success: bool,
    pub comparison: f64,
}

/// Trains with scaled conjugate gradient; one epoch is one SCG iteration.
///
/// The curve always has `epochs` entries; after convergence the last error repeats.
pub fn scg_train(model: MlpModel, train: &Observations, test: &Observations, config: &ScgConfig, seed: u64) -> Result<(MlpModel, TrainReport)> {
    scg_train_observed(model, train, test, config, seed, |_, _| {})
}

/// As [`scg_train`], calling `observe(state, objective)` after every iteration.
pub fn scg_train_observed(
    model: MlpModel,
    train: &Observations,
    test: &Observations,
    config: &ScgConfig,
    seed: u64,
    mut observe: impl FnMut(&ScgState, f64),
) -> Result<(MlpModel, TrainReport)> {
    if config.epochs == 0 {
        return Err(Error::invalid("epochs must be >= 1"));
    }
    if !(config.sigma0 > 0.0) || !(config.lambda > 0.0) {
        return Err(Error::invalid("sigma0 and lambda must be > 0"));
    }
    if train.is_empty() {
        return Err(Error::invalid("empty training data"));
    }
    let start = Instant::now();
    let n = train.len() as f64;
    let to_rmse = |e: f64| (2.0 * e / n).sqrt();
    let mut model = model;
    let mut probe = model.clone();
    let mut w = model.weights.clone();
    let np = w.len();

    let (mut grad_new, mut f_old) = model.gradient(train)?;
    let mut grad_old = grad_new.clone();
    let mut d: Vec<f64> = grad_new.iter().map(|g| -g).collect();
    let mut lambda = config.lambda;
    let mut success = true;
    let mut n_success = 0usize;
    let (mut mu, mut kappa, mut theta) = (0.0, 0.0, 0.0);
    let mut report = TrainReport::new(seed);

    for epoch in 1..=config.epochs {
        if success {
            mu = dot(&d, &grad_new);
            if mu >= 0.0 {
                d = grad_new.iter().map(|g| -g).collect();
                mu = dot(&d, &grad_new);
            }
            kappa = dot(&d, &d);
            if kappa < f64::EPSILON * f64::EPSILON {
                break;
            }
            let sigma = config.sigma0 / kappa.sqrt();
            let shifted: Vec<f64> = w.iter().zip(&d).map(|(wi, di)| wi + sigma * di).collect();
            probe.set_weights(&shifted)?;
            let (g_plus, _) = probe.gradient(train)?;
            theta = d.iter().zip(g_plus.iter().zip(&grad_new)).map(|(di, (gp, gn))| di * (gp - gn)).sum::<f64>() / sigma;
        }

        let mut delta = theta + lambda * kappa;
        if delta <= 0.0 {
            delta = lambda * kappa;
            lambda -= theta / kappa;
        }
        let lambda_bar = lambda;
        let alpha = -mu / delta;
        let candidate: Vec<f64> = w.iter().zip(&d).map(|(wi, di)| wi + alpha * di).collect();
        probe.set_weights(&candidate)?;
        let f_new = probe.sse(train)?;
        if !f_new.is_finite() && !f_old.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        let comparison = 2.0 * (f_new - f_old) / (alpha * mu);

        if comparison >= 0.0 && f_new.is_finite() {
            success = true;
            n_success += 1;
            w = candidate;
            f_old = f_new;
            grad_old = std::mem::take(&mut grad_new);
            model.set_weights(&w)?;
            grad_new = model.gradient(train)?.0;
        } else {
            success = false;
        }
        report.rmse_per_epoch.push(to_rmse(f_old));

        if comparison < 0.25 {
            lambda = (4.0 * lambda).min(LAMBDA_MAX);
        }
        if comparison > 0.75 {
            lambda = (0.5 * lambda).max(LAMBDA_MIN);
        }

        if n_success == np {
            d = grad_new.iter().map(|g| -g).collect();
            n_success = 0;
        } else if success {
            let beta = grad_old.iter().zip(&grad_new).map(|(go, gn)| (go - gn) * gn).sum::<f64>() / mu;
            for (di, gn) in d.iter_mut().zip(&grad_new) {
                *di = beta * *di - gn;
            }
        }
        observe(
            &ScgState {
                sigma0: config.sigma0,
                lambda,
                lambda_bar,
                direction: d.clone(),
                success,
                comparison,
            },
            f_old,
        );
        if grad_new.iter().all(|&g| g == 0.0) {
            break;
        }
    }
    let last = to_rmse(f_old);
    report.rmse_per_epoch.resize(config.epochs, last);

    model.set_weights(&w)?;
    report.final_train_rmse = rmse(&model.predict_all(train)?, &train.y);
    report.final_test_rmse = if test.is_empty() {
        f64::NAN
    } else {
        rmse(&model.predict_all(test)?, &test.y)
    };
    report.wall_time = start.elapsed().as_secs_f64();
    Ok((model, report))
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    input_dim: usize,
    hidden_units: usize,
    activation: String,
    weights: Vec<f64>,
}

impl TryFrom<ModelRecord> for MlpModel {
    type Error = Error;

    fn try_from(r: ModelRecord) -> Result<Self> {
        if r.activation != "tanh" {
            return Err(Error::invalid(format!("unsupported activation '{}'", r.activation)));
        }
        MlpModel::new(r.input_dim, r.hidden_units, r.weights)
    }
}

impl From<MlpModel> for ModelRecord {
    fn from(m: MlpModel) -> Self {
        ModelRecord {
            input_dim: m.input_dim,
            hidden_units: m.hidden_units,
            activation: "tanh".into(),
            weights: m.weights,
        }
    }
}
