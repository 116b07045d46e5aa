//! Momentum gradient descent on Mamdani set centers.
//!
//! The centroid of a max-aggregated output is not smooth in the centers, so
//! training differentiates a surrogate: the activation-weighted mean of the
//! consequent set centroids. Reported errors use the full inference pipeline.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{centers, with_centers};
use crate::data::Observations;
use crate::error::{Error, Result};
use crate::fuzzy::{output_grid, LinguisticVariable, MamdaniModel};
use crate::report::{rmse, TrainReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GdConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
}

impl Default for GdConfig {
    fn default() -> Self {
        GdConfig {
            learning_rate: 0.5,
            momentum: 0.3,
            epochs: 10,
        }
    }
}

/// Centroid of each output set over the inference grid, with its derivative
/// with respect to a translation of the set.
pub fn output_centroids(output: &LinguisticVariable) -> Vec<(f64, f64)> {
    let grid = output_grid(output);
    output
        .terms()
        .iter()
        .map(|t| {
            let (mut s0, mut s1, mut d0, mut d1) = (0.0, 0.0, 0.0, 0.0);
            for &z in &grid {
                let (m, dm) = (t.mf.eval(z), t.mf.center_grad(z));
                s0 += m;
                s1 += z * m;
                d0 += dm;
                d1 += z * dm;
            }
            if s0 > 0.0 {
                let c = s1 / s0;
                (c, (d1 - c * d0) / s0)
            } else {
                (output.clip(t.mf.center()), 0.0)
            }
        })
        .collect()
}

fn activations(model: &MamdaniModel, degrees: &[Vec<f64>]) -> Vec<f64> {
    model
        .rules()
        .iter()
        .map(|r| r.weight * r.antecedent.iter().zip(degrees).map(|(&j, d)| d[j]).product::<f64>())
        .collect()
}

fn surrogate_with(model: &MamdaniModel, centroids: &[(f64, f64)], x: &[f64]) -> f64 {
    let degrees: Vec<Vec<f64>> = model.inputs().iter().zip(x).map(|(v, &xi)| v.degrees(xi)).collect();
    let acts = activations(model, &degrees);
    let den: f64 = acts.iter().sum();
    if den > 0.0 {
        model.rules().iter().zip(&acts).map(|(r, a)| a * centroids[r.consequent].0).sum::<f64>() / den
    } else {
        model.output().midpoint()
    }
}

/// Surrogate output: `Σ a_r c_r / Σ a_r` over rule activations `a_r` and consequent set centroids `c_r`.
pub fn surrogate_output(model: &MamdaniModel, x: &[f64]) -> f64 {
    surrogate_with(model, &output_centroids(model.output()), x)
}

/// `(1 / 2P) Σ (d − y)²` under the surrogate output.
pub fn surrogate_objective(model: &MamdaniModel, data: &Observations) -> f64 {
    let cent = output_centroids(model.output());
    let sse: f64 = data
        .iter()
        .map(|(x, d)| {
            let e = surrogate_with(model, &cent, x) - d;
            e * e
        })
        .sum();
    0.5 * sse / data.len() as f64
}

/// Gradient of [`surrogate_objective`] over the center genes (inputs, then output).
pub fn surrogate_gradient(model: &MamdaniModel, data: &Observations) -> Vec<f64> {
    let inputs = model.inputs();
    let output = model.output();
    let cent = output_centroids(output);
    let offsets: Vec<usize> = inputs
        .iter()
        .scan(0, |off, v| {
            let o = *off;
            *off += v.len();
            Some(o)
        })
        .collect();
    let out_off = inputs.iter().map(|v| v.len()).sum::<usize>();
    let mut grad = vec![0.0; out_off + output.len()];
    let scale = 1.0 / data.len() as f64;
    let d = inputs.len();

    for (x, target) in data.iter() {
        let degrees: Vec<Vec<f64>> = inputs.iter().zip(x).map(|(v, &xi)| v.degrees(xi)).collect();
        let acts = activations(model, &degrees);
        let total: f64 = acts.iter().sum();
        if !(total > 0.0) {
            continue;
        }
        let y = model.rules().iter().zip(&acts).map(|(r, a)| a * cent[r.consequent].0).sum::<f64>() / total;
        let err = (y - target) * scale;
        for (r, &a) in model.rules().iter().zip(&acts) {
            let (c, dc) = cent[r.consequent];
            grad[out_off + r.consequent] += err * a / total * dc;
            let da = err * (c - y) / total;
            if da == 0.0 {
                continue;
            }
            for i in 0..d {
                let j = r.antecedent[i];
                let var = &inputs[i];
                let dmu = var.mf(j).center_grad(var.clip(x[i]));
                if dmu == 0.0 {
                    continue;
                }
                let others: f64 = (0..d).filter(|&k| k != i).map(|k| degrees[k][r.antecedent[k]]).product();
                grad[offsets[i] + j] += da * r.weight * others * dmu;
            }
        }
    }
    grad
}

pub fn gd_tune(model: MamdaniModel, train: &Observations, test: &Observations, config: &GdConfig, seed: u64) -> Result<(MamdaniModel, TrainReport)> {
    if !(config.learning_rate >= 0.0) || !(0.0..1.0).contains(&config.momentum) {
        return Err(Error::invalid("learning rate must be >= 0 and momentum in [0,1)"));
    }
    if train.is_empty() {
        return Err(Error::invalid("empty training data"));
    }
    let start = Instant::now();
    let mut model = model;
    let mut theta = centers(&model);
    let mut velocity = vec![0.0; theta.len()];
    let initial = surrogate_objective(&model, train);
    let mut report = TrainReport::new(seed);
    for epoch in 1..=config.epochs {
        let grad = surrogate_gradient(&model, train);
        for ((t, v), g) in theta.iter_mut().zip(&mut velocity).zip(&grad) {
            *v = config.momentum * *v - config.learning_rate * g;
            *t += *v;
        }
        model = with_centers(&model, &theta);
        theta = centers(&model);
        let e = surrogate_objective(&model, train);
        if !e.is_finite() || e > 1e6 * initial.max(f64::MIN_POSITIVE) {
            return Err(Error::Diverged { epoch });
        }
        report.rmse_per_epoch.push(pipeline_rmse(&model, train));
    }
    report.final_train_rmse = pipeline_rmse(&model, train);
    report.final_test_rmse = if test.is_empty() { f64::NAN } else { pipeline_rmse(&model, test) };
    report.rule_count = Some(model.rules().len());
    report.wall_time = start.elapsed().as_secs_f64();
    Ok((model, report))
}

/// RMSE of the full max-aggregation / centroid inference.
pub fn pipeline_rmse(model: &MamdaniModel, data: &Observations) -> f64 {
    let eval = model.evaluator(Default::default());
    let pred: Vec<f64> = data.x.iter().map(|x| eval.infer(x).value).collect();
    rmse(&pred, &data.y)
}
