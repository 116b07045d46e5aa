//! Real-coded genetic algorithm over Mamdani set centers.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gradient::pipeline_rmse;
use super::{center_bounds, centers, with_centers};
use crate::data::Observations;
use crate::error::{Error, Result};
use crate::fuzzy::MamdaniModel;

/// Flat vector of set centers: input variables in order, then the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chromosome(pub Vec<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub elite_count: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 50,
            generations: 100,
            mutation_rate: 0.01,
            tournament_size: 3,
            elite_count: 1,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::invalid("population must be >= 2"));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::invalid("mutation rate must be in [0,1]"));
        }
        if self.elite_count >= self.population {
            return Err(Error::invalid("elite count must be below population"));
        }
        if self.tournament_size == 0 {
            return Err(Error::invalid("tournament size must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub model: MamdaniModel,
    /// Best fitness (−RMSE) after each generation.
    pub best_fitness: Vec<f64>,
    pub population: Vec<Chromosome>,
    pub wall_time: f64,
}

pub fn fitness(model: &MamdaniModel, genes: &Chromosome, data: &Observations) -> f64 {
    -pipeline_rmse(&with_centers(model, &genes.0), data)
}

/// First individual is the model's own centers; the rest are uniform within each gene's range.
pub fn initial_population(model: &MamdaniModel, size: usize, rng: &mut impl Rng) -> Vec<Chromosome> {
    let bounds = center_bounds(model);
    let mut pop = vec![Chromosome(centers(model))];
    while pop.len() < size {
        pop.push(Chromosome(bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect()));
    }
    pop
}

pub fn ga_optimize(model: &MamdaniModel, data: &Observations, config: &GaConfig) -> Result<GaOutcome> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pop = initial_population(model, config.population, &mut rng);
    evolve_with(model, data, config, pop, &mut rng)
}

/// Runs the generational loop from a caller-supplied population.
pub fn evolve(model: &MamdaniModel, data: &Observations, config: &GaConfig, population: Vec<Chromosome>) -> Result<GaOutcome> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    evolve_with(model, data, config, population, &mut rng)
}

fn evolve_with(
    model: &MamdaniModel,
    data: &Observations,
    config: &GaConfig,
    mut pop: Vec<Chromosome>,
    rng: &mut ChaCha8Rng,
) -> Result<GaOutcome> {
    if data.is_empty() {
        return Err(Error::invalid("empty training data"));
    }
    let n_genes = centers(model).len();
    if pop.len() != config.population || pop.iter().any(|c| c.0.len() != n_genes) {
        return Err(Error::invalid("population does not match config or model"));
    }
    let start = Instant::now();
    let bounds = center_bounds(model);
    let evaluate = |pop: &[Chromosome]| -> Vec<f64> { pop.par_iter().map(|c| fitness(model, c, data)).collect() };

    let mut fit = evaluate(&pop);
    let mut curve = Vec::with_capacity(config.generations);
    for _ in 0..config.generations {
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| fit[b].total_cmp(&fit[a]).then(a.cmp(&b)));

        let mut next: Vec<Chromosome> = order[..config.elite_count].iter().map(|&i| pop[i].clone()).collect();
        while next.len() < config.population {
            let p1 = &pop[tournament(&fit, config.tournament_size, rng)];
            let p2 = &pop[tournament(&fit, config.tournament_size, rng)];
            let (mut c1, mut c2) = crossover(p1, p2, rng);
            mutate(&mut c1, &bounds, config.mutation_rate, rng);
            mutate(&mut c2, &bounds, config.mutation_rate, rng);
            next.push(c1);
            if next.len() < config.population {
                next.push(c2);
            }
        }
        pop = next;
        fit = evaluate(&pop);
        curve.push(fit.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }

    let best = (0..pop.len()).fold(0, |b, i| if fit[i] > fit[b] { i } else { b });
    Ok(GaOutcome {
        model: with_centers(model, &pop[best].0),
        best_fitness: curve,
        population: pop,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

fn tournament(fit: &[f64], size: usize, rng: &mut impl Rng) -> usize {
    let mut best = rng.gen_range(0..fit.len());
    for _ in 1..size {
        let c = rng.gen_range(0..fit.len());
        if fit[c] > fit[best] {
            best = c;
        }
    }
    best
}

/// One-point crossover; the cut lies strictly inside the chromosome.
fn crossover(a: &Chromosome, b: &Chromosome, rng: &mut impl Rng) -> (Chromosome, Chromosome) {
    let n = a.0.len();
    if n < 2 {
        return (a.clone(), b.clone());
    }
    let cut = rng.gen_range(1..n);
    let mut c1 = a.0[..cut].to_vec();
    c1.extend_from_slice(&b.0[cut..]);
    let mut c2 = b.0[..cut].to_vec();
    c2.extend_from_slice(&a.0[cut..]);
    (Chromosome(c1), Chromosome(c2))
}

/// Re-initialises each gene with probability `rate`.
fn mutate(c: &mut Chromosome, bounds: &[(f64, f64)], rate: f64, rng: &mut impl Rng) {
    for (g, &(lo, hi)) in c.0.iter_mut().zip(bounds) {
        if rng.gen::<f64>() < rate {
            *g = rng.gen_range(lo..=hi);
        }
    }
}
