//! mu + lambda genetic algorithm over flat real genotypes: uniform
//! initialization, tournament selection, Gaussian mutation, extended
//! geometric crossover and merge-and-halve survival. Survivors are
//! re-evaluated on a fresh terrain every generation.

use std::cmp::Ordering;
use std::ops::Range;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, purpose, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    pub n_pop: usize,
    pub n_tour: usize,
    pub sigma_mut: f64,
    /// Noise added by extended geometric crossover.
    pub sigma_mut_crossover: f64,
    pub p_mut: f64,
    /// Total budget of fitness evaluations, re-evaluations included.
    pub n_evals: usize,
    pub master_seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            n_pop: 100,
            n_tour: 5,
            sigma_mut: 0.35,
            sigma_mut_crossover: 0.1,
            p_mut: 0.2,
            n_evals: 30_000,
            master_seed: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(format!("evolution: {m}")));
        if self.n_pop < 2 || !self.n_pop.is_multiple_of(2) {
            return bad(format!("n_pop must be even and >= 2, got {}", self.n_pop));
        }
        if self.n_tour < 1 {
            return bad("n_tour must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.p_mut) {
            return bad(format!("p_mut must lie in [0, 1], got {}", self.p_mut));
        }
        if !(self.sigma_mut >= 0.0 && self.sigma_mut_crossover >= 0.0) {
            return bad("mutation sigmas must be non-negative".into());
        }
        if self.n_evals < self.n_pop {
            return bad(format!(
                "n_evals ({}) must cover at least the initial population ({})",
                self.n_evals, self.n_pop
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genotype: Vec<f64>,
    pub fitness: Option<f64>,
    /// Evaluation index at which this genotype was first evaluated.
    pub birth_eval_index: u64,
}

impl Individual {
    fn score(&self) -> Result<f64> {
        self.fitness
            .ok_or_else(|| Error::Internal("selection met an unevaluated individual".into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub eval_index: u64,
    pub generation: u64,
    pub slot: u64,
    pub birth_eval_index: u64,
    pub fitness: f64,
    pub terrain_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationSummary {
    pub generation: u64,
    /// Evaluations consumed so far, this generation included.
    pub evals: u64,
    pub best_fitness: f64,
    pub median_fitness: f64,
    pub best_birth_eval_index: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunRecord {
    pub evals: Vec<EvalRow>,
    pub generations: Vec<GenerationSummary>,
    pub best_genotype: Vec<f64>,
    pub best_fitness: f64,
}

/// Population state handed to the per-generation callback, sorted best first.
pub struct GenerationSnapshot<'a> {
    pub summary: &'a GenerationSummary,
    pub population: &'a [Individual],
}

/// Where the first generation comes from.
#[derive(Debug, Clone)]
pub enum Initialization {
    /// i.i.d. uniform on `[-1, 1]^len`.
    Uniform { len: usize },
    /// An explicit initial population of exactly `n_pop` genotypes.
    Population(Vec<Vec<f64>>),
}

pub fn init_population(len: usize, n_pop: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    (0..n_pop)
        .map(|_| (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect()
}

/// Draws `n_tour` indices uniformly with replacement and returns the fittest
/// (lowest index on ties).
pub fn tournament_select(population: &[Individual], n_tour: usize, rng: &mut Rng) -> Result<usize> {
    if population.is_empty() {
        return Err(Error::InvalidArgument(
            "tournament on an empty population".into(),
        ));
    }
    let mut best: Option<(usize, f64)> = None;
    for _ in 0..n_tour.max(1) {
        let k = rng.random_range(0..population.len());
        let f = population[k].score()?;
        best = match best {
            Some((bk, bf)) if bf > f || (bf == f && bk < k) => Some((bk, bf)),
            _ => Some((k, f)),
        };
    }
    Ok(best.expect("at least one draw").0)
}

/// `theta + sigma * eps`, `eps ~ N(0, I)`, restricted to `range`.
pub fn gaussian_mutation_in(
    theta: &[f64],
    sigma: f64,
    range: Range<usize>,
    rng: &mut Rng,
) -> Vec<f64> {
    let mut out = theta.to_vec();
    for v in &mut out[range] {
        let eps: f64 = StandardNormal.sample(rng);
        *v += sigma * eps;
    }
    out
}

pub fn gaussian_mutation(theta: &[f64], sigma: f64, rng: &mut Rng) -> Vec<f64> {
    gaussian_mutation_in(theta, sigma, 0..theta.len(), rng)
}

/// `theta1 + alpha (theta2 - theta1) + sigma * eps` with `alpha_i ~ U[-0.5, 1.5]`,
/// restricted to `range`; entries outside it are copied from `theta1`.
pub fn geometric_crossover_in(
    theta1: &[f64],
    theta2: &[f64],
    sigma: f64,
    range: Range<usize>,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    if theta1.len() != theta2.len() {
        return Err(Error::InvalidArgument(format!(
            "crossover parents differ in length ({} vs {})",
            theta1.len(),
            theta2.len()
        )));
    }
    let mut out = theta1.to_vec();
    for i in range {
        let alpha: f64 = rng.random_range(-0.5..=1.5);
        let eps: f64 = StandardNormal.sample(rng);
        out[i] = theta1[i] + alpha * (theta2[i] - theta1[i]) + sigma * eps;
    }
    Ok(out)
}

pub fn geometric_crossover(
    theta1: &[f64],
    theta2: &[f64],
    sigma: f64,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    geometric_crossover_in(theta1, theta2, sigma, 0..theta1.len(), rng)
}

/// Which operator produced an offspring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    Mutation,
    Crossover,
}

/// Builds one offspring: with probability `p_mut` a mutated tournament
/// winner, otherwise the crossover of two tournament winners.
pub fn make_offspring(
    population: &[Individual],
    config: &EvolutionConfig,
    mutable: Range<usize>,
    rng: &mut Rng,
) -> Result<(Vec<f64>, Operator)> {
    if rng.random_bool(config.p_mut) {
        let p = tournament_select(population, config.n_tour, rng)?;
        Ok((
            gaussian_mutation_in(&population[p].genotype, config.sigma_mut, mutable, rng),
            Operator::Mutation,
        ))
    } else {
        let p1 = tournament_select(population, config.n_tour, rng)?;
        let p2 = tournament_select(population, config.n_tour, rng)?;
        Ok((
            geometric_crossover_in(
                &population[p1].genotype,
                &population[p2].genotype,
                config.sigma_mut_crossover,
                mutable,
                rng,
            )?,
            Operator::Crossover,
        ))
    }
}

/// Fitness of a genotype on the terrain identified by the seed. Must be a
/// pure function of its arguments.
pub type FitnessFn<'a> = dyn Fn(&[f64], u64) -> Result<f64> + Sync + 'a;

pub struct Evolution<'a> {
    pub config: EvolutionConfig,
    pub init: Initialization,
    /// Genotype positions that variation may change; the rest is inherited.
    pub mutable: Option<Range<usize>>,
    /// Upper bound on concurrent fitness evaluations.
    pub jobs: usize,
    pub fitness: &'a FitnessFn<'a>,
}

struct Task {
    genotype: Vec<f64>,
    birth: Option<u64>,
    slot: u64,
}

impl<'a> Evolution<'a> {
    pub fn new(config: EvolutionConfig, genotype_len: usize, fitness: &'a FitnessFn<'a>) -> Self {
        Evolution {
            config,
            init: Initialization::Uniform { len: genotype_len },
            mutable: None,
            jobs: 1,
            fitness,
        }
    }

    pub fn run(&self) -> Result<(Individual, RunRecord)> {
        self.run_with(|_| {})
    }

    /// Runs to budget exhaustion, calling `on_generation` after every survival
    /// step (and after the initial evaluation).
    ///
    /// The first generation consumes `n_pop` evaluations; each later one
    /// re-evaluates the `n_pop` parents and evaluates `n_pop` offspring. When
    /// fewer than `2 n_pop` evaluations remain, the last generation shrinks
    /// its offspring count so that the budget is met exactly; if fewer than
    /// `n_pop` remain it evaluates offspring only and parents keep their last
    /// score.
    pub fn run_with(
        &self,
        mut on_generation: impl FnMut(&GenerationSnapshot),
    ) -> Result<(Individual, RunRecord)> {
        let cfg = &self.config;
        cfg.validate()?;
        let initial = match &self.init {
            Initialization::Uniform { len } => {
                let mut rng = rng::rng_from(rng::derive(&[cfg.master_seed, purpose::INIT]));
                init_population(*len, cfg.n_pop, &mut rng)
            }
            Initialization::Population(pop) => {
                if pop.len() != cfg.n_pop {
                    return Err(Error::InvalidArgument(format!(
                        "initial population has {} genotypes, n_pop is {}",
                        pop.len(),
                        cfg.n_pop
                    )));
                }
                pop.clone()
            }
        };
        let len = initial[0].len();
        if initial.iter().any(|g| g.len() != len) || len == 0 {
            return Err(Error::InvalidArgument(
                "initial genotypes must share a non-zero length".into(),
            ));
        }
        let mutable = self.mutable.clone().unwrap_or(0..len);
        if mutable.end > len || mutable.start > mutable.end {
            return Err(Error::InvalidArgument(format!(
                "mutable range {mutable:?} exceeds genotype length {len}"
            )));
        }

        let pool = if self.jobs > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(self.jobs)
                    .build()
                    .map_err(|e| Error::Internal(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };

        let mut record = RunRecord::default();
        let tasks = initial
            .into_iter()
            .enumerate()
            .map(|(slot, genotype)| Task {
                genotype,
                birth: None,
                slot: slot as u64,
            })
            .collect();
        let mut population = self.evaluate(tasks, 0, &mut record, pool.as_ref());
        self.finish_generation(0, &mut population, &mut record, &mut on_generation);

        let mut generation = 0u64;
        while record.evals.len() < cfg.n_evals {
            generation += 1;
            let remaining = cfg.n_evals - record.evals.len();
            let reevaluate = remaining >= cfg.n_pop;
            let n_offspring = if reevaluate {
                (remaining - cfg.n_pop).min(cfg.n_pop)
            } else {
                remaining
            };
            let mut rng = rng::rng_from(rng::derive(&[
                cfg.master_seed,
                purpose::VARIATION,
                generation,
            ]));
            let mut offspring = Vec::with_capacity(n_offspring);
            for _ in 0..n_offspring {
                offspring.push(make_offspring(&population, cfg, mutable.clone(), &mut rng)?.0);
            }

            let mut tasks = Vec::with_capacity(cfg.n_pop + n_offspring);
            let mut kept = Vec::new();
            if reevaluate {
                tasks.extend(
                    population
                        .drain(..)
                        .map(|ind| (ind.genotype, Some(ind.birth_eval_index))),
                );
            } else {
                kept = std::mem::take(&mut population);
            }
            tasks.extend(offspring.into_iter().map(|g| (g, None)));
            let tasks = tasks
                .into_iter()
                .enumerate()
                .map(|(slot, (genotype, birth))| Task {
                    genotype,
                    birth,
                    slot: slot as u64,
                })
                .collect();
            let mut merged = kept;
            merged.extend(self.evaluate(tasks, generation, &mut record, pool.as_ref()));
            population = merged;
            self.finish_generation(generation, &mut population, &mut record, &mut on_generation);
        }

        let best = population[0].clone();
        record.best_genotype = best.genotype.clone();
        record.best_fitness = best.fitness.unwrap_or(0.0);
        Ok((best, record))
    }

    fn evaluate(
        &self,
        tasks: Vec<Task>,
        generation: u64,
        record: &mut RunRecord,
        pool: Option<&rayon::ThreadPool>,
    ) -> Vec<Individual> {
        let master = self.config.master_seed;
        let score = |t: &Task| {
            let seed = rng::evolution_terrain_seed(master, generation, t.slot);
            let f = match (self.fitness)(&t.genotype, seed) {
                Ok(f) if f.is_finite() => f,
                Ok(f) => {
                    log::warn!(
                        "non-finite fitness {f} (generation {generation}, slot {}); scoring 0",
                        t.slot
                    );
                    0.0
                }
                Err(e) => {
                    log::warn!("fitness evaluation failed (generation {generation}, slot {}): {e}; scoring 0", t.slot);
                    0.0
                }
            };
            (f, seed)
        };
        let scores: Vec<(f64, u64)> = match pool {
            Some(pool) => pool.install(|| tasks.par_iter().map(score).collect()),
            None => tasks.iter().map(score).collect(),
        };
        tasks
            .into_iter()
            .zip(scores)
            .map(|(task, (fitness, terrain_seed))| {
                let eval_index = record.evals.len() as u64;
                let birth = task.birth.unwrap_or(eval_index);
                record.evals.push(EvalRow {
                    eval_index,
                    generation,
                    slot: task.slot,
                    birth_eval_index: birth,
                    fitness,
                    terrain_seed,
                });
                Individual {
                    genotype: task.genotype,
                    fitness: Some(fitness),
                    birth_eval_index: birth,
                }
            })
            .collect()
    }

    fn finish_generation(
        &self,
        generation: u64,
        population: &mut Vec<Individual>,
        record: &mut RunRecord,
        on_generation: &mut impl FnMut(&GenerationSnapshot),
    ) {
        // stable sort: equal fitness and birth keep slot order
        population.sort_by(survival_order);
        population.truncate(self.config.n_pop);
        let fitnesses: Vec<f64> = population
            .iter()
            .map(|i| i.fitness.unwrap_or(0.0))
            .collect();
        let summary = GenerationSummary {
            generation,
            evals: record.evals.len() as u64,
            best_fitness: fitnesses[0],
            median_fitness: crate::stats::median(&fitnesses),
            best_birth_eval_index: population[0].birth_eval_index,
        };
        on_generation(&GenerationSnapshot {
            summary: &summary,
            population,
        });
        record.generations.push(summary);
    }
}

fn survival_order(a: &Individual, b: &Individual) -> Ordering {
    let fa = a.fitness.unwrap_or(f64::NEG_INFINITY);
    let fb = b.fitness.unwrap_or(f64::NEG_INFINITY);
    fb.total_cmp(&fa)
        .then(a.birth_eval_index.cmp(&b.birth_eval_index))
}
