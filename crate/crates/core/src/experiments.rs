//! Experimental protocols: locomotion fitness, re-assessment on held-out
//! terrains, frozen-attention ablation, cross-morphology fine-tuning and
//! slow-attention meta-evolution.

use rand::Rng as _;
use sha2::{Digest, Sha256};

use crate::controller::{Controller, ControllerFamily, ControllerSpec, GenotypeLayout};
use crate::episode::{run_episode, EpisodeOptions, EpisodeResult, Setup, TaskConfig};
use crate::error::{Error, Result};
use crate::evolution::{
    Evolution, EvolutionConfig, GenerationSnapshot, Individual, Initialization, RunRecord,
};
use crate::morphology::{GridShape, Morphology};
use crate::physics::PhysicsParams;
use crate::rng::{self, purpose};
use crate::sensing::SensorConfig;
use crate::terrain::{generate_terrain, Terrain};

/// A robot body, controller family and task: everything needed to score a
/// genotype.
#[derive(Debug, Clone)]
pub struct Evaluator {
    pub setup: Setup,
    pub spec: ControllerSpec,
}

impl Evaluator {
    pub fn new(
        shape: GridShape,
        spec: ControllerSpec,
        physics: PhysicsParams,
        sensors: SensorConfig,
        task: TaskConfig,
    ) -> Result<Self> {
        spec.validate()?;
        physics.validate()?;
        sensors.validate()?;
        task.validate(shape.width() as f64 * physics.voxel_side)?;
        Ok(Evaluator {
            setup: Setup {
                morphology: Morphology::new(shape),
                physics,
                sensors,
                task,
            },
            spec,
        })
    }

    /// Same evaluator on a different body.
    pub fn with_shape(&self, shape: GridShape) -> Result<Self> {
        Evaluator::new(
            shape,
            self.spec,
            self.setup.physics,
            self.setup.sensors,
            self.setup.task,
        )
    }

    pub fn with_spec(&self, spec: ControllerSpec) -> Result<Self> {
        Evaluator::new(
            self.setup.morphology.shape().clone(),
            spec,
            self.setup.physics,
            self.setup.sensors,
            self.setup.task,
        )
    }

    pub fn n_voxels(&self) -> usize {
        self.setup.morphology.n_voxels()
    }

    pub fn layout(&self) -> GenotypeLayout {
        GenotypeLayout::new(&self.spec, self.n_voxels())
    }

    pub fn genotype_len(&self) -> usize {
        self.layout().len()
    }

    pub fn terrain(&self, seed: u64) -> Result<Terrain> {
        generate_terrain(seed, &self.setup.task.terrain())
    }

    pub fn controller(&self, genotype: &[f64]) -> Result<Controller> {
        Controller::new(self.spec, self.n_voxels(), genotype)
    }

    pub fn episode(
        &self,
        genotype: &[f64],
        terrain_seed: u64,
        options: &EpisodeOptions,
    ) -> Result<EpisodeResult> {
        let controller = self.controller(genotype)?;
        let terrain = self.terrain(terrain_seed)?;
        run_episode(
            &self.setup,
            &controller,
            &terrain,
            rng::noise_seed(terrain_seed),
            options,
        )
    }

    /// Average x velocity of the center of mass over `t_final` on the terrain
    /// generated from `terrain_seed`. A diverged simulation scores 0.
    pub fn locomotion_fitness(&self, genotype: &[f64], terrain_seed: u64) -> Result<f64> {
        let result = self.episode(genotype, terrain_seed, &EpisodeOptions::default())?;
        if let Some(step) = result.diverged_at {
            log::warn!("terrain seed {terrain_seed}: simulation diverged at step {step}");
        }
        Ok(result.velocity_x)
    }

    /// Fitness on each held-out seed, in seed order. Failed evaluations score 0.
    pub fn reassess(&self, genotype: &[f64], seeds: &[u64], jobs: usize) -> Result<Vec<f64>> {
        self.layout().check(genotype)?;
        par_map(jobs, seeds, |&seed| {
            self.locomotion_fitness(genotype, seed).unwrap_or_else(|e| {
                log::warn!("reassessment on seed {seed} failed: {e}; scoring 0");
                0.0
            })
        })
    }

    /// Captures every voxel's attention at each whole second of a reference
    /// run on `snapshot_seed`, then re-runs the episode on `eval_seed` once per
    /// snapshot with the attention pinned to it.
    pub fn ablate_frozen_attention(
        &self,
        genotype: &[f64],
        snapshot_seed: u64,
        eval_seed: u64,
        jobs: usize,
    ) -> Result<Ablation> {
        if self.spec.family != ControllerFamily::Attention {
            return Err(Error::InvalidArgument(format!(
                "ablation needs an attention controller, got {}",
                self.spec.family
            )));
        }
        let reference = self.episode(
            genotype,
            snapshot_seed,
            &EpisodeOptions {
                capture_snapshots: true,
                ..Default::default()
            },
        )?;
        let unfrozen = self.locomotion_fitness(genotype, eval_seed)?;
        let controller = self.controller(genotype)?;
        let terrain = self.terrain(eval_seed)?;
        let times: Vec<usize> = (0..reference.snapshots.len()).collect();
        let frozen = par_map(jobs, &times, |&t| {
            let options = EpisodeOptions {
                frozen_attention: Some(reference.snapshots[t].clone()),
                ..Default::default()
            };
            run_episode(
                &self.setup,
                &controller,
                &terrain,
                rng::noise_seed(eval_seed),
                &options,
            )
            .map(|r| r.velocity_x)
        })?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(Ablation {
            unfrozen,
            series: times.iter().map(|&t| t as f64).zip(frozen).collect(),
        })
    }

    pub fn fitness_fn(&self) -> impl Fn(&[f64], u64) -> Result<f64> + Sync + '_ {
        move |g, seed| self.locomotion_fitness(g, seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ablation {
    /// Fitness with live attention on the evaluation terrain.
    pub unfrozen: f64,
    /// (snapshot time in seconds, fitness with attention frozen at it).
    pub series: Vec<(f64, f64)>,
}

pub(crate) fn par_map<T: Sync, R: Send>(
    jobs: usize,
    items: &[T],
    f: impl Fn(&T) -> R + Sync + Send,
) -> Result<Vec<R>> {
    use rayon::prelude::*;
    if jobs <= 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

/// Evolves a controller from scratch.
pub fn evolve(
    evaluator: &Evaluator,
    config: EvolutionConfig,
    jobs: usize,
    on_generation: impl FnMut(&GenerationSnapshot),
) -> Result<(Individual, RunRecord)> {
    let fitness = evaluator.fitness_fn();
    let mut evo = Evolution::new(config, evaluator.genotype_len(), &fitness);
    evo.jobs = jobs;
    evo.run_with(on_generation)
}

/// Hex SHA-256 of the bit patterns of a genotype segment.
pub fn segment_hash(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FineTuneGeneration {
    pub generation: u64,
    pub evals: u64,
    pub best_fitness: f64,
    pub attention_hash: String,
}

#[derive(Debug, Clone)]
pub struct FineTuneOutcome {
    pub best: Individual,
    pub record: RunRecord,
    pub generations: Vec<FineTuneGeneration>,
}

/// Transfers the attention module of `source` (an attention genotype for any
/// body) to `target` and re-optimizes only the downstream module.
///
/// The initial population holds the transferred genotype plus `n_pop - 1`
/// copies of its attention module with freshly sampled downstream
/// parameters. When the voxel count differs, the transferred genotype also
/// gets a fresh downstream module because the old one does not fit.
pub fn fine_tune(
    source: &[f64],
    source_n: usize,
    target: &Evaluator,
    config: EvolutionConfig,
    jobs: usize,
) -> Result<FineTuneOutcome> {
    if target.spec.family != ControllerFamily::Attention {
        return Err(Error::InvalidArgument(format!(
            "fine-tuning needs an attention controller, got {}",
            target.spec.family
        )));
    }
    let src_layout = GenotypeLayout::new(&target.spec, source_n);
    src_layout.check(source)?;
    let attn = &source[src_layout.attention_range()];
    let layout = target.layout();
    let downstream = layout.downstream_range();
    let frozen_hash = segment_hash(attn);

    let mut rng = rng::rng_from(rng::derive(&[config.master_seed, purpose::FINETUNE_INIT]));
    let mut fresh = || -> Vec<f64> {
        let mut g = attn.to_vec();
        g.extend((0..downstream.len()).map(|_| rng.random_range(-1.0..=1.0)));
        g
    };
    let mut initial = Vec::with_capacity(config.n_pop);
    initial.push(if source_n == target.n_voxels() {
        source.to_vec()
    } else {
        fresh()
    });
    while initial.len() < config.n_pop {
        initial.push(fresh());
    }

    let fitness = target.fitness_fn();
    let mut evo = Evolution::new(config, layout.len(), &fitness);
    evo.init = Initialization::Population(initial);
    evo.mutable = Some(downstream);
    evo.jobs = jobs;
    let mut generations = Vec::new();
    let mut violation = None;
    let (best, record) = evo.run_with(|snap| {
        let attn_range = layout.attention_range();
        if let Some(bad) = snap
            .population
            .iter()
            .find(|ind| segment_hash(&ind.genotype[attn_range.clone()]) != frozen_hash)
        {
            violation.get_or_insert(bad.birth_eval_index);
        }
        generations.push(FineTuneGeneration {
            generation: snap.summary.generation,
            evals: snap.summary.evals,
            best_fitness: snap.summary.best_fitness,
            attention_hash: segment_hash(&snap.population[0].genotype[attn_range]),
        });
    })?;
    if let Some(birth) = violation {
        return Err(Error::Internal(format!(
            "attention segment changed during fine-tuning (individual born at evaluation {birth})"
        )));
    }
    Ok(FineTuneOutcome {
        best,
        record,
        generations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaEtaRow {
    pub generation: u64,
    pub evals: u64,
    pub best_fitness: f64,
    pub alpha: f64,
    pub eta: f64,
}

/// Evolves a slow-attention controller, logging the decoded `(alpha, eta)` of
/// the best individual of every generation.
pub fn meta_evolve_slow_attention(
    evaluator: &Evaluator,
    config: EvolutionConfig,
    jobs: usize,
) -> Result<(Individual, RunRecord, Vec<AlphaEtaRow>)> {
    if evaluator.spec.family != ControllerFamily::SlowAttention {
        return Err(Error::InvalidArgument(format!(
            "meta-evolution needs a slow-attention controller, got {}",
            evaluator.spec.family
        )));
    }
    let genes = evaluator.layout().genes_range();
    let mut rows = Vec::new();
    let (best, record) = evolve(evaluator, config, jobs, |snap| {
        let g = &snap.population[0].genotype[genes.clone()];
        let (alpha, eta) = crate::controller::decode_slow_attention_genes(g[0], g[1]);
        rows.push(AlphaEtaRow {
            generation: snap.summary.generation,
            evals: snap.summary.evals,
            best_fitness: snap.summary.best_fitness,
            alpha,
            eta,
        });
    })?;
    Ok((best, record, rows))
}
