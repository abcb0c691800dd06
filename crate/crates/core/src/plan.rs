//! Experiment plan files (TOML). Every section is optional except
//! `[experiment]`, which must name the robot `shape`; every omitted key takes
//! its default and unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;

use crate::controller::{ControllerFamily, ControllerSpec};
use crate::episode::TaskConfig;
use crate::error::{Error, Result};
use crate::evolution::EvolutionConfig;
use crate::experiments::Evaluator;
use crate::morphology::{parse_shape, GridShape};
use crate::physics::PhysicsParams;
use crate::rng::EVOLUTION_SEED_BIT;
use crate::sensing::SensorConfig;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    experiment: ExperimentSection,
    #[serde(default)]
    task: TaskConfig,
    #[serde(default)]
    physics: PhysicsParams,
    #[serde(default)]
    controller: ControllerSection,
    #[serde(default)]
    evolution: EvolutionSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    name: Option<String>,
    shape: String,
    #[serde(default = "default_runs")]
    runs: u64,
    seeds: Option<Vec<u64>>,
    #[serde(default = "default_reassess_seeds")]
    reassess_seeds: Vec<u64>,
    #[serde(default = "default_ablation_snapshot_seed")]
    ablation_snapshot_seed: u64,
    #[serde(default = "default_ablation_eval_seed")]
    ablation_eval_seed: u64,
    finetune_shape: Option<String>,
    #[serde(default = "default_finetune_n_evals")]
    finetune_n_evals: usize,
}

fn default_runs() -> u64 {
    5
}

fn default_reassess_seeds() -> Vec<u64> {
    (0..10).collect()
}

fn default_ablation_snapshot_seed() -> u64 {
    1000
}

fn default_ablation_eval_seed() -> u64 {
    1001
}

fn default_finetune_n_evals() -> usize {
    10_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ControllerSection {
    family: ControllerFamily,
    d: usize,
    k_act: u32,
    comm_channels: usize,
    noise_sigma: f64,
    area_range: (f64, f64),
    velocity_range: (f64, f64),
}

impl Default for ControllerSection {
    fn default() -> Self {
        let spec = ControllerSpec::default();
        let sensors = SensorConfig::default();
        ControllerSection {
            family: spec.family,
            d: spec.d,
            k_act: spec.k_act,
            comm_channels: spec.comm_channels,
            noise_sigma: sensors.noise_sigma,
            area_range: sensors.area_range,
            velocity_range: sensors.velocity_range,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EvolutionSection {
    n_pop: usize,
    n_tour: usize,
    sigma_mut: f64,
    sigma_mut_crossover: f64,
    p_mut: f64,
    n_evals: usize,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        let c = EvolutionConfig::default();
        EvolutionSection {
            n_pop: c.n_pop,
            n_tour: c.n_tour,
            sigma_mut: c.sigma_mut,
            sigma_mut_crossover: c.sigma_mut_crossover,
            p_mut: c.p_mut,
            n_evals: c.n_evals,
        }
    }
}

/// A fully resolved experiment plan.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub name: String,
    pub shape: GridShape,
    pub spec: ControllerSpec,
    pub sensors: SensorConfig,
    pub physics: PhysicsParams,
    pub task: TaskConfig,
    /// Evolution settings; `master_seed` is set per run from `seeds`.
    pub evolution: EvolutionConfig,
    pub seeds: Vec<u64>,
    pub reassess_seeds: Vec<u64>,
    pub ablation_snapshot_seed: u64,
    pub ablation_eval_seed: u64,
    pub finetune_shape: Option<GridShape>,
    pub finetune_n_evals: usize,
}

impl ExperimentPlan {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let fallback = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "plan".into());
        Self::parse(&text, &fallback).map_err(|e| match e {
            Error::Plan { message, .. } => Error::Plan {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })
    }

    /// Parses plan text; `fallback_name` names the plan when `[experiment]`
    /// has no `name`.
    pub fn parse(text: &str, fallback_name: &str) -> Result<Self> {
        let plan_err = |message: String| Error::Plan {
            path: "<plan>".into(),
            message,
        };
        let file: PlanFile =
            toml::from_str(text).map_err(|e| plan_err(e.to_string().trim_end().to_string()))?;
        let exp = file.experiment;
        let shape = parse_shape(&exp.shape).map_err(|e| plan_err(format!("key `shape`: {e}")))?;
        let finetune_shape = exp
            .finetune_shape
            .as_deref()
            .map(parse_shape)
            .transpose()
            .map_err(|e| plan_err(format!("key `finetune_shape`: {e}")))?;
        let c = file.controller;
        let spec = ControllerSpec {
            family: c.family,
            d: c.d,
            k_act: c.k_act,
            comm_channels: c.comm_channels,
        };
        let sensors = SensorConfig {
            area_range: c.area_range,
            velocity_range: c.velocity_range,
            noise_sigma: c.noise_sigma,
        };
        let e = file.evolution;
        let evolution = EvolutionConfig {
            n_pop: e.n_pop,
            n_tour: e.n_tour,
            sigma_mut: e.sigma_mut,
            sigma_mut_crossover: e.sigma_mut_crossover,
            p_mut: e.p_mut,
            n_evals: e.n_evals,
            master_seed: 0,
        };
        let seeds = exp.seeds.unwrap_or_else(|| (1..=exp.runs).collect());
        let plan = ExperimentPlan {
            name: exp.name.unwrap_or_else(|| fallback_name.to_string()),
            shape,
            spec,
            sensors,
            physics: file.physics,
            task: file.task,
            evolution,
            seeds,
            reassess_seeds: exp.reassess_seeds,
            ablation_snapshot_seed: exp.ablation_snapshot_seed,
            ablation_eval_seed: exp.ablation_eval_seed,
            finetune_shape,
            finetune_n_evals: exp.finetune_n_evals,
        };
        plan.validate().map_err(|e| plan_err(e.to_string()))?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidArgument(
                "experiment needs at least one seed".into(),
            ));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::InvalidArgument(format!(
                "invalid plan name {:?}",
                self.name
            )));
        }
        self.evolution.validate()?;
        let held_out = self
            .reassess_seeds
            .iter()
            .chain([&self.ablation_snapshot_seed, &self.ablation_eval_seed]);
        for &s in held_out {
            if s & EVOLUTION_SEED_BIT != 0 {
                return Err(Error::InvalidArgument(format!(
                    "held-out terrain seed {s} is in the range reserved for evolution (>= 2^63)"
                )));
            }
        }
        self.evaluator()?;
        if let Some(shape) = &self.finetune_shape {
            self.evaluator()?.with_shape(shape.clone())?;
            self.finetune_config(0).validate()?;
        }
        Ok(())
    }

    pub fn evaluator(&self) -> Result<Evaluator> {
        Evaluator::new(
            self.shape.clone(),
            self.spec,
            self.physics,
            self.sensors,
            self.task,
        )
    }

    pub fn evolution_config(&self, master_seed: u64) -> EvolutionConfig {
        EvolutionConfig {
            master_seed,
            ..self.evolution
        }
    }

    pub fn finetune_config(&self, master_seed: u64) -> EvolutionConfig {
        EvolutionConfig {
            n_evals: self.finetune_n_evals,
            master_seed,
            ..self.evolution
        }
    }

    /// Applies command-line overrides and re-validates.
    pub fn with_overrides(
        mut self,
        seed: Option<u64>,
        n_evals: Option<usize>,
        t_final: Option<f64>,
    ) -> Result<Self> {
        if let Some(s) = seed {
            self.seeds = vec![s];
        }
        if let Some(n) = n_evals {
            self.evolution.n_evals = n;
            self.finetune_n_evals = n;
        }
        if let Some(t) = t_final {
            self.task.t_final = t;
        }
        self.validate()?;
        Ok(self)
    }
}
