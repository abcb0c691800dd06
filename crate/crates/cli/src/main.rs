use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use vsr_core::controller::{ControllerFamily, GenotypeLayout};
use vsr_core::episode::EpisodeOptions;
use vsr_core::experiments::{self, Evaluator};
use vsr_core::plan::ExperimentPlan;
use vsr_core::record;

#[derive(Parser)]
#[command(
    name = "vsr",
    version,
    about = "Evolve and analyse voxel-based soft robot controllers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve controllers from scratch, one run per seed.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Also write trajectory.csv and attention_frames.csv for the best
        /// genotype on the ablation evaluation terrain.
        #[arg(long)]
        trace: bool,
    },
    /// Re-evaluate evolved genotypes on the plan's held-out terrains.
    Reassess {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        genotype: GenotypeArg,
    },
    /// Freeze attention at each whole-second snapshot and measure velocity.
    Ablate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        genotype: GenotypeArg,
    },
    /// Transfer the attention module to `finetune_shape` and re-train the rest.
    Finetune {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        genotype: GenotypeArg,
    },
    /// Evolve slow-attention controllers and log the best (alpha, eta).
    Meta {
        #[command(flatten)]
        common: Common,
    },
    /// Gather run directories into long-format CSVs with per-x summaries.
    Plotdata {
        /// Directory holding `<plan>/<seed>/` results.
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    plan: PathBuf,
    /// Results root; each run writes to `<out>/<plan>/<seed>/`.
    #[arg(long)]
    out: PathBuf,
    /// Run only this seed instead of the plan's seed list.
    #[arg(long)]
    seed: Option<u64>,
    /// Concurrent fitness evaluations.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    n_evals: Option<usize>,
    #[arg(long)]
    t_final: Option<f64>,
}

#[derive(Args)]
struct GenotypeArg {
    /// Genotype file; defaults to `<out>/<plan>/<seed>/best_genotype.txt`.
    #[arg(long)]
    genotype: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ExperimentPlan> {
        let plan = ExperimentPlan::load(&self.plan)?;
        let plan = plan
            .with_overrides(self.seed, self.n_evals, self.t_final)
            .with_context(|| format!("applying overrides to {}", self.plan.display()))?;
        if self.jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        Ok(plan)
    }

    fn run_dir(&self, plan_name: &str, seed: u64) -> Result<PathBuf> {
        let dir = self.out.join(plan_name).join(seed.to_string());
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }
}

impl GenotypeArg {
    fn load(
        &self,
        common: &Common,
        plan: &ExperimentPlan,
        seed: u64,
        layout: &GenotypeLayout,
    ) -> Result<Vec<f64>> {
        let path = match &self.genotype {
            Some(p) => p.clone(),
            None => common
                .out
                .join(&plan.name)
                .join(seed.to_string())
                .join(record::GENOTYPE_FILE),
        };
        record::read_genotype_for(&path, layout)
            .with_context(|| format!("loading genotype {}", path.display()))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evolve { common, trace } => cmd_evolve(&common, trace),
        Command::Reassess { common, genotype } => cmd_reassess(&common, &genotype),
        Command::Ablate { common, genotype } => cmd_ablate(&common, &genotype),
        Command::Finetune { common, genotype } => cmd_finetune(&common, &genotype),
        Command::Meta { common } => cmd_meta(&common),
        Command::Plotdata { runs, out } => {
            let files = record::write_plot_bundle(&runs, &out)?;
            for f in files {
                println!("{}", out.join(f).display());
            }
            Ok(())
        }
    }
}

fn progress(label: &str, seed: u64, generation: u64, evals: u64, best: f64, median: f64) {
    println!(
        "{label} seed={seed} gen={generation} evals={evals} best={best:.6} median={median:.6}"
    );
}

fn write_run(
    dir: &Path,
    layout: &GenotypeLayout,
    run: &vsr_core::evolution::RunRecord,
) -> Result<()> {
    record::write_evals(&dir.join(record::EVALS_FILE), &run.evals)?;
    record::write_summary(&dir.join(record::SUMMARY_FILE), &run.generations)?;
    record::write_genotype(&dir.join(record::GENOTYPE_FILE), layout, &run.best_genotype)?;
    Ok(())
}

fn cmd_evolve(common: &Common, trace: bool) -> Result<()> {
    let plan = common.load()?;
    let evaluator = plan.evaluator()?;
    for &seed in &plan.seeds {
        let dir = common.run_dir(&plan.name, seed)?;
        info!("evolving {} seed {seed} into {}", plan.name, dir.display());
        let (_, run) = experiments::evolve(
            &evaluator,
            plan.evolution_config(seed),
            common.jobs,
            |snap| {
                let s = snap.summary;
                progress(
                    &plan.name,
                    seed,
                    s.generation,
                    s.evals,
                    s.best_fitness,
                    s.median_fitness,
                );
            },
        )?;
        write_run(&dir, &evaluator.layout(), &run)?;
        if trace {
            write_trace(
                &evaluator,
                &run.best_genotype,
                plan.ablation_eval_seed,
                &dir,
            )?;
        }
    }
    Ok(())
}

fn write_trace(
    evaluator: &Evaluator,
    genotype: &[f64],
    terrain_seed: u64,
    dir: &Path,
) -> Result<()> {
    let has_attention = evaluator.spec.family.has_attention();
    let result = evaluator.episode(
        genotype,
        terrain_seed,
        &EpisodeOptions {
            record_trajectory: true,
            record_attention: has_attention,
            ..Default::default()
        },
    )?;
    record::write_trajectory(
        &dir.join(record::TRAJECTORY_FILE),
        evaluator.n_voxels(),
        &result.trajectory,
    )?;
    if has_attention {
        record::write_attention_frames(&dir.join(record::FRAMES_FILE), &result.frames)?;
    }
    Ok(())
}

fn cmd_reassess(common: &Common, genotype: &GenotypeArg) -> Result<()> {
    let plan = common.load()?;
    let evaluator = plan.evaluator()?;
    for &seed in &plan.seeds {
        let g = genotype.load(common, &plan, seed, &evaluator.layout())?;
        let v = evaluator.reassess(&g, &plan.reassess_seeds, common.jobs)?;
        let dir = common.run_dir(&plan.name, seed)?;
        record::write_reassess(&dir.join(record::REASSESS_FILE), &plan.reassess_seeds, &v)?;
        println!(
            "{} seed={seed} reassessed on {} terrains, median={:.6}",
            plan.name,
            v.len(),
            vsr_core::stats::median(&v)
        );
    }
    Ok(())
}

fn cmd_ablate(common: &Common, genotype: &GenotypeArg) -> Result<()> {
    let plan = common.load()?;
    let evaluator = plan.evaluator()?;
    for &seed in &plan.seeds {
        let g = genotype.load(common, &plan, seed, &evaluator.layout())?;
        let ablation = evaluator.ablate_frozen_attention(
            &g,
            plan.ablation_snapshot_seed,
            plan.ablation_eval_seed,
            common.jobs,
        )?;
        let dir = common.run_dir(&plan.name, seed)?;
        record::write_ablation(&dir.join(record::ABLATION_FILE), &ablation)?;
        println!(
            "{} seed={seed} ablation: {} snapshots, unfrozen={:.6}",
            plan.name,
            ablation.series.len(),
            ablation.unfrozen
        );
    }
    Ok(())
}

fn cmd_finetune(common: &Common, genotype: &GenotypeArg) -> Result<()> {
    let plan = common.load()?;
    let Some(target_shape) = plan.finetune_shape.clone() else {
        bail!("plan {} has no `finetune_shape`", common.plan.display());
    };
    let source = plan.evaluator()?;
    let target = source.with_shape(target_shape)?;
    let label = format!("{}-finetune", plan.name);
    for &seed in &plan.seeds {
        let g = genotype.load(common, &plan, seed, &source.layout())?;
        let outcome = experiments::fine_tune(
            &g,
            source.n_voxels(),
            &target,
            plan.finetune_config(seed),
            common.jobs,
        )?;
        for gen in &outcome.generations {
            println!(
                "{label} seed={seed} gen={} evals={} best={:.6} attention={}",
                gen.generation,
                gen.evals,
                gen.best_fitness,
                &gen.attention_hash[..16]
            );
        }
        let dir = common.run_dir(&label, seed)?;
        write_run(&dir, &target.layout(), &outcome.record)?;
        record::write_finetune(&dir.join(record::FINETUNE_FILE), &outcome.generations)?;
    }
    Ok(())
}

fn cmd_meta(common: &Common) -> Result<()> {
    let plan = common.load()?;
    if plan.spec.family != ControllerFamily::SlowAttention {
        bail!(
            "meta needs `family = \"slow-attention\"` in [controller], plan {} has {}",
            common.plan.display(),
            plan.spec.family
        );
    }
    let evaluator = plan.evaluator()?;
    for &seed in &plan.seeds {
        let (_, run, rows) = experiments::meta_evolve_slow_attention(
            &evaluator,
            plan.evolution_config(seed),
            common.jobs,
        )?;
        for r in &rows {
            println!(
                "{} seed={seed} gen={} evals={} best={:.6} alpha={:.6} eta={:.6}",
                plan.name, r.generation, r.evals, r.best_fitness, r.alpha, r.eta
            );
        }
        let dir = common.run_dir(&plan.name, seed)?;
        write_run(&dir, &evaluator.layout(), &run)?;
        record::write_alpha_eta(&dir.join(record::ALPHA_ETA_FILE), &rows)?;
    }
    Ok(())
}
