//! On-disk formats: CSV result files, genotype files and plot-data bundles.
//!
//! Every CSV has a header row, LF line endings and floats written with
//! Rust's shortest round-trip `Display`, so rewriting a file from the same
//! data is byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use crate::controller::GenotypeLayout;
use crate::episode::{AttentionFrame, TrajectoryRow};
use crate::error::{Error, Result};
use crate::evolution::{EvalRow, GenerationSummary};
use crate::experiments::{Ablation, AlphaEtaRow, FineTuneGeneration};
use crate::stats;

pub const EVALS_FILE: &str = "evals.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const GENOTYPE_FILE: &str = "best_genotype.txt";
pub const REASSESS_FILE: &str = "reassess.csv";
pub const ABLATION_FILE: &str = "ablation.csv";
pub const FINETUNE_FILE: &str = "finetune.csv";
pub const ALPHA_ETA_FILE: &str = "alpha_eta.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const FRAMES_FILE: &str = "attention_frames.csv";

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn write_table(
    path: &Path,
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn f(x: f64) -> String {
    format!("{x}")
}

pub fn write_evals(path: &Path, rows: &[EvalRow]) -> Result<()> {
    write_table(
        path,
        &header(&[
            "eval_index",
            "generation",
            "slot",
            "birth_eval_index",
            "terrain_seed",
            "fitness",
        ]),
        rows.iter().map(|r| {
            vec![
                r.eval_index.to_string(),
                r.generation.to_string(),
                r.slot.to_string(),
                r.birth_eval_index.to_string(),
                r.terrain_seed.to_string(),
                f(r.fitness),
            ]
        }),
    )
}

pub fn write_summary(path: &Path, rows: &[GenerationSummary]) -> Result<()> {
    write_table(
        path,
        &header(&[
            "generation",
            "evals",
            "best_fitness",
            "median_fitness",
            "best_birth_eval_index",
        ]),
        rows.iter().map(|r| {
            vec![
                r.generation.to_string(),
                r.evals.to_string(),
                f(r.best_fitness),
                f(r.median_fitness),
                r.best_birth_eval_index.to_string(),
            ]
        }),
    )
}

pub fn write_reassess(path: &Path, seeds: &[u64], velocities: &[f64]) -> Result<()> {
    if seeds.len() != velocities.len() {
        return Err(Error::InvalidArgument(format!(
            "{} reassessment seeds but {} results",
            seeds.len(),
            velocities.len()
        )));
    }
    write_table(
        path,
        &header(&["terrain_seed", "velocity_x"]),
        seeds
            .iter()
            .zip(velocities)
            .map(|(s, v)| vec![s.to_string(), f(*v)]),
    )
}

pub fn write_ablation(path: &Path, ablation: &Ablation) -> Result<()> {
    write_table(
        path,
        &header(&["snapshot_time", "velocity_x", "unfrozen_velocity_x"]),
        ablation
            .series
            .iter()
            .map(|&(t, v)| vec![f(t), f(v), f(ablation.unfrozen)]),
    )
}

pub fn write_finetune(path: &Path, rows: &[FineTuneGeneration]) -> Result<()> {
    write_table(
        path,
        &header(&["generation", "evals", "best_fitness", "attention_hash"]),
        rows.iter().map(|r| {
            vec![
                r.generation.to_string(),
                r.evals.to_string(),
                f(r.best_fitness),
                r.attention_hash.clone(),
            ]
        }),
    )
}

pub fn write_alpha_eta(path: &Path, rows: &[AlphaEtaRow]) -> Result<()> {
    write_table(
        path,
        &header(&["generation", "evals", "best_fitness", "alpha", "eta"]),
        rows.iter().map(|r| {
            vec![
                r.generation.to_string(),
                r.evals.to_string(),
                f(r.best_fitness),
                f(r.alpha),
                f(r.eta),
            ]
        }),
    )
}

pub fn write_trajectory(path: &Path, n_voxels: usize, rows: &[TrajectoryRow]) -> Result<()> {
    let mut head = header(&["step", "time", "com_x", "com_y"]);
    head.extend((0..n_voxels).map(|i| format!("area_{i}")));
    head.extend((0..n_voxels).map(|i| format!("actuation_{i}")));
    write_table(
        path,
        &head,
        rows.iter().map(|r| {
            let mut row = vec![r.step.to_string(), f(r.time), f(r.com[0]), f(r.com[1])];
            row.extend(r.area_ratio.iter().map(|&v| f(v)));
            row.extend(r.actuation.iter().map(|&v| f(v)));
            row
        }),
    )
}

pub fn write_attention_frames(path: &Path, frames: &[AttentionFrame]) -> Result<()> {
    let mut head = header(&["time", "voxel"]);
    for r in 0..4 {
        for c in 0..4 {
            head.push(format!("a{r}{c}"));
        }
    }
    head.extend(header(&[
        "touch",
        "velocity_x",
        "velocity_y",
        "area",
        "actuation",
    ]));
    write_table(
        path,
        &head,
        frames.iter().map(|fr| {
            let mut row = vec![f(fr.time), fr.voxel.to_string()];
            row.extend(fr.attention.iter().flatten().map(|&v| f(v)));
            row.extend(fr.inputs.iter().map(|&v| f(v)));
            row.push(f(fr.actuation));
            row
        }),
    )
}

/// Layout descriptor on the first line, then one value per line with 17
/// significant digits.
pub fn write_genotype(path: &Path, layout: &GenotypeLayout, genotype: &[f64]) -> Result<()> {
    layout.check(genotype)?;
    let mut text = layout.descriptor();
    text.push('\n');
    for v in genotype {
        text.push_str(&format!("{v:.16e}\n"));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a genotype file, returning its descriptor line and values.
pub fn read_genotype(path: &Path) -> Result<(String, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let descriptor = lines
        .next()
        .filter(|l| l.starts_with("layout "))
        .ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            message: "first line must be a layout descriptor".into(),
        })?
        .to_string();
    let mut values = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            path: path.display().to_string(),
            message: format!("line {}: not a number: {line:?}", k + 2),
        })?;
        values.push(v);
    }
    Ok((descriptor, values))
}

/// Reads a genotype file and checks it against `layout`.
pub fn read_genotype_for(path: &Path, layout: &GenotypeLayout) -> Result<Vec<f64>> {
    let (descriptor, values) = read_genotype(path)?;
    layout.check(&values)?;
    if descriptor != layout.descriptor() {
        log::warn!(
            "{}: descriptor {descriptor:?} differs from expected {:?}",
            path.display(),
            layout.descriptor()
        );
    }
    Ok(values)
}

/// One long-format observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub condition: String,
    pub seed: u64,
    pub x: f64,
    pub y: f64,
}

/// Across-seed statistics for one `(condition, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSummary {
    pub condition: String,
    pub x: f64,
    pub median: f64,
    pub std: f64,
    pub n: usize,
}

/// Groups rows by `(condition, x)` and computes median and sample standard
/// deviation of `y` over seeds. Output is sorted by condition, then x.
pub fn summarize(rows: &[PlotRow]) -> Vec<PlotSummary> {
    let mut sorted: Vec<&PlotRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.condition.cmp(&b.condition).then(a.x.total_cmp(&b.x)));
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len()
            && sorted[j].condition == sorted[i].condition
            && sorted[j].x == sorted[i].x
        {
            j += 1;
        }
        let ys: Vec<f64> = sorted[i..j].iter().map(|r| r.y).collect();
        out.push(PlotSummary {
            condition: sorted[i].condition.clone(),
            x: sorted[i].x,
            median: stats::median(&ys),
            std: stats::std_dev(&ys),
            n: ys.len(),
        });
        i = j;
    }
    out
}

/// Names of the plot-data series and the files they come from.
const BUNDLES: &[(&str, &str, &str, &str)] = &[
    ("fitness_vs_evals", SUMMARY_FILE, "evals", "best_fitness"),
    ("reassessment", REASSESS_FILE, "terrain_seed", "velocity_x"),
    ("ablation", ABLATION_FILE, "snapshot_time", "velocity_x"),
    ("finetune", FINETUNE_FILE, "evals", "best_fitness"),
    ("alpha_eta", ALPHA_ETA_FILE, "evals", "alpha"),
];

/// A discovered result directory `<runs>/<condition>/<seed>/`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunDir {
    pub condition: String,
    pub seed: u64,
    pub path: PathBuf,
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if entry
            .file_type()
            .map_err(|e| Error::io(entry.path(), e))?
            .is_dir()
        {
            out.push(entry.path());
        }
    }
    out.sort();
    Ok(out)
}

/// Lists run directories; a run directory is any numeric child of a
/// condition directory.
pub fn discover_runs(runs_dir: &Path) -> Result<Vec<RunDir>> {
    let mut runs = Vec::new();
    for cond in sorted_entries(runs_dir)? {
        let Some(condition) = cond
            .file_name()
            .and_then(|s| s.to_str())
            .map(str::to_string)
        else {
            continue;
        };
        for seed_dir in sorted_entries(&cond)? {
            let seed = seed_dir
                .file_name()
                .and_then(|s| s.to_str())
                .and_then(|s| s.parse().ok());
            if let Some(seed) = seed {
                runs.push(RunDir {
                    condition: condition.clone(),
                    seed,
                    path: seed_dir,
                });
            }
        }
    }
    Ok(runs)
}

fn read_xy(path: &Path, x_col: &str, y_col: &str) -> Result<Vec<(f64, f64)>> {
    let parse_err = |message: String| Error::Parse {
        path: path.display().to_string(),
        message,
    };
    let mut rdr = csv::Reader::from_path(path)?;
    let head = rdr.headers()?.clone();
    let find = |name: &str| {
        head.iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(format!("missing column {name:?}")))
    };
    let (xi, yi) = (find(x_col)?, find(y_col)?);
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(format!("row {}: bad number in column {i}", k + 2)))
        };
        out.push((num(xi)?, num(yi)?));
    }
    Ok(out)
}

/// Collected long-format rows for every bundle, keyed by bundle name.
pub fn collect_plot_rows(runs_dir: &Path) -> Result<Vec<(&'static str, Vec<PlotRow>)>> {
    let runs = discover_runs(runs_dir)?;
    let mut bundles: Vec<(&'static str, Vec<PlotRow>)> =
        BUNDLES.iter().map(|b| (b.0, Vec::new())).collect();
    let mut found = 0usize;
    for run in &runs {
        for (k, &(name, file, x_col, y_col)) in BUNDLES.iter().enumerate() {
            let path = run.path.join(file);
            if !path.is_file() {
                continue;
            }
            found += 1;
            let mut push = |condition: String, pairs: Vec<(f64, f64)>| {
                bundles[k].1.extend(pairs.into_iter().map(|(x, y)| PlotRow {
                    condition: condition.clone(),
                    seed: run.seed,
                    x,
                    y,
                }));
            };
            if name == "alpha_eta" {
                push(
                    format!("{}:alpha", run.condition),
                    read_xy(&path, x_col, "alpha")?,
                );
                push(
                    format!("{}:eta", run.condition),
                    read_xy(&path, x_col, "eta")?,
                );
            } else {
                push(run.condition.clone(), read_xy(&path, x_col, y_col)?);
            }
        }
    }
    if found == 0 {
        return Err(Error::InvalidArgument(format!(
            "no run records found under {}",
            runs_dir.display()
        )));
    }
    Ok(bundles)
}

/// Writes `<name>.csv` (condition, seed, x, y) and `<name>_summary.csv`
/// (condition, x, median, std, n) for every bundle with data. Returns the
/// written file names.
pub fn write_plot_bundle(runs_dir: &Path, out_dir: &Path) -> Result<Vec<String>> {
    let bundles = collect_plot_rows(runs_dir)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for (name, rows) in bundles {
        if rows.is_empty() {
            continue;
        }
        let long = format!("{name}.csv");
        write_table(
            &out_dir.join(&long),
            &header(&["condition", "seed", "x", "y"]),
            rows.iter()
                .map(|r| vec![r.condition.clone(), r.seed.to_string(), f(r.x), f(r.y)]),
        )?;
        let summary = format!("{name}_summary.csv");
        write_table(
            &out_dir.join(&summary),
            &header(&["condition", "x", "median", "std", "n"]),
            summarize(&rows)
                .into_iter()
                .map(|s| vec![s.condition, f(s.x), f(s.median), f(s.std), s.n.to_string()]),
        )?;
        written.push(long);
        written.push(summary);
    }
    Ok(written)
}
