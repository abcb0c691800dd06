//! One simulated locomotion episode: spawn, settle, then alternate controller
//! ticks (every `k_act` control steps) with physics steps.

use serde::{Deserialize, Serialize};

use crate::controller::{Controller, ControllerState, Mat4};
use crate::error::{Error, Result};
use crate::morphology::Morphology;
use crate::physics::{apply_actuation, physics_step, PhysicsParams, SimState};
use crate::rng;
use crate::sensing::{read_raw_sensors, SensorConfig, AREA};
use crate::terrain::{Terrain, TerrainParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskConfig {
    /// Simulated seconds over which velocity is measured.
    pub t_final: f64,
    pub span: f64,
    pub avg_bump_height: f64,
    pub avg_bump_distance: f64,
    pub start_plateau: f64,
    /// x of the robot's left edge at spawn.
    pub spawn_x: f64,
    /// Gap between the lowest mass and the ground at spawn.
    pub spawn_clearance: f64,
    /// Passive settling time before the fitness clock starts.
    pub settle_time: f64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        let terrain = TerrainParams::default();
        TaskConfig {
            t_final: 30.0,
            span: terrain.span,
            avg_bump_height: terrain.avg_bump_height,
            avg_bump_distance: terrain.avg_bump_distance,
            start_plateau: terrain.start_plateau,
            spawn_x: 1.0,
            spawn_clearance: 0.01,
            settle_time: 1.0,
        }
    }
}

impl TaskConfig {
    pub fn terrain(&self) -> TerrainParams {
        TerrainParams {
            span: self.span,
            avg_bump_height: self.avg_bump_height,
            avg_bump_distance: self.avg_bump_distance,
            start_plateau: self.start_plateau,
        }
    }

    pub fn validate(&self, robot_width: f64) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidArgument("t_final must be positive".into()));
        }
        if !(self.settle_time >= 0.0 && self.spawn_clearance >= 0.0 && self.spawn_x >= 0.0) {
            return Err(Error::InvalidArgument(
                "settle_time, spawn_clearance and spawn_x must be non-negative".into(),
            ));
        }
        if self.spawn_x + robot_width > self.start_plateau {
            return Err(Error::InvalidArgument(format!(
                "robot spanning [{}, {}] does not fit on the {} m start plateau",
                self.spawn_x,
                self.spawn_x + robot_width,
                self.start_plateau
            )));
        }
        Ok(())
    }
}

/// Everything about an evaluation that does not change between genotypes.
#[derive(Debug, Clone)]
pub struct Setup {
    pub morphology: Morphology,
    pub physics: PhysicsParams,
    pub sensors: SensorConfig,
    pub task: TaskConfig,
}

#[derive(Debug, Clone, Default)]
pub struct EpisodeOptions {
    pub record_trajectory: bool,
    pub record_attention: bool,
    /// Capture every voxel's effective attention matrix at each whole second.
    pub capture_snapshots: bool,
    /// Pin attention matrices (ablation).
    pub frozen_attention: Option<Vec<Mat4>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub step: u64,
    pub time: f64,
    pub com: [f64; 2],
    pub area_ratio: Vec<f64>,
    pub actuation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionFrame {
    pub time: f64,
    pub voxel: usize,
    pub attention: Mat4,
    pub inputs: [f64; 4],
    pub actuation: f64,
}

#[derive(Debug, Clone, Default)]
pub struct EpisodeResult {
    /// Average x velocity of the center of mass; 0 if the simulation diverged.
    pub velocity_x: f64,
    pub diverged_at: Option<u64>,
    pub clamped_actuations: u64,
    pub trajectory: Vec<TrajectoryRow>,
    pub frames: Vec<AttentionFrame>,
    /// `snapshots[t][v]`: attention of voxel `v` at second `t`.
    pub snapshots: Vec<Vec<Mat4>>,
}

/// Spawns the robot on `terrain` and lets it settle with zero actuation; the
/// returned state has its clock reset to zero.
pub fn spawn_settled(setup: &Setup, terrain: &Terrain) -> Result<SimState> {
    let mut state = SimState::spawn(
        &setup.morphology,
        terrain,
        &setup.physics,
        setup.task.spawn_x,
        setup.task.spawn_clearance,
    );
    let steps = (setup.task.settle_time / setup.physics.dt).round() as u64;
    for _ in 0..steps {
        physics_step(&mut state, &setup.morphology, terrain, &setup.physics)?;
    }
    state.reset_clock();
    Ok(state)
}

pub fn run_episode(
    setup: &Setup,
    controller: &Controller,
    terrain: &Terrain,
    noise_seed: u64,
    options: &EpisodeOptions,
) -> Result<EpisodeResult> {
    let morphology = &setup.morphology;
    let physics = &setup.physics;
    let mut result = EpisodeResult::default();
    let mut ctrl_state: ControllerState = match &options.frozen_attention {
        Some(frozen) => controller.frozen_state(frozen.clone())?,
        None => controller.initial_state(),
    };
    let mut state = match spawn_settled(setup, terrain) {
        Ok(s) => s,
        Err(Error::SimulationDiverged { step }) => {
            result.diverged_at = Some(step);
            return Ok(result);
        }
        Err(e) => return Err(e),
    };
    let mut noise = rng::rng_from(noise_seed);
    let k_act = u64::from(controller.spec().k_act);
    let steps = (setup.task.t_final / physics.dt).round() as u64;
    let n_snapshots = setup.task.t_final.floor() as u64;
    let mut current_attention: Vec<Mat4> = Vec::new();
    let x0 = state.center_of_mass()[0];

    if options.record_trajectory {
        result.trajectory.push(trajectory_row(&state, setup)?);
    }
    for step in 0..steps {
        if step % k_act == 0 {
            let outputs = controller.tick(
                &state,
                morphology,
                physics.voxel_side,
                &setup.sensors,
                &mut ctrl_state,
                &mut noise,
            )?;
            current_attention.clear();
            for (v, o) in outputs.iter().enumerate() {
                apply_actuation(&mut state, v, o.actuation)?;
                if let Some(a) = o.attention {
                    current_attention.push(a);
                    if options.record_attention {
                        result.frames.push(AttentionFrame {
                            time: state.time,
                            voxel: v,
                            attention: a,
                            inputs: o.inputs,
                            actuation: o.actuation,
                        });
                    }
                }
            }
        }
        if options.capture_snapshots
            && (result.snapshots.len() as u64) < n_snapshots
            && step == (result.snapshots.len() as f64 / physics.dt).round() as u64
        {
            result.snapshots.push(current_attention.clone());
        }
        match physics_step(&mut state, morphology, terrain, physics) {
            Ok(()) => {}
            Err(Error::SimulationDiverged { step }) => {
                log::warn!("simulation diverged at step {step}; scoring 0");
                result.diverged_at = Some(step);
                result.velocity_x = 0.0;
                result.clamped_actuations = state.clamped_actuations;
                return Ok(result);
            }
            Err(e) => return Err(e),
        }
        if options.record_trajectory {
            result.trajectory.push(trajectory_row(&state, setup)?);
        }
    }
    result.velocity_x = (state.center_of_mass()[0] - x0) / setup.task.t_final;
    result.clamped_actuations = state.clamped_actuations;
    Ok(result)
}

fn trajectory_row(state: &SimState, setup: &Setup) -> Result<TrajectoryRow> {
    let area_ratio = (0..setup.morphology.n_voxels())
        .map(|v| Ok(read_raw_sensors(state, &setup.morphology, setup.physics.voxel_side, v)?[AREA]))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectoryRow {
        step: state.step_index,
        time: state.time,
        com: state.center_of_mass(),
        area_ratio,
        actuation: state.held_actuation.clone(),
    })
}
