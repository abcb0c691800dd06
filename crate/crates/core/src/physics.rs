//! Mass-spring-damper voxel mechanics on a heightmap, integrated with
//! semi-implicit Euler.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphology::{Morphology, SpringKind};
use crate::terrain::Terrain;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsParams {
    /// Control step, seconds.
    pub dt: f64,
    pub substeps_per_control_step: u32,
    /// Nominal voxel side, meters.
    pub voxel_side: f64,
    pub spring_stiffness: f64,
    pub spring_damping: f64,
    pub mass_per_node: f64,
    pub max_actuation_ratio: f64,
    pub side_length_clamp: (f64, f64),
    pub gravity: f64,
    pub friction_coefficient: f64,
    pub penetration_tolerance: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        let mass = 1.0;
        // 5 Hz natural frequency, damping ratio 0.3
        let omega = 2.0 * std::f64::consts::PI * 5.0;
        let stiffness = omega * omega * mass;
        PhysicsParams {
            dt: 1.0 / 60.0,
            substeps_per_control_step: 10,
            voxel_side: 1.0,
            spring_stiffness: stiffness,
            spring_damping: 2.0 * 0.3 * (stiffness * mass).sqrt(),
            mass_per_node: mass,
            max_actuation_ratio: 0.2,
            side_length_clamp: (0.7, 1.3),
            gravity: 9.81,
            friction_coefficient: 0.8,
            penetration_tolerance: 0.01,
        }
    }
}

impl PhysicsParams {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.side_length_clamp;
        let bad = |m: &str| Err(Error::InvalidArgument(format!("physics: {m}")));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if self.substeps_per_control_step < 1 {
            return bad("substeps_per_control_step must be >= 1");
        }
        if !(self.voxel_side > 0.0 && self.mass_per_node > 0.0) {
            return bad("voxel_side and mass_per_node must be positive");
        }
        if !(self.spring_stiffness > 0.0 && self.spring_damping >= 0.0) {
            return bad("spring_stiffness must be positive and spring_damping non-negative");
        }
        if !(0.0 < lo && lo < 1.0 && hi > 1.0) {
            return bad("side_length_clamp must satisfy 0 < min < 1 < max");
        }
        let r = self.max_actuation_ratio;
        if !(r > 0.0 && r < (1.0 - lo).min(hi - 1.0)) {
            return bad("max_actuation_ratio must lie in (0, min(1 - min_ratio, max_ratio - 1))");
        }
        if !(self.gravity >= 0.0
            && self.friction_coefficient >= 0.0
            && self.penetration_tolerance >= 0.0)
        {
            return bad(
                "gravity, friction_coefficient and penetration_tolerance must be non-negative",
            );
        }
        Ok(())
    }

    /// Rest length of an actuated edge spring: `L (1 - r a)`, so `a = +1` is
    /// the strongest contraction and `a = -1` the strongest expansion.
    pub fn edge_rest_length(&self, actuation: f64) -> f64 {
        self.voxel_side * (1.0 - self.max_actuation_ratio * actuation)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub mass_positions: Vec<[f64; 2]>,
    pub mass_velocities: Vec<[f64; 2]>,
    pub held_actuation: Vec<f64>,
    /// Ground contact of each mass during the last control step.
    pub in_contact: Vec<bool>,
    pub step_index: u64,
    pub time: f64,
    /// Number of out-of-range actuation values that were clamped.
    pub clamped_actuations: u64,
}

impl SimState {
    /// Places the undeformed robot at rest with its left edge at `x_left` and
    /// its lowest mass `clearance` meters above the highest terrain point under
    /// its footprint.
    pub fn spawn(
        morphology: &Morphology,
        terrain: &Terrain,
        params: &PhysicsParams,
        x_left: f64,
        clearance: f64,
    ) -> Self {
        let side = params.voxel_side;
        let width = morphology.shape().width() as f64 * side;
        let mut ground = terrain
            .surface(x_left)
            .0
            .max(terrain.surface(x_left + width).0);
        for &(x, y) in terrain.control_points() {
            if x > x_left && x < x_left + width {
                ground = ground.max(y);
            }
        }
        let rows = morphology.shape().height();
        let positions = (0..morphology.n_masses())
            .map(|m| {
                let (c, r) = morphology.lattice_point(m);
                [
                    x_left + c as f64 * side,
                    ground + clearance + (rows - r) as f64 * side,
                ]
            })
            .collect();
        SimState {
            mass_positions: positions,
            mass_velocities: vec![[0.0; 2]; morphology.n_masses()],
            held_actuation: vec![0.0; morphology.n_voxels()],
            in_contact: vec![false; morphology.n_masses()],
            step_index: 0,
            time: 0.0,
            clamped_actuations: 0,
        }
    }

    pub fn center_of_mass(&self) -> [f64; 2] {
        let n = self.mass_positions.len() as f64;
        let (sx, sy) = self
            .mass_positions
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
        [sx / n, sy / n]
    }

    pub fn kinetic_energy(&self, params: &PhysicsParams) -> f64 {
        0.5 * params.mass_per_node
            * self
                .mass_velocities
                .iter()
                .map(|v| v[0] * v[0] + v[1] * v[1])
                .sum::<f64>()
    }

    /// Restarts the clock without touching the mechanical state.
    pub fn reset_clock(&mut self) {
        self.step_index = 0;
        self.time = 0.0;
    }

    pub fn is_finite(&self) -> bool {
        self.mass_positions
            .iter()
            .chain(&self.mass_velocities)
            .all(|p| p[0].is_finite() && p[1].is_finite())
    }
}

/// Sets the held actuation of one voxel. Values outside `[-1, 1]` (or NaN)
/// are clamped and counted in `clamped_actuations`.
pub fn apply_actuation(state: &mut SimState, voxel: usize, a: f64) -> Result<()> {
    let len = state.held_actuation.len();
    let slot = state
        .held_actuation
        .get_mut(voxel)
        .ok_or(Error::IndexOutOfRange { index: voxel, len })?;
    if (-1.0..=1.0).contains(&a) {
        *slot = a;
    } else {
        state.clamped_actuations += 1;
        *slot = if a.is_nan() { 0.0 } else { a.clamp(-1.0, 1.0) };
    }
    Ok(())
}

/// Current rest length of every spring, given the held actuation.
fn rest_lengths(
    morphology: &Morphology,
    state: &SimState,
    params: &PhysicsParams,
    out: &mut Vec<f64>,
) {
    out.clear();
    out.extend(morphology.springs().iter().map(|s| {
        let edge = params.edge_rest_length(state.held_actuation[s.voxel]);
        match s.kind {
            SpringKind::Edge => edge,
            SpringKind::Diagonal => edge * std::f64::consts::SQRT_2,
        }
    }));
}

/// Advances the simulation by one control step of `params.dt`.
pub fn physics_step(
    state: &mut SimState,
    morphology: &Morphology,
    terrain: &Terrain,
    params: &PhysicsParams,
) -> Result<()> {
    let substeps = params.substeps_per_control_step.max(1);
    let h = params.dt / substeps as f64;
    let inv_m = 1.0 / params.mass_per_node;
    let k = params.spring_stiffness;
    let c = params.spring_damping;
    let mut rest = Vec::with_capacity(morphology.springs().len());
    rest_lengths(morphology, state, params, &mut rest);
    let mut forces = vec![[0.0f64; 2]; state.mass_positions.len()];
    state.in_contact.iter_mut().for_each(|c| *c = false);

    for _ in 0..substeps {
        forces
            .iter_mut()
            .for_each(|f| *f = [0.0, -params.gravity * params.mass_per_node]);
        let pos = &state.mass_positions;
        let vel = &state.mass_velocities;
        for (s, &l0) in morphology.springs().iter().zip(&rest) {
            let dx = pos[s.b][0] - pos[s.a][0];
            let dy = pos[s.b][1] - pos[s.a][1];
            let len = (dx * dx + dy * dy).sqrt();
            if len <= f64::EPSILON {
                continue;
            }
            let (ux, uy) = (dx / len, dy / len);
            let rel_v = (vel[s.b][0] - vel[s.a][0]) * ux + (vel[s.b][1] - vel[s.a][1]) * uy;
            let f = k * (len - l0) + c * rel_v;
            forces[s.a][0] += f * ux;
            forces[s.a][1] += f * uy;
            forces[s.b][0] -= f * ux;
            forces[s.b][1] -= f * uy;
        }
        for ((p, v), f) in state
            .mass_positions
            .iter_mut()
            .zip(state.mass_velocities.iter_mut())
            .zip(&forces)
        {
            v[0] += f[0] * inv_m * h;
            v[1] += f[1] * inv_m * h;
            p[0] += v[0] * h;
            p[1] += v[1] * h;
        }
        enforce_side_clamp(state, morphology, params);
        resolve_ground(state, terrain, params);
    }

    state.step_index += 1;
    state.time = state.step_index as f64 * params.dt;
    if !state.is_finite() {
        return Err(Error::SimulationDiverged {
            step: state.step_index,
        });
    }
    Ok(())
}

const CLAMP_ITERATIONS: usize = 3;

/// Projects spring lengths back into `[min, max] x nominal`. Position
/// correction is split evenly between the two masses and the relative
/// velocity along the spring is removed.
fn enforce_side_clamp(state: &mut SimState, morphology: &Morphology, params: &PhysicsParams) {
    let (lo, hi) = params.side_length_clamp;
    let side = params.voxel_side;
    for _ in 0..CLAMP_ITERATIONS {
        let mut clean = true;
        for s in morphology.springs() {
            let nominal = match s.kind {
                SpringKind::Edge => side,
                SpringKind::Diagonal => side * std::f64::consts::SQRT_2,
            };
            let pa = state.mass_positions[s.a];
            let pb = state.mass_positions[s.b];
            let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
            let len = (dx * dx + dy * dy).sqrt();
            if len <= f64::EPSILON {
                continue;
            }
            let target = len.clamp(lo * nominal, hi * nominal);
            if target == len {
                continue;
            }
            clean = false;
            let (ux, uy) = (dx / len, dy / len);
            let half = 0.5 * (len - target);
            state.mass_positions[s.a] = [pa[0] + half * ux, pa[1] + half * uy];
            state.mass_positions[s.b] = [pb[0] - half * ux, pb[1] - half * uy];
            let va = state.mass_velocities[s.a];
            let vb = state.mass_velocities[s.b];
            let rel = (vb[0] - va[0]) * ux + (vb[1] - va[1]) * uy;
            let moving_out = (len > target && rel > 0.0) || (len < target && rel < 0.0);
            if moving_out {
                let half_rel = 0.5 * rel;
                state.mass_velocities[s.a] = [va[0] + half_rel * ux, va[1] + half_rel * uy];
                state.mass_velocities[s.b] = [vb[0] - half_rel * ux, vb[1] - half_rel * uy];
            }
        }
        if clean {
            break;
        }
    }
}

/// Point-vs-heightmap contact: penetrating masses are pushed out along the
/// surface normal, their inward normal velocity is removed and the tangential
/// velocity is reduced by Coulomb friction.
fn resolve_ground(state: &mut SimState, terrain: &Terrain, params: &PhysicsParams) {
    let mu = params.friction_coefficient;
    for ((p, v), contact) in state
        .mass_positions
        .iter_mut()
        .zip(state.mass_velocities.iter_mut())
        .zip(state.in_contact.iter_mut())
    {
        let (ground, slope) = terrain.surface(p[0]);
        if p[1] >= ground {
            continue;
        }
        *contact = true;
        let norm = (1.0 + slope * slope).sqrt();
        let (nx, ny) = (-slope / norm, 1.0 / norm);
        let depth = (ground - p[1]) * ny;
        p[0] += depth * nx;
        p[1] += depth * ny;
        let (ground_after, _) = terrain.surface(p[0]);
        if p[1] < ground_after {
            p[1] = ground_after;
        }
        let vn = v[0] * nx + v[1] * ny;
        if vn < 0.0 {
            let tx = v[0] - vn * nx;
            let ty = v[1] - vn * ny;
            let vt = (tx * tx + ty * ty).sqrt();
            let scale = if vt > 0.0 {
                (1.0 - mu * (-vn) / vt).max(0.0)
            } else {
                0.0
            };
            v[0] = tx * scale;
            v[1] = ty * scale;
        }
    }
}
