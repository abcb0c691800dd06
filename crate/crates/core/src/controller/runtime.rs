use crate::error::{Error, Result};
use crate::morphology::{Direction, Morphology};
use crate::physics::SimState;
use crate::rng::Rng;
use crate::sensing::{add_noise, read_raw_sensors, soft_normalize, SensorConfig, SensorReading};

use super::attention::{downstream_forward, AttentionKernel};
use super::{
    decode_slow_attention_genes, mlp_comm_forward, mlp_forward, slow_attention_update,
    AttentionParams, ControllerFamily, ControllerSpec, GenotypeLayout, Mat4, SlowAttentionState,
};

/// A genotype bound to a controller family and voxel count.
#[derive(Debug, Clone)]
pub struct Controller {
    spec: ControllerSpec,
    layout: GenotypeLayout,
    genotype: Vec<f64>,
    kernel: Option<AttentionKernel>,
    alpha_eta: Option<(f64, f64)>,
}

/// Per-evaluation controller memory.
#[derive(Debug, Clone)]
pub struct ControllerState {
    ticks: u64,
    slow: Option<SlowAttentionState>,
    /// Messages each voxel emitted at the previous tick, by direction.
    messages: Vec<[f64; 4]>,
    frozen: Option<Vec<Mat4>>,
}

impl ControllerState {
    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    pub fn messages(&self) -> &[[f64; 4]] {
        &self.messages
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelOutput {
    pub actuation: f64,
    /// The normalized, noisy reading the controller consumed.
    pub inputs: SensorReading,
    /// Effective attention matrix (attention families only).
    pub attention: Option<Mat4>,
}

impl Controller {
    pub fn new(spec: ControllerSpec, n_voxels: usize, genotype: &[f64]) -> Result<Self> {
        spec.validate()?;
        let layout = GenotypeLayout::new(&spec, n_voxels);
        layout.check(genotype)?;
        let kernel = spec.family.has_attention().then(|| {
            AttentionParams::from_slice(&genotype[layout.attention_range()], spec.d).kernel()
        });
        let alpha_eta = (spec.family == ControllerFamily::SlowAttention).then(|| {
            let g = &genotype[layout.genes_range()];
            decode_slow_attention_genes(g[0], g[1])
        });
        Ok(Controller {
            spec,
            layout,
            genotype: genotype.to_vec(),
            kernel,
            alpha_eta,
        })
    }

    pub fn spec(&self) -> &ControllerSpec {
        &self.spec
    }

    pub fn layout(&self) -> &GenotypeLayout {
        &self.layout
    }

    /// Decoded `(alpha, eta)` for slow attention.
    pub fn alpha_eta(&self) -> Option<(f64, f64)> {
        self.alpha_eta
    }

    pub fn initial_state(&self) -> ControllerState {
        let n = self.layout.n;
        ControllerState {
            ticks: 0,
            slow: self
                .alpha_eta
                .map(|(a, e)| SlowAttentionState::new(n, a, e)),
            messages: vec![[0.0; 4]; n],
            frozen: None,
        }
    }

    /// State whose attention matrices are pinned to `frozen` (one per voxel).
    pub fn frozen_state(&self, frozen: Vec<Mat4>) -> Result<ControllerState> {
        if self.spec.family != ControllerFamily::Attention {
            return Err(Error::InvalidArgument(format!(
                "attention can only be frozen for the attention family, not {}",
                self.spec.family
            )));
        }
        if frozen.len() != self.layout.n {
            return Err(Error::InvalidArgument(format!(
                "{} frozen matrices for {} voxels",
                frozen.len(),
                self.layout.n
            )));
        }
        let mut state = self.initial_state();
        state.frozen = Some(frozen);
        Ok(state)
    }

    /// Runs one controller invocation for every voxel: sense, normalize, add
    /// noise, encode and forward with the shared genotype. Must be called on
    /// actuation steps only (`step_index` a multiple of `k_act`).
    pub fn tick(
        &self,
        sim: &SimState,
        morphology: &Morphology,
        voxel_side: f64,
        sensors: &SensorConfig,
        state: &mut ControllerState,
        rng: &mut Rng,
    ) -> Result<Vec<VoxelOutput>> {
        if !sim.step_index.is_multiple_of(u64::from(self.spec.k_act)) {
            return Err(Error::Internal(format!(
                "control tick at step {} is not a multiple of k_act = {}",
                sim.step_index, self.spec.k_act
            )));
        }
        let n = self.layout.n;
        if morphology.n_voxels() != n {
            return Err(Error::InvalidArgument(format!(
                "controller built for {n} voxels, morphology has {}",
                morphology.n_voxels()
            )));
        }
        let mut inputs = Vec::with_capacity(n);
        for v in 0..n {
            let raw = read_raw_sensors(sim, morphology, voxel_side, v)?;
            inputs.push(add_noise(
                &soft_normalize(&raw, sensors),
                sensors.noise_sigma,
                rng,
            ));
        }
        let out = match self.spec.family {
            ControllerFamily::Attention | ControllerFamily::SlowAttention => {
                self.attention_tick(&inputs, state)
            }
            ControllerFamily::Mlp => inputs
                .iter()
                .enumerate()
                .map(|(v, s)| {
                    Ok(VoxelOutput {
                        actuation: mlp_forward(s, v, &self.layout, &self.genotype)?,
                        inputs: *s,
                        attention: None,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            ControllerFamily::MlpComm => self.comm_tick(&inputs, morphology, state)?,
        };
        state.ticks += 1;
        Ok(out)
    }

    fn attention_tick(
        &self,
        inputs: &[SensorReading],
        state: &mut ControllerState,
    ) -> Vec<VoxelOutput> {
        let kernel = self.kernel.as_ref().expect("attention family has a kernel");
        let weights = &self.genotype[self.layout.weights_range()];
        let bias = self.genotype[self.layout.bias_range()][0];
        let n = self.layout.n;
        let out = inputs
            .iter()
            .enumerate()
            .map(|(v, s)| {
                let a = match (&state.frozen, &mut state.slow) {
                    (Some(frozen), _) => frozen[v],
                    (None, Some(slow)) => slow_attention_update(&kernel.matrix(s), v, slow),
                    (None, None) => kernel.matrix(s),
                };
                VoxelOutput {
                    actuation: downstream_forward(&a, s, v, n, weights, bias),
                    inputs: *s,
                    attention: Some(a),
                }
            })
            .collect();
        if let Some(slow) = &mut state.slow {
            slow.advance();
        }
        out
    }

    fn comm_tick(
        &self,
        inputs: &[SensorReading],
        morphology: &Morphology,
        state: &mut ControllerState,
    ) -> Result<Vec<VoxelOutput>> {
        // every voxel reads the previous tick's messages before any is replaced
        let previous = std::mem::take(&mut state.messages);
        let mut next = Vec::with_capacity(inputs.len());
        let mut out = Vec::with_capacity(inputs.len());
        for (v, s) in inputs.iter().enumerate() {
            let neighbors = morphology.neighbors(v);
            let incoming: [f64; 4] = std::array::from_fn(|d| {
                neighbors[d].map_or(0.0, |u| previous[u][Direction::ALL[d].opposite().index()])
            });
            let o = mlp_comm_forward(s, &incoming, v, &self.layout, &self.genotype)?;
            next.push(o.outgoing);
            out.push(VoxelOutput {
                actuation: o.actuation,
                inputs: *s,
                attention: None,
            });
        }
        state.messages = next;
        Ok(out)
    }
}
