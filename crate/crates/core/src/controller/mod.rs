//! Parameter-shared per-voxel controllers and the flat genotype codec.
//!
//! Every voxel runs the same network with the same parameter vector; the
//! only thing that tells voxels apart is the one-hot position in their input.
//!
//! Genotype layout (fixed order):
//! `[w_q | w_k | b_q | b_k | downstream weights (row-major) | bias(es) | gene_alpha, gene_eta]`,
//! where the attention segment is absent for the MLP families and the two
//! trailing genes exist only for slow attention. Downstream weights act on the
//! flattened input matrix in row-major order, so the weight of sensor `r` in
//! voxel column `j` sits at `r * n + j`.

mod attention;
mod mlp;
mod runtime;

pub use attention::{
    attention_forward, attention_matrix, decode_slow_attention_genes, downstream_forward,
    slow_attention_update, AttentionParams, Mat4, SlowAttentionState,
};
pub use mlp::{mlp_comm_forward, mlp_forward, CommOutput};
pub use runtime::{Controller, ControllerState, VoxelOutput};

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sensing::N_SENSORS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerFamily {
    Attention,
    SlowAttention,
    Mlp,
    MlpComm,
}

impl ControllerFamily {
    pub fn has_attention(self) -> bool {
        matches!(
            self,
            ControllerFamily::Attention | ControllerFamily::SlowAttention
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ControllerFamily::Attention => "attention",
            ControllerFamily::SlowAttention => "slow-attention",
            ControllerFamily::Mlp => "mlp",
            ControllerFamily::MlpComm => "mlp-comm",
        }
    }
}

impl fmt::Display for ControllerFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControllerFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "attention" => ControllerFamily::Attention,
            "slow-attention" => ControllerFamily::SlowAttention,
            "mlp" => ControllerFamily::Mlp,
            "mlp-comm" => ControllerFamily::MlpComm,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown controller family {other:?}"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerSpec {
    pub family: ControllerFamily,
    /// Query/key dimension.
    pub d: usize,
    /// Physics control steps between controller invocations.
    pub k_act: u32,
    /// Message values exchanged with each neighbor (MLP-Comm only).
    pub comm_channels: usize,
}

impl Default for ControllerSpec {
    fn default() -> Self {
        ControllerSpec {
            family: ControllerFamily::Attention,
            d: 8,
            k_act: 20,
            comm_channels: 4,
        }
    }
}

impl ControllerSpec {
    pub fn with_family(family: ControllerFamily) -> Self {
        ControllerSpec {
            family,
            ..ControllerSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_act < 1 || self.d < 1 {
            return Err(Error::InvalidArgument("k_act and d must be >= 1".into()));
        }
        if self.family == ControllerFamily::MlpComm && self.comm_channels != 4 {
            return Err(Error::InvalidArgument(
                "mlp-comm exchanges exactly one value per neighbor (comm_channels = 4)".into(),
            ));
        }
        Ok(())
    }
}

/// Length of the genotype for a controller driving `n` voxels.
pub fn param_count(spec: &ControllerSpec, n: usize) -> usize {
    GenotypeLayout::new(spec, n).len()
}

/// Segment boundaries of a flat genotype.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenotypeLayout {
    pub family: ControllerFamily,
    pub d: usize,
    pub n: usize,
    attn_len: usize,
    inputs: usize,
    outputs: usize,
    genes: usize,
}

impl GenotypeLayout {
    pub fn new(spec: &ControllerSpec, n: usize) -> Self {
        let (attn_len, inputs, outputs, genes) = match spec.family {
            ControllerFamily::Attention => (4 * spec.d, N_SENSORS, 1, 0),
            ControllerFamily::SlowAttention => (4 * spec.d, N_SENSORS, 1, 2),
            ControllerFamily::Mlp => (0, N_SENSORS, 1, 0),
            ControllerFamily::MlpComm => (0, N_SENSORS + 4, 5, 0),
        };
        GenotypeLayout {
            family: spec.family,
            d: spec.d,
            n,
            attn_len,
            inputs,
            outputs,
            genes,
        }
    }

    pub fn len(&self) -> usize {
        self.genes_range().end
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn attention_range(&self) -> Range<usize> {
        0..self.attn_len
    }

    /// Downstream weights, `outputs` rows of `inputs * n` entries each.
    pub fn weights_range(&self) -> Range<usize> {
        let start = self.attn_len;
        start..start + self.outputs * self.inputs * self.n
    }

    pub fn bias_range(&self) -> Range<usize> {
        let start = self.weights_range().end;
        start..start + self.outputs
    }

    /// The downstream module: weights and biases.
    pub fn downstream_range(&self) -> Range<usize> {
        self.weights_range().start..self.bias_range().end
    }

    pub fn genes_range(&self) -> Range<usize> {
        let start = self.bias_range().end;
        start..start + self.genes
    }

    pub fn check(&self, genotype: &[f64]) -> Result<()> {
        if genotype.len() != self.len() {
            return Err(Error::GenotypeLength {
                expected: self.len(),
                found: genotype.len(),
            });
        }
        Ok(())
    }

    /// One-line descriptor used as the header of genotype files.
    pub fn descriptor(&self) -> String {
        let mut out = format!("layout family={} n={}", self.family, self.n);
        if self.attn_len > 0 {
            let d = self.d;
            out.push_str(&format!(" d={d} w_q={d} w_k={d} b_q={d} b_k={d}"));
        }
        out.push_str(&format!(
            " weights={}x{} bias={}",
            self.outputs,
            self.inputs * self.n,
            self.outputs
        ));
        if self.genes > 0 {
            out.push_str(" gene_alpha=1 gene_eta=1");
        }
        out.push_str(&format!(" p={}", self.len()));
        out
    }
}

/// A genotype split into its named parts.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedGenotype {
    pub layout: GenotypeLayout,
    pub attention: Option<AttentionParams>,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub genes: Vec<f64>,
}

impl DecodedGenotype {
    pub fn decode(layout: GenotypeLayout, genotype: &[f64]) -> Result<Self> {
        layout.check(genotype)?;
        let attention = layout
            .family
            .has_attention()
            .then(|| AttentionParams::from_slice(&genotype[layout.attention_range()], layout.d));
        Ok(DecodedGenotype {
            layout,
            attention,
            weights: genotype[layout.weights_range()].to_vec(),
            biases: genotype[layout.bias_range()].to_vec(),
            genes: genotype[layout.genes_range()].to_vec(),
        })
    }

    pub fn encode(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.layout.len());
        if let Some(attn) = &self.attention {
            attn.write_into(&mut out);
        }
        out.extend_from_slice(&self.weights);
        out.extend_from_slice(&self.biases);
        out.extend_from_slice(&self.genes);
        out
    }
}
