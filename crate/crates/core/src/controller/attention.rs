use crate::error::{Error, Result};
use crate::sensing::{one_hot_encode, SensorReading, N_SENSORS};

use super::GenotypeLayout;

/// Attention matrix over the sensor channels; rows and columns are ordered
/// (touch, vx, vy, area).
pub type Mat4 = [[f64; N_SENSORS]; N_SENSORS];

/// Query/key parameters shared by every voxel. The full query weight matrix
/// of voxel `i` is `h_i w_q^T`, so only the voxel's own input column reaches
/// the queries and keys.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    pub w_q: Vec<f64>,
    pub w_k: Vec<f64>,
    pub b_q: Vec<f64>,
    pub b_k: Vec<f64>,
}

impl AttentionParams {
    pub fn from_slice(theta: &[f64], d: usize) -> Self {
        assert_eq!(theta.len(), 4 * d, "attention segment must hold 4d values");
        AttentionParams {
            w_q: theta[..d].to_vec(),
            w_k: theta[d..2 * d].to_vec(),
            b_q: theta[2 * d..3 * d].to_vec(),
            b_k: theta[3 * d..].to_vec(),
        }
    }

    pub fn d(&self) -> usize {
        self.w_q.len()
    }

    pub fn write_into(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.w_q);
        out.extend_from_slice(&self.w_k);
        out.extend_from_slice(&self.b_q);
        out.extend_from_slice(&self.b_k);
    }

    /// Compact form: with `Q_r = s_r w_q + b_q` and `K_c = s_c w_k + b_k`,
    /// `Q_r . K_c = s_r s_c (w_q.w_k) + s_r (w_q.b_k) + s_c (b_q.w_k) + b_q.b_k`.
    pub(crate) fn kernel(&self) -> AttentionKernel {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        AttentionKernel {
            wq_wk: dot(&self.w_q, &self.w_k),
            wq_bk: dot(&self.w_q, &self.b_k),
            bq_wk: dot(&self.b_q, &self.w_k),
            bq_bk: dot(&self.b_q, &self.b_k),
            inv_sqrt_d: 1.0 / (self.d() as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AttentionKernel {
    wq_wk: f64,
    wq_bk: f64,
    bq_wk: f64,
    bq_bk: f64,
    inv_sqrt_d: f64,
}

impl AttentionKernel {
    pub(crate) fn matrix(&self, s: &SensorReading) -> Mat4 {
        std::array::from_fn(|r| {
            std::array::from_fn(|c| {
                let score =
                    s[r] * s[c] * self.wq_wk + s[r] * self.wq_bk + s[c] * self.bq_wk + self.bq_bk;
                (score * self.inv_sqrt_d).tanh()
            })
        })
    }
}

/// `A = tanh(Q K^T / sqrt(d))` for voxel `voxel` of an `N_SENSORS x n`
/// row-major input matrix `x`.
pub fn attention_matrix(x: &[f64], n: usize, voxel: usize, attn: &AttentionParams) -> Result<Mat4> {
    if voxel >= n {
        return Err(Error::IndexOutOfRange {
            index: voxel,
            len: n,
        });
    }
    if x.len() != N_SENSORS * n {
        return Err(Error::InvalidArgument(format!(
            "input matrix has {} entries, expected {}",
            x.len(),
            N_SENSORS * n
        )));
    }
    let s: SensorReading = std::array::from_fn(|r| x[r * n + voxel]);
    Ok(attn.kernel().matrix(&s))
}

/// Downstream single-layer network on `Y = A X` with `X = s h_i^T`. Only
/// column `voxel` of `Y` is non-zero, so only the weights at `r * n + voxel`
/// contribute.
pub fn downstream_forward(
    a: &Mat4,
    s: &SensorReading,
    voxel: usize,
    n: usize,
    weights: &[f64],
    bias: f64,
) -> f64 {
    let mut z = bias;
    for r in 0..N_SENSORS {
        let y: f64 = (0..N_SENSORS).map(|c| a[r][c] * s[c]).sum();
        z += weights[r * n + voxel] * y;
    }
    z.tanh()
}

/// Actuation of voxel `voxel` under the (plain) attention controller.
pub fn attention_forward(
    s: &SensorReading,
    voxel: usize,
    layout: &GenotypeLayout,
    genotype: &[f64],
) -> Result<f64> {
    Ok(attention_forward_with_matrix(s, voxel, layout, genotype)?.0)
}

pub(crate) fn attention_forward_with_matrix(
    s: &SensorReading,
    voxel: usize,
    layout: &GenotypeLayout,
    genotype: &[f64],
) -> Result<(f64, Mat4)> {
    layout.check(genotype)?;
    if !layout.family.has_attention() {
        return Err(Error::InvalidArgument(format!(
            "{} genotype has no attention module",
            layout.family
        )));
    }
    let n = layout.n;
    let x = one_hot_encode(s, voxel, n)?;
    let attn = AttentionParams::from_slice(&genotype[layout.attention_range()], layout.d);
    let a = attention_matrix(x.as_row_major(), n, voxel, &attn)?;
    let bias = genotype[layout.bias_range()][0];
    Ok((
        downstream_forward(&a, s, voxel, n, &genotype[layout.weights_range()], bias),
        a,
    ))
}

/// Blended attention `A'(k) = alpha A + eta A'(k-1)` (and `A'(0) = A`),
/// kept per voxel.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowAttentionState {
    pub previous: Vec<Mat4>,
    pub k: u64,
    pub alpha: f64,
    pub eta: f64,
}

impl SlowAttentionState {
    pub fn new(n_voxels: usize, alpha: f64, eta: f64) -> Self {
        SlowAttentionState {
            previous: vec![[[0.0; N_SENSORS]; N_SENSORS]; n_voxels],
            k: 0,
            alpha,
            eta,
        }
    }
}

/// Blends the current matrix of `voxel` into the running one and returns the
/// effective matrix. The step counter `k` is advanced separately with
/// [`SlowAttentionState::advance`] once every voxel has been updated.
pub fn slow_attention_update(a: &Mat4, voxel: usize, state: &mut SlowAttentionState) -> Mat4 {
    let effective = if state.k == 0 {
        *a
    } else {
        let prev = &state.previous[voxel];
        std::array::from_fn(|r| {
            std::array::from_fn(|c| state.alpha * a[r][c] + state.eta * prev[r][c])
        })
    };
    state.previous[voxel] = effective;
    effective
}

impl SlowAttentionState {
    pub fn advance(&mut self) {
        self.k += 1;
    }
}

/// `(alpha, eta) = (min(|g_alpha|, 1), min(|g_eta|, 1))`.
pub fn decode_slow_attention_genes(gene_alpha: f64, gene_eta: f64) -> (f64, f64) {
    (gene_alpha.abs().min(1.0), gene_eta.abs().min(1.0))
}
