//! Naive matrix-arithmetic reference implementations shared by test targets.
#![allow(dead_code)]

use rand::Rng as _;
use vsr_core::controller::{AttentionParams, ControllerFamily, ControllerSpec, GenotypeLayout};
use vsr_core::rng::Rng;

pub type M = Vec<Vec<f64>>;

pub fn zeros(r: usize, c: usize) -> M {
    vec![vec![0.0; c]; r]
}

pub fn matmul(a: &M, b: &M) -> M {
    let mut out = zeros(a.len(), b[0].len());
    for i in 0..a.len() {
        for j in 0..b[0].len() {
            for k in 0..b.len() {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn transpose(a: &M) -> M {
    let mut out = zeros(a[0].len(), a.len());
    for i in 0..a.len() {
        for j in 0..a[0].len() {
            out[j][i] = a[i][j];
        }
    }
    out
}

/// X: 4 x n with `s` in column `i`.
pub fn one_hot(s: &[f64], i: usize, n: usize) -> M {
    let mut x = zeros(s.len(), n);
    for r in 0..s.len() {
        x[r][i] = s[r];
    }
    x
}

/// W = h_i w^T (n x d), then X W + 1 b^T.
pub fn projection(x: &M, i: usize, w: &[f64], b: &[f64]) -> M {
    let n = x[0].len();
    let mut big_w = zeros(n, w.len());
    big_w[i] = w.to_vec();
    let mut q = matmul(x, &big_w);
    for row in &mut q {
        for (v, bb) in row.iter_mut().zip(b) {
            *v += bb;
        }
    }
    q
}

pub fn oracle_attention(x: &M, i: usize, p: &AttentionParams) -> M {
    let q = projection(x, i, &p.w_q, &p.b_q);
    let k = projection(x, i, &p.w_k, &p.b_k);
    let scale = (p.w_q.len() as f64).sqrt();
    matmul(&q, &transpose(&k))
        .into_iter()
        .map(|row| row.into_iter().map(|v| (v / scale).tanh()).collect())
        .collect()
}

/// tanh of the flattened (row-major) matrix dotted with `w`, plus `b`.
pub fn dense(m: &M, w: &[f64], b: f64) -> f64 {
    let flat: Vec<f64> = m.iter().flatten().copied().collect();
    assert_eq!(flat.len(), w.len());
    (flat.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b).tanh()
}

pub fn random_vec(rng: &mut Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-scale..scale)).collect()
}

pub fn random_case(
    rng: &mut Rng,
    family: ControllerFamily,
) -> (GenotypeLayout, Vec<f64>, [f64; 4], usize) {
    let n = rng.random_range(1..=20);
    let layout = GenotypeLayout::new(&ControllerSpec::with_family(family), n);
    let g = random_vec(rng, layout.len(), 2.0);
    let s = [
        f64::from(rng.random_range(0..2u8)),
        rng.random_range(0.0..1.0),
        rng.random_range(0.0..1.0),
        rng.random_range(0.0..1.0),
    ];
    (layout, g, s, rng.random_range(0..n))
}
