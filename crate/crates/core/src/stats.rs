//! Summary statistics and the Mann-Whitney U rank test.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Median; the mean of the two central values for even lengths. NaN for an
/// empty slice.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub exact: bool,
}

/// Combined sample size up to which the exact null distribution is used.
pub const EXACT_LIMIT: usize = 20;

/// Two-sided Mann-Whitney U test with midranks for ties. For combined size
/// up to [`EXACT_LIMIT`] the p-value comes from the exact permutation
/// distribution of the (tied) ranks; above it, from the tie-corrected normal
/// approximation with continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument(
            "Mann-Whitney U needs two non-empty samples".into(),
        ));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument(
            "Mann-Whitney U input contains NaN".into(),
        ));
    }
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let doubled = doubled_midranks(a, b);
    let rank_sum_a2: u64 = doubled[..na].iter().sum();
    // 2U = 2R - na (na + 1)
    let u2 = rank_sum_a2 as i64 - (na * (na + 1)) as i64;
    let u = u2 as f64 / 2.0;
    let center2 = (na * nb) as i64; // 2 * E[U]

    if n <= EXACT_LIMIT {
        let dist = rank_sum_distribution(&doubled, na);
        let observed = (u2 - center2).abs();
        let (mut extreme, mut total) = (0u128, 0u128);
        for (sum2, count) in dist {
            let dev = (sum2 as i64 - (na * (na + 1)) as i64 - center2).abs();
            total += count;
            if dev >= observed {
                extreme += count;
            }
        }
        return Ok(MannWhitney {
            u,
            p_value: extreme as f64 / total as f64,
            exact: true,
        });
    }

    let mut sorted: Vec<f64> = a.iter().chain(b).copied().collect();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut k = 0;
    while k < n {
        let mut j = k;
        while j + 1 < n && sorted[j + 1] == sorted[k] {
            j += 1;
        }
        let t = (j - k + 1) as f64;
        tie_term += t * t * t - t;
        k = j + 1;
    }
    let (naf, nbf, nf) = (na as f64, nb as f64, n as f64);
    let var = naf * nbf / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let dev = (u - naf * nbf / 2.0).abs();
        let z = (dev - 0.5).max(0.0) / var.sqrt();
        erfc(z / std::f64::consts::SQRT_2).min(1.0)
    };
    Ok(MannWhitney {
        u,
        p_value,
        exact: false,
    })
}

/// Twice the midrank of every observation, `a` first then `b`.
fn doubled_midranks(a: &[f64], b: &[f64]) -> Vec<u64> {
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut order: Vec<usize> = (0..all.len()).collect();
    order.sort_by(|&i, &j| all[i].total_cmp(&all[j]));
    let mut ranks = vec![0u64; all.len()];
    let mut k = 0;
    while k < order.len() {
        let mut j = k;
        while j + 1 < order.len() && all[order[j + 1]] == all[order[k]] {
            j += 1;
        }
        // ranks k+1 ..= j+1, doubled midrank = (k + 1) + (j + 1)
        let r2 = (k + j + 2) as u64;
        for &idx in &order[k..=j] {
            ranks[idx] = r2;
        }
        k = j + 1;
    }
    ranks
}

/// Number of size-`m` subsets of `ranks` achieving each (doubled) rank sum.
fn rank_sum_distribution(ranks: &[u64], m: usize) -> Vec<(u64, u128)> {
    let max_sum: u64 = ranks.iter().sum();
    // ways[c][s]: subsets of size c with sum s
    let mut ways = vec![vec![0u128; max_sum as usize + 1]; m + 1];
    ways[0][0] = 1;
    for &r in ranks {
        for c in (1..=m).rev() {
            for s in (r as usize..=max_sum as usize).rev() {
                ways[c][s] += ways[c - 1][s - r as usize];
            }
        }
    }
    ways[m]
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0)
        .map(|(s, &w)| (s as u64, w))
        .collect()
}
