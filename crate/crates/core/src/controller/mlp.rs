use crate::error::{Error, Result};
use crate::sensing::{SensorReading, N_SENSORS};

use super::{ControllerFamily, GenotypeLayout};

fn expect_family(layout: &GenotypeLayout, family: ControllerFamily) -> Result<()> {
    if layout.family != family {
        return Err(Error::InvalidArgument(format!(
            "expected a {family} genotype, got {}",
            layout.family
        )));
    }
    Ok(())
}

/// Communication-less MLP: `tanh(w . flatten(s h_i^T) + b)`.
pub fn mlp_forward(
    s: &SensorReading,
    voxel: usize,
    layout: &GenotypeLayout,
    genotype: &[f64],
) -> Result<f64> {
    expect_family(layout, ControllerFamily::Mlp)?;
    layout.check(genotype)?;
    let n = layout.n;
    if voxel >= n {
        return Err(Error::IndexOutOfRange {
            index: voxel,
            len: n,
        });
    }
    let w = &genotype[layout.weights_range()];
    let mut z = genotype[layout.bias_range()][0];
    for (r, v) in s.iter().enumerate() {
        z += w[r * n + voxel] * v;
    }
    Ok(z.tanh())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommOutput {
    pub actuation: f64,
    /// Values sent to the North, East, South and West neighbors.
    pub outgoing: [f64; 4],
}

/// Message-passing MLP. The input is `(s || incoming)`, one-hot encoded to an
/// `8 x n` matrix and flattened row-major; five tanh outputs give the
/// actuation and one message per neighbor direction. `incoming[d]` is the
/// value the neighbor in direction `d` sent towards this voxel (zero when
/// there is no neighbor).
pub fn mlp_comm_forward(
    s: &SensorReading,
    incoming: &[f64; 4],
    voxel: usize,
    layout: &GenotypeLayout,
    genotype: &[f64],
) -> Result<CommOutput> {
    expect_family(layout, ControllerFamily::MlpComm)?;
    layout.check(genotype)?;
    let n = layout.n;
    if voxel >= n {
        return Err(Error::IndexOutOfRange {
            index: voxel,
            len: n,
        });
    }
    let inputs = N_SENSORS + 4;
    let row_len = inputs * n;
    let w = &genotype[layout.weights_range()];
    let b = &genotype[layout.bias_range()];
    let u: [f64; 8] = std::array::from_fn(|r| {
        if r < N_SENSORS {
            s[r]
        } else {
            incoming[r - N_SENSORS]
        }
    });
    let out: [f64; 5] = std::array::from_fn(|o| {
        let row = &w[o * row_len..(o + 1) * row_len];
        let z = b[o]
            + u.iter()
                .enumerate()
                .map(|(r, v)| row[r * n + voxel] * v)
                .sum::<f64>();
        z.tanh()
    });
    Ok(CommOutput {
        actuation: out[0],
        outgoing: [out[1], out[2], out[3], out[4]],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::ControllerSpec;

    #[test]
    fn zero_genotypes() {
        let mlp = GenotypeLayout::new(&ControllerSpec::with_family(ControllerFamily::Mlp), 3);
        assert_eq!(
            mlp_forward(&[1.0, 0.2, 0.3, 0.4], 1, &mlp, &vec![0.0; mlp.len()]).unwrap(),
            0.0
        );
        let comm = GenotypeLayout::new(&ControllerSpec::with_family(ControllerFamily::MlpComm), 3);
        let out = mlp_comm_forward(
            &[1.0, 0.2, 0.3, 0.4],
            &[0.5; 4],
            1,
            &comm,
            &vec![0.0; comm.len()],
        )
        .unwrap();
        assert_eq!(out.actuation, 0.0);
        assert_eq!(out.outgoing, [0.0; 4]);
    }

    #[test]
    fn mlp_uses_only_own_column() {
        let layout = GenotypeLayout::new(&ControllerSpec::with_family(ControllerFamily::Mlp), 4);
        let mut theta: Vec<f64> = (0..layout.len()).map(|k| (k as f64 * 0.3).sin()).collect();
        let s = [0.0, 0.4, 0.6, 0.5];
        let base = mlp_forward(&s, 0, &layout, &theta).unwrap();
        for r in 0..4 {
            theta[r * 4 + 2] = 99.0;
        }
        assert_eq!(mlp_forward(&s, 0, &layout, &theta).unwrap(), base);
    }

    #[test]
    fn length_mismatch() {
        let layout = GenotypeLayout::new(&ControllerSpec::with_family(ControllerFamily::Mlp), 4);
        assert!(matches!(
            mlp_forward(&[0.0; 4], 0, &layout, &[0.0; 3]),
            Err(Error::GenotypeLength {
                expected: 17,
                found: 3
            })
        ));
    }
}
