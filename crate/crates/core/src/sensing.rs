//! Per-voxel sensors, soft normalization, sensor noise and the one-hot
//! positional encoding `X = s h_i^T`.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphology::Morphology;
use crate::physics::SimState;
use crate::rng::Rng;

/// Number of sensor channels per voxel.
pub const N_SENSORS: usize = 4;

pub const TOUCH: usize = 0;
pub const VEL_X: usize = 1;
pub const VEL_Y: usize = 2;
pub const AREA: usize = 3;

/// Sensor vector ordered (touch, vx, vy, area).
pub type SensorReading = [f64; N_SENSORS];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    pub area_range: (f64, f64),
    pub velocity_range: (f64, f64),
    pub noise_sigma: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig {
            area_range: (0.5, 1.5),
            velocity_range: (-5.0, 5.0),
            noise_sigma: 0.01,
        }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ok(self.area_range) || !ok(self.velocity_range) {
            return Err(Error::InvalidArgument(
                "sensor ranges must be finite with min < max".into(),
            ));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidArgument("noise_sigma must be >= 0".into()));
        }
        Ok(())
    }
}

/// Raw (unnormalized) readings of one voxel.
pub fn read_raw_sensors(
    state: &SimState,
    morphology: &Morphology,
    voxel_side: f64,
    voxel: usize,
) -> Result<SensorReading> {
    if voxel >= morphology.n_voxels() {
        return Err(Error::IndexOutOfRange {
            index: voxel,
            len: morphology.n_voxels(),
        });
    }
    let corners = morphology.voxel_corners(voxel);
    let touch = corners.iter().any(|&m| state.in_contact[m]);
    let (mut vx, mut vy) = (0.0, 0.0);
    for &m in &corners {
        vx += state.mass_velocities[m][0];
        vy += state.mass_velocities[m][1];
    }
    let area = polygon_area(corners.map(|m| state.mass_positions[m]));
    Ok([
        if touch { 1.0 } else { 0.0 },
        vx / 4.0,
        vy / 4.0,
        area / (voxel_side * voxel_side),
    ])
}

/// Shoelace area of a counter-clockwise quad.
fn polygon_area(pts: [[f64; 2]; 4]) -> f64 {
    let mut twice = 0.0;
    for k in 0..4 {
        let p = pts[k];
        let q = pts[(k + 1) % 4];
        twice += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * twice
}

/// Maps `v` with nominal range `[lo, hi]` into (0, 1).
pub fn soft_normalize_value(v: f64, (lo, hi): (f64, f64)) -> f64 {
    0.5 * (1.0 + (2.0 * (v - lo) / (hi - lo) - 1.0).tanh())
}

pub fn soft_normalize(raw: &SensorReading, config: &SensorConfig) -> SensorReading {
    [
        raw[TOUCH],
        soft_normalize_value(raw[VEL_X], config.velocity_range),
        soft_normalize_value(raw[VEL_Y], config.velocity_range),
        soft_normalize_value(raw[AREA], config.area_range),
    ]
}

/// Adds independent N(0, sigma^2) noise to every channel. `sigma = 0` leaves
/// the reading untouched and consumes no randomness.
pub fn add_noise(s: &SensorReading, sigma: f64, rng: &mut Rng) -> SensorReading {
    if sigma == 0.0 {
        return *s;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma validated as finite and non-negative");
    s.map(|v| v + normal.sample(rng))
}

/// The `N_SENSORS x n` matrix that equals `s` in column `voxel` and is zero
/// elsewhere, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedInput {
    values: Vec<f64>,
    n: usize,
    voxel: usize,
}

impl EncodedInput {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn voxel(&self) -> usize {
        self.voxel
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n + col]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.values
    }

    /// `X h_i`, i.e. the column of the owning voxel.
    pub fn own_column(&self) -> SensorReading {
        std::array::from_fn(|r| self.get(r, self.voxel))
    }
}

pub fn one_hot_encode(s: &SensorReading, voxel: usize, n: usize) -> Result<EncodedInput> {
    if voxel >= n {
        return Err(Error::IndexOutOfRange {
            index: voxel,
            len: n,
        });
    }
    let mut values = vec![0.0; N_SENSORS * n];
    for (r, &v) in s.iter().enumerate() {
        values[r * n + voxel] = v;
    }
    Ok(EncodedInput { values, n, voxel })
}
