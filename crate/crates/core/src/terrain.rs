use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Piecewise-linear 1D heightmap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Terrain {
    control_points: Vec<(f64, f64)>,
    start_plateau_length: f64,
    generation_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainParams {
    pub span: f64,
    pub avg_bump_height: f64,
    pub avg_bump_distance: f64,
    pub start_plateau: f64,
}

impl Default for TerrainParams {
    fn default() -> Self {
        TerrainParams {
            span: 400.0,
            avg_bump_height: 1.0,
            avg_bump_distance: 10.0,
            start_plateau: 20.0,
        }
    }
}

impl Terrain {
    /// Builds a terrain from explicit control points.
    pub fn from_points(control_points: Vec<(f64, f64)>) -> Result<Self> {
        if control_points.len() < 2 {
            return Err(Error::InvalidArgument(
                "terrain needs at least two control points".into(),
            ));
        }
        if control_points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidArgument(
                "terrain control points must be strictly increasing in x".into(),
            ));
        }
        if control_points
            .iter()
            .any(|p| !p.0.is_finite() || !p.1.is_finite())
        {
            return Err(Error::InvalidArgument("non-finite terrain point".into()));
        }
        Ok(Terrain {
            control_points,
            start_plateau_length: 0.0,
            generation_seed: 0,
        })
    }

    /// A flat terrain at y = 0 over `[0, span]`.
    pub fn flat(span: f64) -> Result<Self> {
        let mut t = Terrain::from_points(vec![(0.0, 0.0), (span, 0.0)])?;
        t.start_plateau_length = span;
        Ok(t)
    }

    pub fn control_points(&self) -> &[(f64, f64)] {
        &self.control_points
    }

    pub fn start_plateau_length(&self) -> f64 {
        self.start_plateau_length
    }

    pub fn generation_seed(&self) -> u64 {
        self.generation_seed
    }

    pub fn min_x(&self) -> f64 {
        self.control_points[0].0
    }

    pub fn max_x(&self) -> f64 {
        self.control_points[self.control_points.len() - 1].0
    }

    /// Height at `x`, interpolating linearly between control points.
    pub fn height_at(&self, x: f64) -> Result<f64> {
        if !(x >= self.min_x() && x <= self.max_x()) {
            return Err(Error::OutOfRange {
                x,
                min: self.min_x(),
                max: self.max_x(),
            });
        }
        Ok(self.surface(x).0)
    }

    /// Height and slope at `x`; outside the span the end heights extend flat.
    pub(crate) fn surface(&self, x: f64) -> (f64, f64) {
        let pts = &self.control_points;
        if x.is_nan() || x <= pts[0].0 {
            return (pts[0].1, 0.0);
        }
        let last = pts[pts.len() - 1];
        if x >= last.0 {
            return (last.1, 0.0);
        }
        // first index whose x is strictly greater than the query
        let hi = pts.partition_point(|p| p.0 <= x);
        let (x0, y0) = pts[hi - 1];
        let (x1, y1) = pts[hi];
        if x == x0 {
            return (y0, (y1 - y0) / (x1 - x0));
        }
        let slope = (y1 - y0) / (x1 - x0);
        (y0 + slope * (x - x0), slope)
    }
}

/// Procedurally generates a hilly terrain: a flat plateau of
/// `start_plateau` meters at y = 0, then bumps whose spacings are drawn from
/// U[0.5 d, 1.5 d] and heights from U[0, 2 h].
pub fn generate_terrain(seed: u64, params: &TerrainParams) -> Result<Terrain> {
    let TerrainParams {
        span,
        avg_bump_height: h,
        avg_bump_distance: d,
        start_plateau,
    } = *params;
    if !(span > 0.0 && h > 0.0 && d > 0.0) || !span.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "terrain span and averages must be positive (span={span}, height={h}, distance={d})"
        )));
    }
    if !(start_plateau > 0.0 && start_plateau < span) {
        return Err(Error::InvalidArgument(format!(
            "start plateau {start_plateau} must lie in (0, span={span})"
        )));
    }
    let mut rng = rng::rng_from(seed);
    let mut points = vec![(0.0, 0.0), (start_plateau, 0.0)];
    let mut x = start_plateau;
    while x < span {
        x += rng.random_range(0.5 * d..=1.5 * d);
        let y = rng.random_range(0.0..=2.0 * h);
        points.push((x, y));
    }
    Ok(Terrain {
        control_points: points,
        start_plateau_length: start_plateau,
        generation_seed: seed,
    })
}
