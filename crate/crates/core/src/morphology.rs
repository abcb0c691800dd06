//! Grid shapes and the mass/spring topology derived from them.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Occupancy grid of a robot body, row-major with the top row first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridShape {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl GridShape {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || mask.len() != width * height {
            return Err(Error::ShapeParse(format!(
                "mask of length {} does not fit a {width}x{height} grid",
                mask.len()
            )));
        }
        let shape = GridShape {
            width,
            height,
            mask,
        };
        shape.validate()?;
        Ok(shape)
    }

    fn validate(&self) -> Result<()> {
        let cells: Vec<usize> = (0..self.mask.len()).filter(|&k| self.mask[k]).collect();
        let Some(&start) = cells.first() else {
            return Err(Error::ShapeParse("mask has no occupied cell".into()));
        };
        let mut seen = vec![false; self.mask.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut reached = 0;
        while let Some(k) = queue.pop_front() {
            reached += 1;
            let (col, row) = (k % self.width, k / self.width);
            for dir in Direction::ALL {
                if let Some((c, r)) = self.step(col, row, dir) {
                    let n = r * self.width + c;
                    if self.mask[n] && !seen[n] {
                        seen[n] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        if reached != cells.len() {
            return Err(Error::ShapeParse(format!(
                "occupied cells are not 4-connected ({reached} of {} reachable)",
                cells.len()
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_occupied(&self, col: usize, row: usize) -> bool {
        col < self.width && row < self.height && self.mask[row * self.width + col]
    }

    pub fn voxel_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    fn step(&self, col: usize, row: usize, dir: Direction) -> Option<(usize, usize)> {
        let (c, r) = match dir {
            Direction::North => (col, row.checked_sub(1)?),
            Direction::East => (col + 1, row),
            Direction::South => (col, row + 1),
            Direction::West => (col.checked_sub(1)?, row),
        };
        (c < self.width && r < self.height).then_some((c, r))
    }
}

impl FromStr for GridShape {
    type Err = Error;

    /// Parses rows of `0`/`1` separated by `-`, e.g. `1111-1111-1001`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::ShapeParse("empty mask".into()));
        }
        let rows: Vec<&str> = s.split('-').collect();
        let width = rows[0].len();
        let mut mask = Vec::with_capacity(width * rows.len());
        for (r, row) in rows.iter().enumerate() {
            if row.is_empty() {
                return Err(Error::ShapeParse(format!("row {r} is empty")));
            }
            if row.len() != width {
                return Err(Error::ShapeParse(format!(
                    "ragged rows: row {r} has length {} but row 0 has length {width}",
                    row.len()
                )));
            }
            for ch in row.chars() {
                match ch {
                    '1' => mask.push(true),
                    '0' => mask.push(false),
                    other => {
                        return Err(Error::ShapeParse(format!(
                            "unexpected character {other:?} in row {r}"
                        )))
                    }
                }
            }
        }
        GridShape::new(width, rows.len(), mask)
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.height {
            if r > 0 {
                f.write_str("-")?;
            }
            for c in 0..self.width {
                f.write_str(if self.is_occupied(c, r) { "1" } else { "0" })?;
            }
        }
        Ok(())
    }
}

pub fn parse_shape(mask: &str) -> Result<GridShape> {
    mask.parse()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    pub fn opposite(self) -> Direction {
        match self {
            Direction::North => Direction::South,
            Direction::East => Direction::West,
            Direction::South => Direction::North,
            Direction::West => Direction::East,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpringKind {
    Edge,
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spring {
    pub a: usize,
    pub b: usize,
    pub voxel: usize,
    pub kind: SpringKind,
}

/// A voxel body: corner masses shared between adjacent voxels, and per-voxel
/// springs (4 edges + 2 diagonals). Voxels are indexed row-major over the mask,
/// top-left first.
#[derive(Debug, Clone)]
pub struct Morphology {
    shape: GridShape,
    /// grid cell (col, row) of each voxel
    cells: Vec<(usize, usize)>,
    /// corner masses of each voxel, counter-clockwise: bottom-left,
    /// bottom-right, top-right, top-left
    corners: Vec<[usize; 4]>,
    /// lattice coordinate (col, row-from-top) of each mass
    lattice: Vec<(usize, usize)>,
    springs: Vec<Spring>,
    neighbors: Vec<[Option<usize>; 4]>,
}

impl Morphology {
    pub fn new(shape: GridShape) -> Self {
        let mut cells = Vec::new();
        let mut index_of = BTreeMap::new();
        for r in 0..shape.height() {
            for c in 0..shape.width() {
                if shape.is_occupied(c, r) {
                    index_of.insert((c, r), cells.len());
                    cells.push((c, r));
                }
            }
        }

        let mut lattice = Vec::new();
        let mut mass_of = BTreeMap::new();
        let mut mass_at = |p: (usize, usize), lattice: &mut Vec<(usize, usize)>| {
            *mass_of.entry(p).or_insert_with(|| {
                lattice.push(p);
                lattice.len() - 1
            })
        };
        let mut corners = Vec::with_capacity(cells.len());
        let mut springs = Vec::with_capacity(cells.len() * 6);
        for (v, &(c, r)) in cells.iter().enumerate() {
            let bl = mass_at((c, r + 1), &mut lattice);
            let br = mass_at((c + 1, r + 1), &mut lattice);
            let tr = mass_at((c + 1, r), &mut lattice);
            let tl = mass_at((c, r), &mut lattice);
            corners.push([bl, br, tr, tl]);
            for (a, b) in [(bl, br), (br, tr), (tr, tl), (tl, bl)] {
                springs.push(Spring {
                    a,
                    b,
                    voxel: v,
                    kind: SpringKind::Edge,
                });
            }
            for (a, b) in [(bl, tr), (br, tl)] {
                springs.push(Spring {
                    a,
                    b,
                    voxel: v,
                    kind: SpringKind::Diagonal,
                });
            }
        }

        let neighbors = cells
            .iter()
            .map(|&(c, r)| {
                Direction::ALL.map(|dir| {
                    shape
                        .step(c, r, dir)
                        .and_then(|cell| index_of.get(&cell).copied())
                })
            })
            .collect();

        Morphology {
            shape,
            cells,
            corners,
            lattice,
            springs,
            neighbors,
        }
    }

    pub fn from_mask(mask: &str) -> Result<Self> {
        Ok(Morphology::new(parse_shape(mask)?))
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn n_voxels(&self) -> usize {
        self.cells.len()
    }

    pub fn n_masses(&self) -> usize {
        self.lattice.len()
    }

    pub fn voxel_cell(&self, voxel: usize) -> (usize, usize) {
        self.cells[voxel]
    }

    /// Voxel index of grid cell `(col, row)`, if occupied.
    pub fn voxel_at(&self, col: usize, row: usize) -> Option<usize> {
        self.cells.iter().position(|&cell| cell == (col, row))
    }

    pub fn voxel_corners(&self, voxel: usize) -> [usize; 4] {
        self.corners[voxel]
    }

    pub fn springs(&self) -> &[Spring] {
        &self.springs
    }

    pub fn lattice_point(&self, mass: usize) -> (usize, usize) {
        self.lattice[mass]
    }

    /// Neighbor voxel indices ordered North, East, South, West.
    pub fn neighbors(&self, voxel: usize) -> [Option<usize>; 4] {
        self.neighbors[voxel]
    }
}
