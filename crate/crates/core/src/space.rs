//! Parameter spaces and their normalized uniform measures.
//!
//! Three concrete families are supported: the unit circle parametrised by
//! `[0, 1)`, the unit sphere embedded in d-dimensional Euclidean space, and a
//! finite m-by-n grid with 1-based indices. Each carries its normalized
//! uniform measure, a sampler, and (off the grid) the antipodal pairing used
//! by the antithetic estimator.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum deviation from unit length tolerated for sphere points; the
/// normalization of a double-precision Gaussian vector stays well inside it.
pub const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Space {
    Circle,
    Sphere { dim: usize },
    Grid { rows: usize, cols: usize },
}

impl Space {
    pub fn circle() -> Space {
        Space::Circle
    }

    pub fn sphere(dim: usize) -> Result<Space> {
        if dim < 2 {
            return Err(Error::InvalidSpace(format!(
                "sphere dimension must be at least 2, got {dim}"
            )));
        }
        Ok(Space::Sphere { dim })
    }

    pub fn grid(rows: usize, cols: usize) -> Result<Space> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidSpace(format!(
                "grid must have positive extents, got {rows}x{cols}"
            )));
        }
        Ok(Space::Grid { rows, cols })
    }

    /// Number of atoms of the uniform measure on a grid.
    pub fn atom_count(&self) -> Option<usize> {
        match self {
            Space::Grid { rows, cols } => Some(rows * cols),
            _ => None,
        }
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, Space::Grid { .. })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Space::Circle => "circle",
            Space::Sphere { .. } => "sphere",
            Space::Grid { .. } => "grid",
        }
    }
}

impl std::fmt::Display for Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Space::Circle => write!(f, "circle"),
            Space::Sphere { dim } => write!(f, "sphere(d={dim})"),
            Space::Grid { rows, cols } => write!(f, "grid({rows}x{cols})"),
        }
    }
}

/// A point of one of the parameter spaces, in the space's own coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Point {
    /// Position on the circle, reduced to `[0, 1)`.
    Circle { u: f64 },
    /// Unit vector in the ambient Euclidean space.
    Sphere { coords: Vec<f64> },
    /// 1-based grid cell.
    Grid { row: usize, col: usize },
}

impl Point {
    /// Circle point; the coordinate is reduced modulo 1 on construction.
    pub fn circle(u: f64) -> Point {
        Point::Circle { u: wrap_unit(u) }
    }

    /// Sphere point from coordinates that must already be of unit length.
    pub fn sphere(coords: Vec<f64>) -> Result<Point> {
        let norm = l2_norm(&coords);
        if coords.len() < 2 || (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::PointOutsideSpace {
                space: format!("sphere(d={})", coords.len()),
                detail: format!("|norm - 1| = {:e}", (norm - 1.0).abs()),
            });
        }
        Ok(Point::Sphere { coords })
    }

    /// Sphere point from an arbitrary nonzero vector, normalized on entry.
    pub fn sphere_normalized(mut coords: Vec<f64>) -> Result<Point> {
        let norm = l2_norm(&coords);
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::PointOutsideSpace {
                space: format!("sphere(d={})", coords.len()),
                detail: "cannot normalize a zero or non-finite vector".into(),
            });
        }
        for c in &mut coords {
            *c /= norm;
        }
        Point::sphere(coords)
    }

    pub fn grid(space: &Space, row: usize, col: usize) -> Result<Point> {
        match space {
            Space::Grid { rows, cols } => {
                if row == 0 || col == 0 || row > *rows || col > *cols {
                    return Err(Error::PointOutsideSpace {
                        space: space.to_string(),
                        detail: format!("cell ({row},{col}) out of range"),
                    });
                }
                Ok(Point::Grid { row, col })
            }
            other => Err(Error::PointOutsideSpace {
                space: other.to_string(),
                detail: "grid point on a non-grid space".into(),
            }),
        }
    }

    /// The "North pole": the unit vector along the last coordinate axis.
    pub fn north_pole(dim: usize) -> Result<Point> {
        Space::sphere(dim)?;
        let mut coords = vec![0.0; dim];
        coords[dim - 1] = 1.0;
        Ok(Point::Sphere { coords })
    }

    pub fn belongs_to(&self, space: &Space) -> bool {
        match (self, space) {
            (Point::Circle { .. }, Space::Circle) => true,
            (Point::Sphere { coords }, Space::Sphere { dim }) => coords.len() == *dim,
            (Point::Grid { row, col }, Space::Grid { rows, cols }) => {
                *row >= 1 && *col >= 1 && row <= rows && col <= cols
            }
            _ => false,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Point::Circle { .. } => "circle",
            Point::Sphere { .. } => "sphere",
            Point::Grid { .. } => "grid",
        }
    }
}

/// Reduce a circle coordinate to the canonical representative in `[0, 1)`.
pub fn wrap_unit(u: f64) -> f64 {
    let r = u.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Draw one point from the normalized uniform measure of `space`.
///
/// Sphere sampling normalizes a vector of independent standard Gaussians,
/// which is exactly rotation invariant in every dimension.
pub fn sample_mu<R: Rng + ?Sized>(space: &Space, rng: &mut R) -> Point {
    match space {
        Space::Circle => Point::Circle {
            u: rng.random::<f64>(),
        },
        Space::Sphere { dim } => {
            loop {
                let coords: Vec<f64> = (0..*dim).map(|_| rng.sample(StandardNormal)).collect();
                // A zero draw has probability zero; retry rather than divide by it.
                if let Ok(p) = Point::sphere_normalized(coords) {
                    return p;
                }
            }
        }
        Space::Grid { rows, cols } => Point::Grid {
            row: rng.random_range(1..=*rows),
            col: rng.random_range(1..=*cols),
        },
    }
}

/// The antipodal involution on the circle (`u + 1/2 mod 1`) and the sphere
/// (`v -> -v`). Grids have no antipode.
pub fn antipode(space: &Space, p: &Point) -> Result<Point> {
    match (space, p) {
        (Space::Circle, Point::Circle { u }) => Ok(Point::circle(u + 0.5)),
        (Space::Sphere { .. }, Point::Sphere { coords }) => Ok(Point::Sphere {
            coords: coords.iter().map(|c| -c).collect(),
        }),
        (Space::Grid { .. }, _) => Err(Error::UnsupportedSpace {
            op: "antipode",
            space: space.to_string(),
        }),
        _ => Err(Error::PointOutsideSpace {
            space: space.to_string(),
            detail: format!("{} point", p.kind_name()),
        }),
    }
}

/// `half_k` independent draws from the uniform measure followed by their
/// antipodes, in that order. Every point of the batch is marginally uniform.
pub fn sample_antithetic_batch<R: Rng + ?Sized>(
    space: &Space,
    half_k: usize,
    rng: &mut R,
) -> Result<Vec<Point>> {
    if half_k == 0 {
        return Err(Error::InvalidConfig("antithetic batch needs half_k >= 1".into()));
    }
    if !space.is_continuous() {
        return Err(Error::UnsupportedSpace {
            op: "sample_antithetic_batch",
            space: space.to_string(),
        });
    }
    let mut batch = Vec::with_capacity(2 * half_k);
    for _ in 0..half_k {
        batch.push(sample_mu(space, rng));
    }
    for i in 0..half_k {
        batch.push(antipode(space, &batch[i])?);
    }
    Ok(batch)
}
