//! Measure-preserving transformation families and their sampling measures.
//!
//! Three families act on the three spaces: rotations of the circle, the
//! special orthogonal group of the sphere's ambient space, and cyclic
//! row/column shifts of the grid. `sample_nu` draws a transform whose
//! pushforward of a fixed point reproduces the uniform measure, the property
//! `check_pushforward` validates empirically (and exactly on grids).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::space::{wrap_unit, Point, Space};

/// Orthogonality and determinant tolerance for rotation matrices.
pub const ROTATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    CircleRotation {
        angle: f64,
    },
    SphereRotation {
        matrix: SquareMatrix,
    },
    /// Cyclic shift bound to its grid extents, so application wraps exactly.
    GridShift {
        row_shift: usize,
        col_shift: usize,
        rows: usize,
        cols: usize,
    },
}

impl Transform {
    pub fn circle_rotation(angle: f64) -> Transform {
        Transform::CircleRotation {
            angle: wrap_unit(angle),
        }
    }

    /// Validates that `matrix` is special orthogonal before wrapping it.
    pub fn sphere_rotation(matrix: SquareMatrix) -> Result<Transform> {
        let defect = matrix.orthogonality_defect();
        if defect > ROTATION_TOL {
            return Err(Error::NotARotation(format!(
                "orthogonality defect {defect:e}"
            )));
        }
        let det = matrix.det();
        if (det - 1.0).abs() > ROTATION_TOL {
            return Err(Error::NotARotation(format!("determinant {det}")));
        }
        Ok(Transform::SphereRotation { matrix })
    }

    pub fn grid_shift(space: &Space, row_shift: usize, col_shift: usize) -> Result<Transform> {
        match space {
            Space::Grid { rows, cols } => {
                if row_shift >= *rows || col_shift >= *cols {
                    return Err(Error::InvalidConfig(format!(
                        "shift ({row_shift},{col_shift}) out of range for {space}"
                    )));
                }
                Ok(Transform::GridShift {
                    row_shift,
                    col_shift,
                    rows: *rows,
                    cols: *cols,
                })
            }
            other => Err(Error::UnsupportedSpace {
                op: "grid_shift",
                space: other.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    CircleRotations,
    SpecialOrthogonal,
    CyclicShifts,
}

/// A transformation family bound to the space it acts on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub space: Space,
    pub family: Family,
}

impl GroupSpec {
    pub fn new(space: Space, family: Family) -> Result<GroupSpec> {
        let compatible = matches!(
            (family, &space),
            (Family::CircleRotations, Space::Circle)
                | (Family::SpecialOrthogonal, Space::Sphere { .. })
                | (Family::CyclicShifts, Space::Grid { .. })
        );
        if !compatible {
            return Err(Error::InvalidConfig(format!(
                "family {family:?} does not act on {space}"
            )));
        }
        Ok(GroupSpec { space, family })
    }

    pub fn circle_rotations() -> GroupSpec {
        GroupSpec {
            space: Space::Circle,
            family: Family::CircleRotations,
        }
    }

    pub fn special_orthogonal(dim: usize) -> Result<GroupSpec> {
        GroupSpec::new(Space::sphere(dim)?, Family::SpecialOrthogonal)
    }

    pub fn cyclic_shifts(rows: usize, cols: usize) -> Result<GroupSpec> {
        GroupSpec::new(Space::grid(rows, cols)?, Family::CyclicShifts)
    }
}

/// Uniform (Haar) unit quaternion converted to a rotation matrix.
fn so3_from_quaternion<R: Rng + ?Sized>(rng: &mut R) -> SquareMatrix {
    let q: [f64; 4] = loop {
        let raw: Vec<f64> = (0..4).map(|_| rng.sample(StandardNormal)).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            break [raw[0] / norm, raw[1] / norm, raw[2] / norm, raw[3] / norm];
        }
    };
    let (w, x, y, z) = (q[0], q[1], q[2], q[3]);
    SquareMatrix::from_rows(vec![
        vec![
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        vec![
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        vec![
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ])
    .expect("3x3 construction")
}

/// Haar rotation in dimension d != 3: orthonormalize a Gaussian matrix
/// (Gram-Schmidt leaves the R-factor diagonal positive, so the result is
/// Haar on O(d)), then flip the last column if the determinant is -1.
fn haar_rotation_gram_schmidt<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> SquareMatrix {
    loop {
        let rows: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let gaussian = SquareMatrix::from_rows(rows).expect("square construction");
        if let Some(mut q) = gaussian.gram_schmidt_columns() {
            if q.det() < 0.0 {
                q.negate_col(dim - 1);
            }
            return q;
        }
    }
}

/// Draw a transform from the family's natural measure: the uniform angle on
/// circle rotations, Haar measure on SO(d), the uniform distribution on the
/// m*n cyclic shifts.
pub fn sample_nu<R: Rng + ?Sized>(group: &GroupSpec, rng: &mut R) -> Transform {
    match (group.family, &group.space) {
        (Family::CircleRotations, Space::Circle) => Transform::CircleRotation {
            angle: rng.random::<f64>(),
        },
        (Family::SpecialOrthogonal, Space::Sphere { dim }) => {
            let matrix = if *dim == 3 {
                so3_from_quaternion(rng)
            } else {
                haar_rotation_gram_schmidt(*dim, rng)
            };
            Transform::SphereRotation { matrix }
        }
        (Family::CyclicShifts, Space::Grid { rows, cols }) => Transform::GridShift {
            row_shift: rng.random_range(0..*rows),
            col_shift: rng.random_range(0..*cols),
            rows: *rows,
            cols: *cols,
        },
        _ => unreachable!("GroupSpec construction enforces compatibility"),
    }
}

/// Apply a transform to a point of the same space. Sphere images are
/// renormalized so repeated rotations cannot drift off the unit sphere.
pub fn apply(transform: &Transform, point: &Point) -> Result<Point> {
    match (transform, point) {
        (Transform::CircleRotation { angle }, Point::Circle { u }) => {
            Ok(Point::circle(u + angle))
        }
        (Transform::SphereRotation { matrix }, Point::Sphere { coords }) => {
            if matrix.dim() != coords.len() {
                return Err(Error::SpaceMismatch {
                    transform: format!("rotation(d={})", matrix.dim()),
                    point: format!("sphere(d={})", coords.len()),
                });
            }
            Point::sphere_normalized(matrix.mul_vec(coords))
        }
        (
            Transform::GridShift {
                row_shift,
                col_shift,
                rows,
                cols,
            },
            Point::Grid { row, col },
        ) => {
            if *row == 0 || *col == 0 || *row > *rows || *col > *cols {
                return Err(Error::PointOutsideSpace {
                    space: format!("grid({rows}x{cols})"),
                    detail: format!("cell ({row},{col})"),
                });
            }
            Ok(Point::Grid {
                row: (row - 1 + row_shift) % rows + 1,
                col: (col - 1 + col_shift) % cols + 1,
            })
        }
        (t, p) => Err(Error::SpaceMismatch {
            transform: transform_kind(t).into(),
            point: p.kind_name().into(),
        }),
    }
}

fn transform_kind(t: &Transform) -> &'static str {
    match t {
        Transform::CircleRotation { .. } => "circle",
        Transform::SphereRotation { .. } => "sphere",
        Transform::GridShift { .. } => "grid",
    }
}

/// All elements of a finite family, each exactly once.
pub fn enumerate_group(group: &GroupSpec) -> Result<Vec<Transform>> {
    match (group.family, &group.space) {
        (Family::CyclicShifts, Space::Grid { rows, cols }) => {
            let mut out = Vec::with_capacity(rows * cols);
            for r in 0..*rows {
                for c in 0..*cols {
                    out.push(Transform::GridShift {
                        row_shift: r,
                        col_shift: c,
                        rows: *rows,
                        cols: *cols,
                    });
                }
            }
            Ok(out)
        }
        _ => Err(Error::ContinuousFamily),
    }
}

/// A test set with a closed-form measure, used to validate the pushforward
/// identity against a known right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestSet {
    /// `{z > min_z}` on the 2-sphere; measure `(1 - min_z)/2`.
    SphereCap { min_z: f64 },
    /// Arc `[start, start + length)` on the circle; measure `length`.
    CircleArc { start: f64, length: f64 },
    /// Explicit list of 1-based grid cells; measure `|cells| / N`.
    GridCells { cells: Vec<(usize, usize)> },
}

impl TestSet {
    pub fn measure(&self, space: &Space) -> Result<f64> {
        match (self, space) {
            (TestSet::SphereCap { min_z }, Space::Sphere { dim: 3 }) => {
                Ok(((1.0 - min_z) / 2.0).clamp(0.0, 1.0))
            }
            (TestSet::SphereCap { .. }, Space::Sphere { dim }) => Err(Error::UnsupportedTestSet(
                format!("cap measure is closed-form only on the 2-sphere, got d={dim}"),
            )),
            (TestSet::CircleArc { length, .. }, Space::Circle) => {
                if !(0.0..=1.0).contains(length) {
                    return Err(Error::UnsupportedTestSet(format!(
                        "arc length {length} outside [0,1]"
                    )));
                }
                Ok(*length)
            }
            (TestSet::GridCells { cells }, Space::Grid { rows, cols }) => {
                if cells
                    .iter()
                    .any(|(r, c)| *r == 0 || *c == 0 || r > rows || c > cols)
                {
                    return Err(Error::UnsupportedTestSet("cell out of range".into()));
                }
                Ok(cells.len() as f64 / (rows * cols) as f64)
            }
            (set, space) => Err(Error::UnsupportedTestSet(format!("{set:?} on {space}"))),
        }
    }

    pub fn contains(&self, point: &Point) -> bool {
        match (self, point) {
            (TestSet::SphereCap { min_z }, Point::Sphere { coords }) => {
                coords.last().is_some_and(|z| *z > *min_z)
            }
            (TestSet::CircleArc { start, length }, Point::Circle { u }) => {
                let rel = wrap_unit(u - start);
                rel < *length
            }
            (TestSet::GridCells { cells }, Point::Grid { row, col }) => {
                cells.iter().any(|(r, c)| r == row && c == col)
            }
            _ => false,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            TestSet::SphereCap { min_z } => format!("cap z > {min_z}"),
            TestSet::CircleArc { start, length } => format!("arc [{start}, {start}+{length})"),
            TestSet::GridCells { cells } => format!("{} grid cells", cells.len()),
        }
    }
}

/// One line of a pushforward validation report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapReport {
    pub set: String,
    pub exact_measure: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub deviation_sigmas: f64,
    pub samples: usize,
    pub exhaustive: bool,
    pub flagged: bool,
}

/// Deviations beyond this many binomial standard errors are flagged.
pub const PUSHFORWARD_SIGMA_LIMIT: f64 = 4.0;

/// Estimate `nu(g : g(a) in B)` by sampling and compare with the exact
/// measure of each test set.
pub fn check_pushforward<R: Rng + ?Sized>(
    group: &GroupSpec,
    anchor: &Point,
    caps: &[TestSet],
    n_samples: usize,
    rng: &mut R,
) -> Result<Vec<CapReport>> {
    if n_samples == 0 {
        return Err(Error::InvalidConfig("n_samples must be positive".into()));
    }
    let mut hits = vec![0usize; caps.len()];
    for _ in 0..n_samples {
        let g = sample_nu(group, rng);
        let image = apply(&g, anchor)?;
        for (hit, cap) in hits.iter_mut().zip(caps) {
            if cap.contains(&image) {
                *hit += 1;
            }
        }
    }
    caps.iter()
        .zip(hits)
        .map(|(cap, hit)| cap_report(cap, &group.space, hit, n_samples, false))
        .collect()
}

/// Exact pushforward check for finite families: enumerate every transform
/// once. Frequencies must match the measures with zero tolerance.
pub fn check_pushforward_exact(
    group: &GroupSpec,
    anchor: &Point,
    caps: &[TestSet],
) -> Result<Vec<CapReport>> {
    let transforms = enumerate_group(group)?;
    let mut hits = vec![0usize; caps.len()];
    for g in &transforms {
        let image = apply(g, anchor)?;
        for (hit, cap) in hits.iter_mut().zip(caps) {
            if cap.contains(&image) {
                *hit += 1;
            }
        }
    }
    caps.iter()
        .zip(hits)
        .map(|(cap, hit)| cap_report(cap, &group.space, hit, transforms.len(), true))
        .collect()
}

fn cap_report(
    cap: &TestSet,
    space: &Space,
    hits: usize,
    samples: usize,
    exhaustive: bool,
) -> Result<CapReport> {
    let exact = cap.measure(space)?;
    let empirical = hits as f64 / samples as f64;
    let std_error = if exhaustive {
        0.0
    } else {
        (exact * (1.0 - exact) / samples as f64).sqrt()
    };
    let deviation = (empirical - exact).abs();
    let deviation_sigmas = if std_error > 0.0 {
        deviation / std_error
    } else if deviation == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(CapReport {
        set: cap.describe(),
        exact_measure: exact,
        empirical,
        std_error,
        deviation_sigmas,
        samples,
        exhaustive,
        flagged: deviation_sigmas > PUSHFORWARD_SIGMA_LIMIT,
    })
}

/// Standard battery of caps used by the validate-nu experiment: caps of
/// measure 0.1, 0.25, 0.5 on the sphere, arcs of the same measures on the
/// circle, an exhaustive single-cell check on grids.
pub fn standard_battery(space: &Space) -> Vec<TestSet> {
    match space {
        Space::Sphere { .. } => [0.1, 0.25, 0.5]
            .iter()
            .map(|p| TestSet::SphereCap { min_z: 1.0 - 2.0 * p })
            .collect(),
        Space::Circle => [0.1, 0.25, 0.5]
            .iter()
            .map(|p| TestSet::CircleArc {
                start: 0.0,
                length: *p,
            })
            .collect(),
        Space::Grid { rows, cols } => {
            let mut sets = vec![TestSet::GridCells {
                cells: vec![(1, 1)],
            }];
            if rows * cols > 1 {
                sets.push(TestSet::GridCells {
                    cells: vec![(*rows, *cols), (1, 1)],
                });
            }
            sets
        }
    }
}
