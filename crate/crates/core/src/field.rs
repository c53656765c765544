//! Random-field generators and realization evaluation.
//!
//! Three generator families: kernel point fields on spheres (sums of radial
//! bumps centred at uniform summits), pinned Gaussian bridges sampled on a
//! circle grid, and i.i.d. Gaussian matrices on grids. A realization is an
//! immutable value that evaluates deterministically at any point of its
//! space and serializes to JSON for replay.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{wrap_unit, Point, Space};

/// Default exponent of the radial kernel.
pub const DEFAULT_KERNEL_EXPONENT: f64 = 0.1;

/// Redraw attempts before matrix generation gives up on tied entries.
const TIE_RETRIES: usize = 16;

/// Radial kernel `1 - (x/2)^beta` with the default exponent `beta = 1/10`.
#[inline]
pub fn kernel_default(x_norm: f64) -> f64 {
    kernel_value(x_norm, DEFAULT_KERNEL_EXPONENT)
}

/// Radial kernel with a configurable positive exponent.
#[inline]
pub fn kernel_value(x_norm: f64, exponent: f64) -> f64 {
    debug_assert!(x_norm >= 0.0);
    1.0 - (x_norm / 2.0).powf(exponent)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum FieldPayload {
    /// Sum of radial bumps centred at `summits`, evaluated through the
    /// chordal (ambient Euclidean) distance. The optional bias adds a
    /// deterministic bump anchored at a fixed point, breaking rotation
    /// invariance of the law.
    Kernel {
        summits: Vec<Vec<f64>>,
        exponent: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        bias: Option<KernelBias>,
    },
    /// Values at the `m` equispaced circle grid points `i/m`.
    CircleGrid { values: Vec<f64> },
    /// Row-major entries of an m-by-n matrix with pairwise distinct entries.
    Matrix { entries: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBias {
    pub anchor: Vec<f64>,
    pub weight: f64,
}

/// Generator name and the seed of the stream that produced the realization,
/// recorded for replay; the payload itself carries the parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// One realized sample path, evaluable at any point of its space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRealization {
    pub space: Space,
    pub payload: FieldPayload,
    pub provenance: Provenance,
}

impl FieldRealization {
    pub fn with_seed(mut self, seed: u64) -> FieldRealization {
        self.provenance.seed = Some(seed);
        self
    }

    /// Evaluate the realization at a point of its space.
    pub fn evaluate(&self, t: &Point) -> Result<f64> {
        if !t.belongs_to(&self.space) {
            return Err(Error::PointOutsideSpace {
                space: self.space.to_string(),
                detail: format!("{} point", t.kind_name()),
            });
        }
        match (&self.payload, t) {
            (
                FieldPayload::Kernel {
                    summits,
                    exponent,
                    bias,
                },
                Point::Sphere { coords },
            ) => {
                let mut sum: f64 = summits
                    .iter()
                    .map(|u| kernel_value(chordal_distance(coords, u), *exponent))
                    .sum();
                if let Some(b) = bias {
                    sum += b.weight * kernel_value(chordal_distance(coords, &b.anchor), *exponent);
                }
                Ok(sum)
            }
            (FieldPayload::CircleGrid { values }, Point::Circle { u }) => {
                Ok(values[grid_index_below(*u, values.len())])
            }
            (FieldPayload::Matrix { entries }, Point::Grid { row, col }) => {
                let cols = match self.space {
                    Space::Grid { cols, .. } => cols,
                    _ => unreachable!("matrix payload on non-grid space"),
                };
                Ok(entries[(row - 1) * cols + (col - 1)])
            }
            _ => Err(Error::PointOutsideSpace {
                space: self.space.to_string(),
                detail: "payload/point kind mismatch".into(),
            }),
        }
    }

    /// Grid values of a circle-grid payload.
    pub fn circle_values(&self) -> Result<&[f64]> {
        match &self.payload {
            FieldPayload::CircleGrid { values } => Ok(values),
            _ => Err(Error::InvalidConfig(
                "expected a circle-grid realization".into(),
            )),
        }
    }

    /// Row-major entries of a matrix payload.
    pub fn matrix_entries(&self) -> Result<&[f64]> {
        match &self.payload {
            FieldPayload::Matrix { entries } => Ok(entries),
            _ => Err(Error::InvalidConfig("expected a matrix realization".into())),
        }
    }
}

/// Euclidean distance in the ambient space; ranges over [0, 2] on the unit
/// sphere.
#[inline]
pub fn chordal_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Index of the grid point at or below `u`, for `m` points at `i/m`.
#[inline]
fn grid_index_below(u: f64, m: usize) -> usize {
    ((u * m as f64) as usize).min(m - 1)
}

/// Kernel point field: `n` summits drawn uniformly on the (d-1)-sphere.
pub fn gen_kernel_field<R: Rng + ?Sized>(
    dim: usize,
    summits: usize,
    exponent: f64,
    rng: &mut R,
) -> Result<FieldRealization> {
    if exponent <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "kernel exponent must be positive, got {exponent}"
        )));
    }
    let space = Space::sphere(dim)?;
    let summit_coords: Vec<Vec<f64>> = (0..summits)
        .map(|_| match crate::space::sample_mu(&space, rng) {
            Point::Sphere { coords } => coords,
            _ => unreachable!(),
        })
        .collect();
    Ok(FieldRealization {
        space,
        payload: FieldPayload::Kernel {
            summits: summit_coords,
            exponent,
            bias: None,
        },
        provenance: Provenance {
            generator: "kernel".into(),
            seed: None,
        },
    })
}

/// Kernel field plus a deterministic bump anchored at `anchor`; a negative
/// control whose law is not rotation invariant.
pub fn gen_biased_field<R: Rng + ?Sized>(
    dim: usize,
    summits: usize,
    exponent: f64,
    bump: f64,
    anchor: &Point,
    rng: &mut R,
) -> Result<FieldRealization> {
    let mut field = gen_kernel_field(dim, summits, exponent, rng)?;
    if !anchor.belongs_to(&field.space) {
        return Err(Error::PointOutsideSpace {
            space: field.space.to_string(),
            detail: "bias anchor outside the field's space".into(),
        });
    }
    let anchor_coords = match anchor {
        Point::Sphere { coords } => coords.clone(),
        _ => unreachable!("sphere membership checked above"),
    };
    if let FieldPayload::Kernel { bias, .. } = &mut field.payload {
        if bump != 0.0 {
            *bias = Some(KernelBias {
                anchor: anchor_coords,
                weight: bump,
            });
        }
    }
    field.provenance.generator = "kernel_biased".into();
    Ok(field)
}

/// Pinned Gaussian bridge on an `m`-point circle grid: partial sums of
/// i.i.d. standard Gaussian increments, linearly tilted so the path returns
/// to zero, scaled by `1/sqrt(m)`. The increments of the result are
/// exchangeable and sum to zero; `B_0 = B_m = 0` exactly.
pub fn gen_bridge_field<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<FieldRealization> {
    if m < 2 {
        return Err(Error::InvalidConfig(format!(
            "bridge grid needs at least 2 points, got {m}"
        )));
    }
    let increments: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let total: f64 = increments.iter().sum();
    let scale = 1.0 / (m as f64).sqrt();
    let mut values = Vec::with_capacity(m);
    let mut partial = 0.0;
    values.push(0.0);
    for (i, xi) in increments.iter().enumerate().take(m - 1) {
        partial += xi;
        let frac = (i + 1) as f64 / m as f64;
        values.push((partial - frac * total) * scale);
    }
    Ok(FieldRealization {
        space: Space::Circle,
        payload: FieldPayload::CircleGrid { values },
        provenance: Provenance {
            generator: "bridge".into(),
            seed: None,
        },
    })
}

/// i.i.d. standard Gaussian m-by-n matrix with pairwise distinct entries;
/// redraws on the probability-zero event of an exact tie.
pub fn gen_matrix_field<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> Result<FieldRealization> {
    let space = Space::grid(rows, cols)?;
    for _ in 0..TIE_RETRIES {
        let entries: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
        if all_distinct(&entries) {
            return Ok(FieldRealization {
                space,
                payload: FieldPayload::Matrix { entries },
                provenance: Provenance {
                    generator: "matrix".into(),
                    seed: None,
                },
            });
        }
    }
    Err(Error::Generation(format!(
        "tied entries persisted across {TIE_RETRIES} redraws"
    )))
}

/// Matrix realization from explicit entries; rejects ties.
pub fn matrix_field_from_entries(
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
) -> Result<FieldRealization> {
    let space = Space::grid(rows, cols)?;
    if entries.len() != rows * cols {
        return Err(Error::InvalidConfig(format!(
            "expected {} entries, got {}",
            rows * cols,
            entries.len()
        )));
    }
    if !all_distinct(&entries) {
        return Err(Error::TiedValues("matrix entries are not distinct".into()));
    }
    Ok(FieldRealization {
        space,
        payload: FieldPayload::Matrix { entries },
        provenance: Provenance {
            generator: "matrix_explicit".into(),
            seed: None,
        },
    })
}

pub(crate) fn all_distinct(values: &[f64]) -> bool {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.windows(2).all(|w| w[0] != w[1])
}

/// The rotated path `t -> X(u + t mod 1) - X(u) + X(0)` of a circle-grid
/// realization; `u` must lie on the grid so the shift permutes increments
/// exactly.
pub fn shift_field(field: &FieldRealization, shift: f64) -> Result<FieldRealization> {
    let values = field.circle_values()?;
    let m = values.len();
    let u = wrap_unit(shift);
    let steps_real = u * m as f64;
    let steps = steps_real.round() as usize % m;
    if (steps_real - steps_real.round()).abs() > 1e-9 {
        return Err(Error::OffGridShift { shift, grid: m });
    }
    let offset = values[steps];
    let base = values[0];
    let shifted: Vec<f64> = (0..m)
        .map(|i| values[(i + steps) % m] - offset + base)
        .collect();
    Ok(FieldRealization {
        space: field.space,
        payload: FieldPayload::CircleGrid { values: shifted },
        provenance: field.provenance.clone(),
    })
}

/// Subtract the grid mean; on the uniform circle grid this is the Riemann
/// approximation of `X - \int X`.
pub fn center_field(field: &FieldRealization) -> Result<FieldRealization> {
    let values = field.circle_values()?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(FieldRealization {
        space: field.space,
        payload: FieldPayload::CircleGrid {
            values: values.iter().map(|v| v - mean).collect(),
        },
        provenance: field.provenance.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::replication_rng;

    #[test]
    fn kernel_known_values() {
        assert_eq!(kernel_default(0.0), 1.0);
        assert_eq!(kernel_default(2.0), 0.0);
        // (2 * 2^-10 / 2)^(1/10) = 2^-1 exactly.
        let x = 2.0 * 2.0_f64.powi(-10);
        assert!((kernel_default(x) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_kernel_field_is_zero() {
        let mut rng = replication_rng(20, 0);
        let field = gen_kernel_field(3, 0, DEFAULT_KERNEL_EXPONENT, &mut rng).unwrap();
        let t = Point::north_pole(3).unwrap();
        assert_eq!(field.evaluate(&t).unwrap(), 0.0);
    }

    #[test]
    fn single_summit_field_attains_kernel_extremes() {
        let mut rng = replication_rng(21, 0);
        let field = gen_kernel_field(3, 1, DEFAULT_KERNEL_EXPONENT, &mut rng).unwrap();
        let summit = match &field.payload {
            FieldPayload::Kernel { summits, .. } => summits[0].clone(),
            _ => unreachable!(),
        };
        let at_summit = field
            .evaluate(&Point::sphere(summit.clone()).unwrap())
            .unwrap();
        assert!((at_summit - 1.0).abs() < 1e-12, "K(0) = 1 at the summit");
        let opposite: Vec<f64> = summit.iter().map(|c| -c).collect();
        let at_antipode = field.evaluate(&Point::sphere(opposite).unwrap()).unwrap();
        assert!(at_antipode.abs() < 1e-12, "K(2) = 0 at the antipode");
    }

    #[test]
    fn bridge_is_pinned_and_increments_sum_to_zero() {
        let mut rng = replication_rng(22, 0);
        for _ in 0..20 {
            let field = gen_bridge_field(500, &mut rng).unwrap();
            let values = field.circle_values().unwrap();
            assert_eq!(values[0], 0.0);
            // Wrapped increment chain returns to the start.
            let total: f64 = (0..values.len())
                .map(|i| values[(i + 1) % values.len()] - values[i])
                .sum();
            assert!(total.abs() < 1e-10);
        }
    }

    #[test]
    fn bridge_evaluation_uses_nearest_grid_point_below() {
        let mut rng = replication_rng(23, 0);
        let field = gen_bridge_field(10, &mut rng).unwrap();
        let values = field.circle_values().unwrap().to_vec();
        for i in 0..10 {
            let exactly = field.evaluate(&Point::circle(i as f64 / 10.0)).unwrap();
            assert_eq!(exactly, values[i]);
            let between = field
                .evaluate(&Point::circle(i as f64 / 10.0 + 0.05))
                .unwrap();
            assert_eq!(between, values[i]);
        }
    }

    #[test]
    fn shift_by_zero_is_identity_and_shifts_fix_origin() {
        let mut rng = replication_rng(24, 0);
        let field = gen_bridge_field(100, &mut rng).unwrap();
        let same = shift_field(&field, 0.0).unwrap();
        assert_eq!(field.circle_values().unwrap(), same.circle_values().unwrap());

        for u in [0.01, 0.25, 0.5, 0.99] {
            let shifted = shift_field(&field, u).unwrap();
            assert_eq!(shifted.circle_values().unwrap()[0], 0.0);
        }
        assert!(shift_field(&field, 0.005).is_err(), "off-grid shift");
    }

    #[test]
    fn shift_round_trip_preserves_increment_multiset() {
        let mut rng = replication_rng(25, 0);
        let field = gen_bridge_field(64, &mut rng).unwrap();
        let incs = |f: &FieldRealization| -> Vec<f64> {
            let v = f.circle_values().unwrap();
            let mut d: Vec<f64> = (0..v.len())
                .map(|i| v[(i + 1) % v.len()] - v[i])
                .collect();
            d.sort_by(f64::total_cmp);
            d
        };
        let u = 17.0 / 64.0;
        let back = shift_field(&shift_field(&field, u).unwrap(), 1.0 - u).unwrap();
        let (a, b) = (incs(&field), incs(&back));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn centering_removes_the_mean() {
        let constant = FieldRealization {
            space: Space::Circle,
            payload: FieldPayload::CircleGrid {
                values: vec![3.5; 40],
            },
            provenance: Provenance::default(),
        };
        let centered = center_field(&constant).unwrap();
        assert!(centered.circle_values().unwrap().iter().all(|v| *v == 0.0));

        let mut rng = replication_rng(26, 0);
        let field = gen_bridge_field(128, &mut rng).unwrap();
        let centered = center_field(&field).unwrap();
        let mean: f64 =
            centered.circle_values().unwrap().iter().sum::<f64>() / 128.0;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn matrix_entries_are_distinct_and_indexed_row_major() {
        let mut rng = replication_rng(27, 0);
        let field = gen_matrix_field(4, 5, &mut rng).unwrap();
        assert!(all_distinct(field.matrix_entries().unwrap()));

        let explicit =
            matrix_field_from_entries(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let space = Space::grid(2, 2).unwrap();
        assert_eq!(
            explicit
                .evaluate(&Point::grid(&space, 2, 1).unwrap())
                .unwrap(),
            3.0
        );
        assert!(matrix_field_from_entries(2, 2, vec![1.0, 2.0, 2.0, 4.0]).is_err());
    }

    #[test]
    fn biased_field_adds_exactly_the_bump_at_the_anchor() {
        let anchor = Point::north_pole(3).unwrap();
        let bump = 3.0;
        let mut rng = replication_rng(28, 0);
        let biased =
            gen_biased_field(3, 20, DEFAULT_KERNEL_EXPONENT, bump, &anchor, &mut rng).unwrap();
        let mut rng = replication_rng(28, 0);
        let plain = gen_kernel_field(3, 20, DEFAULT_KERNEL_EXPONENT, &mut rng).unwrap();
        let difference =
            biased.evaluate(&anchor).unwrap() - plain.evaluate(&anchor).unwrap();
        // bump * K(0) = bump.
        assert!((difference - bump).abs() < 1e-12);

        let mut rng = replication_rng(28, 0);
        let zero_bump =
            gen_biased_field(3, 20, DEFAULT_KERNEL_EXPONENT, 0.0, &anchor, &mut rng).unwrap();
        assert_eq!(
            zero_bump.evaluate(&anchor).unwrap(),
            plain.evaluate(&anchor).unwrap()
        );
    }

    #[test]
    fn kernel_field_is_isotropic_under_simultaneous_rotation() {
        use crate::group::{sample_nu, GroupSpec, Transform};
        let mut rng = replication_rng(29, 0);
        let field = gen_kernel_field(3, 5, DEFAULT_KERNEL_EXPONENT, &mut rng).unwrap();
        let group = GroupSpec::special_orthogonal(3).unwrap();
        let g = sample_nu(&group, &mut rng);
        let matrix = match &g {
            Transform::SphereRotation { matrix } => matrix.clone(),
            _ => unreachable!(),
        };
        let rotated_summits = match &field.payload {
            FieldPayload::Kernel { summits, .. } => summits
                .iter()
                .map(|s| matrix.mul_vec(s))
                .collect::<Vec<_>>(),
            _ => unreachable!(),
        };
        let rotated = FieldRealization {
            space: field.space,
            payload: FieldPayload::Kernel {
                summits: rotated_summits,
                exponent: DEFAULT_KERNEL_EXPONENT,
                bias: None,
            },
            provenance: Provenance::default(),
        };
        for _ in 0..20 {
            let t = crate::space::sample_mu(&field.space, &mut rng);
            let gt = crate::group::apply(&g, &t).unwrap();
            let lhs = rotated.evaluate(&gt).unwrap();
            let rhs = field.evaluate(&t).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn realization_json_round_trip() {
        let mut rng = replication_rng(30, 0);
        let field = gen_kernel_field(3, 4, 0.25, &mut rng)
            .unwrap()
            .with_seed(30);
        let json = serde_json::to_string(&field).unwrap();
        let back: FieldRealization = serde_json::from_str(&json).unwrap();
        assert_eq!(field, back);
        assert_eq!(back.provenance.seed, Some(30));
    }
}
