//! Sojourn statistics: the measure of the parameter set where a field stays
//! at or below a level, computed exactly on grids, by Riemann counting on
//! circle grids, and by (antithetic) Monte Carlo on continuous spaces.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldRealization;
use crate::space::{sample_antithetic_batch, sample_mu, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    Exact,
    Grid,
    McPlain,
    McAntithetic,
}

impl EstimateMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimateMethod::Exact => "exact",
            EstimateMethod::Grid => "grid",
            EstimateMethod::McPlain => "mc-plain",
            EstimateMethod::McAntithetic => "mc-antithetic",
        }
    }
}

/// One sojourn value together with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SojournEstimate {
    pub value: f64,
    pub method: EstimateMethod,
    /// Number of Monte Carlo evaluation points (0 for exact and grid paths).
    pub eval_points: usize,
    /// Anchor point, when the level is a field value rather than a constant.
    pub anchor: Option<Point>,
    /// The level compared against: `X(a)` for anchored statistics.
    pub anchor_value: f64,
    /// Exact ties between evaluated values and the level. Continuity of the
    /// sojourn function is an assumption of the continuous-space theory;
    /// ties are counted rather than assumed away.
    pub tie_count: usize,
}

/// Exact sojourn value on a grid: the rank of `X(a)` among all entries,
/// divided by the atom count. The rank comes from a sorted copy of the
/// entries; the oracle module recomputes it by pairwise counting as an
/// independent cross-check. Tied entries violate the distinctness
/// hypothesis and are an error.
pub fn sojourn_exact_discrete(field: &FieldRealization, anchor: &Point) -> Result<SojournEstimate> {
    let entries = field.matrix_entries()?;
    let mut sorted: Vec<f64> = entries.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::TiedValues(
            "matrix entries must be pairwise distinct".into(),
        ));
    }
    let anchor_value = field.evaluate(anchor)?;
    let rank = sorted.partition_point(|v| *v <= anchor_value);
    let n = entries.len();
    Ok(SojournEstimate {
        value: rank as f64 / n as f64,
        method: EstimateMethod::Exact,
        eval_points: 0,
        anchor: Some(anchor.clone()),
        anchor_value,
        tie_count: 0,
    })
}

/// Riemann approximation of the circle sojourn measure at a fixed level:
/// the fraction of grid values at or below `level`.
pub fn sojourn_grid_circle(field: &FieldRealization, level: f64) -> Result<SojournEstimate> {
    let values = field.circle_values()?;
    let below = values.iter().filter(|v| **v <= level).count();
    let ties = values.iter().filter(|v| **v == level).count();
    Ok(SojournEstimate {
        value: below as f64 / values.len() as f64,
        method: EstimateMethod::Grid,
        eval_points: 0,
        anchor: None,
        anchor_value: level,
        tie_count: ties,
    })
}

/// Monte Carlo estimate of the anchored sojourn statistic on a continuous
/// space: the fraction of `k` evaluation points where the field does not
/// exceed its value at the anchor. Antithetic mode draws `k/2` uniform
/// points plus their antipodes.
pub fn sojourn_mc<R: Rng + ?Sized>(
    field: &FieldRealization,
    anchor: &Point,
    k: usize,
    antithetic: bool,
    rng: &mut R,
) -> Result<SojournEstimate> {
    if !field.space.is_continuous() {
        return Err(Error::UnsupportedSpace {
            op: "sojourn_mc",
            space: field.space.to_string(),
        });
    }
    if k < 2 {
        return Err(Error::InvalidConfig(format!(
            "Monte Carlo needs k >= 2 evaluation points, got {k}"
        )));
    }
    if antithetic && k % 2 != 0 {
        return Err(Error::InvalidConfig(format!(
            "antithetic sampling needs an even k, got {k}"
        )));
    }
    let anchor_value = field.evaluate(anchor)?;
    let points = if antithetic {
        sample_antithetic_batch(&field.space, k / 2, rng)?
    } else {
        (0..k).map(|_| sample_mu(&field.space, rng)).collect()
    };
    let mut below = 0usize;
    let mut ties = 0usize;
    for p in &points {
        let v = field.evaluate(p)?;
        if v <= anchor_value {
            below += 1;
        }
        if v == anchor_value {
            ties += 1;
        }
    }
    Ok(SojournEstimate {
        value: below as f64 / k as f64,
        method: if antithetic {
            EstimateMethod::McAntithetic
        } else {
            EstimateMethod::McPlain
        },
        eval_points: k,
        anchor: Some(anchor.clone()),
        anchor_value,
        tie_count: ties,
    })
}

/// Fraction of the evaluation points whose field value is at or below `x`.
pub fn empirical_f(field: &FieldRealization, x: f64, eval_points: &[Point]) -> Result<f64> {
    if eval_points.is_empty() {
        return Err(Error::EmptyInput("empirical_f needs evaluation points"));
    }
    let mut below = 0usize;
    for p in eval_points {
        if field.evaluate(p)? <= x {
            below += 1;
        }
    }
    Ok(below as f64 / eval_points.len() as f64)
}

/// Sample quantile of the field over the evaluation points: the
/// `ceil(p * k)`-th order statistic of the evaluated values. On return the
/// quantile identity `|empirical_f(result) - p| <= 1/k` is verified; heavy
/// ties among evaluated values can break it and surface as an error.
pub fn empirical_quantile(
    field: &FieldRealization,
    p: f64,
    eval_points: &[Point],
) -> Result<f64> {
    if eval_points.is_empty() {
        return Err(Error::EmptyInput("empirical_quantile needs evaluation points"));
    }
    if !(0.0 < p && p < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "quantile level must lie in (0, 1), got {p}"
        )));
    }
    let mut values = Vec::with_capacity(eval_points.len());
    for point in eval_points {
        values.push(field.evaluate(point)?);
    }
    values.sort_by(f64::total_cmp);
    let k = values.len();
    let rank = (p * k as f64).ceil() as usize;
    let quantile = values[rank.clamp(1, k) - 1];

    let f_at_q = empirical_f(field, quantile, eval_points)?;
    let deviation = (f_at_q - p).abs();
    if deviation > 1.0 / k as f64 {
        return Err(Error::QuantileIdentity {
            deviation,
            eval_points: k,
        });
    }
    Ok(quantile)
}

/// Membership of `a` in the sampled level set `Q_X(p)`: whether the anchored
/// sojourn value does not exceed `p`.
pub fn in_level_set(field: &FieldRealization, anchor: &Point, p: f64) -> Result<bool> {
    let est = sojourn_exact_discrete(field, anchor)?;
    Ok(est.value <= p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{gen_kernel_field, matrix_field_from_entries, FieldPayload, Provenance};
    use crate::space::Space;
    use crate::streams::replication_rng;

    fn two_by_two() -> FieldRealization {
        matrix_field_from_entries(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    #[test]
    fn exact_discrete_ranks() {
        let field = two_by_two();
        let space = Space::grid(2, 2).unwrap();
        let cases = [((1, 1), 0.25), ((2, 2), 1.0), ((2, 1), 0.75)];
        for ((r, c), expected) in cases {
            let est =
                sojourn_exact_discrete(&field, &Point::grid(&space, r, c).unwrap()).unwrap();
            assert_eq!(est.value, expected);
            assert_eq!(est.method, EstimateMethod::Exact);
        }
    }

    #[test]
    fn exact_discrete_value_is_at_least_one_atom() {
        let mut rng = replication_rng(40, 0);
        let field = crate::field::gen_matrix_field(3, 3, &mut rng).unwrap();
        let space = Space::grid(3, 3).unwrap();
        for r in 1..=3 {
            for c in 1..=3 {
                let est =
                    sojourn_exact_discrete(&field, &Point::grid(&space, r, c).unwrap()).unwrap();
                assert!(est.value >= 1.0 / 9.0);
                let scaled = est.value * 9.0;
                assert!((scaled - scaled.round()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_circle_counts_levels() {
        let constant = FieldRealization {
            space: Space::Circle,
            payload: FieldPayload::CircleGrid {
                values: vec![0.0; 8],
            },
            provenance: Provenance::default(),
        };
        assert_eq!(sojourn_grid_circle(&constant, 0.0).unwrap().value, 1.0);

        let alternating = FieldRealization {
            space: Space::Circle,
            payload: FieldPayload::CircleGrid {
                values: vec![-1.0, 1.0, -1.0, 1.0],
            },
            provenance: Provenance::default(),
        };
        assert_eq!(sojourn_grid_circle(&alternating, 0.0).unwrap().value, 0.5);

        let mut rng = replication_rng(41, 0);
        let bridge = crate::field::gen_bridge_field(256, &mut rng).unwrap();
        let max = bridge
            .circle_values()
            .unwrap()
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(sojourn_grid_circle(&bridge, max).unwrap().value, 1.0);
    }

    #[test]
    fn mc_on_constant_field_is_one() {
        // A kernel field with zero summits is identically zero.
        let mut rng = replication_rng(42, 0);
        let field = gen_kernel_field(3, 0, 0.1, &mut rng).unwrap();
        let anchor = Point::north_pole(3).unwrap();
        for antithetic in [false, true] {
            let est = sojourn_mc(&field, &anchor, 100, antithetic, &mut rng).unwrap();
            assert_eq!(est.value, 1.0);
            assert_eq!(est.eval_points, 100);
            assert_eq!(est.tie_count, 100, "constant field ties everywhere");
        }
    }

    #[test]
    fn mc_values_live_on_the_estimator_grid() {
        let mut rng = replication_rng(43, 0);
        let field = gen_kernel_field(3, 20, 0.1, &mut rng).unwrap();
        let anchor = Point::north_pole(3).unwrap();
        for antithetic in [false, true] {
            let est = sojourn_mc(&field, &anchor, 100, antithetic, &mut rng).unwrap();
            let scaled = est.value * 100.0;
            assert!((scaled - scaled.round()).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&est.value));
        }
        assert!(sojourn_mc(&field, &anchor, 99, true, &mut rng).is_err());
        assert!(sojourn_mc(&field, &anchor, 1, false, &mut rng).is_err());
    }

    #[test]
    fn empirical_f_boundary_cases() {
        let mut rng = replication_rng(44, 0);
        let field = gen_kernel_field(3, 20, 0.1, &mut rng).unwrap();
        let space = Space::sphere(3).unwrap();
        let points: Vec<Point> = (0..101).map(|_| sample_mu(&space, &mut rng)).collect();
        let mut values: Vec<f64> = points
            .iter()
            .map(|p| field.evaluate(p).unwrap())
            .collect();
        values.sort_by(f64::total_cmp);

        assert_eq!(
            empirical_f(&field, values[0] - 1.0, &points).unwrap(),
            0.0
        );
        assert_eq!(
            empirical_f(&field, values[100], &points).unwrap(),
            1.0
        );
        // Median of 101 distinct values: 51 of them lie at or below it.
        assert_eq!(
            empirical_f(&field, values[50], &points).unwrap(),
            51.0 / 101.0
        );
    }

    #[test]
    fn quantile_is_the_order_statistic() {
        // A 1xN matrix gives a field with values 1..=100 at known cells.
        let entries: Vec<f64> = (1..=100).map(f64::from).collect();
        let field = matrix_field_from_entries(1, 100, entries).unwrap();
        let space = Space::grid(1, 100).unwrap();
        let points: Vec<Point> = (1..=100)
            .map(|c| Point::grid(&space, 1, c).unwrap())
            .collect();

        let q = empirical_quantile(&field, 0.3, &points).unwrap();
        assert_eq!(q, 30.0);
        assert_eq!(empirical_f(&field, q, &points).unwrap(), 0.30);

        // p just above (j-1)/k returns the j-th order statistic.
        let q = empirical_quantile(&field, 0.29 + 1e-9, &points).unwrap();
        assert_eq!(q, 30.0);
        let q = empirical_quantile(&field, 0.3 + 1e-9, &points).unwrap();
        assert_eq!(q, 31.0);
    }

    #[test]
    fn quantile_identity_detects_heavy_ties() {
        let field = FieldRealization {
            space: Space::Circle,
            payload: FieldPayload::CircleGrid {
                values: vec![1.0; 16],
            },
            provenance: Provenance::default(),
        };
        let points: Vec<Point> = (0..16).map(|i| Point::circle(i as f64 / 16.0)).collect();
        let err = empirical_quantile(&field, 0.5, &points).unwrap_err();
        assert!(matches!(err, Error::QuantileIdentity { .. }));
    }

    #[test]
    fn exact_sojourn_rejects_ties() {
        let field = FieldRealization {
            space: Space::grid(2, 2).unwrap(),
            payload: FieldPayload::Matrix {
                entries: vec![1.0, 2.0, 2.0, 4.0],
            },
            provenance: Provenance::default(),
        };
        let space = Space::grid(2, 2).unwrap();
        let err = sojourn_exact_discrete(&field, &Point::grid(&space, 1, 1).unwrap());
        assert!(matches!(err, Err(Error::TiedValues(_))));
    }
}
