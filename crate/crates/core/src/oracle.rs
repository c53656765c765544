//! Exhaustive orbit enumeration: the exact law of the anchored rank
//! statistic under the uniform measure on a finite cyclic-shift family.
//!
//! This is the tolerance-free ground truth for every discrete acceptance
//! check. Ranks are computed by pairwise counting, deliberately independent
//! of the sort-based rank path used by the sojourn estimators.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::group::{apply, enumerate_group, GroupSpec};
use crate::space::Point;

/// Exact pmf of the rank statistic over a finite orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitLaw {
    /// Number of atoms N; ranks run over 1..=N.
    pub atoms: usize,
    /// `pmf[r - 1]` is the exact probability of rank `r`.
    pub pmf: Vec<Ratio<u64>>,
}

impl OrbitLaw {
    fn from_rank_counts(counts: Vec<u64>, orbit_size: u64) -> OrbitLaw {
        OrbitLaw {
            atoms: counts.len(),
            pmf: counts
                .into_iter()
                .map(|c| Ratio::new(c, orbit_size))
                .collect(),
        }
    }

    /// Exact rational total; must be 1 for any law.
    pub fn total(&self) -> Ratio<u64> {
        self.pmf.iter().sum()
    }

    /// Whether every rank has probability exactly 1/N.
    pub fn is_uniform(&self) -> bool {
        let target = Ratio::new(1, self.atoms as u64);
        self.pmf.iter().all(|p| *p == target)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.pmf
            .iter()
            .map(|p| *p.numer() as f64 / *p.denom() as f64)
            .collect()
    }

    /// Human-readable fractions, e.g. `"1/4"`.
    pub fn fractions(&self) -> Vec<String> {
        self.pmf
            .iter()
            .map(|p| format!("{}/{}", p.numer(), p.denom()))
            .collect()
    }
}

/// Rank of the entry at `anchor_index` by direct pairwise counting.
fn pairwise_rank(entries: &[f64], anchor_index: usize) -> usize {
    let pivot = entries[anchor_index];
    entries.iter().filter(|v| **v <= pivot).count()
}

fn check_distinct(entries: &[f64]) -> Result<()> {
    for (i, a) in entries.iter().enumerate() {
        if entries[i + 1..].iter().any(|b| a == b) {
            return Err(Error::TiedValues(
                "orbit enumeration requires pairwise distinct entries".into(),
            ));
        }
    }
    Ok(())
}

/// Law of the rank of the anchored cell over all cyclic row/column shifts of
/// a base matrix, under the uniform measure on shifts. `entries` is
/// row-major, `anchor` is a 1-based `(row, col)` pair.
pub fn enumerate_orbit_law(
    rows: usize,
    cols: usize,
    entries: &[f64],
    anchor: (usize, usize),
) -> Result<OrbitLaw> {
    let n = rows * cols;
    if entries.len() != n {
        return Err(Error::InvalidConfig(format!(
            "expected {} entries, got {}",
            n,
            entries.len()
        )));
    }
    let (ar, ac) = anchor;
    if ar == 0 || ac == 0 || ar > rows || ac > cols {
        return Err(Error::InvalidConfig(format!(
            "anchor ({ar},{ac}) outside a {rows}x{cols} grid"
        )));
    }
    check_distinct(entries)?;

    let group = GroupSpec::cyclic_shifts(rows, cols)?;
    let anchor_point = Point::grid(&group.space, ar, ac)?;
    let mut rank_counts = vec![0u64; n];
    for transform in enumerate_group(&group)? {
        // The shifted field at the anchor is the base entry at the shifted
        // cell; the multiset of entries is shift invariant, so the rank of
        // the shifted field at `anchor` is the base rank of that cell.
        let (row, col) = match apply(&transform, &anchor_point)? {
            Point::Grid { row, col } => (row, col),
            _ => unreachable!("grid shifts map grid points to grid points"),
        };
        let rank = pairwise_rank(entries, (row - 1) * cols + (col - 1));
        rank_counts[rank - 1] += 1;
    }
    Ok(OrbitLaw::from_rank_counts(rank_counts, n as u64))
}

/// Discrete-circle analogue: the law of the rank of the anchor value over
/// all cyclic shifts of a value sequence.
pub fn circle_shift_orbit_law(values: &[f64]) -> Result<OrbitLaw> {
    if values.is_empty() {
        return Err(Error::EmptyInput("circle orbit needs values"));
    }
    check_distinct(values)?;
    let n = values.len();
    let mut rank_counts = vec![0u64; n];
    for shift in 0..n {
        // After shifting by s the anchor (index 0) reads values[s]; count
        // the whole circle against it.
        let rank = pairwise_rank(values, shift);
        rank_counts[rank - 1] += 1;
    }
    Ok(OrbitLaw::from_rank_counts(rank_counts, n as u64))
}
