//! Simulation and statistical verification of uniform sojourn laws for
//! random fields with group-invariance structure.
//!
//! A random field on a parameter space with a normalized measure spends a
//! random fraction of the space at or below its value at a fixed anchor
//! point. When the field's law is invariant under a transformation family
//! whose natural measure pushes the anchor forward to the uniform measure,
//! that fraction is uniformly distributed: U(0, 1) on continuous spaces,
//! uniform over `{1/N, ..., 1}` on finite ones.
//!
//! The crate provides the three concrete space/group/field families this
//! holds for (circle rotations, sphere rotations, cyclic grid shifts), exact
//! and Monte Carlo sojourn estimators, uniformity testing, an exhaustive
//! enumeration oracle for the discrete law, and a reproducible,
//! data-parallel experiment runner.

#![forbid(unsafe_code)]

pub mod error;
pub mod experiment;
pub mod field;
pub mod group;
mod linalg;
pub mod oracle;
pub mod report;
pub mod sojourn;
pub mod space;
pub mod stats;
pub mod streams;
pub mod svg;

pub use error::{Error, Result};
pub use experiment::{run, BaseMatrix, ExperimentConfig, ExperimentKind, RunOutput};
pub use field::{FieldPayload, FieldRealization, Provenance};
pub use group::{Family, GroupSpec, TestSet, Transform};
pub use linalg::SquareMatrix;
pub use oracle::OrbitLaw;
pub use report::{Report, UniformityReport, Verdict};
pub use sojourn::{EstimateMethod, SojournEstimate};
pub use space::{Point, Space};
pub use stats::Histogram;
