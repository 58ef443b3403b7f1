//! Forward-search location test for elliptical models.
//!
//! The crate compares four statistics for `H₀: μ = μ₀` with known scatter:
//! a forward-search trimmed mean anchored at `μ₀`, the sample mean, the
//! coordinatewise median and the coordinatewise Hodges–Lehmann estimator.
//! It provides the models, the estimators, weighted chi-squared critical
//! values, power campaigns, asymptotic efficiencies and robustness studies.

pub mod asymptotics;
pub mod dataset;
pub mod elliptical;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod parallel;
pub mod quadrature;
pub mod rng;
pub mod robustness;
pub mod table;
pub mod test_engine;

pub use elliptical::{EllipticalModel, Family, MixtureModel};
pub use error::{Error, Result};
pub use linalg::{Sample, SpdMatrix, SquareMatrix};
pub use rng::Seed;
pub use table::{Cell, Table};
pub use test_engine::{Calibration, LimitSpec, TestKind, TestReport, TestSetup};
