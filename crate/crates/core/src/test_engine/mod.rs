//! The four location tests, their limiting weighted chi-squared laws and
//! the Monte Carlo machinery around them.
//!
//! Every statistic has the form `n‖μ̂ - μ₀‖²` for a location estimator
//! `μ̂`. Under `H₀` it converges to `Σ λᵢ Zᵢ²` with `λ` the eigenvalues of
//! `c·Σ`, where the scalar `c` depends on the estimator and the family.

mod bootstrap;
mod calibration;
mod power;
mod weighted_chisq;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bootstrap::bootstrap_p_value;
pub use calibration::{
    calibrate, null_statistics, run_test, Calibration, Decision, TestReport, REPORT_SCHEMA,
};
pub use power::{power_curve, power_table, PowerConfig, PowerRow, ALTERNATIVE_SHIFT};
pub use weighted_chisq::{
    critical_value, exceedance_probability, weighted_chisq_draws, CriticalValue,
    MIN_MC_SAMPLES,
};

use crate::elliptical::{marginal_constants, marginal_variance, radial_integral, Family, RadialPower};
use crate::error::{invalid, Error, Result};
use crate::estimators::{
    cw_median, forward_search, hodges_lehmann, sample_mean, Estimate, ForwardSearchConfig,
};
use crate::linalg::{Sample, SpdMatrix};
use crate::quadrature::ln_sphere_factor;

/// Which statistic: forward search, mean, coordinatewise median or
/// Hodges–Lehmann.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TestKind {
    T1,
    T2,
    T3,
    T4,
}

impl TestKind {
    pub const ALL: [TestKind; 4] = [TestKind::T1, TestKind::T2, TestKind::T3, TestKind::T4];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            TestKind::T1 => "T1",
            TestKind::T2 => "T2",
            TestKind::T3 => "T3",
            TestKind::T4 => "T4",
        }
    }

    pub fn estimator_name(self) -> &'static str {
        match self {
            TestKind::T1 => "forward search",
            TestKind::T2 => "sample mean",
            TestKind::T3 => "cw median",
            TestKind::T4 => "hodges-lehmann",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1" | "1" | "fs" | "forward" | "forward-search" => Ok(TestKind::T1),
            "t2" | "2" | "mean" => Ok(TestKind::T2),
            "t3" | "3" | "median" | "cw-median" => Ok(TestKind::T3),
            "t4" | "4" | "hl" | "hodges-lehmann" => Ok(TestKind::T4),
            other => Err(invalid(format!("unknown test '{other}' (expected T1..T4)"))),
        }
    }
}

/// Anchor, scatter and forward-search fraction shared by all four tests.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSetup {
    fs: ForwardSearchConfig,
}

impl TestSetup {
    pub fn new(mu0: Vec<f64>, sigma: SpdMatrix, gamma: f64) -> Result<Self> {
        Ok(Self {
            fs: ForwardSearchConfig::new(gamma, mu0, sigma)?,
        })
    }

    /// Origin anchor with identity scatter.
    pub fn standard(d: usize, gamma: f64) -> Result<Self> {
        Self::new(vec![0.0; d], SpdMatrix::identity(d), gamma)
    }

    pub fn dim(&self) -> usize {
        self.fs.mu0().len()
    }

    pub fn gamma(&self) -> f64 {
        self.fs.gamma()
    }

    pub fn mu0(&self) -> &[f64] {
        self.fs.mu0()
    }

    pub fn sigma(&self) -> &SpdMatrix {
        self.fs.sigma()
    }

    pub fn estimate(&self, kind: TestKind, data: &Sample) -> Result<Estimate> {
        if data.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: data.dim(),
            });
        }
        match kind {
            TestKind::T1 => forward_search(data, &self.fs),
            TestKind::T2 => sample_mean(data),
            TestKind::T3 => cw_median(data),
            TestKind::T4 => hodges_lehmann(data),
        }
    }

    /// `n‖μ̂ - μ₀‖²`.
    pub fn statistic(&self, kind: TestKind, data: &Sample) -> Result<f64> {
        let est = self.estimate(kind, data)?;
        Ok(self.scaled_norm_sq(&est.value, data.len()))
    }

    pub(crate) fn scaled_norm_sq(&self, value: &[f64], n: usize) -> f64 {
        let sq: f64 = value
            .iter()
            .zip(self.mu0())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        n as f64 * sq
    }

    /// All four statistics on one dataset, indexed by [`TestKind::index`].
    pub fn all_statistics(&self, data: &Sample) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for kind in TestKind::ALL {
            out[kind.index()] = self.statistic(kind, data)?;
        }
        Ok(out)
    }
}

/// `n‖μ̂ - μ₀‖²` for the estimator selected by `kind`.
pub fn statistic(kind: TestKind, data: &Sample, setup: &TestSetup) -> Result<f64> {
    setup.statistic(kind, data)
}

/// Scalars multiplying `Σ` in the limiting covariance of `√n(μ̂ - μ₀)`.
///
/// `c1` and `sigma2_sq` are `+∞` when the required moment diverges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceConstants {
    pub c1: f64,
    pub sigma2_sq: f64,
    pub sigma3_sq: f64,
    pub sigma4_sq: f64,
}

impl VarianceConstants {
    /// `c1 = (1/(dγ)) (π^{d/2}/Γ(d/2)) I₁(d)`, `σ₂² = Var(Y₁)`,
    /// `σ₃² = 1/(4 g₁(0)²)`, `σ₄² = 1/(12 (∫g₁²)²)`.
    pub fn new(family: Family, d: usize, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(invalid(format!("gamma must lie in (0, 1], got {gamma}")));
        }
        let c1 = match radial_integral(family, d, RadialPower::One) {
            Ok(i1) => (ln_sphere_factor(d) + i1.ln()).exp() / (d as f64 * gamma),
            Err(Error::DivergentIntegral(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        let sigma2_sq = marginal_variance(family, d)?;
        let m = marginal_constants(family, d)?;
        Ok(Self {
            c1,
            sigma2_sq,
            sigma3_sq: 1.0 / (4.0 * m.density_at_zero.powi(2)),
            sigma4_sq: 1.0 / (12.0 * m.squared_density_integral.powi(2)),
        })
    }

    pub fn for_kind(&self, kind: TestKind) -> f64 {
        match kind {
            TestKind::T1 => self.c1,
            TestKind::T2 => self.sigma2_sq,
            TestKind::T3 => self.sigma3_sq,
            TestKind::T4 => self.sigma4_sq,
        }
    }
}

/// `Σ λᵢ (Zᵢ + aᵢ)²`: weights and offsets of a (non)central weighted
/// chi-squared law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSpec {
    weights: Vec<f64>,
    offsets: Vec<f64>,
}

impl LimitSpec {
    pub fn new(weights: Vec<f64>, offsets: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("at least one weight is required"));
        }
        if weights.len() != offsets.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                got: offsets.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(invalid(format!("weights must be finite and positive, got {w}")));
        }
        if let Some(pos) = offsets.iter().position(|a| !a.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { weights, offsets })
    }

    pub fn central(weights: Vec<f64>) -> Result<Self> {
        let d = weights.len();
        Self::new(weights, vec![0.0; d])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn with_offsets(&self, offsets: Vec<f64>) -> Result<Self> {
        Self::new(self.weights.clone(), offsets)
    }

    /// `E[Σ λᵢ (Zᵢ + aᵢ)²] = Σ λᵢ (1 + aᵢ²)`.
    pub fn mean(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.offsets)
            .map(|(l, a)| l * (1.0 + a * a))
            .sum()
    }
}

/// Central limit law of `kind` under `H₀`: eigenvalues of `c·Σ`.
pub fn limit_weights(kind: TestKind, family: Family, sigma: &SpdMatrix, gamma: f64) -> Result<LimitSpec> {
    let consts = VarianceConstants::new(family, sigma.dim(), gamma)?;
    let c = consts.for_kind(kind);
    if !c.is_finite() {
        return Err(match kind {
            TestKind::T2 => Error::InfiniteVariance(format!(
                "the {family} marginal has infinite variance, so T2 has no limit law"
            )),
            _ => Error::DivergentIntegral(format!(
                "the {kind} limit constant diverges for the {family} family"
            )),
        });
    }
    LimitSpec::central(sigma.eigenvalues().iter().map(|l| c * l).collect())
}
