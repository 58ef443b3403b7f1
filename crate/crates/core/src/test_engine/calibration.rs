//! Critical values from the limit law or from simulated null datasets, and
//! the [`TestReport`] produced by a single test.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::weighted_chisq::{check_alpha, critical_value, upper_quantile, CriticalValue};
use super::{limit_weights, TestKind, TestSetup};
use crate::elliptical::{EllipticalModel, Family};
use crate::error::{invalid, Error, Result};
use crate::linalg::Sample;
use crate::parallel::try_par_map;
use crate::rng::Seed;

/// Version tag carried by every serialized [`TestReport`].
pub const REPORT_SCHEMA: &str = "fstest/1";

/// How the critical value is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Calibration {
    /// `(1 - α)` quantile of the weighted chi-squared limit law.
    Formula,
    /// `(1 - α)` quantile of the statistic over datasets simulated under `H₀`.
    Empirical,
}

impl fmt::Display for Calibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Calibration::Formula => "formula",
            Calibration::Empirical => "empirical",
        })
    }
}

impl FromStr for Calibration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "formula" => Ok(Calibration::Formula),
            "empirical" => Ok(Calibration::Empirical),
            other => Err(invalid(format!(
                "unknown calibration '{other}' (expected formula or empirical)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Reject,
    Retain,
}

impl Decision {
    /// Reject iff `value > critical`.
    pub fn from_values(value: f64, critical: f64) -> Self {
        if value > critical {
            Decision::Reject
        } else {
            Decision::Retain
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Reject => "reject",
            Decision::Retain => "retain",
        })
    }
}

/// Outcome of one test on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub schema: String,
    pub statistic: TestKind,
    pub value: f64,
    pub critical_value: f64,
    pub critical_value_se: f64,
    pub alpha: f64,
    pub decision: Decision,
    pub p_value: Option<f64>,
    pub calibration: Calibration,
    /// Weighted chi-squared draws (formula) or null datasets (empirical).
    pub mc_samples: usize,
    pub seed: u64,
}

impl TestReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Statistics for `kinds` over `reps` datasets of size `n` drawn from the
/// `H₀` model; result is indexed `[kind position][replication]`.
pub fn null_statistics(
    family: Family,
    setup: &TestSetup,
    kinds: &[TestKind],
    n: usize,
    reps: usize,
    seed: Seed,
) -> Result<Vec<Vec<f64>>> {
    if n == 0 || reps == 0 {
        return Err(invalid("null simulation needs n >= 1 and reps >= 1"));
    }
    let model = EllipticalModel::new(family, setup.mu0().to_vec(), setup.sigma().clone())?;
    let per_rep = try_par_map(reps, |r| {
        let data = model.sample(n, &mut seed.stream("null-data", r as u64));
        kinds
            .iter()
            .map(|&k| setup.statistic(k, &data))
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok((0..kinds.len())
        .map(|j| per_rep.iter().map(|row| row[j]).collect())
        .collect())
}

/// `(1 - α)` quantile of simulated null statistics.
pub(crate) fn empirical_critical_value(mut null: Vec<f64>, alpha: f64) -> CriticalValue {
    let mc_samples = null.len();
    let (value, std_error) = upper_quantile(&mut null, alpha);
    CriticalValue {
        value,
        std_error,
        mc_samples,
    }
}

/// Critical value for `kind` under the chosen calibration.
///
/// `mc_samples` is the weighted chi-squared draw count (formula) or the
/// number of null datasets of size `n` (empirical).
#[allow(clippy::too_many_arguments)]
pub fn calibrate(
    kind: TestKind,
    family: Family,
    setup: &TestSetup,
    n: usize,
    alpha: f64,
    calibration: Calibration,
    mc_samples: usize,
    seed: Seed,
) -> Result<CriticalValue> {
    check_alpha(alpha)?;
    match calibration {
        Calibration::Formula => {
            let spec = limit_weights(kind, family, setup.sigma(), setup.gamma())?;
            critical_value(&spec, alpha, mc_samples, seed)
        }
        Calibration::Empirical => {
            let mut null = null_statistics(family, setup, &[kind], n, mc_samples, seed)?;
            Ok(empirical_critical_value(null.remove(0), alpha))
        }
    }
}

/// Computes the statistic on `data` and compares it with its critical value.
#[allow(clippy::too_many_arguments)]
pub fn run_test(
    kind: TestKind,
    data: &Sample,
    setup: &TestSetup,
    family: Family,
    alpha: f64,
    calibration: Calibration,
    mc_samples: usize,
    seed: u64,
) -> Result<TestReport> {
    let value = setup.statistic(kind, data)?;
    let cv = calibrate(kind, family, setup, data.len(), alpha, calibration, mc_samples, Seed(seed))?;
    Ok(TestReport {
        schema: REPORT_SCHEMA.to_string(),
        statistic: kind,
        value,
        critical_value: cv.value,
        critical_value_se: cv.std_error,
        alpha,
        decision: Decision::from_values(value, cv.value),
        p_value: None,
        calibration,
        mc_samples: cv.mc_samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn datum_at_anchor_is_retained() {
        let setup = TestSetup::standard(2, 0.5).unwrap();
        let data = Sample::from_rows(&[[0.0, 0.0]]).unwrap();
        for kind in TestKind::ALL {
            let r = run_test(kind, &data, &setup, Family::Gaussian, 0.05, Calibration::Formula, 20_000, 1).unwrap();
            assert_eq!(r.value, 0.0);
            assert_eq!(r.decision, Decision::Retain);
        }
    }

    #[test]
    fn far_shift_is_rejected() {
        let setup = TestSetup::standard(4, 0.5).unwrap();
        let model = EllipticalModel::standard(Family::Gaussian, 4).unwrap().shifted(&[5.0; 4]).unwrap();
        let data = model.sample(100, &mut Seed(1).stream("far", 0));
        for kind in TestKind::ALL {
            let r = run_test(kind, &data, &setup, Family::Gaussian, 0.05, Calibration::Empirical, 500, 2).unwrap();
            assert_eq!(r.decision, Decision::Reject, "{kind}");
        }
    }

    #[test]
    fn decision_is_monotone_in_alpha() {
        let setup = TestSetup::standard(2, 0.5).unwrap();
        let model = EllipticalModel::standard(Family::Gaussian, 2).unwrap().shifted(&[0.2, 0.1]).unwrap();
        let data = model.sample(60, &mut Seed(4).stream("mono", 0));
        for kind in TestKind::ALL {
            let mut rejected = true;
            for alpha in [0.5, 0.2, 0.1, 0.05, 0.01, 0.001] {
                let r = run_test(kind, &data, &setup, Family::Gaussian, alpha, Calibration::Formula, 20_000, 9).unwrap();
                let now = r.decision == Decision::Reject;
                assert!(rejected || !now, "{kind} flipped to reject at alpha {alpha}");
                rejected = now;
            }
        }
    }

    #[test]
    fn report_json_shape() {
        let setup = TestSetup::standard(1, 0.5).unwrap();
        let data = Sample::from_rows(&[[0.5], [0.1]]).unwrap();
        let r = run_test(TestKind::T2, &data, &setup, Family::Gaussian, 0.05, Calibration::Formula, 10_000, 3).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["statistic", "value", "critical_value", "alpha", "decision", "p_value", "mc_samples", "seed"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["schema"], "fstest/1");
        assert_eq!(v["statistic"], "T2");
        assert_eq!(v["decision"], "retain");
        let back: TestReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
