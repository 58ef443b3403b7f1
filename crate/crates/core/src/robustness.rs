//! Breakdown experiments, finite-sample relative efficiency and the
//! simulated limit covariance of the forward-search estimator.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::elliptical::{
    marginal_variance, radial_quantile, truncated_radial_moment, EllipticalModel, Family,
};
use crate::error::{invalid, Error, Result};
use crate::estimators::{forward_search, ForwardSearchConfig};
use crate::linalg::{cholesky, covariance, retained_count, Sample, SpdMatrix, SquareMatrix};
use crate::parallel::try_par_map;
use crate::rng::Seed;
use crate::test_engine::{TestKind, TestSetup, VarianceConstants};

/// Outlier magnitudes `10³, 10⁴, …, 10¹²`.
pub fn default_magnitudes() -> Vec<f64> {
    (3..=12).map(|k| 10f64.powi(k)).collect()
}

/// Outcome for one number of corrupted points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownLevel {
    pub corrupted: usize,
    pub fraction: f64,
    /// `‖μ̂(corrupted) - μ̂(clean)‖` at each magnitude.
    pub deviations: Vec<f64>,
    pub broke: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownResult {
    pub gamma: f64,
    pub n: usize,
    pub d: usize,
    pub magnitudes: Vec<f64>,
    pub levels: Vec<BreakdownLevel>,
    /// Smallest `n*/n` that broke, if any did.
    pub break_fraction: Option<f64>,
}

/// Deviation grows over the last three rungs and exceeds `1e-2` times the
/// largest magnitude.
fn is_unbounded(deviations: &[f64], magnitudes: &[f64]) -> bool {
    let k = deviations.len();
    let top = magnitudes[k - 1];
    let growing = deviations[k.saturating_sub(3)..].windows(2).all(|w| w[1] > w[0]);
    growing && deviations[k - 1] > 1e-2 * top
}

/// Replaces the first `n*` of `n` clean Gaussian points with points at
/// increasing distance from the anchor and records whether the
/// forward-search estimate follows them, for `n* = 1, …, n - 1`.
pub fn breakdown_experiment(gamma: f64, n: usize, d: usize, magnitudes: &[f64], seed: u64) -> Result<BreakdownResult> {
    if n < 2 {
        return Err(invalid("breakdown needs n >= 2"));
    }
    if magnitudes.len() < 3 || magnitudes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("magnitudes must be strictly increasing with at least three rungs"));
    }
    let cfg = ForwardSearchConfig::new(gamma, vec![0.0; d], SpdMatrix::identity(d))?;
    let seed = Seed(seed);
    let clean = EllipticalModel::standard(Family::Gaussian, d)?.sample(n, &mut seed.stream("breakdown-clean", 0));
    let base = forward_search(&clean, &cfg)?.value;
    // a shared direction plus per-point jitter keeps the outliers in general position
    let mut rng = seed.stream("breakdown-outliers", 0);
    let direction: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let offsets: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let raw: Vec<f64> = direction
                .iter()
                .map(|u| u + 0.1 * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            raw.into_iter().map(|v| v / norm).collect()
        })
        .collect();

    let levels = try_par_map(n - 1, |i| {
        let corrupted = i + 1;
        let deviations = magnitudes
            .iter()
            .map(|&m| {
                let mut data = clean.clone();
                for (j, unit) in offsets.iter().enumerate().take(corrupted) {
                    data.row_mut(j).iter_mut().zip(unit).for_each(|(y, u)| *y = m * u);
                }
                let est = forward_search(&data, &cfg)?.value;
                Ok(est.iter().zip(&base).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
            })
            .collect::<Result<Vec<f64>>>()?;
        let broke = is_unbounded(&deviations, magnitudes);
        Ok::<_, Error>(BreakdownLevel {
            corrupted,
            fraction: corrupted as f64 / n as f64,
            deviations,
            broke,
        })
    })?;
    let break_fraction = levels.iter().find(|l| l.broke).map(|l| l.fraction);
    Ok(BreakdownResult {
        gamma,
        n,
        d,
        magnitudes: magnitudes.to_vec(),
        levels,
        break_fraction,
    })
}

/// Break fraction predicted by counting: the trimmed mean keeps
/// `m = ⌊nγ⌋` points, so it follows the outliers once fewer than `m` clean
/// points remain, at `n* = n - m + 1`.
pub fn predicted_break_fraction(gamma: f64, n: usize) -> f64 {
    (n - retained_count(n, gamma) + 1) as f64 / n as f64
}

/// `(|COV(numerator)| / |COV(denominator)|)^{1/d}` over one replication set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyResult {
    pub numerator: TestKind,
    pub denominator: TestKind,
    pub family: Family,
    pub n: usize,
    pub d: usize,
    pub reps: usize,
    pub value: f64,
    /// Delete-a-group jackknife over ten groups.
    pub std_error: f64,
}

const JACKKNIFE_GROUPS: usize = 10;

fn log_det_covariance(estimates: &Sample) -> Result<f64> {
    let cov = covariance(estimates);
    let chol = cholesky(&cov).map_err(|_| Error::SingularCovariance)?;
    let log_det: f64 = (0..cov.dim()).map(|i| 2.0 * chol[(i, i)].ln()).sum();
    if log_det.is_finite() {
        Ok(log_det)
    } else {
        Err(Error::SingularCovariance)
    }
}

fn efficiency_ratio(num: &Sample, den: &Sample) -> Result<f64> {
    let d = num.dim() as f64;
    Ok(((log_det_covariance(num)? - log_det_covariance(den)?) / d).exp())
}

/// Relative efficiency of `denominator` against `numerator`; the tables use
/// the forward-search estimator as the denominator.
#[allow(clippy::too_many_arguments)]
pub fn finite_sample_efficiency(
    numerator: TestKind,
    denominator: TestKind,
    family: Family,
    n: usize,
    d: usize,
    reps: usize,
    gamma: f64,
    seed: u64,
) -> Result<EfficiencyResult> {
    if reps < 100 {
        return Err(invalid(format!("at least 100 replications are required, got {reps}")));
    }
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let model = EllipticalModel::standard(family, d)?;
    let setup = TestSetup::standard(d, gamma)?;
    let seed = Seed(seed).derive(family.name(), d as u64);
    let pairs = try_par_map(reps, |r| {
        let data = model.sample(n, &mut seed.stream("efficiency-data", r as u64));
        Ok::<_, Error>((setup.estimate(numerator, &data)?.value, setup.estimate(denominator, &data)?.value))
    })?;
    let collect = |keep: &dyn Fn(usize) -> bool| {
        let mut num = Sample::with_capacity(d, reps);
        let mut den = Sample::with_capacity(d, reps);
        for (r, (a, b)) in pairs.iter().enumerate() {
            if keep(r) {
                num.push(a);
                den.push(b);
            }
        }
        (num, den)
    };
    let (num, den) = collect(&|_| true);
    let value = efficiency_ratio(&num, &den)?;
    let group = |r: usize| r * JACKKNIFE_GROUPS / reps;
    let leave_out = (0..JACKKNIFE_GROUPS)
        .map(|g| {
            let (num, den) = collect(&|r| group(r) != g);
            efficiency_ratio(&num, &den)
        })
        .collect::<Result<Vec<f64>>>()?;
    let k = JACKKNIFE_GROUPS as f64;
    let mean = leave_out.iter().sum::<f64>() / k;
    let std_error = ((k - 1.0) / k * leave_out.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt();
    Ok(EfficiencyResult {
        numerator,
        denominator,
        family,
        n,
        d,
        reps,
        value,
        std_error,
    })
}

/// Simulated covariance of `√n(μ̂ - μ₀)` for the forward-search estimator
/// with the formula constant and the trimmed-moment oracle beside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCovariance {
    pub family: Family,
    pub gamma: f64,
    pub n: usize,
    pub reps: usize,
    pub covariance: SquareMatrix,
    /// Standard error of each covariance entry.
    pub std_errors: SquareMatrix,
    /// Scalar `c1` of the formula limit `c1·Σ` (`+∞` if it diverges).
    pub formula_constant: f64,
    /// `E[R² 1{R² ≤ q_γ}] / (dγ²)` with `q_γ` the `γ`-quantile of `R²`.
    pub trimmed_moment_oracle: f64,
}

/// Variance scalar of the limit of `√n(μ̂ - μ₀)` for the anchored trimmed
/// mean, by quadrature.
pub fn trimmed_moment_oracle(family: Family, d: usize, gamma: f64) -> Result<f64> {
    if gamma >= 1.0 {
        return marginal_variance(family, d);
    }
    let q = radial_quantile(family, d, gamma)?;
    Ok(truncated_radial_moment(family, d, q)? / (d as f64 * gamma * gamma))
}

pub fn empirical_limit_covariance(
    family: Family,
    gamma: f64,
    n: usize,
    d: usize,
    reps: usize,
    seed: u64,
) -> Result<LimitCovariance> {
    if reps < 2 || n == 0 {
        return Err(invalid("need reps >= 2 and n >= 1"));
    }
    let model = EllipticalModel::standard(family, d)?;
    let cfg = ForwardSearchConfig::new(gamma, vec![0.0; d], SpdMatrix::identity(d))?;
    let seed = Seed(seed).derive(family.name(), d as u64);
    let root_n = (n as f64).sqrt();
    let scaled = try_par_map(reps, |r| {
        let data = model.sample(n, &mut seed.stream("limit-covariance", r as u64));
        forward_search(&data, &cfg).map(|e| e.value.into_iter().map(|v| root_n * v).collect::<Vec<f64>>())
    })?;
    // second moments about the known centre
    let m = reps as f64;
    let mut cov = SquareMatrix::zeros(d);
    let mut sq = SquareMatrix::zeros(d);
    for z in &scaled {
        for i in 0..d {
            for j in 0..d {
                let p = z[i] * z[j];
                cov[(i, j)] += p;
                sq[(i, j)] += p * p;
            }
        }
    }
    let mut std_errors = SquareMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let mean = cov[(i, j)] / m;
            let var = (sq[(i, j)] / m - mean * mean).max(0.0) * m / (m - 1.0);
            cov[(i, j)] = mean;
            std_errors[(i, j)] = (var / m).sqrt();
        }
    }
    let formula_constant = VarianceConstants::new(family, d, gamma)?.c1;
    Ok(LimitCovariance {
        family,
        gamma,
        n,
        reps,
        covariance: cov,
        std_errors,
        formula_constant,
        trimmed_moment_oracle: trimmed_moment_oracle(family, d, gamma)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breakdown_matches_counting_argument() {
        for gamma in [0.3, 0.5, 0.7] {
            let r = breakdown_experiment(gamma, 20, 4, &default_magnitudes(), 7).unwrap();
            assert_eq!(r.break_fraction, Some(predicted_break_fraction(gamma, 20)));
            assert!(r.levels.windows(2).all(|w| w[0].broke <= w[1].broke));
        }
        assert_eq!(predicted_break_fraction(0.5, 20), 0.55);
    }

    #[test]
    fn single_outlier_is_trimmed() {
        let r = breakdown_experiment(0.5, 20, 4, &default_magnitudes(), 3).unwrap();
        assert!(r.levels[0].deviations.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn self_efficiency_is_one_and_reversal_inverts() {
        let same = finite_sample_efficiency(TestKind::T1, TestKind::T1, Family::Gaussian, 20, 2, 200, 0.5, 1).unwrap();
        assert_eq!(same.value, 1.0);
        let a = finite_sample_efficiency(TestKind::T2, TestKind::T1, Family::Cauchy, 20, 2, 200, 0.5, 1).unwrap();
        let b = finite_sample_efficiency(TestKind::T1, TestKind::T2, Family::Cauchy, 20, 2, 200, 0.5, 1).unwrap();
        assert!((a.value * b.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_estimator_covariance_is_singular() {
        // n = 1 with γ = 0.5 keeps the single point, so the estimates vary;
        // a degenerate sample instead gives a zero covariance
        let s = Sample::from_rows(&[[1.0, 1.0]; 10]).unwrap();
        assert_eq!(log_det_covariance(&s), Err(Error::SingularCovariance));
    }

    #[test]
    fn trimmed_oracle_gaussian_full_retention_is_one() {
        assert!((trimmed_moment_oracle(Family::Gaussian, 3, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_trimmed_oracle_closed_form() {
        // E[R² 1{R² ≤ q}] = d·P(χ²_{d+2} ≤ q); for d = 2 this is 2(1 - e^{-q/2}(1 + q/2))
        let q = radial_quantile(Family::Gaussian, 2, 0.5).unwrap();
        let expect = 2.0 * (1.0 - (-q / 2.0).exp() * (1.0 + q / 2.0)) / (2.0 * 0.25);
        assert!((trimmed_moment_oracle(Family::Gaussian, 2, 0.5).unwrap() - expect).abs() < 1e-9);
    }
}
