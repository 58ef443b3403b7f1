//! Monte Carlo for `Σ λᵢ (Zᵢ + aᵢ)²`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::LimitSpec;
use crate::error::{invalid, Result};
use crate::parallel::par_map;
use crate::rng::Seed;

/// Smallest Monte Carlo size accepted for a critical value.
pub const MIN_MC_SAMPLES: usize = 10_000;

/// Draws per random stream; fixed so output does not depend on threads.
const CHUNK: usize = 4096;

/// A Monte Carlo quantile with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub value: f64,
    pub std_error: f64,
    pub mc_samples: usize,
}

/// `count` draws of `Σ λᵢ (Zᵢ + aᵢ)²` from streams `(purpose, chunk)`.
pub fn weighted_chisq_draws(spec: &LimitSpec, count: usize, seed: Seed, purpose: &str) -> Vec<f64> {
    let chunks = count.div_ceil(CHUNK);
    let parts = par_map(chunks, |c| {
        let mut rng = seed.stream(purpose, c as u64);
        let len = CHUNK.min(count - c * CHUNK);
        (0..len)
            .map(|_| {
                spec.weights()
                    .iter()
                    .zip(spec.offsets())
                    .map(|(l, a)| {
                        let z: f64 = rng.sample(StandardNormal);
                        l * (z + a) * (z + a)
                    })
                    .sum::<f64>()
            })
            .collect::<Vec<f64>>()
    });
    parts.concat()
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// The `(1 - α)` order statistic `x_(⌈(1-α)N⌉)` and a standard error from
/// the order statistics `√(Nα(1-α))` positions either side. Sorts `values`.
pub(crate) fn upper_quantile(values: &mut [f64], alpha: f64) -> (f64, f64) {
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    let rank = (((1.0 - alpha) * n as f64).ceil() as usize).clamp(1, n);
    let spread = ((n as f64 * alpha * (1.0 - alpha)).sqrt().ceil() as usize).max(1);
    let lo = values[rank.saturating_sub(1 + spread)];
    let hi = values[(rank - 1 + spread).min(n - 1)];
    (values[rank - 1], 0.5 * (hi - lo))
}

/// `(1 - α)` quantile of the law in `spec`.
pub fn critical_value(spec: &LimitSpec, alpha: f64, mc_samples: usize, seed: Seed) -> Result<CriticalValue> {
    check_alpha(alpha)?;
    if mc_samples < MIN_MC_SAMPLES {
        return Err(invalid(format!(
            "mc_samples must be at least {MIN_MC_SAMPLES}, got {mc_samples}"
        )));
    }
    let mut draws = weighted_chisq_draws(spec, mc_samples, seed, "weighted-chisq-quantile");
    let (value, std_error) = upper_quantile(&mut draws, alpha);
    Ok(CriticalValue {
        value,
        std_error,
        mc_samples,
    })
}

/// `P(Σ λᵢ (Zᵢ + aᵢ)² > threshold)` and its binomial standard error.
pub fn exceedance_probability(spec: &LimitSpec, threshold: f64, mc_samples: usize, seed: Seed) -> Result<(f64, f64)> {
    if mc_samples == 0 {
        return Err(invalid("mc_samples must be positive"));
    }
    let draws = weighted_chisq_draws(spec, mc_samples, seed, "weighted-chisq-power");
    let p = draws.iter().filter(|&&x| x > threshold).count() as f64 / mc_samples as f64;
    Ok((p, (p * (1.0 - p) / mc_samples as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_reference_quantiles() {
        // χ²₁ and χ²₂ upper 5% points
        for (d, oracle) in [(1usize, 3.841_458_820_694_124), (2, 5.991_464_547_107_979)] {
            let spec = LimitSpec::central(vec![1.0; d]).unwrap();
            let cv = critical_value(&spec, 0.05, 200_000, Seed(3)).unwrap();
            assert!((cv.value - oracle).abs() < 3.0 * cv.std_error, "{cv:?} vs {oracle}");
        }
    }

    #[test]
    fn scaling_weights_scales_quantile() {
        let base = critical_value(&LimitSpec::central(vec![1.0, 2.0]).unwrap(), 0.1, 50_000, Seed(8)).unwrap();
        let scaled = critical_value(&LimitSpec::central(vec![3.0, 6.0]).unwrap(), 0.1, 50_000, Seed(8)).unwrap();
        // same streams, so the homogeneity holds draw by draw
        assert!((scaled.value - 3.0 * base.value).abs() <= 1e-12 * scaled.value);
    }

    #[test]
    fn sample_mean_matches_law_mean() {
        let spec = LimitSpec::new(vec![2.0, 0.5, 1.0], vec![1.0, -2.0, 0.0]).unwrap();
        let n = 100_000;
        let draws = weighted_chisq_draws(&spec, n, Seed(4), "mean");
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - spec.mean()).abs() < 3.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn rejects_bad_arguments() {
        let spec = LimitSpec::central(vec![1.0]).unwrap();
        assert!(critical_value(&spec, 0.0, 20_000, Seed(1)).is_err());
        assert!(critical_value(&spec, 0.05, 100, Seed(1)).is_err());
    }

    #[test]
    fn central_exceedance_is_alpha() {
        let spec = LimitSpec::central(vec![1.0; 4]).unwrap();
        let (p, se) = exceedance_probability(&spec, 9.487_729_036_781_154, 100_000, Seed(2)).unwrap();
        assert!((p - 0.05).abs() < 3.0 * se);
    }
}
